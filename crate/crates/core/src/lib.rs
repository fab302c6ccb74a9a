//! Energy-minimal resource allocation for a fading two-way relay network.
//!
//! Two sources exchange messages through a half-duplex relay with no direct
//! link. For a required pair of average rates, each transmission strategy
//! (function-decoding uplink with superposed or zero-padded downlink,
//! multi-access uplink with time-shared, network-coded-superposed or
//! codeword-superposed downlink) induces a convex resource-allocation
//! problem over time fractions and channel-state-dependent powers. This
//! crate solves each of them by dual bisection over a shared set of fading
//! samples, verifies the closed forms against brute-force oracles, and
//! selects the cheapest strategy for a given rate pair.
//!
//! The math is generic over the floating-point scalar; `f64` aliases are
//! exported at the crate root and are what the CLI uses.

pub mod alloc;
pub mod error;
pub mod fading;
pub mod oracle;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default scalar for the solvers and the CLI.
pub type F = f64;

pub type ChannelSample64 = fading::ChannelSample<F>;
pub type FadingSpec64 = fading::FadingSpec<F>;
pub type SampleSet64 = fading::SampleSet<F>;
pub type ModeAllocation64 = alloc::ModeAllocation<F>;
pub type Multipliers64 = alloc::Multipliers<F>;
pub type RateRequirement64 = solvers::RateRequirement<F>;
pub type SolverConfig64 = solvers::SolverConfig<F>;
pub type StrategySolution64 = solvers::StrategySolution<F>;
