//! Strategy-level optimizers.
//!
//! Each strategy fixes a set of transmission modes and a rate constraint per
//! mode stream. At the optimum every active mode shares the same marginal
//! dual value `gamma = avg_power - sum(beta * avg_rate)` and the time
//! fractions fill the slot. The solvers run the multi-level bisection: an
//! outer search on the anchor mode's time fraction, a multiplier bisection
//! per rate target inside, and a `gamma`-equalization bisection for every
//! other mode.

mod engine;
mod strategies;

use std::cell::Cell;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::alloc::Multipliers;
use crate::error::{Error, Result};
use crate::fading::{ChannelSample, SampleSet};
use crate::scalar::{c, ln_2, Scalar};

use engine::{EvalCounter, MacCache, OneCache, PncUpCache, TwoCache, WfCache};

/// Required average rate pair in frames/slot; `lambda1` flows from source 1
/// to source 2 and `lambda2` the other way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRequirement<S> {
    pub lambda1: S,
    pub lambda2: S,
}

impl<S: Scalar> RateRequirement<S> {
    pub fn new(lambda1: S, lambda2: S) -> Result<Self> {
        let req = RateRequirement { lambda1, lambda2 };
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !(v.is_finite() && v >= S::zero()) {
                return Err(Error::Config {
                    field,
                    reason: format!("rate must be finite and nonnegative, got {v}"),
                });
            }
        }
        if self.lambda1 <= S::zero() && self.lambda2 <= S::zero() {
            return Err(Error::Config {
                field: "lambda1",
                reason: "at least one of the two rates must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Bisection tolerances. The inner (multiplier-level) tolerance must be
/// tighter than the outer (time-fraction) tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<S> {
    pub eps_inner: S,
    pub eps_outer: S,
    pub max_iter: usize,
    pub bracket_max: S,
}

impl<S: Scalar> Default for SolverConfig<S> {
    fn default() -> Self {
        SolverConfig {
            eps_inner: c(1e-6),
            eps_outer: c(1e-3),
            max_iter: 200,
            bracket_max: c(1e6),
        }
    }
}

impl<S: Scalar> SolverConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_inner > S::zero() && self.eps_inner.is_finite()) {
            return Err(Error::Config {
                field: "eps_inner",
                reason: format!("must be positive, got {}", self.eps_inner),
            });
        }
        if !(self.eps_outer > S::zero() && self.eps_outer.is_finite()) {
            return Err(Error::Config {
                field: "eps_outer",
                reason: format!("must be positive, got {}", self.eps_outer),
            });
        }
        if self.eps_inner >= self.eps_outer {
            return Err(Error::Config {
                field: "eps_inner",
                reason: format!(
                    "inner tolerance {} must be tighter than outer tolerance {}",
                    self.eps_inner, self.eps_outer
                ),
            });
        }
        if self.max_iter == 0 {
            return Err(Error::Config {
                field: "max_iter",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.bracket_max > S::zero() && self.bracket_max.is_finite()) {
            return Err(Error::Config {
                field: "bracket_max",
                reason: format!("must be positive and finite, got {}", self.bracket_max),
            });
        }
        Ok(())
    }
}

/// The five transmission strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    PncZp,
    PncSup,
    DncTs,
    DncSup,
    CwSup,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::PncZp,
        Strategy::PncSup,
        Strategy::DncTs,
        Strategy::DncSup,
        Strategy::CwSup,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Strategy::PncZp => "pnc_zp",
            Strategy::PncSup => "pnc_sup",
            Strategy::DncTs => "dnc_ts",
            Strategy::DncSup => "dnc_sup",
            Strategy::CwSup => "cw_sup",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pnc_zp" => Ok(Strategy::PncZp),
            "pnc_sup" => Ok(Strategy::PncSup),
            "dnc_ts" => Ok(Strategy::DncTs),
            "dnc_sup" => Ok(Strategy::DncSup),
            "cw_sup" => Ok(Strategy::CwSup),
            other => Err(Error::Config {
                field: "strategy",
                reason: format!("unknown strategy id `{other}`"),
            }),
        }
    }
}

/// Converged resource allocation for one strategy.
///
/// When `swapped` is set the requirement had `lambda1 > lambda2` and the
/// solve ran on the mirrored sample set with the rates exchanged; all labels
/// refer to the canonicalized roles (source 1 carries the smaller rate).
#[derive(Debug, Clone)]
pub struct StrategySolution<S> {
    pub strategy: Strategy,
    pub fractions: BTreeMap<String, S>,
    pub multipliers: Multipliers<S>,
    pub avg_rates: BTreeMap<String, S>,
    pub avg_powers: BTreeMap<String, S>,
    pub total_energy: S,
    pub gamma: S,
    pub converged: bool,
    pub iterations: usize,
    pub swapped: bool,
}

impl<S: Scalar> StrategySolution<S> {
    pub fn fraction(&self, mode: &str) -> S {
        self.fractions.get(mode).copied().unwrap_or_else(S::zero)
    }

    pub fn avg_rate(&self, stream: &str) -> S {
        self.avg_rates.get(stream).copied().unwrap_or_else(S::zero)
    }

    pub fn avg_power(&self, mode: &str) -> S {
        self.avg_powers.get(mode).copied().unwrap_or_else(S::zero)
    }
}

/// Which pointwise allocator a dual solve runs against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeAllocatorId {
    /// Plain water-fill against one link gain.
    P2p(LinkGain),
    /// Function-decoding uplink (single XOR stream).
    PncUplink,
    /// Multi-access uplink; streams are the two sources' messages.
    MacUplink,
    /// Superposition downlink; streams are (common, private-to-source-1).
    BcDownlink,
    /// Codeword-superposition downlink; streams are (to-source-1, to-source-2).
    CwDownlink,
}

/// Selects the per-sample gain a point-to-point mode water-fills against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkGain {
    G1r,
    G2r,
    Gr1,
    Gr2,
    /// The weaker of the two downlink gains; a broadcast message decodable
    /// by both receivers is limited by it.
    MinDownlink,
}

impl LinkGain {
    pub fn extract<S: Scalar>(&self, s: &ChannelSample<S>) -> S {
        match self {
            LinkGain::G1r => s.g_1r,
            LinkGain::G2r => s.g_2r,
            LinkGain::Gr1 => s.g_r1,
            LinkGain::Gr2 => s.g_r2,
            LinkGain::MinDownlink => s.g_r1.min(s.g_r2),
        }
    }
}

/// Result of solving one mode's multipliers for given average-rate targets.
#[derive(Debug, Clone)]
pub struct ModeDualSolution<S> {
    pub multipliers: Multipliers<S>,
    pub avg_rates: Vec<S>,
    pub avg_power: S,
    pub iterations: usize,
}

fn wf_cache_for<S: Scalar>(link: LinkGain, samples: &SampleSet<S>) -> WfCache<S> {
    WfCache::from_gains(
        samples.samples().iter().map(|s| link.extract(s)).collect(),
        samples.len(),
    )
}

/// Finds multiplier(s) driving the mode's sample-average rate(s) to the
/// targets by bisection; the average rate of every stream is nondecreasing
/// in its own multiplier, which the bisection asserts as it runs.
pub fn mode_dual_solve<S: Scalar>(
    mode: ModeAllocatorId,
    targets: &[S],
    samples: &SampleSet<S>,
    cfg: &SolverConfig<S>,
) -> Result<ModeDualSolution<S>> {
    cfg.validate()?;
    for (i, &t) in targets.iter().enumerate() {
        if !(t.is_finite() && t >= S::zero()) {
            return Err(Error::Contract(format!(
                "target {i} must be finite and nonnegative, got {t}"
            )));
        }
    }
    let n_streams = match mode {
        ModeAllocatorId::P2p(_) | ModeAllocatorId::PncUplink => 1,
        _ => 2,
    };
    if targets.len() != n_streams {
        return Err(Error::Contract(format!(
            "mode expects {n_streams} rate target(s), got {}",
            targets.len()
        )));
    }
    let evals_cell = Cell::new(0usize);
    let evals = EvalCounter(&evals_cell);
    let ln2 = ln_2::<S>();
    let mut multipliers = Multipliers::default();
    let solution = match mode {
        ModeAllocatorId::P2p(link) => {
            let cache = OneCache::Wf(wf_cache_for(link, samples));
            let out = engine::solve_rate_one(&cache, targets[0], cfg, None, &evals)?;
            multipliers.values.insert("beta1".into(), out.t * ln2);
            ModeDualSolution {
                multipliers,
                avg_rates: vec![out.rate],
                avg_power: out.power,
                iterations: evals_cell.get(),
            }
        }
        ModeAllocatorId::PncUplink => {
            let cache = OneCache::PncUp(PncUpCache::new(samples));
            let out = engine::solve_rate_one(&cache, targets[0], cfg, None, &evals)?;
            multipliers.values.insert("beta1".into(), out.t * ln2);
            ModeDualSolution {
                multipliers,
                avg_rates: vec![out.rate],
                avg_power: out.power,
                iterations: evals_cell.get(),
            }
        }
        ModeAllocatorId::MacUplink | ModeAllocatorId::BcDownlink | ModeAllocatorId::CwDownlink => {
            let cache = match mode {
                ModeAllocatorId::MacUplink => TwoCache::Mac(MacCache::new(samples)),
                ModeAllocatorId::BcDownlink => TwoCache::Bc(engine::BcCache::new(samples)),
                _ => TwoCache::Cw(
                    wf_cache_for(LinkGain::Gr1, samples),
                    wf_cache_for(LinkGain::Gr2, samples),
                ),
            };
            let out = engine::solve_two_targets(
                &cache,
                [targets[0], targets[1]],
                cfg,
                [None, None],
                &evals,
            )?;
            multipliers.values.insert("beta1".into(), out.t[0] * ln2);
            multipliers.values.insert("beta2".into(), out.t[1] * ln2);
            ModeDualSolution {
                multipliers,
                avg_rates: out.rate.to_vec(),
                avg_power: out.power,
                iterations: evals_cell.get(),
            }
        }
    };
    Ok(solution)
}

pub use strategies::{
    select_optimal, solve, solve_cw_sup, solve_dnc_sup, solve_dnc_ts, solve_pnc_sup, solve_pnc_zp,
    StrategyComparison,
};

/// Stream constraints of a strategy in canonical (`lambda1 <= lambda2`)
/// form: per mode label, the stream labels, their multiplier labels and the
/// throughput each stream must deliver.
#[allow(clippy::type_complexity)]
pub fn constraint_map<S: Scalar>(
    strategy: Strategy,
    l1: S,
    l2: S,
) -> Vec<(&'static str, Vec<(&'static str, &'static str, S)>)> {
    let excess = l2 - l1;
    match strategy {
        Strategy::PncSup => vec![
            ("1", vec![("r1", "beta1", l1)]),
            ("2", vec![("r22", "beta2", excess)]),
            ("3", vec![("r3c", "beta3c", l1), ("r3p", "beta3p", excess)]),
        ],
        Strategy::PncZp => vec![
            ("1", vec![("r1", "beta1", l2)]),
            ("2", vec![("r2", "beta2", l2)]),
        ],
        Strategy::DncTs => vec![
            ("1", vec![("r11", "beta11", l1), ("r12", "beta12", l2)]),
            ("2", vec![("r2", "beta2", l1)]),
            ("3", vec![("r3", "beta3", excess)]),
        ],
        Strategy::DncSup => vec![
            ("1", vec![("r11", "beta11", l1), ("r12", "beta12", l2)]),
            ("5", vec![("r52", "beta52", l1), ("r51", "beta51", excess)]),
        ],
        Strategy::CwSup => vec![
            ("1", vec![("r11", "beta11", l1), ("r12", "beta12", l2)]),
            ("6", vec![("r61", "beta61", l2), ("r62", "beta62", l1)]),
        ],
    }
}

/// Checks a converged solution's certificates against its requirement:
/// every active mode's `avg_power - sum(beta * avg_rate)` equals `gamma`
/// within `eps_outer`, the time fractions fill the slot within `eps_outer`,
/// every rate constraint is tight within `eps_outer` relative error, and
/// the reported energy matches `sum(f * avg_power)`.
pub fn validate_solution<S: Scalar>(
    sol: &StrategySolution<S>,
    req: &RateRequirement<S>,
    cfg: &SolverConfig<S>,
) -> Result<()> {
    let fail = |msg: String| Err(Error::Contract(format!("{}: {msg}", sol.strategy)));
    if !sol.converged {
        return fail("solution not converged".into());
    }
    let (l1, l2) = if req.lambda1 <= req.lambda2 {
        (req.lambda1, req.lambda2)
    } else {
        (req.lambda2, req.lambda1)
    };
    if sol.swapped != (req.lambda1 > req.lambda2) {
        return fail("swap flag inconsistent with the requirement".into());
    }
    let one = S::one();
    let sum = sol.fractions.values().fold(S::zero(), |acc, &f| acc + f);
    if !(sum > one - cfg.eps_outer && sum <= one + c(1e-12)) {
        return fail(format!("fraction sum {sum} outside (1 - eps_outer, 1]"));
    }
    let mut energy = S::zero();
    for (mode, streams) in constraint_map(sol.strategy, l1, l2) {
        let f = sol.fraction(mode);
        let power = sol.avg_power(mode);
        energy = energy + f * power;
        let mut weighted = S::zero();
        let mut required = S::zero();
        for (stream, beta_label, target) in &streams {
            let rate = sol.avg_rate(stream);
            let Some(beta) = sol.multipliers.get(beta_label) else {
                return fail(format!("missing multiplier {beta_label}"));
            };
            if beta < S::zero() {
                return fail(format!("negative multiplier {beta_label}"));
            }
            weighted = weighted + beta * rate;
            required = required + *target;
            let delivered = f * rate;
            if (delivered - *target).abs() > cfg.eps_outer * target.max(one) {
                return fail(format!(
                    "constraint for {stream}: delivered {delivered} vs target {target}"
                ));
            }
        }
        if required > S::zero() {
            let cert = power - weighted - sol.gamma;
            if cert.abs() >= cfg.eps_outer {
                return fail(format!("mode {mode} stationarity residual {cert}"));
            }
        } else if f != S::zero() || power != S::zero() {
            return fail(format!("inactive mode {mode} carries time or power"));
        }
    }
    if (energy - sol.total_energy).abs() > c::<S>(1e-12) * energy.max(one) {
        return fail(format!(
            "total energy {} differs from recomputed {energy}",
            sol.total_energy
        ));
    }
    Ok(())
}
