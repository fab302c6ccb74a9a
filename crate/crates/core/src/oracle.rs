//! Independent brute-force verifiers.
//!
//! Every closed-form allocator is checked against an exhaustive grid search
//! that only uses the forward power formulas (rate in, power out), never the
//! closed-form optimum. Every strategy solver is checked on static channels
//! against a grid over time fractions with the per-mode subproblems inverted
//! exactly. The downlink dominance arguments (superposed network coding
//! beats both time sharing and plain codeword superposition) are checked
//! per-sample on randomized sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alloc::{
    bc_superposition_alloc, bc_superposition_power, cw_downlink_alloc, mac_uplink_alloc,
    p2p_waterfill, pnc_uplink_alloc,
};
use crate::error::{Error, Result};
use crate::fading::{sample_channels, ChannelSample, FadingSpec, GainDistribution};
use crate::scalar::{c, Scalar};
use crate::solvers::{self, RateRequirement, SolverConfig, Strategy};

/// Grid resolution and per-axis upper bounds.
#[derive(Debug, Clone)]
pub struct GridSpec<S> {
    pub points_per_axis: usize,
    pub upper_bounds: Vec<S>,
}

impl<S: Scalar> GridSpec<S> {
    pub fn new(points_per_axis: usize, upper_bounds: Vec<S>) -> Result<Self> {
        if points_per_axis < 2 {
            return Err(Error::Config {
                field: "points_per_axis",
                reason: format!("need at least 2 grid points, got {points_per_axis}"),
            });
        }
        for &b in &upper_bounds {
            if !(b.is_finite() && b > S::zero()) {
                return Err(Error::Config {
                    field: "upper_bounds",
                    reason: format!("bounds must be positive, got {b}"),
                });
            }
        }
        Ok(GridSpec {
            points_per_axis,
            upper_bounds,
        })
    }
}

/// Which pointwise allocator a grid search verifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointwiseAllocatorId {
    P2pWaterfill,
    PncUplink,
    BcSuperposition,
    MacUplink,
    CwDownlink,
}

impl PointwiseAllocatorId {
    pub const ALL: [PointwiseAllocatorId; 5] = [
        PointwiseAllocatorId::P2pWaterfill,
        PointwiseAllocatorId::PncUplink,
        PointwiseAllocatorId::BcSuperposition,
        PointwiseAllocatorId::MacUplink,
        PointwiseAllocatorId::CwDownlink,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PointwiseAllocatorId::P2pWaterfill => "p2p_waterfill",
            PointwiseAllocatorId::PncUplink => "pnc_uplink",
            PointwiseAllocatorId::BcSuperposition => "bc_superposition",
            PointwiseAllocatorId::MacUplink => "mac_uplink",
            PointwiseAllocatorId::CwDownlink => "cw_downlink",
        }
    }
}

fn arity(id: PointwiseAllocatorId) -> (usize, usize, usize) {
    // (multipliers, gains, grid axes)
    match id {
        PointwiseAllocatorId::P2pWaterfill => (1, 1, 1),
        PointwiseAllocatorId::PncUplink => (1, 2, 1),
        PointwiseAllocatorId::BcSuperposition => (2, 2, 2),
        PointwiseAllocatorId::MacUplink => (2, 2, 2),
        PointwiseAllocatorId::CwDownlink => (2, 2, 2),
    }
}

/// Exhaustive minimization of `power - sum(beta * rate)` over a grid of
/// feasible points mapped through the forward power formulas. Broadcast
/// modes grid over rates; the multi-access uplink grids over powers; the
/// function-decoding uplink grids over the source-1 power along the
/// channel-inversion line, starting at the zero-rate power `1/(2 g_1r)`.
/// Single-axis searches use `points_per_axis^2` points so every search
/// evaluates the same budget.
pub fn pointwise_grid_min<S: Scalar>(
    id: PointwiseAllocatorId,
    multipliers: &[S],
    gains: &[S],
    grid: &GridSpec<S>,
) -> Result<(S, Vec<S>)> {
    let (n_mult, n_gain, n_axes) = arity(id);
    if multipliers.len() != n_mult || gains.len() != n_gain || grid.upper_bounds.len() != n_axes {
        return Err(Error::Contract(format!(
            "{} expects {n_mult} multiplier(s), {n_gain} gain(s), {n_axes} bound(s)",
            id.name()
        )));
    }
    for &b in multipliers {
        if !(b.is_finite() && b >= S::zero()) {
            return Err(Error::Contract(format!("bad multiplier {b}")));
        }
    }
    for &g in gains {
        if !(g.is_finite() && g > S::zero()) {
            return Err(Error::Contract(format!("bad gain {g}")));
        }
    }
    let one = S::one();
    let half = c::<S>(0.5);
    match id {
        PointwiseAllocatorId::P2pWaterfill => {
            let beta = multipliers[0];
            let g = gains[0];
            let n = grid.points_per_axis * grid.points_per_axis;
            let step = grid.upper_bounds[0] / c::<S>((n - 1) as f64);
            let mut best = (S::infinity(), S::zero());
            for i in 0..n {
                let r = step * c::<S>(i as f64);
                let p = (r.exp2() - one) / g;
                let l = p - beta * r;
                if l < best.0 {
                    best = (l, r);
                }
            }
            Ok((best.0, vec![best.1]))
        }
        PointwiseAllocatorId::PncUplink => {
            let beta = multipliers[0];
            let (g1, g2) = (gains[0], gains[1]);
            let n = grid.points_per_axis * grid.points_per_axis;
            let lower = half / g1; // zero-rate power of source 1
            let hi = grid.upper_bounds[0].max(lower + lower);
            let step = (hi - lower) / c::<S>((n - 1) as f64);
            let ratio = g1 / g2; // channel inversion: p2 = p1 * g1 / g2
            let mut best = (S::infinity(), S::zero());
            for i in 0..n {
                let p1 = lower + step * c::<S>(i as f64);
                let r = (half + p1 * g1).log2();
                let l = p1 * (one + ratio) - beta * r;
                if l < best.0 {
                    best = (l, p1);
                }
            }
            let p1 = best.1;
            Ok((best.0, vec![p1, p1 * ratio]))
        }
        PointwiseAllocatorId::BcSuperposition => {
            let (bc, bp) = (multipliers[0], multipliers[1]);
            let (ga, gb) = (gains[0], gains[1]);
            let n = grid.points_per_axis;
            let step_c = grid.upper_bounds[0] / c::<S>((n - 1) as f64);
            let step_p = grid.upper_bounds[1] / c::<S>((n - 1) as f64);
            let mut best = (S::infinity(), S::zero(), S::zero());
            for i in 0..n {
                let rc = step_c * c::<S>(i as f64);
                for j in 0..n {
                    let rp = step_p * c::<S>(j as f64);
                    let (pp, pc) = bc_superposition_power(rp, rc, ga, gb)?;
                    let l = pp + pc - bc * rc - bp * rp;
                    if l < best.0 {
                        best = (l, rc, rp);
                    }
                }
            }
            Ok((best.0, vec![best.1, best.2]))
        }
        PointwiseAllocatorId::MacUplink => {
            let (bs, bw) = (multipliers[0], multipliers[1]);
            let (gs, gw) = (gains[0], gains[1]);
            let n = grid.points_per_axis;
            let step_s = grid.upper_bounds[0] / c::<S>((n - 1) as f64);
            let step_w = grid.upper_bounds[1] / c::<S>((n - 1) as f64);
            let mut best = (S::infinity(), S::zero(), S::zero());
            for i in 0..n {
                let ps = step_s * c::<S>(i as f64);
                for j in 0..n {
                    let pw = step_w * c::<S>(j as f64);
                    let base = one + pw * gw;
                    let rw = base.log2();
                    let rs = (one + ps * gs / base).log2();
                    let l = ps + pw - bs * rs - bw * rw;
                    if l < best.0 {
                        best = (l, ps, pw);
                    }
                }
            }
            Ok((best.0, vec![best.1, best.2]))
        }
        PointwiseAllocatorId::CwDownlink => {
            let (b1, b2) = (multipliers[0], multipliers[1]);
            let (g1, g2) = (gains[0], gains[1]);
            let n = grid.points_per_axis;
            let step_1 = grid.upper_bounds[0] / c::<S>((n - 1) as f64);
            let step_2 = grid.upper_bounds[1] / c::<S>((n - 1) as f64);
            let mut best = (S::infinity(), S::zero(), S::zero());
            for i in 0..n {
                let r1 = step_1 * c::<S>(i as f64);
                let p1 = (r1.exp2() - one) / g1;
                for j in 0..n {
                    let r2 = step_2 * c::<S>(j as f64);
                    let p2 = (r2.exp2() - one) / g2;
                    let l = p1 + p2 - b1 * r1 - b2 * r2;
                    if l < best.0 {
                        best = (l, r1, r2);
                    }
                }
            }
            Ok((best.0, vec![best.1, best.2]))
        }
    }
}

/// Grid bounds covering twice the closed-form optimum (with a unit floor)
/// so the optimum sits well inside the searched box.
pub fn auto_grid<S: Scalar>(
    id: PointwiseAllocatorId,
    multipliers: &[S],
    gains: &[S],
    points_per_axis: usize,
) -> Result<GridSpec<S>> {
    let one = S::one();
    let two = c::<S>(2.0);
    let bound = |x: S| (two * x).max(one);
    let bounds = match id {
        PointwiseAllocatorId::P2pWaterfill => {
            let a = p2p_waterfill(multipliers[0], gains[0])?;
            vec![bound(a.rate("r"))]
        }
        PointwiseAllocatorId::PncUplink => {
            let s = ChannelSample {
                g_1r: gains[0],
                g_2r: gains[1],
                g_r1: one,
                g_r2: one,
            };
            let a = pnc_uplink_alloc(multipliers[0], &s)?;
            vec![(two * a.power("p11")).max(one / gains[0])]
        }
        PointwiseAllocatorId::BcSuperposition => {
            let a = bc_superposition_alloc(multipliers[0], multipliers[1], gains[0], gains[1])?;
            vec![bound(a.rate("rc")), bound(a.rate("rp"))]
        }
        PointwiseAllocatorId::MacUplink => {
            let a = mac_uplink_alloc(multipliers[0], multipliers[1], gains[0], gains[1])?;
            vec![bound(a.power("ps")), bound(a.power("pw"))]
        }
        PointwiseAllocatorId::CwDownlink => {
            let a = cw_downlink_alloc(multipliers[0], multipliers[1], gains[0], gains[1])?;
            vec![bound(a.rate("r61")), bound(a.rate("r62"))]
        }
    };
    GridSpec::new(points_per_axis, bounds)
}

// ---------------------------------------------------------------------------
// Downlink dominance checks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct TimeshareComparison<S> {
    pub e_timeshare: S,
    pub e_mode5: S,
    pub holds: bool,
}

/// Compares the downlink energy of time-sharing a broadcast (fraction `f2`,
/// rate `r2`) with a unicast to source 1 (fraction `f3`, rate `r3`) against
/// a single superposed transmission over `f2 + f3` delivering the same
/// throughputs.
pub fn timeshare_replacement_check<S: Scalar>(
    sample: &ChannelSample<S>,
    f2: S,
    f3: S,
    r2: S,
    r3: S,
) -> Result<TimeshareComparison<S>> {
    for (name, v) in [("f2", f2), ("f3", f3), ("r2", r2), ("r3", r3)] {
        if !(v.is_finite() && v > S::zero()) {
            return Err(Error::Contract(format!(
                "timeshare_replacement_check needs positive inputs, got {name} = {v}"
            )));
        }
    }
    let one = S::one();
    let g_min = sample.g_r1.min(sample.g_r2);
    let e_timeshare = f2 * (r2.exp2() - one) / g_min + f3 * (r3.exp2() - one) / sample.g_r1;
    let span = f2 + f3;
    let r_private = f3 * r3 / span;
    let r_common = f2 * r2 / span;
    let (pp, pc) = bc_superposition_power(r_private, r_common, sample.g_r1, sample.g_r2)?;
    let e_mode5 = span * (pp + pc);
    let slack = c::<S>(1e-12) * e_timeshare.max(one);
    Ok(TimeshareComparison {
        e_timeshare,
        e_mode5,
        holds: e_mode5 <= e_timeshare + slack,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct CodewordComparison<S> {
    pub e_mode6: S,
    pub e_mode5: S,
    pub holds: bool,
}

/// Compares the codeword-superposition downlink energy for a rate pair
/// `(r61, r62)` against a network-coded superposition: the common stream
/// carries the smaller of the two rates (pairing what can be paired) and
/// the private stream tops up source 1 with the excess.
pub fn codeword_replacement_check<S: Scalar>(
    g_r1: S,
    g_r2: S,
    r61: S,
    r62: S,
) -> Result<CodewordComparison<S>> {
    for (name, v) in [("g_r1", g_r1), ("g_r2", g_r2)] {
        if !(v.is_finite() && v > S::zero()) {
            return Err(Error::Contract(format!("bad gain {name} = {v}")));
        }
    }
    for (name, v) in [("r61", r61), ("r62", r62)] {
        if !(v.is_finite() && v >= S::zero()) {
            return Err(Error::Contract(format!("bad rate {name} = {v}")));
        }
    }
    let one = S::one();
    let e_mode6 = (r61.exp2() - one) / g_r1 + (r62.exp2() - one) / g_r2;
    let (r_private, r_common) = if r61 > r62 {
        (r61 - r62, r62)
    } else {
        (S::zero(), r61)
    };
    let (pp, pc) = bc_superposition_power(r_private, r_common, g_r1, g_r2)?;
    let e_mode5 = pp + pc;
    let slack = c::<S>(1e-12) * e_mode6.max(one);
    Ok(CodewordComparison {
        e_mode6,
        e_mode5,
        holds: e_mode5 <= e_mode6 + slack,
    })
}

// ---------------------------------------------------------------------------
// Static-channel strategy grids
// ---------------------------------------------------------------------------

/// Result of a static-channel fraction grid search.
#[derive(Debug, Clone)]
pub struct StaticGridOutcome<S> {
    pub energy: S,
    /// Minimizing fractions in the strategy's mode order.
    pub fractions: Vec<S>,
}

fn static_pnc_uplink_cost<S: Scalar>(rate: S, g1: S, g2: S) -> S {
    if rate <= S::zero() {
        S::zero()
    } else {
        (rate.exp2() - c::<S>(0.5)) * (g1.recip() + g2.recip())
    }
}

fn static_wf_cost<S: Scalar>(rate: S, g: S) -> S {
    (rate.exp2() - S::one()) / g
}

fn static_mac_cost<S: Scalar>(r1: S, r2: S, g1: S, g2: S) -> S {
    let one = S::one();
    let (rs, rw, gs, gw) = if g1 >= g2 {
        (r1, r2, g1, g2)
    } else {
        (r2, r1, g2, g1)
    };
    let pw = (rw.exp2() - one) / gw;
    let ps = (rs.exp2() - one) * rw.exp2() / gs;
    ps + pw
}

fn static_bc_cost<S: Scalar>(rc: S, rp: S, ga: S, gb: S) -> S {
    match bc_superposition_power(rp, rc, ga, gb) {
        Ok((pp, pc)) => pp + pc,
        Err(_) => S::infinity(),
    }
}

/// Per-mode rate `throughput / fraction`, infeasible when the fraction
/// vanishes but bits remain.
fn static_rate<S: Scalar>(throughput: S, fraction: S) -> Option<S> {
    if throughput <= S::zero() {
        Some(S::zero())
    } else if fraction <= S::zero() {
        None
    } else {
        Some(throughput / fraction)
    }
}

/// Grid-searches the time fractions of a strategy on a single static
/// channel, solving each fixed-fraction subproblem exactly through the
/// forward rate-to-power maps.
pub fn static_strategy_grid<S: Scalar>(
    strategy: Strategy,
    req: &RateRequirement<S>,
    gains: &ChannelSample<S>,
    grid: &GridSpec<S>,
) -> Result<StaticGridOutcome<S>> {
    req.validate()?;
    let (l1, l2, s) = if req.lambda1 > req.lambda2 {
        (req.lambda2, req.lambda1, gains.mirrored())
    } else {
        (req.lambda1, req.lambda2, *gains)
    };
    let n = grid.points_per_axis;
    let one = S::one();
    let axis = |i: usize| c::<S>((i + 1) as f64 / (n + 1) as f64); // open (0,1)
    let share = |j: usize| c::<S>(j as f64 / (n - 1) as f64); // closed [0,1]
    let mut best = (S::infinity(), Vec::new());
    let mut consider = |energy: S, fractions: Vec<S>| {
        if energy < best.0 {
            best = (energy, fractions);
        }
    };
    match strategy {
        Strategy::PncZp => {
            for i in 0..n {
                let f1 = axis(i);
                let f2 = one - f1;
                let (Some(ru), Some(rd)) = (static_rate(l2, f1), static_rate(l2, f2)) else {
                    continue;
                };
                let e = f1 * static_pnc_uplink_cost(ru, s.g_1r, s.g_2r)
                    + f2 * static_wf_cost(rd, s.g_r1.min(s.g_r2));
                consider(e, vec![f1, f2]);
            }
        }
        Strategy::PncSup => {
            for i in 0..n {
                let f1 = axis(i);
                let rest = one - f1;
                for j in 0..n {
                    let f3 = rest * share(j);
                    let f2 = rest - f3;
                    let (Some(r1), Some(r2), Some(rc), Some(rp)) = (
                        static_rate(l1, f1),
                        static_rate(l2 - l1, f2),
                        static_rate(l1, f3),
                        static_rate(l2 - l1, f3),
                    ) else {
                        continue;
                    };
                    let e = f1 * static_pnc_uplink_cost(r1, s.g_1r, s.g_2r)
                        + f2 * static_wf_cost(r2, s.g_2r)
                        + f3 * static_bc_cost(rc, rp, s.g_r1, s.g_r2);
                    consider(e, vec![f1, f2, f3]);
                }
            }
        }
        Strategy::DncTs => {
            for i in 0..n {
                let f1 = axis(i);
                let rest = one - f1;
                for j in 0..n {
                    let f3 = rest * share(j);
                    let f2 = rest - f3;
                    let (Some(r11), Some(r12), Some(r2), Some(r3)) = (
                        static_rate(l1, f1),
                        static_rate(l2, f1),
                        static_rate(l1, f2),
                        static_rate(l2 - l1, f3),
                    ) else {
                        continue;
                    };
                    let e = f1 * static_mac_cost(r11, r12, s.g_1r, s.g_2r)
                        + f2 * static_wf_cost(r2, s.g_r1.min(s.g_r2))
                        + f3 * static_wf_cost(r3, s.g_r1);
                    consider(e, vec![f1, f2, f3]);
                }
            }
        }
        Strategy::DncSup => {
            // second axis moves part of the excess bits into the common
            // stream (the solver's split is a special point of this family)
            let excess = l2 - l1;
            for i in 0..n {
                let f1 = axis(i);
                let f5 = one - f1;
                for j in 0..n {
                    let x = excess * share(j);
                    let (Some(r11), Some(r12), Some(rc), Some(rp)) = (
                        static_rate(l1, f1),
                        static_rate(l2, f1),
                        static_rate(l1 + x, f5),
                        static_rate(excess - x, f5),
                    ) else {
                        continue;
                    };
                    let e = f1 * static_mac_cost(r11, r12, s.g_1r, s.g_2r)
                        + f5 * static_bc_cost(rc, rp, s.g_r1, s.g_r2);
                    consider(e, vec![f1, f5]);
                    if excess <= S::zero() {
                        break;
                    }
                }
            }
        }
        Strategy::CwSup => {
            for i in 0..n {
                let f1 = axis(i);
                let f6 = one - f1;
                let (Some(r11), Some(r12), Some(r61), Some(r62)) = (
                    static_rate(l1, f1),
                    static_rate(l2, f1),
                    static_rate(l2, f6),
                    static_rate(l1, f6),
                ) else {
                    continue;
                };
                let e = f1 * static_mac_cost(r11, r12, s.g_1r, s.g_2r)
                    + f6 * (static_wf_cost(r61, s.g_r1) + static_wf_cost(r62, s.g_r2));
                consider(e, vec![f1, f6]);
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::Contract(
            "static grid found no feasible fraction split".into(),
        ));
    }
    Ok(StaticGridOutcome {
        energy: best.0,
        fractions: best.1,
    })
}

// ---------------------------------------------------------------------------
// Randomized sweeps (acceptance checks and the CLI `verify` command)
// ---------------------------------------------------------------------------

/// Outcome of one randomized or enumerated check suite.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// Worst signed slack seen; the check-specific margin by which the
    /// tightest trial passed (negative) or failed (positive).
    pub worst_slack: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (uniform(rng, lo.ln(), hi.ln())).exp()
}

/// Randomized per-sample sweep of the time-sharing-versus-superposition
/// energy comparison.
pub fn timeshare_dominance_sweep(trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let sample = ChannelSample {
            g_1r: 1.0,
            g_2r: 1.0,
            g_r1: log_uniform(&mut rng, 0.05, 5.0),
            g_r2: log_uniform(&mut rng, 0.05, 5.0),
        };
        let f2 = uniform(&mut rng, 0.05, 0.5);
        let f3 = uniform(&mut rng, 0.05, 0.5);
        let r2 = uniform(&mut rng, 0.01, 4.0);
        let r3 = uniform(&mut rng, 0.01, 4.0);
        let out = timeshare_replacement_check(&sample, f2, f3, r2, r3)?;
        let slack = (out.e_mode5 - out.e_timeshare) / out.e_timeshare.max(1.0);
        worst = worst.max(slack);
        if !out.holds {
            failures += 1;
        }
    }
    Ok(CheckReport {
        name: "downlink_superposition_vs_timeshare".into(),
        trials,
        failures,
        worst_slack: worst,
    })
}

/// Randomized per-sample sweep of the codeword-superposition comparison
/// across all four gain/rate orderings.
pub fn codeword_dominance_sweep(trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..trials {
        let g_r1 = log_uniform(&mut rng, 0.05, 5.0);
        let g_r2 = log_uniform(&mut rng, 0.05, 5.0);
        // include exact zero rates now and then
        let r61 = if i % 17 == 0 {
            0.0
        } else {
            uniform(&mut rng, 0.0, 4.0)
        };
        let r62 = if i % 23 == 0 {
            0.0
        } else {
            uniform(&mut rng, 0.0, 4.0)
        };
        let out = codeword_replacement_check(g_r1, g_r2, r61, r62)?;
        let slack = (out.e_mode5 - out.e_mode6) / out.e_mode6.max(1.0);
        worst = worst.max(slack);
        if !out.holds {
            failures += 1;
        }
    }
    Ok(CheckReport {
        name: "downlink_network_coding_vs_codeword".into(),
        trials,
        failures,
        worst_slack: worst,
    })
}

/// Draws random multipliers and gains for one allocator, restricted to its
/// operating envelope (the function-decoding uplink is drawn above its
/// activation level, where the solvers run it; its on/off boundary is a
/// discrete jump that a smooth grid cannot pin down).
fn draw_inputs(id: PointwiseAllocatorId, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    const LN2: f64 = std::f64::consts::LN_2;
    match id {
        PointwiseAllocatorId::P2pWaterfill => {
            let level = uniform(rng, 0.0, 2.5);
            let g = log_uniform(rng, 0.2, 2.5);
            (vec![level * LN2], vec![g])
        }
        PointwiseAllocatorId::PncUplink => {
            let g1 = log_uniform(rng, 0.25, 2.5);
            let g2 = log_uniform(rng, 0.25, 2.5);
            let sigma = 1.0 / g1 + 1.0 / g2;
            let level = sigma * uniform(rng, 1.05, 6.0);
            (vec![level * LN2], vec![g1, g2])
        }
        PointwiseAllocatorId::BcSuperposition | PointwiseAllocatorId::CwDownlink => {
            let l1 = uniform(rng, 0.0, 2.5);
            let l2 = uniform(rng, 0.0, 2.5);
            let ga = log_uniform(rng, 0.2, 2.5);
            let gb = log_uniform(rng, 0.2, 2.5);
            (vec![l1 * LN2, l2 * LN2], vec![ga, gb])
        }
        PointwiseAllocatorId::MacUplink => {
            let ls = uniform(rng, 0.0, 2.5);
            let lw = uniform(rng, 0.0, 2.5);
            let a = log_uniform(rng, 0.2, 2.5);
            let b = log_uniform(rng, 0.2, 2.5);
            let (gs, gw) = if a > b {
                (a, b)
            } else if b > a {
                (b, a)
            } else {
                (a, b.next_below())
            };
            (vec![ls * LN2, lw * LN2], vec![gs, gw])
        }
    }
}

fn closed_form_lagrangian(
    id: PointwiseAllocatorId,
    multipliers: &[f64],
    gains: &[f64],
) -> Result<f64> {
    Ok(match id {
        PointwiseAllocatorId::P2pWaterfill => {
            p2p_waterfill(multipliers[0], gains[0])?.lagrangian_value
        }
        PointwiseAllocatorId::PncUplink => {
            let s = ChannelSample::<f64> {
                g_1r: gains[0],
                g_2r: gains[1],
                g_r1: 1.0,
                g_r2: 1.0,
            };
            pnc_uplink_alloc(multipliers[0], &s)?.lagrangian_value
        }
        PointwiseAllocatorId::BcSuperposition => {
            bc_superposition_alloc(multipliers[0], multipliers[1], gains[0], gains[1])?
                .lagrangian_value
        }
        PointwiseAllocatorId::MacUplink => {
            mac_uplink_alloc(multipliers[0], multipliers[1], gains[0], gains[1])?.lagrangian_value
        }
        PointwiseAllocatorId::CwDownlink => {
            cw_downlink_alloc(multipliers[0], multipliers[1], gains[0], gains[1])?.lagrangian_value
        }
    })
}

/// Compares the closed-form Lagrangian against the grid minimum on random
/// inputs; a trial fails when they differ by more than `tolerance`.
pub fn allocator_oracle_sweep(
    id: PointwiseAllocatorId,
    trials: usize,
    points_per_axis: usize,
    tolerance: f64,
    seed: u64,
) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let (multipliers, gains) = draw_inputs(id, &mut rng);
        let closed = closed_form_lagrangian(id, &multipliers, &gains)?;
        let grid = auto_grid(id, &multipliers, &gains, points_per_axis)?;
        let (grid_min, _) = pointwise_grid_min(id, &multipliers, &gains, &grid)?;
        let diff = (closed - grid_min).abs();
        worst = worst.max(diff - tolerance);
        if diff > tolerance {
            failures += 1;
        }
    }
    Ok(CheckReport {
        name: format!("oracle_{}", id.name()),
        trials,
        failures,
        worst_slack: worst,
    })
}

/// One static-channel case: strategy, rate pair, the four mean gains.
pub type StaticCase = (Strategy, (f64, f64), (f64, f64, f64, f64));

/// The fixed static-channel test matrix: every strategy at least once, both
/// downlink gain orderings for the superposed downlink.
pub fn static_matrix() -> Vec<StaticCase> {
    vec![
        (Strategy::PncSup, (0.5, 0.5), (1.0, 1.0, 1.0, 1.0)),
        (Strategy::PncZp, (0.2, 1.0), (1.0, 1.0, 1.0, 2.0)),
        (Strategy::DncTs, (0.3, 0.6), (1.0, 1.0, 1.0, 1.0)),
        (Strategy::DncSup, (0.3, 0.6), (1.0, 1.0, 1.0, 2.0)),
        (Strategy::DncSup, (0.3, 0.6), (1.0, 1.0, 2.0, 1.0)),
        (Strategy::CwSup, (0.3, 0.6), (1.0, 1.0, 1.0, 1.0)),
    ]
}

/// Compares each dual solver against the static fraction grid on the fixed
/// test matrix; a trial fails when the energies differ by more than
/// `rel_tolerance`.
pub fn static_matrix_check(points_per_axis: usize, rel_tolerance: f64) -> Result<Vec<CheckReport>> {
    let cfg = SolverConfig::<f64>::default();
    let mut reports = Vec::new();
    for (strategy, (l1, l2), (g_1r, g_2r, g_r1, g_r2)) in static_matrix() {
        let spec = FadingSpec {
            mean_gain_1r: g_1r,
            mean_gain_2r: g_2r,
            mean_gain_r1: g_r1,
            mean_gain_r2: g_r2,
            n_samples: 1,
            seed: 0,
            distribution: GainDistribution::Static,
        };
        let set = sample_channels(&spec)?;
        let req = RateRequirement::new(l1, l2)?;
        let solved = solvers::solve(strategy, &req, &set, &cfg)?;
        let grid = GridSpec::new(points_per_axis, vec![])?;
        let gridded = static_strategy_grid(strategy, &req, &set.samples()[0], &grid)?;
        let rel = (solved.total_energy - gridded.energy).abs() / gridded.energy;
        reports.push(CheckReport {
            name: format!(
                "static_{}_l({l1},{l2})_g({g_1r},{g_2r},{g_r1},{g_r2})",
                strategy.id()
            ),
            trials: 1,
            failures: usize::from(rel > rel_tolerance),
            worst_slack: rel - rel_tolerance,
        });
    }
    Ok(reports)
}

/// Sanity hook used by the fault-injection test: the grid comparison must
/// flag a deliberately corrupted closed form.
pub fn detects_corruption<S: Scalar>(corrupt_lagrangian: S, grid_min: S, tolerance: S) -> bool {
    (corrupt_lagrangian - grid_min).abs() > tolerance
}
