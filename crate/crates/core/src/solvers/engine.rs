//! Dual-bisection machinery shared by the strategy solvers.
//!
//! Every mode exposes sample-averaged rates, power and dual value as a
//! function of its water levels `t = beta * log2(e)`. Single-stream modes
//! (plain water-fills and the function-decoding uplink) are evaluated in
//! `O(log n)` through sorted prefix sums; two-stream modes (multi-access
//! uplink, superposition downlink, codeword superposition) take one pass
//! over the samples per evaluation. All accumulation is compensated and in
//! a fixed order, so every solve is bit-reproducible.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::fading::SampleSet;
use crate::scalar::{c, ln_2, Scalar};

use super::SolverConfig;

#[derive(Clone, Copy)]
pub(crate) struct Kahan<S> {
    sum: S,
    comp: S,
}

impl<S: Scalar> Kahan<S> {
    pub fn new() -> Self {
        Kahan {
            sum: S::zero(),
            comp: S::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, v: S) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> S {
        self.sum
    }
}

fn compensated_prefix<S: Scalar>(values: &[S]) -> Vec<S> {
    let mut out = Vec::with_capacity(values.len() + 1);
    out.push(S::zero());
    let mut acc = Kahan::new();
    for &v in values {
        acc.add(v);
        out.push(acc.value());
    }
    out
}

/// Sorted-threshold cache for a single water-filled stream. A sample is
/// active when the water level clears its zero-rate cost `1/g`, so averages
/// reduce to prefix sums over the sorted costs.
pub(crate) struct WfCache<S> {
    inv_g: Vec<S>,
    pre_inv: Vec<S>,
    pre_log2_inv: Vec<S>,
    inv_n: S,
}

impl<S: Scalar> WfCache<S> {
    pub fn from_gains(gains: Vec<S>, n_total: usize) -> Self {
        let mut inv_g: Vec<S> = gains.into_iter().map(|g| g.recip()).collect();
        inv_g.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite gains"));
        let logs: Vec<S> = inv_g.iter().map(|&x| x.log2()).collect();
        WfCache {
            pre_inv: compensated_prefix(&inv_g),
            pre_log2_inv: compensated_prefix(&logs),
            inv_g,
            inv_n: c::<S>(1.0 / n_total as f64),
        }
    }

    /// Returns (average rate, average power) at water level `t`.
    pub fn eval(&self, t: S) -> (S, S) {
        let zero = S::zero();
        if t <= zero {
            return (zero, zero);
        }
        let k = self.inv_g.partition_point(|&x| x < t);
        if k == 0 {
            return (zero, zero);
        }
        let kf = c::<S>(k as f64);
        let rate = ((kf * t.log2() - self.pre_log2_inv[k]) * self.inv_n).max(zero);
        let power = ((kf * t - self.pre_inv[k]) * self.inv_n).max(zero);
        (rate, power)
    }
}

/// Cache for the function-decoding uplink. The cost of the slot is
/// `sigma = 1/g_1r + 1/g_2r`; the pair stays silent until the water level
/// exceeds `sigma` (where the symmetric rate crosses zero) and then
/// transmits `rate = log2(t / sigma)` with power `t - sigma / 2`.
pub(crate) struct PncUpCache<S> {
    sigma: Vec<S>,
    pre_sigma: Vec<S>,
    pre_log2_sigma: Vec<S>,
    inv_n: S,
}

impl<S: Scalar> PncUpCache<S> {
    pub fn new(set: &SampleSet<S>) -> Self {
        let mut sigma: Vec<S> = set
            .samples()
            .iter()
            .map(|s| s.g_1r.recip() + s.g_2r.recip())
            .collect();
        sigma.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite gains"));
        let logs: Vec<S> = sigma.iter().map(|&x| x.log2()).collect();
        PncUpCache {
            pre_sigma: compensated_prefix(&sigma),
            pre_log2_sigma: compensated_prefix(&logs),
            sigma,
            inv_n: c::<S>(1.0 / set.len() as f64),
        }
    }

    pub fn eval(&self, t: S) -> (S, S) {
        let zero = S::zero();
        if t <= zero {
            return (zero, zero);
        }
        let k = self.sigma.partition_point(|&x| x < t);
        if k == 0 {
            return (zero, zero);
        }
        let kf = c::<S>(k as f64);
        let rate = ((kf * t.log2() - self.pre_log2_sigma[k]) * self.inv_n).max(zero);
        let power = ((kf * t - c::<S>(0.5) * self.pre_sigma[k]) * self.inv_n).max(zero);
        (rate, power)
    }
}

pub(crate) enum OneCache<S> {
    Wf(WfCache<S>),
    PncUp(PncUpCache<S>),
}

impl<S: Scalar> OneCache<S> {
    pub fn eval(&self, t: S) -> (S, S) {
        match self {
            OneCache::Wf(w) => w.eval(t),
            OneCache::PncUp(p) => p.eval(t),
        }
    }

    pub fn value(&self, t: S) -> (S, S, S) {
        let (rate, power) = self.eval(t);
        (rate, power, power - ln_2::<S>() * t * rate)
    }
}

/// One pre-ordered channel pair for a two-stream mode: the role-a gain is
/// the strong uplink (or private downlink) side. Reciprocals, the inverse
/// interior threshold and base-2 logs are precomputed so a full evaluation
/// pass does no divisions or logarithms per sample beyond the interior
/// branch.
#[derive(Clone, Copy)]
struct PairSample<S> {
    ga: S,
    gb: S,
    inv_ga: S,
    inv_gb: S,
    /// (ga - gb) / (ga * gb); positive since ga > gb
    thresh: S,
    inv_thresh: S,
    log2_ga: S,
    log2_gb: S,
    log2_inv_thresh: S,
}

impl<S: Scalar> PairSample<S> {
    fn new(ga: S, gb: S) -> Self {
        let inv_ga = ga.recip();
        let inv_gb = gb.recip();
        let thresh = inv_gb - inv_ga;
        PairSample {
            ga,
            gb,
            inv_ga,
            inv_gb,
            thresh,
            inv_thresh: thresh.recip(),
            log2_ga: ga.log2(),
            log2_gb: gb.log2(),
            log2_inv_thresh: thresh.recip().log2(),
        }
    }
}

/// Multi-access uplink cache. Samples are pre-ordered into strong/weak
/// roles; an exact gain tie makes source 1 the strong user with the weak
/// gain nudged one ulp down (reproducible), and is remembered because at a
/// multiplier tie such a sample's optimum is a whole rate-sum segment
/// (either user may carry any share of `log2(1 + p1 g + p2 g)`).
pub(crate) struct MacCache<S> {
    pairs: Vec<PairSample<S>>,
    user2_strong: Vec<bool>,
    gain_tied: Vec<bool>,
    any_tied: bool,
}

impl<S: Scalar> MacCache<S> {
    pub fn new(set: &SampleSet<S>) -> Self {
        let n = set.len();
        let mut pairs = Vec::with_capacity(n);
        let mut user2_strong = Vec::with_capacity(n);
        let mut gain_tied = Vec::with_capacity(n);
        for s in set.samples() {
            if s.g_1r > s.g_2r {
                pairs.push(PairSample::new(s.g_1r, s.g_2r));
                user2_strong.push(false);
                gain_tied.push(false);
            } else if s.g_2r > s.g_1r {
                pairs.push(PairSample::new(s.g_2r, s.g_1r));
                user2_strong.push(true);
                gain_tied.push(false);
            } else {
                pairs.push(PairSample::new(s.g_1r, s.g_2r.next_below()));
                user2_strong.push(false);
                gain_tied.push(true);
            }
        }
        let any_tied = gain_tied.iter().any(|&t| t);
        MacCache {
            pairs,
            user2_strong,
            gain_tied,
            any_tied,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TwoAvgs<S> {
    pub r1: S,
    pub r2: S,
    pub power: S,
    /// Average rate that is freely splittable between the two streams; only
    /// nonzero for the superposition downlink at an exact multiplier tie,
    /// where degraded samples put their whole budget on the common stream.
    pub tie_budget: S,
}

impl<S: Scalar> TwoAvgs<S> {
    pub fn value(&self, t1: S, t2: S) -> S {
        self.power - ln_2::<S>() * (t1 * self.r1 + t2 * self.r2)
    }
}

/// Superposition-downlink cache; stream 1 is the common message, stream 2
/// the private message to the receiver with gain `g_r1`. Degraded samples
/// (private receiver not stronger) are kept separately since their whole
/// rate rides the private receiver's gain.
pub(crate) struct BcCache<S> {
    /// samples with g_r1 > g_r2
    pairs: Vec<PairSample<S>>,
    /// samples with g_r1 <= g_r2: (g_r1, 1/g_r1, log2 g_r1)
    degraded: Vec<(S, S, S)>,
    n_total: usize,
}

impl<S: Scalar> BcCache<S> {
    pub fn new(set: &SampleSet<S>) -> Self {
        let mut pairs = Vec::new();
        let mut degraded = Vec::new();
        for s in set.samples() {
            if s.g_r1 > s.g_r2 {
                pairs.push(PairSample::new(s.g_r1, s.g_r2));
            } else {
                degraded.push((s.g_r1, s.g_r1.recip(), s.g_r1.log2()));
            }
        }
        BcCache {
            pairs,
            degraded,
            n_total: set.len(),
        }
    }
}

pub(crate) enum TwoCache<S> {
    Mac(MacCache<S>),
    Bc(BcCache<S>),
    Cw(WfCache<S>, WfCache<S>),
}

impl<S: Scalar> TwoCache<S> {
    /// Whether an exact multiplier tie can leave a splittable rate budget
    /// (the superposition downlink with degraded samples, or the uplink
    /// with exactly tied gains).
    pub fn has_tie_budget(&self) -> bool {
        match self {
            TwoCache::Bc(b) => !b.degraded.is_empty(),
            TwoCache::Mac(m) => m.any_tied,
            TwoCache::Cw(..) => false,
        }
    }

    pub fn eval(&self, t1: S, t2: S) -> TwoAvgs<S> {
        let zero = S::zero();
        let one = S::one();
        match self {
            TwoCache::Mac(m) => {
                // per-eval constants; the per-sample rates reduce to sums of
                // these with the cached logs
                let tie = t1 == t2;
                let lt1 = t1.log2();
                let lt2 = t2.log2();
                let ld21 = (t2 - t1).log2();
                let ld12 = (t1 - t2).log2();
                let mut r1 = Kahan::new();
                let mut r2 = Kahan::new();
                let mut p = Kahan::new();
                let mut budget = Kahan::new();
                for (i, (pr, &swap)) in m.pairs.iter().zip(&m.user2_strong).enumerate() {
                    let (ts, tw, lts, ltw, ldw) = if swap {
                        (t2, t1, lt2, lt1, ld12)
                    } else {
                        (t1, t2, lt1, lt2, ld21)
                    };
                    let mut rs = zero;
                    let mut rw = zero;
                    if ts * pr.ga <= tw * pr.gb {
                        let pw = tw - pr.inv_gb;
                        if pw > zero {
                            rw = (ltw + pr.log2_gb).max(zero);
                            p.add(pw);
                        }
                    } else {
                        let d = tw - ts;
                        if d <= pr.thresh {
                            let ps = ts - pr.inv_ga;
                            if ps > zero {
                                rs = (lts + pr.log2_ga).max(zero);
                                p.add(ps);
                                if tie && m.gain_tied[i] {
                                    // tied gains at a multiplier tie: the
                                    // whole rate may sit with either user
                                    budget.add(rs);
                                }
                            }
                        } else {
                            let b = d * pr.inv_thresh;
                            let a = ts * pr.ga / b;
                            rw = (ldw + pr.log2_inv_thresh).max(zero);
                            rs = (lts + pr.log2_ga - rw).max(zero);
                            p.add((b - one) * pr.inv_gb + (a - one) * b * pr.inv_ga);
                        }
                    }
                    if swap {
                        r2.add(rs);
                        r1.add(rw);
                    } else {
                        r1.add(rs);
                        r2.add(rw);
                    }
                }
                let inv_n = c::<S>(1.0 / m.pairs.len() as f64);
                TwoAvgs {
                    r1: r1.value() * inv_n,
                    r2: r2.value() * inv_n,
                    power: p.value() * inv_n,
                    tie_budget: budget.value() * inv_n,
                }
            }
            TwoCache::Bc(bc) => {
                let tie = t1 == t2;
                let ltc = t1.log2();
                let ltp = t2.log2();
                let ldcp = (t1 - t2).log2();
                let ltmax = t1.max(t2).log2();
                let mut rc = Kahan::new();
                let mut rp = Kahan::new();
                let mut p = Kahan::new();
                let mut budget = Kahan::new();
                for pr in &bc.pairs {
                    if t2 * pr.ga <= t1 * pr.gb {
                        let pc = t1 - pr.inv_gb;
                        if pc > zero {
                            rc.add((ltc + pr.log2_gb).max(zero));
                            p.add(pc);
                        }
                    } else {
                        let d = t1 - t2;
                        if d <= pr.thresh {
                            let pp = t2 - pr.inv_ga;
                            if pp > zero {
                                rp.add((ltp + pr.log2_ga).max(zero));
                                p.add(pp);
                            }
                        } else {
                            let u = d * pr.inv_thresh;
                            let v = t2 * pr.ga / u;
                            let ru = (ldcp + pr.log2_inv_thresh).max(zero);
                            let rv = (ltp + pr.log2_ga - ru).max(zero);
                            let pp = (v - one) * pr.inv_ga;
                            rc.add(ru);
                            rp.add(rv);
                            p.add((u - one) * (pr.inv_gb + pp) + pp);
                        }
                    }
                }
                let tw = t1.max(t2);
                for &(_, inv_g, log2_g) in &bc.degraded {
                    let pw = tw - inv_g;
                    if pw > zero {
                        let r = (ltmax + log2_g).max(zero);
                        if t1 >= t2 {
                            rc.add(r);
                            if tie {
                                budget.add(r);
                            }
                        } else {
                            rp.add(r);
                        }
                        p.add(pw);
                    }
                }
                let inv_n = c::<S>(1.0 / bc.n_total as f64);
                TwoAvgs {
                    r1: rc.value() * inv_n,
                    r2: rp.value() * inv_n,
                    power: p.value() * inv_n,
                    tie_budget: budget.value() * inv_n,
                }
            }
            TwoCache::Cw(w1, w2) => {
                let (r1, p1) = w1.eval(t1);
                let (r2, p2) = w2.eval(t2);
                TwoAvgs {
                    r1,
                    r2,
                    power: p1 + p2,
                    tie_budget: zero,
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

fn as_f64<S: Scalar>(x: S) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Bisects a nondecreasing residual inside a sign-changing bracket.
#[allow(clippy::too_many_arguments)]
fn bisect_bracketed<S: Scalar, F: FnMut(S) -> S>(
    h: &mut F,
    mut lo: S,
    mut h_lo: S,
    mut hi: S,
    mut h_hi: S,
    tol: S,
    mono_tol: S,
    max_iter: usize,
) -> Result<S> {
    let one = S::one();
    let half = c::<S>(0.5);
    for _ in 0..max_iter {
        if h_hi.abs() <= tol {
            return Ok(hi);
        }
        if h_lo.abs() <= tol {
            return Ok(lo);
        }
        if hi - lo <= c::<S>(1e-10) * hi.abs().max(one) {
            // residual jump straddles the target; pick the closer side
            return Ok(if h_hi.abs() < h_lo.abs() { hi } else { lo });
        }
        let mid = (lo + hi) * half;
        let h_mid = h(mid);
        if mono_tol.is_finite() && (h_mid < h_lo - mono_tol || h_mid > h_hi + mono_tol) {
            let drop = (h_lo - h_mid).max(h_mid - h_hi);
            return Err(Error::Monotonicity {
                lo: as_f64(lo),
                hi: as_f64(hi),
                drop: as_f64(drop),
                tol: as_f64(mono_tol),
            });
        }
        if h_mid.abs() <= tol {
            return Ok(mid);
        }
        if h_mid < S::zero() {
            lo = mid;
            h_lo = h_mid;
        } else {
            hi = mid;
            h_hi = h_mid;
        }
    }
    Ok(if h_hi.abs() < h_lo.abs() { hi } else { lo })
}

/// Finds `t >= 0` with `h(t) ~ 0` for a nondecreasing residual with
/// `h(0) <= 0`. `err_target` is only used to build diagnostics when the
/// residual stays negative up to the multiplier cap.
fn root_nondecreasing<S: Scalar, F: FnMut(S) -> S>(
    h: &mut F,
    tol: S,
    mono_tol: S,
    cfg: &SolverConfig<S>,
    warm: Option<S>,
    err_target: S,
) -> Result<S> {
    let zero = S::zero();
    let one = S::one();
    let half = c::<S>(0.5);
    let tiny = c::<S>(1e-250);

    let start = warm
        .filter(|w| w.is_finite() && *w > zero)
        .unwrap_or(one)
        .min(cfg.bracket_max)
        .max(c::<S>(1e-9));

    let mut hi = start;
    let mut h_hi = h(hi);
    let lo;
    let h_lo;
    if h_hi >= zero {
        loop {
            let cand = hi * half;
            if cand <= tiny {
                lo = zero;
                h_lo = S::neg_infinity();
                break;
            }
            let h_cand = h(cand);
            if mono_tol.is_finite() && h_cand > h_hi + mono_tol {
                return Err(Error::Monotonicity {
                    lo: as_f64(cand),
                    hi: as_f64(hi),
                    drop: as_f64(h_cand - h_hi),
                    tol: as_f64(mono_tol),
                });
            }
            if h_cand < zero {
                lo = cand;
                h_lo = h_cand;
                break;
            }
            hi = cand;
            h_hi = h_cand;
        }
    } else {
        let mut cur = hi;
        let mut h_cur = h_hi;
        loop {
            if cur >= cfg.bracket_max {
                return Err(Error::Bracket {
                    target: as_f64(err_target),
                    achieved: as_f64(err_target + h_cur),
                    bracket_max: as_f64(cfg.bracket_max),
                });
            }
            let cand = (cur + cur).min(cfg.bracket_max);
            let h_cand = h(cand);
            if mono_tol.is_finite() && h_cand < h_cur - mono_tol {
                return Err(Error::Monotonicity {
                    lo: as_f64(cur),
                    hi: as_f64(cand),
                    drop: as_f64(h_cur - h_cand),
                    tol: as_f64(mono_tol),
                });
            }
            if h_cand >= zero {
                lo = cur;
                h_lo = h_cur;
                hi = cand;
                h_hi = h_cand;
                break;
            }
            cur = cand;
            h_cur = h_cand;
        }
    }
    bisect_bracketed(h, lo, h_lo, hi, h_hi, tol, mono_tol, cfg.max_iter)
}

// ---------------------------------------------------------------------------
// Mode-level solves
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct OneOutcome<S> {
    pub t: S,
    pub rate: S,
    pub power: S,
    pub value: S,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TwoOutcome<S> {
    pub t: [S; 2],
    pub rate: [S; 2],
    pub power: S,
    pub value: S,
}

pub(crate) struct EvalCounter<'a>(pub &'a Cell<usize>);

impl EvalCounter<'_> {
    fn bump(&self) {
        self.0.set(self.0.get() + 1);
    }
}

/// Multiplier for a single-stream mode so its average rate meets `target`.
pub(crate) fn solve_rate_one<S: Scalar>(
    cache: &OneCache<S>,
    target: S,
    cfg: &SolverConfig<S>,
    warm: Option<S>,
    evals: &EvalCounter,
) -> Result<OneOutcome<S>> {
    let zero = S::zero();
    if target <= zero {
        return Ok(OneOutcome {
            t: zero,
            rate: zero,
            power: zero,
            value: zero,
        });
    }
    let tol = cfg.eps_inner * target.max(S::one());
    let mut h = |t: S| {
        evals.bump();
        cache.eval(t).0 - target
    };
    let t = root_nondecreasing(&mut h, tol, cfg.eps_inner, cfg, warm, target)?;
    let (rate, power, value) = cache.value(t);
    Ok(OneOutcome {
        t,
        rate,
        power,
        value,
    })
}

/// Multiplier for a single-stream mode so its optimized dual value equals
/// `gamma` (the marginal value shared by all active modes).
pub(crate) fn solve_value_one<S: Scalar>(
    cache: &OneCache<S>,
    gamma: S,
    cfg: &SolverConfig<S>,
    warm: Option<S>,
    evals: &EvalCounter,
) -> Result<OneOutcome<S>> {
    let zero = S::zero();
    if gamma >= zero {
        return Ok(OneOutcome {
            t: zero,
            rate: zero,
            power: zero,
            value: zero,
        });
    }
    let mut h = |t: S| {
        evals.bump();
        gamma - cache.value(t).2
    };
    let t = root_nondecreasing(&mut h, cfg.eps_inner, S::infinity(), cfg, warm, gamma)?;
    let (rate, power, value) = cache.value(t);
    Ok(OneOutcome {
        t,
        rate,
        power,
        value,
    })
}

fn two_outcome<S: Scalar>(t1: S, t2: S, avgs: &TwoAvgs<S>, r1: S, r2: S) -> TwoOutcome<S> {
    let power = avgs.power;
    let value = power - ln_2::<S>() * (t1 * r1 + t2 * r2);
    TwoOutcome {
        t: [t1, t2],
        rate: [r1, r2],
        power,
        value,
    }
}

/// Solves stream 2's condition at fixed `t1`, honoring the splittable tie
/// budget of the superposition downlink. `residual2` maps the stream rates
/// to the signed condition on stream 2 (nondecreasing in `r2`, nonincreasing
/// in `r1`); it must be zero exactly when stream 2 is on target.
fn inner_stream2<S: Scalar>(
    cache: &TwoCache<S>,
    t1: S,
    residual2: &dyn Fn(S, S) -> S,
    tol: S,
    cfg: &SolverConfig<S>,
    warm: Option<S>,
    evals: &EvalCounter,
) -> Result<TwoOutcome<S>> {
    if !cache.has_tie_budget() {
        let mut h = |t2: S| {
            evals.bump();
            let a = cache.eval(t1, t2);
            residual2(a.r1, a.r2)
        };
        let t2 = root_nondecreasing(&mut h, tol, S::infinity(), cfg, warm, S::zero())?;
        let a = cache.eval(t1, t2);
        return Ok(two_outcome(t1, t2, &a, a.r1, a.r2));
    }
    evals.bump();
    let at_tie = cache.eval(t1, t1);
    let budget = at_tie.tie_budget;
    let h_minus = residual2(at_tie.r1, at_tie.r2);
    let h_plus = residual2(at_tie.r1 - budget, at_tie.r2 + budget);
    if h_minus > tol && t1 > S::zero() {
        // root strictly below the tie
        let mut h = |t2: S| {
            evals.bump();
            let a = cache.eval(t1, t2);
            residual2(a.r1, a.r2)
        };
        let (mut lo, mut h_lo) = (S::zero(), {
            evals.bump();
            let a = cache.eval(t1, S::zero());
            residual2(a.r1, a.r2)
        });
        if h_lo >= -tol {
            // stream 2 already satisfied with no multiplier
            let a = cache.eval(t1, S::zero());
            return Ok(two_outcome(t1, S::zero(), &a, a.r1, a.r2));
        }
        let (mut hi, mut h_hi) = (t1, h_minus);
        if let Some(w) = warm.filter(|&w| w > lo && w < hi) {
            let h_w = h(w);
            if h_w < S::zero() {
                lo = w;
                h_lo = h_w;
            } else {
                hi = w;
                h_hi = h_w;
            }
        }
        let t2 = bisect_bracketed(&mut h, lo, h_lo, hi, h_hi, tol, S::infinity(), cfg.max_iter)?;
        let a = cache.eval(t1, t2);
        Ok(two_outcome(t1, t2, &a, a.r1, a.r2))
    } else if h_plus < -tol {
        // root strictly above the tie
        let mut h = |t2: S| {
            evals.bump();
            let a = cache.eval(t1, t2);
            residual2(a.r1, a.r2)
        };
        let floor = t1 + t1 * c::<S>(1e-9);
        let start = warm.filter(|&w| w > floor).unwrap_or(floor.max(S::one()));
        let t2 = root_nondecreasing(&mut h, tol, S::infinity(), cfg, Some(start), S::zero())?;
        let a = cache.eval(t1, t2);
        Ok(two_outcome(t1, t2, &a, a.r1, a.r2))
    } else {
        // the condition lands inside the tie: move part of the degraded
        // budget onto stream 2 until the residual vanishes
        if h_minus.abs() <= tol || budget <= S::zero() {
            return Ok(two_outcome(t1, t1, &at_tie, at_tie.r1, at_tie.r2));
        }
        let mut x_lo = S::zero();
        let mut x_hi = budget;
        for _ in 0..128 {
            let x = (x_lo + x_hi) * c::<S>(0.5);
            let r = residual2(at_tie.r1 - x, at_tie.r2 + x);
            if r.abs() <= tol {
                x_lo = x;
                break;
            }
            if r < S::zero() {
                x_lo = x;
            } else {
                x_hi = x;
            }
        }
        let x = x_lo;
        Ok(two_outcome(t1, t1, &at_tie, at_tie.r1 - x, at_tie.r2 + x))
    }
}

/// Multipliers for a two-stream mode so both average rates meet their
/// targets (nested bisection, inner on stream 2).
pub(crate) fn solve_two_targets<S: Scalar>(
    cache: &TwoCache<S>,
    targets: [S; 2],
    cfg: &SolverConfig<S>,
    warm: [Option<S>; 2],
    evals: &EvalCounter,
) -> Result<TwoOutcome<S>> {
    let zero = S::zero();
    let [target1, target2] = targets;
    if target1 <= zero && target2 <= zero {
        let a = cache.eval(zero, zero);
        return Ok(two_outcome(zero, zero, &a, zero, zero));
    }
    let tol2 = cfg.eps_inner * target2.max(S::one());
    if target1 <= zero {
        let mut h = |t2: S| {
            evals.bump();
            cache.eval(zero, t2).r2 - target2
        };
        let t2 = root_nondecreasing(&mut h, tol2, cfg.eps_inner, cfg, warm[1], target2)?;
        let a = cache.eval(zero, t2);
        return Ok(two_outcome(zero, t2, &a, a.r1, a.r2));
    }
    let tol1 = cfg.eps_inner * target1.max(S::one());
    if target2 <= zero {
        let mut h = |t1: S| {
            evals.bump();
            cache.eval(t1, zero).r1 - target1
        };
        let t1 = root_nondecreasing(&mut h, tol1, cfg.eps_inner, cfg, warm[0], target1)?;
        let a = cache.eval(t1, zero);
        return Ok(two_outcome(t1, zero, &a, a.r1, a.r2));
    }
    let residual2 = move |_r1: S, r2: S| r2 - target2;
    let mut inner_warm = warm[1];
    let mut outer = |t1: S| -> Result<TwoOutcome<S>> {
        let out = inner_stream2(cache, t1, &residual2, tol2, cfg, inner_warm, evals)?;
        inner_warm = Some(out.t[1]).filter(|x| *x > zero);
        Ok(out)
    };
    let mut failure = None;
    let mut h = |t1: S| match outer(t1) {
        Ok(out) => out.rate[0] - target1,
        Err(e) => {
            failure = Some(e);
            S::nan()
        }
    };
    let t1 = root_nondecreasing(&mut h, tol1, S::infinity(), cfg, warm[0], target1);
    if let Some(e) = failure {
        return Err(e);
    }
    let t1 = t1?;
    inner_stream2(cache, t1, &residual2, tol2, cfg, inner_warm, evals)
}

/// Multipliers for a two-stream mode so its optimized dual value equals
/// `gamma` while the stream rates keep the ratio of their required
/// throughputs `c1 : c2` (one shared time fraction then makes both rate
/// constraints tight).
pub(crate) fn solve_gamma_ratio<S: Scalar>(
    cache: &TwoCache<S>,
    c1: S,
    c2: S,
    gamma: S,
    cfg: &SolverConfig<S>,
    warm: [Option<S>; 2],
    evals: &EvalCounter,
) -> Result<TwoOutcome<S>> {
    let zero = S::zero();
    if gamma >= zero {
        let a = cache.eval(zero, zero);
        return Ok(two_outcome(zero, zero, &a, zero, zero));
    }
    if c2 <= zero {
        let mut h = |t1: S| {
            evals.bump();
            let a = cache.eval(t1, zero);
            gamma - a.value(t1, zero)
        };
        let t1 = root_nondecreasing(&mut h, cfg.eps_inner, S::infinity(), cfg, warm[0], gamma)?;
        let a = cache.eval(t1, zero);
        return Ok(two_outcome(t1, zero, &a, a.r1, a.r2));
    }
    if c1 <= zero {
        let mut h = |t2: S| {
            evals.bump();
            let a = cache.eval(zero, t2);
            gamma - a.value(zero, t2)
        };
        let t2 = root_nondecreasing(&mut h, cfg.eps_inner, S::infinity(), cfg, warm[1], gamma)?;
        let a = cache.eval(zero, t2);
        return Ok(two_outcome(zero, t2, &a, a.r1, a.r2));
    }
    let ratio = c2 / c1;
    let tol2 = cfg.eps_inner * ratio.max(S::one());
    let residual2 = move |r1: S, r2: S| r2 - ratio * r1;
    let mut inner_warm = warm[1];
    let mut failure = None;
    let mut h = |t1: S| match inner_stream2(cache, t1, &residual2, tol2, cfg, inner_warm, evals) {
        Ok(out) => {
            inner_warm = Some(out.t[1]).filter(|x| *x > zero);
            gamma - out.value
        }
        Err(e) => {
            failure = Some(e);
            S::nan()
        }
    };
    let t1 = root_nondecreasing(&mut h, cfg.eps_inner, S::infinity(), cfg, warm[0], gamma);
    if let Some(e) = failure {
        return Err(e);
    }
    let t1 = t1?;
    inner_stream2(cache, t1, &residual2, tol2, cfg, inner_warm, evals)
}
