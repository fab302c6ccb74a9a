//! Per-strategy mode plans and the outer time-fraction search.

use std::cell::Cell;
use std::collections::BTreeMap;

use crate::alloc::Multipliers;
use crate::error::{Error, Result};
use crate::fading::SampleSet;
use crate::scalar::{c, ln_2, Scalar};

use super::engine::{
    self, BcCache, EvalCounter, MacCache, OneCache, PncUpCache, TwoCache, WfCache,
};
use super::{LinkGain, RateRequirement, SolverConfig, Strategy, StrategySolution};

enum AnyCache<S> {
    One(OneCache<S>),
    Two(TwoCache<S>),
}

struct PlanMode<S> {
    label: &'static str,
    streams: [&'static str; 2],
    betas: [&'static str; 2],
    /// Required throughput (frames/slot) each stream must deliver; the
    /// per-mode rate target is `throughput / fraction`.
    targets: [S; 2],
    cache: AnyCache<S>,
}

impl<S: Scalar> PlanMode<S> {
    fn active(&self) -> bool {
        self.targets[0] + self.targets[1] > S::zero()
    }
}

#[derive(Clone, Copy)]
struct ModeOut<S> {
    t: [S; 2],
    rate: [S; 2],
    power: S,
    value: S,
    fraction: S,
}

enum Attempt<S> {
    /// All mode solves succeeded at this anchor fraction.
    Solved {
        sum: S,
        outs: Vec<Option<ModeOut<S>>>,
        gamma: S,
    },
    /// A rate target was unreachable: the anchor fraction is too small.
    TooSmall,
}

fn positive<S: Scalar>(x: S) -> Option<S> {
    (x > S::zero()).then_some(x)
}

/// Time fraction delivering throughput `c` at average rate `r`.
fn fraction_for<S: Scalar>(throughput: S, rate: S) -> S {
    if throughput <= S::zero() {
        S::zero()
    } else if rate <= c::<S>(1e-12) {
        c::<S>(1e15)
    } else {
        throughput / rate
    }
}

fn try_fraction<S: Scalar>(
    plan: &[PlanMode<S>],
    active: &[usize],
    anchor: usize,
    f_anchor: S,
    cfg: &SolverConfig<S>,
    warm: &mut [[Option<S>; 2]],
    evals: &EvalCounter,
) -> Result<Attempt<S>> {
    let zero = S::zero();
    let mode = &plan[anchor];
    let anchor_out = match &mode.cache {
        AnyCache::One(cache) => {
            let target = mode.targets[0] / f_anchor;
            match engine::solve_rate_one(cache, target, cfg, warm[anchor][0], evals) {
                Ok(o) => {
                    warm[anchor][0] = positive(o.t);
                    ModeOut {
                        t: [o.t, zero],
                        rate: [o.rate, zero],
                        power: o.power,
                        value: o.value,
                        fraction: f_anchor,
                    }
                }
                Err(Error::Bracket { .. }) => return Ok(Attempt::TooSmall),
                Err(e) => return Err(e),
            }
        }
        AnyCache::Two(cache) => {
            let targets = [mode.targets[0] / f_anchor, mode.targets[1] / f_anchor];
            match engine::solve_two_targets(cache, targets, cfg, warm[anchor], evals) {
                Ok(o) => {
                    warm[anchor] = [positive(o.t[0]), positive(o.t[1])];
                    ModeOut {
                        t: o.t,
                        rate: o.rate,
                        power: o.power,
                        value: o.value,
                        fraction: f_anchor,
                    }
                }
                Err(Error::Bracket { .. }) => return Ok(Attempt::TooSmall),
                Err(e) => return Err(e),
            }
        }
    };
    let gamma = anchor_out.value;
    let mut outs: Vec<Option<ModeOut<S>>> = plan.iter().map(|_| None).collect();
    let mut sum = f_anchor;
    for &i in active {
        if i == anchor {
            continue;
        }
        let mode = &plan[i];
        let out = match &mode.cache {
            AnyCache::One(cache) => {
                match engine::solve_value_one(cache, gamma, cfg, warm[i][0], evals) {
                    Ok(o) => {
                        warm[i][0] = positive(o.t);
                        ModeOut {
                            t: [o.t, zero],
                            rate: [o.rate, zero],
                            power: o.power,
                            value: o.value,
                            fraction: fraction_for(mode.targets[0], o.rate),
                        }
                    }
                    Err(Error::Bracket { .. }) => return Ok(Attempt::TooSmall),
                    Err(e) => return Err(e),
                }
            }
            AnyCache::Two(cache) => {
                match engine::solve_gamma_ratio(
                    cache,
                    mode.targets[0],
                    mode.targets[1],
                    gamma,
                    cfg,
                    warm[i],
                    evals,
                ) {
                    Ok(o) => {
                        warm[i] = [positive(o.t[0]), positive(o.t[1])];
                        ModeOut {
                            t: o.t,
                            rate: o.rate,
                            power: o.power,
                            value: o.value,
                            fraction: fraction_for(
                                mode.targets[0] + mode.targets[1],
                                o.rate[0] + o.rate[1],
                            ),
                        }
                    }
                    Err(Error::Bracket { .. }) => return Ok(Attempt::TooSmall),
                    Err(e) => return Err(e),
                }
            }
        };
        sum = sum + out.fraction;
        outs[i] = Some(out);
    }
    outs[anchor] = Some(anchor_out);
    Ok(Attempt::Solved { sum, outs, gamma })
}

fn assemble<S: Scalar>(
    strategy: Strategy,
    plan: &[PlanMode<S>],
    outs: &[Option<ModeOut<S>>],
    gamma: S,
    iterations: usize,
    swapped: bool,
) -> StrategySolution<S> {
    let zero = S::zero();
    let ln2 = ln_2::<S>();
    let mut fractions = BTreeMap::new();
    let mut multipliers = Multipliers::default();
    let mut avg_rates = BTreeMap::new();
    let mut avg_powers = BTreeMap::new();
    let mut total_energy = zero;
    for (mode, out) in plan.iter().zip(outs) {
        let (f, power) = match out {
            Some(o) => (o.fraction, o.power),
            None => (zero, zero),
        };
        fractions.insert(mode.label.to_string(), f);
        avg_powers.insert(mode.label.to_string(), power);
        total_energy = total_energy + f * power;
        for s in 0..2 {
            if mode.streams[s].is_empty() {
                continue;
            }
            let (t, rate) = match out {
                Some(o) => (o.t[s], o.rate[s]),
                None => (zero, zero),
            };
            multipliers
                .values
                .insert(mode.betas[s].to_string(), t * ln2);
            avg_rates.insert(mode.streams[s].to_string(), rate);
        }
    }
    StrategySolution {
        strategy,
        fractions,
        multipliers,
        avg_rates,
        avg_powers,
        total_energy,
        gamma,
        converged: true,
        iterations,
        swapped,
    }
}

fn run_strategy<S: Scalar>(
    strategy: Strategy,
    plan: Vec<PlanMode<S>>,
    cfg: &SolverConfig<S>,
    swapped: bool,
) -> Result<StrategySolution<S>> {
    cfg.validate()?;
    let active: Vec<usize> = plan
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.active().then_some(i))
        .collect();
    let anchor = *active.first().ok_or_else(|| {
        Error::Contract("strategy has no mode with a positive rate requirement".into())
    })?;
    let one = S::one();
    let evals_cell = Cell::new(0usize);
    let evals = EvalCounter(&evals_cell);
    let mut warm: Vec<[Option<S>; 2]> = vec![[None, None]; plan.len()];
    let mut iterations = 0usize;
    let mut best_sum = f64::NEG_INFINITY;

    let run = |f: S,
               warm: &mut Vec<[Option<S>; 2]>,
               iterations: &mut usize,
               best_sum: &mut f64|
     -> Result<Attempt<S>> {
        *iterations += 1;
        let attempt = try_fraction(&plan, &active, anchor, f, cfg, warm, &evals)?;
        if let Attempt::Solved { sum, .. } = &attempt {
            let s = sum.to_f64().unwrap_or(f64::NAN);
            if s <= 1.0 && s > *best_sum {
                *best_sum = s;
            }
        }
        Ok(attempt)
    };

    // residual sum(f) - 1 is monotone in the anchor fraction: pre-scan for a
    // sign change, then bisect
    let mut lo: Option<S> = None;
    let mut hi: Option<S> = None;
    let scan_denom = 17.0;
    for k in 1..=16 {
        let f = c::<S>(k as f64 / scan_denom);
        match run(f, &mut warm, &mut iterations, &mut best_sum)? {
            Attempt::TooSmall => {
                lo = Some(f);
            }
            Attempt::Solved { sum, outs, gamma } => {
                if sum > one - cfg.eps_outer && sum <= one {
                    return Ok(assemble(strategy, &plan, &outs, gamma, iterations, swapped));
                }
                if sum <= one {
                    lo = Some(f);
                } else {
                    hi = Some(f);
                    break;
                }
            }
        }
    }
    // the slot always oversubscribes as the anchor fraction approaches one
    // (at least one other mode needs time), so a root above the last scan
    // point is still bracketed
    let mut hi = hi.unwrap_or_else(|| one - c::<S>(1e-9));
    let mut lo = match lo {
        Some(f) => f,
        None => {
            // even the smallest scanned fraction oversubscribes; shrink
            let mut f = hi * c::<S>(0.5);
            loop {
                if f < c::<S>(1e-9) {
                    return Err(Error::Infeasible {
                        closest_sum: best_sum,
                        iterations,
                    });
                }
                match run(f, &mut warm, &mut iterations, &mut best_sum)? {
                    Attempt::TooSmall => break f,
                    Attempt::Solved { sum, outs, gamma } => {
                        if sum > one - cfg.eps_outer && sum <= one {
                            return Ok(assemble(
                                strategy, &plan, &outs, gamma, iterations, swapped,
                            ));
                        }
                        if sum <= one {
                            break f;
                        }
                        hi = f;
                    }
                }
                f = f * c::<S>(0.5);
            }
        }
    };
    while iterations < cfg.max_iter.max(32) {
        let mid = (lo + hi) * c::<S>(0.5);
        match run(mid, &mut warm, &mut iterations, &mut best_sum)? {
            Attempt::TooSmall => lo = mid,
            Attempt::Solved { sum, outs, gamma } => {
                if sum > one - cfg.eps_outer && sum <= one {
                    return Ok(assemble(strategy, &plan, &outs, gamma, iterations, swapped));
                }
                if sum <= one {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
    }
    Err(Error::Infeasible {
        closest_sum: best_sum,
        iterations,
    })
}

fn canonical<S: Scalar>(
    req: &RateRequirement<S>,
    samples: &SampleSet<S>,
) -> Result<(S, S, Option<SampleSet<S>>, bool)> {
    req.validate()?;
    if samples.is_empty() {
        return Err(Error::Contract("empty sample set".into()));
    }
    if req.lambda1 > req.lambda2 {
        Ok((req.lambda2, req.lambda1, Some(samples.mirrored()), true))
    } else {
        Ok((req.lambda1, req.lambda2, None, false))
    }
}

fn wf_on<S: Scalar>(link: LinkGain, set: &SampleSet<S>) -> WfCache<S> {
    WfCache::from_gains(
        set.samples().iter().map(|s| link.extract(s)).collect(),
        set.len(),
    )
}

/// Function-decoding uplink, unicast of the excess bits, superposed
/// downlink.
pub fn solve_pnc_sup<S: Scalar>(
    req: &RateRequirement<S>,
    samples: &SampleSet<S>,
    cfg: &SolverConfig<S>,
) -> Result<StrategySolution<S>> {
    let (l1, l2, mirrored, swapped) = canonical(req, samples)?;
    let set = mirrored.as_ref().unwrap_or(samples);
    let zero = S::zero();
    let plan = vec![
        PlanMode {
            label: "1",
            streams: ["r1", ""],
            betas: ["beta1", ""],
            targets: [l1, zero],
            cache: AnyCache::One(OneCache::PncUp(PncUpCache::new(set))),
        },
        PlanMode {
            label: "2",
            streams: ["r22", ""],
            betas: ["beta2", ""],
            targets: [l2 - l1, zero],
            cache: AnyCache::One(OneCache::Wf(wf_on(LinkGain::G2r, set))),
        },
        PlanMode {
            label: "3",
            streams: ["r3c", "r3p"],
            betas: ["beta3c", "beta3p"],
            targets: [l1, l2 - l1],
            cache: AnyCache::Two(TwoCache::Bc(BcCache::new(set))),
        },
    ];
    run_strategy(Strategy::PncSup, plan, cfg, swapped).map_err(|e| e.tagged("pnc_sup"))
}

/// Function-decoding uplink with the shorter message zero-padded; both
/// phases carry the longer message's rate and the downlink broadcast is
/// limited by the weaker downlink gain.
pub fn solve_pnc_zp<S: Scalar>(
    req: &RateRequirement<S>,
    samples: &SampleSet<S>,
    cfg: &SolverConfig<S>,
) -> Result<StrategySolution<S>> {
    let (_l1, l2, mirrored, swapped) = canonical(req, samples)?;
    let set = mirrored.as_ref().unwrap_or(samples);
    let zero = S::zero();
    let plan = vec![
        PlanMode {
            label: "1",
            streams: ["r1", ""],
            betas: ["beta1", ""],
            targets: [l2, zero],
            cache: AnyCache::One(OneCache::PncUp(PncUpCache::new(set))),
        },
        PlanMode {
            label: "2",
            streams: ["r2", ""],
            betas: ["beta2", ""],
            targets: [l2, zero],
            cache: AnyCache::One(OneCache::Wf(wf_on(LinkGain::MinDownlink, set))),
        },
    ];
    run_strategy(Strategy::PncZp, plan, cfg, swapped).map_err(|e| e.tagged("pnc_zp"))
}

/// Multi-access uplink, then time sharing of the network-coded broadcast
/// and a unicast of the longer message's excess bits.
pub fn solve_dnc_ts<S: Scalar>(
    req: &RateRequirement<S>,
    samples: &SampleSet<S>,
    cfg: &SolverConfig<S>,
) -> Result<StrategySolution<S>> {
    let (l1, l2, mirrored, swapped) = canonical(req, samples)?;
    let set = mirrored.as_ref().unwrap_or(samples);
    let zero = S::zero();
    let plan = vec![
        PlanMode {
            label: "1",
            streams: ["r11", "r12"],
            betas: ["beta11", "beta12"],
            targets: [l1, l2],
            cache: AnyCache::Two(TwoCache::Mac(MacCache::new(set))),
        },
        PlanMode {
            label: "2",
            streams: ["r2", ""],
            betas: ["beta2", ""],
            targets: [l1, zero],
            cache: AnyCache::One(OneCache::Wf(wf_on(LinkGain::MinDownlink, set))),
        },
        PlanMode {
            label: "3",
            streams: ["r3", ""],
            betas: ["beta3", ""],
            targets: [l2 - l1, zero],
            cache: AnyCache::One(OneCache::Wf(wf_on(LinkGain::Gr1, set))),
        },
    ];
    run_strategy(Strategy::DncTs, plan, cfg, swapped).map_err(|e| e.tagged("dnc_ts"))
}

/// Multi-access uplink, network-coded message superposed with the excess
/// bits on the downlink.
pub fn solve_dnc_sup<S: Scalar>(
    req: &RateRequirement<S>,
    samples: &SampleSet<S>,
    cfg: &SolverConfig<S>,
) -> Result<StrategySolution<S>> {
    let (l1, l2, mirrored, swapped) = canonical(req, samples)?;
    let set = mirrored.as_ref().unwrap_or(samples);
    let plan = vec![
        PlanMode {
            label: "1",
            streams: ["r11", "r12"],
            betas: ["beta11", "beta12"],
            targets: [l1, l2],
            cache: AnyCache::Two(TwoCache::Mac(MacCache::new(set))),
        },
        PlanMode {
            label: "5",
            streams: ["r52", "r51"],
            betas: ["beta52", "beta51"],
            targets: [l1, l2 - l1],
            cache: AnyCache::Two(TwoCache::Bc(BcCache::new(set))),
        },
    ];
    run_strategy(Strategy::DncSup, plan, cfg, swapped).map_err(|e| e.tagged("dnc_sup"))
}

/// Multi-access uplink, codeword superposition on the downlink (each source
/// strips its own codeword and decodes the other interference-free).
pub fn solve_cw_sup<S: Scalar>(
    req: &RateRequirement<S>,
    samples: &SampleSet<S>,
    cfg: &SolverConfig<S>,
) -> Result<StrategySolution<S>> {
    let (l1, l2, mirrored, swapped) = canonical(req, samples)?;
    let set = mirrored.as_ref().unwrap_or(samples);
    let plan = vec![
        PlanMode {
            label: "1",
            streams: ["r11", "r12"],
            betas: ["beta11", "beta12"],
            targets: [l1, l2],
            cache: AnyCache::Two(TwoCache::Mac(MacCache::new(set))),
        },
        PlanMode {
            label: "6",
            streams: ["r61", "r62"],
            betas: ["beta61", "beta62"],
            targets: [l2, l1],
            cache: AnyCache::Two(TwoCache::Cw(
                wf_on(LinkGain::Gr1, set),
                wf_on(LinkGain::Gr2, set),
            )),
        },
    ];
    run_strategy(Strategy::CwSup, plan, cfg, swapped).map_err(|e| e.tagged("cw_sup"))
}

/// Dispatch by strategy id.
pub fn solve<S: Scalar>(
    strategy: Strategy,
    req: &RateRequirement<S>,
    samples: &SampleSet<S>,
    cfg: &SolverConfig<S>,
) -> Result<StrategySolution<S>> {
    match strategy {
        Strategy::PncZp => solve_pnc_zp(req, samples, cfg),
        Strategy::PncSup => solve_pnc_sup(req, samples, cfg),
        Strategy::DncTs => solve_dnc_ts(req, samples, cfg),
        Strategy::DncSup => solve_dnc_sup(req, samples, cfg),
        Strategy::CwSup => solve_cw_sup(req, samples, cfg),
    }
}

/// Energies of the two candidate strategies considered by the selector.
#[derive(Debug, Clone, Copy)]
pub struct StrategyComparison<S> {
    pub pnc_sup_energy: S,
    pub dnc_sup_energy: S,
}

/// Runs the two non-dominated strategies on the same sample set and keeps
/// the cheaper one. Time sharing and codeword superposition are excluded:
/// the superposed network-coded downlink never uses more energy than either.
pub fn select_optimal<S: Scalar>(
    req: &RateRequirement<S>,
    samples: &SampleSet<S>,
    cfg: &SolverConfig<S>,
) -> Result<(StrategySolution<S>, StrategyComparison<S>)> {
    let pnc = solve_pnc_sup(req, samples, cfg)?;
    let dnc = solve_dnc_sup(req, samples, cfg)?;
    let comparison = StrategyComparison {
        pnc_sup_energy: pnc.total_energy,
        dnc_sup_energy: dnc.total_energy,
    };
    // ties go to the network-coded superposition
    let winner = if pnc.total_energy < dnc.total_energy {
        pnc
    } else {
        dnc
    };
    Ok((winner, comparison))
}
