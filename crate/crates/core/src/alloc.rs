//! Pointwise power/rate allocators.
//!
//! Each transmission mode has a closed-form minimizer of the per-sample dual
//! objective `power - sum(beta * rate)` for given multipliers and channel
//! gains. Point-to-point links water-fill; the superposition downlink and the
//! multi-access uplink follow three-case allocations that reduce to single
//! water-fills when one multiplier dominates. The function-decoding uplink
//! water-fills the equivalent channel `1/(1/g_1r + 1/g_2r)` under channel
//! inversion (both sources received at the same SNR).
//!
//! Multipliers are raw Lagrange multipliers on the rate constraints; the
//! water level of a stream is `beta * log2(e)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fading::ChannelSample;
use crate::scalar::{log2_e, Scalar};

/// Raw nonnegative Lagrange multipliers keyed by constraint label.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers<S> {
    pub values: BTreeMap<String, S>,
}

impl<S> Default for Multipliers<S> {
    fn default() -> Self {
        Multipliers {
            values: BTreeMap::new(),
        }
    }
}

impl<S: Scalar> Multipliers<S> {
    pub fn get(&self, label: &str) -> Option<S> {
        self.values.get(label).copied()
    }
}

/// Power/rate assignment of one transmission mode at one channel sample.
///
/// `lagrangian_value` is the instantaneous dual objective
/// `total power - sum(beta * rate)` achieved by the assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAllocation<S> {
    pub powers: BTreeMap<&'static str, S>,
    pub rates: BTreeMap<&'static str, S>,
    pub lagrangian_value: S,
}

impl<S: Scalar> ModeAllocation<S> {
    pub fn total_power(&self) -> S {
        self.powers.values().fold(S::zero(), |acc, &p| acc + p)
    }

    pub fn power(&self, label: &str) -> S {
        self.powers.get(label).copied().unwrap_or_else(S::zero)
    }

    pub fn rate(&self, label: &str) -> S {
        self.rates.get(label).copied().unwrap_or_else(S::zero)
    }
}

fn check_gain<S: Scalar>(name: &'static str, g: S) -> Result<()> {
    if !g.is_finite() {
        return Err(Error::non_finite(g, format!("input `{name}`")));
    }
    if g <= S::zero() {
        return Err(Error::Contract(format!(
            "gain `{name}` must be positive, got {g}"
        )));
    }
    Ok(())
}

fn check_multiplier<S: Scalar>(name: &'static str, b: S) -> Result<()> {
    if !b.is_finite() {
        return Err(Error::non_finite(b, format!("input `{name}`")));
    }
    if b < S::zero() {
        return Err(Error::Contract(format!(
            "multiplier `{name}` must be nonnegative, got {b}"
        )));
    }
    Ok(())
}

fn check_rate<S: Scalar>(name: &'static str, r: S) -> Result<()> {
    if !r.is_finite() {
        return Err(Error::non_finite(r, format!("input `{name}`")));
    }
    if r < S::zero() {
        return Err(Error::Contract(format!(
            "rate `{name}` must be nonnegative, got {r}"
        )));
    }
    Ok(())
}

/// Closed-form kernels on pre-scaled water levels `t = beta * log2(e)`.
///
/// These are the branch-free building blocks the solvers evaluate per
/// sample; the public allocators wrap them with input validation and the
/// labeled map representation.
pub(crate) mod kernel {
    use crate::scalar::{c, Scalar};

    /// Water-fill one Gaussian link: `p = [t - 1/g]+`, `r = log2(1 + p g)`.
    #[inline]
    pub fn wf_point<S: Scalar>(t: S, g: S) -> (S, S) {
        let p = t - g.recip();
        if p > S::zero() {
            (p, (S::one() + p * g).log2())
        } else {
            (S::zero(), S::zero())
        }
    }

    #[derive(Debug, Clone, Copy)]
    pub struct PncUplinkPoint<S> {
        pub p1: S,
        pub p2: S,
        pub rate: S,
    }

    /// Function-decoding uplink under channel inversion. The pair transmits
    /// only when the water level clears the zero-rate cost `1/g1 + 1/g2`;
    /// below it the symmetric rate `log2(1/2 + snr)` would go negative, so
    /// the slot is left silent.
    #[inline]
    pub fn pnc_uplink_point<S: Scalar>(t: S, g1: S, g2: S) -> PncUplinkPoint<S> {
        let sigma = g1.recip() + g2.recip();
        if t > sigma {
            let rho = t / sigma - c::<S>(0.5);
            let p1 = rho / g1;
            let p2 = rho / g2;
            PncUplinkPoint {
                p1,
                p2,
                rate: (c::<S>(0.5) + p1 * g1).log2(),
            }
        } else {
            PncUplinkPoint {
                p1: S::zero(),
                p2: S::zero(),
                rate: S::zero(),
            }
        }
    }

    #[derive(Debug, Clone, Copy)]
    pub struct BcPoint<S> {
        pub p_common: S,
        pub p_private: S,
        pub r_common: S,
        pub r_private: S,
    }

    /// Superposition downlink, private stream to the receiver with gain
    /// `ga`. For `ga > gb` the three-case allocation applies; for
    /// `ga <= gb` the channel is degraded and all rate goes to the stream
    /// with the larger multiplier (ties to the common stream).
    #[inline]
    pub fn bc_point<S: Scalar>(tc: S, tp: S, ga: S, gb: S) -> BcPoint<S> {
        let zero = S::zero();
        let one = S::one();
        if ga <= gb {
            let (p, r) = wf_point(tc.max(tp), ga);
            if tc >= tp {
                BcPoint {
                    p_common: p,
                    p_private: zero,
                    r_common: r,
                    r_private: zero,
                }
            } else {
                BcPoint {
                    p_common: zero,
                    p_private: p,
                    r_common: zero,
                    r_private: r,
                }
            }
        } else if tp * ga <= tc * gb {
            let (p, r) = wf_point(tc, gb);
            BcPoint {
                p_common: p,
                p_private: zero,
                r_common: r,
                r_private: zero,
            }
        } else {
            let inv_ga = ga.recip();
            let inv_gb = gb.recip();
            let thresh = inv_gb - inv_ga;
            if tc - tp <= thresh {
                let (p, r) = wf_point(tp, ga);
                BcPoint {
                    p_common: zero,
                    p_private: p,
                    r_common: zero,
                    r_private: r,
                }
            } else {
                // both streams active: 2^rc and 2^rp from the stationarity
                // conditions, powers through the forward maps
                let u = (tc - tp) / thresh;
                let v = tp * ga / u;
                let p_private = (v - one) * inv_ga;
                let p_common = (u - one) * (inv_gb + p_private);
                BcPoint {
                    p_common,
                    p_private,
                    r_common: u.log2(),
                    r_private: v.log2(),
                }
            }
        }
    }

    #[derive(Debug, Clone, Copy)]
    pub struct MacPoint<S> {
        pub p_strong: S,
        pub p_weak: S,
        pub r_strong: S,
        pub r_weak: S,
    }

    /// Multi-access uplink, stronger user decoded first. Requires
    /// `gs > gw`.
    #[inline]
    pub fn mac_point<S: Scalar>(ts: S, tw: S, gs: S, gw: S) -> MacPoint<S> {
        let zero = S::zero();
        let one = S::one();
        if ts * gs <= tw * gw {
            let (p, r) = wf_point(tw, gw);
            MacPoint {
                p_strong: zero,
                p_weak: p,
                r_strong: zero,
                r_weak: r,
            }
        } else {
            let inv_gs = gs.recip();
            let inv_gw = gw.recip();
            let thresh = inv_gw - inv_gs;
            if tw - ts <= thresh {
                let (p, r) = wf_point(ts, gs);
                MacPoint {
                    p_strong: p,
                    p_weak: zero,
                    r_strong: r,
                    r_weak: zero,
                }
            } else {
                // both users active; b = 2^rw, a = 2^rs
                let b = (tw - ts) / thresh;
                let a = ts * gs / b;
                let p_weak = (b - one) * inv_gw;
                let p_strong = (a - one) * b * inv_gs;
                MacPoint {
                    p_strong,
                    p_weak,
                    r_strong: a.log2(),
                    r_weak: b.log2(),
                }
            }
        }
    }
}

/// Single-stream water-fill against gain `g`.
pub fn p2p_waterfill<S: Scalar>(beta: S, g: S) -> Result<ModeAllocation<S>> {
    check_multiplier("beta", beta)?;
    check_gain("g", g)?;
    let (p, r) = kernel::wf_point(beta * log2_e::<S>(), g);
    Ok(ModeAllocation {
        powers: BTreeMap::from([("p", p)]),
        rates: BTreeMap::from([("r", r)]),
        lagrangian_value: p - beta * r,
    })
}

/// Simultaneous uplink where the relay decodes the modular sum of the two
/// messages; received SNRs are equalized by channel inversion.
pub fn pnc_uplink_alloc<S: Scalar>(
    beta1: S,
    sample: &ChannelSample<S>,
) -> Result<ModeAllocation<S>> {
    check_multiplier("beta1", beta1)?;
    check_gain("g_1r", sample.g_1r)?;
    check_gain("g_2r", sample.g_2r)?;
    let pt = kernel::pnc_uplink_point(beta1 * log2_e::<S>(), sample.g_1r, sample.g_2r);
    Ok(ModeAllocation {
        powers: BTreeMap::from([("p11", pt.p1), ("p12", pt.p2)]),
        rates: BTreeMap::from([("r1", pt.rate)]),
        lagrangian_value: pt.p1 + pt.p2 - beta1 * pt.rate,
    })
}

/// Unicast of the longer message's excess bits to the relay: a plain
/// water-fill on `g_2r`.
pub fn pnc_mode2_alloc<S: Scalar>(
    beta2: S,
    sample: &ChannelSample<S>,
) -> Result<ModeAllocation<S>> {
    p2p_waterfill(beta2, sample.g_2r)
}

/// Power pair needed to broadcast a private stream (rate `r_private`, to
/// the receiver with gain `g_a`) superimposed with a common stream (rate
/// `r_common`, decodable by both receivers).
pub fn bc_superposition_power<S: Scalar>(
    r_private: S,
    r_common: S,
    g_a: S,
    g_b: S,
) -> Result<(S, S)> {
    check_rate("r_private", r_private)?;
    check_rate("r_common", r_common)?;
    check_gain("g_a", g_a)?;
    check_gain("g_b", g_b)?;
    let one = S::one();
    let p_private = (r_private.exp2() - one) / g_a;
    let p_common = if g_a >= g_b {
        // common decoded under private interference at the weaker receiver
        (r_common.exp2() - one) * (g_b.recip() + p_private)
    } else {
        // degraded ordering: both streams ride the private receiver's gain
        r_private.exp2() * (r_common.exp2() - one) / g_a
    };
    Ok((p_private, p_common))
}

/// Dual-optimal superposition downlink split for multipliers
/// `(beta_c, beta_p)` on the common/private streams.
pub fn bc_superposition_alloc<S: Scalar>(
    beta_c: S,
    beta_p: S,
    g_a: S,
    g_b: S,
) -> Result<ModeAllocation<S>> {
    check_multiplier("beta_c", beta_c)?;
    check_multiplier("beta_p", beta_p)?;
    check_gain("g_a", g_a)?;
    check_gain("g_b", g_b)?;
    let l2e = log2_e::<S>();
    let pt = kernel::bc_point(beta_c * l2e, beta_p * l2e, g_a, g_b);
    Ok(ModeAllocation {
        powers: BTreeMap::from([("pc", pt.p_common), ("pp", pt.p_private)]),
        rates: BTreeMap::from([("rc", pt.r_common), ("rp", pt.r_private)]),
        lagrangian_value: pt.p_common + pt.p_private - beta_c * pt.r_common - beta_p * pt.r_private,
    })
}

/// Multi-access uplink allocation; the caller labels inputs so that
/// `g_strong > g_weak` (break exact ties by nudging the weak gain one ulp
/// down). The stronger user is decoded first and sees the weak user's
/// interference; the weak user is then decoded cleanly.
pub fn mac_uplink_alloc<S: Scalar>(
    beta_strong: S,
    beta_weak: S,
    g_strong: S,
    g_weak: S,
) -> Result<ModeAllocation<S>> {
    check_multiplier("beta_strong", beta_strong)?;
    check_multiplier("beta_weak", beta_weak)?;
    check_gain("g_strong", g_strong)?;
    check_gain("g_weak", g_weak)?;
    if g_strong <= g_weak {
        return Err(Error::Contract(format!(
            "mac_uplink_alloc requires g_strong > g_weak, got {g_strong} <= {g_weak}"
        )));
    }
    let l2e = log2_e::<S>();
    let pt = kernel::mac_point(beta_strong * l2e, beta_weak * l2e, g_strong, g_weak);
    Ok(ModeAllocation {
        powers: BTreeMap::from([("ps", pt.p_strong), ("pw", pt.p_weak)]),
        rates: BTreeMap::from([("rs", pt.r_strong), ("rw", pt.r_weak)]),
        lagrangian_value: pt.p_strong + pt.p_weak
            - beta_strong * pt.r_strong
            - beta_weak * pt.r_weak,
    })
}

/// Codeword-superposition downlink: each receiver strips its own message,
/// so the two streams water-fill independently.
pub fn cw_downlink_alloc<S: Scalar>(
    beta_1: S,
    beta_2: S,
    g_r1: S,
    g_r2: S,
) -> Result<ModeAllocation<S>> {
    check_multiplier("beta_1", beta_1)?;
    check_multiplier("beta_2", beta_2)?;
    check_gain("g_r1", g_r1)?;
    check_gain("g_r2", g_r2)?;
    let l2e = log2_e::<S>();
    let (p1, r1) = kernel::wf_point(beta_1 * l2e, g_r1);
    let (p2, r2) = kernel::wf_point(beta_2 * l2e, g_r2);
    Ok(ModeAllocation {
        powers: BTreeMap::from([("p61", p1), ("p62", p2)]),
        rates: BTreeMap::from([("r61", r1), ("r62", r2)]),
        lagrangian_value: p1 + p2 - beta_1 * r1 - beta_2 * r2,
    })
}
