//! Channel-gain sampling and sample-set expectations.
//!
//! All four links of the relay network fade independently per slot. Rayleigh
//! amplitude fading makes the instantaneous power gain of each link
//! exponentially distributed around its mean, which is what the sampler
//! draws. A single `SampleSet` is generated per experiment and shared by all
//! strategies, so strategy comparisons are paired on identical channel
//! realizations and per-sample dominance carries over to the empirical
//! averages without statistical slack.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{c, Scalar};

/// How instantaneous power gains are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainDistribution {
    /// Exponentially distributed power gain (Rayleigh-amplitude channel)
    /// with the configured mean.
    RayleighPowerGain,
    /// A single deterministic sample equal to the configured means.
    Static,
}

/// Per-link mean power gains plus sampling configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingSpec<S> {
    pub mean_gain_1r: S,
    pub mean_gain_2r: S,
    pub mean_gain_r1: S,
    pub mean_gain_r2: S,
    pub n_samples: usize,
    pub seed: u64,
    pub distribution: GainDistribution,
}

impl<S: Scalar> FadingSpec<S> {
    pub fn validate(&self) -> Result<()> {
        let mean_fields: [(&'static str, S); 4] = [
            ("mean_gain_1r", self.mean_gain_1r),
            ("mean_gain_2r", self.mean_gain_2r),
            ("mean_gain_r1", self.mean_gain_r1),
            ("mean_gain_r2", self.mean_gain_r2),
        ];
        for (field, value) in mean_fields {
            if !(value.is_finite() && value > S::zero()) {
                return Err(Error::Config {
                    field,
                    reason: format!("mean gain must be finite and positive, got {value}"),
                });
            }
        }
        if self.n_samples == 0 {
            return Err(Error::Config {
                field: "n_samples",
                reason: "at least one sample is required".into(),
            });
        }
        if self.distribution == GainDistribution::Static && self.n_samples != 1 {
            return Err(Error::Config {
                field: "n_samples",
                reason: format!(
                    "static distribution requires n_samples = 1, got {}",
                    self.n_samples
                ),
            });
        }
        Ok(())
    }
}

/// One realization of the four link power gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSample<S> {
    pub g_1r: S,
    pub g_2r: S,
    pub g_r1: S,
    pub g_r2: S,
}

impl<S: Scalar> ChannelSample<S> {
    /// Swaps the roles of the two sources (uplink and downlink labels).
    pub fn mirrored(&self) -> Self {
        ChannelSample {
            g_1r: self.g_2r,
            g_2r: self.g_1r,
            g_r1: self.g_r2,
            g_r2: self.g_r1,
        }
    }
}

/// An immutable, reproducible sequence of channel samples.
#[derive(Debug, Clone)]
pub struct SampleSet<S> {
    spec: FadingSpec<S>,
    samples: Vec<ChannelSample<S>>,
}

impl<S: Scalar> SampleSet<S> {
    pub fn spec(&self) -> &FadingSpec<S> {
        &self.spec
    }

    pub fn samples(&self) -> &[ChannelSample<S>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The same realizations with source roles exchanged. Solving a swapped
    /// rate pair on the mirrored set is exactly the original problem.
    pub fn mirrored(&self) -> SampleSet<S> {
        let spec = FadingSpec {
            mean_gain_1r: self.spec.mean_gain_2r,
            mean_gain_2r: self.spec.mean_gain_1r,
            mean_gain_r1: self.spec.mean_gain_r2,
            mean_gain_r2: self.spec.mean_gain_r1,
            ..self.spec.clone()
        };
        SampleSet {
            spec,
            samples: self.samples.iter().map(ChannelSample::mirrored).collect(),
        }
    }
}

/// Draws an exponential variate with the given mean, resampling the rare
/// underflow to zero so gains stay strictly positive.
fn draw_exponential<S: Scalar, R: Rng>(rng: &mut R, mean: S) -> S {
    loop {
        let u: f64 = rng.gen();
        let g = mean * c::<S>(-(1.0 - u).ln());
        if g > S::zero() && g.is_finite() {
            return g;
        }
    }
}

/// Generates the sample set for a spec. Deterministic in the seed: the same
/// spec always yields a bitwise-identical sequence.
pub fn sample_channels<S: Scalar>(spec: &FadingSpec<S>) -> Result<SampleSet<S>> {
    spec.validate()?;
    let samples = match spec.distribution {
        GainDistribution::Static => vec![ChannelSample {
            g_1r: spec.mean_gain_1r,
            g_2r: spec.mean_gain_2r,
            g_r1: spec.mean_gain_r1,
            g_r2: spec.mean_gain_r2,
        }],
        GainDistribution::RayleighPowerGain => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut samples = Vec::with_capacity(spec.n_samples);
            for _ in 0..spec.n_samples {
                samples.push(ChannelSample {
                    g_1r: draw_exponential(&mut rng, spec.mean_gain_1r),
                    g_2r: draw_exponential(&mut rng, spec.mean_gain_2r),
                    g_r1: draw_exponential(&mut rng, spec.mean_gain_r1),
                    g_r2: draw_exponential(&mut rng, spec.mean_gain_r2),
                });
            }
            samples
        }
    };
    let set = SampleSet {
        spec: spec.clone(),
        samples,
    };
    check_empirical_means(&set)?;
    Ok(set)
}

/// Sanity bound on the sampler: each empirical mean must sit within
/// 5/sqrt(n) relative error of its configured mean (a ~5-sigma band for the
/// exponential distribution).
fn check_empirical_means<S: Scalar>(set: &SampleSet<S>) -> Result<()> {
    if set.spec.distribution == GainDistribution::Static {
        return Ok(());
    }
    let n = set.len();
    let bound = 5.0 / (n as f64).sqrt();
    let empirical = |f: fn(&ChannelSample<S>) -> S| {
        pairwise_sum(&set.samples.iter().map(f).collect::<Vec<_>>()) / c::<S>(n as f64)
    };
    let checks: [(&'static str, S, S); 4] = [
        ("mean_gain_1r", set.spec.mean_gain_1r, empirical(|s| s.g_1r)),
        ("mean_gain_2r", set.spec.mean_gain_2r, empirical(|s| s.g_2r)),
        ("mean_gain_r1", set.spec.mean_gain_r1, empirical(|s| s.g_r1)),
        ("mean_gain_r2", set.spec.mean_gain_r2, empirical(|s| s.g_r2)),
    ];
    for (field, target, got) in checks {
        let rel = ((got - target) / target).abs();
        if rel > c(bound) {
            return Err(Error::Config {
                field,
                reason: format!(
                    "empirical mean {got} deviates from {target} by relative {rel} \
                     (> {bound}); suspicious sampler output"
                ),
            });
        }
    }
    Ok(())
}

/// Fixed-shape pairwise sum with a compensated base case. The reduction tree
/// depends only on the slice length, so any evaluation schedule that fills
/// the same slots produces identical bits.
fn pairwise_sum<S: Scalar>(values: &[S]) -> S {
    const BASE: usize = 32;
    fn kahan<S: Scalar>(values: &[S]) -> S {
        let mut sum = S::zero();
        let mut comp = S::zero();
        for &v in values {
            let y = v - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }
    fn rec<S: Scalar>(values: &[S]) -> S {
        if values.len() <= BASE {
            kahan(values)
        } else {
            let mid = values.len() / 2;
            rec(&values[..mid]) + rec(&values[mid..])
        }
    }
    rec(values)
}

/// Arithmetic mean of `f` over the set.
///
/// The per-sample values are sorted before the fixed pairwise reduction, so
/// the result is bitwise identical for any permutation of the same samples
/// and any parallel chunking of the evaluation. A non-finite value aborts
/// with the offending sample.
pub fn expect<S: Scalar, F>(set: &SampleSet<S>, f: F) -> Result<S>
where
    F: Fn(&ChannelSample<S>) -> S,
{
    let mut values = Vec::with_capacity(set.len());
    for (index, sample) in set.samples.iter().enumerate() {
        let v = f(sample);
        if !v.is_finite() {
            return Err(Error::non_finite(v, format!("sample {index}: {sample:?}")));
        }
        values.push(v);
    }
    values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values"));
    Ok(pairwise_sum(&values) / c::<S>(set.len() as f64))
}
