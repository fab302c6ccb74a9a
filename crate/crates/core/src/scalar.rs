//! Scalar abstraction so the whole suite runs on `f32` or `f64`.
//!
//! Every formula in this crate is plain floating-point arithmetic, so the
//! solvers are written once against this trait. `f64` is the default used by
//! the CLI and the acceptance tolerances; `f32` remains available for quick,
//! lower-precision experiments.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

pub trait Scalar: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Largest value strictly below `self`. Used to break exact gain ties
    /// deterministically.
    fn next_below(self) -> Self;
}

impl Scalar for f32 {
    fn next_below(self) -> f32 {
        if self.is_nan() || self == f32::NEG_INFINITY {
            return self;
        }
        if self == 0.0 {
            return -f32::from_bits(1);
        }
        let bits = self.to_bits();
        f32::from_bits(if self > 0.0 { bits - 1 } else { bits + 1 })
    }
}

impl Scalar for f64 {
    fn next_below(self) -> f64 {
        if self.is_nan() || self == f64::NEG_INFINITY {
            return self;
        }
        if self == 0.0 {
            return -f64::from_bits(1);
        }
        let bits = self.to_bits();
        f64::from_bits(if self > 0.0 { bits - 1 } else { bits + 1 })
    }
}

/// Shorthand for lifting an `f64` constant into the working scalar type.
#[inline]
pub fn c<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("constant representable in scalar type")
}

/// log2(e), the factor between a rate multiplier and its water level.
#[inline]
pub fn log2_e<S: Scalar>() -> S {
    c(std::f64::consts::LOG2_E)
}

/// ln(2); `beta = water_level * ln2` for raw multipliers.
#[inline]
pub fn ln_2<S: Scalar>() -> S {
    c(std::f64::consts::LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn next_below_steps_one_ulp() {
        let x = 1.0f64;
        let y = x.next_below();
        assert!(y < x);
        assert_eq!(f64::from_bits(x.to_bits() - 1), y);

        let x = 2.5f32;
        assert!(x.next_below() < x);
    }

    #[test]
    fn water_level_roundtrip() {
        let beta = 1.7f64;
        let level = beta * log2_e::<f64>();
        assert!((level * ln_2::<f64>() - beta).abs() < 1e-15);
    }
}
