use thiserror::Error;

/// Errors shared by the sampling, allocation and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of its documented domain.
    #[error("invalid configuration: field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    /// An evaluation produced a non-finite value.
    #[error("non-finite value {value} in {context}")]
    NonFinite { value: f64, context: String },

    /// An operation was called outside its contract (negative rate, bad
    /// gain ordering, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A rate target could not be met with a multiplier below the bracket
    /// cap; carries the rate actually achieved at the cap.
    #[error(
        "rate target {target} unreachable within multiplier bracket {bracket_max} \
         (achieved {achieved})"
    )]
    Bracket {
        target: f64,
        achieved: f64,
        bracket_max: f64,
    },

    /// The sample-average rate moved the wrong way while its own multiplier
    /// increased; the dual bisection relies on monotonicity.
    #[error(
        "average rate decreased by {drop} while multiplier rose from {lo} to {hi} \
         (tolerance {tol})"
    )]
    Monotonicity {
        lo: f64,
        hi: f64,
        drop: f64,
        tol: f64,
    },

    /// No time split summing to one was found.
    #[error(
        "no feasible time split: closest fraction sum {closest_sum} after {iterations} iterations"
    )]
    Infeasible { closest_sum: f64, iterations: usize },

    /// Wraps a failure with the strategy that produced it.
    #[error("{strategy}: {source}")]
    Strategy {
        strategy: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn tagged(self, strategy: &'static str) -> Error {
        Error::Strategy {
            strategy,
            source: Box::new(self),
        }
    }

    pub(crate) fn non_finite<S: num_traits::ToPrimitive>(
        value: S,
        context: impl Into<String>,
    ) -> Error {
        Error::NonFinite {
            value: value.to_f64().unwrap_or(f64::NAN),
            context: context.into(),
        }
    }
}
