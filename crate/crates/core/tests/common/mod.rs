//! Shared verification helpers for solver integration tests.

use twrn_core::solvers::{validate_solution, RateRequirement, SolverConfig, StrategySolution};

/// Panics with the violation description if the solution's certificates do
/// not hold.
pub fn verify_kkt(
    sol: &StrategySolution<f64>,
    lambda1: f64,
    lambda2: f64,
    cfg: &SolverConfig<f64>,
) {
    let req = RateRequirement::new(lambda1, lambda2).unwrap();
    if let Err(e) = validate_solution(sol, &req, cfg) {
        panic!("certificate violation: {e}");
    }
}
