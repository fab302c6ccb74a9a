//! Library half of the experiment runner: configuration parsing, the sweep
//! loop and the verification suite. The binary is a thin argument parser on
//! top so that integration tests can drive everything in-process.

pub mod config;

use std::fmt::Write as _;

use twrn_core::fading::{sample_channels, SampleSet};
use twrn_core::oracle::{self, PointwiseAllocatorId};
use twrn_core::solvers::{self, RateRequirement, StrategySolution};

pub use config::{ConfigError, RunConfig, StrategyChoice};

pub const CSV_HEADER: &str =
    "strategy,lambda1,lambda2,total_energy,f1,f2,f3,f5,f6,gamma,iterations,converged";

/// One output row of a sweep.
#[derive(Debug, Clone)]
pub struct Row {
    pub strategy: String,
    pub lambda1: f64,
    pub lambda2: f64,
    pub solution: Option<StrategySolution<f64>>,
}

impl Row {
    pub fn converged(&self) -> bool {
        self.solution.as_ref().is_some_and(|s| s.converged)
    }

    pub fn to_csv(&self) -> String {
        let mut line = String::new();
        write!(line, "{},{},{}", self.strategy, self.lambda1, self.lambda2).unwrap();
        match &self.solution {
            Some(s) => {
                write!(line, ",{}", s.total_energy).unwrap();
                for mode in ["1", "2", "3", "5", "6"] {
                    write!(line, ",{}", s.fraction(mode)).unwrap();
                }
                write!(line, ",{},{},{}", s.gamma, s.iterations, s.converged).unwrap();
            }
            None => line.push_str(",0,0,0,0,0,0,0,0,false"),
        }
        line
    }
}

/// Result of a full sweep: rows in config order plus the rendered file
/// contents (byte-deterministic for a given config).
#[derive(Debug)]
pub struct SweepOutput {
    pub rows: Vec<Row>,
    pub all_converged: bool,
}

impl SweepOutput {
    pub fn render(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.to_csv());
            out.push('\n');
        }
        out
    }
}

fn solve_choice(
    choice: StrategyChoice,
    req: &RateRequirement<f64>,
    samples: &SampleSet<f64>,
    solver: &twrn_core::solvers::SolverConfig<f64>,
) -> Result<StrategySolution<f64>, twrn_core::Error> {
    match choice {
        StrategyChoice::Fixed(s) => solvers::solve(s, req, samples, solver),
        StrategyChoice::Popt => solvers::select_optimal(req, samples, solver).map(|(w, _)| w),
    }
}

/// Runs every (strategy, rate-pair) combination of the config on one shared
/// sample set. Rows are emitted in config order: strategies vary fastest.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepOutput, twrn_core::Error> {
    cfg.fading.validate()?;
    cfg.solver.validate()?;
    let samples = sample_channels(&cfg.fading)?;
    let mut rows = Vec::with_capacity(cfg.sweep.len() * cfg.strategies.len());
    let mut all_converged = true;
    for &(lambda1, lambda2) in &cfg.sweep {
        let req = RateRequirement::new(lambda1, lambda2)?;
        for &choice in &cfg.strategies {
            let solution = match solve_choice(choice, &req, &samples, &cfg.solver) {
                Ok(s) => Some(s),
                Err(e) => {
                    eprintln!("warning: {} at ({lambda1}, {lambda2}): {e}", choice.id());
                    all_converged = false;
                    None
                }
            };
            rows.push(Row {
                strategy: choice.id().to_string(),
                lambda1,
                lambda2,
                solution,
            });
        }
    }
    Ok(SweepOutput {
        rows,
        all_converged,
    })
}

/// Solves a single (strategy, rate pair) and renders header plus one row.
pub fn run_solve(
    cfg: &RunConfig,
    choice: StrategyChoice,
    lambda1: f64,
    lambda2: f64,
) -> Result<(Row, String), twrn_core::Error> {
    cfg.fading.validate()?;
    cfg.solver.validate()?;
    let samples = sample_channels(&cfg.fading)?;
    let req = RateRequirement::new(lambda1, lambda2)?;
    let solution = solve_choice(choice, &req, &samples, &cfg.solver)?;
    let row = Row {
        strategy: choice.id().to_string(),
        lambda1,
        lambda2,
        solution: Some(solution),
    };
    let text = format!("{CSV_HEADER}\n{}\n", row.to_csv());
    Ok((row, text))
}

/// Trial counts for the verification suites; the defaults are the accepted
/// minimums.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    pub dominance_trials: usize,
    pub oracle_trials: usize,
    pub grid_points: usize,
    pub static_points: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 20_240_809,
            dominance_trials: 100_000,
            oracle_trials: 1_000,
            grid_points: 200,
            static_points: 200,
        }
    }
}

impl VerifyOptions {
    /// Counts below the defaults are rejected; the suite is only meaningful
    /// at full strength.
    pub fn validate(&self) -> Result<(), String> {
        let d = VerifyOptions::default();
        if self.dominance_trials < d.dominance_trials {
            return Err(format!(
                "dominance trials {} below the required minimum {}",
                self.dominance_trials, d.dominance_trials
            ));
        }
        if self.oracle_trials < d.oracle_trials {
            return Err(format!(
                "oracle trials {} below the required minimum {}",
                self.oracle_trials, d.oracle_trials
            ));
        }
        if self.grid_points < 50 || self.static_points < 50 {
            return Err("grid resolutions below 50 points per axis are not accepted".into());
        }
        Ok(())
    }
}

/// Runs all oracle suites and renders one report line per check.
pub fn run_verify(opts: &VerifyOptions) -> Result<(String, bool), twrn_core::Error> {
    let mut reports = Vec::new();
    reports.push(oracle::timeshare_dominance_sweep(
        opts.dominance_trials,
        opts.seed,
    )?);
    reports.push(oracle::codeword_dominance_sweep(
        opts.dominance_trials,
        opts.seed ^ 0x9e37_79b9,
    )?);
    for (i, id) in PointwiseAllocatorId::ALL.into_iter().enumerate() {
        reports.push(oracle::allocator_oracle_sweep(
            id,
            opts.oracle_trials,
            opts.grid_points,
            1e-3,
            opts.seed.wrapping_add(1 + i as u64),
        )?);
    }
    reports.extend(oracle::static_matrix_check(opts.static_points, 0.01)?);
    let mut out = String::new();
    let mut all_passed = true;
    for r in &reports {
        all_passed &= r.passed();
        writeln!(
            out,
            "{} {}: trials={} failures={} worst_slack={:.3e}",
            if r.passed() { "PASS" } else { "FAIL" },
            r.name,
            r.trials,
            r.failures,
            r.worst_slack
        )
        .unwrap();
    }
    Ok((out, all_passed))
}
