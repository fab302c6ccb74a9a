//! Behavioral tests of the mode-level dual solves and the strategy solvers.

mod common;

use twrn_core::alloc::{bc_superposition_alloc, mac_uplink_alloc};
use twrn_core::error::Error;
use twrn_core::fading::{expect, sample_channels, FadingSpec, GainDistribution, SampleSet};
use twrn_core::oracle::{static_strategy_grid, GridSpec};
use twrn_core::solvers::{
    self, mode_dual_solve, select_optimal, LinkGain, ModeAllocatorId, RateRequirement,
    SolverConfig, Strategy,
};

use common::verify_kkt;

fn static_set(means: (f64, f64, f64, f64)) -> SampleSet<f64> {
    sample_channels(&FadingSpec {
        mean_gain_1r: means.0,
        mean_gain_2r: means.1,
        mean_gain_r1: means.2,
        mean_gain_r2: means.3,
        n_samples: 1,
        seed: 0,
        distribution: GainDistribution::Static,
    })
    .unwrap()
}

fn fading_set(means: (f64, f64, f64, f64), n: usize, seed: u64) -> SampleSet<f64> {
    sample_channels(&FadingSpec {
        mean_gain_1r: means.0,
        mean_gain_2r: means.1,
        mean_gain_r1: means.2,
        mean_gain_r2: means.3,
        n_samples: n,
        seed,
        distribution: GainDistribution::RayleighPowerGain,
    })
    .unwrap()
}

fn cfg() -> SolverConfig<f64> {
    SolverConfig::default()
}

#[test]
fn mode_dual_zero_targets_are_free() {
    let set = fading_set((1.0, 1.0, 1.0, 1.0), 500, 3);
    for (mode, targets) in [
        (ModeAllocatorId::P2p(LinkGain::Gr1), vec![0.0]),
        (ModeAllocatorId::PncUplink, vec![0.0]),
        (ModeAllocatorId::MacUplink, vec![0.0, 0.0]),
        (ModeAllocatorId::BcDownlink, vec![0.0, 0.0]),
        (ModeAllocatorId::CwDownlink, vec![0.0, 0.0]),
    ] {
        let sol = mode_dual_solve(mode, &targets, &set, &cfg()).unwrap();
        assert_eq!(sol.avg_power, 0.0);
        for &beta in sol.multipliers.values.values() {
            assert_eq!(beta, 0.0);
        }
        for &r in &sol.avg_rates {
            assert_eq!(r, 0.0);
        }
    }
}

#[test]
fn mode_dual_static_waterfill_inversion() {
    // one unit-gain sample, rate target 1: water level 2, power 1
    let set = static_set((1.0, 1.0, 1.0, 1.0));
    let sol = mode_dual_solve(ModeAllocatorId::P2p(LinkGain::Gr1), &[1.0], &set, &cfg()).unwrap();
    let beta = sol.multipliers.get("beta1").unwrap();
    assert!(
        (beta * std::f64::consts::LOG2_E - 2.0).abs() < 1e-5,
        "level {beta}"
    );
    assert!((sol.avg_power - 1.0).abs() < 1e-5);
    assert!((sol.avg_rates[0] - 1.0).abs() < 1e-6);
}

#[test]
fn mode_dual_static_mac_matches_multiplier_grid() {
    // brute-force the multiplier plane for the static two-user uplink and
    // compare against the bisection result
    let set = static_set((2.0, 1.0, 1.0, 1.0));
    let targets = [0.5, 0.5];
    let sol = mode_dual_solve(ModeAllocatorId::MacUplink, &targets, &set, &cfg()).unwrap();

    let rates_at = |b1: f64, b2: f64| {
        // user 1 is the strong user (gain 2 vs 1)
        let a = mac_uplink_alloc(b1, b2, 2.0, 1.0).unwrap();
        (a.rate("rs"), a.rate("rw"))
    };
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let n = 400;
    for i in 0..n {
        for j in 0..n {
            let b1 = 3.0 * i as f64 / (n - 1) as f64;
            let b2 = 3.0 * j as f64 / (n - 1) as f64;
            let (r1, r2) = rates_at(b1, b2);
            let miss = (r1 - targets[0]).abs() + (r2 - targets[1]).abs();
            if miss < best.0 {
                best = (miss, b1, b2);
            }
        }
    }
    let b1 = sol.multipliers.get("beta1").unwrap();
    let b2 = sol.multipliers.get("beta2").unwrap();
    assert!(
        (b1 - best.1).abs() < 1e-2 && (b2 - best.2).abs() < 1e-2,
        "bisected ({b1}, {b2}) vs grid ({}, {})",
        best.1,
        best.2
    );
    // and the targets themselves are met tightly
    assert!((sol.avg_rates[0] - 0.5).abs() < 1e-6);
    assert!((sol.avg_rates[1] - 0.5).abs() < 1e-6);
}

#[test]
fn mode_dual_reports_unreachable_bracket() {
    let set = static_set((1.0, 1.0, 1.0, 1.0));
    // water level capped at bracket_max=1e6 gives rate ~ log2(1e6) ~ 20
    let err =
        mode_dual_solve(ModeAllocatorId::P2p(LinkGain::Gr1), &[25.0], &set, &cfg()).unwrap_err();
    match err {
        Error::Bracket {
            target, achieved, ..
        } => {
            assert_eq!(target, 25.0);
            assert!(achieved < 25.0 && achieved > 15.0, "achieved {achieved}");
        }
        other => panic!("expected bracket error, got {other}"),
    }
}

#[test]
fn mode_dual_rates_match_public_allocators() {
    // the solver's fused evaluation paths must agree with the per-sample
    // closed-form allocators
    let set = fading_set((1.0, 1.0, 1.0, 2.0), 3000, 17);
    let cfg = cfg();

    let sol = mode_dual_solve(ModeAllocatorId::BcDownlink, &[0.4, 0.25], &set, &cfg).unwrap();
    let bc = sol.multipliers.get("beta1").unwrap();
    let bp = sol.multipliers.get("beta2").unwrap();
    let rc = expect(&set, |s| {
        bc_superposition_alloc(bc, bp, s.g_r1, s.g_r2)
            .unwrap()
            .rate("rc")
    })
    .unwrap();
    let rp = expect(&set, |s| {
        bc_superposition_alloc(bc, bp, s.g_r1, s.g_r2)
            .unwrap()
            .rate("rp")
    })
    .unwrap();
    let power = expect(&set, |s| {
        bc_superposition_alloc(bc, bp, s.g_r1, s.g_r2)
            .unwrap()
            .total_power()
    })
    .unwrap();
    assert!(
        (rc - sol.avg_rates[0]).abs() < 1e-9,
        "{rc} vs {}",
        sol.avg_rates[0]
    );
    assert!((rp - sol.avg_rates[1]).abs() < 1e-9);
    assert!((power - sol.avg_power).abs() < 1e-9 * power.max(1.0));

    let sol = mode_dual_solve(ModeAllocatorId::MacUplink, &[0.3, 0.5], &set, &cfg).unwrap();
    let b1 = sol.multipliers.get("beta1").unwrap();
    let b2 = sol.multipliers.get("beta2").unwrap();
    let r1 = expect(&set, |s| {
        let (bs, bw, gs, gw, user1_strong) = if s.g_1r > s.g_2r {
            (b1, b2, s.g_1r, s.g_2r, true)
        } else {
            (b2, b1, s.g_2r, s.g_1r, false)
        };
        let a = mac_uplink_alloc(bs, bw, gs, gw).unwrap();
        if user1_strong {
            a.rate("rs")
        } else {
            a.rate("rw")
        }
    })
    .unwrap();
    assert!(
        (r1 - sol.avg_rates[0]).abs() < 1e-9,
        "{r1} vs {}",
        sol.avg_rates[0]
    );
}

#[test]
fn pnc_sup_symmetric_traffic_drops_mode2_and_private_stream() {
    let set = fading_set((1.0, 1.0, 1.0, 2.0), 4000, 5);
    let req = RateRequirement::new(0.5, 0.5).unwrap();
    let sol = solvers::solve_pnc_sup(&req, &set, &cfg()).unwrap();
    assert_eq!(sol.fraction("2"), 0.0);
    assert_eq!(sol.multipliers.get("beta2").unwrap(), 0.0);
    assert_eq!(sol.avg_power("2"), 0.0);
    assert_eq!(sol.avg_rate("r3p"), 0.0);
    verify_kkt(&sol, 0.5, 0.5, &cfg());
}

#[test]
fn pnc_sup_matches_static_grid() {
    let set = static_set((1.0, 1.0, 1.0, 1.0));
    let req = RateRequirement::new(0.5, 0.5).unwrap();
    let sol = solvers::solve_pnc_sup(&req, &set, &cfg()).unwrap();
    let grid = GridSpec::new(300, vec![]).unwrap();
    let oracle = static_strategy_grid(Strategy::PncSup, &req, &set.samples()[0], &grid).unwrap();
    let rel = (sol.total_energy - oracle.energy).abs() / oracle.energy;
    assert!(
        rel < 0.01,
        "solver {} vs grid {}",
        sol.total_energy,
        oracle.energy
    );
}

#[test]
fn pnc_zp_depends_only_on_max_rate() {
    let set = fading_set((1.0, 1.0, 1.0, 1.0), 4000, 9);
    let a = solvers::solve_pnc_zp(&RateRequirement::new(0.2, 1.0).unwrap(), &set, &cfg()).unwrap();
    let b = solvers::solve_pnc_zp(&RateRequirement::new(0.8, 1.0).unwrap(), &set, &cfg()).unwrap();
    assert_eq!(a.total_energy, b.total_energy);
    verify_kkt(&a, 0.2, 1.0, &cfg());
}

#[test]
fn pnc_zp_equals_pnc_sup_for_symmetric_traffic() {
    let set = fading_set((1.0, 1.0, 1.0, 2.0), 4000, 5);
    let req = RateRequirement::new(0.7, 0.7).unwrap();
    let zp = solvers::solve_pnc_zp(&req, &set, &cfg()).unwrap();
    let sup = solvers::solve_pnc_sup(&req, &set, &cfg()).unwrap();
    assert!(
        (zp.total_energy - sup.total_energy).abs() < 2.0 * cfg().eps_outer,
        "zp {} vs sup {}",
        zp.total_energy,
        sup.total_energy
    );
}

#[test]
fn pnc_zp_never_beats_pnc_sup() {
    let set = fading_set((1.0, 1.0, 1.0, 1.0), 4000, 21);
    for (l1, l2) in [(0.2, 1.0), (0.5, 1.0), (0.3, 0.4)] {
        let req = RateRequirement::new(l1, l2).unwrap();
        let zp = solvers::solve_pnc_zp(&req, &set, &cfg()).unwrap();
        let sup = solvers::solve_pnc_sup(&req, &set, &cfg()).unwrap();
        assert!(
            zp.total_energy >= sup.total_energy - 2.0 * cfg().eps_outer,
            "({l1},{l2}): zp {} < sup {}",
            zp.total_energy,
            sup.total_energy
        );
    }
}

#[test]
fn dnc_ts_symmetric_traffic_coincides_with_dnc_sup() {
    let set = fading_set((1.0, 1.0, 1.0, 2.0), 4000, 5);
    let req = RateRequirement::new(0.6, 0.6).unwrap();
    let ts = solvers::solve_dnc_ts(&req, &set, &cfg()).unwrap();
    let sup = solvers::solve_dnc_sup(&req, &set, &cfg()).unwrap();
    assert_eq!(ts.fraction("3"), 0.0);
    assert!(
        (ts.total_energy - sup.total_energy).abs() < 2.0 * cfg().eps_outer,
        "ts {} vs sup {}",
        ts.total_energy,
        sup.total_energy
    );
    verify_kkt(&ts, 0.6, 0.6, &cfg());
    verify_kkt(&sup, 0.6, 0.6, &cfg());
}

#[test]
fn dnc_sup_dominates_ts_and_cw_on_shared_samples() {
    let set = fading_set((1.0, 1.0, 1.0, 1.0), 4000, 33);
    for (l1, l2) in [(0.2, 0.8), (0.5, 1.0), (0.4, 0.5)] {
        let req = RateRequirement::new(l1, l2).unwrap();
        let sup = solvers::solve_dnc_sup(&req, &set, &cfg()).unwrap();
        let ts = solvers::solve_dnc_ts(&req, &set, &cfg()).unwrap();
        let cw = solvers::solve_cw_sup(&req, &set, &cfg()).unwrap();
        let slack = 2.0 * cfg().eps_outer * sup.total_energy.max(1.0);
        assert!(
            sup.total_energy <= ts.total_energy + slack,
            "({l1},{l2}) vs ts"
        );
        assert!(
            sup.total_energy <= cw.total_energy + slack,
            "({l1},{l2}) vs cw"
        );
        verify_kkt(&sup, l1, l2, &cfg());
        verify_kkt(&ts, l1, l2, &cfg());
        verify_kkt(&cw, l1, l2, &cfg());
    }
}

#[test]
fn dnc_sup_symmetric_traffic_degenerates_private_stream() {
    let set = fading_set((1.0, 1.0, 1.0, 2.0), 4000, 5);
    let req = RateRequirement::new(0.5, 0.5).unwrap();
    let sol = solvers::solve_dnc_sup(&req, &set, &cfg()).unwrap();
    assert_eq!(sol.avg_rate("r51"), 0.0);
    assert_eq!(sol.multipliers.get("beta51").unwrap(), 0.0);
    verify_kkt(&sol, 0.5, 0.5, &cfg());
}

#[test]
fn dnc_sup_matches_static_grid_in_both_gain_orderings() {
    for means in [(1.0, 1.0, 1.0, 2.0), (1.0, 1.0, 2.0, 1.0)] {
        let set = static_set(means);
        let req = RateRequirement::new(0.3, 0.6).unwrap();
        let sol = solvers::solve_dnc_sup(&req, &set, &cfg()).unwrap();
        let grid = GridSpec::new(300, vec![]).unwrap();
        let oracle =
            static_strategy_grid(Strategy::DncSup, &req, &set.samples()[0], &grid).unwrap();
        let rel = (sol.total_energy - oracle.energy).abs() / oracle.energy;
        assert!(
            rel < 0.01,
            "means {means:?}: solver {} vs grid {}",
            sol.total_energy,
            oracle.energy
        );
        verify_kkt(&sol, 0.3, 0.6, &cfg());
    }
}

#[test]
fn cw_sup_one_way_traffic_shuts_reverse_streams() {
    let set = fading_set((1.0, 1.0, 1.0, 1.0), 4000, 41);
    let req = RateRequirement::new(0.0, 0.5).unwrap();
    let sol = solvers::solve_cw_sup(&req, &set, &cfg()).unwrap();
    assert_eq!(sol.avg_rate("r62"), 0.0);
    assert_eq!(sol.multipliers.get("beta62").unwrap(), 0.0);
    assert_eq!(sol.avg_rate("r11"), 0.0);
    verify_kkt(&sol, 0.0, 0.5, &cfg());
}

#[test]
fn selector_picks_dnc_at_low_rates_and_pnc_at_high_rates() {
    let set = fading_set((1.0, 1.0, 1.0, 2.0), 20_000, 61);
    let cfg = cfg();

    let (winner, table) =
        select_optimal(&RateRequirement::new(0.4, 0.4).unwrap(), &set, &cfg).unwrap();
    assert_eq!(winner.strategy, Strategy::DncSup);
    assert!(table.dnc_sup_energy <= table.pnc_sup_energy);

    let (winner, table) =
        select_optimal(&RateRequirement::new(1.6, 1.6).unwrap(), &set, &cfg).unwrap();
    assert_eq!(winner.strategy, Strategy::PncSup);
    assert!(table.pnc_sup_energy <= table.dnc_sup_energy);

    let (winner, _) = select_optimal(&RateRequirement::new(0.0, 0.5).unwrap(), &set, &cfg).unwrap();
    assert_eq!(winner.strategy, Strategy::DncSup);
}

#[test]
fn swap_symmetry_through_mirrored_samples() {
    let set = fading_set((1.0, 1.5, 0.8, 2.0), 3000, 77);
    let cfg = cfg();
    for strategy in Strategy::ALL {
        let fwd = solvers::solve(
            strategy,
            &RateRequirement::new(0.9, 0.4).unwrap(),
            &set,
            &cfg,
        )
        .unwrap();
        assert!(fwd.swapped);
        let mirrored = set.mirrored();
        let rev = solvers::solve(
            strategy,
            &RateRequirement::new(0.4, 0.9).unwrap(),
            &mirrored,
            &cfg,
        )
        .unwrap();
        assert!(!rev.swapped);
        assert!(
            (fwd.total_energy - rev.total_energy).abs() <= 2.0 * cfg.eps_outer,
            "{strategy}: {} vs {}",
            fwd.total_energy,
            rev.total_energy
        );
    }
}

#[test]
fn energy_is_monotone_in_the_rate_pair() {
    let set = fading_set((1.0, 1.0, 1.0, 1.0), 2000, 13);
    let cfg = cfg();
    for strategy in [Strategy::PncSup, Strategy::DncSup, Strategy::CwSup] {
        let mut prev = 0.0;
        for l2 in [0.4, 0.6, 0.8, 1.0] {
            let sol = solvers::solve(
                strategy,
                &RateRequirement::new(0.3, l2).unwrap(),
                &set,
                &cfg,
            )
            .unwrap();
            assert!(
                sol.total_energy >= prev - 4.0 * cfg.eps_outer,
                "{strategy}: energy fell from {prev} to {} at l2={l2}",
                sol.total_energy
            );
            prev = sol.total_energy;
        }
        let low = solvers::solve(
            strategy,
            &RateRequirement::new(0.2, 1.0).unwrap(),
            &set,
            &cfg,
        )
        .unwrap();
        let high = solvers::solve(
            strategy,
            &RateRequirement::new(0.6, 1.0).unwrap(),
            &set,
            &cfg,
        )
        .unwrap();
        assert!(high.total_energy >= low.total_energy - 4.0 * cfg.eps_outer);
    }
}

#[test]
fn rejects_invalid_requirements_and_configs() {
    let set = static_set((1.0, 1.0, 1.0, 1.0));
    assert!(RateRequirement::new(0.0, 0.0).is_err());
    assert!(RateRequirement::new(-0.1, 0.5).is_err());
    let req = RateRequirement::new(0.3, 0.5).unwrap();
    let mut bad = cfg();
    bad.eps_inner = bad.eps_outer;
    assert!(solvers::solve(Strategy::DncSup, &req, &set, &bad).is_err());
}
