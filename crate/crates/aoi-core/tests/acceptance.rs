//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them all).
//!
//! The long-horizon criteria pin M = 500 and K = 1e6 where stated; the
//! preset-wide bound check runs every preset at a reduced desk scale with
//! a burn-in so the fresh-start transient does not sit below the bounds.

mod common;

use std::f64::consts::E;

use aoi_core::harness::{records_to_csv, run_experiment, ExperimentConfig, LoadMode};
use aoi_core::policy::{AlohaState, Policy, PolicyKind};
use aoi_core::presets::{run_preset, PresetName, PresetScale};
use aoi_core::rng::SimRng;
use aoi_core::sim::run_simulation;
use aoi_core::thinning::{
    fixed_threshold, generalized_threshold, propagate_arrival_distribution,
    stationary_fixed_point, AgeGainDistribution,
};
use common::{mean, propagate_oracle, stderr};

fn report(criterion: &str, pass: bool, detail: &str) {
    println!("criterion {criterion}: {} — {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn config(policy: PolicyKind, sources: usize, theta: f64, horizon: u64, seed: u64, reps: u32) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(policy, sources, theta, horizon);
    c.seed = seed;
    c.replications = reps;
    c
}

fn naaois(c: &ExperimentConfig) -> Vec<f64> {
    run_experiment(c).unwrap().iter().map(|r| r.naaoi).collect()
}

#[test]
fn criterion_01_closed_form_thresholds() {
    let mut pass = fixed_threshold(500, 1.0) == 1359 && fixed_threshold(10, 0.01) == 1;
    let mut mismatches = 0usize;
    for m in [1usize, 2, 5, 10, 20, 50, 100, 200, 500, 1000] {
        for theta in [0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0] {
            if generalized_threshold(m, theta, 1.0 / E).unwrap() != fixed_threshold(m, theta) {
                mismatches += 1;
            }
        }
    }
    pass &= mismatches == 0;
    report(
        "01 closed-form thresholds",
        pass,
        &format!(
            "fixed(500,1)={}, fixed(10,0.01)={}, grid mismatches={mismatches}/100",
            fixed_threshold(500, 1.0),
            fixed_threshold(10, 0.01)
        ),
    );
}

#[test]
fn criterion_02_stationary_fixed_point_closed_forms() {
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for &m in &[50usize, 100, 500] {
        for &theta in &[0.1f64, 0.5, 1.0] {
            let tstar = fixed_threshold(m, theta) as usize;
            let n = 4 * (E * m as f64).ceil() as usize;
            let (ell, a) = stationary_fixed_point(m, theta, n, 1e-10).unwrap();
            let em = E * m as f64;
            let mut err = (ell.ell[0] - 1.0 / (em * theta)).abs();
            for j in 1..tstar {
                err = err.max((ell.ell[j] - 1.0 / em).abs());
            }
            for j in 1..=tstar {
                err = err.max((a.a[j] - theta / em).abs());
            }
            err = err.max((a.total_mass() - theta).abs());
            worst = worst.max(err);
            detail = format!("last (M={m}, theta={theta}) err={err:.2e}");
        }
    }
    report(
        "02 stationary fixed point",
        worst < 1e-6,
        &format!("worst entrywise error {worst:.2e} over 9 grid points ({detail})"),
    );
}

#[test]
fn criterion_03_stabilized_aloha_low_rate() {
    let theta = 0.00049051;
    let c = config(PolicyKind::Aloha, 500, theta, 1_000_000, 0xA03, 5);
    let m = mean(&naaois(&c));
    let pass = (m - 4.08).abs() <= 0.2;
    report(
        "03 stabilized ALOHA low-rate",
        pass,
        &format!("mean NAAoI {m:.4} vs 4.08 +- 0.2 (1/(M*theta) = {:.4})", 1.0 / (500.0 * theta)),
    );
}

#[test]
fn criterion_04_aloha_plateau() {
    let mut pass = true;
    let mut details = Vec::new();
    for theta in [0.05, 0.5, 1.0] {
        let mut c = config(PolicyKind::Aloha, 500, theta, 1_000_000, 0xA04, 3);
        c.load_mode = LoadMode::Clamped;
        let m = mean(&naaois(&c));
        pass &= (m - E).abs() <= 0.05;
        details.push(format!("theta={theta}: {m:.4}"));
    }
    report(
        "04 ALOHA plateau at e",
        pass,
        &format!("{} vs e = {E:.4} +- 0.05", details.join(", ")),
    );
}

#[test]
fn criterion_05_sat_near_e_over_2() {
    let m500 = mean(&naaois(&config(PolicyKind::Sat, 500, 1.0, 1_000_000, 0xA05, 5)));
    let m100 = mean(&naaois(&config(PolicyKind::Sat, 100, 1.0, 1_000_000, 0xA05, 3)));
    let m50 = mean(&naaois(&config(PolicyKind::Sat, 50, 1.0, 1_000_000, 0xA05, 3)));
    let pass = (1.31..=1.41).contains(&m500)
        && (m100 - 1.37).abs() <= 0.07
        && (m50 - 1.36).abs() <= 0.08;
    report(
        "05 SAT near e/2",
        pass,
        &format!("M=500: {m500:.4} in [1.31,1.41]; M=100: {m100:.4} vs 1.37+-0.07; M=50: {m50:.4} vs 1.36+-0.08"),
    );
}

#[test]
fn criterion_06_aat_beats_sat() {
    // Pinned point: theta = 1, K = 1e6.
    let aat_at_one = mean(&naaois(&config(PolicyKind::Aat, 500, 1.0, 1_000_000, 0xA06, 5)));
    let mut pass = (1.00..=1.15).contains(&aat_at_one);
    let mut worst_margin = f64::INFINITY;
    let mut worst_theta = 0.0;
    // Grid comparison within replication noise.
    let grid: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
    for &theta in &grid {
        let aat: Vec<f64> = naaois(&config(PolicyKind::Aat, 500, theta, 400_000, 0xA06, 2));
        let sat: Vec<f64> = naaois(&config(PolicyKind::Sat, 500, theta, 400_000, 0xA06, 2));
        let gap = mean(&sat) - mean(&aat);
        let noise = 3.0 * (stderr(&aat).powi(2) + stderr(&sat).powi(2)).sqrt();
        let margin = gap + noise;
        if margin < worst_margin {
            worst_margin = margin;
            worst_theta = theta;
        }
        pass &= margin > 0.0;
    }
    report(
        "06 AAT beats SAT",
        pass,
        &format!(
            "AAT(theta=1) = {aat_at_one:.4} in [1.00,1.15]; worst grid margin {worst_margin:+.4} at theta={worst_theta}"
        ),
    );
}

#[test]
fn criterion_07_aat_operating_point() {
    let c = config(PolicyKind::Aat, 500, 1.0, 1_000_000, 0xA07, 3);
    let records = run_experiment(&c).unwrap();
    let success = mean(&records.iter().map(|r| r.p_success).collect::<Vec<_>>());
    let active = mean(&records.iter().map(|r| r.active_fraction.unwrap()).collect::<Vec<_>>());
    let success_ok = (success - 0.478).abs() <= 0.03;
    let active_ok = (active - 0.022).abs() <= 0.005;
    report(
        "07 AAT operating point",
        success_ok && active_ok,
        &format!(
            "success {success:.4} vs 0.478 +- 0.03 ({}); active fraction {active:.4} vs 0.022 +- 0.005 ({})",
            if success_ok { "ok" } else { "out" },
            if active_ok { "ok" } else { "out" },
        ),
    );
}

#[test]
fn criterion_08_gsat_idealized_unit_capacity() {
    let mut c = config(PolicyKind::Gsat, 500, 1.0, 1_000_000, 0xA08, 5);
    c.capacity = Some(1.0);
    let m = mean(&naaois(&c));
    let bound = aoi_core::thinning::lower_bound_capacity(500, 1.0);
    let pass = (m - 0.501).abs() <= 0.01;
    report(
        "08 GSAT idealized C=1",
        pass,
        &format!("mean NAAoI {m:.4} vs 0.501 +- 0.01 (capacity bound {bound:.4})"),
    );
}

#[test]
fn criterion_09_slot_probability_lemma() {
    let mut c = config(PolicyKind::Aloha, 500, 1.0, 1_000_000, 0xA09, 3);
    c.load_mode = LoadMode::Clamped;
    let records = run_experiment(&c).unwrap();
    let ps = mean(&records.iter().map(|r| r.p_success).collect::<Vec<_>>());
    let pi = mean(&records.iter().map(|r| r.p_idle).collect::<Vec<_>>());
    let pc = mean(&records.iter().map(|r| r.p_collision).collect::<Vec<_>>());
    let inv_e = 1.0 / E;
    let pass = (ps - inv_e).abs() <= 0.02 && (pi - inv_e).abs() <= 0.02 && (pc - (1.0 - 2.0 * inv_e)).abs() <= 0.02;
    report(
        "09 slot probabilities at capacity",
        pass,
        &format!(
            "(success, idle, collision) = ({ps:.4}, {pi:.4}, {pc:.4}) vs ({inv_e:.4}, {inv_e:.4}, {:.4}) +- 0.02",
            1.0 - 2.0 * inv_e
        ),
    );
}

#[test]
fn criterion_10_lower_bound_dominance_across_presets() {
    let scale = PresetScale { horizon: 150_000, replications: 3, seed: 0xA10, burn_in: 25_000 };
    let dir = std::env::temp_dir().join("aoi_acceptance_presets");
    let mut pass = true;
    let mut checked = 0usize;
    let mut worst = f64::INFINITY;
    let mut worst_at = String::new();
    for name in PresetName::ALL {
        let out = run_preset(name, &scale, &dir).unwrap();
        for f in &out.files {
            assert!(f.exists(), "{f:?} missing");
        }
        for row in &out.summary {
            let g = &row.group;
            let bound = g.lb_arrival.max(g.lb_capacity);
            let slack = g.naaoi_mean - (bound - 3.0 * g.naaoi_stderr);
            checked += 1;
            if slack < worst {
                worst = slack;
                worst_at = format!("{name}/{}/M={}/theta={}", g.policy, g.sources, g.theta);
            }
            pass &= slack >= -1e-9;
        }
    }
    std::fs::remove_dir_all(&dir).ok();
    report(
        "10 lower-bound dominance",
        pass,
        &format!("{checked} preset points; worst slack {worst:+.4} at {worst_at}"),
    );
}

#[test]
fn criterion_11_property_suites() {
    // (a) mass conservation over 1e4 random distributions.
    let mut rng = SimRng::new(0xA11);
    let mut worst_mass = 0.0f64;
    for _ in 0..10_000 {
        let n = 2 + rng.index(199);
        let mut ell: Vec<f64> = (0..=n).map(|_| rng.next_f64()).collect();
        let total: f64 = ell.iter().sum();
        for v in &mut ell {
            *v /= total;
        }
        let theta = rng.next_f64();
        let dist = AgeGainDistribution { ell };
        let (plus, a) = propagate_arrival_distribution(&dist, theta);
        worst_mass = worst_mass
            .max((plus.total_mass() - 1.0).abs())
            .max((a.total_mass() - theta).abs());
    }
    let mass_ok = worst_mass < 1e-9;

    // (b) enumeration-oracle equivalence for M <= 4, N <= 6.
    let mut worst_oracle = 0.0f64;
    for case in 0..60 {
        let m = 1 + rng.index(4);
        let orders: Vec<usize> = (0..m).map(|_| rng.index(7)).collect();
        let theta = if case % 2 == 0 { 0.3 } else { 0.7 };
        let mut ell = vec![0.0; 7];
        for &o in &orders {
            ell[o] += 1.0 / m as f64;
        }
        let (plus, a) = propagate_arrival_distribution(&AgeGainDistribution { ell }, theta);
        let (oracle_ell, oracle_a) = propagate_oracle(&orders, 6, theta);
        for j in 0..=6 {
            worst_oracle = worst_oracle
                .max((plus.ell[j] - oracle_ell[j]).abs())
                .max((a.a[j] - oracle_a[j]).abs());
        }
    }
    let oracle_ok = worst_oracle < 1e-12;

    // (c) unit-buffer dominance: the dedicated suite covers 1000 seeds at
    // M=2, K=50 (tests/dominance.rs); rechecked here over a subset.
    let dominance_ok = dominance_subset();

    // (d) SAT with unit threshold is bit-identical to stabilized ALOHA.
    let (m, theta, horizon) = (50usize, 0.2f64, 20_000u64);
    let load = m as f64 * theta;
    let mut aloha = Policy::Aloha(AlohaState::new(load, m as f64));
    let mut sat = Policy::Sat { threshold: 1, aloha: AlohaState::new(load, m as f64) };
    let mut r1 = SimRng::for_replication(0xB11, 0);
    let mut r2 = SimRng::for_replication(0xB11, 0);
    let a = run_simulation(m, theta, horizon, 0, &mut aloha, &mut r1, None).unwrap();
    let b = run_simulation(m, theta, horizon, 0, &mut sat, &mut r2, None).unwrap();
    let bit_ok = a.metrics == b.metrics;

    // (e) byte-level determinism of run_experiment.
    let mut c = config(PolicyKind::Aat, 30, 0.9, 20_000, 0xC11, 2);
    c.truncation = Some(400);
    let det_ok = records_to_csv(&run_experiment(&c).unwrap())
        == records_to_csv(&run_experiment(&c).unwrap());

    report(
        "11 property suites",
        mass_ok && oracle_ok && dominance_ok && bit_ok && det_ok,
        &format!(
            "mass err {worst_mass:.2e}; oracle err {worst_oracle:.2e}; dominance {dominance_ok}; SAT/ALOHA bit-equal {bit_ok}; determinism {det_ok}"
        ),
    );
}

fn dominance_subset() -> bool {
    use aoi_core::age::SourceState;
    use aoi_core::channel::resolve_transmitters;
    use common::{draw_matrix, FifoSources};
    let m = 2;
    let slots = 50usize;
    for seed in 0..100u64 {
        let mut rng = SimRng::for_replication(seed, 1);
        let arrivals = draw_matrix(&mut rng, slots, m, 0.3);
        let coins = draw_matrix(&mut rng, slots, m, 0.4);
        let mut unit: Vec<SourceState> = vec![SourceState::new(); m];
        let mut fifo = FifoSources::new(m);
        let mut tx = Vec::new();
        for k in 1..=slots {
            let row = k - 1;
            for (i, s) in unit.iter_mut().enumerate() {
                s.apply_arrival(arrivals[row][i]);
            }
            fifo.apply_arrivals(k as u64, &arrivals[row]);
            for i in 0..m {
                if unit[i].h > fifo.h[i] {
                    return false;
                }
            }
            tx.clear();
            for i in 0..m {
                if unit[i].has_packet && coins[row][i] {
                    tx.push(i as u32);
                }
            }
            let unit_outcome = resolve_transmitters(&tx);
            tx.clear();
            for i in 0..m {
                if fifo.nonempty(i) && coins[row][i] {
                    tx.push(i as u32);
                }
            }
            let fifo_outcome = resolve_transmitters(&tx);
            for (i, s) in unit.iter_mut().enumerate() {
                s.apply_delivery(unit_outcome.delivered == Some(i as u32));
            }
            fifo.apply_delivery(k as u64, fifo_outcome.delivered.map(|i| i as usize));
        }
    }
    true
}

// Published single-point checks beyond the numbered criteria.

#[test]
fn reference_point_maxweight_low_rate() {
    let c = config(PolicyKind::MaxWeight, 500, 0.00049051, 1_000_000, 0xD01, 3);
    let m = mean(&naaois(&c));
    assert!((m - 4.08).abs() <= 0.2, "maxweight low-rate NAAoI {m:.4} vs 4.08 +- 0.2");
}

#[test]
fn reference_point_randomized_baseline() {
    let c = config(PolicyKind::Randomized, 500, 1.0, 1_000_000, 0xD02, 2);
    let m = mean(&naaois(&c));
    assert!((m - 2.71).abs() <= 0.1, "randomized NAAoI {m:.4} vs 2.71 +- 0.1");
}
