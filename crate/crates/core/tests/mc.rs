mod common;

use common::instances;
use levy_dividend::dividend::build_h;
use levy_dividend::mc::{estimate_ruin, simulate_dividends, SimConfig};
use levy_dividend::model::{presets, LevyModel};

fn cfg(n_paths: usize, dt: f64, seed: u64) -> SimConfig {
    SimConfig { n_paths, dt, seed, ..SimConfig::default() }
}

#[test]
fn identical_across_worker_counts() {
    for (name, m) in instances() {
        let runs: Vec<_> = [1, 2, 8]
            .iter()
            .map(|&w| {
                let c = SimConfig { workers: w, t_max: Some(60.0), ..cfg(500, 0.05, 99) };
                simulate_dividends(&m, 1.0, 2.0, 0.1, &c).unwrap()
            })
            .collect();
        for r in &runs[1..] {
            assert_eq!(r.mean.to_bits(), runs[0].mean.to_bits(), "{name}");
            assert_eq!(r.std_error.to_bits(), runs[0].std_error.to_bits(), "{name}");
            assert_eq!(r, &runs[0]);
        }
    }
}

#[test]
fn seeds_change_estimates() {
    let m = presets::double_exponential();
    let a = estimate_ruin(&m, 1.0, None, &cfg(2_000, 0.5, 1)).unwrap();
    let b = estimate_ruin(&m, 1.0, None, &cfg(2_000, 0.5, 2)).unwrap();
    assert_ne!(a.probability.mean, b.probability.mean);
}

#[test]
fn perpetuity_without_risk() {
    let m = LevyModel::brownian(2.0, 0.0).unwrap();
    let est = simulate_dividends(&m, 1.0, 1.0, 0.1, &cfg(10, 0.01, 0)).unwrap();
    assert!((est.mean - 20.0).abs() <= est.truncation_bound + 1e-12);
    assert_eq!(est.diagnostics.ruin_count, 0);
    assert_eq!(est.diagnostics.dt, None);
}

#[test]
fn lump_sum_above_barrier() {
    for (name, m) in instances() {
        let est = simulate_dividends(&m, 6.0, 2.0, 0.1, &SimConfig { t_max: Some(40.0), ..cfg(200, 0.05, 5) }).unwrap();
        assert!(est.mean >= 4.0, "{name}");
    }
}

#[test]
fn bridge_correction_only_adds_ruins() {
    let m = presets::brownian_unit();
    let on = estimate_ruin(&m, 1.0, None, &cfg(20_000, 0.1, 8)).unwrap().probability;
    let off = estimate_ruin(&m, 1.0, None, &SimConfig { bridge_correction: false, ..cfg(20_000, 0.1, 8) })
        .unwrap()
        .probability;
    assert!(on.mean >= off.mean);
    assert!((on.mean - (-2.0f64).exp()).abs() <= 3.0 * on.std_error);
}

#[test]
fn claims_model_from_zero_and_far_away() {
    let m = presets::exponential_claims();
    let est = estimate_ruin(&m, 0.0, Some(0.1), &cfg(20_000, 0.5, 4)).unwrap();
    assert!((est.probability.mean - 0.5).abs() <= 3.0 * est.probability.std_error);
    assert!(est.transform.unwrap().mean < est.probability.mean);
    let far = estimate_ruin(&m, 80.0, None, &cfg(2_000, 0.5, 4)).unwrap();
    assert!(far.probability.mean <= 1e-3);
}

#[test]
fn halving_dt_moves_dividends_less_than_one_standard_error() {
    let m = presets::brownian_unit();
    let b = build_h(&m, 0.1).unwrap().b_star();
    let run = |dt: f64| {
        let c = SimConfig { t_max: Some(250.0), ..cfg(100_000, dt, 2024) };
        simulate_dividends(&m, 1.0, b, 0.1, &c).unwrap()
    };
    let (coarse, fine) = (run(0.1), run(0.05));
    let diff = (coarse.mean - fine.mean).abs();
    println!("dt 0.1: {} dt 0.05: {} diff {diff} se {}", coarse.mean, fine.mean, fine.std_error);
    assert!(diff < fine.std_error);
}
