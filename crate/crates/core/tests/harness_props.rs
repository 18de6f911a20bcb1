use nles::config::parse_experiment;
use nles::harness::{
    decay_rate_of, nu_bar_sweep, plateau_of, run_twin, ErrorMetric, NudgedStart, TwinExperiment,
};
use nles::solver::Model;
use proptest::prelude::*;

fn small(extra: &str) -> TwinExperiment {
    let doc = format!(
        "[grid]\nn = 32\n[observation]\nk_c = 5\n[harness]\nt_end = 2.0\nspinup_time = 1.0\nrecord_interval = 0.25\n{extra}"
    );
    parse_experiment(&doc).unwrap()
}

#[test]
fn self_twin_stays_exact() {
    let mut exp = small("nudged_start = \"reference\"\n");
    for model in [Model::Nse, Model::Ladyzhenskaya] {
        exp.reference.model = model;
        exp.reference.nu_bar = exp.nudged.nu_bar;
        exp.nudged.model = model;
        let s = run_twin(&exp).unwrap();
        assert!(s.l2_rel.iter().all(|e| *e < 1e-13), "{model:?}: {:?}", s.l2_rel);
    }
}

#[test]
fn nse_twin_synchronizes() {
    let mut exp = small("");
    exp.nudged.model = Model::Nse;
    let s = run_twin(&exp).unwrap();
    assert_eq!(s.l2_rel[0], 1.0);
    assert!(s.last(ErrorMetric::L2Rel).unwrap() < 1e-3);
}

#[test]
fn without_nudging_the_error_stays_order_one() {
    let mut exp = small("");
    let nudged = run_twin(&exp).unwrap().last(ErrorMetric::L2Rel).unwrap();
    exp.nudged.mu = 0.0;
    let s = run_twin(&exp).unwrap();
    assert!(s.l2_rel.iter().all(|e| *e > 0.1), "{:?}", s.l2_rel);
    assert!(s.last(ErrorMetric::L2Rel).unwrap() > 100.0 * nudged);
}

#[test]
fn long_record_interval_gives_endpoints() {
    let mut exp = small("");
    exp.record_interval = 10.0;
    let s = run_twin(&exp).unwrap();
    assert_eq!(s.times, vec![0.0, 2.0]);
}

#[test]
fn series_shape_and_reproducibility() {
    let exp = small("seed = 5\n");
    let a = run_twin(&exp).unwrap();
    let b = run_twin(&exp).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 9);
    for col in [&a.l2_abs, &a.l2_rel, &a.h1_rel, &a.energy_residuals] {
        assert_eq!(col.len(), a.times.len());
    }
    assert!(a.times.windows(2).all(|w| w[1] > w[0]));
    let c = run_twin(&small("seed = 6\n")).unwrap();
    assert_ne!(a.l2_abs, c.l2_abs);
}

#[test]
fn sweep_rejects_too_few_values() {
    let exp = small("");
    let err = nu_bar_sweep(&exp, &[1e-6]).unwrap_err().to_string();
    assert!(err.contains("need >= 3 values"), "{err}");
    assert!(nu_bar_sweep(&exp, &[1e-6, 1e-6, 1e-6]).is_err());
    assert!(nu_bar_sweep(&exp, &[1e-6, 2e-6, 5e-6]).is_err());
}

#[test]
fn extension_stops_at_time_cap() {
    let mut exp = small("");
    exp.nudged.mu = 0.0;
    exp.nudged_start = NudgedStart::Reference;
    exp.extend_max_time = 1.0;
    let s = run_twin(&exp).unwrap();
    let last = *s.times.last().unwrap();
    assert!(last > 2.0 - 1e-12 && last <= 3.0 + 1e-12, "{last}");
}

proptest! {
    #[test]
    fn synthetic_decay_with_floor(rate in 0.5f64..5.0, floor_exp in -10.0f64..-5.0) {
        let floor = 10f64.powf(floor_exp);
        let t_end = 3.0 * (-floor.ln()) / rate;
        let times: Vec<f64> = (0..=400).map(|i| t_end * i as f64 / 400.0).collect();
        let values: Vec<f64> = times.iter().map(|t| (-rate * t).exp() + floor).collect();
        let fit = decay_rate_of(&times, &values, None).unwrap();
        prop_assert!((fit + rate).abs() <= 0.05 * rate, "{fit} vs {rate}");
        let plateau = plateau_of(&times, &values, 0.25).unwrap();
        prop_assert!(plateau >= floor && plateau <= 2.0 * floor);
    }

    #[test]
    fn plateau_of_constant_is_constant(c in 1e-12f64..1e3, frac in 0.01f64..=1.0) {
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.3).collect();
        let values = vec![c; 50];
        let p = plateau_of(&times, &values, frac).unwrap();
        prop_assert!((p - c).abs() <= 1e-12 * c);
    }
}
