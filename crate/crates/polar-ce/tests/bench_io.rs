//! Campaign harness tests: sweep expansion, NMSE bookkeeping, CSV schema
//! round-trips, resumability, and parallel/sequential determinism.

use std::collections::HashSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use polar_ce::bench::{
    bootstrap_ci_mean, expand_sweep, load_existing, nmse, run_campaign, run_point, summarize,
    ExperimentConfig, Method, Sweep, TrialRecord,
};

fn tiny_config() -> ExperimentConfig {
    ExperimentConfig {
        num_antennas: 16,
        num_subcarriers: 4,
        num_rf_chains: 2,
        pilot_length: 4,
        num_paths: 2,
        assumed_paths: 4,
        trials: 3,
        rho_min: 0.02,
        rho_max: 0.2,
        ..ExperimentConfig::default()
    }
}

#[test]
fn nmse_edge_cases() {
    let zero = DMatrix::<Complex64>::zeros(2, 2);
    let one = DMatrix::<Complex64>::from_element(2, 2, Complex64::new(1.0, 0.0));
    assert_eq!(nmse(&zero, &zero), 0.0);
    assert_eq!(nmse(&zero, &one), f64::INFINITY);
    assert_eq!(nmse(&one, &one), 0.0);
    // All-zero estimate of a nonzero channel scores exactly 1.
    assert_eq!(nmse(&one, &zero), 1.0);
}

#[test]
fn method_tags_round_trip() {
    for m in Method::ALL {
        assert_eq!(Method::parse(m.tag()).unwrap(), m);
    }
    assert!(Method::parse("nope").is_err());
}

#[test]
fn sweep_expansion_validates_values() {
    let base = tiny_config();
    assert!(expand_sweep(&base, &Sweep::Distance(vec![-1.0])).is_err());
    assert!(expand_sweep(&base, &Sweep::PilotLength(vec![2.5])).is_err());
    assert!(expand_sweep(&base, &Sweep::Beta(vec![0.0])).is_err());
    let pts = expand_sweep(&base, &Sweep::Snr(vec![0.0, 10.0])).unwrap();
    assert_eq!(pts.len(), 2);
    assert_eq!(pts[1].config.snr_db, 10.0);
    assert!(pts[1].fixed_distance.is_none());
    let pts = expand_sweep(&base, &Sweep::Distance(vec![5.0])).unwrap();
    assert_eq!(pts[0].fixed_distance, Some(5.0));
}

#[test]
fn config_validation_errors() {
    let mut cfg = tiny_config();
    cfg.trials = 0;
    assert!(cfg.validate().is_err());
    let mut cfg = tiny_config();
    cfg.rho_min = -1.0;
    assert!(cfg.validate().is_err());
    let mut cfg = tiny_config();
    cfg.angle_bound = 1.5;
    assert!(cfg.validate().is_err());
    assert!(ExperimentConfig::default().validate().is_ok());
    assert!(ExperimentConfig::paper_scale().validate().is_ok());
}

#[test]
fn paired_trials_are_deterministic() {
    let base = tiny_config();
    let points = expand_sweep(&base, &Sweep::Snr(vec![10.0])).unwrap();
    let methods = [Method::PSomp, Method::SwOmp];
    let skip = HashSet::new();
    let a = run_point(&points[0], &methods, 0, &skip).unwrap();
    let b = run_point(&points[0], &methods, 0, &skip).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.method, y.method);
        assert_eq!(x.trial, y.trial);
        assert_eq!(x.nmse_linear, y.nmse_linear);
    }
    // Every method saw the same trial under the same seed (paired design).
    assert_eq!(a.len(), 2 * base.trials);
}

#[test]
fn campaign_writes_csv_and_resumes_without_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results.csv");
    let base = tiny_config();
    let sweep = Sweep::Snr(vec![0.0, 10.0]);
    let methods = [Method::PSomp];
    let first = run_campaign(&base, &sweep, &methods, &out).unwrap();
    assert_eq!(first.records.len(), 2 * base.trials);

    let on_disk = load_existing(&out).unwrap();
    assert_eq!(on_disk.len(), first.records.len());

    // Re-running the identical campaign must be a no-op: same rows on disk.
    let second = run_campaign(&base, &sweep, &methods, &out).unwrap();
    assert_eq!(second.records.len(), first.records.len());
    let after = load_existing(&out).unwrap();
    assert_eq!(after.len(), on_disk.len());

    // Adding a method resumes: old rows kept, only new-method rows appended.
    let third = run_campaign(&base, &sweep, &[Method::PSomp, Method::Ls], &out).unwrap();
    let after = load_existing(&out).unwrap();
    assert_eq!(after.len(), 4 * base.trials);
    assert_eq!(third.records.len(), 4 * base.trials);
    // The p-somp rows are bit-identical to the first run's.
    for r in &on_disk {
        assert!(after.contains(r), "resume must preserve prior rows");
    }
}

#[test]
fn summaries_aggregate_by_method_and_value() {
    let rec = |method: &str, value: f64, nmse_linear: f64| TrialRecord {
        method: method.into(),
        sweep_name: "snr".into(),
        sweep_value: value,
        trial: 0,
        seed: 1,
        nmse_linear,
        nmse_db: 10.0 * nmse_linear.log10(),
        wall_ms: 1.0,
    };
    let records = vec![
        rec("p-somp", 0.0, 0.1),
        rec("p-somp", 0.0, 0.3),
        rec("p-somp", 10.0, 0.01),
        rec("ls", 0.0, 1.0),
    ];
    let summary = summarize(&records, 1);
    assert_eq!(summary.len(), 3);
    let s = summary.iter().find(|s| s.method == "p-somp" && s.sweep_value == 0.0).unwrap();
    assert_eq!(s.trials, 2);
    assert!((s.mean_nmse_linear - 0.2).abs() < 1e-15);
    assert!((s.mean_nmse_db - 10.0 * 0.2f64.log10()).abs() < 1e-12);
    assert!(s.ci_lo_db <= s.mean_nmse_db && s.mean_nmse_db <= s.ci_hi_db);
}

#[test]
fn bootstrap_ci_contains_the_mean_and_tightens() {
    let xs: Vec<f64> = (0..200).map(|i| 0.5 + 0.001 * (i % 7) as f64).collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let (lo, hi) = bootstrap_ci_mean(&xs, 3);
    assert!(lo <= mean && mean <= hi);
    assert!(hi - lo < 0.01);
    let (lo1, hi1) = bootstrap_ci_mean(&xs[..4], 3);
    assert!(hi1 - lo1 > hi - lo, "smaller samples give wider intervals");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn trial_records_round_trip_through_csv(
        trial in 0u64..1000,
        seed in proptest::num::u64::ANY,
        nmse_linear in 1e-12..10.0f64,
        sweep_value in -100.0..200.0f64,
        wall_ms in 0.0..1e5f64,
    ) {
        let rec = TrialRecord {
            method: "p-sigw".into(),
            sweep_name: "distance".into(),
            sweep_value,
            trial,
            seed,
            nmse_linear,
            nmse_db: 10.0 * nmse_linear.log10(),
            wall_ms,
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(&rec).unwrap();
        let data = w.into_inner().unwrap();
        let mut r = csv::Reader::from_reader(data.as_slice());
        let back: TrialRecord = r.deserialize().next().unwrap().unwrap();
        prop_assert_eq!(rec, back);
    }
}
