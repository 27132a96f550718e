use proptest::prelude::*;
use smin_lab::experiments::{
    emit_results, estimate_tail, estimate_tail_with_threads, wilson_interval, ExperimentConfig,
    OutputFormat, Statistic, TailEstimate, CSV_COLUMNS, WILSON_Z,
};
use smin_lab::samplers::{RowDistribution, ShiftSpec};

fn config(dist: RowDistribution, n: usize, statistic: Statistic) -> ExperimentConfig {
    ExperimentConfig {
        dist,
        shift: ShiftSpec::Zero,
        n,
        trials: 300,
        t_grid: vec![0.0, 0.05, 0.1, 0.3, 1.0, 3.0],
        master_seed: 8,
        statistic,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// The Wilson bounds are the roots of `(p̂ − p)² = z² p(1 − p)/n`.
    #[test]
    fn wilson_bounds_solve_the_score_equation(trials in 1usize..5000, frac in 0.0f64..=1.0) {
        let hits = ((trials as f64) * frac).round() as usize;
        let (lo, hi) = wilson_interval(hits, trials);
        let p_hat = hits as f64 / trials as f64;
        let score = |p: f64| (p_hat - p).powi(2) - WILSON_Z * WILSON_Z * p * (1.0 - p) / trials as f64;
        prop_assert!(score(lo).abs() < 1e-12);
        prop_assert!(score(hi).abs() < 1e-12);
        prop_assert!(lo <= p_hat && p_hat <= hi);
    }
}

#[test]
fn hit_counts_do_not_depend_on_worker_count() {
    let c = config(RowDistribution::SymmetricExponential, 12, Statistic::SminScaled);
    let runs: Vec<TailEstimate> = [1, 2, 4]
        .into_iter()
        .map(|t| estimate_tail_with_threads(&c, Some(t)).unwrap())
        .collect();
    assert_eq!(runs[0].points, runs[1].points);
    assert_eq!(runs[0].points, runs[2].points);
}

#[test]
fn grids_are_monotone() {
    let lower = [
        Statistic::SminScaled,
        Statistic::DistanceProfile { k: 3, a: 0.2 },
    ];
    for s in lower {
        let est = estimate_tail(&config(RowDistribution::Gaussian, 10, s)).unwrap();
        assert!(est.points.windows(2).all(|w| w[0].hits <= w[1].hits), "{s}");
    }
    for s in [Statistic::HsScaledSqrt, Statistic::HsScaledN] {
        let est = estimate_tail(&config(RowDistribution::Gaussian, 10, s)).unwrap();
        assert!(est.points.windows(2).all(|w| w[0].hits >= w[1].hits), "{s}");
    }
}

#[test]
fn only_discrete_rows_are_singular_at_zero() {
    let bern = estimate_tail(&config(RowDistribution::Bernoulli, 3, Statistic::SminScaled)).unwrap();
    assert!(bern.points[0].hits > 0);
    for dist in RowDistribution::ALL.into_iter().filter(|d| d.is_continuous()) {
        let est = estimate_tail(&config(dist, 3, Statistic::SminScaled)).unwrap();
        assert_eq!(est.points[0].hits, 0, "{dist}");
    }
}

/// `√n s_min ≤ t` and `‖B⁻¹‖_HS ≥ √n/t` agree up to the gap between the
/// spectral and Hilbert–Schmidt norms: `s_min⁻¹ ≤ ‖B⁻¹‖_HS ≤ √n s_min⁻¹`.
#[test]
fn smin_and_hs_statistics_are_consistent() {
    let n = 8;
    let smin = estimate_tail(&config(RowDistribution::Gaussian, n, Statistic::SminScaled)).unwrap();
    let mut hs_config = config(RowDistribution::Gaussian, n, Statistic::HsScaledSqrt);
    hs_config.t_grid = smin.config.t_grid.iter().skip(1).map(|t| 1.0 / t).rev().collect();
    let hs = estimate_tail(&hs_config).unwrap();
    // smin hit at t ⇒ ‖B⁻¹‖_HS ≥ 1/s_min ≥ √n/t ⇒ hs hit at 1/t
    for (p, q) in smin.points.iter().skip(1).zip(hs.points.iter().rev()) {
        assert!(p.hits <= q.hits, "t = {}", p.t);
    }
}

#[test]
fn emitted_files_follow_the_schema() {
    let est = estimate_tail(&config(RowDistribution::UniformEntry, 6, Statistic::SminScaled)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("tail.csv");
    emit_results(&est, &csv_path, OutputFormat::Csv).unwrap();
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), CSV_COLUMNS);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), est.points.len());
    for (row, p) in rows.iter().zip(&est.points) {
        assert_eq!(row[0].parse::<f64>().unwrap(), p.t);
        assert_eq!(row[2].parse::<usize>().unwrap(), p.hits);
        assert_eq!(row[3].parse::<f64>().unwrap(), p.p_hat);
        assert_eq!(row[5].parse::<f64>().unwrap(), p.ci_high);
        assert_eq!(&row[7], "smin_scaled");
        assert_eq!(&row[8], "uniform_entry");
    }

    let json_path = dir.path().join("tail.json");
    emit_results(&est, &json_path, OutputFormat::Json).unwrap();
    let back: TailEstimate = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(back, est);
}

#[test]
fn config_file_drives_a_run() {
    let text = r#"{"dist":"gaussian","shift":{"scaled_identity":3.0},"n":5,"trials":20,
        "t_grid":[0.5,1.0],"master_seed":1,"statistic":"hs_scaled_n"}"#;
    let c = ExperimentConfig::from_json(text).unwrap();
    let est = estimate_tail(&c).unwrap();
    assert_eq!(est.config, c);
    assert_eq!(est.points.len(), 2);
}
