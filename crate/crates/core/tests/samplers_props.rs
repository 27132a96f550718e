use smin_lab::linalg::spectrum;
use smin_lab::samplers::{
    build_shift, counterexample_witness, sample_matrix, RowDistribution, SeedSpec, ShiftSpec,
};

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Empirical second-moment matrix of `rows` rows of dimension `d`.
fn second_moments(dist: RowDistribution, d: usize, rows: usize) -> Vec<Vec<f64>> {
    let mut acc = vec![vec![0.0; d]; d];
    let mut count = 0;
    let mut trial = 0;
    while count < rows {
        let m = sample_matrix(dist, d, SeedSpec::new(77, trial)).unwrap();
        for r in m.rows() {
            for j in 0..d {
                for k in 0..d {
                    acc[j][k] += r[j] * r[k];
                }
            }
        }
        count += d;
        trial += 1;
    }
    acc.iter()
        .map(|row| row.iter().map(|v| v / count as f64).collect())
        .collect()
}

#[test]
fn rows_are_isotropic() {
    // 60k rows: the standard error of each moment is below 0.01.
    for dist in RowDistribution::ALL {
        let m = second_moments(dist, 4, 60_000);
        for j in 0..4 {
            for k in 0..4 {
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((m[j][k] - expected).abs() < 0.04, "{dist}: moment ({j},{k}) = {}", m[j][k]);
            }
        }
    }
}

#[test]
fn entries_have_expected_supports() {
    let u = sample_matrix(RowDistribution::UniformEntry, 30, SeedSpec::new(1, 0)).unwrap();
    assert!(u.as_slice().iter().all(|v| v.abs() <= 3f64.sqrt()));
    let n = 30;
    let ball = sample_matrix(RowDistribution::BallUniform, n, SeedSpec::new(1, 0)).unwrap();
    assert!(ball.rows().all(|r| norm(r) <= ((n + 2) as f64).sqrt()));
}

#[test]
fn streams_are_keyed_by_seed_and_trial() {
    let a = sample_matrix(RowDistribution::Gaussian, 8, SeedSpec::new(5, 9)).unwrap();
    let b = sample_matrix(RowDistribution::Gaussian, 8, SeedSpec::new(5, 9)).unwrap();
    let c = sample_matrix(RowDistribution::Gaussian, 8, SeedSpec::new(5, 10)).unwrap();
    let d = sample_matrix(RowDistribution::Gaussian, 8, SeedSpec::new(6, 9)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_ne!(a, d);
}

#[test]
fn density_bounds_match_closed_forms() {
    let pi = std::f64::consts::PI;
    assert_eq!(RowDistribution::Gaussian.density_bound(), Some(1.0 / (2.0 * pi).sqrt()));
    assert_eq!(RowDistribution::Bernoulli.density_bound(), None);
    assert!(!RowDistribution::Bernoulli.is_continuous());
    assert!(RowDistribution::BallUniform.is_continuous());
}

#[test]
fn shift_specs_parse_and_build() {
    assert_eq!("zero".parse::<ShiftSpec>().unwrap(), ShiftSpec::Zero);
    assert_eq!("identity:2.5".parse::<ShiftSpec>().unwrap(), ShiftSpec::ScaledIdentity(2.5));
    assert_eq!(
        "diag:1,2,3".parse::<ShiftSpec>().unwrap(),
        ShiftSpec::Diagonal(vec![1.0, 2.0, 3.0])
    );
    assert!("diag:1,x".parse::<ShiftSpec>().is_err());
    assert!("rotate:1".parse::<ShiftSpec>().is_err());
    let m = build_shift(&ShiftSpec::Counterexample(9.0), 5).unwrap();
    let diag: Vec<f64> = (0..5).map(|i| m.get(i, i)).collect();
    assert_eq!(diag, vec![9.0, 9.0, 9.0, 0.0, 0.0]);
    assert!(build_shift(&ShiftSpec::Diagonal(vec![1.0]), 2).is_err());
}

/// On the corner event the witness certifies a small singular value.
#[test]
fn witness_certifies_small_singular_value() {
    let n = 12;
    let tau = 1000.0;
    let m = build_shift(&ShiftSpec::Counterexample(tau), n).unwrap();
    let mut seen = 0;
    for trial in 0..400 {
        let b = sample_matrix(RowDistribution::Bernoulli, n, SeedSpec::new(3, trial)).unwrap();
        let (p, q) = (n - 2, n - 1);
        let corner = (b.get(p, p) + b.get(p, q)).powi(2) + (b.get(q, p) + b.get(q, q)).powi(2);
        if corner != 0.0 {
            continue;
        }
        seen += 1;
        let x = counterexample_witness(&b, tau).unwrap();
        let nx = norm(&x);
        assert!((2f64.sqrt()..2.0).contains(&nx));
        let bm = b.add(&m).unwrap();
        let image: Vec<f64> = bm.rows().map(|r| r.iter().zip(&x).map(|(u, v)| u * v).sum()).collect();
        // the first n−2 coordinates cancel and the last two rows only see B′X
        assert!(norm(&image) <= 2.0 * n as f64 / tau * (n as f64).sqrt());
        assert!(spectrum(&bm).s_min <= norm(&image) / nx * (1.0 + 1e-9));
    }
    assert!(seen > 50);
}
