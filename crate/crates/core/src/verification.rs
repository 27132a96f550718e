//! Randomized suites checking each deterministic lemma on generated
//! instances.
//!
//! Instance `k` of a suite draws from the stream keyed by `(seed, k)`, so a
//! failing instance can be replayed on its own. Hypotheses are enforced by
//! construction or verified before the conclusion is checked; instances
//! where they fail are counted as non-qualifying, never as failures.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::alphaeta::random_structure;
use crate::combinatorics::{
    greedy_decomposition, matrix_vertex_values, pivot_index, q_sets, triple_property_holds,
    two_graphs_dichotomy, DecompositionMode, Graph, Pivot,
};
use crate::error::{Error, Result};
use crate::experiments::{configured_threads, run_trials};
use crate::linalg::{dist_to_span, norm, row_distances, spectrum, Matrix};
use crate::samplers::{sample_matrix_with, RowDistribution, SeedSpec};

/// Largest relative error tolerated by the biorthogonality suite.
pub const BIORTHOGONALITY_TOLERANCE: f64 = 1e-8;
/// Failure descriptions kept per report.
const MAX_NOTES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Pivot,
    QSets,
    EdgeInterval,
    LowValue,
    Dichotomy,
    Alpharho,
    Biorthogonality,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Pivot,
        Suite::QSets,
        Suite::EdgeInterval,
        Suite::LowValue,
        Suite::Dichotomy,
        Suite::Alpharho,
        Suite::Biorthogonality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Pivot => "pivot",
            Suite::QSets => "q-sets",
            Suite::EdgeInterval => "edge-interval",
            Suite::LowValue => "low-value",
            Suite::Dichotomy => "dichotomy",
            Suite::Alpharho => "alpharho",
            Suite::Biorthogonality => "biorthogonality",
        }
    }

    pub fn default_instances(self) -> usize {
        match self {
            Suite::Pivot => 10_000,
            Suite::QSets => 1000,
            Suite::EdgeInterval => 200,
            Suite::LowValue => 100,
            Suite::Dichotomy => 200,
            Suite::Alpharho => 500,
            Suite::Biorthogonality => 1000,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Suite::ALL.into_iter().find(|x| x.name() == key).ok_or_else(|| {
            Error::invalid(format!(
                "unknown suite '{s}' (expected one of {})",
                Suite::ALL.map(Suite::name).join(", ")
            ))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub instances: usize,
    /// Instances whose hypotheses held and whose conclusion was checked.
    pub qualifying: usize,
    /// Individual checks performed (several per instance for some suites).
    pub checks: usize,
    pub failures: usize,
    /// Suite-specific worst case: largest relative error (biorthogonality),
    /// largest `lhs/rhs` (alpharho), largest `count/16N` (low-value).
    pub worst: Option<f64>,
    /// The first few failures.
    pub notes: Vec<String>,
    pub wall_time_secs: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.qualifying > 0
    }
}

#[derive(Default)]
struct Outcome {
    qualifying: bool,
    checks: usize,
    failures: Vec<String>,
    worst: Option<f64>,
}

impl Outcome {
    fn skipped() -> Self {
        Self::default()
    }

    fn checked(checks: usize, failures: Vec<String>, worst: Option<f64>) -> Self {
        Self {
            qualifying: true,
            checks,
            failures,
            worst,
        }
    }
}

pub fn run_suite(suite: Suite, instances: usize, seed: u64) -> Result<SuiteReport> {
    if instances == 0 {
        return Err(Error::invalid("instances must be at least 1"));
    }
    let start = Instant::now();
    let outcomes = run_trials(instances, configured_threads()?, |k| {
        let mut rng = SeedSpec::new(seed, k).rng();
        let out = match suite {
            Suite::Pivot => pivot_instance(&mut rng),
            Suite::QSets => q_sets_instance(&mut rng),
            Suite::EdgeInterval => edge_interval_instance(&mut rng),
            Suite::LowValue => low_value_instance(&mut rng),
            Suite::Dichotomy => dichotomy_instance(&mut rng),
            Suite::Alpharho => alpharho_instance(&mut rng),
            Suite::Biorthogonality => biorthogonality_instance(&mut rng),
        }?;
        Ok((k, out))
    })?;
    let mut report = SuiteReport {
        suite,
        seed,
        instances,
        qualifying: 0,
        checks: 0,
        failures: 0,
        worst: None,
        notes: Vec::new(),
        wall_time_secs: 0.0,
    };
    for (k, out) in outcomes {
        report.qualifying += usize::from(out.qualifying);
        report.checks += out.checks;
        report.failures += out.failures.len();
        if let Some(w) = out.worst {
            report.worst = Some(report.worst.map_or(w, |x: f64| x.max(w)));
        }
        for f in out.failures {
            if report.notes.len() < MAX_NOTES {
                report.notes.push(format!("instance {k}: {f}"));
            }
        }
    }
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

fn gaussian_vec(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            scale * z
        })
        .collect()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

fn continuous_kind(rng: &mut ChaCha8Rng) -> RowDistribution {
    let kinds: Vec<RowDistribution> = RowDistribution::ALL
        .into_iter()
        .filter(|d| d.is_continuous())
        .collect();
    *kinds.choose(rng).unwrap()
}

/// Random matrix with rows rescaled over several orders of magnitude, which
/// spreads the row distances.
fn scaled_rows_matrix(rng: &mut ChaCha8Rng, n: usize) -> Result<Matrix> {
    let base = sample_matrix_with(continuous_kind(rng), n, rng)?;
    let scales: Vec<f64> = (0..n).map(|_| log_uniform(rng, 0.05, 20.0)).collect();
    Ok(Matrix::from_fn(n, |i, j| base.get(i, j) * scales[i]))
}

/// `x₀` close to the span of `x₁…x_{r−1}`, with `a` and `b` set from the
/// realized distances so the hypotheses hold.
fn pivot_instance(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    // Resample until every x_i (i ≥ 1) is off the span of the others.
    let (xs, a, b) = loop {
        let r = rng.gen_range(2..=6);
        let dim = rng.gen_range(r..=r + 3);
        let mut xs: Vec<Vec<f64>> = vec![vec![0.0; dim]];
        for _ in 1..r {
            let s = log_uniform(rng, 0.01, 100.0);
            xs.push(gaussian_vec(rng, dim, s));
        }
        let noise = log_uniform(rng, 1e-6, 1.0);
        let mut x0 = gaussian_vec(rng, dim, noise);
        for x in &xs[1..] {
            let c: f64 = StandardNormal.sample(rng);
            let c = c * log_uniform(rng, 0.1, 100.0);
            x0.iter_mut().zip(x).for_each(|(v, w)| *v += c * w);
        }
        xs[0] = x0;

        let rest = |i: usize| -> Vec<&[f64]> {
            xs.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, x)| x.as_slice())
                .collect()
        };
        let d0 = dist_to_span(&xs[0], &rest(0))?;
        let mut b = f64::INFINITY;
        for i in 1..r {
            b = b.min(dist_to_span(&xs[i], &rest(i))?);
        }
        if b > 0.0 {
            let a = d0.max(1e-12) * rng.gen_range(1.0..2.0);
            let b = b * rng.gen_range(0.5..1.0);
            break (xs, a, b);
        }
    };
    let r = xs.len();
    let threshold = b / (2.0 * a * r as f64) * norm(&xs[0]);
    let failures = match pivot_index(&xs, a, b)? {
        Pivot::Found(i0) if i0 >= 1 && i0 < r && norm(&xs[i0]) >= threshold => vec![],
        other => vec![format!("r={r}, a={a:e}, b={b:e}: got {other:?}")],
    };
    Ok(Outcome::checked(1, failures, None))
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `J` = rows with the `⌈n/2⌉` largest distances, `b` = the smallest of
/// those, `I` = rows at or below a randomly chosen smaller distance `a`.
fn q_sets_instance(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let n = rng.gen_range(4..=10);
    let r = rng.gen_range(2..=3);
    let m = scaled_rows_matrix(rng, n)?;
    let d = row_distances(&m);
    let mut desc = d.clone();
    desc.sort_by(|x, y| y.total_cmp(x));
    let half = n.div_ceil(2);
    let b = desc[half - 1];
    let below: Vec<f64> = desc.iter().copied().filter(|&x| x < b).collect();
    if below.is_empty() || b <= 0.0 {
        return Ok(Outcome::skipped());
    }
    let a = *below.choose(rng).unwrap();
    if a <= 0.0 {
        return Ok(Outcome::skipped());
    }
    let small: BTreeSet<usize> = (0..n).filter(|&i| d[i] <= a).collect();
    let big: BTreeSet<usize> = (0..n).filter(|&i| d[i] >= b).collect();
    let hypotheses = 2 * big.len() >= n
        && small.is_disjoint(&big)
        && small.iter().all(|&i| d[i] <= a)
        && big.iter().all(|&i| d[i] >= b);
    if !hypotheses {
        return Ok(Outcome::skipped());
    }
    let tau = a * log_uniform(rng, 1e-3, 1e3);
    let q = q_sets(&m, &small, tau, a, b, r)?;
    let bound = small.len() * binomial(half, r - 1);
    let got = q.union_len();
    let failures = if got >= bound {
        vec![]
    } else {
        vec![format!("n={n}, r={r}, |I|={}: |Q1 ∪ Q2| = {got} < {bound}", small.len())]
    };
    Ok(Outcome::checked(1, failures, None))
}

/// Random graph on `[n]` avoiding `i`, each pair present with probability `p`.
fn random_graph(rng: &mut ChaCha8Rng, n: usize, i: usize, p: f64) -> Graph {
    let mut g = Graph::new(n);
    for j in 0..n {
        for k in j + 1..n {
            if j != i && k != i && rng.gen_bool(p) {
                g.add_edge(j, k).expect("valid pair");
            }
        }
    }
    g
}

fn edge_interval_instance(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let n = rng.gen_range(2..=12);
    let i = rng.gen_range(0..n);
    let p = rng.gen_range(0.05..0.95);
    let g = random_graph(rng, n, i, p);
    let depth = (g.edge_count() + 1).next_power_of_two().trailing_zeros() as usize + 2;
    let dec = greedy_decomposition(&g, i, depth, DecompositionMode::Exact)?;
    let mut failures = vec![];
    let mut checks = 0;
    for k in 1..=depth {
        for l in 1..=k {
            checks += 1;
            let scale = 2f64.powi(l as i32);
            let ek = dec.e(k).len() as f64;
            let earlier = dec.e(k - l).len() as f64;
            if !(scale * ek <= earlier && earlier <= scale * ek + 2.0 * scale * n as f64) {
                failures.push(format!(
                    "n={n}, |E|={}, k={k}, ℓ={l}: |E_k|={ek}, |E_(k-ℓ)|={earlier}",
                    g.edge_count()
                ));
            }
        }
    }
    Ok(Outcome::checked(checks, failures, None))
}

fn low_value_instance(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let n = rng.gen_range(3..=12);
    let m = sample_matrix_with(continuous_kind(rng), n, rng)?;
    let mut failures = vec![];
    let mut checks = 0;
    let mut worst: f64 = 0.0;
    for level in 1..=3 {
        let values = matrix_vertex_values(&m, level, DecompositionMode::Exact)?;
        for bound in 1..=n {
            checks += 1;
            let count = values.iter().filter(|&&v| v <= bound as f64).count();
            worst = worst.max(count as f64 / (16 * bound) as f64);
            if count > 16 * bound {
                failures.push(format!("n={n}, L={level}, N={bound}: count {count}"));
            }
        }
    }
    checks += 1;
    if !triple_property_holds(&m)? {
        failures.push(format!("n={n}: triple property fails"));
    }
    Ok(Outcome::checked(checks, failures, Some(worst)))
}

/// `G` keeps a random part of `G̃` and adds at most `⌊16^{−L}n²⌋` edges
/// outside it.
fn dichotomy_instance(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let n = rng.gen_range(3..=12);
    let level = rng.gen_range(1..=2);
    let i = rng.gen_range(0..n);
    let p = rng.gen_range(0.05..0.95);
    let g_tilde = random_graph(rng, n, i, p);
    let keep = rng.gen_range(0.5..=1.0);
    let mut g = Graph::new(n);
    for (j, k) in g_tilde.edges() {
        if rng.gen_bool(keep) {
            g.add_edge(j, k)?;
        }
    }
    let allowed = (n * n) as f64 / 16f64.powi(level as i32);
    let mut outside: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (j + 1..n).map(move |k| (j, k)))
        .filter(|&(j, k)| j != i && k != i && !g_tilde.has_edge(j, k))
        .collect();
    outside.shuffle(rng);
    let extra = rng.gen_range(0..=allowed.floor() as usize).min(outside.len());
    for &(j, k) in &outside[..extra] {
        g.add_edge(j, k)?;
    }
    let report = two_graphs_dichotomy(&g, &g_tilde, i, level)?;
    let failures = if report.holds() {
        vec![]
    } else {
        vec![format!("n={n}, L={level}: {report:?}")]
    };
    Ok(Outcome::checked(1, failures, None))
}

fn alpharho_instance(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let st = random_structure(rng, 4, 5, 3, 3)?;
    let check = st.verify_alpharho()?;
    let failures = if check.holds {
        vec![]
    } else {
        vec![format!("lhs {} > rhs {}", check.lhs, check.rhs)]
    };
    Ok(Outcome::checked(1, failures, Some(check.lhs / check.rhs)))
}

/// Inverse by Gauss–Jordan elimination with partial pivoting; `None` when a
/// pivot vanishes.
pub fn gauss_jordan_inverse(b: &Matrix) -> Option<Matrix> {
    let n = b.n();
    let mut a: Vec<Vec<f64>> = b.rows().map(<[f64]>::to_vec).collect();
    let mut inv: Vec<Vec<f64>> = Matrix::identity(n).rows().map(<[f64]>::to_vec).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col];
        a[col].iter_mut().for_each(|v| *v /= p);
        inv[col].iter_mut().for_each(|v| *v /= p);
        for row in 0..n {
            if row != col {
                let f = a[row][col];
                if f != 0.0 {
                    for j in 0..n {
                        a[row][j] -= f * a[col][j];
                        inv[row][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Matrix::from_rows(inv).ok()
}

fn biorthogonality_instance(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let n = rng.gen_range(2..=50);
    let kind = *RowDistribution::ALL.choose(rng).unwrap();
    let (m, inv) = loop {
        let m = sample_matrix_with(kind, n, rng)?;
        if spectrum(&m).is_singular() {
            continue;
        }
        if let Some(inv) = gauss_jordan_inverse(&m) {
            break (m, inv);
        }
    };
    let d = row_distances(&m);
    if d.contains(&0.0) {
        return Ok(Outcome::skipped());
    }
    let col_err = (0..n)
        .map(|i| (norm(&inv.column(i)) * d[i] - 1.0).abs())
        .fold(0.0, f64::max);
    let hs = spectrum(&m).hs_inverse;
    let sum: f64 = d.iter().map(|x| 1.0 / (x * x)).sum();
    let hs_err = ((hs * hs - sum) / (hs * hs)).abs();
    let worst = col_err.max(hs_err);
    let failures = if worst <= BIORTHOGONALITY_TOLERANCE {
        vec![]
    } else {
        vec![format!("n={n}, {kind}: column error {col_err:e}, HS error {hs_err:e}")]
    };
    Ok(Outcome::checked(1, failures, Some(worst)))
}
