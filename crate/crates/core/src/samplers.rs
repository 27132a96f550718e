//! Row distributions, shift matrices, and seeded matrix sampling.
//!
//! Every random stream is keyed by `(master_seed, trial_index)`: ChaCha8 is a
//! counter-based generator, the master seed fixes the key and the trial index
//! selects an independent stream, so a trial draws the same numbers no matter
//! which worker runs it.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Law of the rows of the random matrix. All continuous kinds are isotropic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowDistribution {
    /// i.i.d. standard normal entries.
    Gaussian,
    /// i.i.d. fair ±1 entries.
    Bernoulli,
    /// i.i.d. uniform entries on `[−√3, √3]`.
    UniformEntry,
    /// i.i.d. two-sided exponential entries with unit variance, density
    /// `(1/√2) e^{−√2|x|}`.
    SymmetricExponential,
    /// Row uniform on the centered Euclidean ball of radius `√(n+2)`.
    BallUniform,
}

impl RowDistribution {
    pub const ALL: [RowDistribution; 5] = [
        RowDistribution::Gaussian,
        RowDistribution::Bernoulli,
        RowDistribution::UniformEntry,
        RowDistribution::SymmetricExponential,
        RowDistribution::BallUniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RowDistribution::Gaussian => "gaussian",
            RowDistribution::Bernoulli => "bernoulli",
            RowDistribution::UniformEntry => "uniform_entry",
            RowDistribution::SymmetricExponential => "symmetric_exponential",
            RowDistribution::BallUniform => "ball_uniform",
        }
    }

    pub fn is_continuous(self) -> bool {
        self != RowDistribution::Bernoulli
    }

    /// Supremum of the density of a single entry (one-dimensional projection
    /// onto a coordinate axis), where it is known in closed form.
    ///
    /// For i.i.d. entries this bounds every one-dimensional projection up to
    /// a universal factor. Bernoulli has no density; the ball marginal
    /// depends on `n`.
    pub fn density_bound(self) -> Option<f64> {
        match self {
            RowDistribution::Gaussian => Some(1.0 / (2.0 * std::f64::consts::PI).sqrt()),
            RowDistribution::UniformEntry => Some(1.0 / (2.0 * 3f64.sqrt())),
            RowDistribution::SymmetricExponential => Some(std::f64::consts::FRAC_1_SQRT_2),
            RowDistribution::Bernoulli | RowDistribution::BallUniform => None,
        }
    }

    fn fill_row(self, rng: &mut ChaCha8Rng, row: &mut [f64]) {
        match self {
            RowDistribution::Gaussian => {
                row.iter_mut().for_each(|v| *v = StandardNormal.sample(rng));
            }
            RowDistribution::Bernoulli => {
                row.iter_mut()
                    .for_each(|v| *v = if rng.gen::<bool>() { 1.0 } else { -1.0 });
            }
            RowDistribution::UniformEntry => {
                let h = 3f64.sqrt();
                row.iter_mut().for_each(|v| *v = rng.gen_range(-h..h));
            }
            RowDistribution::SymmetricExponential => {
                row.iter_mut().for_each(|v| {
                    let e: f64 = Exp1.sample(rng);
                    let s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                    *v = s * e * std::f64::consts::FRAC_1_SQRT_2;
                });
            }
            RowDistribution::BallUniform => {
                let n = row.len();
                loop {
                    row.iter_mut().for_each(|v| *v = StandardNormal.sample(rng));
                    let len = crate::linalg::norm(row);
                    if len > 0.0 {
                        let u: f64 = rng.gen();
                        let radius = ((n + 2) as f64).sqrt() * u.powf(1.0 / n as f64);
                        row.iter_mut().for_each(|v| *v *= radius / len);
                        break;
                    }
                }
            }
        }
    }
}

impl fmt::Display for RowDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RowDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        RowDistribution::ALL
            .into_iter()
            .find(|d| d.name() == key)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown distribution '{s}' (expected one of gaussian, bernoulli, \
                     uniform_entry, symmetric_exponential, ball_uniform)"
                ))
            })
    }
}

/// The fixed (deterministic) shift added to the random matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftSpec {
    Zero,
    ScaledIdentity(f64),
    Diagonal(Vec<f64>),
    Explicit(Matrix),
    /// `diag(τ, …, τ, 0, 0)`: the shift under which Bernoulli matrices stay
    /// badly conditioned.
    Counterexample(f64),
}

impl ShiftSpec {
    /// Short label for result files.
    pub fn label(&self) -> String {
        match self {
            ShiftSpec::Zero => "zero".into(),
            ShiftSpec::ScaledIdentity(t) => format!("scaled_identity({t})"),
            ShiftSpec::Diagonal(v) => format!("diagonal(len={})", v.len()),
            ShiftSpec::Explicit(m) => format!("explicit({0}x{0})", m.n()),
            ShiftSpec::Counterexample(t) => format!("counterexample({t})"),
        }
    }
}

impl FromStr for ShiftSpec {
    type Err = Error;

    /// `zero`, `identity:τ`, `diag:v1,v2,…`, or `counterexample:τ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let number = |a: &str| -> Result<f64> {
            a.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad number '{a}' in shift '{s}'")))
        };
        match kind.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "zero" if arg.is_empty() => Ok(ShiftSpec::Zero),
            "identity" | "scaled_identity" => Ok(ShiftSpec::ScaledIdentity(number(arg)?)),
            "diag" | "diagonal" => Ok(ShiftSpec::Diagonal(
                arg.split(',').map(number).collect::<Result<_>>()?,
            )),
            "counterexample" => Ok(ShiftSpec::Counterexample(number(arg)?)),
            _ => Err(Error::invalid(format!(
                "unknown shift '{s}' (expected zero, identity:τ, diag:v1,v2,…, counterexample:τ)"
            ))),
        }
    }
}

/// Key of one trial's random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub trial_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self {
            master_seed,
            trial_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.trial_index);
        rng
    }
}

pub fn sample_matrix(dist: RowDistribution, n: usize, seed: SeedSpec) -> Result<Matrix> {
    let mut rng = seed.rng();
    sample_matrix_with(dist, n, &mut rng)
}

/// Like [`sample_matrix`] but drawing from a caller-supplied stream.
pub fn sample_matrix_with(dist: RowDistribution, n: usize, rng: &mut ChaCha8Rng) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::invalid("matrix dimension must be at least 1"));
    }
    let mut data = vec![0.0; n * n];
    for row in data.chunks_exact_mut(n) {
        dist.fill_row(rng, row);
    }
    Matrix::from_row_major(n, data)
}

pub fn build_shift(spec: &ShiftSpec, n: usize) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::invalid("matrix dimension must be at least 1"));
    }
    match spec {
        ShiftSpec::Zero => Ok(Matrix::zeros(n)),
        ShiftSpec::ScaledIdentity(t) => Matrix::diagonal(&vec![*t; n]),
        ShiftSpec::Diagonal(values) => {
            if values.len() != n {
                return Err(Error::invalid(format!(
                    "diagonal shift has {} entries, expected {n}",
                    values.len()
                )));
            }
            Matrix::diagonal(values)
        }
        ShiftSpec::Explicit(m) => {
            if m.n() != n {
                return Err(Error::invalid(format!(
                    "explicit shift is {0}x{0}, expected {n}x{n}",
                    m.n()
                )));
            }
            Ok(m.clone())
        }
        ShiftSpec::Counterexample(t) => {
            if n < 3 {
                return Err(Error::invalid(format!(
                    "counterexample shift needs n >= 3, got {n}"
                )));
            }
            let mut d = vec![*t; n];
            d[n - 2] = 0.0;
            d[n - 1] = 0.0;
            Matrix::diagonal(&d)
        }
    }
}

/// The almost-null vector of `B + diag(τ,…,τ,0,0)` for a ±1 matrix `B`:
/// `X_i = −(b_{i,n−1} + b_{i,n})/τ` for the first `n−2` coordinates and
/// `X_{n−1} = X_n = 1`. For `τ ≥ n` its norm lies in `[√2, 2)`.
pub fn counterexample_witness(b: &Matrix, tau: f64) -> Result<Vec<f64>> {
    let n = b.n();
    if n < 3 {
        return Err(Error::invalid(format!("witness needs n >= 3, got {n}")));
    }
    if !tau.is_finite() || tau < n as f64 {
        return Err(Error::invalid(format!("witness needs finite τ >= n = {n}, got {tau}")));
    }
    if b.as_slice().iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::invalid("witness needs a matrix with entries in {-1, +1}"));
    }
    let mut x: Vec<f64> = (0..n - 2)
        .map(|i| -(b.get(i, n - 2) + b.get(i, n - 1)) / tau)
        .collect();
    x.extend([1.0, 1.0]);
    Ok(x)
}
