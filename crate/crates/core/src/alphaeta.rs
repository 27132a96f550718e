//! (α,η)-structures on finite product probability spaces.
//!
//! A structure fixes, for every coordinate `i`, a partition of the whole
//! space into classes indexed by `Ψ` and a partition of an event `E` into
//! cells indexed by `Λ`. From these:
//!
//! * `♯ψ` is the largest number of coordinates whose `ψ`-classes share a
//!   point;
//! * `η(i, ω)` is the class whose section through `ω` along coordinate `i`
//!   is most probable (ties go to the largest `ψ`);
//! * `α(i, ω)` is the reciprocal probability of the section of `ω`'s own
//!   event cell along coordinate `i`.
//!
//! [`AlphaEtaStructure::verify_alpharho`] evaluates
//! `Σ_{ω∈E} P(ω) Σ_i α(i,ω)/♯η(i,ω)` exactly and compares it with
//! `|Ψ|²|Λ|`.
//!
//! Atoms of the product are addressed by a linear index in row-major order,
//! the last factor varying fastest.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of atoms in a product space.
pub const DEFAULT_ATOM_BUDGET: usize = 1_000_000;
/// Cap used by [`cube_example_structure`], whose reference discretization
/// (`40⁴` atoms) exceeds the default.
pub const CUBE_ATOM_BUDGET: usize = 4_000_000;
/// Slack on the inequality to absorb summation rounding.
pub const ALPHARHO_SLACK: f64 = 1e-9;

const PROB_SUM_TOL: f64 = 1e-12;
const OUTSIDE: u16 = u16::MAX;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteProductSpace {
    factors: Vec<Vec<f64>>,
    strides: Vec<usize>,
    atoms: usize,
}

impl DiscreteProductSpace {
    pub fn new(factors: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_budget(factors, DEFAULT_ATOM_BUDGET)
    }

    /// Validates that each factor's probabilities are positive and sum to 1
    /// within `1e−12`, and that the product has at most `budget` atoms.
    pub fn with_budget(factors: Vec<Vec<f64>>, budget: usize) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("product space needs at least one factor"));
        }
        let mut atoms: usize = 1;
        for (i, f) in factors.iter().enumerate() {
            if f.is_empty() {
                return Err(Error::invalid(format!("factor {i} has no atoms")));
            }
            if f.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
                return Err(Error::invalid(format!("factor {i} has a non-positive probability")));
            }
            let total: f64 = f.iter().sum();
            if (total - 1.0).abs() > PROB_SUM_TOL {
                return Err(Error::invalid(format!(
                    "factor {i} probabilities sum to {total}, not 1"
                )));
            }
            atoms = atoms
                .checked_mul(f.len())
                .filter(|&a| a <= budget)
                .ok_or(Error::UnsupportedSize {
                    what: "product atom count",
                    got: factors.iter().fold(1usize, |a, f| a.saturating_mul(f.len())),
                    max: budget,
                })?;
        }
        let mut strides = vec![1; factors.len()];
        for i in (0..factors.len() - 1).rev() {
            strides[i] = strides[i + 1] * factors[i + 1].len();
        }
        Ok(Self {
            factors,
            strides,
            atoms,
        })
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn atom_count(&self) -> usize {
        self.atoms
    }

    pub fn factor(&self, i: usize) -> &[f64] {
        &self.factors[i]
    }

    pub fn coordinate(&self, atom: usize, i: usize) -> usize {
        (atom / self.strides[i]) % self.factors[i].len()
    }

    pub fn coordinates(&self, atom: usize) -> Vec<usize> {
        (0..self.n()).map(|i| self.coordinate(atom, i)).collect()
    }

    pub fn atom_index(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.n() {
            return Err(Error::invalid(format!(
                "expected {} coordinates, got {}",
                self.n(),
                coords.len()
            )));
        }
        coords.iter().enumerate().try_fold(0, |acc, (i, &c)| {
            if c >= self.factors[i].len() {
                Err(Error::invalid(format!("coordinate {i} = {c} out of range")))
            } else {
                Ok(acc + c * self.strides[i])
            }
        })
    }

    /// `atom` with its `i`-th coordinate replaced by `value`.
    pub fn with_coordinate(&self, atom: usize, i: usize, value: usize) -> usize {
        atom - self.coordinate(atom, i) * self.strides[i] + value * self.strides[i]
    }

    pub fn probability(&self, atom: usize) -> f64 {
        (0..self.n())
            .map(|i| self.factors[i][self.coordinate(atom, i)])
            .product()
    }

    fn atom_probabilities(&self) -> Vec<f64> {
        (0..self.atoms).map(|a| self.probability(a)).collect()
    }
}

/// Exact evaluation of the section-sum inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaRhoCheck {
    /// `Σ_{ω∈E} P(ω) Σ_i α(i,ω)/♯η(i,ω)`.
    pub lhs: f64,
    /// `|Ψ|²|Λ|`.
    pub rhs: f64,
    pub holds: bool,
    pub event_probability: f64,
    /// `min_{ω∈E} Σ_i α(i,ω)/♯η(i,ω)`, absent for an empty event.
    pub min_weight: Option<f64>,
}

impl AlphaRhoCheck {
    /// `|Ψ|²|Λ| / min weight`, the bound on `P(E)` implied by a uniform lower
    /// bound on the weights.
    pub fn implied_probability_bound(&self) -> Option<f64> {
        self.min_weight.map(|w| self.rhs / w)
    }
}

/// Serialized form: class and cell labels per atom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureDocument {
    /// Per-factor atom probabilities.
    pub factors: Vec<Vec<f64>>,
    /// Class labels in increasing order.
    pub psi: Vec<i64>,
    /// Event-cell labels in increasing order.
    pub lambda: Vec<i64>,
    /// `classes[i][atom]` is the `ψ` label of the atom's class for coordinate `i`.
    pub classes: Vec<Vec<i64>>,
    /// Atoms of the event, increasing.
    pub event: Vec<usize>,
    /// `event_partition[i][k]` is the `λ` label of `event[k]` for coordinate `i`.
    pub event_partition: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StructureDocument", into = "StructureDocument")]
pub struct AlphaEtaStructure {
    space: DiscreteProductSpace,
    psi: Vec<i64>,
    lambda: Vec<i64>,
    /// `[i][atom]` → position in `psi`.
    classes: Vec<Vec<u16>>,
    in_event: Vec<bool>,
    /// `[i][atom]` → position in `lambda`, `OUTSIDE` off the event.
    cells: Vec<Vec<u16>>,
}

fn check_labels(labels: &[i64], what: &str) -> Result<()> {
    if labels.is_empty() || labels.len() >= OUTSIDE as usize {
        return Err(Error::invalid(format!("{what} must have between 1 and 65534 labels")));
    }
    if labels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("{what} labels must be strictly increasing")));
    }
    Ok(())
}

impl AlphaEtaStructure {
    /// Builds a structure from class and cell functions.
    ///
    /// `class_of(i, atom)` returns a position in `psi`; `cell_of(i, atom)`
    /// returns `Some(position in lambda)` for atoms of the event and `None`
    /// elsewhere. Membership in the event must not depend on `i`.
    pub fn from_fns(
        space: DiscreteProductSpace,
        psi: Vec<i64>,
        lambda: Vec<i64>,
        mut class_of: impl FnMut(usize, usize) -> usize,
        mut cell_of: impl FnMut(usize, usize) -> Option<usize>,
    ) -> Result<Self> {
        check_labels(&psi, "Ψ")?;
        check_labels(&lambda, "Λ")?;
        let n = space.n();
        let atoms = space.atom_count();
        let mut classes = vec![vec![0u16; atoms]; n];
        let mut cells = vec![vec![OUTSIDE; atoms]; n];
        let mut in_event = vec![false; atoms];
        for atom in 0..atoms {
            for i in 0..n {
                let c = class_of(i, atom);
                if c >= psi.len() {
                    return Err(Error::invalid(format!("class index {c} out of range")));
                }
                classes[i][atom] = c as u16;
                let cell = cell_of(i, atom);
                if i == 0 {
                    in_event[atom] = cell.is_some();
                } else if cell.is_some() != in_event[atom] {
                    return Err(Error::invalid(format!(
                        "atom {atom}: event membership differs between coordinates"
                    )));
                }
                if let Some(l) = cell {
                    if l >= lambda.len() {
                        return Err(Error::invalid(format!("cell index {l} out of range")));
                    }
                    cells[i][atom] = l as u16;
                }
            }
        }
        Ok(Self {
            space,
            psi,
            lambda,
            classes,
            in_event,
            cells,
        })
    }

    pub fn space(&self) -> &DiscreteProductSpace {
        &self.space
    }

    pub fn psi(&self) -> &[i64] {
        &self.psi
    }

    pub fn lambda(&self) -> &[i64] {
        &self.lambda
    }

    pub fn in_event(&self, atom: usize) -> bool {
        self.in_event[atom]
    }

    /// `ψ` label of the class containing `atom` for coordinate `i`.
    pub fn class_label(&self, i: usize, atom: usize) -> i64 {
        self.psi[self.classes[i][atom] as usize]
    }

    /// `λ` label of the event cell containing `atom` for coordinate `i`.
    pub fn cell_label(&self, i: usize, atom: usize) -> Option<i64> {
        match self.cells[i][atom] {
            OUTSIDE => None,
            l => Some(self.lambda[l as usize]),
        }
    }

    pub fn event_probability(&self) -> f64 {
        let mut s = CompensatedSum::default();
        for atom in (0..self.space.atom_count()).filter(|&a| self.in_event[a]) {
            s.add(self.space.probability(atom));
        }
        s.value()
    }

    fn psi_position(&self, label: i64) -> Result<usize> {
        self.psi
            .binary_search(&label)
            .map_err(|_| Error::invalid(format!("unknown class label {label}")))
    }

    fn check_point(&self, i: usize, atom: usize) -> Result<()> {
        if i >= self.space.n() {
            return Err(Error::invalid(format!("coordinate {i} out of range")));
        }
        if atom >= self.space.atom_count() {
            return Err(Error::invalid(format!("atom {atom} out of range")));
        }
        Ok(())
    }

    /// `♯ψ` for every class position, in one pass over the atoms.
    pub fn sharps(&self) -> Vec<usize> {
        let n = self.space.n();
        let mut best = vec![0usize; self.psi.len()];
        let mut counts = vec![0usize; self.psi.len()];
        for atom in 0..self.space.atom_count() {
            counts.iter_mut().for_each(|c| *c = 0);
            for i in 0..n {
                counts[self.classes[i][atom] as usize] += 1;
            }
            for (b, &c) in best.iter_mut().zip(&counts) {
                *b = (*b).max(c);
            }
        }
        best
    }

    /// Smallest `s` such that the `ψ`-classes of any `s + 1` coordinates have
    /// empty intersection; `0` when the class is empty for every coordinate.
    pub fn sharp(&self, psi: i64) -> Result<usize> {
        let p = self.psi_position(psi)?;
        Ok(self.sharps()[p])
    }

    /// Probabilities of the sections through `atom` along `i`, per class.
    fn class_sections(&self, i: usize, atom: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.psi.len()];
        for (a, &p) in self.space.factor(i).iter().enumerate() {
            let other = self.space.with_coordinate(atom, i, a);
            out[self.classes[i][other] as usize] += p;
        }
        out
    }

    /// Position of the most probable section; ties go to the largest.
    fn argmax_last(values: &[f64]) -> usize {
        let mut best = 0;
        for (k, &v) in values.iter().enumerate() {
            if v >= values[best] {
                best = k;
            }
        }
        best
    }

    /// `η(i, ω)` as a `ψ` label.
    pub fn eta(&self, i: usize, atom: usize) -> Result<i64> {
        self.check_point(i, atom)?;
        let sections = self.class_sections(i, atom);
        Ok(self.psi[Self::argmax_last(&sections)])
    }

    /// Probability of the `η(i, ω)` section through `atom`.
    pub fn eta_section_probability(&self, i: usize, atom: usize) -> Result<f64> {
        self.check_point(i, atom)?;
        let sections = self.class_sections(i, atom);
        Ok(sections[Self::argmax_last(&sections)])
    }

    /// `α(i, ω)`: reciprocal probability of the section of `ω`'s event cell
    /// along coordinate `i`.
    pub fn alpha(&self, i: usize, atom: usize) -> Result<f64> {
        self.check_point(i, atom)?;
        if !self.in_event[atom] {
            return Err(Error::invalid(format!("atom {atom} is not in the event")));
        }
        let cell = self.cells[i][atom];
        let section: f64 = self
            .space
            .factor(i)
            .iter()
            .enumerate()
            .filter(|&(a, _)| self.cells[i][self.space.with_coordinate(atom, i, a)] == cell)
            .map(|(_, &p)| p)
            .sum();
        Ok(1.0 / section)
    }

    /// `Σ_i α(i,ω)/♯η(i,ω)` at a single event atom.
    pub fn weight(&self, atom: usize) -> Result<f64> {
        let sharps = self.sharps();
        (0..self.space.n()).try_fold(0.0, |acc, i| {
            let eta = self.psi_position(self.eta(i, atom)?)?;
            match sharps[eta] {
                0 => Err(Error::Degenerate(format!("♯η = 0 at atom {atom}, coordinate {i}"))),
                s => Ok(acc + self.alpha(i, atom)? / s as f64),
            }
        })
    }

    /// Exact evaluation of `Σ_{ω∈E} P(ω) Σ_i α(i,ω)/♯η(i,ω) ≤ |Ψ|²|Λ|`.
    ///
    /// Works line by line: along each coordinate line the class and cell
    /// section probabilities are shared by all atoms of the line.
    pub fn verify_alpharho(&self) -> Result<AlphaRhoCheck> {
        let n = self.space.n();
        let atoms = self.space.atom_count();
        let sharps = self.sharps();
        let probs = self.space.atom_probabilities();
        let mut weights = vec![0.0f64; atoms];
        let mut class_sec = vec![0.0; self.psi.len()];
        let mut cell_sec = vec![0.0; self.lambda.len()];

        for i in 0..n {
            let factor = self.space.factor(i);
            for base in (0..atoms).filter(|&a| self.space.coordinate(a, i) == 0) {
                let line = |a: usize| base + a * self.space.strides[i];
                class_sec.iter_mut().for_each(|v| *v = 0.0);
                cell_sec.iter_mut().for_each(|v| *v = 0.0);
                let mut any_event = false;
                for (a, &p) in factor.iter().enumerate() {
                    let atom = line(a);
                    class_sec[self.classes[i][atom] as usize] += p;
                    if self.in_event[atom] {
                        any_event = true;
                        cell_sec[self.cells[i][atom] as usize] += p;
                    }
                }
                if !any_event {
                    continue;
                }
                let sharp = sharps[Self::argmax_last(&class_sec)];
                if sharp == 0 {
                    return Err(Error::Degenerate(format!(
                        "♯η = 0 on the line through atom {base} along coordinate {i}"
                    )));
                }
                for a in 0..factor.len() {
                    let atom = line(a);
                    if self.in_event[atom] {
                        let alpha = 1.0 / cell_sec[self.cells[i][atom] as usize];
                        weights[atom] += alpha / sharp as f64;
                    }
                }
            }
        }

        let mut lhs = CompensatedSum::default();
        let mut pe = CompensatedSum::default();
        let mut min_weight: Option<f64> = None;
        for atom in (0..atoms).filter(|&a| self.in_event[a]) {
            lhs.add(probs[atom] * weights[atom]);
            pe.add(probs[atom]);
            min_weight = Some(min_weight.map_or(weights[atom], |m| m.min(weights[atom])));
        }
        let rhs = (self.psi.len() * self.psi.len() * self.lambda.len()) as f64;
        let lhs = lhs.value();
        Ok(AlphaRhoCheck {
            lhs,
            rhs,
            holds: lhs <= rhs + ALPHARHO_SLACK,
            event_probability: pe.value(),
            min_weight,
        })
    }
}

impl TryFrom<StructureDocument> for AlphaEtaStructure {
    type Error = Error;

    fn try_from(doc: StructureDocument) -> Result<Self> {
        let space = DiscreteProductSpace::new(doc.factors)?;
        let (n, atoms) = (space.n(), space.atom_count());
        check_labels(&doc.psi, "Ψ")?;
        check_labels(&doc.lambda, "Λ")?;
        if doc.classes.len() != n || doc.classes.iter().any(|c| c.len() != atoms) {
            return Err(Error::invalid(format!(
                "classes must list {atoms} labels for each of {n} coordinates"
            )));
        }
        if doc.event.windows(2).any(|w| w[0] >= w[1]) || doc.event.iter().any(|&a| a >= atoms) {
            return Err(Error::invalid("event atoms must be increasing and in range"));
        }
        if doc.event_partition.len() != n
            || doc.event_partition.iter().any(|p| p.len() != doc.event.len())
        {
            return Err(Error::invalid(format!(
                "event_partition must list {} labels for each of {n} coordinates",
                doc.event.len()
            )));
        }
        let find = |labels: &[i64], l: i64, what: &str| -> Result<usize> {
            labels
                .binary_search(&l)
                .map_err(|_| Error::invalid(format!("unknown {what} label {l}")))
        };
        let mut class_pos = vec![vec![0usize; atoms]; n];
        for i in 0..n {
            for a in 0..atoms {
                class_pos[i][a] = find(&doc.psi, doc.classes[i][a], "Ψ")?;
            }
        }
        let mut cell_pos = vec![vec![None; atoms]; n];
        for i in 0..n {
            for (k, &a) in doc.event.iter().enumerate() {
                cell_pos[i][a] = Some(find(&doc.lambda, doc.event_partition[i][k], "Λ")?);
            }
        }
        Self::from_fns(
            space,
            doc.psi,
            doc.lambda,
            |i, a| class_pos[i][a],
            |i, a| cell_pos[i][a],
        )
    }
}

impl From<AlphaEtaStructure> for StructureDocument {
    fn from(s: AlphaEtaStructure) -> Self {
        let n = s.space.n();
        let atoms = s.space.atom_count();
        let event: Vec<usize> = (0..atoms).filter(|&a| s.in_event[a]).collect();
        StructureDocument {
            classes: (0..n)
                .map(|i| (0..atoms).map(|a| s.class_label(i, a)).collect())
                .collect(),
            event_partition: (0..n)
                .map(|i| event.iter().map(|&a| s.cell_label(i, a).unwrap()).collect())
                .collect(),
            event,
            factors: s.space.factors,
            psi: s.psi,
            lambda: s.lambda,
        }
    }
}

/// The uniform discrete cube `{0,…,m−1}ⁿ` (atom `a` standing for
/// `[a/m, (a+1)/m)`), with the event "one of the first `n − √n` coordinates is
/// below `1/(Kn)` or one of the last `√n` is below `1/(K√n)`".
///
/// Classes: coordinate `i` lies entirely in class 1 for `i < n − √n` and in
/// class 2 otherwise; a single event cell. Both thresholds must be integer
/// multiples of `1/m`.
pub fn cube_example_structure(n: usize, k: f64, m: usize) -> Result<AlphaEtaStructure> {
    let s = (n as f64).sqrt().round() as usize;
    if n < 4 || s * s != n {
        return Err(Error::invalid(format!("n must be a perfect square >= 4, got {n}")));
    }
    if !(k > 1.0 && k.is_finite()) {
        return Err(Error::invalid(format!("K must exceed 1, got {k}")));
    }
    if m == 0 {
        return Err(Error::invalid("need at least one atom per factor"));
    }
    let atoms_below = |threshold: f64| -> Result<usize> {
        let q = m as f64 * threshold;
        let r = q.round();
        if (q - r).abs() > 1e-9 * q.max(1.0) || r > m as f64 {
            return Err(Error::invalid(format!(
                "threshold {threshold} is not a multiple of 1/{m} within the cube"
            )));
        }
        Ok(r as usize)
    };
    let q_head = atoms_below(1.0 / (k * n as f64))?;
    let q_tail = atoms_below(1.0 / (k * s as f64))?;
    let space = DiscreteProductSpace::with_budget(vec![vec![1.0 / m as f64; m]; n], CUBE_ATOM_BUDGET)?;
    let head = n - s;
    let in_event = |atom: usize| -> bool {
        (0..n).any(|i| {
            let c = space.coordinate(atom, i);
            if i < head {
                c < q_head
            } else {
                c < q_tail
            }
        })
    };
    let flags: Vec<bool> = (0..space.atom_count()).map(in_event).collect();
    AlphaEtaStructure::from_fns(
        space.clone(),
        vec![1, 2],
        vec![1],
        |i, _| usize::from(i >= head),
        |_, atom| flags[atom].then_some(0),
    )
}

/// Random structure for property suites: `1..=max_n` factors with
/// `1..=max_atoms` atoms each, random positive probabilities, `1..=max_psi`
/// classes and `1..=max_lambda` cells assigned uniformly per atom, and a
/// random event.
pub fn random_structure(
    rng: &mut impl Rng,
    max_n: usize,
    max_atoms: usize,
    max_psi: usize,
    max_lambda: usize,
) -> Result<AlphaEtaStructure> {
    let n = rng.gen_range(1..=max_n);
    let factors: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let m = rng.gen_range(1..=max_atoms);
            let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|x| x / total).collect()
        })
        .collect();
    let space = DiscreteProductSpace::new(factors)?;
    let n_psi = rng.gen_range(1..=max_psi);
    let n_lambda = rng.gen_range(1..=max_lambda);
    let atoms = space.atom_count();
    let event_density: f64 = rng.gen_range(0.1..1.0);
    let classes: Vec<Vec<usize>> = (0..n)
        .map(|_| (0..atoms).map(|_| rng.gen_range(0..n_psi)).collect())
        .collect();
    let event: Vec<bool> = (0..atoms).map(|_| rng.gen_bool(event_density)).collect();
    let cells: Vec<Vec<usize>> = (0..n)
        .map(|_| (0..atoms).map(|_| rng.gen_range(0..n_lambda)).collect())
        .collect();
    AlphaEtaStructure::from_fns(
        space,
        (1..=n_psi as i64).collect(),
        (1..=n_lambda as i64).collect(),
        |i, a| classes[i][a],
        |i, a| event[a].then_some(cells[i][a]),
    )
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn uniform(n: usize, m: usize) -> DiscreteProductSpace {
        DiscreteProductSpace::new(vec![vec![1.0 / m as f64; m]; n]).unwrap()
    }

    #[test]
    fn space_validation() {
        assert!(DiscreteProductSpace::new(vec![vec![0.5, 0.4]]).is_err());
        assert!(DiscreteProductSpace::new(vec![vec![1.0, 0.0]]).is_err());
        assert!(DiscreteProductSpace::new(vec![]).is_err());
        let err = DiscreteProductSpace::new(vec![vec![0.5, 0.5]; 21]).unwrap_err();
        assert!(matches!(err, Error::UnsupportedSize { .. }));
    }

    #[test]
    fn coordinates_round_trip() {
        let s = DiscreteProductSpace::new(vec![vec![0.5, 0.5], vec![1.0 / 3.0; 3], vec![1.0]]).unwrap();
        for atom in 0..s.atom_count() {
            assert_eq!(s.atom_index(&s.coordinates(atom)).unwrap(), atom);
        }
        assert_eq!(s.coordinates(5), vec![1, 2, 0]);
        assert_eq!(s.with_coordinate(5, 1, 0), 3);
    }

    #[test]
    fn whole_space_classes_give_sharp_n() {
        let st = AlphaEtaStructure::from_fns(uniform(3, 2), vec![7], vec![1], |_, _| 0, |_, _| Some(0))
            .unwrap();
        assert_eq!(st.sharp(7).unwrap(), 3);
        assert!(st.sharp(8).is_err());
        assert_eq!(st.eta(1, 4).unwrap(), 7);
        for atom in 0..8 {
            assert_eq!(st.alpha(0, atom).unwrap(), 1.0);
        }
    }

    #[test]
    fn empty_classes_have_sharp_zero() {
        let st = AlphaEtaStructure::from_fns(uniform(2, 2), vec![1, 2], vec![1], |_, _| 0, |_, _| None)
            .unwrap();
        assert_eq!(st.sharp(2).unwrap(), 0);
        let check = st.verify_alpharho().unwrap();
        assert_eq!(check.lhs, 0.0);
        assert!(check.holds);
        assert_eq!(check.min_weight, None);
    }

    #[test]
    fn single_atom_section_has_alpha_one_over_p() {
        let space = DiscreteProductSpace::new(vec![vec![0.2, 0.3, 0.5], vec![0.5, 0.5]]).unwrap();
        // event cell of each atom for coordinate 0 is its own coordinate value
        let st = AlphaEtaStructure::from_fns(
            space.clone(),
            vec![1],
            vec![0, 1, 2],
            |_, _| 0,
            |_, a| Some(space.coordinate(a, 0)),
        )
        .unwrap();
        assert_relative_eq!(st.alpha(0, space.atom_index(&[0, 1]).unwrap()).unwrap(), 5.0);
        assert_relative_eq!(st.alpha(0, space.atom_index(&[2, 0]).unwrap()).unwrap(), 2.0);
        // along coordinate 1 every section stays in one cell
        assert_relative_eq!(st.alpha(1, space.atom_index(&[1, 1]).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn eta_ties_go_to_largest_label() {
        let space = uniform(1, 2);
        let st = AlphaEtaStructure::from_fns(space, vec![3, 9], vec![1], |_, a| a, |_, _| None).unwrap();
        assert_eq!(st.eta(0, 0).unwrap(), 9);
        assert_eq!(st.eta(0, 1).unwrap(), 9);
    }

    #[test]
    fn alpha_requires_event_membership() {
        let st = AlphaEtaStructure::from_fns(uniform(2, 2), vec![1], vec![1], |_, _| 0, |_, a| (a == 0).then_some(0))
            .unwrap();
        assert!(st.alpha(0, 3).is_err());
    }

    #[test]
    fn cube_example() {
        let st = cube_example_structure(4, 10.0, 40).unwrap();
        let pe = st.event_probability();
        let closed = 1.0 - (39.0f64 / 40.0).powi(2) * (38.0f64 / 40.0).powi(2);
        assert_relative_eq!(pe, closed, max_relative = 1e-12);
        assert_relative_eq!(pe, 0.14206, max_relative = 1e-4);
        assert_eq!(st.sharp(1).unwrap(), 2);
        assert_eq!(st.sharp(2).unwrap(), 2);
        assert_eq!(st.eta(0, 12345).unwrap(), 1);
        assert_eq!(st.eta(3, 12345).unwrap(), 2);
        let check = st.verify_alpharho().unwrap();
        assert!(check.holds && check.lhs <= 4.0);
        assert_relative_eq!(check.event_probability, pe, max_relative = 1e-12);
        assert!(pe <= 4.0 / 10.0);
        // one small coordinate: its own term alone is at least K
        let single = st.space().atom_index(&[0, 20, 20, 20]).unwrap();
        assert_relative_eq!(st.weight(single).unwrap(), 40.0 / 2.0 + 3.0 / 2.0, max_relative = 1e-12);
        // two small coordinates: every section is a full line
        let double = st.space().atom_index(&[0, 0, 20, 20]).unwrap();
        assert_relative_eq!(st.weight(double).unwrap(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(check.min_weight.unwrap(), 2.0, max_relative = 1e-12);
        assert!(pe <= check.implied_probability_bound().unwrap());
    }

    #[test]
    fn cube_rejects_bad_discretization() {
        assert!(cube_example_structure(4, 10.0, 30).is_err());
        assert!(cube_example_structure(5, 10.0, 40).is_err());
        assert!(cube_example_structure(4, 1.0, 40).is_err());
    }

    #[test]
    fn line_sum_matches_pointwise_definitions() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let st = random_structure(&mut rng, 3, 4, 3, 3).unwrap();
            let sharps = st.sharps();
            let mut naive = 0.0;
            for atom in (0..st.space().atom_count()).filter(|&a| st.in_event(a)) {
                let mut w = 0.0;
                for i in 0..st.space().n() {
                    let eta = st.eta(i, atom).unwrap();
                    let pos = st.psi().binary_search(&eta).unwrap();
                    w += st.alpha(i, atom).unwrap() / sharps[pos] as f64;
                }
                naive += st.space().probability(atom) * w;
            }
            let check = st.verify_alpharho().unwrap();
            assert_relative_eq!(check.lhs, naive, max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let st = random_structure(&mut rng, 3, 3, 3, 2).unwrap();
        let text = serde_json::to_string(&st).unwrap();
        let back: AlphaEtaStructure = serde_json::from_str(&text).unwrap();
        assert_eq!(back, st);
    }

    #[test]
    fn json_rejects_unknown_labels() {
        let doc = StructureDocument {
            factors: vec![vec![0.5, 0.5]],
            psi: vec![1],
            lambda: vec![1],
            classes: vec![vec![1, 2]],
            event: vec![0],
            event_partition: vec![vec![1]],
        };
        assert!(AlphaEtaStructure::try_from(doc).is_err());
    }
}
