//! Entry laws and matrix ensembles.
//!
//! An [`EntryDistribution`] is one matrix coordinate's law together with the
//! cached quantities the rest of the crate keeps asking for: mean, variance,
//! and the concentration level `L(X, 1) = sup_u P{|X - u| < 1}` at unit
//! scale. A [`MatrixEnsemble`] is an `m x n` grid of such laws (iid, dense,
//! or a rank-one scale profile over a base law) carrying the standing model
//! parameters: the second-moment budget `sum E A_ij^2 <= K m n` and the
//! uniform concentration bound `max_ij L(A_ij, 1) <= b`.
//!
//! Symmetrization `X - X'` (independent copy) is exact for discrete laws
//! (atom convolution), and closed-form for gaussian and uniform laws; it
//! always satisfies `E |X - X'|^2 = 2 Var(X)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

pub use crate::rng::SeedSpec;

/// Merged-atom budget when symmetrizing a discrete law.
const SYMMETRIZE_ATOM_CAP: usize = 100_000;

#[derive(Debug, Error, PartialEq)]
pub enum EnsembleError {
    #[error("discrete law needs at least one atom")]
    EmptyAtomList,
    #[error("atom values must be finite and probabilities finite and nonnegative")]
    InvalidAtom,
    #[error("atom probabilities sum to {sum:.12}, expected 1 within 1e-9")]
    UnnormalizedAtoms { sum: f64 },
    #[error("parameter {name} = {value} outside its valid range")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("symmetrization would need {required} atoms, cap is {cap}")]
    AtomBudget { required: usize, cap: usize },
    #[error("no closed-form symmetrization for this law kind")]
    SymmetrizeUnsupported,
    #[error("law grid has {got} entries, {rows}x{cols} ensemble needs {need}")]
    GridShape { got: usize, need: usize, rows: usize, cols: usize },
    #[error("scale factors must be finite and positive")]
    InvalidScale,
}

/// Shape of an entry law.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum LawKind {
    /// Finite atom list `(value, probability)`, sorted by value, probabilities
    /// summing to one.
    Discrete(Vec<(f64, f64)>),
    Gaussian { mean: f64, variance: f64 },
    Uniform { lo: f64, hi: f64 },
    /// `+1` with probability `p`, `-1` otherwise.
    SignedBernoulli { p: f64 },
    /// Symmetric triangular law on `[-width, width]`; the difference of two
    /// independent copies of a uniform law of that width.
    Triangular { width: f64 },
}

/// One entry's law plus cached moments and unit-scale concentration level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntryDistribution {
    kind: LawKind,
    mean: f64,
    variance: f64,
    levy_at_one: f64,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `P{|Z| < 1}` for a centered gaussian with standard deviation `sd`.
fn gaussian_levy_at_one(sd: f64) -> f64 {
    statrs::function::erf::erf(1.0 / (sd * std::f64::consts::SQRT_2))
}

/// Largest probability mass of `atoms` (sorted by value) coverable by an open
/// window of width 2. A window covers a consecutive run of atoms exactly when
/// the run's diameter is strictly below 2.
fn discrete_levy_at_one(atoms: &[(f64, f64)]) -> f64 {
    let mut best: f64 = 0.0;
    let mut hi = 0;
    let mut mass = 0.0;
    for lo in 0..atoms.len() {
        if hi < lo {
            hi = lo;
            mass = 0.0;
        }
        while hi < atoms.len() && atoms[hi].0 - atoms[lo].0 < 2.0 {
            mass += atoms[hi].1;
            hi += 1;
        }
        best = best.max(mass);
        mass -= atoms[lo].1;
    }
    best.min(1.0)
}

impl EntryDistribution {
    fn finalize(kind: LawKind) -> Self {
        let (mean, variance, levy_at_one) = match &kind {
            LawKind::Discrete(atoms) => {
                let mean: f64 = atoms.iter().map(|&(a, p)| p * a).sum();
                let second: f64 = atoms.iter().map(|&(a, p)| p * a * a).sum();
                (mean, (second - mean * mean).max(0.0), discrete_levy_at_one(atoms))
            }
            LawKind::Gaussian { mean, variance } => {
                (*mean, *variance, gaussian_levy_at_one(variance.sqrt()))
            }
            LawKind::Uniform { lo, hi } => {
                let w = hi - lo;
                ((lo + hi) / 2.0, w * w / 12.0, (2.0 / w).min(1.0))
            }
            LawKind::SignedBernoulli { p } => {
                (2.0 * p - 1.0, 4.0 * p * (1.0 - p), p.max(1.0 - p))
            }
            LawKind::Triangular { width } => {
                let w = *width;
                let levy = if w <= 1.0 { 1.0 } else { 1.0 - (1.0 - 1.0 / w) * (1.0 - 1.0 / w) };
                (0.0, w * w / 6.0, levy)
            }
        };
        EntryDistribution { kind, mean, variance, levy_at_one }
    }

    /// Discrete law from `(value, probability)` atoms. Atoms are sorted,
    /// exact duplicates merged, and zero-mass atoms dropped.
    pub fn discrete(atoms: &[(f64, f64)]) -> Result<Self, EnsembleError> {
        if atoms.is_empty() {
            return Err(EnsembleError::EmptyAtomList);
        }
        for &(a, p) in atoms {
            if !a.is_finite() || !p.is_finite() || p < 0.0 {
                return Err(EnsembleError::InvalidAtom);
            }
        }
        let sum: f64 = atoms.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(EnsembleError::UnnormalizedAtoms { sum });
        }
        let mut sorted: Vec<(f64, f64)> = atoms.iter().copied().filter(|&(_, p)| p > 0.0).collect();
        if sorted.is_empty() {
            return Err(EnsembleError::EmptyAtomList);
        }
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
        for (a, p) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == a => last.1 += p,
                _ => merged.push((a, p)),
            }
        }
        if sum != 1.0 {
            for atom in &mut merged {
                atom.1 /= sum;
            }
        }
        Ok(Self::finalize(LawKind::Discrete(merged)))
    }

    pub fn point_mass(value: f64) -> Result<Self, EnsembleError> {
        Self::discrete(&[(value, 1.0)])
    }

    pub fn gaussian(mean: f64, variance: f64) -> Result<Self, EnsembleError> {
        if !mean.is_finite() || !variance.is_finite() || variance <= 0.0 {
            return Err(EnsembleError::InvalidParameter { name: "variance", value: variance });
        }
        Ok(Self::finalize(LawKind::Gaussian { mean, variance }))
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self, EnsembleError> {
        if !lo.is_finite() || !hi.is_finite() || hi <= lo {
            return Err(EnsembleError::InvalidParameter { name: "hi - lo", value: hi - lo });
        }
        Ok(Self::finalize(LawKind::Uniform { lo, hi }))
    }

    pub fn signed_bernoulli(p: f64) -> Result<Self, EnsembleError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(EnsembleError::InvalidParameter { name: "p", value: p });
        }
        Ok(Self::finalize(LawKind::SignedBernoulli { p }))
    }

    pub fn triangular(width: f64) -> Result<Self, EnsembleError> {
        if !width.is_finite() || width <= 0.0 {
            return Err(EnsembleError::InvalidParameter { name: "width", value: width });
        }
        Ok(Self::finalize(LawKind::Triangular { width }))
    }

    pub fn kind(&self) -> &LawKind {
        &self.kind
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn second_moment(&self) -> f64 {
        self.variance + self.mean * self.mean
    }

    /// `L(X, 1) = sup_u P{|X - u| < 1}`, exact for every supported kind.
    pub fn levy_at_one(&self) -> f64 {
        self.levy_at_one
    }

    /// The law of `c * X` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self, EnsembleError> {
        if !c.is_finite() || c <= 0.0 {
            return Err(EnsembleError::InvalidScale);
        }
        let kind = match &self.kind {
            LawKind::Discrete(atoms) => {
                LawKind::Discrete(atoms.iter().map(|&(a, p)| (c * a, p)).collect())
            }
            LawKind::Gaussian { mean, variance } => {
                LawKind::Gaussian { mean: c * mean, variance: c * c * variance }
            }
            LawKind::Uniform { lo, hi } => LawKind::Uniform { lo: c * lo, hi: c * hi },
            LawKind::SignedBernoulli { p } => {
                if c == 1.0 {
                    LawKind::SignedBernoulli { p: *p }
                } else {
                    LawKind::Discrete(vec![(-c, 1.0 - p), (c, *p)])
                }
            }
            LawKind::Triangular { width } => LawKind::Triangular { width: c * width },
        };
        Ok(Self::finalize(kind))
    }

    /// The law of `X - X'` for an independent copy `X'`. Exact for discrete
    /// kinds, closed-form for gaussian (variance doubles) and uniform
    /// (symmetric triangular). Always centered with `E = 2 Var(X)`.
    pub fn symmetrize(&self) -> Result<Self, EnsembleError> {
        match &self.kind {
            LawKind::Discrete(atoms) => symmetrize_atoms(atoms),
            LawKind::Gaussian { variance, .. } => Self::gaussian(0.0, 2.0 * variance),
            LawKind::Uniform { lo, hi } => Self::triangular(hi - lo),
            LawKind::SignedBernoulli { p } => {
                symmetrize_atoms(&[(-1.0, 1.0 - p), (1.0, *p)])
            }
            LawKind::Triangular { .. } => Err(EnsembleError::SymmetrizeUnsupported),
        }
    }

    /// One draw from this law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            LawKind::Discrete(atoms) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(a, p) in atoms {
                    acc += p;
                    if u < acc {
                        return a;
                    }
                }
                atoms[atoms.len() - 1].0
            }
            LawKind::Gaussian { mean, variance } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + variance.sqrt() * z
            }
            LawKind::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            LawKind::SignedBernoulli { p } => {
                if rng.random::<f64>() < *p {
                    1.0
                } else {
                    -1.0
                }
            }
            LawKind::Triangular { width } => {
                width * (rng.random::<f64>() - rng.random::<f64>())
            }
        }
    }

    /// Characteristic function `E exp(2 pi i s X)`.
    pub fn char_fn(&self, s: f64) -> Complex64 {
        let tau = 2.0 * PI;
        match &self.kind {
            LawKind::Discrete(atoms) => atoms
                .iter()
                .map(|&(a, p)| Complex64::from_polar(p, tau * s * a))
                .sum(),
            LawKind::Gaussian { mean, variance } => {
                Complex64::from_polar((-2.0 * PI * PI * variance * s * s).exp(), tau * s * mean)
            }
            LawKind::Uniform { lo, hi } => {
                Complex64::from_polar(sinc(PI * s * (hi - lo)), PI * s * (lo + hi))
            }
            LawKind::SignedBernoulli { p } => {
                Complex64::from_polar(*p, tau * s) + Complex64::from_polar(1.0 - p, -tau * s)
            }
            LawKind::Triangular { width } => {
                let v = sinc(PI * s * width);
                Complex64::new(v * v, 0.0)
            }
        }
    }

    /// Atom list when the law is discrete (including the signed-Bernoulli
    /// shorthand), `None` for continuous kinds.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match &self.kind {
            LawKind::Discrete(atoms) => Some(atoms.clone()),
            LawKind::SignedBernoulli { p } => Some(vec![(-1.0, 1.0 - p), (1.0, *p)]),
            _ => None,
        }
    }
}

/// Exact convolution of `atoms` with its negation, clustering values that
/// agree within a span-relative tolerance so float noise does not split an
/// atom that is mathematically a single point.
fn symmetrize_atoms(atoms: &[(f64, f64)]) -> Result<EntryDistribution, EnsembleError> {
    let required = atoms.len() * atoms.len();
    if required > SYMMETRIZE_ATOM_CAP {
        return Err(EnsembleError::AtomBudget { required, cap: SYMMETRIZE_ATOM_CAP });
    }
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(required);
    for &(a, pa) in atoms {
        for &(b, pb) in atoms {
            pairs.push((a - b, pa * pb));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let span = pairs[pairs.len() - 1].0 - pairs[0].0;
    let tol = 1e-12 * (1.0 + span);
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, p) in pairs {
        match merged.last_mut() {
            Some(last) if a - last.0 <= tol => last.1 += p,
            _ => merged.push((a, p)),
        }
    }
    EntryDistribution::discrete(&merged)
}

/// Law layout of an ensemble.
#[derive(Clone, Debug, Serialize)]
enum Grid {
    Iid(EntryDistribution),
    /// Row-major `rows * cols` laws.
    Dense(Vec<EntryDistribution>),
    /// Entry `(i, j)` is `row_scale[i] * col_scale[j] * base`.
    Factored { base: EntryDistribution, row_scale: Vec<f64>, col_scale: Vec<f64> },
}

/// An `m x n` grid of independent entry laws with declared model parameters
/// `K` (second-moment budget) and `b` (uniform concentration bound).
#[derive(Clone, Debug, Serialize)]
pub struct MatrixEnsemble {
    rows: usize,
    cols: usize,
    grid: Grid,
    k_bound: f64,
    b_bound: f64,
    label: String,
}

/// Outcome of checking the standing assumptions of an ensemble.
#[derive(Clone, Debug, Serialize)]
pub struct AssumptionReport {
    pub rows: usize,
    pub cols: usize,
    /// `sum_ij E A_ij^2`.
    pub sum_second_moment: f64,
    /// Smallest `K` that would satisfy `sum E A_ij^2 <= K m n`.
    pub k_required: f64,
    pub k_bound: f64,
    pub second_moment_ok: bool,
    pub max_levy_at_one: f64,
    pub b_bound: f64,
    pub levy_ok: bool,
    pub ok: bool,
}

impl MatrixEnsemble {
    fn validated(
        rows: usize,
        cols: usize,
        grid: Grid,
        k_bound: f64,
        b_bound: f64,
        label: String,
    ) -> Result<Self, EnsembleError> {
        if rows == 0 {
            return Err(EnsembleError::InvalidParameter { name: "rows", value: 0.0 });
        }
        if cols == 0 {
            return Err(EnsembleError::InvalidParameter { name: "cols", value: 0.0 });
        }
        if !k_bound.is_finite() || k_bound <= 0.0 {
            return Err(EnsembleError::InvalidParameter { name: "K", value: k_bound });
        }
        if !b_bound.is_finite() || !(0.0..1.0).contains(&b_bound) {
            return Err(EnsembleError::InvalidParameter { name: "b", value: b_bound });
        }
        Ok(MatrixEnsemble { rows, cols, grid, k_bound, b_bound, label })
    }

    /// Square or rectangular iid ensemble.
    pub fn iid(
        rows: usize,
        cols: usize,
        law: EntryDistribution,
        k_bound: f64,
        b_bound: f64,
    ) -> Result<Self, EnsembleError> {
        let label = format!("iid-{rows}x{cols}");
        Self::validated(rows, cols, Grid::Iid(law), k_bound, b_bound, label)
    }

    /// Dense row-major grid of laws.
    pub fn dense(
        rows: usize,
        cols: usize,
        laws: Vec<EntryDistribution>,
        k_bound: f64,
        b_bound: f64,
    ) -> Result<Self, EnsembleError> {
        if laws.len() != rows * cols {
            return Err(EnsembleError::GridShape { got: laws.len(), need: rows * cols, rows, cols });
        }
        let label = format!("dense-{rows}x{cols}");
        Self::validated(rows, cols, Grid::Dense(laws), k_bound, b_bound, label)
    }

    /// Dense grid built from an entry-law function.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut law: impl FnMut(usize, usize) -> EntryDistribution,
        k_bound: f64,
        b_bound: f64,
    ) -> Result<Self, EnsembleError> {
        let mut laws = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                laws.push(law(i, j));
            }
        }
        Self::dense(rows, cols, laws, k_bound, b_bound)
    }

    /// Rank-one scale profile `row_scale[i] * col_scale[j]` over a base law.
    pub fn factored(
        rows: usize,
        cols: usize,
        base: EntryDistribution,
        row_scale: Vec<f64>,
        col_scale: Vec<f64>,
        k_bound: f64,
        b_bound: f64,
    ) -> Result<Self, EnsembleError> {
        if row_scale.len() != rows || col_scale.len() != cols {
            return Err(EnsembleError::GridShape {
                got: row_scale.len() * col_scale.len(),
                need: rows * cols,
                rows,
                cols,
            });
        }
        if row_scale.iter().chain(col_scale.iter()).any(|&c| !c.is_finite() || c <= 0.0) {
            return Err(EnsembleError::InvalidScale);
        }
        let label = format!("factored-{rows}x{cols}");
        Self::validated(rows, cols, Grid::Factored { base, row_scale, col_scale }, k_bound, b_bound, label)
    }

    /// Signed-Bernoulli grid whose success probability sweeps `[p_lo, p_hi]`
    /// along a fixed deterministic pattern varying over rows and columns.
    pub fn signed_bernoulli_grid(
        rows: usize,
        cols: usize,
        p_lo: f64,
        p_hi: f64,
        k_bound: f64,
        b_bound: f64,
    ) -> Result<Self, EnsembleError> {
        if !(0.0..=1.0).contains(&p_lo) || !(0.0..=1.0).contains(&p_hi) || p_hi < p_lo {
            return Err(EnsembleError::InvalidParameter { name: "p range", value: p_hi - p_lo });
        }
        let mut ens = Self::from_fn(
            rows,
            cols,
            |i, j| {
                let t = ((31 * i + 17 * j) % 101) as f64 / 100.0;
                EntryDistribution::signed_bernoulli(p_lo + (p_hi - p_lo) * t)
                    .expect("p stays inside [p_lo, p_hi]")
            },
            k_bound,
            b_bound,
        )?;
        ens.label = format!("sb-grid-{rows}x{cols}");
        Ok(ens)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn k_bound(&self) -> f64 {
        self.k_bound
    }

    pub fn b_bound(&self) -> f64 {
        self.b_bound
    }

    /// The law of entry `(i, j)` (zero-based).
    pub fn entry(&self, i: usize, j: usize) -> EntryDistribution {
        assert!(i < self.rows && j < self.cols, "entry index out of range");
        match &self.grid {
            Grid::Iid(law) => law.clone(),
            Grid::Dense(laws) => laws[i * self.cols + j].clone(),
            Grid::Factored { base, row_scale, col_scale } => base
                .scaled(row_scale[i] * col_scale[j])
                .expect("scales validated at construction"),
        }
    }

    /// Laws of column `j`, top to bottom.
    pub fn column_laws(&self, j: usize) -> Vec<EntryDistribution> {
        (0..self.rows).map(|i| self.entry(i, j)).collect()
    }

    /// The shared entry law when all entries are iid, else `None`.
    pub fn iid_law(&self) -> Option<&EntryDistribution> {
        match &self.grid {
            Grid::Iid(law) => Some(law),
            _ => None,
        }
    }

    /// Laws of row `i`, left to right.
    pub fn row_laws(&self, i: usize) -> Vec<EntryDistribution> {
        (0..self.cols).map(|j| self.entry(i, j)).collect()
    }

    /// One sampled matrix. Entries are drawn in row-major order from the
    /// stream named by `seed`, so the output is a pure function of the seed.
    pub fn sample_matrix(&self, seed: SeedSpec) -> DMatrix<f64> {
        let mut rng = seed.rng();
        let mut a = DMatrix::zeros(self.rows, self.cols);
        match &self.grid {
            Grid::Iid(law) => {
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        a[(i, j)] = law.sample(&mut rng);
                    }
                }
            }
            Grid::Dense(laws) => {
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        a[(i, j)] = laws[i * self.cols + j].sample(&mut rng);
                    }
                }
            }
            Grid::Factored { base, row_scale, col_scale } => {
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        a[(i, j)] = row_scale[i] * col_scale[j] * base.sample(&mut rng);
                    }
                }
            }
        }
        a
    }

    /// `sum_ij E A_ij^2`, computed from the cached law moments.
    pub fn sum_second_moment(&self) -> f64 {
        match &self.grid {
            Grid::Iid(law) => (self.rows * self.cols) as f64 * law.second_moment(),
            Grid::Dense(laws) => laws.iter().map(EntryDistribution::second_moment).sum(),
            Grid::Factored { base, row_scale, col_scale } => {
                let r2: f64 = row_scale.iter().map(|c| c * c).sum();
                let c2: f64 = col_scale.iter().map(|c| c * c).sum();
                base.second_moment() * r2 * c2
            }
        }
    }

    /// Largest `L(A_ij, 1)` over the grid. For a factored profile this is
    /// attained at the smallest combined scale, since shrinking an entry
    /// only concentrates it.
    pub fn max_levy_at_one(&self) -> f64 {
        match &self.grid {
            Grid::Iid(law) => law.levy_at_one(),
            Grid::Dense(laws) => {
                laws.iter().map(EntryDistribution::levy_at_one).fold(0.0, f64::max)
            }
            Grid::Factored { base, row_scale, col_scale } => {
                let rmin = row_scale.iter().copied().fold(f64::INFINITY, f64::min);
                let cmin = col_scale.iter().copied().fold(f64::INFINITY, f64::min);
                base.scaled(rmin * cmin)
                    .expect("scales validated at construction")
                    .levy_at_one()
            }
        }
    }

    /// Check the declared `(K, b)` against the exact grid moments and
    /// concentration levels.
    pub fn verify_assumptions(&self) -> AssumptionReport {
        let sum_second_moment = self.sum_second_moment();
        let k_required = sum_second_moment / (self.rows * self.cols) as f64;
        let second_moment_ok = k_required <= self.k_bound;
        let max_levy_at_one = self.max_levy_at_one();
        let levy_ok = max_levy_at_one <= self.b_bound;
        AssumptionReport {
            rows: self.rows,
            cols: self.cols,
            sum_second_moment,
            k_required,
            k_bound: self.k_bound,
            second_moment_ok,
            max_levy_at_one,
            b_bound: self.b_bound,
            levy_ok,
            ok: second_moment_ok && levy_ok,
        }
    }
}
