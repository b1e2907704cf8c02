//! End-to-end Monte Carlo experiments: singular-value tail curves,
//! column-span distance tails, the deterministic
//! invertibility-via-distance containment, and the structure of normal
//! vectors. Every experiment is reproducible bit-for-bit from its seed
//! regardless of worker count: trial `t` always draws from stream `t`,
//! and aggregation uses order-independent counters.

use crate::ensembles::MatrixEnsemble;
use crate::rlcd::{rlcd, RlcdError, RlcdQuery};
use crate::rng::SeedSpec;
use crate::spectral::{
    column_distances, smallest_singular_value, unit_normal, SpectralError,
};
use crate::sphere::{classify, floor_nudged, SphereClass, SphereParams};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// A singular value below this multiple of `sigma_max` counts as an exact
/// singularity in the `epsilon = 0` column.
const SINGULAR_TOL: f64 = 1e-12;
/// Relative plus absolute tolerance on distance-count comparisons.
const DIST_TOL_REL: f64 = 1e-8;
const DIST_TOL_ABS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("epsilon grid must be non-empty, finite, non-negative and sorted")]
    BadGrid,
    #[error("parameter {name} = {value} outside its valid range")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("ensemble is {rows}x{cols}; this experiment needs a square one")]
    NotSquare { rows: usize, cols: usize },
    #[error("column {j} out of range for {cols} columns")]
    ColumnOutOfRange { j: usize, cols: usize },
    #[error("n = {n} below the floor {need} for these sphere parameters")]
    DimensionTooSmall { n: usize, need: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Rlcd(#[from] RlcdError),
}

/// Reference curve `C eps + 2 exp(-c n)` drawn next to every empirical
/// tail. The defaults were calibrated once on pilot gaussian and
/// signed-Bernoulli runs and are frozen here.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundCurve {
    pub c: f64,
    pub rate: f64,
}

impl Default for BoundCurve {
    fn default() -> Self {
        BoundCurve { c: 2.0, rate: 0.05 }
    }
}

impl BoundCurve {
    pub fn eval(&self, epsilon: f64, n: usize) -> f64 {
        self.c * epsilon + 2.0 * (-self.rate * n as f64).exp()
    }
}

/// Empirical tail of one scalar statistic over an epsilon grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailReport {
    pub ensemble: String,
    pub epsilon: Vec<f64>,
    pub trials: usize,
    pub hits: Vec<usize>,
    pub p_hat: Vec<f64>,
    pub stderr: Vec<f64>,
    pub curve: Vec<f64>,
    pub curve_params: BoundCurve,
    pub seed: SeedSpec,
    pub warnings: Vec<String>,
}

fn check_grid(epsilon_grid: &[f64]) -> Result<(), HarnessError> {
    let ok = !epsilon_grid.is_empty()
        && epsilon_grid.iter().all(|e| e.is_finite() && *e >= 0.0)
        && epsilon_grid.windows(2).all(|w| w[0] <= w[1]);
    if ok { Ok(()) } else { Err(HarnessError::BadGrid) }
}

/// Count threshold hits for each epsilon; thresholds are non-decreasing,
/// so hit counts are too.
fn tally<F: Fn(f64) -> f64>(
    label: &str,
    values: &[f64],
    epsilon_grid: &[f64],
    threshold: F,
    n: usize,
    curve: BoundCurve,
    seed: SeedSpec,
    warnings: Vec<String>,
) -> TailReport {
    let trials = values.len();
    let mut hits = Vec::with_capacity(epsilon_grid.len());
    let mut p_hat = Vec::with_capacity(epsilon_grid.len());
    let mut stderr = Vec::with_capacity(epsilon_grid.len());
    let mut curve_vals = Vec::with_capacity(epsilon_grid.len());
    for &eps in epsilon_grid {
        let thr = threshold(eps);
        let count = values.iter().filter(|&&v| v <= thr).count();
        let p = count as f64 / trials as f64;
        hits.push(count);
        p_hat.push(p);
        stderr.push((p * (1.0 - p) / trials as f64).sqrt());
        curve_vals.push(curve.eval(eps, n));
    }
    TailReport {
        ensemble: label.to_string(),
        epsilon: epsilon_grid.to_vec(),
        trials,
        hits,
        p_hat,
        stderr,
        curve: curve_vals,
        curve_params: curve,
        seed,
        warnings,
    }
}

fn assumption_warnings(ensemble: &MatrixEnsemble) -> Vec<String> {
    let report = ensemble.verify_assumptions();
    let mut warnings = Vec::new();
    if !report.second_moment_ok {
        warnings.push(format!(
            "second-moment assumption fails: needs K >= {:.6}, configured {:.6}",
            report.k_required, report.k_bound
        ));
    }
    if !report.levy_ok {
        warnings.push(format!(
            "spread assumption fails: max Levy concentration {:.6} above b = {:.6}",
            report.max_levy_at_one, report.b_bound
        ));
    }
    warnings
}

/// Empirical `P{sigma_n(A) <= eps/sqrt(n)}` over the epsilon grid. The
/// `eps = 0` column reports the exact-singularity frequency, with
/// singularity meaning `sigma_n <= 1e-12 sigma_max`. Assumption failures
/// are annotated, not fatal.
pub fn sigma_tail_experiment(
    ensemble: &MatrixEnsemble,
    epsilon_grid: &[f64],
    trials: usize,
    seed: SeedSpec,
    curve: BoundCurve,
) -> Result<TailReport, HarnessError> {
    check_grid(epsilon_grid)?;
    if trials == 0 {
        return Err(HarnessError::InvalidParameter { name: "trials", value: 0.0 });
    }
    let (rows, cols) = (ensemble.rows(), ensemble.cols());
    if rows != cols {
        return Err(HarnessError::NotSquare { rows, cols });
    }
    let n = cols;
    let extremes: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let a = ensemble.sample_matrix(seed.with_stream(t as u64));
            let s = smallest_singular_value(&a)?;
            Ok((s.sigma_min, s.sigma_max))
        })
        .collect::<Result<_, HarnessError>>()?;
    let root_n = (n as f64).sqrt();
    // Map each trial to an effective statistic so a single tally covers
    // both columns: the eps = 0 threshold becomes "negative unless
    // numerically singular".
    let values: Vec<f64> = extremes
        .iter()
        .map(|&(lo, hi)| if lo <= SINGULAR_TOL * hi { -1.0 } else { lo })
        .collect();
    Ok(tally(
        ensemble.label(),
        &values,
        epsilon_grid,
        |eps| if eps == 0.0 { 0.0 } else { eps / root_n },
        n,
        curve,
        seed,
        assumption_warnings(ensemble),
    ))
}

/// Distance tails for a set of columns, with the orthogonal-projection
/// cross-check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceTailReport {
    pub per_column: Vec<(usize, TailReport)>,
    pub pooled: TailReport,
    /// Worst gap between `dist(A_j, H_j)` and `|<A_j, normal>|` seen.
    pub projection_max_gap: f64,
    pub r: f64,
    pub second_moment_ok: bool,
}

/// Empirical `P{dist(A_j, H_j) <= eps}` per column in `columns` and
/// pooled, where `H_j` is the span of the other columns. Each trial also
/// recomputes the distance as `|<A_j, v_j>|` with `v_j` the unit normal;
/// the worst disagreement goes in the report.
pub fn distance_tail_experiment(
    ensemble: &MatrixEnsemble,
    columns: &[usize],
    epsilon_grid: &[f64],
    trials: usize,
    seed: SeedSpec,
    r: f64,
    curve: BoundCurve,
) -> Result<DistanceTailReport, HarnessError> {
    check_grid(epsilon_grid)?;
    if trials == 0 {
        return Err(HarnessError::InvalidParameter { name: "trials", value: 0.0 });
    }
    if columns.is_empty() {
        return Err(HarnessError::InvalidParameter { name: "columns", value: 0.0 });
    }
    let (rows, cols) = (ensemble.rows(), ensemble.cols());
    if rows != cols {
        return Err(HarnessError::NotSquare { rows, cols });
    }
    for &j in columns {
        if j >= cols {
            return Err(HarnessError::ColumnOutOfRange { j, cols });
        }
    }
    let n = cols;
    let mut warnings = assumption_warnings(ensemble);
    // Second-moment condition E|A_j|^2 <= r n^2 per selected column.
    let cap = r * (n * n) as f64;
    let mut second_moment_ok = true;
    for &j in columns {
        let moment: f64 =
            ensemble.column_laws(j).iter().map(|law| law.second_moment()).sum();
        if moment > cap {
            second_moment_ok = false;
            warnings.push(format!(
                "column {j}: E|A_j|^2 = {moment:.6} exceeds r n^2 = {cap:.6}"
            ));
        }
    }
    let per_trial: Vec<(Vec<f64>, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let a = ensemble.sample_matrix(seed.with_stream(t as u64));
            let dists = column_distances(&a)?;
            let mut gap: f64 = 0.0;
            let mut picked = Vec::with_capacity(columns.len());
            for &j in columns {
                let normal = unit_normal(&a, j)?;
                let proj = a.column(j).dot(&normal.vector).abs();
                gap = gap.max((proj - dists[j]).abs());
                picked.push(dists[j]);
            }
            Ok((picked, gap))
        })
        .collect::<Result<_, HarnessError>>()?;
    let projection_max_gap =
        per_trial.iter().map(|(_, g)| *g).fold(0.0, f64::max);
    let mut per_column = Vec::with_capacity(columns.len());
    let mut pooled_values = Vec::with_capacity(columns.len() * trials);
    for (slot, &j) in columns.iter().enumerate() {
        let values: Vec<f64> = per_trial.iter().map(|(d, _)| d[slot]).collect();
        pooled_values.extend_from_slice(&values);
        per_column.push((
            j,
            tally(
                &format!("{} col {j}", ensemble.label()),
                &values,
                epsilon_grid,
                |eps| eps,
                n,
                curve,
                seed,
                Vec::new(),
            ),
        ));
    }
    let pooled = tally(
        &format!("{} pooled", ensemble.label()),
        &pooled_values,
        epsilon_grid,
        |eps| eps,
        n,
        curve,
        seed,
        warnings,
    );
    Ok(DistanceTailReport { per_column, pooled, projection_max_gap, r, second_moment_ok })
}

/// Outcome of the deterministic containment behind invertibility via
/// distance, evaluated on one realized matrix.
#[derive(Clone, Debug, Serialize)]
pub struct InvertibilityCheck {
    /// False when the minimizer is compressible.
    pub applicable: bool,
    /// True whenever not applicable, else the containment verdict.
    pub holds: bool,
    pub sigma_min: f64,
    /// `sigma_min sqrt(n) / rho` when applicable.
    pub epsilon: Option<f64>,
    pub observed: usize,
    pub required: usize,
    pub class: SphereClass,
}

/// Take `x` = the minimizing right singular vector. When `x` is
/// incompressible, every spread coordinate forces
/// `dist(A_i, H_i) <= |Ax|/|x_i| <= sigma_min sqrt(n)/rho`, so at least
/// `floor(delta n)` columns must sit that close to the others' span.
pub fn invertibility_via_distance_check(
    a: &nalgebra::DMatrix<f64>,
    params: &SphereParams,
) -> Result<InvertibilityCheck, HarnessError> {
    let n = a.ncols();
    let need = 4.0 / params.delta();
    if (n as f64) < need {
        return Err(HarnessError::DimensionTooSmall { n, need });
    }
    let s = smallest_singular_value(a)?;
    let x = s.minimizer.as_slice().to_vec();
    let classification = classify(&x, params);
    if classification.class == SphereClass::Compressible {
        return Ok(InvertibilityCheck {
            applicable: false,
            holds: true,
            sigma_min: s.sigma_min,
            epsilon: None,
            observed: 0,
            required: 0,
            class: classification.class,
        });
    }
    let epsilon = s.sigma_min * (n as f64).sqrt() / params.rho();
    let dists = column_distances(a)?;
    let cut = epsilon * (1.0 + DIST_TOL_REL) + DIST_TOL_ABS;
    let observed = dists.iter().filter(|&&d| d <= cut).count();
    let required = floor_nudged(params.delta() * n as f64).min(n);
    Ok(InvertibilityCheck {
        applicable: true,
        holds: observed >= required,
        sigma_min: s.sigma_min,
        epsilon: Some(epsilon),
        observed,
        required,
        class: classification.class,
    })
}

/// Options for the normal-vector structure experiment.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormalStructureOptions {
    /// Monte Carlo draws for continuous coordinate laws; 0 = exact only.
    pub mc_samples: usize,
    /// Grid resolution override; 0 keeps the query default.
    pub grid_points: usize,
    /// Exponential rate defining "low" RLCD via `exp(rate * n)`.
    pub low_rate: f64,
}

impl Default for NormalStructureOptions {
    fn default() -> Self {
        NormalStructureOptions {
            mc_samples: 0,
            grid_points: 0,
            low_rate: crate::rlcd::CalibrationConstants::default().gamma_prime,
        }
    }
}

/// One dyadic level set `2^level <= value < 2^{level+1}` of the observed
/// RLCD distribution.
#[derive(Clone, Debug, Serialize)]
pub struct LevelBucket {
    pub level: i32,
    pub count: usize,
    pub mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalStructureReport {
    pub trials: usize,
    /// Trials whose column span was full-dimensional.
    pub included: usize,
    pub degenerate: usize,
    pub compressible_fraction: f64,
    pub censored_fraction: f64,
    /// Fraction with finite RLCD below `exp(low_rate n)`.
    pub low_rlcd_fraction: f64,
    /// Fraction compressible or with low RLCD.
    pub structured_fraction: f64,
    pub low_threshold: f64,
    pub levels: Vec<LevelBucket>,
    pub gamma: f64,
    pub u: f64,
    pub warnings: Vec<String>,
}

/// For each trial, draw `A`, form the unit normal to the span of all
/// columns but `j`, classify it on the sphere, and evaluate the RLCD of
/// the normal against the law of column `j`. Degenerate spans are
/// excluded and counted.
pub fn normal_vector_structure_experiment(
    ensemble: &MatrixEnsemble,
    j: usize,
    gamma: f64,
    u: f64,
    trials: usize,
    seed: SeedSpec,
    params: &SphereParams,
    opts: &NormalStructureOptions,
) -> Result<NormalStructureReport, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::InvalidParameter { name: "trials", value: 0.0 });
    }
    if !(gamma > 0.0) {
        return Err(HarnessError::InvalidParameter { name: "gamma", value: gamma });
    }
    let (rows, cols) = (ensemble.rows(), ensemble.cols());
    if rows != cols {
        return Err(HarnessError::NotSquare { rows, cols });
    }
    if j >= cols {
        return Err(HarnessError::ColumnOutOfRange { j, cols });
    }
    let n = rows;
    let laws = ensemble.column_laws(j);
    let mut base_query = RlcdQuery::new(gamma * (n as f64).sqrt(), u, n)?;
    if opts.grid_points > 0 {
        base_query = base_query.with_grid_points(opts.grid_points);
    }
    struct Record {
        degenerate: bool,
        compressible: bool,
        value: f64,
    }
    let records: Vec<Record> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let a = ensemble.sample_matrix(seed.with_stream(t as u64));
            let normal = unit_normal(&a, j)?;
            if normal.degenerate {
                return Ok(Record { degenerate: true, compressible: false, value: 0.0 });
            }
            let v = normal.vector.as_slice().to_vec();
            let compressible =
                classify(&v, params).class == SphereClass::Compressible;
            let mut q = base_query;
            if opts.mc_samples > 0 {
                // Streams above the trial range keep MC draws independent
                // of the matrix draws.
                q = q.with_mc(opts.mc_samples, seed.with_stream(trials as u64 + t as u64));
            }
            let value = rlcd(&laws, &v, &q)?.outcome.value_or_infinity();
            Ok(Record { degenerate: false, compressible, value })
        })
        .collect::<Result<_, HarnessError>>()?;
    let degenerate = records.iter().filter(|r| r.degenerate).count();
    let included = trials - degenerate;
    let low_threshold = (opts.low_rate * n as f64).exp();
    let mut compressible = 0usize;
    let mut censored = 0usize;
    let mut low = 0usize;
    let mut structured = 0usize;
    let mut buckets: std::collections::BTreeMap<i32, usize> =
        std::collections::BTreeMap::new();
    for r in records.iter().filter(|r| !r.degenerate) {
        if r.compressible {
            compressible += 1;
        }
        if r.value.is_infinite() {
            censored += 1;
        } else {
            *buckets.entry(r.value.log2().floor() as i32).or_insert(0) += 1;
            if r.value < low_threshold {
                low += 1;
            }
        }
        if r.compressible || (r.value.is_finite() && r.value < low_threshold) {
            structured += 1;
        }
    }
    let denom = included.max(1) as f64;
    let levels = buckets
        .into_iter()
        .map(|(level, count)| LevelBucket { level, count, mass: count as f64 / denom })
        .collect();
    Ok(NormalStructureReport {
        trials,
        included,
        degenerate,
        compressible_fraction: compressible as f64 / denom,
        censored_fraction: censored as f64 / denom,
        low_rlcd_fraction: low as f64 / denom,
        structured_fraction: structured as f64 / denom,
        low_threshold,
        levels,
        gamma,
        u,
        warnings: assumption_warnings(ensemble),
    })
}

/// Per-epsilon decomposition of the small-singular-value event by the
/// compressibility of the minimizer, measured on the same trials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub epsilon: Vec<f64>,
    pub trials: usize,
    pub event_hits: Vec<usize>,
    pub compressible_hits: Vec<usize>,
    pub incompressible_hits: Vec<usize>,
    /// `P{event} <= P{compressible part} + P{incompressible part}`
    /// pointwise; with the minimizer witness the split is a partition, so
    /// equality is expected.
    pub inequality_ok: bool,
}

/// Decompose `P{sigma_n <= eps rho / sqrt(n)}` by classifying the
/// minimizing vector of each trial.
pub fn sigma_decomposition_experiment(
    ensemble: &MatrixEnsemble,
    epsilon_grid: &[f64],
    trials: usize,
    seed: SeedSpec,
    params: &SphereParams,
) -> Result<DecompositionReport, HarnessError> {
    check_grid(epsilon_grid)?;
    if trials == 0 {
        return Err(HarnessError::InvalidParameter { name: "trials", value: 0.0 });
    }
    let (rows, cols) = (ensemble.rows(), ensemble.cols());
    if rows != cols {
        return Err(HarnessError::NotSquare { rows, cols });
    }
    let n = cols;
    let outcomes: Vec<(f64, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let a = ensemble.sample_matrix(seed.with_stream(t as u64));
            let s = smallest_singular_value(&a)?;
            let x = s.minimizer.as_slice().to_vec();
            let compressible = classify(&x, params).class == SphereClass::Compressible;
            Ok((s.sigma_min, compressible))
        })
        .collect::<Result<_, HarnessError>>()?;
    let scale = params.rho() / (n as f64).sqrt();
    let mut event_hits = Vec::with_capacity(epsilon_grid.len());
    let mut compressible_hits = Vec::with_capacity(epsilon_grid.len());
    let mut incompressible_hits = Vec::with_capacity(epsilon_grid.len());
    for &eps in epsilon_grid {
        let thr = eps * scale;
        let mut event = 0;
        let mut comp = 0;
        let mut incomp = 0;
        for &(sigma, compressible) in &outcomes {
            if sigma <= thr {
                event += 1;
                if compressible {
                    comp += 1;
                } else {
                    incomp += 1;
                }
            }
        }
        event_hits.push(event);
        compressible_hits.push(comp);
        incompressible_hits.push(incomp);
    }
    let inequality_ok = event_hits
        .iter()
        .zip(compressible_hits.iter().zip(&incompressible_hits))
        .all(|(&e, (&c, &i))| e <= c + i);
    Ok(DecompositionReport {
        epsilon: epsilon_grid.to_vec(),
        trials,
        event_hits,
        compressible_hits,
        incompressible_hits,
        inequality_ok,
    })
}

/// Edelman's limiting law `P{sigma_n <= eps/sqrt(n)} -> 1 - exp(-eps^2/2 - eps)`
/// for square iid standard gaussian matrices.
pub fn edelman_limit(epsilon: f64) -> f64 {
    1.0 - (-epsilon * epsilon / 2.0 - epsilon).exp()
}
