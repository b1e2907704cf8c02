//! Weighted-lattice discretization of the sphere: random rounding onto
//! per-coordinate grids, the projection onto dyadic weight nets, the
//! column-weighted optimization B_kappa, net-based approximation with a
//! deterministic image bound, and uniform sampling of spread lattice
//! points.

use crate::ensembles::{EntryDistribution, MatrixEnsemble};
use crate::rlcd::{rlcd, RlcdError, RlcdQuery};
use crate::rng::SeedSpec;
use crate::sphere::{floor_nudged, spread_count, SphereParams};
use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

/// Slack for the Omega_kappa log-product check and other boundary
/// comparisons dominated by accumulated rounding.
const LOG_SLACK: f64 = 1e-9;
/// Fractional offsets within this distance of the grid snap to it, so grid
/// points round to themselves.
const SNAP_EPS: f64 = 1e-12;
/// Relative tolerance on the ball-membership radius.
const BALL_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum NetsError {
    #[error("parameter {name} = {value} outside its valid range")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("weights must lie in [0,1]; alpha[{index}] = {value}")]
    WeightOutOfRange { index: usize, value: f64 },
    #[error("kappa = {0} must exceed e")]
    KappaTooSmall(f64),
    #[error("log weight product {log_product} below the Omega_kappa floor {floor}")]
    OutsideOmega { log_product: f64, floor: f64 },
    #[error("beta[{0}] = 0 has no finite log-coordinate")]
    ZeroWeight(usize),
    #[error("lambda[{index}] = {value} outside [{lo}, 0.01]")]
    LatticeBounds { index: usize, value: f64, lo: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("x must be a unit vector; |x| = {0}")]
    NotUnit(f64),
    #[error("rounding retry cap {0} exceeded")]
    RetryCapExceeded(usize),
    #[error(
        "estimated acceptance {estimated:.3e} below floor {floor:.3e}; \
         reduce n or loosen the spread margin"
    )]
    AcceptanceFloor { estimated: f64, floor: f64 },
    #[error("rlcd evaluation failed: {0}")]
    Rlcd(#[from] RlcdError),
}

/// Per-coordinate grid weights `alpha` in `[0,1]^n` tied to a scale
/// `kappa > e`. Membership in `Omega_kappa` means
/// `prod alpha_j >= kappa^{-n}`, checked in log space.
#[derive(Clone, Debug, Serialize)]
pub struct WeightVector {
    alpha: Vec<f64>,
    kappa: f64,
}

impl WeightVector {
    /// Weights that must lie in `Omega_kappa`.
    pub fn new(alpha: Vec<f64>, kappa: f64) -> Result<Self, NetsError> {
        let w = Self::free(alpha, kappa)?;
        let log_product = w.log_product();
        let floor = -(w.alpha.len() as f64) * kappa.ln();
        if log_product < floor - LOG_SLACK {
            return Err(NetsError::OutsideOmega { log_product, floor });
        }
        Ok(w)
    }

    /// Weights in `[0,1]^n` without the Omega_kappa constraint; rounding
    /// accepts these (zero weights give degenerate zero-step grids).
    pub fn free(alpha: Vec<f64>, kappa: f64) -> Result<Self, NetsError> {
        if !(kappa > std::f64::consts::E) {
            return Err(NetsError::KappaTooSmall(kappa));
        }
        for (index, &value) in alpha.iter().enumerate() {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(NetsError::WeightOutOfRange { index, value });
            }
        }
        Ok(WeightVector { alpha, kappa })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// `sum_j ln alpha_j`; `-inf` when any weight is zero.
    pub fn log_product(&self) -> f64 {
        self.alpha.iter().map(|a| a.ln()).sum()
    }

    pub fn in_omega(&self) -> bool {
        self.log_product() >= -(self.alpha.len() as f64) * self.kappa.ln() - LOG_SLACK
    }
}

/// Per-coordinate lattice scales `lambda_i` with `6^{-n} <= lambda_i <=
/// 0.01`; grid steps are `lambda_i / sqrt(n)`. For `n <= 2` the lower
/// bound exceeds 0.01, leaving only `lambda_i = 0.01`; that degenerate
/// regime is kept for the small-n enumeration oracles.
#[derive(Clone, Debug, Serialize)]
pub struct LatticeSpec {
    lambda: Vec<f64>,
}

impl LatticeSpec {
    pub fn new(lambda: Vec<f64>) -> Result<Self, NetsError> {
        if lambda.is_empty() {
            return Err(NetsError::InvalidParameter { name: "lambda", value: 0.0 });
        }
        let n = lambda.len() as f64;
        let lo = 6.0_f64.powf(-n).min(0.01);
        for (index, &value) in lambda.iter().enumerate() {
            if !value.is_finite()
                || value < lo * (1.0 - LOG_SLACK)
                || value > 0.01 * (1.0 + LOG_SLACK)
            {
                return Err(NetsError::LatticeBounds { index, value, lo });
            }
        }
        Ok(LatticeSpec { lambda })
    }

    pub fn uniform(lambda: f64, n: usize) -> Result<Self, NetsError> {
        Self::new(vec![lambda; n])
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Grid steps `lambda_i / sqrt(n)`.
    pub fn steps(&self) -> Vec<f64> {
        let root = (self.lambda.len() as f64).sqrt();
        self.lambda.iter().map(|l| l / root).collect()
    }

    /// `min_i 1/lambda_i`, the structure threshold for sampled points.
    pub fn min_inverse_lambda(&self) -> f64 {
        1.0 / self.lambda.iter().cloned().fold(f64::MIN, f64::max)
    }

    /// Ball and spread membership for a point already on the grid.
    pub fn admissible(&self, w: &[f64], params: &SphereParams) -> bool {
        let norm_sq: f64 = w.iter().map(|t| t * t).sum();
        if norm_sq > 2.25 * (1.0 + BALL_TOL) {
            return false;
        }
        let needed = params.delta() * w.len() as f64 - LOG_SLACK;
        spread_count(w, params.rho()) as f64 >= needed
    }
}

/// A point of the weighted grid `prod (alpha_i eps / sqrt(n)) Z`, carried
/// with its exact integer coordinates. Zero-step coordinates copy the
/// rounded vector exactly and use index 0.
#[derive(Clone, Debug, Serialize)]
pub struct NetPoint {
    pub y: Vec<f64>,
    pub indices: Vec<i64>,
    pub steps: Vec<f64>,
}

/// Round a unit vector onto the weighted grid with steps
/// `alpha_j eps / sqrt(n)`: floor with probability `1 - p`, ceiling with
/// probability `p`, where `p` is the fractional offset, so `E y = x`.
/// Always `max_j |x_j - y_j| <= eps / sqrt(n)`, hence `1/2 < |y| < 3/2`.
pub fn random_round(
    x: &[f64],
    alpha: &WeightVector,
    epsilon: f64,
    seed: SeedSpec,
) -> Result<NetPoint, NetsError> {
    random_round_with(x, alpha, epsilon, &mut seed.rng())
}

/// Same as `random_round` drawing from a caller-owned generator.
pub fn random_round_with<R: Rng + ?Sized>(
    x: &[f64],
    alpha: &WeightVector,
    epsilon: f64,
    rng: &mut R,
) -> Result<NetPoint, NetsError> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(NetsError::InvalidParameter { name: "epsilon", value: epsilon });
    }
    if x.len() != alpha.len() {
        return Err(NetsError::DimensionMismatch { left: x.len(), right: alpha.len() });
    }
    let norm = x.iter().map(|t| t * t).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(NetsError::NotUnit(norm));
    }
    let root_n = (x.len() as f64).sqrt();
    let mut y = Vec::with_capacity(x.len());
    let mut indices = Vec::with_capacity(x.len());
    let mut steps = Vec::with_capacity(x.len());
    for (&xj, &aj) in x.iter().zip(alpha.alpha()) {
        let h = aj * epsilon / root_n;
        if h == 0.0 {
            y.push(xj);
            indices.push(0);
            steps.push(0.0);
            continue;
        }
        let scaled = xj / h;
        let mut k = scaled.floor();
        let mut frac = scaled - k;
        // Snap near-exact grid hits so on-grid inputs are fixed points.
        if frac < SNAP_EPS {
            frac = 0.0;
        } else if frac > 1.0 - SNAP_EPS {
            k += 1.0;
            frac = 0.0;
        }
        let up = frac > 0.0 && rng.random::<f64>() < frac;
        let index = k as i64 + i64::from(up);
        y.push(index as f64 * h);
        indices.push(index);
        steps.push(h);
    }
    Ok(NetPoint { y, indices, steps })
}

/// Monte Carlo check of the rounding error bound
/// `E|A(x - y)|^2 <= (eps^2/n) sum_j alpha_j^2 |A_j|^2`, plus the
/// existence form: at least one observed draw meets the bound
/// deterministically.
#[derive(Clone, Debug, Serialize)]
pub struct RoundingCheck {
    pub holds: bool,
    pub mean_sq: f64,
    pub stderr: f64,
    pub min_observed_sq: f64,
    pub bound: f64,
    pub trials: usize,
}

pub fn rounding_column_bound_check(
    a: &DMatrix<f64>,
    x: &[f64],
    alpha: &WeightVector,
    epsilon: f64,
    trials: usize,
    seed: SeedSpec,
) -> Result<RoundingCheck, NetsError> {
    if trials == 0 {
        return Err(NetsError::InvalidParameter { name: "trials", value: 0.0 });
    }
    if a.ncols() != x.len() {
        return Err(NetsError::DimensionMismatch { left: a.ncols(), right: x.len() });
    }
    let n = x.len() as f64;
    let bound = epsilon * epsilon / n
        * a.column_iter()
            .zip(alpha.alpha())
            .map(|(col, &aj)| aj * aj * col.norm_squared())
            .sum::<f64>();
    let mut rng = seed.rng();
    let mut mean = 0.0;
    let mut mean_sq = 0.0;
    let mut min_observed_sq = f64::INFINITY;
    let mut diff = vec![0.0; x.len()];
    for _ in 0..trials {
        let point = random_round_with(x, alpha, epsilon, &mut rng)?;
        for (d, (xj, yj)) in diff.iter_mut().zip(x.iter().zip(&point.y)) {
            *d = xj - yj;
        }
        let image_sq = (0..a.nrows())
            .map(|i| {
                let row_dot: f64 = (0..a.ncols()).map(|j| a[(i, j)] * diff[j]).sum();
                row_dot * row_dot
            })
            .sum::<f64>();
        mean += image_sq;
        mean_sq += image_sq * image_sq;
        min_observed_sq = min_observed_sq.min(image_sq);
    }
    mean /= trials as f64;
    mean_sq /= trials as f64;
    let stderr = ((mean_sq - mean * mean).max(0.0) / trials as f64).sqrt();
    let holds = mean <= bound + 3.0 * stderr + LOG_SLACK && min_observed_sq <= bound + LOG_SLACK;
    Ok(RoundingCheck { holds, mean_sq: mean, stderr, min_observed_sq, bound, trials })
}

/// Push each weight down to the nearest `e^{-k}` with integer `k >= 0`:
/// `alpha_j = exp(-ceil(-ln beta_j))`. The image lies in `Omega_{e kappa}`,
/// is coordinate-wise below the input, and has integer log-coordinates, so
/// projecting twice is the identity.
pub fn weight_net_project(beta: &WeightVector) -> Result<WeightVector, NetsError> {
    let mut alpha = Vec::with_capacity(beta.len());
    for (index, &b) in beta.alpha().iter().enumerate() {
        if b == 0.0 {
            return Err(NetsError::ZeroWeight(index));
        }
        // The guard keeps t already at an integer (up to roundoff) from
        // being pushed a full level down, making the map idempotent.
        let t = -b.ln();
        let k = (t - LOG_SLACK).ceil().max(0.0);
        alpha.push((-k).exp());
    }
    WeightVector::new(alpha, std::f64::consts::E * beta.kappa())
}

/// Solution of `min { sum_j alpha_j^2 |A_j|^2 : alpha in Omega_kappa }`.
#[derive(Clone, Debug, Serialize)]
pub struct BKappa {
    pub value: f64,
    pub alpha_star: WeightVector,
    /// Water level: `alpha_j^2 |A_j|^2 = lambda` on the unclipped set.
    pub lambda: f64,
    /// Worst relative deviation of `alpha_j^2 w_j` from the water level on
    /// the unclipped set.
    pub kkt_residual: f64,
    /// `|sum ln alpha_j + n ln kappa|` when any weight is below 1.
    pub constraint_residual: f64,
}

/// Water-filling solution: `alpha_j = min(1, sqrt(lambda/w_j))` with
/// `w_j = |A_j|^2`, the level `lambda` chosen by bisection so the log
/// constraint is active. Zero-norm columns take weight 1 and drop out.
pub fn b_kappa(a: &DMatrix<f64>, kappa: f64) -> Result<BKappa, NetsError> {
    if !(kappa > std::f64::consts::E) {
        return Err(NetsError::KappaTooSmall(kappa));
    }
    let n = a.ncols();
    if n == 0 {
        return Err(NetsError::InvalidParameter { name: "ncols", value: 0.0 });
    }
    let w: Vec<f64> = a.column_iter().map(|c| c.norm_squared()).collect();
    let target = -(n as f64) * kappa.ln();
    let positive: Vec<f64> = w.iter().copied().filter(|&wj| wj > 0.0).collect();
    if positive.is_empty() {
        let alpha_star = WeightVector::new(vec![1.0; n], kappa)?;
        return Ok(BKappa {
            value: 0.0,
            alpha_star,
            lambda: 0.0,
            kkt_residual: 0.0,
            constraint_residual: 0.0,
        });
    }
    // g(lambda) = sum_j min(0, ln(lambda/w_j))/2 is the log product of the
    // clipped weights: increasing in lambda, 0 at lambda = max w.
    let g = |ln_lambda: f64| -> f64 {
        positive.iter().map(|wj| (0.5 * (ln_lambda - wj.ln())).min(0.0)).sum()
    };
    let ln_max_w = positive.iter().cloned().fold(f64::MIN, f64::max).ln();
    let mut hi = ln_max_w;
    let mut lo = hi - 1.0;
    while g(lo) > target {
        lo = hi + 2.0 * (lo - hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = hi.exp();
    let alpha: Vec<f64> = w
        .iter()
        .map(|&wj| if wj > 0.0 { (lambda / wj).sqrt().min(1.0) } else { 1.0 })
        .collect();
    let value: f64 = alpha.iter().zip(&w).map(|(aj, wj)| aj * aj * wj).sum();
    let mut kkt_residual: f64 = 0.0;
    for (aj, wj) in alpha.iter().zip(&w) {
        if *wj > 0.0 && *aj < 1.0 {
            kkt_residual = kkt_residual.max((aj * aj * wj / lambda - 1.0).abs());
        }
    }
    let constraint_residual = if alpha.iter().any(|&aj| aj < 1.0) {
        (alpha.iter().map(|aj| aj.ln()).sum::<f64>() - target).abs()
    } else {
        0.0
    };
    let alpha_star = WeightVector::new(alpha, kappa)?;
    Ok(BKappa { value, alpha_star, lambda, kkt_residual, constraint_residual })
}

/// Frequency of the large-deviation event `B_kappa(A) >= 2 E|A|_HS^2`
/// against the reference rate `(kappa/sqrt(2))^{-2n}`.
#[derive(Clone, Debug, Serialize)]
pub struct BKappaTailReport {
    pub occurrences: usize,
    pub trials: usize,
    pub frequency: f64,
    pub reference_rate: f64,
    pub expected_hs_sq: f64,
    pub kappa: f64,
}

pub fn b_kappa_tail_experiment(
    ensemble: &MatrixEnsemble,
    kappa: f64,
    trials: usize,
    seed: SeedSpec,
) -> Result<BKappaTailReport, NetsError> {
    if trials == 0 {
        return Err(NetsError::InvalidParameter { name: "trials", value: 0.0 });
    }
    let expected_hs_sq = ensemble.sum_second_moment();
    let mut occurrences = 0;
    for trial in 0..trials {
        let a = ensemble.sample_matrix(seed.with_stream(trial as u64));
        if b_kappa(&a, kappa)?.value >= 2.0 * expected_hs_sq {
            occurrences += 1;
        }
    }
    let n = ensemble.cols() as f64;
    Ok(BKappaTailReport {
        occurrences,
        trials,
        frequency: occurrences as f64 / trials as f64,
        reference_rate: (kappa / 2.0_f64.sqrt()).powf(-2.0 * n),
        expected_hs_sq,
        kappa,
    })
}

/// Result of net approximation: the rounded point plus the deterministic
/// image bound it satisfies.
#[derive(Clone, Debug, Serialize)]
pub struct NetApproximation {
    pub point: NetPoint,
    pub alpha: WeightVector,
    /// Optimal value `B_kappa(A)`.
    pub b_kappa: f64,
    /// `sum alpha_j^2 |A_j|^2` for the projected weights; at most `b_kappa`.
    pub b_projected: f64,
    /// `(eps/sqrt(n)) sqrt(b_projected)`.
    pub bound: f64,
    pub achieved: f64,
    pub attempts: usize,
}

/// Approximate `x` on the weight net: project the optimal `B_kappa`
/// weights onto the dyadic net and re-round until the deterministic image
/// bound holds. The expected number of attempts is below 4/3, since the
/// mean squared image error is at most a quarter of the squared bound.
pub fn approximate_on_net(
    x: &[f64],
    a: &DMatrix<f64>,
    kappa: f64,
    epsilon: f64,
    seed: SeedSpec,
    retry_cap: usize,
) -> Result<NetApproximation, NetsError> {
    let solution = b_kappa(a, kappa)?;
    let alpha = weight_net_project(&solution.alpha_star)?;
    let b_projected: f64 = a
        .column_iter()
        .zip(alpha.alpha())
        .map(|(col, &aj)| aj * aj * col.norm_squared())
        .sum();
    let n = x.len() as f64;
    let bound = epsilon / n.sqrt() * b_projected.sqrt();
    let mut rng = seed.rng();
    for attempt in 1..=retry_cap.max(1) {
        let point = random_round_with(x, &alpha, epsilon, &mut rng)?;
        let achieved = {
            let mut sq = 0.0;
            for i in 0..a.nrows() {
                let dot: f64 =
                    (0..a.ncols()).map(|j| a[(i, j)] * (x[j] - point.y[j])).sum();
                sq += dot * dot;
            }
            sq.sqrt()
        };
        if achieved <= bound + LOG_SLACK {
            return Ok(NetApproximation {
                point,
                alpha,
                b_kappa: solution.value,
                b_projected,
                bound,
                achieved,
                attempts: attempt,
            });
        }
    }
    Err(NetsError::RetryCapExceeded(retry_cap))
}

/// Rejection sampler for points uniform on
/// `Lambda = (3/2)B_2^n ∩ {spread} ∩ prod (lambda_i/sqrt(n)) Z`.
#[derive(Clone, Debug)]
pub struct LatticeSampler {
    spec: LatticeSpec,
    params: SphereParams,
    steps: Vec<f64>,
    k_max: Vec<i64>,
    acceptance_floor: f64,
}

impl LatticeSampler {
    pub fn new(spec: LatticeSpec, params: SphereParams, acceptance_floor: f64) -> Self {
        let steps = spec.steps();
        let k_max = steps.iter().map(|&h| floor_nudged(1.5 / h) as i64).collect();
        LatticeSampler { spec, params, steps, k_max, acceptance_floor }
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    /// One proposal from the per-coordinate lattice ranges covering the
    /// cube; `None` when it misses the ball or the spread condition.
    fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<f64>> {
        let w: Vec<f64> = self
            .steps
            .iter()
            .zip(&self.k_max)
            .map(|(&h, &k)| rng.random_range(-k..=k) as f64 * h)
            .collect();
        self.spec.admissible(&w, &self.params).then_some(w)
    }

    /// Estimate the acceptance rate on a pilot batch; errors when it falls
    /// below the configured floor.
    pub fn estimate_acceptance(
        &self,
        pilot: usize,
        seed: SeedSpec,
    ) -> Result<f64, NetsError> {
        let mut rng = seed.rng();
        let hits = (0..pilot.max(1)).filter(|_| self.propose(&mut rng).is_some()).count();
        let estimated = hits as f64 / pilot.max(1) as f64;
        if estimated < self.acceptance_floor {
            return Err(NetsError::AcceptanceFloor { estimated, floor: self.acceptance_floor });
        }
        Ok(estimated)
    }

    /// Draw one accepted point. The attempt cap corresponds to missing a
    /// floor-rate event about fifty times in a row.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>, NetsError> {
        let cap = (50.0 / self.acceptance_floor).ceil() as usize;
        for _ in 0..cap {
            if let Some(w) = self.propose(rng) {
                return Ok(w);
            }
        }
        Err(NetsError::AcceptanceFloor {
            estimated: 1.0 / cap as f64,
            floor: self.acceptance_floor,
        })
    }
}

/// One uniform point of the spread lattice set, with the default
/// acceptance floor 1e-4.
pub fn sample_lattice_point(
    spec: &LatticeSpec,
    params: &SphereParams,
    seed: SeedSpec,
) -> Result<Vec<f64>, NetsError> {
    let sampler = LatticeSampler::new(spec.clone(), *params, 1e-4);
    sampler.sample(&mut seed.rng())
}

/// Tuning for the structured-fraction experiment.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct UnstructuredOptions {
    pub grid_points: usize,
    pub grid_span: f64,
    pub mc_samples: usize,
    pub acceptance_floor: f64,
}

impl Default for UnstructuredOptions {
    fn default() -> Self {
        // The span keeps grid resolution near theta_max fine enough to
        // catch the narrow objective dips that make a point structured.
        UnstructuredOptions {
            grid_points: 20_000,
            grid_span: 1e4,
            mc_samples: 0,
            acceptance_floor: 1e-4,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UnstructuredReport {
    /// Fraction of sampled lattice points with RLCD below the threshold.
    pub fraction: f64,
    pub stderr: f64,
    pub samples: usize,
    /// `min_i 1/lambda_i`.
    pub threshold: f64,
    /// `Var|X| <= (1/8)(1-b) delta gamma^2 n^2` with `b = max_i L(X_i,1)`;
    /// reported, not enforced: at desk scale it fails for any useful gamma.
    pub hypothesis_ok: bool,
    pub variance_sum: f64,
    pub variance_budget: f64,
    pub max_levy_at_one: f64,
    pub gamma: f64,
    pub u: f64,
    /// Per-sample RLCD values, censoring mapped to +inf; kept so fractions
    /// can be re-read at lower thresholds without resampling.
    pub rlcd_values: Vec<f64>,
}

/// Fraction of values strictly below a (possibly lower) threshold.
pub fn structured_fraction_at(values: &[f64], threshold: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| v < threshold).count() as f64 / values.len() as f64
}

/// Estimate the probability that a uniform lattice point is structured:
/// `P_W { RLCD_{gamma sqrt(n), u}(W) < min_i 1/lambda_i }` for one row law
/// `X`.
pub fn unstructured_fraction_experiment(
    spec: &LatticeSpec,
    params: &SphereParams,
    laws: &[EntryDistribution],
    gamma: f64,
    u: f64,
    samples: usize,
    seed: SeedSpec,
    opts: &UnstructuredOptions,
) -> Result<UnstructuredReport, NetsError> {
    if laws.len() != spec.n() {
        return Err(NetsError::DimensionMismatch { left: laws.len(), right: spec.n() });
    }
    if samples == 0 {
        return Err(NetsError::InvalidParameter { name: "samples", value: 0.0 });
    }
    if !(gamma > 0.0) {
        return Err(NetsError::InvalidParameter { name: "gamma", value: gamma });
    }
    let n = laws.len();
    let threshold = spec.min_inverse_lambda();
    let base_query = RlcdQuery::new(gamma * (n as f64).sqrt(), u, n)?
        .with_theta_max(threshold)?
        .with_grid_span(opts.grid_span)?
        .with_grid_points(opts.grid_points);
    let sampler = LatticeSampler::new(spec.clone(), *params, opts.acceptance_floor);
    let mut rng = seed.rng();
    let mut rlcd_values = Vec::with_capacity(samples);
    for trial in 0..samples {
        let w = sampler.sample(&mut rng)?;
        let mut q = base_query;
        if opts.mc_samples > 0 {
            q = q.with_mc(opts.mc_samples, seed.with_stream(1 + trial as u64));
        }
        rlcd_values.push(rlcd(laws, &w, &q)?.outcome.value_or_infinity());
    }
    let fraction = structured_fraction_at(&rlcd_values, threshold);
    let variance_sum: f64 = laws.iter().map(EntryDistribution::variance).sum();
    let max_levy_at_one =
        laws.iter().map(EntryDistribution::levy_at_one).fold(0.0, f64::max);
    let variance_budget = 0.125
        * (1.0 - max_levy_at_one)
        * params.delta()
        * gamma
        * gamma
        * (n * n) as f64;
    Ok(UnstructuredReport {
        fraction,
        stderr: (fraction * (1.0 - fraction) / samples as f64).sqrt(),
        samples,
        threshold,
        hypothesis_ok: variance_sum <= variance_budget,
        variance_sum,
        variance_budget,
        max_levy_at_one,
        gamma,
        u,
        rlcd_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn unit(v: Vec<f64>) -> Vec<f64> {
        let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        v.into_iter().map(|t| t / norm).collect()
    }

    #[test]
    fn weight_vector_membership_checks() {
        let kappa = 5.0;
        assert!(WeightVector::new(vec![1.0; 4], kappa).unwrap().in_omega());
        // Product kappa^{-n} exactly: boundary member.
        let boundary = WeightVector::new(vec![1.0 / kappa; 4], kappa).unwrap();
        assert!(boundary.in_omega());
        // One deeper weight breaks the product.
        let err = WeightVector::new(vec![1.0 / kappa, 1.0 / kappa, 1.0 / kappa.powi(2)], kappa);
        assert!(matches!(err, Err(NetsError::OutsideOmega { .. })));
        assert!(matches!(
            WeightVector::new(vec![1.2], kappa),
            Err(NetsError::WeightOutOfRange { .. })
        ));
        assert!(matches!(WeightVector::new(vec![1.0], 2.0), Err(NetsError::KappaTooSmall(_))));
        // Free mode admits zero weights for rounding.
        let free = WeightVector::free(vec![0.0, 1.0], kappa).unwrap();
        assert!(!free.in_omega());
    }

    #[test]
    fn on_grid_vectors_are_rounding_fixed_points() {
        // n = 4, eps = 1/4: step 1/8 is dyadic, so e_1 sits on the grid.
        let x = [1.0, 0.0, 0.0, 0.0];
        let alpha = WeightVector::new(vec![1.0; 4], 5.0).unwrap();
        for stream in 0..20 {
            let p = random_round(&x, &alpha, 0.25, SeedSpec::new(3, stream)).unwrap();
            assert_eq!(p.y, x.to_vec());
            assert_eq!(p.indices, vec![8, 0, 0, 0]);
        }
    }

    #[test]
    fn rounding_is_unbiased_within_three_stderr() {
        let x = unit(vec![0.3, -0.7, 0.11, 0.45, -0.2, 0.37]);
        let alpha = WeightVector::free(vec![1.0, 0.8, 0.5, 1.0, 0.0, 0.33], 5.0).unwrap();
        let epsilon = 0.3;
        let trials = 100_000;
        let mut rng = SeedSpec::new(41, 0).rng();
        let mut mean = vec![0.0; 6];
        let mut mean_sq = vec![0.0; 6];
        for _ in 0..trials {
            let p = random_round_with(&x, &alpha, epsilon, &mut rng).unwrap();
            for j in 0..6 {
                mean[j] += p.y[j];
                mean_sq[j] += p.y[j] * p.y[j];
            }
        }
        for j in 0..6 {
            mean[j] /= trials as f64;
            mean_sq[j] /= trials as f64;
            let se = ((mean_sq[j] - mean[j] * mean[j]).max(0.0) / trials as f64).sqrt();
            assert!(
                (mean[j] - x[j]).abs() <= 3.0 * se + 1e-12,
                "coordinate {j}: mean {} target {} se {se}",
                mean[j],
                x[j]
            );
        }
    }

    #[test]
    fn rounding_respects_sup_bound_and_shell() {
        let mut rng = SeedSpec::new(42, 0).rng();
        for trial in 0..300 {
            let n = rng.random_range(2..12usize);
            let x = unit((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
            let alpha = WeightVector::free(
                (0..n).map(|_| rng.random_range(0.0..1.0)).collect(),
                5.0,
            )
            .unwrap();
            let epsilon = rng.random_range(0.01..0.5);
            let p = random_round_with(&x, &alpha, epsilon, &mut rng).unwrap();
            let cap = epsilon / (n as f64).sqrt();
            for j in 0..n {
                assert!((x[j] - p.y[j]).abs() <= cap + 1e-12, "trial {trial} coord {j}");
                if p.steps[j] > 0.0 {
                    // Reconstruction from integer indices is bit-stable.
                    assert_eq!(p.y[j], p.indices[j] as f64 * p.steps[j]);
                } else {
                    assert_eq!(p.y[j], x[j]);
                }
            }
            let norm = p.y.iter().map(|t| t * t).sum::<f64>().sqrt();
            assert!(norm > 0.5 && norm < 1.5, "trial {trial}: |y| = {norm}");
        }
    }

    #[test]
    fn zero_matrix_rounding_bound_is_zero() {
        let a = DMatrix::<f64>::zeros(5, 4);
        let x = unit(vec![1.0, 1.0, 1.0, 1.0]);
        let alpha = WeightVector::new(vec![1.0; 4], 5.0).unwrap();
        let check =
            rounding_column_bound_check(&a, &x, &alpha, 0.2, 200, SeedSpec::new(50, 0)).unwrap();
        assert!(check.holds);
        assert_eq!(check.bound, 0.0);
        assert_eq!(check.mean_sq, 0.0);
    }

    #[test]
    fn gaussian_matrix_rounding_bound_holds() {
        let n = 50;
        let mut rng = SeedSpec::new(51, 0).rng();
        let a = DMatrix::from_fn(n, n, |_, _| {
            rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
        });
        let x = unit((0..n).map(|_| rng.random_range(-1.0..1.0_f64)).collect());
        let alpha =
            WeightVector::free((0..n).map(|_| rng.random_range(0.1..1.0)).collect(), 5.0)
                .unwrap();
        let check =
            rounding_column_bound_check(&a, &x, &alpha, 0.3, 10_000, SeedSpec::new(52, 0))
                .unwrap();
        assert!(check.holds, "mean {} vs bound {}", check.mean_sq, check.bound);
        // The per-coordinate variance is frac(1-frac) h^2 <= h^2/4, so the
        // mean sits well below the bound, not just within 3 SE.
        assert!(check.mean_sq <= 0.5 * check.bound);
        assert!(check.min_observed_sq <= check.bound);
    }

    #[test]
    fn zero_weight_coordinates_are_copied_and_contribute_nothing() {
        // A huge column on a zero-weight coordinate must not enter either
        // side of the bound.
        let mut a = DMatrix::<f64>::identity(4, 4);
        a[(0, 0)] = 1e9;
        let x = unit(vec![0.5, 0.5, 0.5, 0.5]);
        let alpha = WeightVector::free(vec![0.0, 1.0, 1.0, 1.0], 5.0).unwrap();
        let check =
            rounding_column_bound_check(&a, &x, &alpha, 0.25, 2000, SeedSpec::new(53, 0))
                .unwrap();
        assert!(check.holds);
        assert!(check.bound < 1.0, "zero-weight column excluded from the bound");
    }

    #[test]
    fn weight_projection_examples() {
        let kappa = 5.0;
        let ones = WeightVector::new(vec![1.0; 3], kappa).unwrap();
        let projected = weight_net_project(&ones).unwrap();
        assert_eq!(projected.alpha(), &[1.0, 1.0, 1.0]);
        assert_eq!(projected.kappa(), std::f64::consts::E * kappa);

        let halves = WeightVector::new(vec![(-0.5_f64).exp(); 3], kappa).unwrap();
        let projected = weight_net_project(&halves).unwrap();
        for &a in projected.alpha() {
            assert!((a - (-1.0_f64).exp()).abs() < 1e-15);
        }

        // Idempotence and coordinate-wise domination.
        let mut rng = SeedSpec::new(60, 0).rng();
        for _ in 0..50 {
            let n = rng.random_range(1..8usize);
            let beta = WeightVector::new(
                (0..n).map(|_| rng.random_range(0.21..1.0)).collect(),
                kappa,
            )
            .unwrap();
            let once = weight_net_project(&beta).unwrap();
            let twice = weight_net_project(&once).unwrap();
            assert_eq!(once.alpha(), twice.alpha());
            for (a, b) in once.alpha().iter().zip(beta.alpha()) {
                assert!(a <= &(b * (1.0 + 2e-9)), "projection must not exceed input");
            }
            assert!(once.in_omega());
        }
    }

    /// Count vectors `k in Z_{>=0}^n` with `sum k_j <= m` by recursion.
    fn count_level_vectors(n: usize, m: usize) -> u64 {
        if n == 0 {
            return 1;
        }
        (0..=m).map(|first| count_level_vectors(n - 1, m - first)).sum()
    }

    #[test]
    fn projection_image_cardinality_is_polylog() {
        // Image log-coordinates satisfy sum k_j < n ln kappa + n; compare
        // the recursive count against the stars-and-bars closed form and
        // the (C log kappa)^n cap with C = 10.
        let kappa: f64 = 5.0;
        for n in 1..=6usize {
            let m = floor_nudged(n as f64 * (kappa.ln() + 1.0));
            let recursive = count_level_vectors(n, m);
            let mut closed = 1u64;
            for i in 1..=n as u64 {
                closed = closed * (m as u64 + i) / i;
            }
            assert_eq!(recursive, closed, "n = {n}");
            let cap = (10.0 * kappa.ln()).powi(n as i32);
            assert!(
                (recursive as f64) <= cap,
                "n = {n}: {recursive} distinct values vs cap {cap}"
            );
        }
    }

    #[test]
    fn b_kappa_equal_norm_closed_form() {
        let n = 7;
        let w = 1.3;
        let kappa = 3.0;
        let a = DMatrix::<f64>::identity(n, n) * w;
        let solution = b_kappa(&a, kappa).unwrap();
        let expected = n as f64 * w * w / (kappa * kappa);
        assert!(
            (solution.value - expected).abs() <= 1e-8 * expected,
            "value {} vs {expected}",
            solution.value
        );
        for &aj in solution.alpha_star.alpha() {
            assert!((aj - 1.0 / kappa).abs() < 1e-9);
        }
        assert!(solution.kkt_residual < 1e-6);
        assert!(solution.constraint_residual < 1e-8);
    }

    #[test]
    fn b_kappa_zero_column_relaxes_the_rest() {
        // With one zero column the remaining n-1 equal-norm weights share
        // the full budget: alpha = kappa^{-n/(n-1)}.
        let n = 5;
        let w = 2.0;
        let kappa = 4.0;
        let mut a = DMatrix::<f64>::zeros(n, n);
        for j in 0..n - 1 {
            a[(j, j)] = w;
        }
        let solution = b_kappa(&a, kappa).unwrap();
        let alpha_expected = kappa.powf(-(n as f64) / (n as f64 - 1.0));
        let expected = (n as f64 - 1.0) * w * w * alpha_expected * alpha_expected;
        assert!(
            (solution.value - expected).abs() <= 1e-8 * expected,
            "value {} vs {expected}",
            solution.value
        );
        assert_eq!(solution.alpha_star.alpha()[n - 1], 1.0);
        assert!(solution.constraint_residual < 1e-8);
    }

    #[test]
    fn b_kappa_all_zero_and_feasibility_bound() {
        let zero = DMatrix::<f64>::zeros(3, 3);
        let solution = b_kappa(&zero, 4.0).unwrap();
        assert_eq!(solution.value, 0.0);
        assert_eq!(solution.alpha_star.alpha(), &[1.0, 1.0, 1.0]);

        let mut rng = SeedSpec::new(61, 0).rng();
        for _ in 0..20 {
            let a = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-2.0..2.0));
            let hs = a.iter().map(|t| t * t).sum::<f64>();
            let solution = b_kappa(&a, 3.5).unwrap();
            assert!(solution.value <= hs + 1e-12, "alpha = 1 is feasible");
        }
    }

    /// Convex minimization over the active face `sum t_j = n ln kappa`,
    /// `t_j >= 0`, of `sum w_j e^{-2 t_j}` by nested ternary search.
    fn face_oracle(w: &[f64], kappa: f64) -> f64 {
        let budget = w.len() as f64 * kappa.ln();
        fn inner(w: &[f64], budget: f64) -> f64 {
            if w.len() == 1 {
                return w[0] * (-2.0 * budget).exp();
            }
            let mut lo = 0.0;
            let mut hi = budget;
            for _ in 0..200 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                let f1 = w[0] * (-2.0 * m1).exp() + inner(&w[1..], budget - m1);
                let f2 = w[0] * (-2.0 * m2).exp() + inner(&w[1..], budget - m2);
                if f1 <= f2 {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let t = 0.5 * (lo + hi);
            w[0] * (-2.0 * t).exp() + inner(&w[1..], budget - t)
        }
        inner(w, budget)
    }

    #[test]
    fn b_kappa_matches_face_oracle_at_small_n() {
        let mut rng = SeedSpec::new(62, 0).rng();
        for case in 0..100 {
            let n = if case % 2 == 0 { 2 } else { 3 };
            let kappa = rng.random_range(2.9..8.0);
            let mut a = DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                a[(j, j)] = rng.random_range(0.2..3.0);
            }
            let solution = b_kappa(&a, kappa).unwrap();
            let w: Vec<f64> = (0..n).map(|j| a[(j, j)] * a[(j, j)]).collect();
            let oracle = face_oracle(&w, kappa);
            assert!(
                (solution.value - oracle).abs() <= 1e-4 * oracle.max(1e-12),
                "case {case}: {} vs oracle {oracle}",
                solution.value
            );
        }
    }

    #[test]
    fn b_kappa_agrees_with_coarse_direct_grid_at_n_two() {
        // Direct 2-D log-grid search without the active-face reduction.
        let mut rng = SeedSpec::new(63, 0).rng();
        for _ in 0..10 {
            let kappa: f64 = rng.random_range(3.0..6.0);
            let w: [f64; 2] = [rng.random_range(0.5..4.0), rng.random_range(0.5..4.0)];
            let a = DMatrix::from_fn(2, 2, |i, j| if i == j { w[j].sqrt() } else { 0.0 });
            let solution = b_kappa(&a, kappa).unwrap();
            let floor = -2.0 * kappa.ln();
            let grid = 600;
            let mut best = f64::INFINITY;
            for i in 0..=grid {
                let la1 = floor * i as f64 / grid as f64;
                for j in 0..=grid {
                    let la2 = floor * j as f64 / grid as f64;
                    if la1 + la2 >= floor - 1e-12 {
                        let value = w[0] * (2.0 * la1).exp() + w[1] * (2.0 * la2).exp();
                        best = best.min(value);
                    }
                }
            }
            assert!(solution.value <= best + 1e-9, "optimizer beats the grid");
            assert!(best <= solution.value * 1.05, "grid comes close to the optimum");
        }
    }

    #[test]
    fn b_kappa_monotone_in_kappa() {
        let mut rng = SeedSpec::new(64, 0).rng();
        let a = DMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.5..1.5));
        let mut prev = f64::INFINITY;
        for kappa in [2.8, 3.5, 5.0, 8.0, 20.0] {
            let value = b_kappa(&a, kappa).unwrap().value;
            assert!(value <= prev * (1.0 + 1e-9), "kappa {kappa}: {value} vs {prev}");
            prev = value;
        }
    }

    #[test]
    fn b_kappa_tail_event_never_fires_at_small_scale() {
        let ensemble = MatrixEnsemble::iid(
            6,
            6,
            EntryDistribution::gaussian(0.0, 1.0).unwrap(),
            2.0,
            0.7,
        )
        .unwrap();
        let report = b_kappa_tail_experiment(&ensemble, 4.0, 200, SeedSpec::new(65, 0)).unwrap();
        assert_eq!(report.occurrences, 0);
        assert!(report.reference_rate < 1e-5);
        assert_eq!(report.expected_hs_sq, 36.0);
    }

    #[test]
    fn identity_approximation_bound_matches_closed_form() {
        let n = 16;
        let kappa = 5.0;
        let epsilon = 0.1;
        let a = DMatrix::<f64>::identity(n, n);
        let x = unit(vec![1.0; n]);
        let result =
            approximate_on_net(&x, &a, kappa, epsilon, SeedSpec::new(66, 0), 100).unwrap();
        // Equal norms: B_kappa = n / kappa^2, so the theorem bound is
        // eps/kappa; the projected weights can only shrink it.
        assert!((result.b_kappa - n as f64 / (kappa * kappa)).abs() < 1e-8);
        assert!(result.b_projected <= result.b_kappa + 1e-12);
        assert!(result.bound <= epsilon / kappa + 1e-12);
        assert!(result.achieved <= result.bound + 1e-9);
        let cap = epsilon / (n as f64).sqrt();
        for (xj, yj) in x.iter().zip(&result.point.y) {
            assert!((xj - yj).abs() <= cap + 1e-12);
        }
    }

    #[test]
    fn on_grid_input_needs_single_attempt() {
        // Zero matrix: all columns drop out, so the optimal weights are 1
        // and survive projection; step 1/8 is dyadic and e_1 rounds to
        // itself with image error 0 on the first attempt.
        let n = 4;
        let a = DMatrix::<f64>::zeros(n, n);
        let mut x = vec![0.0; n];
        x[0] = 1.0;
        let result = approximate_on_net(&x, &a, 16.0, 0.25, SeedSpec::new(67, 0), 100).unwrap();
        assert_eq!(result.alpha.alpha(), &[1.0; 4]);
        assert_eq!(result.attempts, 1);
        assert_eq!(result.achieved, 0.0);
        assert_eq!(result.point.y, x);
        assert_eq!(result.point.indices, vec![8, 0, 0, 0]);
    }

    #[test]
    fn random_net_approximations_stay_within_bounds() {
        let mut rng = SeedSpec::new(68, 0).rng();
        for trial in 0..40 {
            let n = rng.random_range(3..10usize);
            let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
            let x = unit((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
            let epsilon = rng.random_range(0.05..0.5);
            let result = approximate_on_net(
                &x,
                &a,
                rng.random_range(2.8..9.0),
                epsilon,
                SeedSpec::new(68, trial + 1),
                100,
            )
            .unwrap();
            assert!(result.achieved <= result.bound + 1e-9, "trial {trial}");
            let cap = epsilon / (n as f64).sqrt();
            for (xj, yj) in x.iter().zip(&result.point.y) {
                assert!((xj - yj).abs() <= cap + 1e-12);
            }
        }
    }

    #[test]
    fn lattice_spec_bounds() {
        assert!(LatticeSpec::uniform(0.01, 1).is_ok());
        assert!(matches!(
            LatticeSpec::uniform(0.02, 3),
            Err(NetsError::LatticeBounds { .. })
        ));
        // 6^{-5} ≈ 1.3e-4: values below it are rejected at n = 5.
        assert!(matches!(
            LatticeSpec::uniform(1e-4, 5),
            Err(NetsError::LatticeBounds { .. })
        ));
        assert!(LatticeSpec::uniform(2e-4, 5).is_ok());
        let spec = LatticeSpec::uniform(0.01, 4).unwrap();
        assert_eq!(spec.steps()[0], 0.005);
        assert!((spec.min_inverse_lambda() - 100.0).abs() < 1e-9);
    }

    /// All accepted lattice indices for a shared-scalar spec, by cube
    /// enumeration.
    fn enumerate_accepted(spec: &LatticeSpec, params: &SphereParams) -> Vec<Vec<i64>> {
        let steps = spec.steps();
        let k_max: Vec<i64> = steps.iter().map(|&h| floor_nudged(1.5 / h) as i64).collect();
        let mut out = Vec::new();
        let mut idx = vec![-k_max[0]; spec.n()];
        'outer: loop {
            let w: Vec<f64> =
                idx.iter().zip(&steps).map(|(&k, &h)| k as f64 * h).collect();
            if spec.admissible(&w, params) {
                out.push(idx.clone());
            }
            for d in (0..spec.n()).rev() {
                if idx[d] < k_max[d] {
                    idx[d] += 1;
                    for t in idx.iter_mut().skip(d + 1) {
                        *t = -k_max[0];
                    }
                    continue 'outer;
                }
            }
            break;
        }
        out
    }

    #[test]
    fn one_dimensional_lattice_sampling_is_uniform() {
        // Step 0.01, shell 1/2 <= |W| <= 3/2: 101 points per sign.
        let spec = LatticeSpec::uniform(0.01, 1).unwrap();
        let params = SphereParams::new(0.9, 0.5).unwrap();
        let accepted = enumerate_accepted(&spec, &params);
        assert_eq!(accepted.len(), 202);
        let sampler = LatticeSampler::new(spec.clone(), params, 1e-4);
        let step = spec.steps()[0];
        let draws = 60_000;
        let mut counts = std::collections::HashMap::new();
        let mut rng = SeedSpec::new(70, 0).rng();
        for _ in 0..draws {
            let w = sampler.sample(&mut rng).unwrap();
            let k = (w[0] / step).round() as i64;
            *counts.entry(k).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), accepted.len(), "support matches the enumeration");
        let expected = draws as f64 / accepted.len() as f64;
        let stat: f64 = accepted
            .iter()
            .map(|k| {
                let observed = *counts.get(&k[0]).unwrap_or(&0) as f64;
                (observed - expected) * (observed - expected) / expected
            })
            .sum();
        let df = (accepted.len() - 1) as f64;
        let p_value = 1.0 - ChiSquared::new(df).unwrap().cdf(stat);
        assert!(p_value > 0.01, "chi-squared {stat} with {df} dof, p = {p_value}");
    }

    #[test]
    fn sampled_points_always_satisfy_membership() {
        let spec = LatticeSpec::uniform(0.008, 5).unwrap();
        let params = SphereParams::new(0.4, 0.3).unwrap();
        let sampler = LatticeSampler::new(spec.clone(), params, 1e-4);
        let mut rng = SeedSpec::new(71, 0).rng();
        let steps = spec.steps();
        for _ in 0..500 {
            let w = sampler.sample(&mut rng).unwrap();
            assert!(spec.admissible(&w, &params));
            let norm = w.iter().map(|t| t * t).sum::<f64>().sqrt();
            assert!(norm <= 1.5 * (1.0 + 1e-9));
            for (wi, h) in w.iter().zip(&steps) {
                let k = (wi / h).round();
                assert!((wi - k * h).abs() < 1e-12, "off-lattice coordinate");
            }
        }
    }

    #[test]
    fn two_dimensional_point_frequencies_match_enumeration() {
        let spec = LatticeSpec::uniform(0.01, 2).unwrap();
        let params = SphereParams::new(0.9, 0.5).unwrap();
        let accepted = enumerate_accepted(&spec, &params);
        let total = accepted.len();
        assert!(total > 10_000, "enumerable but nontrivial: {total}");
        let sampler = LatticeSampler::new(spec.clone(), params, 1e-4);
        let steps = spec.steps();
        let draws = 500_000;
        let mut counts = std::collections::HashMap::new();
        let mut rng = SeedSpec::new(72, 0).rng();
        for _ in 0..draws {
            let w = sampler.sample(&mut rng).unwrap();
            let key =
                ((w[0] / steps[0]).round() as i64, (w[1] / steps[1]).round() as i64);
            *counts.entry(key).or_insert(0usize) += 1;
        }
        let expected = draws as f64 / total as f64;
        // Spot-check fixed points spread across the enumeration order.
        for pick in [0, total / 4, total / 2, 3 * total / 4, total - 1] {
            let k = &accepted[pick];
            let observed = *counts.get(&(k[0], k[1])).unwrap_or(&0) as f64;
            assert!(
                (observed - expected).abs() <= 4.0 * expected.sqrt() + 1.0,
                "point {k:?}: observed {observed}, expected {expected}"
            );
        }
    }

    #[test]
    fn acceptance_floor_is_enforced() {
        let spec = LatticeSpec::uniform(0.01, 2).unwrap();
        let params = SphereParams::new(0.9, 0.5).unwrap();
        let sampler = LatticeSampler::new(spec, params, 0.999);
        let err = sampler.estimate_acceptance(2000, SeedSpec::new(73, 0));
        assert!(matches!(err, Err(NetsError::AcceptanceFloor { .. })));
    }

    #[test]
    fn bernoulli_lattice_points_are_rarely_structured() {
        let n = 6;
        let spec = LatticeSpec::uniform(0.01, n).unwrap();
        let params = SphereParams::new(0.5, 0.3).unwrap();
        let laws = vec![EntryDistribution::signed_bernoulli(0.5).unwrap(); n];
        let report = unstructured_fraction_experiment(
            &spec,
            &params,
            &laws,
            0.03,
            0.05,
            150,
            SeedSpec::new(74, 0),
            &UnstructuredOptions::default(),
        )
        .unwrap();
        assert_eq!(report.samples, 150);
        assert!((report.threshold - 100.0).abs() < 1e-9);
        assert!(report.fraction <= 0.05, "fraction {}", report.fraction);
        // Threshold monotonicity on the same samples.
        let mut prev = 0.0;
        for threshold in [1.0, 10.0, 50.0, 100.0] {
            let f = structured_fraction_at(&report.rlcd_values, threshold);
            assert!(f >= prev);
            prev = f;
        }
        assert!((prev - report.fraction).abs() < 1e-12);
    }

    #[test]
    fn censored_rlcds_give_zero_fraction() {
        // Gaussian coordinates saturate the objective at 1/12 per nonzero
        // coordinate; the spread condition forces at least two of them, so
        // any cap below 2/12 keeps every sampled point censored. Here
        // L^2 = (0.15)^2 * 4 = 0.09.
        let n = 4;
        let spec = LatticeSpec::uniform(0.01, n).unwrap();
        let params = SphereParams::new(0.5, 0.3).unwrap();
        let laws = vec![EntryDistribution::gaussian(0.0, 1.0).unwrap(); n];
        let opts = UnstructuredOptions {
            grid_points: 800,
            mc_samples: 400,
            ..UnstructuredOptions::default()
        };
        let report = unstructured_fraction_experiment(
            &spec,
            &params,
            &laws,
            0.15,
            0.5,
            25,
            SeedSpec::new(75, 0),
            &opts,
        )
        .unwrap();
        assert_eq!(report.fraction, 0.0);
        assert!(report.rlcd_values.iter().all(|v| v.is_infinite()));
    }
}
