//! Lévy concentration estimates and the bounds that control them: the
//! characteristic-function (Esseen) integral, its product form for sums of
//! independent coordinates, the small-ball bound for matrix images, and
//! tensorization over coordinates.

use crate::ensembles::EntryDistribution;
use crate::rlcd::{rlcd_matrix, CalibrationConstants, RlcdOutcome, RlcdQuery};
use crate::rng::SeedSpec;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// Exact boundary ties count as inside the window, so discrete laws are
/// estimated from above and inequality checks stay sound.
const TIE_EPS: f64 = 1e-12;
/// Absolute quadrature tolerance.
const QUAD_TOL: f64 = 1e-8;
const QUAD_MAX_DEPTH: u32 = 40;
const QUAD_MIN_DEPTH: u32 = 10;

/// Exponent rate in `|φ(s)| <= exp(-c (1-|φ(s)|²))`, valid for every
/// characteristic function with c = 1/2 since `x <= exp(-(1-x²)/2)` on
/// [0, 1]. Not a calibration input.
const PRODUCT_EXPONENT_RATE: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum AnticoncError {
    #[error("empty sample set")]
    EmptySamples,
    #[error("parameter {name} = {value} outside its valid range")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("adaptive quadrature did not reach tolerance {tol} (deepest interval at {at})")]
    Quadrature { tol: f64, at: f64 },
    #[error("rlcd evaluation failed: {0}")]
    Rlcd(#[from] crate::rlcd::RlcdError),
}

/// Empirical Lévy concentration `sup_u P{|Z - u| < t}` from one sample set.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConcentrationEstimate {
    pub t: f64,
    pub value: f64,
    pub sample_count: usize,
    pub stderr: f64,
}

/// Maximum window mass over sliding windows of width `2t`. The optimal
/// window can be slid until its left edge hits a sample, so anchoring at
/// sample points is exhaustive. At `t = 0` this is the maximal tie
/// frequency.
pub fn levy_concentration(samples: &[f64], t: f64) -> Result<ConcentrationEstimate, AnticoncError> {
    if samples.is_empty() {
        return Err(AnticoncError::EmptySamples);
    }
    if !t.is_finite() || t < 0.0 {
        return Err(AnticoncError::InvalidParameter { name: "t", value: t });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let width = 2.0 * t + TIE_EPS;
    let n = sorted.len();
    let mut best = 0usize;
    let mut hi = 0usize;
    for lo in 0..n {
        if hi < lo {
            hi = lo;
        }
        while hi < n && sorted[hi] <= sorted[lo] + width {
            hi += 1;
        }
        best = best.max(hi - lo);
    }
    let value = best as f64 / n as f64;
    Ok(ConcentrationEstimate {
        t,
        value,
        sample_count: n,
        stderr: (value * (1.0 - value) / n as f64).sqrt(),
    })
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, AnticoncError> {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        m: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        force: u32,
    ) -> Result<f64, AnticoncError> {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let left = simpson(f, a, lm, m);
        let right = simpson(f, m, rm, b);
        let delta = left + right - whole;
        // The forced depth guards against aliasing: a periodic integrand
        // sampled only at dyadic points can fake early convergence.
        if force == 0 && delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(AnticoncError::Quadrature { tol, at: m });
        }
        let half = 0.5 * tol;
        let next_force = force.saturating_sub(1);
        Ok(recurse(f, a, lm, m, left, half, depth - 1, next_force)?
            + recurse(f, m, rm, b, right, half, depth - 1, next_force)?)
    }
    let m = 0.5 * (a + b);
    recurse(f, a, m, b, simpson(f, a, m, b), tol, QUAD_MAX_DEPTH, QUAD_MIN_DEPTH)
}

/// Esseen bound `C ∫_{-1}^{1} |φ(s/t)| ds` on the Lévy concentration at
/// scale `t`, for a law given by its characteristic function
/// `φ(ξ) = E exp(2πiξX)`.
pub fn esseen_bound<F: Fn(f64) -> Complex64>(
    phi: F,
    t: f64,
    c_levy: f64,
) -> Result<f64, AnticoncError> {
    if !t.is_finite() || t <= 0.0 {
        return Err(AnticoncError::InvalidParameter { name: "t", value: t });
    }
    if !c_levy.is_finite() || c_levy <= 0.0 {
        return Err(AnticoncError::InvalidParameter { name: "C_levy", value: c_levy });
    }
    let integrand = |s: f64| phi(s / t).norm();
    Ok(c_levy * adaptive_simpson(&integrand, -1.0, 1.0, QUAD_TOL)?)
}

/// Characteristic function of `⟨v, X⟩` for independent coordinates.
pub fn sum_char_fn<'a>(
    laws: &'a [EntryDistribution],
    v: &'a [f64],
) -> impl Fn(f64) -> Complex64 + 'a {
    move |s: f64| {
        laws.iter()
            .zip(v)
            .map(|(law, &vi)| law.char_fn(s * vi))
            .product()
    }
}

/// Product-form concentration bound for `⟨v, X⟩` at scale `t`:
///
/// ```text
/// C ∫_{-1}^{1} exp(-c Σ_i E[1 - cos(2π s v_i X̄_i / t)]) ds
/// ```
///
/// with `E[1 - cos(2π ξ X̄_i)] = 1 - |φ_i(ξ)|²` for the symmetrized
/// coordinate, and `c = 1/2`. Dominates the Esseen bound of the sum law at
/// the same `C` because `|φ| <= exp(-(1 - |φ|²)/2)` factor by factor.
pub fn concentration_bound_sum(
    laws: &[EntryDistribution],
    v: &[f64],
    t: f64,
    consts: &CalibrationConstants,
) -> Result<f64, AnticoncError> {
    if laws.len() != v.len() {
        return Err(AnticoncError::InvalidParameter {
            name: "v (length mismatch)",
            value: v.len() as f64,
        });
    }
    if !t.is_finite() || t <= 0.0 {
        return Err(AnticoncError::InvalidParameter { name: "t", value: t });
    }
    let integrand = |s: f64| {
        let exponent: f64 = laws
            .iter()
            .zip(v)
            .map(|(law, &vi)| 1.0 - law.char_fn(s * vi / t).norm_sqr())
            .sum();
        (-PRODUCT_EXPONENT_RATE * exponent).exp()
    };
    Ok(consts.c_levy * adaptive_simpson(&integrand, -1.0, 1.0, QUAD_TOL)?)
}

/// Right-hand side of the small-ball bound `P{|Mx| <= ε√m} <= (Cε)^m`.
#[derive(Clone, Debug, Serialize)]
pub struct SmallBallBound {
    pub epsilon: f64,
    /// Admissibility floor `C exp(-c̃L²) + C / RLCD`; censored RLCD
    /// contributes nothing.
    pub epsilon_min: f64,
    pub rlcd: RlcdOutcome,
    /// `(Cε)^m` when `ε` is admissible.
    pub bound: Option<f64>,
    /// The bound is at least 1 and carries no information.
    pub vacuous: bool,
    pub m: usize,
}

impl SmallBallBound {
    pub fn applicable(&self) -> bool {
        self.bound.is_some()
    }
}

/// Evaluate `(Cε)^m` for the image of a fixed direction `x` under a matrix
/// with independent rows, after checking the admissibility floor on `ε`
/// built from the matrix RLCD of `x`.
pub fn small_ball_rhs(
    x: &[f64],
    rows: &[Vec<EntryDistribution>],
    q: &RlcdQuery,
    epsilon: f64,
    consts: &CalibrationConstants,
) -> Result<SmallBallBound, AnticoncError> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(AnticoncError::InvalidParameter { name: "epsilon", value: epsilon });
    }
    let norm = x.iter().map(|t| t * t).sum::<f64>().sqrt();
    if norm < consts.c0 {
        return Err(AnticoncError::InvalidParameter { name: "|x| (needs |x| >= c0)", value: norm });
    }
    let value = rlcd_matrix(rows, x, q)?;
    let c = consts.c_levy;
    let floor = c * (-consts.c_tilde * q.l * q.l).exp();
    let epsilon_min = match value.outcome {
        RlcdOutcome::Finite(d) => floor + c / d,
        RlcdOutcome::Censored(_) => floor,
    };
    let m = rows.len();
    let (bound, vacuous) = if epsilon >= epsilon_min {
        let b = (c * epsilon).powi(m as i32);
        (Some(b), b >= 1.0)
    } else {
        (None, false)
    };
    Ok(SmallBallBound { epsilon, epsilon_min, rlcd: value.outcome, bound, vacuous, m })
}

#[derive(Clone, Debug, Serialize)]
pub struct SmallBallObservation {
    pub bound: SmallBallBound,
    /// Empirical `P{|Mx| <= ε√m}`.
    pub empirical: f64,
    pub stderr: f64,
    pub trials: usize,
    /// Bound holds (trivially true when inapplicable or vacuous).
    pub ok: bool,
}

/// Companion experiment: sample matrices with the given independent rows,
/// estimate `P{|Mx| <= ε√m}` on a grid of `ε`, and compare with `(Cε)^m`.
pub fn small_ball_experiment(
    x: &[f64],
    rows: &[Vec<EntryDistribution>],
    q: &RlcdQuery,
    epsilon_grid: &[f64],
    trials: usize,
    seed: SeedSpec,
    consts: &CalibrationConstants,
) -> Result<Vec<SmallBallObservation>, AnticoncError> {
    if trials == 0 {
        return Err(AnticoncError::InvalidParameter { name: "trials", value: 0.0 });
    }
    let m = rows.len() as f64;
    let mut norms = Vec::with_capacity(trials);
    let mut rng = seed.rng();
    for _ in 0..trials {
        let mut sq = 0.0;
        for row in rows {
            let dot: f64 = row.iter().zip(x).map(|(law, &xi)| law.sample(&mut rng) * xi).sum();
            sq += dot * dot;
        }
        norms.push(sq.sqrt());
    }
    epsilon_grid
        .iter()
        .map(|&epsilon| {
            let bound = small_ball_rhs(x, rows, q, epsilon, consts)?;
            let radius = epsilon * m.sqrt();
            let hits = norms.iter().filter(|&&n| n <= radius).count();
            let empirical = hits as f64 / trials as f64;
            let stderr = (empirical * (1.0 - empirical) / trials as f64).sqrt();
            let ok = match bound.bound {
                Some(b) => empirical <= b + 3.0 * stderr + TIE_EPS,
                None => true,
            };
            Ok(SmallBallObservation { bound, empirical, stderr, trials, ok })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TensorizationRow {
    pub epsilon: f64,
    /// Empirical `P{Σ Y_i² <= ε²m}`.
    pub empirical: f64,
    pub stderr: f64,
    /// `(C K ε)^m`.
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TensorizationReport {
    /// Per-coordinate hypothesis `P{|Y| <= ε} <= Kε` verified empirically
    /// on the grid.
    pub hypothesis_ok: bool,
    pub hypothesis_worst_ratio: f64,
    pub rows: Vec<TensorizationRow>,
    pub worst_ratio: f64,
    pub pass: bool,
}

/// Check that per-coordinate small-ball control tensorizes:
/// `P{Σ_{i<=m} Y_i² <= ε²m} <= (C K ε)^m` for iid coordinates `Y_i`.
pub fn tensorization_check(
    law: &EntryDistribution,
    m: usize,
    epsilon_grid: &[f64],
    k_levy: f64,
    c_tensor: f64,
    trials: usize,
    seed: SeedSpec,
) -> Result<TensorizationReport, AnticoncError> {
    if m == 0 {
        return Err(AnticoncError::InvalidParameter { name: "m", value: 0.0 });
    }
    if trials == 0 {
        return Err(AnticoncError::InvalidParameter { name: "trials", value: 0.0 });
    }
    let mut rng = seed.rng();
    // Hypothesis pass: fresh draws, one coordinate.
    let singles: Vec<f64> = (0..trials).map(|_| law.sample(&mut rng).abs()).collect();
    let mut hypothesis_worst_ratio: f64 = 0.0;
    let mut hypothesis_ok = true;
    for &epsilon in epsilon_grid {
        let p = singles.iter().filter(|&&y| y <= epsilon + TIE_EPS).count() as f64
            / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        hypothesis_worst_ratio = hypothesis_worst_ratio.max(p / (k_levy * epsilon));
        if p > k_levy * epsilon + 3.0 * se + TIE_EPS {
            hypothesis_ok = false;
        }
    }
    // Main pass: sums of m squares.
    let sums: Vec<f64> = (0..trials)
        .map(|_| (0..m).map(|_| law.sample(&mut rng).powi(2)).sum())
        .collect();
    let mut rows = Vec::with_capacity(epsilon_grid.len());
    let mut worst_ratio: f64 = 0.0;
    let mut pass = true;
    for &epsilon in epsilon_grid {
        let radius_sq = epsilon * epsilon * m as f64;
        let hits = sums.iter().filter(|&&s| s <= radius_sq + TIE_EPS).count();
        let empirical = hits as f64 / trials as f64;
        let stderr = (empirical * (1.0 - empirical) / trials as f64).sqrt();
        let bound = (c_tensor * k_levy * epsilon).powi(m as i32);
        let ratio = empirical / bound;
        worst_ratio = worst_ratio.max(ratio);
        if empirical > bound + 3.0 * stderr + TIE_EPS {
            pass = false;
        }
        rows.push(TensorizationRow { epsilon, empirical, stderr, bound, ratio });
    }
    Ok(TensorizationReport { hypothesis_ok, hypothesis_worst_ratio, rows, worst_ratio, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use statrs::function::erf::erf;
    use std::f64::consts::PI;

    #[test]
    fn constant_samples_concentrate_fully() {
        let samples = vec![3.25; 40];
        let est = levy_concentration(&samples, 0.5).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.stderr, 0.0);
        let at_zero = levy_concentration(&samples, 0.0).unwrap();
        assert_eq!(at_zero.value, 1.0);
    }

    #[test]
    fn tie_frequency_at_zero_width() {
        let samples = [1.0, 1.0, 1.0, 2.0, 2.0, 5.0, 7.0, 9.0, 11.0, 13.0];
        let est = levy_concentration(&samples, 0.0).unwrap();
        assert_eq!(est.value, 0.3);
    }

    #[test]
    fn uniform_samples_match_exact_window_mass() {
        // L(U[0,1], t) = min(1, 2t): at t = 1/4 a width-1/2 window holds
        // half the mass.
        let mut rng = SeedSpec::new(900, 0).rng();
        let samples: Vec<f64> = (0..100_000).map(|_| rng.random_range(0.0..1.0)).collect();
        let est = levy_concentration(&samples, 0.25).unwrap();
        assert!(
            (est.value - 0.5).abs() <= 3.0 * est.stderr + 0.01,
            "value {} stderr {}",
            est.value,
            est.stderr
        );
    }

    #[test]
    fn concentration_monotone_in_t_and_shift_invariant() {
        let mut rng = SeedSpec::new(901, 0).rng();
        let samples: Vec<f64> = (0..5000).map(|_| rng.random_range(-2.0..2.0_f64).powi(3)).collect();
        let shifted: Vec<f64> = samples.iter().map(|x| x + 17.5).collect();
        let mut prev = 0.0;
        for t in [0.0, 0.05, 0.1, 0.3, 0.8, 2.0, 10.0] {
            let est = levy_concentration(&samples, t).unwrap();
            assert!(est.value >= prev, "monotonicity violated at t = {t}");
            prev = est.value;
            let est_shifted = levy_concentration(&shifted, t).unwrap();
            assert!((est.value - est_shifted.value).abs() < 1e-12);
        }
        assert_eq!(prev, 1.0, "window covering the range holds everything");
    }

    #[test]
    fn point_mass_esseen_bound_is_twice_c() {
        let c = 2.0;
        // φ of a point mass at 0.7 has modulus 1 everywhere.
        let phi = |s: f64| Complex64::new(0.0, 2.0 * PI * s * 0.7).exp();
        let bound = esseen_bound(phi, 0.3, c).unwrap();
        assert!((bound - 2.0 * c).abs() < 1e-7, "bound {bound}");
    }

    #[test]
    fn gaussian_esseen_bound_matches_closed_form() {
        let law = EntryDistribution::gaussian(0.0, 1.0).unwrap();
        let bound = esseen_bound(|s| law.char_fn(s), 1.0, 1.0).unwrap();
        // ∫_{-1}^{1} e^{-2π²s²} ds = erf(π√2) / √(2π).
        let exact = erf(PI * 2.0_f64.sqrt()) / (2.0 * PI).sqrt();
        assert!((bound - exact).abs() < 1e-6, "bound {bound} exact {exact}");
    }

    #[test]
    fn esseen_bound_invariant_under_translation() {
        let base = EntryDistribution::discrete(&[(-1.0, 0.3), (0.5, 0.2), (2.0, 0.5)]).unwrap();
        let shifted =
            EntryDistribution::discrete(&[(9.0, 0.3), (10.5, 0.2), (12.0, 0.5)]).unwrap();
        for t in [0.4, 1.0, 3.0] {
            let a = esseen_bound(|s| base.char_fn(s), t, 2.0).unwrap();
            let b = esseen_bound(|s| shifted.char_fn(s), t, 2.0).unwrap();
            assert!((a - b).abs() < 1e-8, "t = {t}: {a} vs {b}");
        }
    }

    #[test]
    fn esseen_bound_dominates_empirical_concentration() {
        let laws = [
            EntryDistribution::gaussian(0.0, 1.0).unwrap(),
            EntryDistribution::uniform(-1.0, 1.0).unwrap(),
            EntryDistribution::signed_bernoulli(0.5).unwrap(),
            EntryDistribution::discrete(&[(-0.8, 0.25), (0.1, 0.4), (1.3, 0.35)]).unwrap(),
        ];
        let c_levy = CalibrationConstants::default().c_levy;
        let mut rng = SeedSpec::new(902, 0).rng();
        for (k, law) in laws.iter().enumerate() {
            let samples: Vec<f64> = (0..100_000).map(|_| law.sample(&mut rng)).collect();
            for t in [0.5, 1.0, 2.0] {
                let empirical = levy_concentration(&samples, t).unwrap();
                let bound = esseen_bound(|s| law.char_fn(s), t, c_levy).unwrap();
                assert!(
                    empirical.value <= bound,
                    "law {k}, t {t}: empirical {} vs bound {bound}",
                    empirical.value
                );
            }
        }
    }

    #[test]
    fn zero_direction_sum_bound_is_twice_c() {
        let laws = vec![EntryDistribution::gaussian(0.0, 1.0).unwrap(); 3];
        let v = [0.0; 3];
        let consts = CalibrationConstants::default();
        let bound = concentration_bound_sum(&laws, &v, 1.0, &consts).unwrap();
        assert!((bound - 2.0 * consts.c_levy).abs() < 1e-7);
    }

    #[test]
    fn bernoulli_sum_bound_matches_trig_closed_form() {
        // X̄ for signed Bernoulli(1/2) has E[1 - cos(2πsX̄)] = (1 - cos 4πs)/2.
        let laws = vec![EntryDistribution::signed_bernoulli(0.5).unwrap()];
        let consts = CalibrationConstants::default();
        let bound = concentration_bound_sum(&laws, &[1.0], 1.0, &consts).unwrap();
        let panels = 40_000;
        let h = 2.0 / panels as f64;
        let f = |s: f64| (-0.25 * (1.0 - (4.0 * PI * s).cos())).exp();
        let mut acc = f(-1.0) + f(1.0);
        for k in 1..panels {
            let s = -1.0 + k as f64 * h;
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(s);
        }
        let reference = consts.c_levy * acc * h / 3.0;
        assert!((bound - reference).abs() < 1e-6, "bound {bound} reference {reference}");
    }

    #[test]
    fn product_bound_dominates_esseen_of_the_sum() {
        let mut rng = SeedSpec::new(903, 0).rng();
        let consts = CalibrationConstants::default();
        for _ in 0..20 {
            let n = rng.random_range(1..5usize);
            let laws: Vec<EntryDistribution> = (0..n)
                .map(|_| {
                    let a = rng.random_range(0.3..1.5);
                    let p = rng.random_range(0.2..0.8);
                    EntryDistribution::discrete(&[(-a, 1.0 - p), (a, p)]).unwrap()
                })
                .collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let t = rng.random_range(0.3..3.0);
            let product = concentration_bound_sum(&laws, &v, t, &consts).unwrap();
            let esseen = esseen_bound(sum_char_fn(&laws, &v), t, consts.c_levy).unwrap();
            assert!(
                product >= esseen - 1e-7,
                "product {product} vs esseen {esseen} (n {n}, t {t})"
            );
        }
    }

    fn bernoulli_rows(m: usize, n: usize) -> Vec<Vec<EntryDistribution>> {
        vec![vec![EntryDistribution::signed_bernoulli(0.5).unwrap(); n]; m]
    }

    #[test]
    fn vacuous_epsilon_is_flagged() {
        // Flat direction over iid signed Bernoulli has RLCD ≈ 0.4√n, so the
        // admissibility floor C/RLCD clears 0.9 once n is large enough.
        let n = 100;
        let rows = bernoulli_rows(4, n);
        let x = vec![1.0 / (n as f64).sqrt(); n];
        let consts = CalibrationConstants::default();
        let q = RlcdQuery::new(3.0, 0.125, n).unwrap();
        let bound = small_ball_rhs(&x, &rows, &q, 0.9, &consts).unwrap();
        assert!(bound.applicable(), "epsilon_min = {}", bound.epsilon_min);
        assert!(bound.vacuous, "(Cε)^m = {:?}", bound.bound);
        assert!(bound.bound.unwrap() >= 1.0);
    }

    #[test]
    fn inadmissible_epsilon_reports_no_bound() {
        let n = 8;
        let rows = bernoulli_rows(4, n);
        let x = vec![1.0 / (n as f64).sqrt(); n];
        let consts = CalibrationConstants::default();
        let q = RlcdQuery::new(2.0, 0.125, n).unwrap();
        let bound = small_ball_rhs(&x, &rows, &q, 1e-9, &consts).unwrap();
        assert!(!bound.applicable());
        assert!(bound.epsilon_min > 1e-9);
    }

    #[test]
    fn censored_rlcd_reduces_floor_to_the_exponential_term() {
        let n = 16;
        let gamma = 0.25;
        let rows = vec![vec![EntryDistribution::gaussian(0.0, 1.0).unwrap(); n]; 3];
        let x = vec![1.0 / (n as f64).sqrt(); n];
        let consts = CalibrationConstants::default();
        let l = gamma * (n as f64).sqrt();
        let q = RlcdQuery::new(l, 0.5, n)
            .unwrap()
            .with_mc(1500, SeedSpec::new(904, 0))
            .with_grid_points(1500);
        let bound = small_ball_rhs(&x, &rows, &q, 0.5, &consts).unwrap();
        assert!(bound.rlcd.is_censored());
        let floor = consts.c_levy * (-consts.c_tilde * l * l).exp();
        assert!((bound.epsilon_min - floor).abs() < 1e-12);
    }

    #[test]
    fn small_ball_bound_dominates_monte_carlo() {
        // RLCD ≈ 0.4√200 ≈ 5.66, floor ≈ 0.44, so 0.45 is admissible and
        // non-vacuous while 0.6 and 0.9 exercise the vacuous branch.
        let n = 200;
        let m = 20;
        let rows = bernoulli_rows(m, n);
        let x = vec![1.0 / (n as f64).sqrt(); n];
        let consts = CalibrationConstants::default();
        let q = RlcdQuery::new(2.5, 0.125, n).unwrap();
        let grid = [0.45, 0.6, 0.9];
        let observations =
            small_ball_experiment(&x, &rows, &q, &grid, 10_000, SeedSpec::new(905, 0), &consts)
                .unwrap();
        assert_eq!(observations.len(), grid.len());
        assert!(observations[0].bound.applicable() && !observations[0].bound.vacuous);
        assert!(observations[0].empirical < observations[0].bound.bound.unwrap());
        for obs in observations {
            assert!(obs.ok, "epsilon {}: empirical {}", obs.bound.epsilon, obs.empirical);
        }
    }

    #[test]
    fn uniform_coordinate_satisfies_unit_levy_hypothesis() {
        // P{|U[-1,1]| <= ε} = ε exactly.
        let law = EntryDistribution::uniform(-1.0, 1.0).unwrap();
        let report = tensorization_check(
            &law,
            1,
            &[0.1, 0.3, 0.5, 0.9],
            1.0,
            3.0,
            200_000,
            SeedSpec::new(906, 0),
        )
        .unwrap();
        assert!(report.hypothesis_ok, "worst ratio {}", report.hypothesis_worst_ratio);
        assert!(report.hypothesis_worst_ratio > 0.9, "should be near equality");
        // m = 1: the checked statement is the hypothesis with C K = 3.
        assert!(report.pass);
        for row in &report.rows {
            assert!((row.empirical - row.epsilon).abs() <= 4.0 * row.stderr + 0.005);
        }
    }

    #[test]
    fn tensorized_small_ball_for_ten_uniform_coordinates() {
        let law = EntryDistribution::uniform(-1.0, 1.0).unwrap();
        let report = tensorization_check(
            &law,
            10,
            &[0.3],
            1.0,
            3.0,
            1_000_000,
            SeedSpec::new(907, 0),
        )
        .unwrap();
        assert!(report.hypothesis_ok);
        assert!(report.pass, "worst ratio {}", report.worst_ratio);
        let row = &report.rows[0];
        assert!((row.bound - 0.9_f64.powi(10)).abs() < 1e-12);
        assert!(row.empirical < row.bound, "empirical {} bound {}", row.empirical, row.bound);
    }

    #[test]
    fn empty_samples_rejected() {
        assert_eq!(levy_concentration(&[], 1.0).unwrap_err(), AnticoncError::EmptySamples);
    }
}
