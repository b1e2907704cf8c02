//! Decomposition of the unit sphere into compressible and incompressible
//! vectors.
//!
//! A vector is `(delta, rho)`-compressible when it sits within `rho` of the
//! set of vectors supported on at most `floor(delta * n)` coordinates. The
//! distance to that set is exactly the Euclidean norm of the vector outside
//! its largest-magnitude coordinates, which is what [`distance_to_sparse`]
//! computes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SphereError {
    #[error("parameter {name} = {value} outside (0, 1)")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Sparsity fraction `delta` and compressibility radius `rho`, both in (0, 1).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SphereParams {
    delta: f64,
    rho: f64,
}

impl SphereParams {
    pub fn new(delta: f64, rho: f64) -> Result<Self, SphereError> {
        if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
            return Err(SphereError::InvalidParameter { name: "delta", value: delta });
        }
        if !rho.is_finite() || rho <= 0.0 || rho >= 1.0 {
            return Err(SphereError::InvalidParameter { name: "rho", value: rho });
        }
        Ok(SphereParams { delta, rho })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `floor(delta * n)`, nudged so that an exactly integer `delta * n`
    /// is not pushed down by float rounding.
    pub fn sparse_support(&self, n: usize) -> usize {
        floor_nudged(self.delta * n as f64).min(n)
    }
}

/// `floor(x)` with a tolerance for values a few ulps below an integer.
pub(crate) fn floor_nudged(x: f64) -> usize {
    (x + 1e-9).floor().max(0.0) as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SphereClass {
    Compressible,
    Incompressible,
}

/// Classification of a unit vector, with the witnesses used to decide it.
#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub class: SphereClass,
    pub distance_to_sparse: f64,
    /// Number of coordinates with `|x_i| >= rho / sqrt(n)`.
    pub spread_count: usize,
}

/// Indices of the `k` largest-magnitude coordinates, ties resolved toward
/// the lower index. Returns a membership mask.
fn top_magnitude_mask(x: &[f64], k: usize) -> Vec<bool> {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
    let mut mask = vec![false; n];
    for &i in idx.iter().take(k) {
        mask[i] = true;
    }
    mask
}

/// Euclidean norm of `x` outside its `floor(delta * n)` largest-magnitude
/// coordinates: the exact distance from `x` to the vectors supported on at
/// most that many coordinates.
pub fn distance_to_sparse(x: &[f64], delta: f64) -> f64 {
    let n = x.len();
    let k = floor_nudged(delta * n as f64).min(n);
    let mask = top_magnitude_mask(x, k);
    let mut tail = 0.0;
    for i in 0..n {
        if !mask[i] {
            tail += x[i] * x[i];
        }
    }
    tail.sqrt()
}

/// Number of coordinates with `|x_i| >= rho / sqrt(n)`.
pub fn spread_count(x: &[f64], rho: f64) -> usize {
    let threshold = rho / (x.len() as f64).sqrt();
    x.iter().filter(|v| v.abs() >= threshold).count()
}

/// Classify a unit vector. Panics if `x` is not unit within 1e-6; the
/// decomposition is only meaningful on the sphere.
pub fn classify(x: &[f64], params: &SphereParams) -> Classification {
    let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(
        (norm - 1.0).abs() <= 1e-6,
        "classify expects a unit vector, got norm {norm}"
    );
    let distance = distance_to_sparse(x, params.delta);
    let class = if distance <= params.rho {
        SphereClass::Compressible
    } else {
        SphereClass::Incompressible
    };
    Classification {
        class,
        distance_to_sparse: distance,
        spread_count: spread_count(x, params.rho),
    }
}
