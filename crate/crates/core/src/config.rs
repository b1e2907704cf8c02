//! TOML experiment configuration: sections `ensemble`, `sphere`, `rlcd`,
//! `experiment`, and `constants`, all optional with frozen defaults.

use crate::ensembles::{EnsembleError, EntryDistribution, MatrixEnsemble};
use crate::harness::BoundCurve;
use crate::rlcd::{CalibrationConstants, RlcdError, RlcdQuery};
use crate::rng::SeedSpec;
use crate::sphere::{SphereError, SphereParams};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Sphere(#[from] SphereError),
    #[error(transparent)]
    Rlcd(#[from] RlcdError),
}

fn default_variance() -> f64 {
    1.0
}
fn default_p() -> f64 {
    0.5
}

/// One entry law, tagged by kind.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LawConfig {
    Gaussian {
        #[serde(default)]
        mean: f64,
        #[serde(default = "default_variance")]
        variance: f64,
    },
    SignedBernoulli {
        #[serde(default = "default_p")]
        p: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    Triangular {
        width: f64,
    },
    PointMass {
        value: f64,
    },
}

impl Default for LawConfig {
    fn default() -> Self {
        LawConfig::Gaussian { mean: 0.0, variance: 1.0 }
    }
}

impl LawConfig {
    pub fn build(&self) -> Result<EntryDistribution, EnsembleError> {
        match *self {
            LawConfig::Gaussian { mean, variance } => {
                EntryDistribution::gaussian(mean, variance)
            }
            LawConfig::SignedBernoulli { p } => EntryDistribution::signed_bernoulli(p),
            LawConfig::Uniform { lo, hi } => EntryDistribution::uniform(lo, hi),
            LawConfig::Triangular { width } => EntryDistribution::triangular(width),
            LawConfig::PointMass { value } => EntryDistribution::point_mass(value),
        }
    }
}

fn default_rows() -> usize {
    50
}
fn default_k() -> f64 {
    2.0
}
fn default_b() -> f64 {
    0.7
}
fn default_p_lo() -> f64 {
    0.2
}
fn default_p_hi() -> f64 {
    0.8
}

/// Matrix ensemble, tagged by kind.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnsembleConfig {
    Iid {
        #[serde(default = "default_rows")]
        rows: usize,
        #[serde(default = "default_rows")]
        cols: usize,
        #[serde(default)]
        law: LawConfig,
        #[serde(default = "default_k")]
        k: f64,
        #[serde(default = "default_b")]
        b: f64,
    },
    SignedGrid {
        #[serde(default = "default_rows")]
        rows: usize,
        #[serde(default = "default_rows")]
        cols: usize,
        #[serde(default = "default_p_lo")]
        p_lo: f64,
        #[serde(default = "default_p_hi")]
        p_hi: f64,
        #[serde(default = "default_k")]
        k: f64,
        #[serde(default = "default_b")]
        b: f64,
    },
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig::Iid {
            rows: default_rows(),
            cols: default_rows(),
            law: LawConfig::default(),
            k: default_k(),
            b: default_b(),
        }
    }
}

impl EnsembleConfig {
    pub fn build(&self) -> Result<MatrixEnsemble, EnsembleError> {
        match self {
            EnsembleConfig::Iid { rows, cols, law, k, b } => {
                MatrixEnsemble::iid(*rows, *cols, law.build()?, *k, *b)
            }
            EnsembleConfig::SignedGrid { rows, cols, p_lo, p_hi, k, b } => {
                MatrixEnsemble::signed_bernoulli_grid(*rows, *cols, *p_lo, *p_hi, *k, *b)
            }
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            EnsembleConfig::Iid { cols, .. } | EnsembleConfig::SignedGrid { cols, .. } => {
                *cols
            }
        }
    }
}

fn default_delta() -> f64 {
    0.1
}
fn default_rho() -> f64 {
    0.2
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct SphereConfig {
    pub delta: f64,
    pub rho: f64,
}

impl Default for SphereConfig {
    fn default() -> Self {
        SphereConfig { delta: default_delta(), rho: default_rho() }
    }
}

impl SphereConfig {
    pub fn build(&self) -> Result<SphereParams, SphereError> {
        SphereParams::new(self.delta, self.rho)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct RlcdConfig {
    /// Scale factor in `L = gamma sqrt(n)`.
    pub gamma: f64,
    pub u: f64,
    pub grid_points: usize,
    pub grid_span: f64,
    /// 0 keeps evaluation exact-only.
    pub mc_samples: usize,
    /// 0 keeps the query default.
    pub theta_max: f64,
}

impl Default for RlcdConfig {
    fn default() -> Self {
        RlcdConfig {
            gamma: 0.25,
            u: 0.125,
            grid_points: 10_000,
            grid_span: 1e8,
            mc_samples: 0,
            theta_max: 0.0,
        }
    }
}

impl RlcdConfig {
    /// Query for an `n`-dimensional direction; `seed` feeds Monte Carlo
    /// sampling when `mc_samples > 0`.
    pub fn query(&self, n: usize, seed: SeedSpec) -> Result<RlcdQuery, RlcdError> {
        let mut q = RlcdQuery::new(self.gamma * (n as f64).sqrt(), self.u, n)?
            .with_grid_points(self.grid_points)
            .with_grid_span(self.grid_span)?;
        if self.theta_max > 0.0 {
            q = q.with_theta_max(self.theta_max)?;
        }
        if self.mc_samples > 0 {
            q = q.with_mc(self.mc_samples, seed);
        }
        Ok(q)
    }
}

fn default_trials() -> usize {
    1000
}
fn default_samples() -> usize {
    200
}
fn default_epsilon() -> Vec<f64> {
    vec![0.0, 0.05, 0.1, 0.2, 0.5]
}
fn default_columns() -> Vec<usize> {
    vec![0]
}
fn default_lambda() -> f64 {
    0.01
}
fn default_kappa() -> f64 {
    5.0
}
fn default_round_epsilon() -> f64 {
    0.25
}
fn default_r() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ExperimentConfig {
    pub trials: usize,
    /// Sample count for lattice-point experiments.
    pub samples: usize,
    pub epsilon: Vec<f64>,
    pub seed: u64,
    /// Columns for distance-tail runs.
    pub columns: Vec<usize>,
    /// Shared lattice scale for `lambda_i`.
    pub lambda: f64,
    pub kappa: f64,
    /// Rounding scale for net subcommands.
    pub round_epsilon: f64,
    /// Second-moment cap factor `r` in `E|A_j|^2 <= r n^2`.
    pub r: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            trials: default_trials(),
            samples: default_samples(),
            epsilon: default_epsilon(),
            seed: 1,
            columns: default_columns(),
            lambda: default_lambda(),
            kappa: default_kappa(),
            round_epsilon: default_round_epsilon(),
            r: default_r(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ConstantsConfig {
    #[serde(flatten)]
    pub calibration: CalibrationConstants,
    pub curve_c: f64,
    pub curve_rate: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        let curve = BoundCurve::default();
        ConstantsConfig {
            calibration: CalibrationConstants::default(),
            curve_c: curve.c,
            curve_rate: curve.rate,
        }
    }
}

impl ConstantsConfig {
    pub fn curve(&self) -> BoundCurve {
        BoundCurve { c: self.curve_c, rate: self.curve_rate }
    }
}

/// Full experiment configuration; any section and any field may be
/// omitted.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct Config {
    pub ensemble: EnsembleConfig,
    pub sphere: SphereConfig,
    pub rlcd: RlcdConfig,
    pub experiment: ExperimentConfig,
    pub constants: ConstantsConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn seed(&self) -> SeedSpec {
        SeedSpec::new(self.experiment.seed, 0)
    }
}
