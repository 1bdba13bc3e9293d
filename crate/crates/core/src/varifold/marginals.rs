//! Marginal measures and a common view of all three representations as
//! weighted point sets in a feature space.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::DiscreteVarifold;
use crate::{Error, Result};

/// Which part of the varifold a test function sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    /// `h(x, v)` on ℝ²ⁿ.
    Varifold,
    /// `h(x)` on ℝⁿ.
    Spatial,
    /// `h(v)` on Sⁿ⁻¹ ⊂ ℝⁿ.
    Directional,
}

impl Representation {
    pub const ALL: [Representation; 3] = [
        Representation::Varifold,
        Representation::Spatial,
        Representation::Directional,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Representation::Varifold => "varifold",
            Representation::Spatial => "spatial",
            Representation::Directional => "directional",
        }
    }

    /// Input width of the test function for ambient dimension `n`.
    pub fn feature_dim(&self, n: usize) -> usize {
        match self {
            Representation::Varifold => 2 * n,
            _ => n,
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "varifold" => Ok(Representation::Varifold),
            "spatial" => Ok(Representation::Spatial),
            "directional" => Ok(Representation::Directional),
            _ => Err(Error::Config(format!("unknown representation {s:?}"))),
        }
    }
}

/// A finite positive measure whose atoms are points of a feature space.
pub trait SupportMeasure {
    fn num_atoms(&self) -> usize;

    fn feature_dim(&self) -> usize;

    fn weights(&self) -> &[f64];

    /// Writes the feature vector of atom `i` into `out` (length `feature_dim`).
    fn write_feature(&self, i: usize, out: &mut [f64]);

    fn total_mass(&self) -> f64 {
        self.weights().iter().sum()
    }

    /// Row `i` is the feature vector of atom `i`.
    fn feature_matrix(&self) -> Array2<f64> {
        let d = self.feature_dim();
        let mut out = Array2::zeros((self.num_atoms(), d));
        for (i, mut row) in out.rows_mut().into_iter().enumerate() {
            self.write_feature(i, row.as_slice_mut().expect("standard layout"));
        }
        out
    }
}

impl SupportMeasure for DiscreteVarifold {
    fn num_atoms(&self) -> usize {
        self.len()
    }

    fn feature_dim(&self) -> usize {
        2 * self.dim()
    }

    fn weights(&self) -> &[f64] {
        DiscreteVarifold::weights(self)
    }

    fn write_feature(&self, i: usize, out: &mut [f64]) {
        let n = self.dim();
        out[..n].copy_from_slice(self.position(i));
        out[n..].copy_from_slice(self.direction(i));
    }
}

/// Pushforward of the mass onto positions only.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMeasure {
    n: usize,
    positions: Vec<f64>,
    weights: Vec<f64>,
}

impl SpatialMeasure {
    pub(crate) fn from_parts(n: usize, positions: Vec<f64>, weights: Vec<f64>) -> Self {
        Self { n, positions, weights }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.n..(i + 1) * self.n]
    }
}

impl SupportMeasure for SpatialMeasure {
    fn num_atoms(&self) -> usize {
        self.weights.len()
    }

    fn feature_dim(&self) -> usize {
        self.n
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn write_feature(&self, i: usize, out: &mut [f64]) {
        out.copy_from_slice(self.position(i));
    }
}

/// Pushforward of the mass onto unit directions only.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalMeasure {
    n: usize,
    directions: Vec<f64>,
    weights: Vec<f64>,
}

impl DirectionalMeasure {
    pub(crate) fn from_parts(n: usize, directions: Vec<f64>, weights: Vec<f64>) -> Self {
        Self { n, directions, weights }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn direction(&self, i: usize) -> &[f64] {
        &self.directions[i * self.n..(i + 1) * self.n]
    }
}

impl SupportMeasure for DirectionalMeasure {
    fn num_atoms(&self) -> usize {
        self.weights.len()
    }

    fn feature_dim(&self) -> usize {
        self.n
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn write_feature(&self, i: usize, out: &mut [f64]) {
        out.copy_from_slice(self.direction(i));
    }
}

/// A measure in any of the three representations.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Varifold(DiscreteVarifold),
    Spatial(SpatialMeasure),
    Directional(DirectionalMeasure),
}

impl Measure {
    pub fn from_varifold(mu: DiscreteVarifold, rep: Representation) -> Self {
        match rep {
            Representation::Varifold => Measure::Varifold(mu),
            Representation::Spatial => Measure::Spatial(mu.spatial_marginal()),
            Representation::Directional => Measure::Directional(mu.directional_marginal()),
        }
    }

    pub fn representation(&self) -> Representation {
        match self {
            Measure::Varifold(_) => Representation::Varifold,
            Measure::Spatial(_) => Representation::Spatial,
            Measure::Directional(_) => Representation::Directional,
        }
    }

    /// Ambient dimension `n` of the underlying shape.
    pub fn ambient_dim(&self) -> usize {
        match self {
            Measure::Varifold(m) => m.dim(),
            Measure::Spatial(m) => m.n,
            Measure::Directional(m) => m.n,
        }
    }

    /// Rescales the weights so the total mass equals `target`.
    pub fn normalize_mass(&self, target: f64) -> Result<Self> {
        let mass = self.total_mass();
        if !(mass > 0.0) {
            return Err(Error::EmptyVarifold);
        }
        let factor = target / mass;
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidVarifold(format!("mass target must be positive, got {target}")));
        }
        let scale = |w: &[f64]| w.iter().map(|x| x * factor).collect::<Vec<_>>();
        Ok(match self {
            Measure::Varifold(m) => Measure::Varifold(m.scale_weights(factor)?),
            Measure::Spatial(m) => Measure::Spatial(SpatialMeasure::from_parts(m.n, m.positions.clone(), scale(&m.weights))),
            Measure::Directional(m) => {
                Measure::Directional(DirectionalMeasure::from_parts(m.n, m.directions.clone(), scale(&m.weights)))
            }
        })
    }

    fn inner(&self) -> &dyn SupportMeasure {
        match self {
            Measure::Varifold(m) => m,
            Measure::Spatial(m) => m,
            Measure::Directional(m) => m,
        }
    }
}

impl SupportMeasure for Measure {
    fn num_atoms(&self) -> usize {
        self.inner().num_atoms()
    }

    fn feature_dim(&self) -> usize {
        self.inner().feature_dim()
    }

    fn weights(&self) -> &[f64] {
        self.inner().weights()
    }

    fn write_feature(&self, i: usize, out: &mut [f64]) {
        self.inner().write_feature(i, out)
    }
}
