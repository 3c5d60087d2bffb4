use serde::{Deserialize, Serialize};

use super::ConeError;
use crate::order::{Coordinates, Euclidean, DEFAULT_EQ_TOLERANCE};

/// Element of the nonnegative cone `Rⁿ₊`, ordered componentwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConeVector(Vec<f64>);

impl ConeVector {
    /// Checked constructor: nonempty, finite, nonnegative.
    pub fn new(coords: Vec<f64>) -> Result<Self, ConeError> {
        if coords.is_empty() {
            return Err(ConeError::Empty);
        }
        if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
            return Err(ConeError::NotFinite { index: i });
        }
        if let Some(i) = coords.iter().position(|&v| v < 0.0) {
            return Err(ConeError::OutsideCone { index: i, value: coords[i] });
        }
        Ok(Self(coords))
    }

    pub fn splat(dim: usize, value: f64) -> Self {
        Self(vec![value; dim])
    }

    pub fn ones(dim: usize) -> Self {
        Self::splat(dim, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|v| v * s).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn max_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    /// Indices of the strictly positive coordinates.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > 0.0).collect()
    }

    /// Position of the first negative or non-finite coordinate.
    pub fn first_invalid(&self) -> Option<usize> {
        self.0.iter().position(|v| !v.is_finite() || *v < 0.0)
    }
}

impl Coordinates for ConeVector {
    fn coords(&self) -> &[f64] {
        &self.0
    }

    fn from_coords(coords: Vec<f64>) -> Self {
        Self(coords)
    }
}

/// `Rⁿ₊` as an ordered universe. Sampling stays inside the open cone.
pub type Cone = Euclidean<ConeVector>;

pub fn nonnegative_cone(dim: usize) -> Cone {
    Euclidean::new(dim).with_sample_range(0.05, 10.0)
}

fn same_dim(x: &ConeVector, y: &ConeVector) -> Result<(), ConeError> {
    if x.dim() == y.dim() {
        Ok(())
    } else {
        Err(ConeError::DimensionMismatch { left: x.dim(), right: y.dim() })
    }
}

/// `x ≤ y ⇔ y − x ∈ Rⁿ₊`, with the default absolute slack per coordinate.
pub fn cone_leq(x: &ConeVector, y: &ConeVector) -> Result<bool, ConeError> {
    same_dim(x, y)?;
    Ok(x.0.iter().zip(&y.0).all(|(a, b)| *a <= *b + DEFAULT_EQ_TOLERANCE))
}

/// Evidence that two cone vectors share a part.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartCertificate {
    pub support: Vec<usize>,
    /// Largest `λ` with `λx ≤ y` and `λy ≤ x`, in `(0, 1]`.
    pub lambda_max: f64,
}

/// `Some` iff `x` and `y` are linked, i.e. have the same support.
pub fn linked(x: &ConeVector, y: &ConeVector) -> Result<Option<PartCertificate>, ConeError> {
    same_dim(x, y)?;
    if x.is_zero() || y.is_zero() {
        return Err(ConeError::ZeroElement);
    }
    let support = x.support();
    if support != y.support() {
        return Ok(None);
    }
    let lambda_max = support
        .iter()
        .map(|&i| (x.0[i] / y.0[i]).min(y.0[i] / x.0[i]))
        .fold(1.0f64, f64::min);
    Ok(Some(PartCertificate { support, lambda_max }))
}

/// Least `n ≥ 1` with `n·x ≰ y`, or `None` if `n·x ≤ y` for every `n`.
///
/// Archimedean property of `Rⁿ₊`: the `None` case forces `x ≤ θ`, since a
/// positive coordinate gives `x_i ≤ y_i / n → 0`.
pub fn archimedean_escape(x: &[f64], y: &[f64]) -> Option<u64> {
    x.iter()
        .zip(y)
        .filter_map(|(a, b)| {
            if *a > 0.0 {
                let n = (b / a).floor().max(0.0) as u64 + 1;
                // correct for rounding in the quotient
                Some(if (n as f64) * a > *b { n } else { n + 1 })
            } else if a > b {
                Some(1)
            } else {
                None
            }
        })
        .min()
}
