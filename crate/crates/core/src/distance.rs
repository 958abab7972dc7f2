//! Distance and kernel functions shared by the clustering engines.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DistanceError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("shape-based distance is undefined for two constant series")]
    UndefinedDistance,
    #[error("series too short for shape-based distance: length {0}")]
    TooShort(usize),
    #[error("kernel parameter gamma must be positive, got {0}")]
    InvalidGamma(f64),
}

/// Distance selector carried in configuration and reports.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum DistanceKind {
    Euclidean,
    ShapeBased,
    RbfKernel { gamma: f64 },
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<(), DistanceError> {
    if a.len() != b.len() {
        return Err(DistanceError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// L2 norm of `a - b`.
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64, DistanceError> {
    check_lengths(a, b)?;
    Ok(squared_euclidean_unchecked(a, b).sqrt())
}

/// Squared L2 distance without a length check; callers validate up front.
pub(crate) fn squared_euclidean_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Z-normalize to zero mean and unit population variance.
///
/// Returns `None` for constant input, which has no defined z-score.
pub fn z_normalize(values: &[f64]) -> Option<Vec<f64>> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var <= 0.0 {
        return None;
    }
    let std = var.sqrt();
    Some(values.iter().map(|v| (v - mean) / std).collect())
}

/// Shape-based distance: `1 - max_s NCC(a, b, s)` over all circular shifts
/// of the z-normalized series. Range [0, 2]; 0 for identical shapes and
/// invariant under positive scaling and additive shift of either argument.
pub fn shape_based_distance(a: &[f64], b: &[f64]) -> Result<f64, DistanceError> {
    check_lengths(a, b)?;
    if a.len() < 2 {
        return Err(DistanceError::TooShort(a.len()));
    }
    let za = z_normalize(a);
    let zb = z_normalize(b);
    match (za, zb) {
        (None, None) => Err(DistanceError::UndefinedDistance),
        // One flat series: every cross-correlation coefficient is zero.
        (None, Some(_)) | (Some(_), None) => Ok(1.0),
        (Some(za), Some(zb)) => Ok(1.0 - max_normalized_cross_correlation(&za, &zb)),
    }
}

/// Maximum of the coefficient-normalized cross-correlation over all
/// circular shifts of `za` against `zb`. Inputs are already z-normalized.
fn max_normalized_cross_correlation(za: &[f64], zb: &[f64]) -> f64 {
    let len = za.len();
    let norm = {
        let na = za.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nb = zb.iter().map(|v| v * v).sum::<f64>().sqrt();
        na * nb
    };
    let mut best = f64::NEG_INFINITY;
    for shift in 0..len {
        let mut dot = 0.0;
        for (i, bv) in zb.iter().enumerate() {
            dot += za[(i + shift) % len] * bv;
        }
        let ncc = dot / norm;
        if ncc > best {
            best = ncc;
        }
    }
    best
}

/// Gaussian kernel `exp(-gamma * ||a - b||^2)`.
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> Result<f64, DistanceError> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(DistanceError::InvalidGamma(gamma));
    }
    check_lengths(a, b)?;
    Ok((-gamma * squared_euclidean_unchecked(a, b)).exp())
}
