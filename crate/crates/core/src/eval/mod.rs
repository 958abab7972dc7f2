//! Cluster validation: intrinsic model selection (silhouette, distortion,
//! elbow) and extrinsic scoring against ground truth (purity, Rand index,
//! Cohen's kappa).

mod extrinsic;
mod intrinsic;

pub use extrinsic::{cohens_kappa, extrinsic_scores, purity, rand_index, ExtrinsicScores};
pub use intrinsic::{distortion, elbow_detect, silhouette, ElbowResult};

use crate::cluster::Algorithm;
use crate::distance::DistanceError;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {need} points, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("silhouette undefined for fewer than two clusters")]
    SingleCluster,
    #[error("elbow detection needs at least 3 consecutive k values")]
    InsufficientCurve,
    #[error("both annotators are constant with different labels")]
    DegenerateAnnotations,
    #[error("distortion undefined for {0:?}: model has no prototypes")]
    UnsupportedAlgorithm(Algorithm),
    #[error("invalid labels: {0}")]
    InvalidLabels(String),
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

/// Scores for one candidate cluster count in a k sweep.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KScores {
    pub silhouette: f64,
    pub distortion: f64,
}

/// Model-selection report for one algorithm: the swept scores, the
/// silhouette-selected k, and the elbow read of the distortion curve,
/// plus optional extrinsic scores against ground truth.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvalReport {
    pub algorithm: Algorithm,
    pub k_results: BTreeMap<usize, KScores>,
    pub chosen_k: usize,
    pub elbow: Option<ElbowResult>,
    pub extrinsic: Option<ExtrinsicScores>,
    pub annotator_kappa: Option<f64>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// k-sweep table as CSV: `k,silhouette,distortion`.
    pub fn sweep_csv(&self) -> String {
        let mut out = String::from("k,silhouette,distortion\n");
        for (k, scores) in &self.k_results {
            out.push_str(&format!("{k},{},{}\n", scores.silhouette, scores.distortion));
        }
        out
    }

    /// Assemble a report from sweep results: chosen_k is the silhouette
    /// argmax (smallest k on ties); the elbow is read from the distortion
    /// curve when it spans at least three consecutive k.
    pub fn from_sweep(
        algorithm: Algorithm,
        k_results: BTreeMap<usize, KScores>,
    ) -> Result<EvalReport, EvalError> {
        if k_results.is_empty() {
            return Err(EvalError::InsufficientCurve);
        }
        let chosen_k = k_results
            .iter()
            .fold((0usize, f64::NEG_INFINITY), |(bk, bs), (&k, s)| {
                if s.silhouette > bs {
                    (k, s.silhouette)
                } else {
                    (bk, bs)
                }
            })
            .0;
        let curve: BTreeMap<usize, f64> =
            k_results.iter().map(|(&k, s)| (k, s.distortion)).collect();
        let elbow = elbow_detect(&curve).ok();
        Ok(EvalReport {
            algorithm,
            k_results,
            chosen_k,
            elbow,
            extrinsic: None,
            annotator_kappa: None,
        })
    }
}
