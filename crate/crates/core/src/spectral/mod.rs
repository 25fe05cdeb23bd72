//! Non-backtracking spectral methods on random graph models.
//!
//! Two balanced communities with within/across mean degrees `a`, `b` give
//! the non-backtracking matrix a real outlier near `(a - b)/2` besides the
//! Perron value near `(a + b)/2`, while an Erdős–Rényi graph of the same
//! mean degree keeps everything else inside a disc of radius near
//! `sqrt(lambda_1)`. [`classify_model`] tests for that outlier and
//! [`recover_communities`] reads the communities off its eigenvector.

mod iteration;
mod models;

pub use iteration::{orthogonal_iteration, Spectrum, DEFAULT_ITERS, DEFAULT_TOL};
pub use models::{sample_er, sample_sbm, SbmParams};

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::{nb_matrix, ArcIndex, Graph, SparseRealMatrix};

pub const DEFAULT_DELTA: f64 = 0.1;

/// Class of each node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Labeling {
    pub labels: Vec<usize>,
}

/// Arc-head indicator `T` (`2m x n`) and its pseudo-inverse `D^{-1} T^T`.
pub fn head_projection(ai: &ArcIndex, g: &Graph) -> Result<(SparseRealMatrix, SparseRealMatrix)> {
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) == 0) {
        return Err(Error::IsolatedNode(v));
    }
    let t = SparseRealMatrix::from_triplets(
        ai.len(),
        g.n(),
        (0..ai.len()).map(|a| (a, ai.head(a), 1.0)).collect(),
    )?;
    let pinv = SparseRealMatrix::from_triplets(
        g.n(),
        ai.len(),
        (0..ai.len())
            .map(|a| {
                let h = ai.head(a);
                (h, a, 1.0 / g.degree(h) as f64)
            })
            .collect(),
    )?;
    Ok((t, pinv))
}

/// Label 0 where the mean of `nu2` over a node's incoming arcs is positive,
/// else 1. Isolated nodes have mean 0 and get label 1.
pub fn recover_communities(g: &Graph, ai: &ArcIndex, nu2: &[f64]) -> Result<Labeling> {
    if nu2.len() != ai.len() {
        return Err(Error::ShapeError(format!(
            "vector of length {} for {} arcs",
            nu2.len(),
            ai.len()
        )));
    }
    let labels = (0..g.n())
        .map(|v| {
            let sum: f64 = ai.incoming(v).iter().map(|&a| nu2[a]).sum();
            if sum > 0.0 {
                0
            } else {
                1
            }
        })
        .collect();
    Ok(Labeling { labels })
}

/// Agreement between two 2-class labelings, up to swapping the classes.
pub fn alignment(a: &Labeling, b: &Labeling) -> Result<f64> {
    if a.labels.len() != b.labels.len() {
        return Err(Error::ShapeError(format!(
            "labelings of length {} and {}",
            a.labels.len(),
            b.labels.len()
        )));
    }
    if a.labels.iter().chain(&b.labels).any(|&l| l > 1) {
        return Err(Error::InvalidArgument("alignment expects labels 0 and 1".into()));
    }
    if a.labels.is_empty() {
        return Ok(1.0);
    }
    let agree = a.labels.iter().zip(&b.labels).filter(|(x, y)| x == y).count();
    let frac = agree as f64 / a.labels.len() as f64;
    Ok(frac.max(1.0 - frac))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    #[serde(rename = "SBM")]
    Sbm,
    #[serde(rename = "ER")]
    Er,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Sbm => "SBM",
            ModelKind::Er => "ER",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub decision: ModelKind,
    pub lambda1: f64,
    /// `|lambda_2|` used by the rule.
    pub lambda2: f64,
    pub threshold: f64,
    pub spectrum: Spectrum,
}

impl Classification {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "lambda": self.spectrum.eigenvalues,
            "magnitudes": self.spectrum.magnitudes,
            "residuals": self.spectrum.residuals,
            "converged": self.spectrum.converged,
            "lambda1": self.lambda1,
            "lambda2_abs": self.lambda2,
            "decision": self.decision.as_str(),
            "threshold": self.threshold,
        })
    }
}

/// Two leading eigenpairs of the non-backtracking matrix of `g`.
pub fn leading_pairs(g: &Graph, seed: u64) -> Result<(ArcIndex, Spectrum)> {
    let ai = ArcIndex::build(g)?;
    let b = nb_matrix(g, &ai, false);
    let spectrum = orthogonal_iteration(&b, 2.min(ai.len()), DEFAULT_ITERS, DEFAULT_TOL, seed)?;
    Ok((ai, spectrum))
}

/// SBM when `|lambda_2| > (1 + delta) sqrt(lambda_1)`, ER otherwise.
///
/// `|lambda_2|` is the converged Ritz value when there is one, and the
/// deflated growth rate of the second column otherwise.
pub fn classify_model(g: &Graph, delta: f64, seed: u64) -> Result<Classification> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let (_, spectrum) = leading_pairs(g, seed)?;
    if !spectrum.converged[0] || spectrum.eigenvalues[0] <= 0.0 {
        return Err(Error::SpectrumNotConverged {
            residual: spectrum.residuals[0],
        });
    }
    let lambda1 = spectrum.eigenvalues[0];
    let lambda2 = match spectrum.converged.get(1) {
        Some(true) => spectrum.eigenvalues[1].abs(),
        Some(false) => spectrum.magnitudes[1],
        None => 0.0,
    };
    let threshold = (1.0 + delta) * lambda1.sqrt();
    Ok(Classification {
        decision: if lambda2 > threshold { ModelKind::Sbm } else { ModelKind::Er },
        lambda1,
        lambda2,
        threshold,
        spectrum,
    })
}

/// Communities from the sign of the head-averaged second eigenvector.
pub fn spectral_communities(g: &Graph, seed: u64) -> Result<(Labeling, Spectrum)> {
    let (ai, spectrum) = leading_pairs(g, seed)?;
    if spectrum.eigenvectors.len() < 2 {
        return Err(Error::InvalidArgument("graph has a single arc pair".into()));
    }
    let labels = recover_communities(g, &ai, &spectrum.eigenvectors[1])?;
    Ok((labels, spectrum))
}

#[cfg(test)]
mod tests;
