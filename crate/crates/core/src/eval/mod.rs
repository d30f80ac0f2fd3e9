//! Accuracy and structure metrics, the rewiring baseline, and experiment sweeps.

mod rewire;
pub mod sweep;

pub use rewire::{rwgl_rewire, rwgl_rewire_count, RWGL_REFERENCE_EDGES};
pub use sweep::{
    run_sweep, summarize, GraphSource, Method, Mu1Rule, Scenario, SummaryRow, SweepConfig,
};

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{GroupAssignment, SymMatrix};

fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// `|| A/||A|| - B/||B|| ||_F^2` over off-diagonal entries; lies in `[0, 4]`.
pub fn normalized_error(theta_hat: &SymMatrix, theta0: &SymMatrix) -> Result<f64> {
    check_dims(theta0.dim(), theta_hat.dim())?;
    let a = theta_hat.mask_offdiag();
    let b = theta0.mask_offdiag();
    let (na, nb) = (a.frobenius_norm(), b.frobenius_norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateEstimate);
    }
    let diff = &a.scale(1.0 / na) - &b.scale(1.0 / nb);
    Ok(diff.dot(&diff))
}

/// `|| theta_hat sigma - I ||_F`.
pub fn model_fit(theta_hat: &SymMatrix, sigma: &SymMatrix) -> Result<f64> {
    check_dims(sigma.dim(), theta_hat.dim())?;
    let p = sigma.dim();
    let prod = theta_hat.as_matrix() * sigma.as_matrix();
    Ok((prod - DMatrix::<f64>::identity(p, p)).norm())
}

/// Newman modularity of the partition `z` on the graph with weights `|W_ij|`, `i != j`.
pub fn modularity(weights: &SymMatrix, z: &GroupAssignment) -> Result<f64> {
    check_dims(z.p(), weights.dim())?;
    let w = weights.mask_offdiag().map_offdiag(f64::abs);
    let p = w.dim();
    let strength: Vec<f64> = (0..p).map(|i| (0..p).map(|j| w.get(i, j)).sum()).collect();
    let two_m: f64 = strength.iter().sum();
    if two_m == 0.0 {
        return Err(Error::EmptyGraph);
    }
    let mut q = 0.0;
    for i in 0..p {
        for j in 0..p {
            if z.same_group(i, j) {
                q += w.get(i, j) - strength[i] * strength[j] / two_m;
            }
        }
    }
    Ok(q / two_m)
}

/// Ratio of positive to negative partial correlations in a set of edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignRatio {
    Finite(f64),
    /// Positive correlations only.
    Infinite,
    /// The set has no edges.
    NoEdges,
}

impl SignRatio {
    fn from_counts(positive: usize, negative: usize) -> Self {
        match (positive, negative) {
            (0, 0) => SignRatio::NoEdges,
            (_, 0) => SignRatio::Infinite,
            (pos, neg) => SignRatio::Finite(pos as f64 / neg as f64),
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            SignRatio::Finite(v) => Some(v),
            SignRatio::Infinite => Some(f64::INFINITY),
            SignRatio::NoEdges => None,
        }
    }
}

/// Finite ratios are numbers; the other cases are the strings `"inf"` and `"no_edges"`.
impl Serialize for SignRatio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SignRatio::Finite(v) => s.serialize_f64(*v),
            SignRatio::Infinite => s.serialize_str("inf"),
            SignRatio::NoEdges => s.serialize_str("no_edges"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignRatios {
    pub within: SignRatio,
    pub across: SignRatio,
}

/// Default edge threshold: `1e-6` times the largest off-diagonal magnitude.
pub fn default_edge_threshold(theta: &SymMatrix) -> f64 {
    1e-6 * theta.max_abs_offdiag()
}

/// Positive-to-negative partial-correlation ratios for within- and across-group edges.
///
/// An edge is an off-diagonal entry with `|T_ij| > threshold`; its partial
/// correlation has the sign of `-T_ij`.
pub fn sign_ratios(theta: &SymMatrix, z: &GroupAssignment, threshold: f64) -> Result<SignRatios> {
    check_dims(z.p(), theta.dim())?;
    if !(threshold >= 0.0) {
        return Err(Error::InvalidArgument(format!("threshold must be nonnegative, got {threshold}")));
    }
    // [within, across] x [positive, negative]
    let mut counts = [[0usize; 2]; 2];
    let p = theta.dim();
    for j in 0..p {
        for i in 0..j {
            let v = theta.get(i, j);
            if v.abs() <= threshold {
                continue;
            }
            let set = usize::from(!z.same_group(i, j));
            let sign = usize::from(v > 0.0);
            counts[set][sign] += 1;
        }
    }
    Ok(SignRatios {
        within: SignRatio::from_counts(counts[0][0], counts[0][1]),
        across: SignRatio::from_counts(counts[1][0], counts[1][1]),
    })
}
