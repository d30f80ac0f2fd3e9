//! Synthetic ground truths, Gaussian sampling and bias injection.
//!
//! Every generator takes an [`RngSeed`] and derives its own random stream from
//! it, so a fixed seed reproduces the same output bit for bit.

pub mod karate;

use nalgebra::{Cholesky, DMatrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness;
use crate::linalg;
use crate::model::{GroupAssignment, SymMatrix};

/// Seed from which independent per-purpose random streams are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RngSeed {
    /// A child seed for a labelled purpose.
    pub fn derive(self, tag: u64) -> RngSeed {
        RngSeed(splitmix64(self.0 ^ splitmix64(tag.wrapping_add(0x5851_F42D_4C95_7F2D))))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

// Stream tags used below.
const TAG_GRAPH: u64 = 1;
const TAG_WEIGHTS: u64 = 2;
const TAG_GROUPS: u64 = 3;
const TAG_BIAS: u64 = 4;
const TAG_ATTEMPT: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupMode {
    /// Node `i` gets label `floor(i g / p)`.
    Contiguous,
    /// A uniformly shuffled balanced assignment.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionMode {
    /// `D - W`: PSD and singular.
    Laplacian,
    /// `W + (|lambda_min(W)| + load) I`: PD.
    LoadedAdjacency,
}

/// How edge weights are drawn on the support of an adjacency matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeWeights {
    /// Keep the adjacency values as they are.
    AsGiven,
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Uniform magnitude on `[lo, hi]` with a fair coin for the sign.
    SignedUniform { lo: f64, hi: f64 },
}

impl Default for EdgeWeights {
    fn default() -> Self {
        EdgeWeights::Uniform { lo: 0.5, hi: 1.5 }
    }
}

/// A generated model: graph, precision, covariance and groups.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Weighted adjacency; the support is the edge set.
    pub adjacency: SymMatrix,
    pub theta0: SymMatrix,
    /// `(theta0 + ridge I)^{-1}`.
    pub sigma0: SymMatrix,
    pub z: GroupAssignment,
    /// Diagonal loading used to make `theta0` invertible; zero when it already is.
    pub ridge: f64,
}

impl GroundTruth {
    /// Builds the covariance from a precision, loading the diagonal by `ridge`.
    pub fn new(adjacency: SymMatrix, theta0: SymMatrix, z: GroupAssignment, ridge: f64) -> Result<Self> {
        if theta0.dim() != z.p() || adjacency.dim() != z.p() {
            return Err(Error::DimensionMismatch {
                expected: z.p(),
                actual: theta0.dim(),
            });
        }
        let sigma0 = linalg::spd_factor(&theta0.add_diagonal(ridge))?.inverse;
        Ok(Self {
            adjacency,
            theta0,
            sigma0,
            z,
            ridge,
        })
    }
}

/// Erdos-Renyi graph: each of the `p(p-1)/2` edges present independently with
/// probability `avg_degree / (p - 1)`.
pub fn er_graph(p: usize, avg_degree: f64, seed: RngSeed) -> Result<SymMatrix> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("graph needs p >= 2, got {p}")));
    }
    if !(avg_degree >= 0.0 && avg_degree < (p - 1) as f64) {
        return Err(Error::InvalidArgument(format!(
            "average degree must lie in [0, {}), got {avg_degree}",
            p - 1
        )));
    }
    let prob = avg_degree / (p - 1) as f64;
    let mut rng = seed.derive(TAG_GRAPH).rng();
    Ok(SymMatrix::from_upper_fn(p, |i, j| {
        if i == j {
            0.0
        } else if rng.random::<f64>() < prob {
            1.0
        } else {
            0.0
        }
    }))
}

pub fn assign_groups(p: usize, g: usize, mode: GroupMode, seed: RngSeed) -> Result<GroupAssignment> {
    if g < 2 || p < 2 * g {
        return Err(Error::InvalidGroups(format!(
            "need g >= 2 and p >= 2g for {p} nodes in {g} groups"
        )));
    }
    let mut labels: Vec<usize> = (0..p).map(|i| i * g / p).collect();
    if mode == GroupMode::Random {
        labels.shuffle(&mut seed.derive(TAG_GROUPS).rng());
    }
    GroupAssignment::new(labels, g)
}

/// Draws weights on the support of `adjacency`.
pub fn weight_edges(adjacency: &SymMatrix, weights: EdgeWeights, seed: RngSeed) -> SymMatrix {
    let mut rng = seed.derive(TAG_WEIGHTS).rng();
    let p = adjacency.dim();
    SymMatrix::from_upper_fn(p, |i, j| {
        let a = adjacency.get(i, j);
        if i == j || a == 0.0 {
            return 0.0;
        }
        match weights {
            EdgeWeights::AsGiven => a,
            EdgeWeights::Uniform { lo, hi } => rng.random_range(lo..=hi),
            EdgeWeights::SignedUniform { lo, hi } => {
                let m: f64 = rng.random_range(lo..=hi);
                if rng.random::<bool>() {
                    m
                } else {
                    -m
                }
            }
        }
    })
}

/// Precision matrix from a graph.
///
/// Laplacian: `D - W`. Loaded adjacency: `W + (|lambda_min(W)| + diag_load) I`.
pub fn precision_from_graph(
    adjacency: &SymMatrix,
    mode: PrecisionMode,
    weights: EdgeWeights,
    weights_seed: RngSeed,
    diag_load: f64,
) -> Result<SymMatrix> {
    let w = weight_edges(adjacency, weights, weights_seed);
    match mode {
        PrecisionMode::Laplacian => {
            let p = w.dim();
            let degrees: Vec<f64> = (0..p).map(|i| (0..p).map(|j| w.get(i, j)).sum()).collect();
            Ok(SymMatrix::from_upper_fn(p, |i, j| {
                if i == j {
                    degrees[i]
                } else {
                    -w.get(i, j)
                }
            }))
        }
        PrecisionMode::LoadedAdjacency => {
            let lam_min = linalg::min_eigenvalue(&w)?;
            Ok(w.add_diagonal(lam_min.abs() + diag_load))
        }
    }
}

/// `n` i.i.d. rows from `N(0, sigma)`, via the Cholesky factor of `sigma`.
pub fn sample_from_covariance(sigma: &SymMatrix, n: usize, seed: RngSeed) -> Result<DMatrix<f64>> {
    let chol = Cholesky::new(sigma.as_matrix().clone()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let p = sigma.dim();
    let mut rng = seed.rng();
    let mut white = DMatrix::<f64>::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            white[(i, j)] = rng.sample(StandardNormal);
        }
    }
    Ok(white * l.transpose())
}

/// `n` i.i.d. rows from `N(0, (theta0 + ridge I)^{-1})`.
pub fn sample_gaussian(theta0: &SymMatrix, n: usize, ridge: f64, seed: RngSeed) -> Result<DMatrix<f64>> {
    let sigma = linalg::spd_factor(&theta0.add_diagonal(ridge))?.inverse;
    sample_from_covariance(&sigma, n, seed)
}

/// Sample covariance of the rows of `x`: `X^T X / n`, or `/(n - 1)` when `unbiased`.
pub fn sample_covariance(x: &DMatrix<f64>, center: bool, unbiased: bool) -> Result<SymMatrix> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 observations, got {n}")));
    }
    let mut xc = x.clone();
    if center {
        for mut col in xc.column_iter_mut() {
            let mean = col.sum() / n as f64;
            col.add_scalar_mut(-mean);
        }
    }
    let denom = if unbiased { (n - 1) as f64 } else { n as f64 };
    let s = xc.transpose() * &xc / denom;
    Ok(SymMatrix::symmetrize(s))
}

/// Fraction of within-group pairs that receive extra weight in [`biased_precision`].
pub const BIAS_PAIR_FRACTION: f64 = 0.2;

/// The precision implied by fully biased data: `theta0 + B + ridge' I`, where `B`
/// puts `-b` (a positive partial correlation) on a random fifth of the
/// within-group pairs, `b` is the mean edge magnitude of `theta0`, and the
/// ridge keeps the smallest eigenvalue at least that of `theta0 + ridge I`.
pub fn biased_precision(gt: &GroundTruth, seed: RngSeed) -> Result<SymMatrix> {
    let theta = &gt.theta0;
    let p = theta.dim();
    let edge_mags: Vec<f64> = (0..p)
        .flat_map(|j| (0..j).map(move |i| (i, j)))
        .map(|(i, j)| theta.get(i, j).abs())
        .filter(|&v| v > 0.0)
        .collect();
    let b = if edge_mags.is_empty() {
        1.0
    } else {
        edge_mags.iter().sum::<f64>() / edge_mags.len() as f64
    };
    let mut within: Vec<(usize, usize)> = (0..p)
        .flat_map(|j| (0..j).map(move |i| (i, j)))
        .filter(|&(i, j)| gt.z.same_group(i, j))
        .collect();
    let mut rng = seed.derive(TAG_BIAS).rng();
    within.shuffle(&mut rng);
    let take = ((within.len() as f64) * BIAS_PAIR_FRACTION).round() as usize;
    let mut m = theta.add_diagonal(gt.ridge).into_matrix();
    for &(i, j) in &within[..take] {
        m[(i, j)] -= b;
        m[(j, i)] -= b;
    }
    let shifted = SymMatrix::symmetrize(m);
    let target = linalg::min_eigenvalue(&theta.add_diagonal(gt.ridge))?;
    let current = linalg::min_eigenvalue(&shifted)?;
    Ok(shifted.add_diagonal((target - current).max(0.0)))
}

/// `(1 - beta) sigma0 + beta sigma_unfair`, with `sigma_unfair` the inverse of [`biased_precision`].
pub fn inject_bias(gt: &GroundTruth, beta: f64, seed: RngSeed) -> Result<SymMatrix> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidArgument(format!("beta must lie in [0, 1], got {beta}")));
    }
    if beta == 0.0 {
        return Ok(gt.sigma0.clone());
    }
    let unfair = linalg::spd_factor(&biased_precision(gt, seed)?)?.inverse;
    Ok(&gt.sigma0.scale(1.0 - beta) + &unfair.scale(beta))
}

/// Parameters of [`fair_ground_truth`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairGraphSpec {
    pub p: usize,
    pub g: usize,
    pub avg_degree: f64,
    pub diag_load: f64,
}

/// Largest accepted `H(theta0)` relative to the mean squared edge weight.
pub const FAIR_BIAS_RATIO: f64 = 0.05;
/// Largest accepted normalized bias of `theta0`.
pub const FAIR_NORMALIZED_BIAS: f64 = 0.1;
const FAIR_ATTEMPTS: u64 = 100;

/// ER graph with sign-balanced weights, resampled until its bias is negligible.
pub fn fair_ground_truth(spec: FairGraphSpec, seed: RngSeed) -> Result<GroundTruth> {
    let z = assign_groups(spec.p, spec.g, GroupMode::Contiguous, seed)?;
    for attempt in 0..FAIR_ATTEMPTS {
        let s = seed.derive(TAG_ATTEMPT).derive(attempt);
        let adj = er_graph(spec.p, spec.avg_degree, s)?;
        let w = weight_edges(&adj, EdgeWeights::SignedUniform { lo: 0.5, hi: 1.5 }, s);
        let nnz = w.offdiag_nnz();
        if nnz == 0 {
            continue;
        }
        let mean_sq = w.mask_offdiag().as_matrix().norm_squared() / (2 * nnz) as f64;
        if fairness::bias_group(&w, &z) > FAIR_BIAS_RATIO * mean_sq {
            continue;
        }
        if fairness::normalized_bias(&w, &z)? >= FAIR_NORMALIZED_BIAS {
            continue;
        }
        let theta0 = precision_from_graph(&w, PrecisionMode::LoadedAdjacency, EdgeWeights::AsGiven, s, spec.diag_load)?;
        return GroundTruth::new(w, theta0, z, 0.0);
    }
    Err(Error::Generation(format!(
        "no fair graph found in {FAIR_ATTEMPTS} attempts"
    )))
}

/// Parameters of [`er_ground_truth`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErGraphSpec {
    pub p: usize,
    pub g: usize,
    pub avg_degree: f64,
    pub mode: PrecisionMode,
    pub weights: EdgeWeights,
    pub diag_load: f64,
    /// Loading used for the covariance when `mode` is Laplacian.
    pub ridge: f64,
    pub groups: GroupMode,
}

impl Default for ErGraphSpec {
    fn default() -> Self {
        Self {
            p: 100,
            g: 2,
            avg_degree: 10.0,
            mode: PrecisionMode::LoadedAdjacency,
            weights: EdgeWeights::default(),
            diag_load: 1.0,
            ridge: 1e-2,
            groups: GroupMode::Contiguous,
        }
    }
}

/// A plain ER ground truth with no fairness screening.
pub fn er_ground_truth(spec: ErGraphSpec, seed: RngSeed) -> Result<GroundTruth> {
    let z = assign_groups(spec.p, spec.g, spec.groups, seed)?;
    let adj = er_graph(spec.p, spec.avg_degree, seed)?;
    let w = weight_edges(&adj, spec.weights, seed);
    let theta0 = precision_from_graph(&w, spec.mode, EdgeWeights::AsGiven, seed, spec.diag_load)?;
    let ridge = match spec.mode {
        PrecisionMode::Laplacian => spec.ridge,
        PrecisionMode::LoadedAdjacency => 0.0,
    };
    GroundTruth::new(w, theta0, z, ridge)
}
