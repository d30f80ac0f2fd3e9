//! Demographic-parity bias metrics for precision matrices.
//!
//! Both metrics look only at off-diagonal weights. The group-wise metric `H`
//! averages, over ordered group pairs `(a, b)`, the squared gap between the
//! mean within-`a` weight and the mean `a`-to-`b` weight:
//!
//! ```text
//! H(T) = 1/(g^2 - g) * sum_{a != b} tr(C_ab T)^2
//! C_ab = [ z_a z_a^T / (p_a^2 - p_a) - z_a z_b^T / (p_a p_b) ]_offdiag
//! ```
//!
//! The node-wise metric `H_node` asks the same of every node individually:
//!
//! ```text
//! H_node(T) = 1/(p g) * sum_i sum_a ( 1/(g-1) sum_{b != a} ([T z_a]_i / p_a - [T z_b]_i / p_b) )^2
//!           = 1/(p g (g-1)^2) * sum_a || T_offdiag v_a ||^2,   v_a = sum_{b != a} (z_a / p_a - z_b / p_b)
//! ```
//!
//! Gradients are returned symmetrized, i.e. as gradients on the space of
//! symmetric matrices.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{GroupAssignment, LipschitzMode, SymMatrix};

/// `C_ab` for an ordered pair of distinct groups. Not symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPairMatrix {
    pub a: usize,
    pub b: usize,
    pub matrix: DMatrix<f64>,
}

impl GroupPairMatrix {
    /// `tr(C_ab T)`.
    pub fn trace_with(&self, theta: &SymMatrix) -> f64 {
        // tr(C T) = sum_ij C_ij T_ji
        self.matrix.dot(&theta.as_matrix().transpose())
    }
}

pub fn build_pair_matrix(z: &GroupAssignment, a: usize, b: usize) -> Result<GroupPairMatrix> {
    let g = z.g();
    for idx in [a, b] {
        if idx >= g {
            return Err(Error::GroupOutOfRange { index: idx, groups: g });
        }
    }
    if a == b {
        return Err(Error::InvalidArgument(format!(
            "pair matrix needs distinct groups, got a = b = {a}"
        )));
    }
    let pa = z.size(a) as f64;
    let pb = z.size(b) as f64;
    let within = 1.0 / (pa * pa - pa);
    let across = -1.0 / (pa * pb);
    let p = z.p();
    let matrix = DMatrix::from_fn(p, p, |i, j| {
        if i == j || z.label(i) != a {
            0.0
        } else if z.label(j) == a {
            within
        } else if z.label(j) == b {
            across
        } else {
            0.0
        }
    });
    Ok(GroupPairMatrix { a, b, matrix })
}

/// Lazily built pair matrices for one group assignment. Safe to share across threads.
#[derive(Debug)]
pub struct PairMatrixCache {
    z: GroupAssignment,
    slots: Vec<OnceLock<GroupPairMatrix>>,
}

impl PairMatrixCache {
    pub fn new(z: &GroupAssignment) -> Self {
        let g = z.g();
        Self {
            z: z.clone(),
            slots: (0..g * g).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn get(&self, a: usize, b: usize) -> Result<&GroupPairMatrix> {
        let g = self.z.g();
        if a >= g || b >= g || a == b {
            // let the builder produce the matching error
            build_pair_matrix(&self.z, a, b)?;
        }
        let slot = &self.slots[a * g + b];
        if let Some(m) = slot.get() {
            return Ok(m);
        }
        let built = build_pair_matrix(&self.z, a, b)?;
        Ok(slot.get_or_init(|| built))
    }

    /// All ordered pairs `(a, b)` with `a != b`, in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let g = self.z.g();
        (0..g).flat_map(move |a| (0..g).filter(move |&b| b != a).map(move |b| (a, b)))
    }
}

fn check_dims(theta: &SymMatrix, z: &GroupAssignment) {
    assert_eq!(
        theta.dim(),
        z.p(),
        "matrix dimension {} does not match group assignment over {} nodes",
        theta.dim(),
        z.p()
    );
}

/// Block sums `S[a][b] = sum_{i in a, j in b, i != j} T_ij`.
fn block_sums(theta: &SymMatrix, z: &GroupAssignment) -> Vec<Vec<f64>> {
    let g = z.g();
    let p = z.p();
    let t = theta.as_matrix();
    let mut s = vec![vec![0.0; g]; g];
    for j in 0..p {
        let gj = z.label(j);
        for i in 0..p {
            if i != j {
                s[z.label(i)][gj] += t[(i, j)];
            }
        }
    }
    s
}

/// `tr(C_ab T)` for every ordered pair, as a `g x g` table with zero diagonal.
pub fn pair_traces(theta: &SymMatrix, z: &GroupAssignment) -> Vec<Vec<f64>> {
    check_dims(theta, z);
    let g = z.g();
    let s = block_sums(theta, z);
    let mut t = vec![vec![0.0; g]; g];
    for a in 0..g {
        let pa = z.size(a) as f64;
        for b in 0..g {
            if a != b {
                let pb = z.size(b) as f64;
                t[a][b] = s[a][a] / (pa * pa - pa) - s[b][a] / (pa * pb);
            }
        }
    }
    t
}

/// Group-wise bias `H`.
pub fn bias_group(theta: &SymMatrix, z: &GroupAssignment) -> f64 {
    let g = z.g() as f64;
    let t = pair_traces(theta, z);
    let sum: f64 = t.iter().flatten().map(|v| v * v).sum();
    sum / (g * g - g)
}

/// Per-node, per-group average weights `[T_offdiag z_a]_i / p_a`, as a `p x g` table.
fn node_group_means(theta: &SymMatrix, z: &GroupAssignment) -> Vec<Vec<f64>> {
    let p = z.p();
    let g = z.g();
    let t = theta.as_matrix();
    let mut r = vec![vec![0.0; g]; p];
    for j in 0..p {
        let gj = z.label(j);
        for (i, row) in r.iter_mut().enumerate() {
            if i != j {
                row[gj] += t[(i, j)];
            }
        }
    }
    for row in r.iter_mut() {
        for (a, v) in row.iter_mut().enumerate() {
            *v /= z.size(a) as f64;
        }
    }
    r
}

/// Node-wise bias `H_node`.
pub fn bias_node(theta: &SymMatrix, z: &GroupAssignment) -> f64 {
    check_dims(theta, z);
    let p = z.p();
    let g = z.g();
    let r = node_group_means(theta, z);
    let mut total = 0.0;
    for row in &r {
        for a in 0..g {
            let avg: f64 = (0..g).filter(|&b| b != a).map(|b| row[a] - row[b]).sum::<f64>()
                / (g as f64 - 1.0);
            total += avg * avg;
        }
    }
    total / (p as f64 * g as f64)
}

/// Symmetrized gradient of `H`: `2/(g^2-g) sum_{a != b} tr(C_ab T) C_ab^T`, then `(G + G^T)/2`.
pub fn grad_bias_group(theta: &SymMatrix, z: &GroupAssignment) -> SymMatrix {
    let g = z.g();
    let t = pair_traces(theta, z);
    // M = sum_{a != b} t_ab C_ab is constant on blocks:
    // K[a][a] = sum_{b != a} t_ab / (p_a^2 - p_a),  K[a][b] = -t_ab / (p_a p_b).
    let mut k = vec![vec![0.0; g]; g];
    for a in 0..g {
        let pa = z.size(a) as f64;
        for b in 0..g {
            if a != b {
                let pb = z.size(b) as f64;
                k[a][a] += t[a][b] / (pa * pa - pa);
                k[a][b] = -t[a][b] / (pa * pb);
            }
        }
    }
    let scale = 2.0 / (g as f64 * g as f64 - g as f64);
    SymMatrix::from_upper_fn(z.p(), |i, j| {
        if i == j {
            0.0
        } else {
            let (gi, gj) = (z.label(i), z.label(j));
            scale * 0.5 * (k[gi][gj] + k[gj][gi])
        }
    })
}

/// `A = 1/(p g (g-1)^2) sum_a v_a v_a^T` with `v_a = sum_{b != a} (z_a / p_a - z_b / p_b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodePenaltyMatrix {
    pub matrix: SymMatrix,
    /// The vectors `v_a`.
    pub directions: Vec<DVector<f64>>,
    /// `1/(p g (g-1)^2)`.
    pub scale: f64,
}

fn node_directions(z: &GroupAssignment) -> Vec<DVector<f64>> {
    let g = z.g();
    (0..g)
        .map(|a| {
            DVector::from_fn(z.p(), |i, _| {
                let l = z.label(i);
                if l == a {
                    (g as f64 - 1.0) / z.size(a) as f64
                } else {
                    -1.0 / z.size(l) as f64
                }
            })
        })
        .collect()
}

fn node_scale(z: &GroupAssignment) -> f64 {
    let g = z.g() as f64;
    1.0 / (z.p() as f64 * g * (g - 1.0) * (g - 1.0))
}

pub fn build_node_matrix(z: &GroupAssignment) -> NodePenaltyMatrix {
    let directions = node_directions(z);
    let scale = node_scale(z);
    let p = z.p();
    let mut m = DMatrix::zeros(p, p);
    for v in &directions {
        m.ger(scale, v, v, 1.0);
    }
    NodePenaltyMatrix {
        matrix: SymMatrix::symmetrize(m),
        directions,
        scale,
    }
}

/// Symmetrized `2 [A T_offdiag]_offdiag`, evaluated through the low-rank form of `A`.
pub fn grad_bias_node(theta: &SymMatrix, z: &GroupAssignment) -> SymMatrix {
    check_dims(theta, z);
    let off = theta.mask_offdiag();
    let scale = node_scale(z);
    let p = z.p();
    let mut m = DMatrix::zeros(p, p);
    for v in node_directions(z) {
        let tv = off.as_matrix() * &v;
        // A T = scale * sum v (T v)^T
        m.ger(scale, &v, &tv, 1.0);
    }
    let mut sym = SymMatrix::symmetrize(m).into_matrix();
    sym.fill_diagonal(0.0);
    SymMatrix::symmetrize(sym * 2.0)
}

/// `lambda_max` of the operator `X -> sum_{a != b} tr(C_ab X) C_ab^T` on `R^{p x p}`.
pub fn group_hessian_top_eigenvalue(cache: &PairMatrixCache) -> Result<f64> {
    let pairs: Vec<(usize, usize)> = cache.pairs().collect();
    let mats: Vec<&GroupPairMatrix> = pairs
        .iter()
        .map(|&(a, b)| cache.get(a, b))
        .collect::<Result<_>>()?;
    let p = cache.z.p();
    let n = p * p;
    // vec(X) is column-major; tr(C X) = <C^T, X>_F, and C^T enters as the output direction.
    let cts: Vec<DVector<f64>> = mats
        .iter()
        .map(|m| DVector::from_column_slice(m.matrix.transpose().as_slice()))
        .collect();
    Ok(linalg::power_iteration(
        n,
        |x| {
            let mut out = DVector::zeros(n);
            for c in &cts {
                let coef = c.dot(x);
                out.axpy(coef, c, 1.0);
            }
            out
        },
        10_000,
        1e-12,
    ))
}

/// `sum_{a != b} sigma_max(C_ab)^2`, using `sigma_max(C_ab)^2 = 1/p_a^2 + 1/(p_a p_b)`.
pub fn pair_spectral_sum(z: &GroupAssignment) -> f64 {
    let g = z.g();
    let mut s = 0.0;
    for a in 0..g {
        let pa = z.size(a) as f64;
        for b in (0..g).filter(|&b| b != a) {
            let pb = z.size(b) as f64;
            s += 1.0 / (pa * pa) + 1.0 / (pa * pb);
        }
    }
    s
}

/// `sum_{a != b} ||C_ab||_F^2 = sum 1/(p_a^2 - p_a) + 1/(p_a p_b)`.
pub fn pair_frobenius_sum(z: &GroupAssignment) -> f64 {
    let g = z.g();
    let mut s = 0.0;
    for a in 0..g {
        let pa = z.size(a) as f64;
        for b in (0..g).filter(|&b| b != a) {
            let pb = z.size(b) as f64;
            s += 1.0 / (pa * pa - pa) + 1.0 / (pa * pb);
        }
    }
    s
}

/// Lipschitz constant of the smooth objective under the group penalty.
///
/// `1/eps^2 + 2 mu2/(g^2-g) * K` where `K` is the top eigenvalue of the
/// penalty Hessian (`Exact`) or the sum of squared Frobenius norms of the
/// pair matrices (`UpperBound`), which always dominates it.
pub fn lipschitz_group(
    z: &GroupAssignment,
    mu2: f64,
    epsilon: f64,
    mode: LipschitzMode,
) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let base = 1.0 / (epsilon * epsilon);
    if mu2 == 0.0 {
        return Ok(base);
    }
    let g = z.g() as f64;
    let k = match mode {
        LipschitzMode::Exact => group_hessian_top_eigenvalue(&PairMatrixCache::new(z))?,
        LipschitzMode::UpperBound => pair_frobenius_sum(z),
    };
    Ok(base + 2.0 * mu2 / (g * g - g) * k)
}

/// Lipschitz constant of the smooth objective under the node penalty: `1/eps^2 + 2 mu2 lambda_max(A)`.
pub fn lipschitz_node(z: &GroupAssignment, mu2: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let base = 1.0 / (epsilon * epsilon);
    if mu2 == 0.0 {
        return Ok(base);
    }
    let a = build_node_matrix(z);
    let top = linalg::max_eigenvalue(&a.matrix)?.max(0.0);
    Ok(base + 2.0 * mu2 * top)
}

/// Scale-free bias score `2 sqrt(H(T)) / ||T_offdiag||_1`.
pub fn normalized_bias(theta: &SymMatrix, z: &GroupAssignment) -> Result<f64> {
    let l1 = theta.offdiag_l1();
    if l1 == 0.0 {
        return Err(Error::DegenerateEstimate);
    }
    Ok(2.0 * bias_group(theta, z).sqrt() / l1)
}
