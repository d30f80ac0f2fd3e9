use rand::seq::index;

use crate::datagen::RngSeed;
use crate::error::{Error, Result};
use crate::model::SymMatrix;

/// Edge count at which the nominal rewiring budget applies unscaled.
pub const RWGL_REFERENCE_EDGES: usize = 500;

/// Rewiring budget for a graph with `edges` edges: `base` at or above the
/// reference edge count, proportionally fewer below it.
pub fn rwgl_rewire_count(base: usize, edges: usize) -> usize {
    if edges >= RWGL_REFERENCE_EDGES {
        base
    } else {
        ((base * edges) as f64 / RWGL_REFERENCE_EDGES as f64).round() as usize
    }
}

/// Moves `n_rewire` randomly chosen off-diagonal nonzeros, values intact, to
/// randomly chosen off-diagonal zero positions. Symmetric; the diagonal is untouched.
pub fn rwgl_rewire(theta_hat: &SymMatrix, n_rewire: usize, seed: RngSeed) -> Result<SymMatrix> {
    let p = theta_hat.dim();
    let (mut edges, mut holes) = (Vec::new(), Vec::new());
    for j in 0..p {
        for i in 0..j {
            if theta_hat.get(i, j) != 0.0 {
                edges.push((i, j));
            } else {
                holes.push((i, j));
            }
        }
    }
    if edges.len() < n_rewire {
        return Err(Error::InvalidArgument(format!(
            "cannot rewire {n_rewire} edges: only {} present",
            edges.len()
        )));
    }
    if holes.len() < n_rewire {
        return Err(Error::InvalidArgument(format!(
            "cannot rewire {n_rewire} edges: only {} empty positions",
            holes.len()
        )));
    }
    let mut rng = seed.rng();
    let from = index::sample(&mut rng, edges.len(), n_rewire);
    let to = index::sample(&mut rng, holes.len(), n_rewire);
    let mut m = theta_hat.as_matrix().clone();
    for (a, b) in from.iter().zip(to.iter()) {
        let (i, j) = edges[a];
        let (k, l) = holes[b];
        let v = m[(i, j)];
        m[(i, j)] = 0.0;
        m[(j, i)] = 0.0;
        m[(k, l)] = v;
        m[(l, k)] = v;
    }
    Ok(SymMatrix::symmetrize(m))
}
