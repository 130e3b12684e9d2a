//! Target (same-class) and impostor (different-class) neighbor graphs.

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// Binary neighbor relations over a training set, fixed once built.
///
/// `eta(i, j)` marks same-class k1-nearest pairs; `psi(i, j)` is `false`
/// exactly for different-class k2-nearest pairs. Both relations are
/// OR-symmetrized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborGraph {
    n: usize,
    eta: Vec<bool>,
    psi: Vec<bool>,
    pub k1: usize,
    pub k2: usize,
}

impl NeighborGraph {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn eta(&self, i: usize, j: usize) -> bool {
        self.eta[i * self.n + j]
    }

    pub fn psi(&self, i: usize, j: usize) -> bool {
        self.psi[i * self.n + j]
    }

    /// `j` with `eta(i, j)`, ascending.
    pub fn targets(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.eta(i, j))
    }

    /// `p` with `!psi(i, p)`, ascending.
    pub fn impostors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&p| !self.psi(i, p))
    }

    pub fn target_edge_count(&self) -> usize {
        self.eta.iter().filter(|&&e| e).count()
    }

    /// Number of `(i, j, p)` with `eta(i, j)` and `!psi(i, p)`.
    pub fn triplet_count(&self) -> usize {
        (0..self.n).map(|i| self.targets(i).count() * self.impostors(i).count()).sum()
    }
}

/// Squared Frobenius distances between all pairs.
pub fn pairwise_sq_distances(ds: &LabeledDataset) -> Matrix {
    let n = ds.len();
    let t = ds.tensors();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = t[i].distance_sq(&t[j]).expect("dataset tensors share dims");
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// Frobenius distances `||A_i - A_j||_F` between all pairs.
pub fn pairwise_distances(ds: &LabeledDataset) -> Matrix {
    pairwise_sq_distances(ds).map(f64::sqrt)
}

/// Indices of the `k` nearest candidates to `i`; ties go to the smaller index.
fn nearest(dist: &Matrix, i: usize, candidates: &mut [usize], k: usize) -> Vec<usize> {
    candidates.sort_by(|&a, &b| dist[(i, a)].total_cmp(&dist[(i, b)]).then(a.cmp(&b)));
    candidates.iter().take(k).copied().collect()
}

pub fn build_graph(ds: &LabeledDataset, k1: usize, k2: usize) -> Result<NeighborGraph> {
    if k1 == 0 || k2 == 0 {
        return Err(Error::InvalidParameter(format!("k1 and k2 must be >= 1, got {k1}, {k2}")));
    }
    if let Some(c) = ds.class_sizes().iter().position(|&s| s == 0) {
        return Err(Error::EmptyClass(c as u32 + 1));
    }
    let n = ds.len();
    let labels = ds.labels();
    let dist = pairwise_sq_distances(ds);
    let mut eta = vec![false; n * n];
    let mut psi = vec![true; n * n];
    let mut same = Vec::with_capacity(n);
    let mut other = Vec::with_capacity(n);
    for i in 0..n {
        same.clear();
        other.clear();
        for j in 0..n {
            if j == i {
                continue;
            }
            if labels[j] == labels[i] {
                same.push(j);
            } else {
                other.push(j);
            }
        }
        for j in nearest(&dist, i, &mut same, k1) {
            eta[i * n + j] = true;
            eta[j * n + i] = true;
        }
        for p in nearest(&dist, i, &mut other, k2) {
            psi[i * n + p] = false;
            psi[p * n + i] = false;
        }
    }
    Ok(NeighborGraph { n, eta, psi, k1, k2 })
}
