//! The convex per-mode objective, its slack variables and its subgradient.
//!
//! For a fixed mode `l`, every sample is projected along all other modes and
//! unfolded at `l`, giving matrices `Y_i`. With `D_ab = (Y_a - Y_b)(Y_a - Y_b)^T`
//! the single-mode objective in the Gram matrix `W` is
//!
//! ```text
//! mu ||W||_* + lambda/(2NL) sum_ij eta_ij tr(D_ij W)
//!            + 1/(2NL) sum_ijp eta_ij (1 - psi_ip) [1 + tr(D_ij W) - tr(D_ip W)]_+
//! ```
//!
//! Only triplets with `eta_ij = 1` and `psi_ip = 0` contribute, so they are
//! enumerated from the neighbor lists instead of over all `N^3` index triples.

use std::collections::HashMap;

use nalgebra::DVector;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::graph::NeighborGraph;
use crate::linalg;
use crate::tensor::Matrix;

/// Upper triangle of `w`, column by column.
fn upper_triangle(w: &Matrix) -> Matrix {
    let n = w.nrows();
    let mut out = Matrix::zeros(n * (n + 1) / 2, 1);
    let mut col = 0;
    for c in 0..n {
        for r in 0..=c {
            out[col] = w[(r, c)];
            col += 1;
        }
    }
    out
}

/// Per-mode data for one solve: partial projections, unfolded, plus the
/// difference outer products for every pair the objective touches.
#[derive(Debug, Clone)]
pub struct ModeContext {
    pub mode: usize,
    pub order: usize,
    pub lambda: f64,
    unfoldings: Vec<Matrix>,
    /// Row `k` holds the upper triangle of `D_ab` for `pair_ids[k]`, with
    /// off-diagonal entries doubled so that a dot product with
    /// [`upper_triangle`] of `W` gives `tr(D_ab W)`.
    outer: Matrix,
    pair_ids: Vec<(usize, usize)>,
    /// `(j, pair)` with `eta_ij = 1`, per `i`.
    targets: Vec<Vec<(usize, usize)>>,
    /// `(p, pair)` with `psi_ip = 0`, per `i`.
    impostors: Vec<Vec<(usize, usize)>>,
    /// Pair index of every target edge, in enumeration order.
    pull_pairs: Vec<u32>,
    /// `(target pair, impostor pair)` of every triplet, in [`ModeContext::triplets`] order.
    hinge_pairs: Vec<(u32, u32)>,
}

/// Triplets `(i, j, p)` with `j` a target and `p` an impostor of `i`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TripletSet {
    pub triplets: Vec<(usize, usize, usize)>,
}

impl TripletSet {
    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }
}

/// Builds the mode-`mode` context from projection matrices `projections[k]`
/// (`J_k x I_k`); the entry for `mode` itself is ignored.
pub fn make_context(
    ds: &LabeledDataset,
    projections: &[Matrix],
    mode: usize,
    graph: &NeighborGraph,
    lambda: f64,
) -> Result<ModeContext> {
    let order = ds.order();
    if mode >= order {
        return Err(Error::ModeOutOfRange { mode, order });
    }
    if projections.len() != order {
        return Err(Error::ShapeMismatch(format!(
            "{} projections for order-{order} data",
            projections.len()
        )));
    }
    for (k, (u, &d)) in projections.iter().zip(ds.dims()).enumerate() {
        if k != mode && u.ncols() != d {
            return Err(Error::ShapeMismatch(format!(
                "projection {k} has {} columns, mode size is {d}",
                u.ncols()
            )));
        }
    }
    if graph.len() != ds.len() {
        return Err(Error::ShapeMismatch(format!(
            "graph over {} samples, dataset has {}",
            graph.len(),
            ds.len()
        )));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
    }
    let unfoldings = ds
        .tensors()
        .iter()
        .map(|a| a.multi_mode_product(projections, Some(mode))?.unfold(mode))
        .collect::<Result<Vec<_>>>()?;

    let n = ds.len();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pair_ids = Vec::new();
    let mut pair = |a: usize, b: usize| {
        let key = (a.min(b), a.max(b));
        *index.entry(key).or_insert_with(|| {
            pair_ids.push(key);
            pair_ids.len() - 1
        })
    };
    let targets: Vec<Vec<(usize, usize)>> =
        (0..n).map(|i| graph.targets(i).map(|j| (j, pair(i, j))).collect()).collect();
    let impostors: Vec<Vec<(usize, usize)>> =
        (0..n).map(|i| graph.impostors(i).map(|p| (p, pair(i, p))).collect()).collect();
    let size = unfoldings[0].nrows();
    let mut outer = Matrix::zeros(pair_ids.len(), size * (size + 1) / 2);
    for (k, &(a, b)) in pair_ids.iter().enumerate() {
        let diff = &unfoldings[a] - &unfoldings[b];
        let d = &diff * diff.transpose();
        let mut col = 0;
        for c in 0..size {
            for r in 0..=c {
                outer[(k, col)] = if r == c { d[(r, c)] } else { 2.0 * d[(r, c)] };
                col += 1;
            }
        }
    }
    let mut pull_pairs = Vec::new();
    let mut hinge_pairs = Vec::new();
    for (ts, is) in targets.iter().zip(&impostors) {
        for &(_, pj) in ts {
            pull_pairs.push(pj as u32);
            hinge_pairs.extend(is.iter().map(|&(_, pp)| (pj as u32, pp as u32)));
        }
    }
    Ok(ModeContext {
        mode,
        order,
        lambda,
        unfoldings,
        outer,
        pair_ids,
        targets,
        impostors,
        pull_pairs,
        hinge_pairs,
    })
}

impl ModeContext {
    pub fn sample_count(&self) -> usize {
        self.unfoldings.len()
    }

    /// Side length `I_l` of the Gram matrix.
    pub fn size(&self) -> usize {
        self.unfoldings[0].nrows()
    }

    pub fn unfoldings(&self) -> &[Matrix] {
        &self.unfoldings
    }

    /// `1 / (2 N L)`.
    pub fn scale(&self) -> f64 {
        1.0 / (2.0 * self.sample_count() as f64 * self.order as f64)
    }

    /// `D_ab = (Y_a - Y_b)(Y_a - Y_b)^T`, computed directly.
    pub fn difference_outer(&self, a: usize, b: usize) -> Matrix {
        let diff = &self.unfoldings[a] - &self.unfoldings[b];
        &diff * diff.transpose()
    }

    pub fn triplets(&self) -> TripletSet {
        let mut triplets = Vec::new();
        for (i, (ts, is)) in self.targets.iter().zip(&self.impostors).enumerate() {
            for &(j, _) in ts {
                for &(p, _) in is {
                    triplets.push((i, j, p));
                }
            }
        }
        TripletSet { triplets }
    }

    /// Triplets whose slack is strictly positive at `w`.
    pub fn active_triplets(&self, w: &Matrix) -> TripletSet {
        let t = self.pair_traces(w);
        let mut triplets = Vec::new();
        for (i, (ts, is)) in self.targets.iter().zip(&self.impostors).enumerate() {
            for &(j, pj) in ts {
                for &(p, pp) in is {
                    if 1.0 + t[pj] - t[pp] > 0.0 {
                        triplets.push((i, j, p));
                    }
                }
            }
        }
        TripletSet { triplets }
    }

    /// `tr(D_ab W)` for every stored pair.
    fn pair_traces(&self, w: &Matrix) -> Vec<f64> {
        (&self.outer * upper_triangle(w)).as_slice().to_vec()
    }

    /// `[1 + tr(D_ij W) - tr(D_ip W)]_+`.
    pub fn slack(&self, w: &Matrix, i: usize, j: usize, p: usize) -> f64 {
        let tij = self.difference_outer(i, j).dot(w);
        let tip = self.difference_outer(i, p).dot(w);
        (1.0 + tij - tip).max(0.0)
    }

    /// Pull plus hinge terms, without the nuclear norm.
    pub fn smooth_value(&self, w: &Matrix) -> f64 {
        let t = self.pair_traces(w);
        let pull: f64 = self.pull_pairs.iter().map(|&p| t[p as usize]).sum();
        let hinge: f64 =
            self.hinge_pairs.iter().map(|&(j, p)| (1.0 + t[j as usize] - t[p as usize]).max(0.0)).sum();
        self.scale() * (self.lambda * pull + hinge)
    }

    /// Single-mode objective `mu ||W||_* + smooth_value(W)`.
    pub fn objective_value(&self, w: &Matrix, mu: f64) -> Result<f64> {
        let nuclear = if mu == 0.0 { 0.0 } else { linalg::nuclear_norm_sym(w)? };
        Ok(mu * nuclear + self.smooth_value(w))
    }

    /// Subgradient of [`Self::smooth_value`] at `w`; the active hinge set
    /// uses a strict `slack > 0` test.
    pub fn subgradient(&self, w: &Matrix) -> Matrix {
        let t = self.pair_traces(w);
        let active: Vec<f64> = self
            .hinge_pairs
            .iter()
            .map(|&(j, p)| if 1.0 + t[j as usize] - t[p as usize] > 0.0 { 1.0 } else { 0.0 })
            .collect();
        self.weighted_subgradient(&active)
    }

    /// Number of triplets, i.e. the length of [`Self::triplets`].
    pub fn triplet_count(&self) -> usize {
        self.hinge_pairs.len()
    }

    /// Unclamped hinge arguments `1 + tr(D_ij W) - tr(D_ip W)`, in
    /// [`Self::triplets`] order.
    pub fn triplet_margins(&self, w: &Matrix) -> Vec<f64> {
        self.margins_and_value(w).0
    }

    /// [`Self::triplet_margins`] and [`Self::smooth_value`] from one pass.
    pub fn margins_and_value(&self, w: &Matrix) -> (Vec<f64>, f64) {
        let t = self.pair_traces(w);
        let pull: f64 = self.pull_pairs.iter().map(|&p| t[p as usize]).sum();
        let margins: Vec<f64> =
            self.hinge_pairs.iter().map(|&(j, p)| 1.0 + t[j as usize] - t[p as usize]).collect();
        let hinge: f64 = margins.iter().map(|m| m.max(0.0)).sum();
        (margins, self.scale() * (self.lambda * pull + hinge))
    }

    /// Pull gradient plus every hinge term scaled by its weight, one weight
    /// per triplet in [`Self::triplets`] order. Weights in `[0, 1]` that are
    /// 1 on positive slack and 0 on negative slack give a subgradient.
    pub fn weighted_subgradient(&self, weights: &[f64]) -> Matrix {
        let s = self.scale();
        let mut coeff = vec![0.0; self.pair_ids.len()];
        for &p in &self.pull_pairs {
            coeff[p as usize] += s * self.lambda;
        }
        for (&(j, p), &a) in self.hinge_pairs.iter().zip(weights) {
            coeff[j as usize] += s * a;
            coeff[p as usize] -= s * a;
        }
        self.combine(&coeff)
    }

    /// `sum_k coeff[k] D_k` over the stored pairs.
    fn combine(&self, coeff: &[f64]) -> Matrix {
        let n = self.size();
        let packed = self.outer.tr_mul(&DVector::from_column_slice(coeff));
        let mut g = Matrix::zeros(n, n);
        let mut col = 0;
        for c in 0..n {
            for r in 0..=c {
                let v = if r == c { packed[col] } else { 0.5 * packed[col] };
                g[(r, c)] = v;
                g[(c, r)] = v;
                col += 1;
            }
        }
        g
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pair_ids
    }
}

/// The full objective evaluated in embedding space: every sample is
/// projected by all `U_l`, distances are plain Frobenius distances, and the
/// nuclear norm of `W_l = U_l^T U_l` is `||U_l||_F^2`.
pub fn embedded_objective(
    ds: &LabeledDataset,
    graph: &NeighborGraph,
    projections: &[Matrix],
    lambda: f64,
    mu: f64,
) -> Result<f64> {
    let order = ds.order();
    let emb =
        ds.tensors().iter().map(|a| a.multi_mode_product(projections, None)).collect::<Result<Vec<_>>>()?;
    let n = ds.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = emb[i].distance_sq(&emb[j])?;
        }
    }
    let mut pull = 0.0;
    let mut hinge = 0.0;
    for i in 0..n {
        for j in 0..n {
            if !graph.eta(i, j) {
                continue;
            }
            pull += d[i * n + j];
            for p in 0..n {
                if !graph.psi(i, p) {
                    hinge += (1.0 + d[i * n + j] - d[i * n + p]).max(0.0);
                }
            }
        }
    }
    let nuclear: f64 = projections.iter().map(|u| u.norm_squared()).sum();
    let scale = 1.0 / (2.0 * n as f64 * order as f64);
    Ok(mu * nuclear + scale * (lambda * pull + hinge))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synth_clusters;
    use crate::graph::build_graph;
    use crate::tensor::DenseTensor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn identities(dims: &[usize]) -> Vec<Matrix> {
        dims.iter().map(|&d| Matrix::identity(d, d)).collect()
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> Matrix {
        let r = Matrix::from_fn(rank, n, |_, _| rng.random_range(-1.0..1.0));
        r.transpose() * r
    }

    fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
        let m = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        (&m + m.transpose()) * 0.5
    }

    // Straight-line evaluation over all i, j, p with the raw binary weights.
    fn brute_objective(ctx: &ModeContext, g: &NeighborGraph, w: &Matrix, mu: f64) -> f64 {
        let n = ctx.sample_count();
        let y = ctx.unfoldings();
        let tr = |a: usize, b: usize| {
            let d = &y[a] - &y[b];
            (&d * d.transpose() * w).trace()
        };
        let mut pull = 0.0;
        let mut hinge = 0.0;
        for i in 0..n {
            for j in 0..n {
                let eta = if g.eta(i, j) { 1.0 } else { 0.0 };
                pull += eta * tr(i, j);
                for p in 0..n {
                    let psi = if g.psi(i, p) { 1.0 } else { 0.0 };
                    hinge += eta * (1.0 - psi) * (1.0 + tr(i, j) - tr(i, p)).max(0.0);
                }
            }
        }
        let eig = w.clone().symmetric_eigenvalues();
        let nuc: f64 = eig.iter().map(|v| v.abs()).sum();
        let s = 1.0 / (2.0 * n as f64 * ctx.order as f64);
        mu * nuc + s * (ctx.lambda * pull + hinge)
    }

    #[test]
    fn identity_projections_give_plain_unfoldings() {
        let ds = synth_clusters(2, 3, &[3, 4, 2], &[2, 2, 1], 0.2, 1).unwrap();
        let g = build_graph(&ds, 1, 1).unwrap();
        for mode in 0..3 {
            let ctx = make_context(&ds, &identities(ds.dims()), mode, &g, 0.1).unwrap();
            for (y, a) in ctx.unfoldings().iter().zip(ds.tensors()) {
                assert_eq!(*y, a.unfold(mode).unwrap());
            }
        }
    }

    #[test]
    fn order_one_context_is_column() {
        let ds = synth_clusters(2, 3, &[5], &[2], 0.2, 1).unwrap();
        let g = build_graph(&ds, 1, 1).unwrap();
        let ctx = make_context(&ds, &identities(&[5]), 0, &g, 1.0).unwrap();
        for (y, a) in ctx.unfoldings().iter().zip(ds.tensors()) {
            assert_eq!(y.shape(), (5, 1));
            assert_eq!(y.as_slice(), a.data());
        }
    }

    #[test]
    fn context_matches_mode_product_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ds = synth_clusters(2, 3, &[3, 4, 2], &[2, 2, 1], 0.2, 1).unwrap();
        let g = build_graph(&ds, 1, 1).unwrap();
        let us: Vec<Matrix> =
            ds.dims().iter().map(|&d| Matrix::from_fn(2, d, |_, _| rng.random_range(-1.0..1.0))).collect();
        let ctx = make_context(&ds, &us, 1, &g, 0.1).unwrap();
        for (y, a) in ctx.unfoldings().iter().zip(ds.tensors()) {
            let chained = a.mode_product(&us[0], 0).unwrap().mode_product(&us[2], 2).unwrap();
            assert!((y - chained.unfold(1).unwrap()).norm() < 1e-13);
        }
    }

    #[test]
    fn context_rejects_bad_projection() {
        let ds = synth_clusters(2, 2, &[3, 4], &[1, 1], 0.2, 1).unwrap();
        let g = build_graph(&ds, 1, 1).unwrap();
        let bad = vec![Matrix::identity(3, 3), Matrix::identity(3, 3)];
        assert!(matches!(make_context(&ds, &bad, 0, &g, 0.1), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn slack_special_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ds = synth_clusters(2, 3, &[4, 3], &[2, 2], 0.3, 2).unwrap();
        let g = build_graph(&ds, 2, 2).unwrap();
        let ctx = make_context(&ds, &identities(ds.dims()), 0, &g, 0.1).unwrap();
        let w = random_psd(&mut rng, 4, 4);
        assert_eq!(ctx.slack(&w, 0, 1, 1), 1.0);
        let zero = Matrix::zeros(4, 4);
        for &(i, j, p) in &ctx.triplets().triplets {
            assert_eq!(ctx.slack(&zero, i, j, p), 1.0);
        }
    }

    #[test]
    fn slack_matches_embedding_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ds = synth_clusters(2, 3, &[4, 3], &[2, 2], 0.3, 2).unwrap();
        let g = build_graph(&ds, 2, 2).unwrap();
        let u1 = Matrix::from_fn(3, 3, |_, _| rng.random_range(-0.5..0.5));
        let u0 = Matrix::from_fn(2, 4, |_, _| rng.random_range(-0.5..0.5));
        let us = vec![u0.clone(), u1];
        let ctx = make_context(&ds, &us, 0, &g, 0.1).unwrap();
        let w = u0.transpose() * &u0;
        let emb: Vec<DenseTensor> =
            ds.tensors().iter().map(|a| a.multi_mode_product(&us, None).unwrap()).collect();
        for &(i, j, p) in ctx.triplets().triplets.iter().take(20) {
            let direct =
                (1.0 + emb[i].distance_sq(&emb[j]).unwrap() - emb[i].distance_sq(&emb[p]).unwrap()).max(0.0);
            assert!((ctx.slack(&w, i, j, p) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn objective_at_zero_counts_triplets() {
        let ds = synth_clusters(2, 4, &[3, 3], &[2, 2], 0.3, 3).unwrap();
        let g = build_graph(&ds, 2, 2).unwrap();
        let ctx = make_context(&ds, &identities(ds.dims()), 1, &g, 0.5).unwrap();
        let v = ctx.objective_value(&Matrix::zeros(3, 3), 0.7).unwrap();
        let expect = g.triplet_count() as f64 / (2.0 * 8.0 * 2.0);
        assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn single_class_has_no_hinge() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ds = synth_clusters(1, 5, &[3, 2], &[2, 1], 0.3, 3).unwrap();
        let g = build_graph(&ds, 2, 2).unwrap();
        let ctx = make_context(&ds, &identities(ds.dims()), 0, &g, 0.5).unwrap();
        assert!(ctx.triplets().is_empty());
        let w = random_psd(&mut rng, 3, 3);
        let mu = 0.2;
        let mut pull = Matrix::zeros(3, 3);
        for i in 0..5 {
            for j in 0..5 {
                if g.eta(i, j) {
                    pull += ctx.difference_outer(i, j);
                }
            }
        }
        let pull = pull * (0.5 * ctx.scale());
        let expect = mu * w.trace() + pull.dot(&w);
        assert!((ctx.objective_value(&w, mu).unwrap() - expect).abs() < 1e-12);
        assert!((ctx.subgradient(&w) - pull).norm() < 1e-13);
    }

    #[test]
    fn objective_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ds = synth_clusters(2, 4, &[3, 4], &[2, 2], 0.5, 8).unwrap();
        let g = build_graph(&ds, 2, 3).unwrap();
        let us = vec![Matrix::identity(3, 3), Matrix::from_fn(3, 4, |_, _| rng.random_range(-1.0..1.0))];
        let ctx = make_context(&ds, &us, 0, &g, 0.3).unwrap();
        for _ in 0..5 {
            let w = random_psd(&mut rng, 3, 2) * 0.3;
            let v = ctx.objective_value(&w, 0.05).unwrap();
            let b = brute_objective(&ctx, &g, &w, 0.05);
            assert!((v - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn identical_samples_give_zero_gradient() {
        let ds = synth_clusters(2, 3, &[3, 3], &[1, 1], 0.0, 1).unwrap();
        let same = ds.with_tensors(vec![ds.tensors()[0].clone(); 6]).unwrap();
        let g = build_graph(&same, 2, 2).unwrap();
        let ctx = make_context(&same, &identities(&[3, 3]), 0, &g, 1.0).unwrap();
        let w = Matrix::identity(3, 3);
        assert_eq!(ctx.active_triplets(&w).len(), g.triplet_count());
        assert_eq!(ctx.subgradient(&w), Matrix::zeros(3, 3));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ds = synth_clusters(3, 3, &[4, 3], &[2, 2], 0.5, 4).unwrap();
        let g = build_graph(&ds, 2, 2).unwrap();
        let ctx = make_context(&ds, &identities(ds.dims()), 0, &g, 0.2).unwrap();
        let w = random_psd(&mut rng, 4, 4) * 0.2;
        let grad = ctx.subgradient(&w);
        let h = 1e-6;
        for _ in 0..5 {
            let dw = random_sym(&mut rng, 4);
            let fd = (ctx.smooth_value(&(&w + &dw * h)) - ctx.smooth_value(&(&w - &dw * h))) / (2.0 * h);
            let an = grad.dot(&dw);
            assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-8), "fd {fd} vs {an}");
        }
    }

    #[test]
    fn convex_along_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ds = synth_clusters(2, 4, &[3, 3], &[2, 2], 0.5, 4).unwrap();
        let g = build_graph(&ds, 2, 2).unwrap();
        let ctx = make_context(&ds, &identities(ds.dims()), 1, &g, 0.2).unwrap();
        for _ in 0..10 {
            let w1 = random_psd(&mut rng, 3, 3);
            let w2 = random_psd(&mut rng, 3, 2);
            let t: f64 = rng.random_range(0.0..1.0);
            let mid = &w1 * t + &w2 * (1.0 - t);
            let lhs = ctx.objective_value(&mid, 0.1).unwrap();
            let rhs = t * ctx.objective_value(&w1, 0.1).unwrap()
                + (1.0 - t) * ctx.objective_value(&w2, 0.1).unwrap();
            assert!(lhs <= rhs + 1e-10);
        }
    }

    #[test]
    fn weighted_subgradient_with_active_indicator_is_subgradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let ds = synth_clusters(3, 4, &[3, 3], &[2, 2], 0.5, 6).unwrap();
        let g = build_graph(&ds, 2, 3).unwrap();
        let ctx = make_context(&ds, &identities(ds.dims()), 0, &g, 0.2).unwrap();
        for _ in 0..5 {
            let w = random_psd(&mut rng, 3, 3);
            let m = ctx.triplet_margins(&w);
            assert_eq!(m.len(), ctx.triplets().len());
            for (&(i, j, p), &v) in ctx.triplets().triplets.iter().zip(&m) {
                assert!((v.max(0.0) - ctx.slack(&w, i, j, p)).abs() < 1e-10);
            }
            let ind: Vec<f64> = m.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
            assert!((ctx.weighted_subgradient(&ind) - ctx.subgradient(&w)).norm() < 1e-12);
        }
    }

    #[test]
    fn subgradient_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ds = synth_clusters(2, 4, &[3, 3], &[2, 2], 0.5, 4).unwrap();
        let g = build_graph(&ds, 2, 2).unwrap();
        let ctx = make_context(&ds, &identities(ds.dims()), 0, &g, 0.2).unwrap();
        for _ in 0..10 {
            let w = random_psd(&mut rng, 3, 3);
            let w2 = random_psd(&mut rng, 3, 3);
            let gr = ctx.subgradient(&w);
            assert!(ctx.smooth_value(&w2) >= ctx.smooth_value(&w) + gr.dot(&(&w2 - &w)) - 1e-10);
        }
    }

    #[test]
    fn trace_form_equals_embedding_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let ds = synth_clusters(2, 4, &[3, 4], &[2, 2], 0.5, 4).unwrap();
        let g = build_graph(&ds, 2, 2).unwrap();
        let us = vec![
            Matrix::from_fn(2, 3, |_, _| rng.random_range(-1.0..1.0)),
            Matrix::from_fn(3, 4, |_, _| rng.random_range(-1.0..1.0)),
        ];
        let mu = 0.3;
        let emb = embedded_objective(&ds, &g, &us, 0.1, mu).unwrap();
        for mode in 0..2 {
            let ctx = make_context(&ds, &us, mode, &g, 0.1).unwrap();
            let w = us[mode].transpose() * &us[mode];
            let other: f64 =
                us.iter().enumerate().filter(|(k, _)| *k != mode).map(|(_, u)| u.norm_squared()).sum();
            let v = ctx.objective_value(&w, mu).unwrap() + mu * other;
            assert!((v - emb).abs() <= 1e-8 * emb.abs());
        }
    }
}
