//! Alternating per-mode training of the projection stack.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::graph::{build_graph, NeighborGraph};
use crate::linalg;
use crate::mfpc::{self, SolverConfig, TracePoint};
use crate::objective::make_context;
use crate::tensor::{DenseTensor, Matrix};

/// Learned projections `U_l` (`J_l x I_l`) and their Gram matrices
/// `W_l = U_l^T U_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionStack {
    matrices: Vec<Matrix>,
    grams: Vec<Matrix>,
}

impl ProjectionStack {
    /// `U_l = W_l = I` for every mode.
    pub fn identity(dims: &[usize]) -> Self {
        let matrices: Vec<Matrix> = dims.iter().map(|&d| Matrix::identity(d, d)).collect();
        Self { grams: matrices.clone(), matrices }
    }

    /// Factors every Gram matrix with [`recover_projection`]; the stored grams
    /// are then recomputed as `U^T U`.
    pub fn from_grams(grams: &[Matrix], rank_tol: f64) -> Result<Self> {
        let matrices = grams.iter().map(|w| recover_projection(w, rank_tol)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_projections(matrices))
    }

    pub fn from_projections(matrices: Vec<Matrix>) -> Self {
        let grams = matrices.iter().map(|u| u.transpose() * u).collect();
        Self { matrices, grams }
    }

    /// Rebuilds a stack from stored parts, checking shapes.
    pub fn from_parts(matrices: Vec<Matrix>, grams: Vec<Matrix>) -> Result<Self> {
        if matrices.len() != grams.len() || matrices.is_empty() {
            return Err(Error::ShapeMismatch("projection and gram counts differ".into()));
        }
        for (u, w) in matrices.iter().zip(&grams) {
            if w.shape() != (u.ncols(), u.ncols()) {
                return Err(Error::ShapeMismatch(format!(
                    "gram {}x{} does not match projection {}x{}",
                    w.nrows(),
                    w.ncols(),
                    u.nrows(),
                    u.ncols()
                )));
            }
        }
        Ok(Self { matrices, grams })
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn grams(&self) -> &[Matrix] {
        &self.grams
    }

    pub fn order(&self) -> usize {
        self.matrices.len()
    }

    /// Embedding dims `J_l`.
    pub fn ranks(&self) -> Vec<usize> {
        self.matrices.iter().map(|u| u.nrows()).collect()
    }

    /// Input dims `I_l`.
    pub fn input_dims(&self) -> Vec<usize> {
        self.matrices.iter().map(|u| u.ncols()).collect()
    }

    fn replace(&mut self, mode: usize, u: Matrix) {
        self.grams[mode] = u.transpose() * &u;
        self.matrices[mode] = u;
    }

    pub fn transform_tensor(&self, a: &DenseTensor) -> Result<DenseTensor> {
        if a.dims() != self.input_dims().as_slice() {
            return Err(Error::ShapeMismatch(format!(
                "tensor dims {:?}, projections expect {:?}",
                a.dims(),
                self.input_dims()
            )));
        }
        a.multi_mode_product(&self.matrices, None)
    }
}

/// Embeds every sample: `B_i = A_i x_1 U_1 ... x_L U_L`.
pub fn transform(stack: &ProjectionStack, ds: &LabeledDataset) -> Result<LabeledDataset> {
    let emb = ds.tensors().iter().map(|a| stack.transform_tensor(a)).collect::<Result<Vec<_>>>()?;
    ds.with_tensors(emb)
}

/// Factor `W = U^T U` with `U = Lambda_+^{1/2} V_+^T`, keeping eigenvalues
/// above `rank_tol * lambda_max`. Falls back to the leading eigenpair when
/// nothing survives.
pub fn recover_projection(w: &Matrix, rank_tol: f64) -> Result<Matrix> {
    let eig = linalg::sym_eigen(w)?;
    let top = eig.values[0];
    let mut keep: Vec<usize> =
        (0..eig.values.len()).filter(|&k| top > 0.0 && eig.values[k] > rank_tol * top).collect();
    if keep.is_empty() {
        keep.push(0);
    }
    let n = w.nrows();
    let mut u = Matrix::zeros(keep.len(), n);
    for (row, &k) in keep.iter().enumerate() {
        let s = eig.values[k].max(0.0).sqrt();
        for c in 0..n {
            u[(row, c)] = s * eig.vectors[(c, k)];
        }
    }
    Ok(u)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// `W_l = I`.
    Identity,
    /// `W_l = s * I`.
    Scaled(f64),
    /// `W_l = R^T R / I_l` with Gaussian `R`, drawn from the fit seed.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub k1: usize,
    pub k2: usize,
    pub lambda: f64,
    pub solver: SolverConfig,
    pub outer_max: usize,
    pub outer_tol: f64,
    /// Relative eigenvalue cutoff used when factoring `W_l` into `U_l`.
    pub rank_tol: f64,
    pub seed: u64,
    pub init: Init,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            k1: 7,
            k2: 15,
            lambda: 0.1,
            solver: SolverConfig::default(),
            outer_max: 20,
            outer_tol: 1e-4,
            rank_tol: 1e-8,
            seed: 42,
            init: Init::Identity,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.k1 == 0 || self.k2 == 0 {
            return bad("k1 and k2 must be >= 1".into());
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return bad(format!("lambda must be > 0, got {}", self.lambda));
        }
        if self.outer_max == 0 {
            return bad("outer_max must be >= 1".into());
        }
        if !(self.outer_tol >= 0.0) {
            return bad(format!("outer_tol must be >= 0, got {}", self.outer_tol));
        }
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return bad(format!("rank_tol must be in (0, 1), got {}", self.rank_tol));
        }
        if let Init::Scaled(s) = self.init {
            if !(s > 0.0) || !s.is_finite() {
                return bad(format!("init scale must be > 0, got {s}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub outer_iterations: usize,
    /// Full objective at the initial stack.
    pub initial_objective: f64,
    /// Full objective after each mode solve.
    pub objective_history: Vec<f64>,
    pub final_ranks: Vec<usize>,
    /// Seconds.
    pub wall_time: f64,
    /// Final `mu` shared by every mode solve.
    pub mu_bar: f64,
    /// Inner solver trace of each mode solve.
    pub solver_traces: Vec<Vec<TracePoint>>,
    /// Mode solves whose result did not lower the full objective and were discarded.
    pub rejected_solves: usize,
}

fn initial_stack(ds: &LabeledDataset, cfg: &FitConfig) -> Result<ProjectionStack> {
    let dims = ds.dims();
    match cfg.init {
        Init::Identity => Ok(ProjectionStack::identity(dims)),
        Init::Scaled(s) => {
            let us = dims.iter().map(|&d| Matrix::identity(d, d) * s.sqrt()).collect();
            Ok(ProjectionStack::from_projections(us))
        }
        Init::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let us = dims
                .iter()
                .map(|&d| Matrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0)) / (d as f64).sqrt())
                .collect();
            Ok(ProjectionStack::from_projections(us))
        }
    }
}

/// `mu_bar` shared by all mode solves of one fit: `1e-4 * mu_1`, with
/// `mu_1` taken from the largest per-mode gradient at the identity stack.
fn resolve_mu_bar(ds: &LabeledDataset, graph: &NeighborGraph, cfg: &FitConfig) -> Result<f64> {
    if let Some(mb) = cfg.solver.mu_bar {
        return Ok(mb);
    }
    let eye = ProjectionStack::identity(ds.dims());
    let mut mu_1: f64 = 0.0;
    for mode in 0..ds.order() {
        let ctx = make_context(ds, eye.matrices(), mode, graph, cfg.lambda)?;
        mu_1 = mu_1.max(mfpc::initial_mu(&ctx, &eye.grams()[mode], &cfg.solver)?);
    }
    Ok(1e-4 * mu_1)
}

/// Full objective: the mode-`mode` slice plus the other modes' nuclear norms.
fn full_objective(
    ctx: &crate::objective::ModeContext,
    stack: &ProjectionStack,
    w_mode: &Matrix,
    mu: f64,
) -> Result<f64> {
    let others: f64 =
        stack.grams().iter().enumerate().filter(|(k, _)| *k != ctx.mode).map(|(_, w)| w.trace()).sum();
    Ok(ctx.objective_value(w_mode, mu)? + mu * others)
}

pub fn fit(ds: &LabeledDataset, cfg: &FitConfig) -> Result<(ProjectionStack, TrainReport)> {
    let init = initial_stack(ds, cfg)?;
    fit_from(ds, cfg, init)
}

/// Like [`fit`], starting from an explicit stack.
pub fn fit_from(
    ds: &LabeledDataset,
    cfg: &FitConfig,
    init: ProjectionStack,
) -> Result<(ProjectionStack, TrainReport)> {
    cfg.validate()?;
    if init.input_dims() != ds.dims() {
        return Err(Error::ShapeMismatch(format!(
            "initial stack expects {:?}, data has {:?}",
            init.input_dims(),
            ds.dims()
        )));
    }
    let start = Instant::now();
    let graph = build_graph(ds, cfg.k1, cfg.k2)?;
    if graph.target_edge_count() == 0 {
        return Err(Error::DegenerateGraph);
    }
    let mu_bar = resolve_mu_bar(ds, &graph, cfg)?;
    let solver = SolverConfig { mu_bar: Some(mu_bar), ..cfg.solver.clone() };
    let order = ds.order();

    let mut stack = init;
    let initial_objective = {
        let ctx = make_context(ds, stack.matrices(), 0, &graph, cfg.lambda)?;
        full_objective(&ctx, &stack, &stack.grams()[0], mu_bar)?
    };
    let mut history = Vec::with_capacity(cfg.outer_max * order);
    let mut traces = Vec::with_capacity(cfg.outer_max * order);
    let mut rejected = 0;
    let mut sweep_start = initial_objective;
    let mut sweeps = 0;

    for _ in 0..cfg.outer_max {
        sweeps += 1;
        for mode in 0..order {
            let ctx = make_context(ds, stack.matrices(), mode, &graph, cfg.lambda)?;
            let w_old = stack.grams()[mode].clone();
            let before = full_objective(&ctx, &stack, &w_old, mu_bar)?;
            let state = mfpc::mfpc_solve(&ctx, &w_old, &solver)?;
            let u = recover_projection(&state.w, cfg.rank_tol)?;
            let w_new = u.transpose() * &u;
            let after = full_objective(&ctx, &stack, &w_new, mu_bar)?;
            traces.push(state.objective_trace);
            // Keep the descent property when a finite solve lands above its start.
            if after <= before {
                stack.replace(mode, u);
                history.push(after);
            } else {
                rejected += 1;
                history.push(before);
            }
        }
        let end = *history.last().unwrap();
        let decrease = (sweep_start - end) / sweep_start.abs().max(f64::MIN_POSITIVE);
        sweep_start = end;
        if decrease < cfg.outer_tol {
            break;
        }
    }

    let report = TrainReport {
        outer_iterations: sweeps,
        initial_objective,
        objective_history: history,
        final_ranks: stack.ranks(),
        wall_time: start.elapsed().as_secs_f64(),
        mu_bar,
        solver_traces: traces,
        rejected_solves: rejected,
    };
    Ok((stack, report))
}
