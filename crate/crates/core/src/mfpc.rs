//! Modified fixed-point continuation for one mode.
//!
//! Each inner iteration takes a subgradient step on the smooth part and then
//! soft-thresholds the eigenvalues of the result:
//!
//! ```text
//! Z = W - tau * g(W)
//! W <- V max(0, Lambda - tau * mu) V^T      where Z = V Lambda V^T
//! ```
//!
//! The outer loop walks a geometrically decreasing schedule of `mu` values
//! down to `mu_bar`.
//!
//! With a fixed step, `g` is the plain subgradient (indicator weights on the
//! violated hinges). With the automatic step, the hinge weights in `g` are
//! picked in `[0, 1]` by an accelerated ascent on the dual of the proximal
//! subproblem `min_V f(V) + |V - W|^2 / (2 tau)`, which makes the step
//! implicit. The plain subgradient keeps flipping between the two sides of a
//! hinge kink and stalls there; the implicit step walks along it.

use crate::error::{Error, Result};
use crate::linalg;
use crate::objective::ModeContext;
use crate::tensor::Matrix;

/// Halvings tried before a stage is declared stalled.
const MAX_BACKTRACKS: usize = 60;
/// Consecutive increases tolerated under a fixed step size.
const DIVERGENCE_STREAK: usize = 5;
const DIVERGENCE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    Fixed(f64),
    /// Starts every stage at `1 / lambda_max(g)`. Halved when a step would
    /// raise the composite objective or the hinge-weight ascent runs out of
    /// iterations, doubled back after quick ascents.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Final `mu`. `None` means `1e-4 * mu_1`.
    pub mu_bar: Option<f64>,
    pub mu_decay: f64,
    /// `mu_1 = mu_init_scale * lambda_max(g(W0))`.
    pub mu_init_scale: f64,
    /// Iteration cap per stage.
    pub t_max: usize,
    pub rel_tol: f64,
    pub tau: StepSize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mu_bar: None,
            mu_decay: 0.25,
            mu_init_scale: 0.25,
            t_max: 200,
            rel_tol: 1e-5,
            tau: StepSize::Auto,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if let Some(mb) = self.mu_bar {
            if !(mb > 0.0) || !mb.is_finite() {
                return bad(format!("mu_bar must be > 0, got {mb}"));
            }
        }
        if !(self.mu_decay > 0.0 && self.mu_decay < 1.0) {
            return bad(format!("mu_decay must be in (0, 1), got {}", self.mu_decay));
        }
        if !(self.mu_init_scale > 0.0) || !self.mu_init_scale.is_finite() {
            return bad(format!("mu_init_scale must be > 0, got {}", self.mu_init_scale));
        }
        if self.t_max == 0 {
            return bad("t_max must be >= 1".into());
        }
        if !(self.rel_tol > 0.0) {
            return bad(format!("rel_tol must be > 0, got {}", self.rel_tol));
        }
        if let StepSize::Fixed(t) = self.tau {
            if !(t > 0.0) || !t.is_finite() {
                return bad(format!("tau must be > 0, got {t}"));
            }
        }
        Ok(())
    }
}

/// One recorded iterate: composite objective at the stage's `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub stage: usize,
    pub mu: f64,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub w: Matrix,
    /// Starts with the value at `W0` under `mu_1`, then one point per accepted iterate.
    pub objective_trace: Vec<TracePoint>,
    pub mu_current: f64,
    pub mu_schedule: Vec<f64>,
    pub iterations_used: usize,
}

impl SolverState {
    /// Composite objective at the returned iterate.
    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().map_or(f64::NAN, |p| p.value)
    }
}

/// Strictly decreasing `mu_1 > mu_2 > ... > mu_bar`; a single stage when
/// `mu_1 <= mu_bar`.
pub fn mu_schedule(mu_1: f64, mu_bar: f64, decay: f64) -> Vec<f64> {
    let mut out = vec![];
    let mut mu = mu_1;
    while mu > mu_bar {
        out.push(mu);
        mu *= decay;
    }
    out.push(mu_bar);
    out
}

/// Eigenvalue soft-threshold `V max(0, Lambda - threshold) V^T`.
pub fn shrink(z: &Matrix, threshold: f64) -> Result<Matrix> {
    Ok(shrink_with_spectrum(z, threshold)?.0)
}

/// [`shrink`] plus the thresholded eigenvalues (descending).
pub fn shrink_with_spectrum(z: &Matrix, threshold: f64) -> Result<(Matrix, Vec<f64>)> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidParameter(format!("threshold must be >= 0, got {threshold}")));
    }
    let eig = linalg::sym_eigen(z)?;
    let values: Vec<f64> = eig.values.iter().map(|&l| (l - threshold).max(0.0)).collect();
    Ok((linalg::reconstruct(&eig.vectors, &values), values))
}

/// Reference scale for step size and `mu_1`: the largest eigenvalue of the
/// gradient, falling back to its spectral norm, then to 1.
fn gradient_scale(g: &Matrix) -> Result<f64> {
    let eig = linalg::sym_eigen(g)?;
    let top = eig.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top > 0.0 {
        return Ok(top);
    }
    let spectral = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(if spectral > 0.0 { spectral } else { 1.0 })
}

type Step = (Matrix, f64, f64);

/// Candidate iterate, its nuclear norm and composite objective.
fn prox_step(ctx: &ModeContext, w: &Matrix, g: &Matrix, tau: f64, mu: f64) -> Result<Step> {
    let (cand, spectrum) = shrink_with_spectrum(&(w - g * tau), tau * mu)?;
    let nuclear: f64 = spectrum.iter().sum();
    let value = mu * nuclear + ctx.smooth_value(&cand);
    Ok((cand, nuclear, value))
}

/// Iteration cap for the hinge-weight ascent inside one step.
const INNER_MAX: usize = 50;
/// A step is taken once it realizes this fraction of the decrease the
/// dual bound allows.
const SUFFICIENT_DECREASE: f64 = 0.1;
/// The stage is settled when the dual bound allows less than this relative
/// decrease.
const SETTLED: f64 = 1e-8;

/// Proximal subproblem of one step, `min_V f(V) + ||V - W||^2 / (2 tau)`
/// with `f` the composite objective. Its dual lives on the hinge weights:
/// for weights `a` in `[0, 1]` the minimizer is the usual step
/// `S_{tau mu}(W - tau g_a)` with `g_a` the weighted subgradient.
struct StepProblem<'a> {
    ctx: &'a ModeContext,
    w: &'a Matrix,
    tau: f64,
    mu: f64,
}

/// One evaluation of the dual: the candidate with its composite objective,
/// the dual value and the dual gradient.
struct DualPoint {
    step: Step,
    dual: f64,
    grad: Vec<f64>,
}

/// Result of one inner solve.
struct Inner {
    step: Step,
    iterations: usize,
    /// No step can lower the objective by more than `SETTLED` relative.
    settled: bool,
    /// The sufficient-decrease test was met.
    sufficient: bool,
    tau: f64,
}

impl StepProblem<'_> {
    fn eval(&self, weights: &[f64]) -> Result<DualPoint> {
        let g = self.ctx.weighted_subgradient(weights);
        let (v, spectrum) = shrink_with_spectrum(&(self.w - &g * self.tau), self.tau * self.mu)?;
        let nuclear: f64 = spectrum.iter().sum();
        let prox = (&v - self.w).norm_squared() / (2.0 * self.tau);
        let s = self.ctx.scale();
        let (margins, smooth) = self.ctx.margins_and_value(&v);
        let dual = s * weights.iter().sum::<f64>() + self.mu * nuclear + g.dot(&v) + prox;
        let grad = margins.iter().map(|m| s * m).collect();
        Ok(DualPoint { step: (v, nuclear, self.mu * nuclear + smooth), dual, grad })
    }

    /// Accelerated projected ascent over weights in `[0, 1]`, warm-started
    /// from `weights` and `lipschitz`, both updated in place. Stops as soon
    /// as the candidate is a sufficient decrease from `current`.
    fn solve(&self, weights: &mut Vec<f64>, lipschitz: &mut f64, current: f64) -> Result<Inner> {
        let mut x = weights.clone();
        let mut at_x = self.eval(&x)?;
        let mut y = x.clone();
        let mut at_y = self.eval(&y)?;
        let mut momentum = 1.0f64;
        let mut iterations = 0;
        let mut settled = false;
        let mut sufficient = false;
        while iterations < INNER_MAX {
            let bound = (current - at_x.dual).max(0.0);
            if bound <= SETTLED * current.abs() {
                settled = true;
                break;
            }
            if current - at_x.step.2 >= SUFFICIENT_DECREASE * bound {
                sufficient = true;
                break;
            }
            iterations += 1;
            // Backtrack on the local curvature of the dual.
            let (next, at_next) = loop {
                let cand: Vec<f64> =
                    y.iter().zip(&at_y.grad).map(|(a, g)| (a + g / *lipschitz).clamp(0.0, 1.0)).collect();
                let at_cand = self.eval(&cand)?;
                let (mut lin, mut sq) = (0.0, 0.0);
                for ((c, a), g) in cand.iter().zip(&y).zip(&at_y.grad) {
                    lin += g * (c - a);
                    sq += (c - a) * (c - a);
                }
                if at_cand.dual >= at_y.dual + lin - 0.5 * *lipschitz * sq - 1e-15 * at_y.dual.abs()
                    || !lipschitz.is_finite()
                {
                    break (cand, at_cand);
                }
                *lipschitz *= 2.0;
            };
            // Restart momentum when the dual stops improving.
            if at_next.dual < at_x.dual {
                momentum = 1.0;
                y = x.clone();
                at_y = self.eval(&y)?;
                continue;
            }
            let m_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let beta = (momentum - 1.0) / m_next;
            y = next.iter().zip(&x).map(|(n, o)| (n + beta * (n - o)).clamp(0.0, 1.0)).collect();
            at_y = self.eval(&y)?;
            x = next;
            at_x = at_next;
            momentum = m_next;
            *lipschitz *= 0.9;
        }
        *weights = x;
        Ok(Inner { step: at_x.step, iterations, settled, sufficient, tau: self.tau })
    }
}

/// Per-stage state of the automatic step size.
struct AutoState {
    /// Carried between iterations: halved when the weight ascent runs out of
    /// iterations, doubled back towards `tau_max` when it converges quickly.
    tau: f64,
    tau_max: f64,
    weights: Vec<f64>,
    lipschitz: f64,
}

impl AutoState {
    fn new(ctx: &ModeContext, w: &Matrix, tau_max: f64) -> Self {
        let weights = ctx.triplet_margins(w).iter().map(|&m| if m > 0.0 { 1.0 } else { 0.0 }).collect();
        Self { tau: tau_max, tau_max, weights, lipschitz: 1.0 }
    }

    /// One step that does not raise the objective, or `None` when even the
    /// smallest step raises it.
    fn step(&mut self, ctx: &ModeContext, w: &Matrix, mu: f64, current: f64) -> Result<Option<Inner>> {
        for _ in 0..=MAX_BACKTRACKS {
            let problem = StepProblem { ctx, w, tau: self.tau, mu };
            let mut weights = self.weights.clone();
            let mut lipschitz = self.lipschitz;
            let mut inner = problem.solve(&mut weights, &mut lipschitz, current)?;
            if inner.step.2 > current {
                if inner.settled {
                    return Ok(None);
                }
                self.tau *= 0.5;
                self.lipschitz *= 0.5;
                continue;
            }
            self.weights = weights;
            self.lipschitz = lipschitz;
            // A shortened step can only certify that short moves are useless.
            let short = self.tau < self.tau_max;
            if inner.settled && short {
                inner.settled = false;
                self.tau = (self.tau * 2.0).min(self.tau_max);
                self.lipschitz *= 2.0;
            } else if !inner.sufficient && !inner.settled {
                self.tau *= 0.5;
                self.lipschitz *= 0.5;
            } else if inner.iterations <= INNER_MAX / 8 && short {
                self.tau = (self.tau * 2.0).min(self.tau_max);
                self.lipschitz *= 2.0;
            }
            return Ok(Some(inner));
        }
        Ok(None)
    }
}

/// `mu_1` used by [`mfpc_solve`] when started from `w0`.
pub fn initial_mu(ctx: &ModeContext, w0: &Matrix, cfg: &SolverConfig) -> Result<f64> {
    Ok(cfg.mu_init_scale * gradient_scale(&ctx.subgradient(w0))?)
}

pub fn mfpc_solve(ctx: &ModeContext, w0: &Matrix, cfg: &SolverConfig) -> Result<SolverState> {
    mfpc_solve_observed(ctx, w0, cfg, &mut |_| {})
}

/// [`mfpc_solve`], calling `observer` with every accepted iterate.
pub fn mfpc_solve_observed(
    ctx: &ModeContext,
    w0: &Matrix,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&Matrix),
) -> Result<SolverState> {
    cfg.validate()?;
    let n = ctx.size();
    if w0.shape() != (n, n) {
        return Err(Error::ShapeMismatch(format!(
            "initial W is {}x{}, mode size is {n}",
            w0.nrows(),
            w0.ncols()
        )));
    }
    let mut w = linalg::symmetrize(w0);
    let mu_1 = initial_mu(ctx, &w, cfg)?;
    let mu_bar = cfg.mu_bar.unwrap_or(1e-4 * mu_1);
    let schedule = mu_schedule(mu_1, mu_bar, cfg.mu_decay);

    let mut nuclear = linalg::nuclear_norm_sym(&w)?;
    let mut trace =
        vec![TracePoint { stage: 0, mu: schedule[0], value: schedule[0] * nuclear + ctx.smooth_value(&w) }];
    let mut total = 0;

    for (stage, &mu) in schedule.iter().enumerate() {
        let tau_stage = match cfg.tau {
            StepSize::Fixed(t) => t,
            StepSize::Auto => 1.0 / gradient_scale(&ctx.subgradient(&w))?,
        };
        let mut current = mu * nuclear + ctx.smooth_value(&w);
        let mut increases = 0;
        let mut auto = AutoState::new(ctx, &w, tau_stage);
        for _ in 0..cfg.t_max {
            // The change is measured as if the full stage step had been taken.
            // A truncated inner solve says nothing about convergence.
            let (mut settled, mut stretch) = (false, 1.0);
            let accepted = match cfg.tau {
                StepSize::Fixed(tau) => {
                    let step = prox_step(ctx, &w, &ctx.subgradient(&w), tau, mu)?;
                    if step.2 > current + DIVERGENCE_SLACK {
                        increases += 1;
                        if increases >= DIVERGENCE_STREAK {
                            return Err(Error::StepSizeDiverged(increases));
                        }
                    } else {
                        increases = 0;
                    }
                    Some(step)
                }
                StepSize::Auto => auto.step(ctx, &w, mu, current)?.map(|inner| {
                    settled = inner.settled;
                    stretch = if inner.sufficient { tau_stage / inner.tau } else { f64::INFINITY };
                    inner.step
                }),
            };
            // No step lowers the objective: the stage is done.
            let Some((cand, cand_nuclear, value)) = accepted else { break };
            let rel = (&cand - &w).norm() / w.norm().max(1.0);
            debug_assert!(cand == cand.transpose());
            w = cand;
            nuclear = cand_nuclear;
            current = value;
            total += 1;
            trace.push(TracePoint { stage, mu, value });
            observer(&w);
            let small =
                if stretch.is_finite() { rel * stretch < cfg.rel_tol } else { cfg.rel_tol.is_infinite() };
            if small || settled {
                break;
            }
        }
    }

    Ok(SolverState {
        w,
        objective_trace: trace,
        mu_current: mu_bar,
        mu_schedule: schedule,
        iterations_used: total,
    })
}
