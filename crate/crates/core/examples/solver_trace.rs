//! Runs the single-mode continuation solver on vector data and prints how
//! the objective and the rank of `W` evolve across the `mu` schedule.
//!
//! ```bash
//! cargo run --release -p margin-tensor --example solver_trace
//! ```

use margin_tensor::linalg::sym_eigen;
use margin_tensor::{build_graph, make_context, mfpc_solve, synth_clusters, Matrix, Result, SolverConfig};

fn main() -> Result<()> {
    let ds = synth_clusters(3, 10, &[10], &[3], 0.3, 2)?;
    let graph = build_graph(&ds, 3, 6)?;
    let ctx = make_context(&ds, &[Matrix::identity(10, 10)], 0, &graph, 0.1)?;
    let state = mfpc_solve(&ctx, &Matrix::identity(10, 10), &SolverConfig::default())?;

    println!("{} stages, {} iterations", state.mu_schedule.len(), state.iterations_used);
    for (stage, mu) in state.mu_schedule.iter().enumerate() {
        let points: Vec<_> = state.objective_trace.iter().filter(|p| p.stage == stage).collect();
        if let (Some(first), Some(last)) = (points.first(), points.last()) {
            println!(
                "stage {stage:2}  mu {mu:.3e}  steps {:3}  objective {:.6e} -> {:.6e}",
                points.len(),
                first.value,
                last.value
            );
        }
    }

    let eig = sym_eigen(&state.w)?;
    let mut values: Vec<f64> = eig.values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let top = values[0];
    let rank = values.iter().filter(|&&v| v > 1e-8 * top).count();
    let shown: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    println!("eigenvalues of W: {}", shown.join(" "));
    println!("numerical rank {rank} of 10");
    Ok(())
}
