//! Fits projections on synthetic 8x8 data, saves the model, reloads it and
//! classifies fresh samples from the same generator.
//!
//! ```bash
//! cargo run --release -p margin-tensor --example train_synthetic
//! ```

use margin_tensor::{
    evaluate, fit, load_model, save_model, synth_clusters, FitConfig, Model, ModelMetadata, Result,
};

fn main() -> Result<()> {
    // Same seed, different sample counts: shared class means, fresh noise.
    let train = synth_clusters(3, 8, &[8, 8], &[2, 2], 0.05, 11)?;
    let test = synth_clusters(3, 12, &[8, 8], &[2, 2], 0.05, 11)?;
    let cfg = FitConfig { k1: 3, k2: 6, ..FitConfig::default() };
    let (stack, report) = fit(&train, &cfg)?;

    println!("ranks {:?} after {} sweeps ({:.2}s)", stack.ranks(), report.outer_iterations, report.wall_time);
    println!(
        "objective {:.4e} -> {:.4e}",
        report.initial_objective,
        report.objective_history.last().unwrap()
    );
    for (u, w) in stack.matrices().iter().zip(stack.grams()) {
        println!("  U {}x{}, trace(W) = {:.4}", u.nrows(), u.ncols(), w.trace());
    }

    let model = Model {
        stack,
        metadata: ModelMetadata {
            k1: cfg.k1,
            k2: cfg.k2,
            lambda: cfg.lambda,
            mu_bar: report.mu_bar,
            ranks: report.final_ranks.clone(),
            objective_history: report.objective_history.clone(),
            ..ModelMetadata::default()
        },
    };
    let path = std::env::temp_dir().join("margin_tensor_example.lmm");
    save_model(&model, &path)?;
    let loaded = load_model(&path)?;
    assert_eq!(loaded, model);
    std::fs::remove_file(&path)?;

    println!("train accuracy {:.3}", evaluate(&loaded.stack, &train, &train, 1)?);
    println!("test accuracy  {:.3}", evaluate(&loaded.stack, &train, &test, 1)?);
    Ok(())
}
