//! Picks the pull weight by 5-fold cross-validation over a small grid.
//!
//! ```bash
//! cargo run --release -p margin-tensor --example cross_validation
//! ```

use margin_tensor::{evaluate, fit, make_folds, synth_clusters, FitConfig, Result};

fn main() -> Result<()> {
    let ds = synth_clusters(3, 10, &[6, 6], &[2, 2], 0.25, 5)?;
    let plan = make_folds(&ds, 5, 42)?;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for lambda in [0.001, 0.01, 0.1, 1.0, 10.0] {
        let cfg = FitConfig { k1: 3, k2: 6, lambda, outer_max: 5, ..FitConfig::default() };
        let mut accs = Vec::new();
        for fold in 0..plan.fold_count {
            let (tr, te) = plan.split(fold);
            let (train, test) = (ds.subset(&tr)?, ds.subset(&te)?);
            let (stack, _) = fit(&train, &cfg)?;
            accs.push(evaluate(&stack, &train, &test, 1)?);
        }
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        let std = (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / accs.len() as f64).sqrt();
        println!("lambda={lambda} mean={mean:.4} std={std:.4}");
        if mean > best.0 {
            best = (mean, lambda);
        }
    }
    println!("best lambda {} with mean accuracy {:.4}", best.1, best.0);
    Ok(())
}
