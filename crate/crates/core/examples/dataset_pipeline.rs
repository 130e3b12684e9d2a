//! Writes a synthetic dataset to a TDS1 file, reads it back and splits it
//! into stratified folds.
//!
//! ```bash
//! cargo run -p margin-tensor --example dataset_pipeline
//! ```

use margin_tensor::{load_dataset, make_folds, save_dataset, synth_clusters, Result};

fn main() -> Result<()> {
    let ds = synth_clusters(3, 6, &[6, 5], &[2, 2], 0.05, 1)?;
    let path = std::env::temp_dir().join("margin_tensor_example.tds");
    save_dataset(&ds, &path)?;
    let bytes = std::fs::metadata(&path)?.len();
    println!("wrote {} samples of dims {:?} to {} ({bytes} bytes)", ds.len(), ds.dims(), path.display());

    let back = load_dataset(&path)?;
    assert_eq!(back, ds);
    println!("read back: {} classes, class sizes {:?}", back.class_count(), back.class_sizes());

    let plan = make_folds(&back, 3, 42)?;
    for fold in 0..plan.fold_count {
        let (train, test) = plan.split(fold);
        let test_labels: Vec<u32> = test.iter().map(|&i| back.labels()[i]).collect();
        println!("fold {fold}: {} train, test labels {test_labels:?}", train.len());
    }
    std::fs::remove_file(&path)?;
    Ok(())
}
