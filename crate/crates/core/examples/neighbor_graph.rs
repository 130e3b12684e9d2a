//! Builds target and impostor neighbor relations and inspects the triplets
//! the margin objective is built from.
//!
//! ```bash
//! cargo run -p margin-tensor --example neighbor_graph
//! ```

use margin_tensor::{build_graph, make_context, pairwise_distances, synth_clusters, Matrix, Result};

fn main() -> Result<()> {
    let ds = synth_clusters(2, 5, &[4, 4], &[2, 2], 0.3, 3)?;
    let graph = build_graph(&ds, 2, 3)?;
    let dist = pairwise_distances(&ds);

    for i in 0..ds.len() {
        let targets: Vec<usize> = graph.targets(i).collect();
        let impostors: Vec<usize> = graph.impostors(i).collect();
        println!("sample {i} (class {}): targets {targets:?}, impostors {impostors:?}", ds.labels()[i]);
    }
    println!("{} target edges, {} triplets", graph.target_edge_count(), graph.triplet_count());

    let eye: Vec<Matrix> = ds.dims().iter().map(|&d| Matrix::identity(d, d)).collect();
    let ctx = make_context(&ds, &eye, 0, &graph, 0.1)?;
    let w = Matrix::identity(4, 4);
    let active = ctx.active_triplets(&w);
    println!("{} of {} triplets violate the unit margin at W = I", active.len(), ctx.triplet_count());
    if let Some(&(i, j, p)) = active.triplets.first() {
        println!(
            "e.g. ({i}, {j}, {p}): d(i,j) = {:.3}, d(i,p) = {:.3}, slack {:.3}",
            dist[(i, j)],
            dist[(i, p)],
            ctx.slack(&w, i, j, p)
        );
    }
    println!("objective at W = I, mu = 0.01: {:.6}", ctx.objective_value(&w, 0.01)?);
    Ok(())
}
