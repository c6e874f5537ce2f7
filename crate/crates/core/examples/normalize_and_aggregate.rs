//! Builds a small graph, forms the self-loop-augmented symmetric normalized
//! adjacency and aggregates features with it and with the mean aggregator.
//!
//! `cargo run --example normalize_and_aggregate`

use bigcn::bitlinalg::DenseMatrix;
use bigcn::graph::{aggregate, normalize_adjacency, AttributedGraph, Masks, MeanAggregator};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A star: node 0 is linked to 1, 2 and 3; node 4 is isolated. The
    // duplicate and the self-loop are dropped on construction.
    let n = 5;
    let features = DenseMatrix::from_fn(n, 2, |r, c| (r * 2 + c) as f64);
    let none = vec![false; n];
    let masks = Masks::new(none.clone(), none.clone(), none)?;
    let edges = [(0, 1), (0, 2), (3, 0), (1, 0), (2, 2)];
    let g = AttributedGraph::new(features, edges, vec![0; n], 2, masks)?;
    println!(
        "{} nodes, {} edges, average degree {:.2}",
        g.num_nodes(),
        g.num_edges(),
        g.average_degree()
    );

    let adj = normalize_adjacency(&g);
    println!(
        "normalized adjacency ({} stored entries):",
        adj.matrix().nnz()
    );
    let dense = adj.to_dense();
    for r in 0..n {
        let row: Vec<String> = dense.row(r).iter().map(|x| format!("{x:.3}")).collect();
        println!("  [{}]", row.join(", "));
    }

    let smoothed = aggregate(&adj, g.features())?;
    let mean = MeanAggregator::new(&g).apply(g.features())?;
    for r in 0..n {
        println!(
            "node {r}: x = {:?}  Ã·x = {:.3?}  mean of neighbors = {:?}",
            g.features().row(r),
            smoothed.row(r),
            mean.row(r)
        );
    }
    Ok(())
}
