//! Trains a Bi-GCN and its full-precision GCN counterpart on the same
//! synthetic block-model graph and compares test accuracy.
//!
//! `cargo run --release --example train_sbm [seed]`

use bigcn::data::{generate_sbm, SbmParams};
use bigcn::nn::{train, GraphContext, LayerType, ModelConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0);
    let params = SbmParams {
        nodes_per_class: 100,
        classes: 7,
        seed,
        ..Default::default()
    };
    let graph = generate_sbm(&params)?;
    let ctx = GraphContext::new(&graph);
    println!(
        "SBM: {} nodes, {} edges, {} features, {} classes",
        graph.num_nodes(),
        graph.num_edges(),
        graph.feature_dim(),
        graph.num_classes()
    );

    for model in [LayerType::Gcn, LayerType::BiGcn] {
        let config = ModelConfig {
            model,
            seed,
            ..Default::default()
        };
        let out = train(&config, &graph, &ctx)?;
        println!(
            "{:<6} best epoch {:>4} of {:>4}, test accuracy {:.3}",
            format!("{model:?}"),
            out.best_epoch.unwrap_or(0),
            out.trace.len(),
            out.test_acc
        );
    }
    Ok(())
}
