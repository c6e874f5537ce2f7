//! Trains a full-precision GCN on a synthetic graph, estimates the binned
//! entropy of its hidden layer and derives the lower bound on the width of a
//! binary hidden layer. Then checks that bound by training Bi-GCNs of a few
//! widths.
//!
//! `cargo run --release --example entropy_capacity`

use bigcn::capacity::{capacity_from_estimates, layer_entropy_independent};
use bigcn::data::{generate_sbm, SbmParams};
use bigcn::nn::{train, GraphContext, LayerType, ModelConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = generate_sbm(&SbmParams {
        nodes_per_class: 100,
        classes: 5,
        feature_dim: 50,
        seed: 1,
        ..Default::default()
    })?;
    let ctx = GraphContext::new(&graph);
    let (d, c) = (graph.feature_dim(), graph.num_classes());
    let quick = |model, hidden| ModelConfig {
        model,
        widths: vec![d, hidden, c],
        lr: 0.01,
        max_epochs: 300,
        patience: 50,
        seed: 1,
        ..Default::default()
    };

    let baseline = train(&quick(LayerType::Gcn, 16), &graph, &ctx)?;
    let (_, hidden) = baseline.model.forward_with_hidden(&ctx, graph.features())?;
    let bins = 200;
    let estimates = hidden
        .iter()
        .map(|h| layer_entropy_independent(h, bins))
        .collect::<Result<Vec<_>, _>>()?;
    let bound = capacity_from_estimates(&estimates)?;
    println!(
        "GCN (hidden 16): test acc {:.3}; H_ind = {:.2} bits over {} samples with M = {bins}",
        baseline.test_acc, estimates[0].independent_sum, estimates[0].samples
    );
    println!("binary hidden width lower bound: {}", bound.d_bin_lower);

    let lower = bound.d_bin_lower as usize;
    for width in [
        lower.div_ceil(4).max(1),
        lower.div_ceil(2).max(1),
        lower,
        2 * lower,
    ] {
        let out = train(&quick(LayerType::BiGcn, width), &graph, &ctx)?;
        println!("Bi-GCN hidden {width:>4}: test acc {:.3}", out.test_acc);
    }
    Ok(())
}
