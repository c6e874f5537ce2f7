//! Generates a synthetic graph, writes it in the on-disk dataset format,
//! reads it back and shows the files that make up a dataset.
//!
//! `cargo run --example dataset_roundtrip [output-dir]`

use std::path::PathBuf;

use bigcn::data::{generate_sbm, load_dataset, save_dataset, DatasetManifest, SbmParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("bigcn-sbm-dataset"));
    let graph = generate_sbm(&SbmParams {
        nodes_per_class: 50,
        classes: 3,
        feature_dim: 9,
        seed: 42,
        train_per_class: 10,
        val_per_class: 10,
        ..Default::default()
    })?;
    let manifest_path = save_dataset(&graph, "sbm-demo", &dir)?;
    let manifest = DatasetManifest::read(&manifest_path)?;
    println!("wrote {}", manifest_path.display());
    println!("{}", serde_json::to_string_pretty(&manifest)?);
    for file in [
        &manifest.edges,
        &manifest.features,
        &manifest.labels,
        &manifest.masks,
    ] {
        let len = std::fs::metadata(dir.join(file))?.len();
        println!("  {:<14} {len:>7} bytes", file.display());
    }

    let back = load_dataset(&manifest_path)?;
    assert_eq!(back, graph, "roundtrip must be exact");
    let (t, v, s, rest) = back.masks().counts();
    println!(
        "reloaded: {} nodes, {} edges, splits {t}/{v}/{s} (+{rest} unassigned), identical to the original",
        back.num_nodes(),
        back.num_edges()
    );
    Ok(())
}
