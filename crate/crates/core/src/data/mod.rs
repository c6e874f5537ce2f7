//! Dataset files, activation dumps and the synthetic SBM generator.

mod activations;
mod format;
mod sbm;

pub use activations::{read_activations, write_activations, ACTIVATIONS_MAGIC};
pub use format::{
    load_dataset, load_with_manifest, read_edges, read_features, read_labels, read_masks,
    save_dataset, DatasetManifest, FEATURES_MAGIC,
};
pub use sbm::{generate_sbm, SbmParams};
