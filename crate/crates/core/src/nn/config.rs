use serde::{Deserialize, Serialize};

use super::binary::SteMode;
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;

/// Layer family of a model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerType {
    #[default]
    BiGcn,
    Gcn,
    BiSage,
}

impl LayerType {
    pub fn is_binary(self) -> bool {
        !matches!(self, LayerType::Gcn)
    }

    /// Default batch-norm placement: raw input only for the GCN variants,
    /// before every layer for Bi-GraphSAGE.
    pub fn default_norm(self) -> NormPlacement {
        match self {
            LayerType::BiGcn | LayerType::Gcn => NormPlacement::Input,
            LayerType::BiSage => NormPlacement::EveryLayer,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormPlacement {
    None,
    Input,
    EveryLayer,
}

/// Hyperparameters for one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub model: LayerType,
    /// `[d_in, hidden.., num_classes]`; empty means `[d, 64, C]` from the data.
    pub widths: Vec<usize>,
    pub dropout: f64,
    pub lr: f64,
    pub max_epochs: usize,
    pub patience: usize,
    /// `None` picks [`LayerType::default_norm`].
    pub batch_norm: Option<NormPlacement>,
    pub ste: SteMode,
    /// Clamp binary-layer latent weights to `[-1, 1]` after each update.
    pub clip_latent: bool,
    pub seed: u64,
}

pub const DEFAULT_HIDDEN: usize = 64;

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            model: LayerType::BiGcn,
            widths: Vec::new(),
            dropout: 0.4,
            lr: 0.001,
            max_epochs: 1000,
            patience: 100,
            batch_norm: None,
            ste: SteMode::GradientMagnitude,
            clip_latent: true,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn norm_placement(&self) -> NormPlacement {
        self.batch_norm.unwrap_or_else(|| self.model.default_norm())
    }

    /// Fills empty widths with `[d, 64, C]` for `graph`.
    pub fn resolve_widths(&mut self, graph: &AttributedGraph) {
        if self.widths.is_empty() {
            self.widths = vec![graph.feature_dim(), DEFAULT_HIDDEN, graph.num_classes()];
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.len() < 2 {
            return Err(Error::invalid(
                "widths need at least an input and an output size",
            ));
        }
        if self.widths.contains(&0) {
            return Err(Error::invalid("all widths must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::invalid(format!(
                "learning rate {} must be positive",
                self.lr
            )));
        }
        if self.patience == 0 {
            return Err(Error::invalid("patience must be at least 1"));
        }
        Ok(())
    }

    pub fn validate_for(&self, graph: &AttributedGraph) -> Result<()> {
        self.validate()?;
        let (first, last) = (self.widths[0], *self.widths.last().expect("validated"));
        if first != graph.feature_dim() {
            return Err(Error::invalid(format!(
                "input width {first} does not match feature dimension {}",
                graph.feature_dim()
            )));
        }
        if last != graph.num_classes() {
            return Err(Error::invalid(format!(
                "output width {last} does not match {} classes",
                graph.num_classes()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_training_protocol() {
        let c = ModelConfig::default();
        assert_eq!(
            (c.lr, c.max_epochs, c.patience, c.dropout),
            (0.001, 1000, 100, 0.4)
        );
        assert_eq!(c.norm_placement(), NormPlacement::Input);
    }

    #[test]
    fn json_roundtrip_and_partial() {
        let c: ModelConfig =
            serde_json::from_str(r#"{"model":"bisage","ste":"input","widths":[8,4,2]}"#).unwrap();
        assert_eq!(c.model, LayerType::BiSage);
        assert_eq!(c.ste, SteMode::InputMagnitude);
        assert_eq!(c.norm_placement(), NormPlacement::EveryLayer);
        let back: ModelConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<ModelConfig>(r#"{"learning_rate":1}"#).is_err());
    }

    #[test]
    fn validation() {
        let ok = ModelConfig {
            widths: vec![4, 2],
            ..Default::default()
        };
        assert!(ok.validate().is_ok());
        for bad in [
            ModelConfig {
                widths: vec![4],
                ..ok.clone()
            },
            ModelConfig {
                widths: vec![4, 0, 2],
                ..ok.clone()
            },
            ModelConfig {
                dropout: 1.0,
                ..ok.clone()
            },
            ModelConfig {
                patience: 0,
                ..ok.clone()
            },
            ModelConfig {
                lr: 0.0,
                ..ok.clone()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }
}
