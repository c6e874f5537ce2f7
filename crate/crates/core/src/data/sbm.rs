//! Planted-partition (stochastic block model) graphs with class-dependent
//! Gaussian features.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bitlinalg::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, Masks};

/// Generator parameters. Node `i` has class `i / nodes_per_class`.
///
/// Class `c` owns the feature coordinates `[c·b, (c+1)·b)` with
/// `b = feature_dim / classes`; its mean vector is `signal` on that block and
/// 0 elsewhere. Every feature also receives unit Gaussian noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SbmParams {
    pub nodes_per_class: usize,
    pub classes: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub feature_dim: usize,
    pub signal: f64,
    pub seed: u64,
    pub train_per_class: usize,
    pub val_per_class: usize,
}

impl Default for SbmParams {
    fn default() -> Self {
        Self {
            nodes_per_class: 100,
            classes: 7,
            p_in: 0.05,
            p_out: 0.005,
            feature_dim: 70,
            signal: 1.0,
            seed: 0,
            train_per_class: 20,
            val_per_class: 30,
        }
    }
}

impl SbmParams {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !(prob(self.p_in) && prob(self.p_out) && self.p_out <= self.p_in) {
            return Err(Error::invalid(format!(
                "need 0 <= p_out <= p_in <= 1, got p_in={} p_out={}",
                self.p_in, self.p_out
            )));
        }
        if !(self.signal.is_finite() && self.signal >= 0.0) {
            return Err(Error::invalid(format!(
                "signal {} must be finite and >= 0",
                self.signal
            )));
        }
        if self.classes < 2 {
            return Err(Error::invalid("need at least 2 classes"));
        }
        if self.feature_dim < self.classes {
            return Err(Error::invalid(format!(
                "feature_dim {} cannot hold {} class blocks",
                self.feature_dim, self.classes
            )));
        }
        if self.train_per_class == 0 || self.val_per_class == 0 {
            return Err(Error::invalid(
                "train and validation sizes per class must be at least 1",
            ));
        }
        if self.train_per_class + self.val_per_class >= self.nodes_per_class {
            return Err(Error::invalid(format!(
                "{} nodes per class leave no test nodes after {} train + {} val",
                self.nodes_per_class, self.train_per_class, self.val_per_class
            )));
        }
        self.nodes_per_class
            .checked_mul(self.classes)
            .filter(|&n| u32::try_from(n).is_ok())
            .ok_or_else(|| Error::invalid("node count too large"))?;
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes_per_class * self.classes
    }
}

/// Samples a graph from `params`. Deterministic for a given seed; costs
/// O(N²) edge draws.
pub fn generate_sbm(params: &SbmParams) -> Result<AttributedGraph> {
    params.validate()?;
    let (k, c) = (params.nodes_per_class, params.classes);
    let n = params.num_nodes();
    let d = params.feature_dim;
    let block = d / c;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let labels: Vec<usize> = (0..n).map(|i| i / k).collect();

    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] {
                params.p_in
            } else {
                params.p_out
            };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }

    let features = DenseMatrix::from_fn(n, d, |r, col| {
        let mean = if col / block == labels[r] {
            params.signal
        } else {
            0.0
        };
        let noise: f64 = rng.sample(StandardNormal);
        (mean + noise) as f32 as f64
    });

    let (mut train, mut val, mut test) = (vec![false; n], vec![false; n], vec![false; n]);
    for class in 0..c {
        let mut nodes: Vec<usize> = (class * k..(class + 1) * k).collect();
        nodes.shuffle(&mut rng);
        for (rank, &i) in nodes.iter().enumerate() {
            if rank < params.train_per_class {
                train[i] = true;
            } else if rank < params.train_per_class + params.val_per_class {
                val[i] = true;
            } else {
                test[i] = true;
            }
        }
    }
    AttributedGraph::new(features, edges, labels, c, Masks::new(train, val, test)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SbmParams {
        SbmParams {
            nodes_per_class: 60,
            classes: 3,
            feature_dim: 12,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_and_simple() {
        let a = generate_sbm(&small(5)).unwrap();
        assert_eq!(a, generate_sbm(&small(5)).unwrap());
        assert_ne!(a, generate_sbm(&small(6)).unwrap());
        assert!(a.edges().iter().all(|&(u, v)| u < v));
        assert!(a.edges().windows(2).all(|w| w[0] < w[1]));
        let (t, v, s, rest) = a.masks().counts();
        assert_eq!((t, v, s, rest), (60, 90, 30, 0));
    }

    #[test]
    fn symmetric_edge_probabilities() {
        // With p_in = p_out the intra/inter split follows the pair counts.
        let mut intra = 0.0;
        let mut inter = 0.0;
        let runs = 20;
        for seed in 0..runs {
            let p = SbmParams {
                p_in: 0.1,
                p_out: 0.1,
                ..small(seed)
            };
            let g = generate_sbm(&p).unwrap();
            for &(u, v) in g.edges() {
                if g.labels()[u] == g.labels()[v] {
                    intra += 1.0;
                } else {
                    inter += 1.0;
                }
            }
        }
        let pairs_intra = 3.0 * (60.0 * 59.0 / 2.0) * runs as f64;
        let pairs_inter = 3.0 * 60.0 * 60.0 * runs as f64;
        let sd = |pairs: f64| (pairs * 0.1 * 0.9f64).sqrt();
        assert!((intra - 0.1 * pairs_intra).abs() < 3.0 * sd(pairs_intra));
        assert!((inter - 0.1 * pairs_inter).abs() < 3.0 * sd(pairs_inter));
    }

    #[test]
    fn zero_signal_features_are_centered() {
        let g = generate_sbm(&SbmParams {
            signal: 0.0,
            ..small(1)
        })
        .unwrap();
        let f = g.features();
        for class in 0..3 {
            let rows: Vec<usize> = (0..g.num_nodes())
                .filter(|&i| g.labels()[i] == class)
                .collect();
            let block_mean: f64 =
                rows.iter().map(|&r| f.get(r, class * 4)).sum::<f64>() / rows.len() as f64;
            assert!(block_mean.abs() < 0.6);
        }
    }

    #[test]
    fn rejects_infeasible() {
        for bad in [
            SbmParams {
                p_in: 0.1,
                p_out: 0.2,
                ..small(0)
            },
            SbmParams {
                p_in: 1.5,
                ..small(0)
            },
            SbmParams {
                signal: -1.0,
                ..small(0)
            },
            SbmParams {
                classes: 1,
                ..small(0)
            },
            SbmParams {
                feature_dim: 2,
                ..small(0)
            },
            SbmParams {
                nodes_per_class: 50,
                ..small(0)
            },
        ] {
            assert!(generate_sbm(&bad).is_err(), "{bad:?}");
        }
    }
}
