//! Binned entropy of hidden activations and the resulting lower bound on the
//! width of a binary hidden layer.
//!
//! Each neuron's samples are histogrammed into `M` equal-width bins over that
//! neuron's observed `[min, max]` (the maximum lands in the last bin) and the
//! plug-in entropy is reported in bits. The layer entropy is approximated by
//! the sum over neurons, and a binary layer, holding at most one bit per
//! neuron, needs at least `ceil(max_l Ĥ_l)` neurons.

use serde::{Deserialize, Serialize};

use crate::bitlinalg::DenseMatrix;
use crate::error::{Error, Result};

/// Plug-in entropy (bits) of `samples` histogrammed into `bins` equal-width bins.
pub fn bin_neuron_entropy(samples: &[f64], bins: usize) -> Result<f64> {
    if bins == 0 {
        return Err(Error::invalid("bin count must be at least 1"));
    }
    if samples.is_empty() {
        return Err(Error::invalid("no samples"));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("non-finite sample"));
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let width = hi - lo;
    if width == 0.0 {
        return Ok(0.0);
    }
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let k = ((x - lo) / width * bins as f64) as usize;
        counts[k.min(bins - 1)] += 1;
    }
    let n = samples.len() as f64;
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>();
    Ok(h.max(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub per_neuron: Vec<f64>,
    /// Sum of the per-neuron entropies.
    pub independent_sum: f64,
    pub samples: usize,
    pub bins: usize,
}

/// Per-neuron entropies of a `samples × neurons` activation matrix.
pub fn layer_entropy_independent(
    activations: &DenseMatrix,
    bins: usize,
) -> Result<EntropyEstimate> {
    if activations.cols() == 0 {
        return Err(Error::invalid("activation matrix has no neurons"));
    }
    let per_neuron = (0..activations.cols())
        .map(|c| bin_neuron_entropy(&activations.column(c), bins))
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyEstimate {
        independent_sum: per_neuron.iter().sum(),
        per_neuron,
        samples: activations.rows(),
        bins,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityBound {
    /// Smallest binary hidden width whose capacity covers every layer's entropy.
    pub d_bin_lower: u64,
    pub layer_entropies: Vec<f64>,
    /// Width of the full-precision layers the activations came from, if known.
    pub d_fp: Option<usize>,
}

pub fn capacity_lower_bound(layer_entropies: &[f64]) -> Result<CapacityBound> {
    if layer_entropies.is_empty() {
        return Err(Error::invalid("need at least one hidden layer estimate"));
    }
    if layer_entropies.iter().any(|h| !h.is_finite() || *h < 0.0) {
        return Err(Error::invalid("entropies must be finite and nonnegative"));
    }
    let max = layer_entropies.iter().copied().fold(0.0, f64::max);
    Ok(CapacityBound {
        d_bin_lower: max.ceil() as u64,
        layer_entropies: layer_entropies.to_vec(),
        d_fp: None,
    })
}

/// Bound from full estimates, recording the widest source layer as `d_fp`.
pub fn capacity_from_estimates(estimates: &[EntropyEstimate]) -> Result<CapacityBound> {
    let sums: Vec<f64> = estimates.iter().map(|e| e.independent_sum).collect();
    let mut bound = capacity_lower_bound(&sums)?;
    bound.d_fp = estimates.iter().map(|e| e.per_neuron.len()).max();
    Ok(bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bin_centers(m: usize) -> Vec<f64> {
        (0..m).map(|k| k as f64 + 0.5).collect()
    }

    #[test]
    fn uniform_occupancy() {
        let h = bin_neuron_entropy(&bin_centers(200), 200).unwrap();
        assert!((h - 200f64.log2()).abs() < 1e-9);
        assert!((h - 7.6439).abs() < 1e-4);
    }

    #[test]
    fn constant_and_two_bin() {
        assert_eq!(bin_neuron_entropy(&[3.0; 17], 50).unwrap(), 0.0);
        let half: Vec<f64> = (0..100)
            .map(|i| if i % 2 == 0 { -1.0 } else { 4.0 })
            .collect();
        assert!((bin_neuron_entropy(&half, 10).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(bin_neuron_entropy(&[], 10).is_err());
        assert!(bin_neuron_entropy(&[1.0], 0).is_err());
        assert!(layer_entropy_independent(&DenseMatrix::zeros(3, 0), 4).is_err());
        assert!(capacity_lower_bound(&[]).is_err());
    }

    #[test]
    fn layer_sum_and_duplicates() {
        let m = 16;
        let col = bin_centers(m);
        let acts = DenseMatrix::from_fn(m, 3, |r, _| col[r]);
        let est = layer_entropy_independent(&acts, m).unwrap();
        assert!((est.independent_sum - 3.0 * (m as f64).log2()).abs() < 1e-9);
        assert_eq!(est.per_neuron[0], est.per_neuron[2]);
        assert_eq!(est.independent_sum, est.per_neuron.iter().sum::<f64>());
    }

    #[test]
    fn bounds() {
        assert_eq!(capacity_lower_bound(&[97.37]).unwrap().d_bin_lower, 98);
        assert_eq!(capacity_lower_bound(&[64.0]).unwrap().d_bin_lower, 64);
        assert_eq!(capacity_lower_bound(&[10.2, 33.7]).unwrap().d_bin_lower, 34);
    }

    #[test]
    fn affine_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let xs: Vec<f64> = (0..300).map(|_| rng.random_range(-3.0..3.0)).collect();
            let m = rng.random_range(2..64);
            let base = bin_neuron_entropy(&xs, m).unwrap();
            let a = rng.random_range(0.1..10.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let b = rng.random_range(-5.0..5.0);
            let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            assert!((bin_neuron_entropy(&ys, m).unwrap() - base).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn entropy_bounded_and_permutation_invariant(
            xs in prop::collection::vec(-100.0f64..100.0, 1..200),
            m in 1usize..300,
            rot in 0usize..200,
        ) {
            let h = bin_neuron_entropy(&xs, m).unwrap();
            prop_assert!(h >= 0.0 && h <= (m as f64).log2() + 1e-12);
            let mut ys = xs.clone();
            ys.rotate_left(rot % xs.len());
            ys.reverse();
            prop_assert!((bin_neuron_entropy(&ys, m).unwrap() - h).abs() < 1e-12);
        }
    }
}
