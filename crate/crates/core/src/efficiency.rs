//! Analytical memory and cycle-count model for binarized vs. full-precision
//! graph convolution.
//!
//! One cycle is one floating-point multiply plus one add and can instead
//! perform [`BINARY_OPS_PER_CYCLE`] binary operations. A binarized layer's
//! feature extraction costs `ceil(N·d_in·d_out / 64)` cycles plus `2·N·d_out`
//! for the two rescaling multiplies; aggregation costs `|E|·d_out` cycles in
//! either case.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;

pub const BINARY_OPS_PER_CYCLE: u64 = 64;
pub const FLOAT_BITS: u64 = 32;

/// Layer widths and which layers are binarized.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchSpec {
    pub widths: Vec<usize>,
    pub binarized: Vec<bool>,
}

impl ArchSpec {
    pub fn new(widths: Vec<usize>, binarized: Vec<bool>) -> Result<Self> {
        if widths.contains(&0) {
            return Err(Error::invalid("widths must be at least 1"));
        }
        if binarized.len() + 1 != widths.len() && !(widths.len() <= 1 && binarized.is_empty()) {
            return Err(Error::shape(
                "ArchSpec::new",
                format!("{} layer flags", widths.len().saturating_sub(1)),
                binarized.len(),
            ));
        }
        Ok(Self { widths, binarized })
    }

    /// Every layer binarized (`true`) or every layer full precision.
    pub fn uniform(widths: Vec<usize>, binarized: bool) -> Result<Self> {
        let n = widths.len().saturating_sub(1);
        Self::new(widths, vec![binarized; n])
    }

    pub fn num_layers(&self) -> usize {
        self.binarized.len()
    }

    pub fn layers(&self) -> impl Iterator<Item = (u64, u64, bool)> + '_ {
        self.widths
            .windows(2)
            .zip(&self.binarized)
            .map(|(w, &b)| (w[0] as u64, w[1] as u64, b))
    }

    pub fn as_float(&self) -> Self {
        Self {
            widths: self.widths.clone(),
            binarized: vec![false; self.binarized.len()],
        }
    }
}

/// Node count, undirected edge count and feature dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: u64,
    pub edges: u64,
    pub features: u64,
}

impl GraphStats {
    pub fn new(nodes: u64, edges: u64, features: u64) -> Result<Self> {
        if nodes == 0 || features == 0 {
            return Err(Error::invalid(
                "node count and feature dimension must be at least 1",
            ));
        }
        Ok(Self {
            nodes,
            edges,
            features,
        })
    }

    pub fn of(g: &AttributedGraph) -> Self {
        Self {
            nodes: g.num_nodes() as u64,
            edges: g.num_edges() as u64,
            features: g.feature_dim() as u64,
        }
    }

    pub fn average_degree(&self) -> f64 {
        2.0 * self.edges as f64 / self.nodes as f64
    }

    /// Statistics of the Cora citation network.
    pub fn cora() -> Self {
        Self {
            nodes: 2708,
            edges: 5429,
            features: 1433,
        }
    }
}

/// `32·d_in / (d_in + 32)`.
pub fn param_compression_ratio(d_in: u64) -> f64 {
    let d = d_in as f64;
    32.0 * d / (d + 32.0)
}

/// `32·d / (d + 32)`.
pub fn data_compression_ratio(d: u64) -> f64 {
    param_compression_ratio(d)
}

/// `(S_fe, S_full)` for a layer with input width `d_in` on a graph with the
/// given average degree.
pub fn acceleration_ratios(d_in: u64, avg_degree: f64) -> (f64, f64) {
    acceleration_ratios_with(d_in, avg_degree, BINARY_OPS_PER_CYCLE)
}

pub fn acceleration_ratios_with(d_in: u64, avg_degree: f64, ops_per_cycle: u64) -> (f64, f64) {
    let (d, w) = (d_in as f64, ops_per_cycle as f64);
    let s_fe = w * d / (d + 2.0 * w);
    let agg = w * avg_degree / 2.0;
    let s_full = (w * d + agg) / (d + 2.0 * w + agg);
    (s_fe, s_full)
}

pub fn cycle_ops(arch: &ArchSpec, stats: &GraphStats) -> u64 {
    cycle_ops_with(arch, stats, BINARY_OPS_PER_CYCLE)
}

pub fn cycle_ops_with(arch: &ArchSpec, stats: &GraphStats, ops_per_cycle: u64) -> u64 {
    let n = stats.nodes;
    arch.layers()
        .map(|(d_in, d_out, binary)| {
            let extraction = if binary {
                (n * d_in * d_out).div_ceil(ops_per_cycle) + 2 * n * d_out
            } else {
                n * d_in * d_out
            };
            extraction + stats.edges * d_out
        })
        .sum()
}

/// `(full-precision bits, binarized bits)` of the parameters. Layers not
/// flagged as binarized count at full precision in both.
pub fn model_size_bits(arch: &ArchSpec) -> (u64, u64) {
    arch.layers().fold((0, 0), |(f, b), (d_in, d_out, binary)| {
        let float = FLOAT_BITS * d_in * d_out;
        let bin = if binary {
            d_in * d_out + FLOAT_BITS * d_out
        } else {
            float
        };
        (f + float, b + bin)
    })
}

/// `(full-precision bits, binarized bits)` of the node features.
pub fn data_size_bits(stats: &GraphStats) -> (u64, u64) {
    let (n, d) = (stats.nodes, stats.features);
    (FLOAT_BITS * n * d, n * d + FLOAT_BITS * n)
}

pub fn bits_to_kib(bits: u64) -> f64 {
    bits as f64 / 8.0 / 1024.0
}

pub fn bits_to_mib(bits: u64) -> f64 {
    bits as f64 / 8.0 / 1024.0 / 1024.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeComparison {
    pub float_bits: u64,
    pub binary_bits: u64,
    pub float_kib: f64,
    pub binary_kib: f64,
    pub float_mib: f64,
    pub binary_mib: f64,
    pub ratio: f64,
}

impl SizeComparison {
    fn new(float_bits: u64, binary_bits: u64) -> Self {
        Self {
            float_bits,
            binary_bits,
            float_kib: bits_to_kib(float_bits),
            binary_kib: bits_to_kib(binary_bits),
            float_mib: bits_to_mib(float_bits),
            binary_mib: bits_to_mib(binary_bits),
            ratio: float_bits as f64 / binary_bits as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleComparison {
    pub float: u64,
    pub binary: u64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerEfficiency {
    pub d_in: u64,
    pub d_out: u64,
    pub binarized: bool,
    pub param_compression: f64,
    pub s_fe: f64,
    pub s_full: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub arch: ArchSpec,
    pub stats: GraphStats,
    pub avg_degree: f64,
    pub binary_ops_per_cycle: u64,
    pub model_size: SizeComparison,
    pub data_size: SizeComparison,
    pub cycles: CycleComparison,
    pub layers: Vec<LayerEfficiency>,
    pub param_compression_total: f64,
    pub data_compression: f64,
    pub total_acceleration: f64,
}

impl EfficiencyReport {
    pub fn compute(arch: &ArchSpec, stats: &GraphStats) -> Self {
        Self::compute_with(arch, stats, BINARY_OPS_PER_CYCLE)
    }

    pub fn compute_with(arch: &ArchSpec, stats: &GraphStats, ops_per_cycle: u64) -> Self {
        let deg = stats.average_degree();
        let (mf, mb) = model_size_bits(arch);
        let (df, db) = data_size_bits(stats);
        let float = cycle_ops_with(&arch.as_float(), stats, ops_per_cycle);
        let binary = cycle_ops_with(arch, stats, ops_per_cycle);
        let layers = arch
            .layers()
            .map(|(d_in, d_out, binarized)| {
                let (s_fe, s_full) = acceleration_ratios_with(d_in, deg, ops_per_cycle);
                LayerEfficiency {
                    d_in,
                    d_out,
                    binarized,
                    param_compression: param_compression_ratio(d_in),
                    s_fe,
                    s_full,
                }
            })
            .collect();
        let model_size = SizeComparison::new(mf, mb);
        let cycles = CycleComparison {
            float,
            binary,
            ratio: float as f64 / binary.max(1) as f64,
        };
        Self {
            arch: arch.clone(),
            stats: *stats,
            avg_degree: deg,
            binary_ops_per_cycle: ops_per_cycle,
            param_compression_total: model_size.ratio,
            data_compression: data_compression_ratio(stats.features),
            total_acceleration: cycles.ratio,
            model_size,
            data_size: SizeComparison::new(df, db),
            cycles,
            layers,
        }
    }
}
