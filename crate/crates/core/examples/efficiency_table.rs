//! Prints the memory and cycle-count comparison for a two-layer model on
//! the Cora statistics, then sweeps the input width to show how the
//! compression and acceleration ratios approach their limits.
//!
//! `cargo run --example efficiency_table`

use bigcn::efficiency::{
    acceleration_ratios, data_compression_ratio, param_compression_ratio, ArchSpec,
    EfficiencyReport, GraphStats,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let stats = GraphStats::cora();
    let arch = ArchSpec::uniform(vec![1433, 64, 7], true)?;
    let r = EfficiencyReport::compute(&arch, &stats);
    println!("Cora, widths {:?}", arch.widths);
    println!(
        "  model  {:>10.2} KB -> {:>8.2} KB  (x{:.1})",
        r.model_size.float_kib, r.model_size.binary_kib, r.model_size.ratio
    );
    println!(
        "  data   {:>10.2} MB -> {:>8.2} MB  (x{:.1})",
        r.data_size.float_mib, r.data_size.binary_mib, r.data_size.ratio
    );
    println!(
        "  cycles {:>13} -> {:>11}  (x{:.1})",
        r.cycles.float, r.cycles.binary, r.cycles.ratio
    );

    println!(
        "\n{:>6} {:>8} {:>8} {:>8} {:>8}",
        "d_in", "PC", "DC", "S_fe", "S_full"
    );
    for d in [16u64, 64, 256, 1433, 3703, 1 << 16] {
        let (fe, full) = acceleration_ratios(d, stats.average_degree());
        println!(
            "{d:>6} {:>8.2} {:>8.2} {:>8.2} {:>8.2}",
            param_compression_ratio(d),
            data_compression_ratio(d),
            fe,
            full
        );
    }
    println!("\nFull JSON report:\n{}", serde_json::to_string_pretty(&r)?);
    Ok(())
}
