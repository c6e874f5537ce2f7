//! The `bigcn` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime failure.
//! Every failure prints a single `error: ...` line on standard error.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::bitlinalg::{bin_gemm, binarize_columns, binarize_rows, DenseMatrix};
use crate::capacity::{capacity_from_estimates, layer_entropy_independent, EntropyEstimate};
use crate::data::{generate_sbm, load_dataset, read_activations, write_activations, SbmParams};
use crate::efficiency::{ArchSpec, EfficiencyReport, GraphStats};
use crate::error::DataError;
use crate::graph::AttributedGraph;
use crate::nn::{evaluate, train, GraphContext, LayerType, Model, ModelConfig, SteMode};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(DataError),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Data(e) => write!(f, "data: {e}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e)
    }
}

impl From<crate::error::Error> for CliError {
    fn from(e: crate::error::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn io_fail(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| {
        CliError::Data(DataError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[derive(Parser, Debug)]
#[command(name = "bigcn", version, about = "Binary graph convolutional networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a model and write metrics.jsonl, result.json and model.bin.
    Train(TrainArgs),
    /// Evaluate saved weights on a dataset.
    Eval(EvalArgs),
    /// Entropy of dumped activations and the binary width lower bound.
    Capacity(CapacityArgs),
    /// Memory and cycle-count report for an architecture.
    Analyze(AnalyzeArgs),
    /// Time the binary GEMM against a naive float product.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
struct DataSource {
    /// Dataset manifest (JSON).
    #[arg(long, value_name = "MANIFEST")]
    dataset: Option<PathBuf>,
    /// Synthetic block-model parameters: inline JSON or a path to a JSON file.
    #[arg(long, value_name = "JSON")]
    sbm: Option<String>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModelArg {
    Bigcn,
    Gcn,
    Bisage,
}

impl From<ModelArg> for LayerType {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Bigcn => LayerType::BiGcn,
            ModelArg::Gcn => LayerType::Gcn,
            ModelArg::Bisage => LayerType::BiSage,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SteArg {
    Grad,
    Input,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    data: DataSource,
    /// JSON model config; flags given on the command line take precedence.
    #[arg(long, value_name = "JSON")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Layer widths, e.g. `1433,64,7`.
    #[arg(long, value_delimiter = ',')]
    widths: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    ste: Option<SteArg>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Write the trained model's hidden activations here (one file per
    /// hidden layer; layers after the first get a `.<index>` suffix).
    #[arg(long, value_name = "PATH")]
    dump_activations: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    data: DataSource,
    /// Weight file written by `train`.
    #[arg(long)]
    weights: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CapacityArgs {
    /// Activation dump, one per hidden layer (repeatable).
    #[arg(long = "activations", required = true)]
    activations: Vec<PathBuf>,
    /// Histogram bin count M.
    #[arg(long, default_value_t = 200)]
    bins: usize,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    data: DataSource,
    /// Use the Cora statistics (2708 nodes, 5429 edges, 1433 features).
    #[arg(long)]
    cora: bool,
    #[arg(long)]
    nodes: Option<u64>,
    #[arg(long)]
    edges: Option<u64>,
    #[arg(long)]
    features: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    widths: Option<Vec<usize>>,
    /// `gcn` reports a model with no binarized layer.
    #[arg(long, value_enum, default_value = "bigcn")]
    model: ModelArg,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Problem sizes `n,k,m` (rows, inner, columns); repeatable.
    #[arg(
        long = "size",
        value_delimiter = ',',
        num_args = 1,
        default_value = "1024,1024,64"
    )]
    size: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Runs the tool on `argv` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = say(e.to_string().trim_end());
                return 0;
            }
            let msg = e.to_string();
            let detail: Vec<&str> = msg
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("{}", detail.join(" "));
            return 1;
        }
    };
    let outcome = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Capacity(a) => cmd_capacity(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let line = e.to_string().replace('\n', " ");
            eprintln!("error: {line}");
            e.exit_code()
        }
    }
}

fn load_source(src: &DataSource) -> Result<AttributedGraph, CliError> {
    match (&src.dataset, &src.sbm) {
        (Some(_), Some(_)) => Err(CliError::Usage(
            "give either --dataset or --sbm, not both".into(),
        )),
        (None, None) => Err(CliError::Usage(
            "a data source is required (--dataset or --sbm)".into(),
        )),
        (Some(path), None) => Ok(load_dataset(path)?),
        (None, Some(arg)) => {
            let text = if arg.trim_start().starts_with('{') {
                arg.clone()
            } else {
                let p = Path::new(arg);
                fs::read_to_string(p).map_err(|e| match e.kind() {
                    std::io::ErrorKind::NotFound => {
                        CliError::Data(DataError::MissingFile(p.to_path_buf()))
                    }
                    _ => io_fail(p)(e),
                })?
            };
            let params: SbmParams = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad --sbm JSON: {e}")))?;
            generate_sbm(&params).map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}

/// Prints to stdout; a closed pipe is not an error.
fn say(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(CliError::Runtime(format!("stdout: {e}")))
        }
        _ => Ok(()),
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    fs::write(path, text + "\n").map_err(io_fail(path))
}

fn emit(value: &impl Serialize, out: Option<&Path>) -> Result<(), CliError> {
    say(&serde_json::to_string_pretty(value).expect("report serializes"))?;
    out.map_or(Ok(()), |p| write_json(p, value))
}

fn resolve_config(a: &TrainArgs) -> Result<ModelConfig, CliError> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => CliError::Data(DataError::MissingFile(p.clone())),
                _ => io_fail(p)(e),
            })?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad --config {}: {e}", p.display())))?
        }
        None => ModelConfig::default(),
    };
    if let Some(m) = a.model {
        cfg.model = m.into();
    }
    if let Some(w) = &a.widths {
        cfg.widths = w.clone();
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(s) = a.ste {
        cfg.ste = match s {
            SteArg::Grad => SteMode::GradientMagnitude,
            SteArg::Input => SteMode::InputMagnitude,
        };
    }
    if let Some(v) = a.lr {
        cfg.lr = v;
    }
    if let Some(v) = a.dropout {
        cfg.dropout = v;
    }
    if let Some(v) = a.epochs {
        cfg.max_epochs = v;
    }
    if let Some(v) = a.patience {
        cfg.patience = v;
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct MetricsLine {
    epoch: usize,
    train_loss: f64,
    val_loss: f64,
    val_acc: f64,
}

#[derive(Serialize)]
struct TrainResult {
    test_acc: f64,
    best_epoch: Option<usize>,
    seed: u64,
    model: LayerType,
    widths: Vec<usize>,
    epochs_run: usize,
}

fn cmd_train(a: TrainArgs) -> Result<(), CliError> {
    let mut cfg = resolve_config(&a)?;
    let graph = load_source(&a.data)?;
    cfg.resolve_widths(&graph);
    cfg.validate_for(&graph)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let ctx = GraphContext::new(&graph);
    let outcome = train(&cfg, &graph, &ctx)?;

    fs::create_dir_all(&a.out).map_err(io_fail(&a.out))?;
    let metrics_path = a.out.join("metrics.jsonl");
    let mut w = BufWriter::new(fs::File::create(&metrics_path).map_err(io_fail(&metrics_path))?);
    for m in &outcome.trace {
        let line = MetricsLine {
            epoch: m.epoch,
            train_loss: m.train_loss,
            val_loss: m.val_loss,
            val_acc: m.val_acc,
        };
        writeln!(
            w,
            "{}",
            serde_json::to_string(&line).expect("metrics serialize")
        )
        .map_err(io_fail(&metrics_path))?;
    }
    w.flush().map_err(io_fail(&metrics_path))?;

    let result = TrainResult {
        test_acc: outcome.test_acc,
        best_epoch: outcome.best_epoch,
        seed: cfg.seed,
        model: cfg.model,
        widths: cfg.widths.clone(),
        epochs_run: outcome.trace.len(),
    };
    write_json(&a.out.join("result.json"), &result)?;

    let model_path = a.out.join("model.bin");
    let file = fs::File::create(&model_path).map_err(io_fail(&model_path))?;
    let mut w = BufWriter::new(file);
    outcome
        .model
        .write_to(&mut w)
        .map_err(io_fail(&model_path))?;
    w.flush().map_err(io_fail(&model_path))?;

    if let Some(dump) = &a.dump_activations {
        let (_, hidden) = outcome.model.forward_with_hidden(&ctx, graph.features())?;
        for (l, h) in hidden.iter().enumerate() {
            let path = if l == 0 {
                dump.clone()
            } else {
                let mut s = dump.clone().into_os_string();
                s.push(format!(".{l}"));
                PathBuf::from(s)
            };
            write_activations(&path, h)?;
        }
    }
    say(&serde_json::to_string(&result).expect("result serializes"))
}

fn cmd_eval(a: EvalArgs) -> Result<(), CliError> {
    let graph = load_source(&a.data)?;
    let file = fs::File::open(&a.weights).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::Data(DataError::MissingFile(a.weights.clone())),
        _ => io_fail(&a.weights)(e),
    })?;
    let model = Model::read_from(std::io::BufReader::new(file)).map_err(io_fail(&a.weights))?;
    if model.widths()[0] != graph.feature_dim()
        || *model.widths().last().expect("non-empty") != graph.num_classes()
    {
        return Err(CliError::Data(DataError::DimensionMismatch {
            what: "model input width vs. feature dimension".into(),
            declared: model.widths()[0],
            found: graph.feature_dim(),
        }));
    }
    let ctx = GraphContext::new(&graph);
    let ev = evaluate(&model, &graph, &ctx)?;
    emit(&ev, a.out.as_deref())
}

#[derive(Serialize)]
struct CapacityReport {
    bins: usize,
    layers: Vec<EntropyEstimate>,
    layer_entropies: Vec<f64>,
    d_bin_lower: u64,
    d_fp: Option<usize>,
}

fn cmd_capacity(a: CapacityArgs) -> Result<(), CliError> {
    if a.bins == 0 {
        return Err(CliError::Usage("--bins must be at least 1".into()));
    }
    let layers = a
        .activations
        .iter()
        .map(|p| Ok(layer_entropy_independent(&read_activations(p)?, a.bins)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    let bound = capacity_from_estimates(&layers)?;
    let report = CapacityReport {
        bins: a.bins,
        layer_entropies: bound.layer_entropies.clone(),
        d_bin_lower: bound.d_bin_lower,
        d_fp: bound.d_fp,
        layers,
    };
    match a.format {
        Format::Json => emit(&report, a.out.as_deref()),
        Format::Text => {
            for (i, (l, p)) in report.layers.iter().zip(&a.activations).enumerate() {
                say(&format!(
                    "layer {i} ({}): {} samples, {} neurons, H_ind = {:.4} bits",
                    p.display(),
                    l.samples,
                    l.per_neuron.len(),
                    l.independent_sum
                ))?;
            }
            say(&format!(
                "binary hidden width lower bound: {}",
                report.d_bin_lower
            ))?;
            a.out.as_deref().map_or(Ok(()), |p| write_json(p, &report))
        }
    }
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<(), CliError> {
    let explicit = a.nodes.is_some() || a.edges.is_some() || a.features.is_some();
    let has_data = a.data.dataset.is_some() || a.data.sbm.is_some();
    let sources = [a.cora, explicit, has_data].iter().filter(|&&b| b).count();
    if sources != 1 {
        return Err(CliError::Usage(
            "give exactly one of --cora, --nodes/--edges/--features, --dataset or --sbm".into(),
        ));
    }
    let (stats, classes) = if a.cora {
        (GraphStats::cora(), Some(7))
    } else if explicit {
        match (a.nodes, a.edges, a.features) {
            (Some(n), Some(e), Some(d)) => (
                GraphStats::new(n, e, d).map_err(|e| CliError::Usage(e.to_string()))?,
                None,
            ),
            _ => {
                return Err(CliError::Usage(
                    "--nodes, --edges and --features go together".into(),
                ))
            }
        }
    } else {
        let g = load_source(&a.data)?;
        (GraphStats::of(&g), Some(g.num_classes()))
    };
    let widths = match (&a.widths, classes) {
        (Some(w), _) => w.clone(),
        (None, Some(c)) => vec![stats.features as usize, crate::nn::DEFAULT_HIDDEN, c],
        (None, None) => {
            return Err(CliError::Usage(
                "--widths is required with explicit statistics".into(),
            ))
        }
    };
    if widths.first().map(|&d| d as u64) != Some(stats.features) {
        return Err(CliError::Usage(format!(
            "first width must equal the feature dimension {}",
            stats.features
        )));
    }
    let binary = LayerType::from(a.model).is_binary();
    let arch = ArchSpec::uniform(widths, binary).map_err(|e| CliError::Usage(e.to_string()))?;
    if arch.num_layers() == 0 {
        return Err(CliError::Usage("widths need at least two entries".into()));
    }
    let report = EfficiencyReport::compute(&arch, &stats);
    match a.format {
        Format::Json => emit(&report, a.out.as_deref()),
        Format::Text => {
            say(render_report(&report).trim_end())?;
            a.out.as_deref().map_or(Ok(()), |p| write_json(p, &report))
        }
    }
}

fn render_report(r: &EfficiencyReport) -> String {
    let mut s = String::new();
    let s_ = &mut s;
    let mut line = |t: String| {
        s_.push_str(&t);
        s_.push('\n');
    };
    line(format!(
        "graph: N={} E={} d={} (average degree {:.3}); widths {:?}",
        r.stats.nodes, r.stats.edges, r.stats.features, r.avg_degree, r.arch.widths
    ));
    line(format!(
        "{:<12}{:>18}{:>18}{:>10}",
        "", "full precision", "binarized", "ratio"
    ));
    line(format!(
        "{:<12}{:>15.2} KB{:>15.2} KB{:>10.1}",
        "model", r.model_size.float_kib, r.model_size.binary_kib, r.model_size.ratio
    ));
    line(format!(
        "{:<12}{:>15.2} MB{:>15.2} MB{:>10.1}",
        "data", r.data_size.float_mib, r.data_size.binary_mib, r.data_size.ratio
    ));
    line(format!(
        "{:<12}{:>18}{:>18}{:>10.1}",
        "cycles", r.cycles.float, r.cycles.binary, r.cycles.ratio
    ));
    for (i, l) in r.layers.iter().enumerate() {
        line(format!(
            "layer {i}: {}x{} PC {:.2} S_fe {:.2} S_full {:.2}",
            l.d_in, l.d_out, l.param_compression, l.s_fe, l.s_full
        ));
    }
    s
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn naive_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (n, k, m) = (a.rows(), a.cols(), b.cols());
    let mut out = DenseMatrix::zeros(n, m);
    for i in 0..n {
        for p in 0..k {
            let x = a.get(i, p);
            let row = out.row_mut(i);
            for (j, o) in row.iter_mut().enumerate() {
                *o += x * b.get(p, j);
            }
        }
    }
    out
}

fn best_of<T>(repeats: usize, mut f: impl FnMut() -> T) -> (f64, T) {
    let mut best = f64::INFINITY;
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        let v = f();
        best = best.min(t.elapsed().as_secs_f64());
        last = Some(v);
    }
    (best, last.expect("ran at least once"))
}

fn cmd_bench(a: BenchArgs) -> Result<(), CliError> {
    if a.size.is_empty() || !a.size.len().is_multiple_of(3) || a.size.contains(&0) {
        return Err(CliError::Usage(
            "--size takes positive triples n,k,m".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut rows = Vec::new();
    for t in a.size.chunks(3) {
        let (n, k, m) = (t[0], t[1], t[2]);
        let x = random_matrix(n, k, &mut rng);
        let w = random_matrix(k, m, &mut rng);
        let (t_pack, (f, b)) = best_of(a.repeats, || (binarize_rows(&x), binarize_columns(&w)));
        let (f, b) = (f?, b?);
        let (t_bin, z) = best_of(a.repeats, || bin_gemm(&f, &b));
        let z = z?;
        let (xr, wr) = (f.reconstruct(), b.reconstruct());
        let (t_float, reference) = best_of(a.repeats, || naive_matmul(&xr, &wr));
        rows.push(json!({
            "n": n, "k": k, "m": m,
            "binarize_s": t_pack,
            "bin_gemm_s": t_bin,
            "naive_float_s": t_float,
            "speedup": t_float / t_bin.max(1e-12),
            "max_abs_diff": z.max_abs_diff(&reference),
        }));
    }
    let report = json!({ "threads": rayon::current_num_threads(), "results": rows });
    say(&serde_json::to_string_pretty(&report).expect("bench serializes"))
}
