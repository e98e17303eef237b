//! Subcommands behind the `metasurf` binary.
//!
//! Exit codes: 0 success, 1 runtime or model error, 2 usage error.

use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use crate::features::{extract_notches, DesignTarget};
use crate::geometry::{decode_bits, encode_bits, render, BitVector48, RenderFormat, UnitCell};
use crate::neural::{load_checkpoint, save_checkpoint, NeuralError};
use crate::pipeline::{
    self, design, evaluate, generate_dataset, read_dataset, split, train_with_progress, verify_design, write_dataset,
    DatasetHeader, DatasetRecord, Metrics, Predictor, Tolerances, TrainConfig,
};
use crate::surrogate::{reflection_spectrum, spectra_csv, Polarization};

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "metasurf", version, about = "Inverse design of annular metasurface unit cells")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled dataset with the surrogate forward model.
    Gen(GenArgs),
    /// Train the network on a dataset.
    Train(TrainArgs),
    /// Score a model on a dataset.
    Eval(EvalArgs),
    /// Design a unit cell for a target document.
    Infer(InferArgs),
    /// Simulate a unit cell and list its notches.
    Forward(ForwardArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.2)]
    pub dropout: f64,
    #[arg(long, default_value_t = 0.7)]
    pub split: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Mini-batch size; full batch when omitted.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Stop after this many epochs without test-MSE improvement.
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub model_out: PathBuf,
    #[arg(long)]
    pub report_out: PathBuf,
    /// Print progress every N epochs (0 disables).
    #[arg(long, default_value_t = 500)]
    pub log_every: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, required_unless_present = "oracle_stub")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub dataset: PathBuf,
    /// Score the labels themselves instead of a model (test hook).
    #[arg(long, hide = true)]
    pub oracle_stub: bool,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// JSON document with `te` and `tm` arrays of `{freq_ghz, depth_db, bandwidth_ghz}`.
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long)]
    pub out_prefix: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub tol_ghz: f64,
}

#[derive(Debug, Args)]
pub struct ForwardArgs {
    /// 16 comma-separated tile ids, row-major.
    #[arg(long, conflicts_with = "bits", required_unless_present = "bits")]
    pub tiles: Option<String>,
    /// 48-character 0/1 structure code.
    #[arg(long)]
    pub bits: Option<String>,
    /// Write the spectra CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<pipeline::PipelineError> for CliError {
    fn from(e: pipeline::PipelineError) -> Self {
        CliError::Runtime(e.into())
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a, out),
        Command::Train(a) => cmd_train(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Infer(a) => cmd_infer(&a, out),
        Command::Forward(a) => cmd_forward(&a, out),
    }
}

/// Writes through a temporary file in the destination directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = parent_dir(path);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

fn check_writable(path: &Path) -> Result<(), CliError> {
    let dir = parent_dir(path);
    if !dir.is_dir() {
        return Err(CliError::Usage(format!("output directory {} does not exist", dir.display())));
    }
    if path.is_dir() {
        return Err(CliError::Usage(format!("output path {} is a directory", path.display())));
    }
    Ok(())
}

fn check_readable(path: &Path) -> Result<(), CliError> {
    if !path.is_file() {
        return Err(CliError::Usage(format!("input file {} not found", path.display())));
    }
    Ok(())
}

fn load_dataset(path: &Path) -> anyhow::Result<Vec<DatasetRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let (_, records) = read_dataset(BufReader::new(file)).with_context(|| format!("reading dataset {}", path.display()))?;
    Ok(records)
}

fn print_metrics(out: &mut dyn Write, m: &Metrics) -> std::io::Result<()> {
    writeln!(out, "per_bit={:.6}", m.per_bit_accuracy)?;
    writeln!(out, "per_slot={:.6}", m.per_slot_accuracy)?;
    writeln!(out, "exact_cell={:.6}", m.exact_cell_rate)?;
    writeln!(out, "mse={:.6}", m.mse)
}

fn io(e: std::io::Error) -> CliError {
    CliError::Runtime(e.into())
}

pub fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_writable(&a.out)?;
    let started = Instant::now();
    let records = generate_dataset(a.count as usize, a.seed)?;
    let mut buf = Vec::new();
    write_dataset(&mut buf, &DatasetHeader::new(a.seed, records.len()), &records)?;
    write_atomic(&a.out, &buf)?;
    writeln!(out, "records={}", records.len()).map_err(io)?;
    writeln!(out, "elapsed_s={:.3}", started.elapsed().as_secs_f64()).map_err(io)?;
    Ok(())
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_readable(&a.dataset)?;
    check_writable(&a.model_out)?;
    check_writable(&a.report_out)?;
    let config = TrainConfig {
        epochs: a.epochs as usize,
        learning_rate: a.lr,
        dropout: a.dropout,
        split_ratio: a.split,
        batch_size: a.batch_size,
        seed: a.seed,
        patience: a.patience,
        ..TrainConfig::default()
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let records = load_dataset(&a.dataset)?;
    let (train_set, test_set) = split(&records, config.split_ratio, config.seed)?;
    let log_every = a.log_every;
    let outcome = train_with_progress(&train_set, &test_set, &config, |e| {
        if log_every > 0 && (e.epoch % log_every == 0 || e.epoch == 1) {
            let _ = writeln!(
                out,
                "epoch={} train_mse={:.6} test_mse={:.6} per_bit_acc={:.4}",
                e.epoch, e.train_mse, e.test_mse, e.per_bit_acc
            );
        }
    })?;

    write_atomic(&a.model_out, &save_checkpoint(&outcome.network, Some(&outcome.optimizer)))?;
    write_atomic(&a.report_out, outcome.report.to_csv().as_bytes())?;

    let metrics = evaluate(&outcome.network, &test_set)?;
    writeln!(out, "epochs_run={}", outcome.report.epochs.len()).map_err(io)?;
    writeln!(out, "best_epoch={}", outcome.report.best_epoch).map_err(io)?;
    writeln!(out, "train_time_s={:.3}", outcome.report.wall_clock.as_secs_f64()).map_err(io)?;
    print_metrics(out, &metrics).map_err(io)?;
    Ok(())
}

struct LabelOracle<'a>(&'a [DatasetRecord]);

impl Predictor for LabelOracle<'_> {
    fn predict_batch(&self, x: &ndarray::Array2<f64>) -> Result<ndarray::Array2<f64>, NeuralError> {
        let (_, y) = pipeline::to_arrays(self.0);
        if y.nrows() != x.nrows() {
            return Err(NeuralError::WidthMismatch {
                expected: y.nrows(),
                got: x.nrows(),
            });
        }
        Ok(y)
    }
}

pub fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_readable(&a.dataset)?;
    if let Some(model) = &a.model {
        check_readable(model)?;
    }
    let records = load_dataset(&a.dataset)?;
    let metrics = match (&a.model, a.oracle_stub) {
        (_, true) => evaluate(&LabelOracle(&records), &records)?,
        (Some(path), false) => {
            let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let (network, _) = load_checkpoint(&bytes).with_context(|| format!("loading model {}", path.display()))?;
            evaluate(&network, &records).map_err(|e| anyhow!("model {} cannot score this dataset: {e}", path.display()))?
        }
        (None, false) => return Err(CliError::Usage("--model is required".into())),
    };
    print_metrics(out, &metrics).map_err(io)?;
    Ok(())
}

pub fn cmd_infer(a: &InferArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_readable(&a.model)?;
    check_readable(&a.target)?;
    check_writable(&a.out_prefix)?;

    let text = fs::read_to_string(&a.target).with_context(|| format!("reading {}", a.target.display()))?;
    let raw = DesignTarget::from_json(&text).with_context(|| format!("malformed target document {}", a.target.display()))?;
    let target = DesignTarget::new(raw.te, raw.tm).with_context(|| format!("invalid target {}", a.target.display()))?;
    let bytes = fs::read(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let (network, _) = load_checkpoint(&bytes).with_context(|| format!("loading model {}", a.model.display()))?;

    let proposal = design(&network, &target)?;
    let cell = proposal.cell;
    let report = verify_design(&cell, &target, Tolerances { frequency_ghz: a.tol_ghz });
    let te = reflection_spectrum(&cell, Polarization::Te);
    let tm = reflection_spectrum(&cell, Polarization::Tm);

    let with_suffix = |suffix: &str| {
        let mut p = a.out_prefix.clone().into_os_string();
        p.push(suffix);
        PathBuf::from(p)
    };
    write_atomic(&with_suffix(".code.txt"), format!("bits={}\ntiles={}\n", proposal.code, cell).as_bytes())?;
    write_atomic(&with_suffix(".ascii.txt"), &render(&cell, RenderFormat::Ascii))?;
    write_atomic(&with_suffix(".pgm"), &render(&cell, RenderFormat::Pgm))?;
    write_atomic(&with_suffix(".spectra.csv"), spectra_csv(&te, &tm).as_bytes())?;
    write_atomic(&with_suffix(".verify.txt"), report.to_text().as_bytes())?;

    writeln!(out, "bits={}", proposal.code).map_err(io)?;
    writeln!(out, "tiles={cell}").map_err(io)?;
    writeln!(out, "te_fraction={:.4}", report.te.fraction()).map_err(io)?;
    writeln!(out, "tm_fraction={:.4}", report.tm.fraction()).map_err(io)?;
    writeln!(out, "overall_fraction={:.4}", report.fraction()).map_err(io)?;
    writeln!(out, "inference_s={:.6}", proposal.elapsed.as_secs_f64()).map_err(io)?;
    Ok(())
}

fn parse_cell(a: &ForwardArgs) -> Result<UnitCell, CliError> {
    match (&a.tiles, &a.bits) {
        (Some(tiles), None) => {
            let ids = tiles
                .split(',')
                .map(|t| t.trim().parse::<i64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Usage(format!("bad tile list: {e}")))?;
            UnitCell::from_ids(&ids).map_err(|e| CliError::Usage(format!("bad tile list: {e}")))
        }
        (None, Some(bits)) => {
            let code: BitVector48 = bits.trim().parse().map_err(|e| CliError::Usage(format!("bad bit string: {e}")))?;
            Ok(decode_bits(code))
        }
        _ => Err(CliError::Usage("give exactly one of --tiles or --bits".into())),
    }
}

pub fn cmd_forward(a: &ForwardArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cell = parse_cell(a)?;
    if let Some(path) = &a.out {
        check_writable(path)?;
    }
    let te = reflection_spectrum(&cell, Polarization::Te);
    let tm = reflection_spectrum(&cell, Polarization::Tm);
    if let Some(path) = &a.out {
        write_atomic(path, spectra_csv(&te, &tm).as_bytes())?;
    }
    writeln!(out, "tiles={cell}").map_err(io)?;
    writeln!(out, "bits={}", encode_bits(&cell)).map_err(io)?;
    for (name, spec) in [("te", &te), ("tm", &tm)] {
        let (i, v) = spec.minimum();
        writeln!(out, "{name}_min freq_ghz={:.3} depth_db={:.3}", spec.frequency(i), v).map_err(io)?;
        for f in extract_notches(spec) {
            writeln!(
                out,
                "{name}_notch freq_ghz={:.4} depth_db={:.4} bandwidth_ghz={:.4}",
                f.frequency_ghz, f.depth_db, f.bandwidth_ghz
            )
            .map_err(io)?;
        }
    }
    Ok(())
}
