//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 I/O error.

use std::env;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::alrt::{self, SigmaPolicy};
use crate::dataset::{self, GenOptions, Split, DEFAULT_N_PER_CLASS, DEFAULT_SEQ_LEN};
use crate::error::{Error, Result};
use crate::eval::{self, merge_curves, Evaluation, GridPolicy};
use crate::format;
use crate::labelset::LabelSet;

/// `println!` that ignores a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Environment variable capping worker threads (0 = one per core).
pub const THREADS_ENV: &str = "MIXAMC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "mixamc", version, about = "Mixed-signal modulation dataset generation, ALRT bounds and accuracy reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate AMCD training (train + validation) and/or test files.
    Gen(GenArgs),
    /// Evaluate the ALRT classifier and write accuracy/confusion CSVs.
    Alrt(AlrtArgs),
    /// Score a predictions CSV (index,true,pred,snr_db) from any classifier.
    Score(ScoreArgs),
    /// Merge accuracy curves into one wide CSV.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// Label set family: omega4, omega6 or omega12.
    #[arg(long)]
    pub labelset: String,
    /// Strong:weak power ratio (`2`, `5/2`) or `random` for 1:1..9:1.
    #[arg(long, allow_hyphen_values = true)]
    pub ratio: Option<String>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub labels: LabelArgs,
    /// Sequences per class in the training pool (last 10% per class is validation).
    #[arg(long, default_value_t = 60_000)]
    pub n_sample: usize,
    /// Training SNR interval `lo..hi` in dB, drawn uniformly per sequence.
    #[arg(long, default_value = "-10..20", allow_hyphen_values = true)]
    pub snr: String,
    /// Master seed.
    #[arg(long)]
    pub seed: u64,
    /// Training file path [default: <labelset>_train.amcd].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a test file here.
    #[arg(long)]
    pub test_out: Option<PathBuf>,
    /// Skip the training file (requires --test-out).
    #[arg(long, requires = "test_out")]
    pub test_only: bool,
    /// Test SNR grid `lo..hi:step` or a comma list, in dB.
    #[arg(long, default_value = "-10..20:2", allow_hyphen_values = true)]
    pub grid: String,
    /// Test sequences per (class, SNR) pair.
    #[arg(long, default_value_t = DEFAULT_N_PER_CLASS)]
    pub n: usize,
    /// Symbols per sequence.
    #[arg(long, default_value_t = DEFAULT_SEQ_LEN)]
    pub len: usize,
}

#[derive(Debug, Args)]
pub struct AlrtArgs {
    /// Label set family for on-the-fly test generation.
    #[arg(long, required_unless_present = "dataset", conflicts_with = "dataset")]
    pub labelset: Option<String>,
    /// Strong:weak power ratio (`2`, `5/2`) or `random`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "dataset")]
    pub ratio: Option<String>,
    /// Test SNR grid `lo..hi:step` or a comma list, in dB.
    #[arg(long, default_value = "-10..20:2", allow_hyphen_values = true)]
    pub grid: String,
    /// Test sequences per (class, SNR) pair.
    #[arg(long, default_value_t = DEFAULT_N_PER_CLASS)]
    pub n: usize,
    /// Master seed for on-the-fly generation.
    #[arg(long, required_unless_present = "dataset")]
    pub seed: Option<u64>,
    /// Symbols per sequence.
    #[arg(long, default_value_t = DEFAULT_SEQ_LEN)]
    pub len: usize,
    /// Classify an existing AMCD file instead of generating one.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Known noise variance for every example, overriding stored SNRs.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Output directory for CSV reports.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Classifier tag used in report file names.
    #[arg(long, default_value = "alrt")]
    pub classifier: String,
    /// Also write per-example predictions (index,true,pred,snr_db).
    #[arg(long)]
    pub predictions_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Predictions CSV with header index,true,pred,snr_db.
    #[arg(long)]
    pub predictions: PathBuf,
    #[command(flatten)]
    pub labels: LabelArgs,
    /// Classifier tag used in report file names.
    #[arg(long)]
    pub classifier: String,
    /// Output directory for CSV reports.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Interpolate {
    /// Grids must match exactly.
    Strict,
    /// Align on the union grid, leaving missing points empty.
    Never,
    /// Align on the union grid, interpolating interior gaps.
    Linear,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Accuracy curve CSVs to merge.
    #[arg(long, required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    /// Column names, comma separated [default: input file stems].
    #[arg(long, value_delimiter = ',')]
    pub names: Option<Vec<String>>,
    /// Merged CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Grid alignment policy for mismatched SNR grids.
    #[arg(long, value_enum, default_value_t = Interpolate::Strict)]
    pub interpolate: Interpolate,
}

/// Parses `lo..hi` (dB).
pub fn parse_range(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config(format!("invalid SNR range '{s}' (expected lo..hi)"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Parses `lo..hi:step` or a comma-separated list (dB).
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("invalid SNR grid '{s}' (expected lo..hi:step or a,b,c)"));
    if let Some((range, step)) = s.split_once(':') {
        let (lo, hi) = parse_range(range)?;
        let step: f64 = step.trim().parse().map_err(|_| bad())?;
        if !(step > 0.0 && step.is_finite()) {
            return Err(bad());
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| lo + step * i as f64).collect());
    }
    if s.contains("..") {
        let (lo, hi) = parse_range(s)?;
        return Ok(if lo == hi { vec![lo] } else { vec![lo, hi] });
    }
    let pts = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    if pts.is_empty() || pts.iter().any(|p| !p.is_finite()) {
        return Err(bad());
    }
    Ok(pts)
}

fn absolute(path: &Path) -> Result<PathBuf> {
    Ok(if path.is_absolute() { path.to_path_buf() } else { env::current_dir()?.join(path) })
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_DATA,
    }
}

fn configure_threads() -> Result<()> {
    let threads = match env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a non-negative integer, got '{v}'")))?,
        Err(_) => 0,
    };
    // A second initialization (e.g. in tests) keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Entry point; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match configure_threads().and_then(|_| run(cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Alrt(a) => cmd_alrt(a),
        Command::Score(a) => cmd_score(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn write_dataset(d: &dataset::Dataset, path: &Path) -> Result<()> {
    let bytes = format::to_bytes(d)?;
    std::fs::write(path, &bytes)?;
    let split = match d.header.split {
        Split::TrainValidation { train_per_class, validation_per_class } => format!(
            "{} train / {} validation",
            train_per_class * d.labelset().len(),
            validation_per_class * d.labelset().len()
        ),
        Split::Test { per_class_per_snr } => format!("{per_class_per_snr} per (class, SNR)"),
    };
    say!(
        "wrote {}: labelset {}, {} examples ({}), L = {}, seed {}, sha256 {}",
        path.display(),
        d.labelset(),
        d.len(),
        split,
        d.header.seq_len,
        d.header.provenance.master_seed,
        format::sha256_hex(&bytes)
    );
    Ok(())
}

pub fn cmd_gen(a: GenArgs) -> Result<()> {
    let labelset = LabelSet::from_args(&a.labels.labelset, a.labels.ratio.as_deref())?;
    let (lo, hi) = parse_range(&a.snr)?;
    let grid = parse_grid(&a.grid)?;
    let opts = GenOptions { seq_len: a.len };
    let out = match (&a.out, a.test_only) {
        (Some(_), true) => return Err(Error::Config("--out conflicts with --test-only".into())),
        (_, true) => None,
        (Some(p), false) => Some(absolute(p)?),
        (None, false) => Some(absolute(Path::new(&format!("{}_train.amcd", labelset.slug())))?),
    };
    let test_out = a.test_out.as_deref().map(absolute).transpose()?;
    if out.is_some() && out == test_out {
        return Err(Error::Config("training and test outputs must differ".into()));
    }

    if let Some(path) = &out {
        let d = dataset::gen_training(&labelset, a.n_sample, lo, hi, a.seed, opts)?;
        write_dataset(&d, path)?;
    }
    if let Some(path) = &test_out {
        let d = dataset::gen_test(&labelset, &grid, a.n, a.seed, opts)?;
        write_dataset(&d, path)?;
    }
    Ok(())
}

pub fn cmd_alrt(a: AlrtArgs) -> Result<()> {
    let out_dir = absolute(&a.out_dir)?;
    if let Some(s) = a.sigma2 {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Config(format!("--sigma2 must be positive, got {s}")));
        }
    }
    let (labelset, evaluation, predictions) = match &a.dataset {
        Some(path) => {
            let d = format::load(absolute(path)?)?;
            let policy = a.sigma2.map_or(SigmaPolicy::NominalSnr, SigmaPolicy::Fixed);
            let predictions = alrt::classify_dataset(&d, policy)?;
            let ev = Evaluation::from_predictions(&predictions, &d.labelset().class_names())?;
            (d.header.labelset, ev, Some(predictions))
        }
        None => {
            let labelset = LabelSet::from_args(a.labelset.as_deref().unwrap(), a.ratio.as_deref())?;
            let grid = parse_grid(&a.grid)?;
            let seed = a.seed.expect("clap enforces --seed");
            if a.sigma2.is_some() {
                return Err(Error::Config("--sigma2 applies only to --dataset runs".into()));
            }
            let ev = alrt::evaluate_bound(&labelset, &grid, a.n, seed, a.len)?;
            (labelset, ev, None)
        }
    };
    let written = evaluation.write_reports(&out_dir, &labelset.slug(), &a.classifier)?;
    if let Some(path) = &a.predictions_out {
        let predictions = predictions.ok_or_else(|| Error::Config("--predictions-out needs --dataset".into()))?;
        eval::write_predictions(&predictions, &absolute(path)?)?;
    }
    for (snr, acc) in evaluation.curve.snr_db.iter().zip(&evaluation.curve.accuracy) {
        say!("{snr:>7.2} dB  {acc:.4}");
    }
    say!("wrote {} report files to {}", written.len(), out_dir.display());
    Ok(())
}

pub fn cmd_score(a: ScoreArgs) -> Result<()> {
    let labelset = LabelSet::from_args(&a.labels.labelset, a.labels.ratio.as_deref())?;
    let predictions = eval::read_predictions(&absolute(&a.predictions)?)?;
    let ev = Evaluation::from_predictions(&predictions, &labelset.class_names())?;
    let written = ev.write_reports(&absolute(&a.out_dir)?, &labelset.slug(), &a.classifier)?;
    say!("overall accuracy {:.4}; wrote {} report files", ev.aggregate.accuracy(), written.len());
    Ok(())
}

pub fn cmd_report(a: ReportArgs) -> Result<()> {
    let names: Vec<String> = match a.names {
        Some(n) if n.len() != a.inputs.len() => {
            return Err(Error::Config(format!("{} names for {} inputs", n.len(), a.inputs.len())))
        }
        Some(n) => n,
        None => a
            .inputs
            .iter()
            .map(|p| p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()))
            .collect(),
    };
    let curves = names
        .into_iter()
        .zip(&a.inputs)
        .map(|(n, p)| Ok((n, eval::read_curve(&absolute(p)?)?)))
        .collect::<Result<Vec<_>>>()?;
    let policy = match a.interpolate {
        Interpolate::Strict => GridPolicy::Strict,
        Interpolate::Never => GridPolicy::Never,
        Interpolate::Linear => GridPolicy::Linear,
    };
    let merged = merge_curves(&curves, policy)?;
    std::fs::write(absolute(&a.out)?, merged.to_csv())?;
    say!("merged {} curves over {} SNR points into {}", curves.len(), merged.snr_db.len(), a.out.display());
    Ok(())
}
