//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 fatal I/O or
//! parse error, 3 when `qc` rejected every series it found.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::debug;

use crate::config::{PipelineConfig, CONFIG_ENV};
use crate::error::{Error, Result};
use crate::evaluate::{align, evaluate, write_eval, DEFAULT_THRESHOLD};
use crate::export::{read_npy_int16, write_montage_pgm, LungBlock};
use crate::pipeline::run_qc;
use crate::report::{read_qc_csv, summarize, REPORT_FILE_NAME};
use crate::scoring::{load_pooled_csv, load_scores_csv, pool_table, write_pooled_csv, Pooling};
use crate::synth::{demo_corpus, write_corpus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FATAL: i32 = 2;
pub const EXIT_ALL_REJECTED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "virtual-eyes",
    version,
    about = "Chest CT quality control and score evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scan a DICOM tree, gate each series and export lung blocks.
    Qc(QcArgs),
    /// Print the summary of an existing qc_report.csv.
    Report {
        #[arg(long)]
        output: PathBuf,
    },
    /// Pool slice scores into one score per patient.
    Pool(PoolArgs),
    /// Compare two pooled score files.
    Eval(EvalArgs),
    /// Render a lung block as a PGM contact sheet.
    Montage(MontageArgs),
    /// Write the three-series demo phantom corpus.
    Phantom {
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Debug, Args)]
struct QcArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,
    #[arg(long)]
    overwrite: bool,
    /// Also write montage.pgm next to each lung block.
    #[arg(long)]
    montage: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Mean,
    Max,
    Topk,
}

#[derive(Debug, Args)]
struct PoolArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long, required_if_eq("method", "topk"), value_parser = clap::value_parser!(u32).range(1..))]
    k: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    pooled_a: PathBuf,
    #[arg(long)]
    pooled_b: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
}

#[derive(Debug, Args)]
struct MontageArgs {
    #[arg(long)]
    block: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    columns: Option<u32>,
    /// Supplies window_center, window_width and montage_columns.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// `--config`, then the environment variable, then built-in defaults.
fn resolve_config(explicit: Option<&Path>) -> Result<PipelineConfig> {
    let path = explicit.map(Path::to_path_buf).or_else(|| {
        std::env::var_os(CONFIG_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    });
    match path {
        Some(p) => {
            debug!("loading config from {}", p.display());
            PipelineConfig::load(&p)
        }
        None => Ok(PipelineConfig::default()),
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_USAGE,
        _ => EXIT_FATAL,
    }
}

fn qc(args: QcArgs) -> Result<i32> {
    let mut cfg = resolve_config(args.config.as_deref())?;
    if let Some(w) = args.workers {
        cfg.workers = w as usize;
    }
    cfg.overwrite |= args.overwrite;
    let run = run_qc(&args.input, &args.output, &cfg, args.montage)?;
    print!("{}", run.summary);
    if run.summary.total_series > 0 && run.summary.accepted_series == 0 {
        eprintln!("warning: every series was rejected");
        return Ok(EXIT_ALL_REJECTED);
    }
    Ok(EXIT_OK)
}

fn report(output: &Path) -> Result<i32> {
    let records = read_qc_csv(&output.join(REPORT_FILE_NAME))?;
    print!("{}", summarize(&records));
    Ok(EXIT_OK)
}

fn pool(args: PoolArgs) -> Result<i32> {
    let method = match args.method {
        Method::Mean => "mean",
        Method::Max => "max",
        Method::Topk => "topk",
    };
    let pooling = Pooling::from_parts(method, args.k.map(|k| k as usize))?;
    let table = load_scores_csv(&args.scores)?;
    let pooled = pool_table(&table, pooling)?;
    write_pooled_csv(&pooled, &args.out)?;
    println!("pooled {} patients with {pooling}", pooled.len());
    Ok(EXIT_OK)
}

fn eval(args: EvalArgs) -> Result<i32> {
    if !(0.0..=1.0).contains(&args.threshold) {
        return Err(Error::Config(format!(
            "threshold {} outside [0, 1]",
            args.threshold
        )));
    }
    let a = load_pooled_csv(&args.pooled_a)?;
    let b = load_pooled_csv(&args.pooled_b)?;
    let aligned = align(&a, &b)?;
    let report = evaluate(&aligned, args.threshold)?;
    write_eval(&report, &aligned, &args.out)?;
    print!("{}", report.to_key_values());
    Ok(EXIT_OK)
}

fn montage(args: MontageArgs) -> Result<i32> {
    let cfg = resolve_config(args.config.as_deref())?;
    let columns = args.columns.map_or(cfg.montage_columns, |c| c as usize);
    let vol = read_npy_int16(&args.block)?;
    let [depth, rows, cols] =
        <[usize; 3]>::try_from(vol.shape.as_slice()).map_err(|_| Error::Schema {
            line: 0,
            message: format!("expected a 3-D block, found shape {:?}", vol.shape),
        })?;
    let block = LungBlock {
        voxels: vol.data,
        depth,
        rows,
        cols,
        series_uid: String::new(),
        patient_id: String::new(),
        source_block: (0, depth.saturating_sub(1)),
    };
    write_montage_pgm(&block, &args.out, columns, &cfg.window)?;
    Ok(EXIT_OK)
}

fn phantom(output: &Path) -> Result<i32> {
    let corpus = demo_corpus();
    write_corpus(output, &corpus)?;
    println!(
        "wrote {} phantom series to {}",
        corpus.len(),
        output.display()
    );
    Ok(EXIT_OK)
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Errors are reported on standard error.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Qc(a) => qc(a),
        Command::Report { output } => report(&output),
        Command::Pool(a) => pool(a),
        Command::Eval(a) => eval(a),
        Command::Montage(a) => montage(a),
        Command::Phantom { output } => phantom(&output),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            exit_code(&e)
        }
    }
}
