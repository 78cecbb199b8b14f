//! `ampnet`: plan → capture → train → eval → run, plus gradcheck and bench.
//!
//! Every command ends by printing one machine-readable summary line to
//! stdout, `status=<ok|fail|error> command=<name> key=value ...`, and exits
//! non-zero unless the status is `ok`.

mod commands;
mod config;
mod summary;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use summary::Summary;

#[derive(Debug, Parser)]
#[command(name = "ampnet", version, about = "Controllable neural guitar-amp modeling pipeline")]
#[command(args_override_self = true)]
pub struct Cli {
    /// TOML file with defaults: top-level keys for global flags, one table
    /// per subcommand (`[train]`, `[capture]`, ...). Command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for data-parallel steps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Only warnings and errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample control configurations and order them into a measurement session.
    Plan(PlanArgs),
    /// Run a session against the virtual amplifier and store a dataset.
    Capture(CaptureArgs),
    /// Train a conditioned LSTM on a captured dataset.
    Train(TrainArgs),
    /// Score a checkpoint on a dataset split and on unseen control settings.
    Eval(EvalArgs),
    /// Process an audio file through a checkpoint.
    Run(RunArgs),
    /// Compare analytic gradients against finite differences.
    Gradcheck(GradcheckArgs),
    /// Measure single-stream inference throughput.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct DataDir {
    /// Working directory for sessions, datasets and models.
    #[arg(long, env = "AMPNET_DATA_DIR", default_value = "ampnet-data")]
    pub data_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub dir: DataDir,
    /// Control space, `name[:levels],...`; `amp` for the five amp knobs,
    /// `none` for no controls.
    #[arg(long, default_value = "amp")]
    pub controls: String,
    /// Number of configurations to sample.
    #[arg(long, short = 'n', default_value_t = 500)]
    pub count: usize,
    /// Session file (default: <data-dir>/session.jsonl).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CaptureArgs {
    #[command(flatten)]
    pub dir: DataDir,
    #[arg(long)]
    pub session: Option<PathBuf>,
    /// Directory of excitation WAV files; a synthetic corpus is generated
    /// when omitted.
    #[arg(long)]
    pub corpus_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 8000)]
    pub sample_rate: u32,
    #[arg(long, default_value_t = 0.5)]
    pub segment_seconds: f64,
    #[arg(long, default_value_t = 500)]
    pub train: usize,
    #[arg(long, default_value_t = 100)]
    pub val: usize,
    /// Dataset directory (default: <data-dir>/dataset).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub dir: DataDir,
    /// Dataset manifest or directory (default: <data-dir>/dataset).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Checkpoint path (default: <data-dir>/model.ampnet).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report directory (default: <data-dir>/train).
    #[arg(long)]
    pub report_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    pub hidden: usize,
    #[arg(long, default_value_t = 4)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 20_000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.9)]
    pub beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    pub beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    /// `esr` or `mse`.
    #[arg(long, default_value = "esr")]
    pub loss: String,
    #[arg(long, default_value_t = 1000)]
    pub warmup: usize,
    #[arg(long, default_value_t = 1000)]
    pub validate_every: usize,
    /// Save the best checkpoint so far every N iterations (0: only at the end).
    #[arg(long, default_value_t = 0)]
    pub checkpoint_every: usize,
    /// BPTT window length; full segment when omitted.
    #[arg(long)]
    pub truncation: Option<usize>,
    #[arg(long)]
    pub grad_clip: Option<f64>,
    /// Cosine-anneal the learning rate to this fraction of `--lr`.
    #[arg(long)]
    pub lr_final_fraction: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub head_init_scale: f64,
    /// Evaluate minibatch elements sequentially.
    #[arg(long)]
    pub strict_deterministic: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub dir: DataDir,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// `validation`, `train` or `unassigned`.
    #[arg(long, default_value = "validation")]
    pub split: String,
    /// Seen/unseen probe pairs for the control-interpolation test (0 skips it).
    #[arg(long, default_value_t = 50)]
    pub probes: usize,
    #[arg(long)]
    pub corpus_dir: Option<PathBuf>,
    /// Rows of the per-example table to log, worst first.
    #[arg(long, default_value_t = 10)]
    pub show: usize,
    /// Write the full report as JSON here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    #[arg(long, short = 'o')]
    pub output: PathBuf,
    /// Initial control values: `name=value,...`; unnamed controls stay at 0.5.
    #[arg(long, default_value = "")]
    pub set: String,
    /// Timed control moves, `time_s control value` per line.
    #[arg(long)]
    pub automation: Option<PathBuf>,
    /// Cabinet impulse response (WAV).
    #[arg(long)]
    pub ir: Option<PathBuf>,
    /// Match the output RMS to this file's RMS.
    #[arg(long)]
    pub loudness_reference: Option<PathBuf>,
    /// Control smoothing time constant in seconds.
    #[arg(long)]
    pub smoothing: Option<f64>,
    #[arg(long, default_value_t = 64)]
    pub block_size: usize,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 4)]
    pub hidden: usize,
    #[arg(long, default_value_t = 3)]
    pub inputs: usize,
    #[arg(long, default_value_t = 8)]
    pub steps: usize,
    #[arg(long, default_value_t = 2)]
    pub channels: usize,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Benchmark this checkpoint instead of a random model.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    pub hidden: usize,
    /// Controls of the random model.
    #[arg(long, default_value_t = 5)]
    pub control_count: usize,
    /// Seconds of 48 kHz audio to process.
    #[arg(long, default_value_t = 10.0)]
    pub seconds: f64,
    #[arg(long, default_value_t = 64)]
    pub block_size: usize,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Plan(_) => "plan",
            Command::Capture(_) => "capture",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Run(_) => "run",
            Command::Gradcheck(_) => "gradcheck",
            Command::Bench(_) => "bench",
        }
    }
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let args = match config::merge_config(raw) {
        Ok(a) => a,
        Err(e) => {
            println!("{}", Summary::error("config", &e));
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);

    let level = match (cli.quiet, cli.verbose) {
        (true, _) => "warn",
        (false, 0) => "info",
        (false, 1) => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            println!("{}", Summary::error(cli.command.name(), &e.into()));
            return ExitCode::from(2);
        }
    }

    let name = cli.command.name();
    match commands::dispatch(&cli) {
        Ok(summary) => {
            println!("{summary}");
            if summary.is_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            log::error!("{e:#}");
            println!("{}", Summary::error(name, &e));
            ExitCode::FAILURE
        }
    }
}
