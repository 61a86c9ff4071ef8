//! `codec25`: checkpoint surgery, fine-tuning, corpus preparation,
//! tokenization and evaluation from the command line.

mod commands;
#[cfg(test)]
mod tests;
mod tokens;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "codec25", version, about, arg_required_else_help = true)]
struct Cli {
    /// Seed for initialization, sampling and the stub scorer.
    #[arg(long, global = true, env = "CODEC25_SEED")]
    seed: Option<u64>,
    /// Log progress to stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a calibrated 50 Hz / 16 kHz desk baseline checkpoint.
    Init {
        #[arg(long)]
        dst: PathBuf,
    },
    /// Move a checkpoint to a new hop size and latent rate.
    Transfer(TransferArgs),
    /// Fine-tune the decoder of a retargeted checkpoint.
    Train(TrainArgs),
    /// Resample, trim silence and select the evaluation subset.
    Prep(PrepArgs),
    /// Encode a wav file to a token text file.
    Encode {
        #[arg(long)]
        model: PathBuf,
        input: PathBuf,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode a token text file to a wav file.
    Decode {
        #[arg(long)]
        model: PathBuf,
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Encoding::Pcm16)]
        encoding: Encoding,
    },
    /// Round-trip and score every clip of a manifest.
    Eval(EvalArgs),
    /// Combine evaluation sidecars into a table and a bar chart.
    Report {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        figure: PathBuf,
        /// Evaluation sidecars or bare model summaries (JSON).
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Print the effective training configuration as TOML.
    Config(ConfigArgs),
}

#[derive(Args)]
struct TransferArgs {
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    dst: PathBuf,
    #[arg(long, default_value_t = 960)]
    target_hop: usize,
    /// Pooling as KERNELxSTRIDE.
    #[arg(long, default_value = "2x2")]
    pool: String,
    #[arg(long, default_value_t = 24_000)]
    target_rate: u32,
    #[arg(long, value_enum, default_value_t = HeadInitArg::Interpolate)]
    head_init: HeadInitArg,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// TOML file with any subset of the config keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    profile: Option<String>,
    /// Override one key, e.g. `--set max_lr=5e-5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, conflicts_with = "synthetic")]
    train_manifest: Option<PathBuf>,
    /// Train on this many synthetic clips instead of a manifest.
    #[arg(long, default_value_t = 200)]
    synthetic: usize,
    /// Length of each synthetic clip; defaults to the crop length.
    #[arg(long)]
    synthetic_seconds: Option<f64>,
    #[arg(long, conflicts_with = "val_synthetic")]
    val_manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    val_synthetic: usize,
}

#[derive(Args)]
struct PrepArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    min_silence: f64,
    #[arg(long, default_value_t = 20)]
    frame_ms: u32,
    #[arg(long, default_value_t = -40.0, allow_negative_numbers = true)]
    threshold_db: f64,
    /// Evaluation clips must be shorter than this many seconds.
    #[arg(long, default_value_t = 20.0)]
    max_dur: f64,
    /// Evaluation clips per language.
    #[arg(long, default_value_t = 500)]
    cap: usize,
    #[arg(long, default_value_t = 24_000)]
    target_rate: u32,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Defaults to the checkpoint file stem.
    #[arg(long)]
    model_id: Option<String>,
    /// External MOS predictor; `{path}` is replaced by the wav path.
    /// Without it the deterministic stub scorer is used.
    #[arg(long)]
    scorer_cmd: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeadInitArg {
    Interpolate,
    Reinitialize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoding {
    Pcm16,
    Float32,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::FAILURE
        }
    }
}

/// `error[<category>]: <message>` on one line.
fn error_line(e: &codec25::Error) -> String {
    let message = e.to_string().lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join(" | ");
    format!("error[{}]: {message}", e.category())
}
