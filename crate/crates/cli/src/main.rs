use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use toneshape_cli::commands::{cmd_cluster, cmd_predict, cmd_report, cmd_synth};
use toneshape_cli::{Config, ConfigFile, Overrides};

#[derive(Parser)]
#[command(name = "toneshape", version, about = "Tone n-gram contour shape mining and prediction")]
struct Cli {
    /// TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Corpus directory (default: OUT/corpus).
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Global seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus with planted shape clusters.
    Synth {
        /// Synthetic corpus spec (TOML); built-in defaults when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Mine shape types for every tone n-gram category.
    Cluster,
    /// Train and evaluate shape-type predictors.
    Predict,
    /// Summarize prediction results.
    Report,
}

fn run(cli: Cli) -> toneshape::Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let cfg = Config::resolve(
        file,
        Overrides {
            seed: cli.seed,
            out: cli.out,
            corpus_dir: cli.corpus,
        },
    )?;
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .map_err(|e| toneshape::Error::InvalidInput(e.to_string()))?;
    }
    match cli.command {
        Command::Synth { spec } => cmd_synth(&cfg, spec.as_deref()).map(drop),
        Command::Cluster => cmd_cluster(&cfg).map(drop),
        Command::Predict => cmd_predict(&cfg).map(drop),
        Command::Report => cmd_report(&cfg).map(drop),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
