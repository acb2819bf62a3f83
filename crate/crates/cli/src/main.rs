mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

/// Accent classification with a variable-filter-height CNN.
#[derive(Debug, Parser)]
#[command(name = "vfnet", version)]
struct Cli {
    /// Flat `key = value` config file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Root seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override any config key, e.g. `--set epochs=5`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic band-limited WAV corpus and its manifest.
    Synth {
        #[arg(long)]
        out_dir: Option<String>,
        #[arg(long)]
        clips_per_class: Option<String>,
    },
    /// Turn a manifest of WAV files into a segment store.
    Preprocess {
        #[arg(long)]
        manifest: Option<String>,
        #[arg(long = "out")]
        store: Option<String>,
    },
    /// Split a segment store into speaker-disjoint train and test stores.
    Split {
        #[arg(long)]
        store: Option<String>,
        #[arg(long)]
        train_out: Option<String>,
        #[arg(long)]
        test_out: Option<String>,
    },
    /// Train on one store, tracking accuracy on another.
    Train {
        #[arg(long)]
        train_store: Option<String>,
        #[arg(long)]
        eval_store: Option<String>,
        #[arg(long)]
        out_dir: Option<String>,
    },
    /// Confusion matrices and accuracies of trained parameters on a store.
    Eval {
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        store: Option<String>,
        #[arg(long)]
        out_dir: Option<String>,
    },
    /// Classify one WAV file.
    Infer {
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        wav: Option<String>,
    },
}

impl Command {
    fn flags(&self) -> Vec<(&'static str, &Option<String>)> {
        match self {
            Command::Synth { out_dir, clips_per_class } => {
                vec![("out_dir", out_dir), ("clips_per_class", clips_per_class)]
            }
            Command::Preprocess { manifest, store } => vec![("manifest", manifest), ("store", store)],
            Command::Split { store, train_out, test_out } => {
                vec![("store", store), ("train_out", train_out), ("test_out", test_out)]
            }
            Command::Train { train_store, eval_store, out_dir } => vec![
                ("train_store", train_store),
                ("eval_store", eval_store),
                ("out_dir", out_dir),
            ],
            Command::Eval { params, store, out_dir } => {
                vec![("params", params), ("store", store), ("out_dir", out_dir)]
            }
            Command::Infer { params, wav } => vec![("params", params), ("wav", wav)],
        }
    }
}

fn resolve(cli: &Cli) -> vfnet::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.merge_file(path)?;
    }
    for pair in &cli.overrides {
        cfg.set_pair(pair)?;
    }
    if let Some(seed) = cli.seed {
        cfg.set("seed", seed.to_string())?;
    }
    for (key, value) in cli.command.flags() {
        if let Some(v) = value {
            cfg.set(key, v.clone())?;
        }
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> vfnet::Result<()> {
    let cfg = resolve(cli)?;
    log::debug!("effective config:\n{}", cfg.render());
    match cli.command {
        Command::Synth { .. } => commands::synth(&cfg),
        Command::Preprocess { .. } => commands::preprocess(&cfg),
        Command::Split { .. } => commands::split(&cfg),
        Command::Train { .. } => commands::train(&cfg),
        Command::Eval { .. } => commands::eval(&cfg),
        Command::Infer { .. } => commands::infer(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.code(), e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
