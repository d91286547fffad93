//! `cellgraph`: volume → graph → features → split → train → eval.
//!
//! Every setting can come from `--config <file>` (plain `key=value` lines,
//! keys as in the flags with `_` for `-`) and be overridden by flags. Each run
//! writes `config.resolved.txt` into its output directory. Failures print one
//! line `error: kind=<kind> message="<text>"` to stderr and exit with code 1
//! (2 for usage errors).

mod commands;
mod config;
mod fail;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Settings;
use fail::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "cellgraph", version, about = "Cell adjacency graph benchmark pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Plain-text key=value settings file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Require --seed, --frame, --features and --k-folds (where used) to be explicit.
    #[arg(long)]
    reproducible: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate layered shell organs with per-cell layer labels.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<String>,
        /// Number of specimens.
        #[arg(long)]
        count: Option<String>,
        /// Cells per layer, outermost first, e.g. 60,30,12,4.
        #[arg(long)]
        layers: Option<String>,
        /// Outer radius in µm.
        #[arg(long)]
        radius: Option<String>,
        #[arg(long)]
        voxel_size: Option<String>,
    },
    /// Validate specimen volumes and labels and write a report.
    Ingest {
        #[command(flatten)]
        common: Common,
        /// Directory of specimen folders holding volume.hdr/.u32 and labels.csv.
        #[arg(long)]
        data_dir: Option<String>,
        /// Class merge: l5-to-l4 or none.
        #[arg(long)]
        merge: Option<String>,
    },
    /// Build and cache cell adjacency graphs.
    Graph {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data_dir: Option<String>,
        /// Surface samples per node and edge.
        #[arg(long)]
        k_samples: Option<String>,
        #[arg(long)]
        merge: Option<String>,
    },
    /// Compute frames and features and write feature bundles.
    Features {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        graph_dir: Option<String>,
        /// label-surf | label-fu | es-trivial | es-pca | trivial
        #[arg(long)]
        frame: Option<String>,
        /// all | invariant-only | covariant-only | degree-profile-only | block+block+...
        #[arg(long)]
        features: Option<String>,
        /// specimen | dataset
        #[arg(long)]
        norm_scope: Option<String>,
        /// Overrides as entity:block:normalization, comma separated.
        #[arg(long)]
        norm: Option<String>,
        #[arg(long)]
        hop_cap: Option<String>,
    },
    /// Stage-stratified specimen split.
    Split {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bundle_dir: Option<String>,
        /// cv | train-val-test
        #[arg(long)]
        split_mode: Option<String>,
        #[arg(long)]
        k_folds: Option<String>,
        #[arg(long)]
        seed: Option<String>,
    },
    /// Train the GCN baseline on one fold and predict every specimen.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bundle_dir: Option<String>,
        /// Split file or the directory holding split.txt.
        #[arg(long)]
        split_file: Option<String>,
        #[arg(long)]
        fold: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        learning_rate: Option<String>,
        #[arg(long)]
        weight_decay: Option<String>,
        #[arg(long)]
        epochs: Option<String>,
        #[arg(long)]
        hidden: Option<String>,
        #[arg(long)]
        dropout: Option<String>,
        #[arg(long)]
        feature_noise: Option<String>,
        #[arg(long)]
        edge_dropout: Option<String>,
        /// true | false
        #[arg(long)]
        layer_norm: Option<String>,
    },
    /// Score predictions against bundle labels.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bundle_dir: Option<String>,
        /// Directory of <specimen>/labels.u8 files.
        #[arg(long)]
        predictions_dir: Option<String>,
        #[arg(long)]
        split_file: Option<String>,
        /// Restrict to the test partition of this fold.
        #[arg(long)]
        fold: Option<String>,
        /// recall | one-vs-all
        #[arg(long)]
        class_score: Option<String>,
    },
}

type Runner = fn(&mut Settings) -> CliResult<String>;

fn dispatch(cmd: Command) -> (Common, Vec<(&'static str, Option<String>)>, Runner) {
    match cmd {
        Command::Synth {
            common,
            seed,
            count,
            layers,
            radius,
            voxel_size,
        } => (
            common,
            vec![
                ("seed", seed),
                ("count", count),
                ("layers", layers),
                ("radius", radius),
                ("voxel_size", voxel_size),
            ],
            commands::synth,
        ),
        Command::Ingest { common, data_dir, merge } => {
            (common, vec![("data_dir", data_dir), ("merge", merge)], commands::ingest)
        }
        Command::Graph {
            common,
            data_dir,
            k_samples,
            merge,
        } => (
            common,
            vec![("data_dir", data_dir), ("k_samples", k_samples), ("merge", merge)],
            commands::graph,
        ),
        Command::Features {
            common,
            graph_dir,
            frame,
            features,
            norm_scope,
            norm,
            hop_cap,
        } => (
            common,
            vec![
                ("graph_dir", graph_dir),
                ("frame", frame),
                ("features", features),
                ("norm_scope", norm_scope),
                ("norm", norm),
                ("hop_cap", hop_cap),
            ],
            commands::features,
        ),
        Command::Split {
            common,
            bundle_dir,
            split_mode,
            k_folds,
            seed,
        } => (
            common,
            vec![
                ("bundle_dir", bundle_dir),
                ("split_mode", split_mode),
                ("k_folds", k_folds),
                ("seed", seed),
            ],
            commands::split,
        ),
        Command::Train {
            common,
            bundle_dir,
            split_file,
            fold,
            seed,
            learning_rate,
            weight_decay,
            epochs,
            hidden,
            dropout,
            feature_noise,
            edge_dropout,
            layer_norm,
        } => (
            common,
            vec![
                ("bundle_dir", bundle_dir),
                ("split_file", split_file),
                ("fold", fold),
                ("seed", seed),
                ("learning_rate", learning_rate),
                ("weight_decay", weight_decay),
                ("epochs", epochs),
                ("hidden", hidden),
                ("dropout", dropout),
                ("feature_noise", feature_noise),
                ("edge_dropout", edge_dropout),
                ("layer_norm", layer_norm),
            ],
            commands::train_cmd,
        ),
        Command::Eval {
            common,
            bundle_dir,
            predictions_dir,
            split_file,
            fold,
            class_score,
        } => (
            common,
            vec![
                ("bundle_dir", bundle_dir),
                ("predictions_dir", predictions_dir),
                ("split_file", split_file),
                ("fold", fold),
                ("class_score", class_score),
            ],
            commands::eval,
        ),
    }
}

fn run(cli: Cli) -> CliResult<String> {
    let (common, mut flags, runner) = dispatch(cli.command);
    flags.push(("out", common.out));
    let mut settings = Settings::load(common.config.as_deref(), flags, common.reproducible)?;
    runner(&mut settings)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", CliError::new("usage", first));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
