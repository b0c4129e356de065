//! `pcos-screen`: command-line pipeline for binary ultrasound
//! classification with MixUp/CutMix regularization and visual attribution.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 runtime or
//! training failure.

mod commands;
mod config;

use clap::{Parser, Subcommand, ValueEnum};
use pcos_screen_core::dataset::Split;
use pcos_screen_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "pcos-screen",
    version,
    about = "Ultrasound PCOS screening: ingest, train, sweep, evaluate, explain"
)]
struct Cli {
    /// Pin all nondeterminism sources (disables scan parallelism; training
    /// and evaluation are always seeded and single-threaded).
    #[arg(long, global = true)]
    deterministic: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SplitArg {
    Train,
    Val,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Split {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Val => Split::Val,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Scan the two-class image directory, deduplicate, write the manifest.
    Ingest {
        #[arg(long)]
        config: PathBuf,
    },
    /// Full pass: split, augment, train, checkpoint, evaluate, plot.
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// One training run per (mixup_alpha, cutmix_alpha) grid-file row.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Grid file: one alpha pair per line, `#` comments allowed.
        #[arg(long)]
        grid: PathBuf,
    },
    /// Score a checkpoint on one split of a manifest.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        split: SplitArg,
        /// Output directory for the metrics report and confusion PNG.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write attribution overlays for one image.
    Explain {
        #[arg(long)]
        method: commands::explain::Method,
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Superpixel count for lime/shapley.
        #[arg(long, default_value_t = 9)]
        n_segments: usize,
        /// Perturbation sample count for lime.
        #[arg(long, default_value_t = 1000)]
        lime_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Before/after PNG pairs showing the configured augmentation.
    AugmentPreview {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Batch size of the preview.
        #[arg(long, default_value_t = 4)]
        count: usize,
    },
}

/// Usage and configuration problems exit 2; runtime failures exit 3.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::Layout(_)
        | Error::EmptyDataset(_)
        | Error::InvalidImage(_)
        | Error::ShapeMismatch(_)
        | Error::Parameter(_)
        | Error::InfeasibleSplit(_)
        | Error::Input(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let deterministic = cli.deterministic;

    let outcome: Result<u8, Error> = match cli.command {
        Command::Ingest { config } => {
            commands::ingest::run(&config, deterministic).map(|()| 0)
        }
        Command::Train { config } => commands::train::run(&config, deterministic).map(|_| 0),
        Command::Sweep { config, grid } => commands::sweep::run(&config, &grid, deterministic)
            .map(|all_ok| if all_ok { 0 } else { 3 }),
        Command::Evaluate {
            checkpoint,
            manifest,
            split,
            out,
        } => commands::evaluate::run(&checkpoint, &manifest, split.into(), &out).map(|()| 0),
        Command::Explain {
            method,
            image,
            checkpoint,
            out,
            n_segments,
            lime_samples,
            seed,
        } => commands::explain::run(
            method,
            &image,
            &checkpoint,
            &out,
            n_segments,
            lime_samples,
            seed,
        )
        .map(|()| 0),
        Command::AugmentPreview { config, out, count } => {
            commands::preview::run(&config, out.as_deref(), count, deterministic).map(|_| 0)
        }
    };

    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(exit_code_for(&err))
        }
    }
}
