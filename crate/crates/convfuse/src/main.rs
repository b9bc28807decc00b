use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use convfuse::error::{Error, Result};
use convfuse::files::{load_params, save_params};
use convfuse::formats::{read_scores, write_fold_report, write_roc, write_scores, write_train_report};
use convfuse::pipeline::{
    evaluate_scores, fuse_scores, prepare, score_fold, synthesize, train_fold, Corpus, PrepareConfig, TrainRequest,
};
use convfuse_core::data::{SynthConfig, DEFAULT_FOLDS};
use convfuse_core::evaluation::{FusionKind, DEFAULT_THRESHOLD};
use convfuse_core::models::count_trainable_parameters;
use convfuse_core::training::{TrainConfig, TrainMode};

/// Two-network ConvNet ensemble for benign/porn image and video
/// classification on a desk-scale corpus.
#[derive(Parser)]
#[command(name = "convfuse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Net {
    Anet,
    Gnet,
}

impl Net {
    fn name(self) -> &'static str {
        match self {
            Net::Anet => "anet",
            Net::Gnet => "gnet",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Full,
    Finetune,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fusion {
    Avg,
    Max,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic two-class video corpus and its manifest.
    Synth {
        #[arg(long, default_value_t = 100)]
        videos_per_class: usize,
        #[arg(long, default_value_t = 10)]
        shots: usize,
        #[arg(long, default_value_t = 74)]
        side: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Assign video-grouped folds and compute per-fold mean images.
    Prepare {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 74)]
        side: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one network on every fold but the held-out one.
    Train {
        #[arg(long, value_enum)]
        net: Net,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        fold: usize,
        #[arg(long)]
        manifest: PathBuf,
        /// Output parameter file.
        #[arg(long)]
        out: PathBuf,
        /// Per-epoch loss CSV.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        momentum: Option<f64>,
        #[arg(long)]
        weight_decay: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score the held-out frames of a fold.
    Score {
        #[arg(long)]
        net_params: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        fold: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fuse scores, sweep the ROC and report per-fold video accuracy.
    Report {
        /// Comma-separated score files of one network; give the flag twice
        /// to fuse two networks.
        #[arg(long, required = true, action = clap::ArgAction::Append)]
        scores: Vec<String>,
        #[arg(long, value_enum, default_value = "avg")]
        fusion: Fusion,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        roc: Option<PathBuf>,
        /// Fold report CSV.
        #[arg(long)]
        out: PathBuf,
    },
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::config(format!("{} does not exist", path.display())))
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            videos_per_class,
            shots,
            side,
            seed,
            out,
        } => {
            let cfg = SynthConfig {
                videos_per_class,
                shots_per_video: shots,
                side,
                seed,
            };
            cfg.validate()?;
            let manifest = synthesize(&cfg, &out)?;
            println!("wrote {} frames to {}", manifest.len(), out.display());
        }
        Command::Prepare {
            manifest,
            folds,
            seed,
            side,
            out,
        } => {
            require_file(&manifest)?;
            let prepared = prepare(&manifest, &PrepareConfig { folds, seed, side }, &out)?;
            println!(
                "assigned {} videos to {folds} folds in {}",
                prepared.videos().len(),
                out.display()
            );
        }
        Command::Train {
            net,
            mode,
            fold,
            manifest,
            out,
            report,
            epochs,
            batch_size,
            lr,
            momentum,
            weight_decay,
            seed,
        } => {
            require_file(&manifest)?;
            let mode = match mode {
                Mode::Full => TrainMode::Full,
                Mode::Finetune => TrainMode::FineTune,
            };
            let defaults = TrainConfig::defaults(mode);
            let config = TrainConfig {
                epochs: epochs.unwrap_or(defaults.epochs),
                batch_size: batch_size.unwrap_or(defaults.batch_size),
                learning_rate: lr.unwrap_or(defaults.learning_rate),
                momentum: momentum.unwrap_or(defaults.momentum),
                weight_decay: weight_decay.unwrap_or(defaults.weight_decay),
                seed,
                mode,
            };
            config.validate()?;
            let corpus = Corpus::open(&manifest)?;
            let request = TrainRequest {
                net: net.name().into(),
                fold,
                config,
            };
            let outcome = train_fold(&corpus, &request)?;
            save_params(&out, &outcome.spec, &outcome.params)?;
            if let Some(path) = report {
                write_train_report(&path, &outcome.report)?;
            }
            println!("trainable parameters: {}", count_trainable_parameters(&outcome.spec));
            for (e, loss) in outcome.report.epoch_losses.iter().enumerate() {
                println!("epoch {} mean loss {loss:.6}", e + 1);
            }
            eprintln!("trained in {:.1?}", outcome.report.wall_time);
        }
        Command::Score {
            net_params,
            manifest,
            fold,
            out,
        } => {
            require_file(&net_params)?;
            require_file(&manifest)?;
            let corpus = Corpus::open(&manifest)?;
            let (spec, params) = load_params(&net_params)?;
            let rows = score_fold(&corpus, &spec, &params, fold)?;
            write_scores(&out, &rows)?;
            println!("scored {} frames of fold {fold}", rows.len());
        }
        Command::Report {
            scores,
            fusion,
            manifest,
            threshold,
            roc,
            out,
        } => {
            require_file(&manifest)?;
            let groups = group_score_files(&scores)?;
            for path in groups.iter().flatten() {
                require_file(path)?;
            }
            let mut sets = Vec::new();
            for group in &groups {
                let mut rows = Vec::new();
                for path in group {
                    rows.extend(read_scores(path)?);
                }
                sets.push(rows);
            }
            let rows = match sets.as_slice() {
                [single] => single.clone(),
                [a, b] => {
                    let kind = match fusion {
                        Fusion::Avg => FusionKind::Average,
                        Fusion::Max => FusionKind::Max,
                    };
                    fuse_scores(a, b, kind)?
                }
                _ => unreachable!("grouping yields one or two sets"),
            };
            let corpus = Corpus::open(&manifest)?;
            let eval = evaluate_scores(&corpus.manifest, &rows, threshold)?;
            write_fold_report(&out, &eval.summary)?;
            if let Some(path) = roc {
                write_roc(&path, &eval.roc)?;
            }
            for f in &eval.summary.folds {
                println!(
                    "fold {} benign {:.4} porn {:.4} balanced {:.4}",
                    f.fold, f.benign_accuracy, f.porn_accuracy, f.balanced_accuracy
                );
            }
            println!("balanced accuracy {:.4} +- {:.4}", eval.summary.mean, eval.summary.std);
        }
    }
    Ok(())
}

/// One path list per `--scores` flag.
fn group_score_files(raw: &[String]) -> Result<Vec<Vec<PathBuf>>> {
    if raw.len() > 2 {
        return Err(Error::config("--scores may be given at most twice"));
    }
    raw.iter()
        .map(|list| {
            let paths: Vec<PathBuf> = list.split(',').filter(|p| !p.is_empty()).map(PathBuf::from).collect();
            if paths.is_empty() {
                Err(Error::config("--scores needs at least one file"))
            } else {
                Ok(paths)
            }
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
