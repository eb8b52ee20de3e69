use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bnbp::commands::{self, settings, AsymptoticsOptions, ClassifyOptions, TrainOptions};
use bnbp::corpus::ToyBarsSpec;

#[derive(Parser)]
#[command(
    name = "bnbp",
    version,
    about = "Beta-negative binomial process simulation and topic-model inference"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SeedArg {
    /// Random seed (defaults to $BNBP_SEED, then 0).
    #[arg(long, env = "BNBP_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate cluster growth as the negative binomial shape r increases.
    SimulateAsymptotics {
        #[arg(long, default_value_t = 3.0)]
        mass: f64,
        #[arg(long, default_value_t = 3.0)]
        concentration: f64,
        /// Comma-separated discounts; 0 gives the two-parameter process.
        #[arg(long, value_delimiter = ',', default_value = "0,0.5")]
        discounts: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        r_min: f64,
        #[arg(long, default_value_t = 1001.0)]
        r_max: f64,
        #[arg(long, default_value_t = 51)]
        points: usize,
        #[arg(long, default_value_t = 10)]
        replicates: usize,
        /// Weight floor of the ordinary-atom simulation.
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, short, default_value = "asymptotics")]
        out: PathBuf,
    },
    /// Train a topic model on a corpus.
    Train {
        corpus: PathBuf,
        /// Vocabulary file (one token per line) fixing the vocabulary size.
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Flat key = value configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Setting override, e.g. --set mode=finite-k (repeatable).
        #[arg(long = "set", value_parser = settings::parse_override)]
        overrides: Vec<(String, String)>,
        /// Train only on documents with this group label.
        #[arg(long)]
        group: Option<String>,
        /// Seed override (also read from $BNBP_SEED).
        #[arg(long, env = "BNBP_SEED")]
        seed: Option<u64>,
        /// Continue from the checkpoint in the output directory.
        #[arg(long)]
        resume: bool,
        #[arg(long, default_value_t = 100)]
        checkpoint_every: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Classify documents by their likelihood under per-group models.
    Classify {
        corpus: PathBuf,
        /// Model directory (repeatable), one per group.
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Document-weight draws per posterior sample.
        #[arg(long, default_value_t = 20)]
        inner_samples: usize,
        /// Use at most this many posterior samples per model.
        #[arg(long)]
        max_samples: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Write the toy-bars corpus.
    MakeToyBars {
        #[arg(long, default_value_t = 50)]
        documents: usize,
        #[arg(long, default_value_t = 100)]
        words: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, short)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> bnbp::Result<()> {
    match cli.command {
        Command::SimulateAsymptotics {
            mass,
            concentration,
            discounts,
            r_min,
            r_max,
            points,
            replicates,
            epsilon,
            seed,
            out,
        } => {
            let opts = AsymptoticsOptions {
                mass,
                concentration,
                discounts,
                r_min,
                r_max,
                points,
                replicates,
                epsilon,
                seed: seed.seed,
                out_dir: out,
            };
            for f in commands::simulate_asymptotics(&opts)? {
                let pref = f
                    .fitted_prefactor
                    .zip(f.target_prefactor)
                    .map(|(p, t)| format!(" prefactor={p} target={t}"));
                println!(
                    "discount={} axis={:?} slope={} target={}{}",
                    f.discount,
                    f.axis,
                    f.slope,
                    f.target_slope,
                    pref.unwrap_or_default()
                );
            }
        }
        Command::Train {
            corpus,
            vocab,
            config,
            overrides,
            group,
            seed,
            resume,
            checkpoint_every,
            out,
        } => {
            let mut all = match config {
                Some(path) => settings::read_settings(&path)?,
                None => Vec::new(),
            };
            all.extend(overrides);
            if let Some(s) = seed.filter(|_| !resume) {
                all.push(("seed".into(), s.to_string()));
            }
            let opts = TrainOptions {
                corpus,
                vocab,
                settings: all,
                group,
                out_dir: out,
                resume,
                checkpoint_every,
            };
            let s = commands::train(&opts)?;
            println!(
                "iterations={} retained={} components={} used_components={} b0_acceptance={:.3}",
                s.iterations,
                s.retained,
                s.final_components,
                s.final_used_components,
                s.acceptance_rate
            );
        }
        Command::Classify {
            corpus,
            models,
            vocab,
            inner_samples,
            max_samples,
            seed,
            out,
        } => {
            let opts = ClassifyOptions {
                models,
                corpus,
                vocab,
                inner_samples,
                max_samples,
                seed: seed.seed,
                out_dir: out,
            };
            let (_, matrix) = commands::classify(&opts)?;
            println!("accuracy={}", matrix.accuracy());
        }
        Command::MakeToyBars {
            documents,
            words,
            seed,
            out,
        } => {
            let spec = ToyBarsSpec {
                documents,
                words_per_document: words,
            };
            let c = commands::make_toy_bars_file(spec, seed.seed, &out)?;
            println!(
                "documents={} vocab_size={}",
                c.documents.len(),
                c.vocab_sizes[0]
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
