use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use faasprov::commands::*;
use faasprov::error::Result;
use faasprov::predictor::{Hyperparams, LossKind};

#[derive(Parser)]
#[command(name = "faasprov", version, about = "Replica and container sizing for serverless pipelines")]
struct Cli {
    /// Seed for every random choice of the command.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel grid cells (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the built-in suite and write one training CSV per function.
    Datagen {
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Train a replica-class predictor from a dataset CSV.
    Train(TrainCli),
    /// Choose a configuration per function of a pipeline.
    Select(SelectCli),
    /// Graph edit distance between two call graphs.
    Ged {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        exact: bool,
    },
    /// Run an experiment descriptor and write its report bundle.
    Experiment {
        spec: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        quantile: Option<f64>,
    },
}

#[derive(Args)]
struct TrainCli {
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch metrics CSV (default: <model stem>.metrics.csv).
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Hyperparameters JSON; fields left out keep their defaults.
    #[arg(long)]
    hyperparams: Option<PathBuf>,
    #[arg(long)]
    loss: Option<LossKind>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    catalog: Option<PathBuf>,
}

#[derive(Args)]
struct SelectCli {
    #[arg(long)]
    pipeline: PathBuf,
    #[arg(long)]
    cluster: PathBuf,
    #[arg(long)]
    catalog: PathBuf,
    #[arg(long)]
    models: PathBuf,
    #[arg(long)]
    pricing: Option<PathBuf>,
    #[arg(long)]
    rate: Option<f64>,
    /// Report JSON (printed to standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also run the grid-search oracle and write its table to this CSV.
    #[arg(long, value_name = "TABLE")]
    oracle: Option<PathBuf>,
    #[arg(long)]
    workload: Option<PathBuf>,
    #[arg(long, default_value_t = faasprov::sim::DEFAULT_QUANTILE)]
    quantile: f64,
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        // only fails when a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Datagen { out_dir } => {
            for p in cmd_datagen(&out_dir, cli.seed.unwrap_or(0))? {
                println!("{}", p.display());
            }
        }
        Command::Train(t) => {
            let mut hyperparams: Hyperparams = match &t.hyperparams {
                Some(p) => faasprov::formats::read_json(p)?,
                None => Hyperparams::default(),
            };
            if let Some(loss) = t.loss {
                hyperparams.loss = loss;
            }
            if let Some(e) = t.epochs {
                hyperparams.epochs = e;
            }
            if let Some(s) = cli.seed {
                hyperparams.seed = s;
            }
            let m = cmd_train(&TrainArgs {
                dataset: t.dataset,
                out: t.out,
                metrics: t.metrics,
                hyperparams,
                catalog: t.catalog,
            })?;
            println!(
                "accuracy {:.4} f1 {:.4} precision {:.4} recall {:.4} loss {:.6}",
                m.accuracy, m.f1, m.precision, m.recall, m.loss
            );
        }
        Command::Select(s) => {
            let print = s.out.is_none();
            let report = cmd_select(&SelectArgs {
                pricing: s.pricing,
                rate: s.rate,
                out: s.out,
                oracle_table: s.oracle,
                workload: s.workload,
                quantile: s.quantile,
                ..SelectArgs::new(s.pipeline, s.cluster, s.catalog, s.models)
            })?;
            if print {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                for f in &report.functions {
                    println!("{} {}", f.function, f.configuration);
                }
            }
        }
        Command::Ged { a, b, exact } => {
            println!("{}", cmd_ged(&a, &b, exact)?.distance);
        }
        Command::Experiment {
            spec,
            threshold,
            quantile,
        } => {
            let overrides = ExperimentOverrides {
                seed: cli.seed,
                threshold,
                quantile,
            };
            let outcome = cmd_experiment(&spec, overrides)?;
            for c in &outcome.checks {
                println!("{}", c.line());
            }
            println!("artifacts in {}", outcome.output_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
