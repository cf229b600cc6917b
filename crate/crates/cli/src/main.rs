use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use synembed::features::DEFAULT_UBER_CAP;
use synembed::{Error, Result};
use synembed_cli::commands::{
    cmd_compare, cmd_extract, cmd_predict, cmd_sweep, cmd_train, RunOptions,
};
use synembed_cli::selftest::cmd_selftest;
use synembed_cli::{exit_code, OUT_DIR_ENV};

#[derive(Parser, Debug)]
#[command(
    name = "synembed",
    version,
    about = "Graph-optimized linguistic feature embeddings for readability assessment"
)]
struct Cli {
    /// Experiment config (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for cross-validation folds
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Per-grade TPR from the best fold model applied to the whole dataset
    #[arg(long, global = true)]
    paper_mode_tpr: bool,
    /// Output directory
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "synembed-out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute shallow features for a directory of .txt files
    Extract {
        #[arg(long)]
        text_dir: PathBuf,
        /// CSV with header doc_id,label
        #[arg(long)]
        labels: PathBuf,
        /// Output CSV (default: <out-dir>/features.csv)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_UBER_CAP)]
        uber_cap: f64,
    },
    /// Cross-validate the configured pipeline and save a final model
    Train,
    /// Predict grades with a saved model
    Predict {
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        semantic: Option<PathBuf>,
        /// Output CSV (default: <out-dir>/predictions.csv)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate once per correlation threshold
    Sweep {
        /// Comma-separated thresholds
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.4,0.5,0.6,0.7,0.8")]
        thresholds: Vec<f64>,
    },
    /// t-test two evaluation reports
    Compare {
        report_a: PathBuf,
        report_b: PathBuf,
        #[arg(long)]
        unpaired: bool,
    },
    /// Check that built-in defaults match the documentation
    Selftest,
}

fn config_path(cli: &Cli) -> Result<&PathBuf> {
    cli.config
        .as_ref()
        .ok_or_else(|| Error::config("this command needs --config"))
}

fn run(cli: &Cli) -> Result<()> {
    let opts = RunOptions {
        seed: cli.seed,
        jobs: cli.jobs.max(1),
        paper_mode_tpr: cli.paper_mode_tpr,
        out_dir: cli.out_dir.clone(),
    };
    match &cli.command {
        Command::Extract {
            text_dir,
            labels,
            out,
            uber_cap,
        } => {
            let out = out
                .clone()
                .unwrap_or_else(|| opts.out_dir.join("features.csv"));
            let n = cmd_extract(text_dir, labels, &out, *uber_cap)?;
            println!("wrote {n} documents to {}", out.display());
        }
        Command::Train => {
            let out = cmd_train(config_path(cli)?, &opts)?;
            print!("{}", std::fs::read_to_string(&out.report_txt)?);
            println!("model written to {}", out.artifact.display());
        }
        Command::Predict {
            artifact,
            features,
            semantic,
            out,
        } => {
            let out = out
                .clone()
                .unwrap_or_else(|| opts.out_dir.join("predictions.csv"));
            let probs = cmd_predict(artifact, features, semantic.as_deref(), &out)?;
            println!("wrote {} predictions to {}", probs.nrows(), out.display());
        }
        Command::Sweep { thresholds } => {
            let rows = cmd_sweep(config_path(cli)?, thresholds, &opts)?;
            print!("{}", synembed::eval::render_sweep(&rows));
        }
        Command::Compare {
            report_a,
            report_b,
            unpaired,
        } => {
            let cmp = cmd_compare(report_a, report_b, *unpaired, &opts.out_dir)?;
            print!("{}", cmp.render());
        }
        Command::Selftest => {
            for line in cmd_selftest()? {
                println!("{line}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
