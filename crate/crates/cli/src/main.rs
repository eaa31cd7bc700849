//! Command line front end: train, evaluate, benchmark, sweep and data
//! generation around the makersim core library.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use makersim_core::feed::save_day;
use makersim_core::harness::output::{
    write_daily_results, write_summary, write_training_curve,
};
use makersim_core::harness::{
    aggregate, eta_sweep, evaluate, load_dataset, run_benchmark, train, BenchStrategy,
    ExperimentConfig, HarnessError,
};
use makersim_core::learn::Learner;

#[derive(Parser)]
#[command(
    name = "makersim",
    version,
    about = "Event-driven limit order book simulator and market-making lab"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config file (flat key=value). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config's random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for result files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Checkpoint path: written by `train`, required by `eval`.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a market maker, then evaluate it on the test days.
    Train(CommonArgs),
    /// Evaluate an existing checkpoint on the test days.
    Eval(CommonArgs),
    /// Run the benchmark strategies over the test days.
    Bench(CommonArgs),
    /// Train and evaluate across a grid of damping factors.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated damping factors; default 0,0.05,...,1.0.
        #[arg(long)]
        etas: Option<String>,
    },
    /// Write the configured synthetic days as event CSV files.
    GenData(CommonArgs),
}

fn load_config(common: &CommonArgs) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Train(common) => {
            let cfg = load_config(&common)?;
            fs::create_dir_all(&common.out)?;
            let dataset = load_dataset(&cfg)?;
            println!(
                "training: {} episodes over {} days ({} test days held out)",
                cfg.episodes,
                dataset.train.len(),
                dataset.test.len()
            );
            let mut run = train(&cfg, &dataset)?;
            write_training_curve(
                common.out.join("training_curve.csv"),
                &run.episodes,
                cfg.curve_window,
            )?;

            let checkpoint = common
                .checkpoint
                .unwrap_or_else(|| common.out.join("checkpoint.bin"));
            let mut file = fs::File::create(&checkpoint)?;
            run.learner.write_to(&mut file)?;
            println!("checkpoint written to {}", checkpoint.display());

            let results = evaluate(&cfg, &dataset.test, &mut run.learner)?;
            write_daily_results(common.out.join("eval_daily.csv"), &results)?;
            let summary = aggregate(&results);
            write_summary(common.out.join("summary.csv"), &[("trained".into(), summary.clone())])?;
            println!(
                "out-of-sample: nd_pnl {:.3} +/- {:.3}, map {:.1} +/- {:.1} over {} days",
                summary.nd_pnl_mean,
                summary.nd_pnl_std,
                summary.map_mean,
                summary.map_mad,
                summary.days
            );
        }
        Command::Eval(common) => {
            let cfg = load_config(&common)?;
            fs::create_dir_all(&common.out)?;
            let checkpoint = common.checkpoint.as_ref().ok_or_else(|| {
                HarnessError::Config("eval requires --checkpoint".to_string())
            })?;
            let mut file = fs::File::open(checkpoint)?;
            let mut learner = Learner::read_from(&mut file, cfg.algo, cfg.seed)?;
            let dataset = load_dataset(&cfg)?;
            let results = evaluate(&cfg, &dataset.test, &mut learner)?;
            write_daily_results(common.out.join("eval_daily.csv"), &results)?;
            let summary = aggregate(&results);
            write_summary(
                common.out.join("summary.csv"),
                &[("checkpoint".into(), summary.clone())],
            )?;
            println!(
                "evaluated {} days: nd_pnl {:.3} +/- {:.3}, map {:.1} +/- {:.1}",
                summary.days,
                summary.nd_pnl_mean,
                summary.nd_pnl_std,
                summary.map_mean,
                summary.map_mad
            );
        }
        Command::Bench(common) => {
            let cfg = load_config(&common)?;
            fs::create_dir_all(&common.out)?;
            let dataset = load_dataset(&cfg)?;
            let mut strategies = vec![];
            for &theta in &cfg.experts {
                strategies.push(BenchStrategy::Fixed(theta));
            }
            strategies.push(BenchStrategy::Random);
            strategies.push(BenchStrategy::Mmmw);
            strategies.push(BenchStrategy::Ftl);

            let mut rows = Vec::new();
            for strategy in strategies {
                let results = run_benchmark(&cfg, &dataset, strategy)?;
                let label = strategy.to_string();
                write_daily_results(common.out.join(format!("bench_{label}.csv")), &results)?;
                let summary = aggregate(&results);
                println!(
                    "{label:>8}: nd_pnl {:.3} +/- {:.3}, map {:.1} +/- {:.1}",
                    summary.nd_pnl_mean, summary.nd_pnl_std, summary.map_mean, summary.map_mad
                );
                rows.push((label, summary));
            }
            write_summary(common.out.join("bench_summary.csv"), &rows)?;
        }
        Command::Sweep { common, etas } => {
            let cfg = load_config(&common)?;
            fs::create_dir_all(&common.out)?;
            let etas: Vec<f64> = match etas {
                Some(list) => list
                    .split(',')
                    .map(|s| {
                        s.trim().parse::<f64>().map_err(|e| {
                            HarnessError::Config(format!("bad eta {s:?}: {e}"))
                        })
                    })
                    .collect::<Result<_, _>>()?,
                None => (0..=20).map(|i| i as f64 * 0.05).collect(),
            };
            let points = eta_sweep(&cfg, &etas)?;
            let mut rows = Vec::new();
            for point in &points {
                write_training_curve(
                    common.out.join(format!("sweep_eta_{:.2}_curve.csv", point.eta)),
                    &point.episodes,
                    cfg.curve_window,
                )?;
                write_daily_results(
                    common.out.join(format!("sweep_eta_{:.2}_daily.csv", point.eta)),
                    &point.eval,
                )?;
                println!(
                    "eta {:.2}: nd_pnl {:.3} +/- {:.3}, map {:.1} +/- {:.1}",
                    point.eta,
                    point.summary.nd_pnl_mean,
                    point.summary.nd_pnl_std,
                    point.summary.map_mean,
                    point.summary.map_mad
                );
                rows.push((format!("eta={:.2}", point.eta), point.summary.clone()));
            }
            write_summary(common.out.join("sweep_summary.csv"), &rows)?;
        }
        Command::GenData(common) => {
            let cfg = load_config(&common)?;
            fs::create_dir_all(&common.out)?;
            let dataset = load_dataset(&cfg)?;
            let mut written = 0usize;
            for day in dataset.train.iter().chain(&dataset.test) {
                save_day(day, common.out.join(format!("{}.csv", day.date)))?;
                written += 1;
            }
            println!("wrote {written} day files to {}", common.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
