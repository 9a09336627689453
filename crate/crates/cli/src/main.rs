//! Command-line experiment driver.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use spikecol::runner::{
    self, baseline_presets, parse_config_file, Experiment, ExperimentConfig, RunReport, SweepGrid,
};

#[derive(Parser)]
#[command(
    name = "spikecol",
    about = "Spiking-column online clustering simulator",
    long_about = "Streams noisy digit patterns through a spiking column with online \
                  synapse-local learning, scores the resulting clustering, and writes \
                  CSV reports. Without dataset paths a bundled synthetic alphabet is used."
)]
struct Args {
    /// Plain-text `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Experiment family: baseline, sweep, odd-even, rf18, temporal,
    /// ablation-step, or kmeans.
    #[arg(long)]
    experiment: Option<String>,

    /// Master seed for the run.
    #[arg(long)]
    seed: Option<u64>,

    /// MNIST-style IDX image file.
    #[arg(long)]
    mnist_images: Option<PathBuf>,

    /// MNIST-style IDX label file.
    #[arg(long)]
    mnist_labels: Option<PathBuf>,

    /// Directory for CSV reports and weight snapshots.
    #[arg(long)]
    out_dir: Option<PathBuf>,

    /// Worker threads for sweeps and multi-seed batches.
    #[arg(long)]
    threads: Option<usize>,
}

fn apply_experiment_defaults(config: &mut ExperimentConfig) {
    match config.experiment {
        Experiment::OddEven => {
            // odd metrics over 10K..20K, even metrics over the last 10K of 70K
            config.warmup = 10_000;
            config.eval = 10_000;
            config.length = Some(70_000);
            if config.config_id == "search3" {
                config.config_id = "odd-even-search3".into();
            }
        }
        Experiment::Rf18 => {
            if config.rf_size == 8 {
                *config = ExperimentConfig {
                    experiment: Experiment::Rf18,
                    seed: config.seed,
                    mnist_images: config.mnist_images.take(),
                    mnist_labels: config.mnist_labels.take(),
                    out_dir: config.out_dir.take(),
                    ..runner::preset("rf18-search4").expect("stock preset exists")
                };
            }
        }
        Experiment::Temporal => {
            if config.theta_f.is_none() {
                config.theta_f = Some(512);
            }
        }
        Experiment::AblationStep => {
            config.response = spikecol::ResponseKind::Step;
            if config.config_id == "search3" {
                config.config_id = "ablation-step".into();
            }
        }
        _ => {}
    }
}

fn print_report(report: &RunReport) {
    for window in &report.windows {
        let m = &window.metrics;
        println!(
            "{} seed={} window={}: purity={:.3} c_conv={:.3} avg_dist={:.1} w_conv={:.3}",
            report.config_id,
            report.seed,
            window.name,
            m.purity,
            m.c_conv,
            m.avg_dist,
            m.w_conv.unwrap_or(f64::NAN)
        );
    }
    if let Some(temporal) = &report.temporal {
        println!("  winner spike times: {} distinct", temporal.len());
        for row in temporal {
            println!(
                "    t={} count={} coverage={:.3} purity={:.3}",
                row.time, row.count, row.cum_coverage, row.cum_purity
            );
        }
    }
}

fn real_main() -> spikecol::Result<()> {
    let args = Args::parse();

    #[cfg(feature = "parallel")]
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| spikecol::Error::InvalidConfig(format!("thread pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    if args.threads.is_some() {
        eprintln!("note: built without the `parallel` feature; --threads ignored");
    }

    let mut config = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(name) = &args.experiment {
        config.experiment = name.parse()?;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.mnist_images.is_some() {
        config.mnist_images = args.mnist_images.clone();
    }
    if args.mnist_labels.is_some() {
        config.mnist_labels = args.mnist_labels.clone();
    }
    if args.out_dir.is_some() {
        config.out_dir = args.out_dir.clone();
    }
    apply_experiment_defaults(&mut config);

    match config.experiment {
        Experiment::Sweep => {
            let reports = runner::sweep(&config, &SweepGrid::default())?;
            println!("swept {} grid points", reports.len());
            for warmup in [10_000usize, 20_000, 60_000] {
                let mut purities: Vec<f64> = reports
                    .iter()
                    .filter(|r| r.config_id.ends_with(&format!("w{}k", warmup / 1000)))
                    .map(|r| r.primary().purity)
                    .collect();
                if purities.is_empty() {
                    continue;
                }
                purities.sort_by(|a, b| b.total_cmp(a));
                println!(
                    "  warmup {}K: best={:.3} median={:.3} worst={:.3}",
                    warmup / 1000,
                    purities[0],
                    purities[purities.len() / 2],
                    purities[purities.len() - 1]
                );
            }
        }
        Experiment::Kmeans => {
            let batch = runner::run_kmeans(&config)?;
            println!(
                "kmeans over {} seeds: purity mean={:.3} best={:.3} worst={:.3} avg_dist={:.1} epochs<= {}",
                batch.rows.len(),
                batch.mean_purity,
                batch.best_purity,
                batch.worst_purity,
                batch.mean_avg_dist,
                batch.max_epochs_seen
            );
        }
        Experiment::Baseline if args.config.is_none() && args.experiment.is_some() => {
            // bare `--experiment baseline` runs all five stock rows
            for preset in baseline_presets() {
                let config = ExperimentConfig {
                    seed: config.seed,
                    mnist_images: config.mnist_images.clone(),
                    mnist_labels: config.mnist_labels.clone(),
                    out_dir: config.out_dir.clone(),
                    ..preset
                };
                print_report(&runner::run(&config)?);
            }
        }
        _ => {
            print_report(&runner::run(&config)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
