//! Development probe: multi-seed band check over the stock configurations.

use spikecol::runner::{baseline_presets, run, run_kmeans, ExperimentConfig};

fn main() {
    let seeds: Vec<u64> = (1..=5).collect();
    for preset in baseline_presets() {
        let mut purities = Vec::new();
        let mut cconvs = Vec::new();
        let mut dists = Vec::new();
        let mut wconvs = Vec::new();
        for &seed in &seeds {
            let report = run(&ExperimentConfig {
                seed,
                ..preset.clone()
            })
            .unwrap();
            let m = report.primary();
            purities.push(m.purity);
            cconvs.push(m.c_conv);
            dists.push(m.avg_dist);
            wconvs.push(m.w_conv.unwrap());
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let min = |v: &[f64]| v.iter().cloned().fold(f64::MAX, f64::min);
        let max = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max);
        println!(
            "{:10} purity mean={:.3} [{:.3},{:.3}]  c_conv={:.3}  avg_dist={:.1}  w_conv mean={:.3} max={:.3}",
            preset.config_id,
            mean(&purities),
            min(&purities),
            max(&purities),
            mean(&cconvs),
            mean(&dists),
            mean(&wconvs),
            max(&wconvs),
        );
    }

    let batch = run_kmeans(&ExperimentConfig {
        kmeans_seeds: 64,
        ..ExperimentConfig::default()
    })
    .unwrap();
    println!(
        "kmeans(64) purity mean={:.3} best={:.3} worst={:.3} avg_dist={:.1} epochs<={}",
        batch.mean_purity,
        batch.best_purity,
        batch.worst_purity,
        batch.mean_avg_dist,
        batch.max_epochs_seen
    );
}
