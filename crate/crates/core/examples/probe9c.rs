//! Development probe: alphabet geometry grid.

use spikecol::benchgen::{gen_stream, BaselineSet, StreamSpec};
use spikecol::kmeans::{kmeans_evaluate, kmeans_fit};
use spikecol::metrics::{self, Clustering, Pattern};
use spikecol::rng::SimRng;
use spikecol::runner::{baseline_presets, ExperimentConfig};
use spikecol::stdp::Trainer;
use spikecol::Column;

fn gen_alphabet(seed: u64, close: [(usize, usize, usize); 4], min_far: usize) -> Option<Vec<u64>> {
    let mut rng = SimRng::new(seed);
    let mut glyphs: Vec<Option<u64>> = vec![None; 10];
    let bases = [0usize, 1, 2, 3, 4, 5];
    let mut made = 0usize;
    let mut attempts = 0;
    while made < bases.len() {
        attempts += 1;
        if attempts > 200_000 {
            return None;
        }
        let mut bits = 0u64;
        for i in rng.distinct_below(64, 32) {
            bits |= 1 << i;
        }
        let ok = glyphs
            .iter()
            .flatten()
            .all(|&g| (g ^ bits).count_ones() as usize >= min_far);
        if ok {
            glyphs[bases[made]] = Some(bits);
            made += 1;
        }
    }
    for (a, b, d) in close {
        let ga = glyphs[a].unwrap();
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > 200_000 {
                return None;
            }
            let mut flips = 0u64;
            for i in rng.distinct_below(64, d) {
                flips |= 1 << i;
            }
            let gb = ga ^ flips;
            let ok = glyphs.iter().enumerate().all(|(k, g)| match g {
                Some(g) if k == a => (g ^ gb).count_ones() as usize == d,
                Some(g) => (g ^ gb).count_ones() as usize >= min_far,
                None => true,
            });
            if ok {
                glyphs[b] = Some(gb);
                break;
            }
        }
    }
    Some(glyphs.into_iter().map(|g| g.unwrap()).collect())
}

fn to_baselines(words: &[u64]) -> BaselineSet {
    let images = words
        .iter()
        .map(|&w| {
            let bits: Vec<u8> = (0..64).map(|i| ((w >> i) & 1) as u8).collect();
            spikecol::BinaryImage::new(bits, 8, 8).unwrap()
        })
        .collect();
    BaselineSet::new(images, 8).unwrap()
}

fn stdp_run(baselines: &BaselineSet, config: &ExperimentConfig, seed: u64) -> (f64, f64) {
    let mut column = Column::new(128, 10, config.theta, 8).unwrap();
    match config.init {
        spikecol::runner::WeightInit::Constant(c) => column.fill_weights(c).unwrap(),
        spikecol::runner::WeightInit::Normal { mean_frac, sd_frac } => {
            let mut rng = SimRng::new(SimRng::derive_seed(seed, 3));
            let values: Vec<u32> = (0..1280)
                .map(|_| {
                    (mean_frac * 8.0 + sd_frac * 8.0 * rng.normal())
                        .round()
                        .clamp(0.0, 8.0) as u32
                })
                .collect();
            column.set_weights(&values).unwrap();
        }
        spikecol::runner::WeightInit::Zeros => {}
    }
    let mut trainer = Trainer::new(
        config.stdp_params().unwrap(),
        SimRng::new(SimRng::derive_seed(seed, 2)),
    )
    .unwrap();
    let spec = StreamSpec {
        length: 70_000,
        seed: SimRng::derive_seed(seed, 1),
        ..StreamSpec::default()
    };
    let mut winners = Vec::new();
    let mut labels = Vec::new();
    for (idx, (volley, label)) in gen_stream(baselines, spec).unwrap().enumerate() {
        let (inf, _) = trainer.step(&mut column, &volley).unwrap();
        if idx >= 60_000 {
            winners.push(inf.winner);
            labels.push(label);
        }
    }
    let clustering = Clustering::new(winners, 10).unwrap();
    (
        metrics::purity(&clustering, &labels).unwrap(),
        metrics::w_conv(column.weights(), 8),
    )
}

fn kmeans_batch(baselines: &BaselineSet, n_seeds: usize) -> (f64, f64, f64) {
    let spec = StreamSpec {
        length: 70_000,
        seed: SimRng::derive_seed(1, 1),
        ..StreamSpec::default()
    };
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut labels = Vec::new();
    for (idx, (volley, label)) in gen_stream(baselines, spec).unwrap().enumerate() {
        let pat = Pattern::new(volley.support_bits(), Some(label));
        if idx < 60_000 {
            train.push(pat);
        } else {
            test.push(pat);
            labels.push(label);
        }
    }
    let mut purities = Vec::new();
    for i in 0..n_seeds {
        let mut rng = SimRng::new(SimRng::derive_seed(7, 0x1000 + i as u64));
        let model = kmeans_fit(&train, 10, &mut rng, 100).unwrap();
        let (report, _) = kmeans_evaluate(&model, &test, &labels).unwrap();
        purities.push(report.purity);
    }
    let mean = purities.iter().sum::<f64>() / purities.len() as f64;
    let best = purities.iter().cloned().fold(f64::MIN, f64::max);
    let worst = purities.iter().cloned().fold(f64::MAX, f64::min);
    (mean, best, worst)
}

fn main() {
    let candidates: [(&str, [(usize, usize, usize); 4], usize); 1] = [
        ("G", [(1, 7, 23), (4, 9, 23), (3, 8, 25), (5, 6, 25)], 32),
    ];
    let presets = baseline_presets();
    let pick = |id: &str| presets.iter().find(|c| c.config_id == id).unwrap();
    for (name, close, far) in candidates {
        let Some(words) = gen_alphabet(99, close, far) else {
            println!("{name}: generation failed");
            continue;
        };
        let baselines = to_baselines(&words);
        use spikecol::runner::WeightInit;
        let hybrids = [
            ("fixed7-mu-norminit", ExperimentConfig {
                mu_search: 0, mu_capture: 256, mu_backoff: 320, mu_min: 36,
                init: WeightInit::Normal { mean_frac: 0.80, sd_frac: 0.05 },
                ..ExperimentConfig::default()
            }),
            ("norm-mu-const7init", ExperimentConfig {
                mu_search: 0, mu_capture: 208, mu_backoff: 304, mu_min: 36,
                init: WeightInit::Constant(7),
                ..ExperimentConfig::default()
            }),
            ("normal80-6flat", ExperimentConfig {
                mu_search: 0, mu_capture: 208, mu_backoff: 304, mu_min: 36,
                init: WeightInit::Constant(6),
                ..ExperimentConfig::default()
            }),
            ("normal80", pick("normal80").clone()),
            ("fixed7", pick("fixed7").clone()),
        ];
        for (id, config) in &hybrids {
            let config = &config;
            let mut ps = Vec::new();
            let mut ws = Vec::new();
            for seed in 1..=5u64 {
                let (p, w) = stdp_run(&baselines, config, seed);
                ps.push(p);
                ws.push(w);
            }
            let pm = ps.iter().sum::<f64>() / ps.len() as f64;
            let wm = ws.iter().sum::<f64>() / ws.len() as f64;
            let pmin = ps.iter().cloned().fold(f64::MAX, f64::min);
            println!("{name} {id:9} purity={pm:.3} min={pmin:.3} wconv={wm:.3}");
        }
        let (km, kb, kw) = kmeans_batch(&baselines, 24);
        println!("{name} kmeans    mean={km:.3} best={kb:.3} worst={kw:.3}");
        println!();
    }
}
