//! Development probe: dump internals of a baseline run.

use spikecol::benchgen::{gen_stream, BaselineSet, StreamSpec};
use spikecol::rng::SimRng;
use spikecol::runner::ExperimentConfig;
use spikecol::stdp::Trainer;
use spikecol::Column;

fn main() {
    let config = ExperimentConfig::default();
    let baselines = BaselineSet::synthetic(8).unwrap();
    let mut column = Column::new(128, 10, config.theta, 8).unwrap();
    let mut trainer = Trainer::new(
        config.stdp_params().unwrap(),
        SimRng::new(SimRng::derive_seed(1, 0x02)),
    )
    .unwrap();
    let spec = StreamSpec {
        length: 70_000,
        seed: SimRng::derive_seed(1, 0x01),
        ..StreamSpec::default()
    };

    let mut wins = [0u64; 10];
    let mut no_winner = 0u64;
    let mut time_hist = std::collections::BTreeMap::<u32, u64>::new();
    let mut win_by_label = [[0u64; 10]; 10];
    for (idx, (volley, label)) in gen_stream(&baselines, spec).unwrap().enumerate() {
        let (inf, _) = trainer.step(&mut column, &volley).unwrap();
        if idx >= 60_000 {
            match inf.winner {
                Some(j) => {
                    wins[j] += 1;
                    win_by_label[label as usize][j] += 1;
                    if let Some(t) = inf.z.get(j).finite() {
                        *time_hist.entry(t).or_default() += 1;
                    }
                }
                None => no_winner += 1,
            }
        }
        if idx % 10_000 == 0 {
            let sums: Vec<u32> = (0..10).map(|j| column.row(j).iter().sum()).collect();
            let highs: Vec<usize> = (0..10)
                .map(|j| column.row(j).iter().filter(|&&w| w >= 7).count())
                .collect();
            println!("pat {idx}: row weight sums {sums:?}");
            println!("          rows high(>=7) {highs:?}");
        }
    }
    println!("eval wins per neuron: {wins:?}, none: {no_winner}");
    println!("eval winner spike times: {time_hist:?}");
    println!("label -> winner matrix:");
    for (label, row) in win_by_label.iter().enumerate() {
        println!("  {label}: {row:?}");
    }
}
