//! Development probe: tie-break semantics among equal-earliest spikers.

use spikecol::benchgen::{gen_stream, BaselineSet, StreamSpec};
use spikecol::metrics::{self, Clustering, Pattern};
use spikecol::neuron::{spike_time, ResponseKind};
use spikecol::rng::SimRng;
use spikecol::volley::{SpikeTime, Volley};

#[derive(Clone, Copy, Debug, PartialEq)]
enum TieBreak {
    Index,
    CrossingPotential,
    SaturatedPotential,
}

#[derive(Clone, Copy)]
struct Mu {
    search: u32,
    capture: u32,
    backoff: u32,
    min: u32,
    init: u32,
}

fn f_plus(w: u32) -> u32 {
    (((1024 * w as u64 * (16 - w as u64)) + 32) / 64) as u32
}

fn run_variant(tb: TieBreak, mu: Mu, seed: u64, theta: u32) -> (f64, f64, f64, f64) {
    let baselines = BaselineSet::synthetic(8).unwrap();
    let p = 128usize;
    let q = 10usize;
    let mut weights = vec![mu.init; p * q];
    let mut rng = SimRng::new(SimRng::derive_seed(seed, 2));
    let spec = StreamSpec {
        length: 70_000,
        seed: SimRng::derive_seed(seed, 1),
        ..StreamSpec::default()
    };
    let up_tab: Vec<u32> = (0..=8).map(|w| f_plus(w).max(mu.min)).collect();
    let down_tab: Vec<u32> = (0..=8).map(|w| f_plus(8 - w).max(mu.min)).collect();

    let mut winners = Vec::new();
    let mut labels = Vec::new();
    let mut applied_last10k = 0u64;
    let mut searches_last10k = 0u64;
    for (idx, (volley, label)) in gen_stream(&baselines, spec).unwrap().enumerate() {
        let results: Vec<_> = (0..q)
            .map(|j| {
                spike_time(ResponseKind::Ramp, &volley, &weights[j * p..(j + 1) * p], theta)
                    .unwrap()
            })
            .collect();
        let y: Volley = results.iter().map(|r| r.spike).collect();
        let winner = match y.min_time() {
            SpikeTime::Inf => None,
            min => {
                let candidates = (0..q).filter(|&j| y.get(j) == min);
                match tb {
                    TieBreak::Index => candidates.min_by_key(|&j| j),
                    TieBreak::CrossingPotential => {
                        candidates.max_by_key(|&j| (results[j].potential_at_spike, usize::MAX - j))
                    }
                    TieBreak::SaturatedPotential => candidates.max_by_key(|&j| {
                        let sat: u32 = volley
                            .iter()
                            .zip(&weights[j * p..(j + 1) * p])
                            .filter(|(x, _)| x.is_spike())
                            .map(|(_, &w)| w)
                            .sum();
                        (sat, usize::MAX - j)
                    }),
                }
            }
        };
        for j in 0..q {
            let out = if Some(j) == winner {
                y.get(j)
            } else {
                SpikeTime::Inf
            };
            let row = &mut weights[j * p..(j + 1) * p];
            match out {
                SpikeTime::Inf => {
                    for i in 0..p {
                        if volley.get(i).is_spike() {
                            let b = rng.bernoulli(mu.search).unwrap();
                            if b && row[i] < 8 {
                                row[i] += 1;
                                if idx >= 60_000 {
                                    applied_last10k += 1;
                                    searches_last10k += 1;
                                }
                            }
                        }
                    }
                }
                SpikeTime::At(zt) => {
                    for i in 0..p {
                        let w = row[i];
                        let capture = match volley.get(i) {
                            SpikeTime::At(xt) => xt <= zt,
                            SpikeTime::Inf => false,
                        };
                        if capture {
                            let b1 = rng.bernoulli(mu.capture).unwrap();
                            let b2 = rng.bernoulli(up_tab[w as usize]).unwrap();
                            if b1 && b2 && w < 8 {
                                row[i] += 1;
                                if idx >= 60_000 {
                                    applied_last10k += 1;
                                }
                            }
                        } else {
                            let b1 = rng.bernoulli(mu.backoff).unwrap();
                            let b2 = rng.bernoulli(down_tab[w as usize]).unwrap();
                            if b1 && b2 && w > 0 {
                                row[i] -= 1;
                                if idx >= 60_000 {
                                    applied_last10k += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        if idx >= 60_000 {
            winners.push(winner);
            labels.push(label);
        }
    }
    let clustering = Clustering::new(winners, q).unwrap();
    let purity = metrics::purity(&clustering, &labels).unwrap();
    let wc = metrics::w_conv(&weights, 8);
    let _ = Pattern::new(vec![0u8], None);
    (
        purity,
        wc,
        applied_last10k as f64 / 10_000.0,
        searches_last10k as f64 / 10_000.0,
    )
}

fn main() {
    let configs = [
        ("search2", Mu { search: 2, capture: 224, backoff: 304, min: 32, init: 0 }),
        ("search3", Mu { search: 3, capture: 224, backoff: 320, min: 32, init: 0 }),
        ("search4", Mu { search: 4, capture: 224, backoff: 336, min: 32, init: 0 }),
        ("fixed7", Mu { search: 0, capture: 256, backoff: 320, min: 36, init: 7 }),
    ];
    for tb in [
        TieBreak::Index,
        TieBreak::CrossingPotential,
        TieBreak::SaturatedPotential,
    ] {
        for (name, mu) in configs {
            let (p1, w1, u1, s1) = run_variant(tb, mu, 1, 60);
            println!(
                "{tb:?} {name:8} purity={p1:.3} wconv={w1:.3} upd/pat={u1:.1} srch/pat={s1:.2}"
            );
        }
        println!();
    }
}
