//! Development probe: A/B the ambiguous learning-rule readings.

use spikecol::benchgen::{gen_stream, BaselineSet, StreamSpec};
use spikecol::metrics::{self, Clustering, Pattern};
use spikecol::neuron::{spike_time, ResponseKind};
use spikecol::rng::SimRng;
use spikecol::volley::{SpikeTime, Volley};
use spikecol::wta;

#[derive(Clone, Copy, Debug)]
struct Variant {
    strict_capture: bool, // capture on x < z (ties backoff) instead of x <= z
    mirror_fminus: bool,  // F-(w) = F+(wmax - w) vs F-(w) = F+(w)
    pre_inhibition: bool, // learn from y instead of z
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

fn run_variant(v: Variant, mu: Mu, seed: u64, theta: u32) -> (f64, f64, f64, f64) {
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
    let down_tab: Vec<u32> = (0..=8)
        .map(|w| {
            let f = if v.mirror_fminus { f_plus(8 - w) } else { f_plus(w) };
            f.max(mu.min)
        })
        .collect();

    let mut patterns = Vec::new();
    let mut winners = Vec::new();
    let mut labels = Vec::new();
    let mut applied_last10k = 0u64;
    let mut searches_last10k = 0u64;
    for (idx, (volley, label)) in gen_stream(&baselines, spec).unwrap().enumerate() {
        let y: Volley = (0..q)
            .map(|j| {
                spike_time(ResponseKind::Ramp, &volley, &weights[j * p..(j + 1) * p], theta)
                    .unwrap()
                    .spike
            })
            .collect();
        let z = wta(&y);
        let winner = z.times().iter().position(|t| t.is_spike());
        let outputs = if v.pre_inhibition { &y } else { &z };
        for j in 0..q {
            let out = outputs.get(j);
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
                            SpikeTime::At(xt) => {
                                if v.strict_capture {
                                    xt < zt
                                } else {
                                    xt <= zt
                                }
                            }
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
            patterns.push(Pattern::new(volley.support_bits(), Some(label)));
            winners.push(winner);
            labels.push(label);
        }
    }
    let clustering = Clustering::new(winners, q).unwrap();
    let purity = metrics::purity(&clustering, &labels).unwrap();
    let wc = metrics::w_conv(&weights, 8);
    (
        purity,
        wc,
        applied_last10k as f64 / 10_000.0,
        searches_last10k as f64 / 10_000.0,
    )
}

fn main() {
    let search3 = Mu {
        search: 3,
        capture: 224,
        backoff: 320,
        min: 32,
        init: 0,
    };
    let fixed7 = Mu {
        search: 0,
        capture: 256,
        backoff: 320,
        min: 36,
        init: 7,
    };
    for (vn, v) in [
        ("spec: <=, mirror, post", Variant { strict_capture: false, mirror_fminus: true, pre_inhibition: false }),
        ("B: <=, mirror, PRE", Variant { strict_capture: false, mirror_fminus: true, pre_inhibition: true }),
        ("C: STRICT, mirror, post", Variant { strict_capture: true, mirror_fminus: true, pre_inhibition: false }),
        ("D: STRICT, mirror, PRE", Variant { strict_capture: true, mirror_fminus: true, pre_inhibition: true }),
        ("E: <=, SAMEFORM, post", Variant { strict_capture: false, mirror_fminus: false, pre_inhibition: false }),
        ("F: <=, SAMEFORM, PRE", Variant { strict_capture: false, mirror_fminus: false, pre_inhibition: true }),
        ("G: STRICT, SAMEFORM, post", Variant { strict_capture: true, mirror_fminus: false, pre_inhibition: false }),
    ] {
        let (p1, w1, u1, s1) = run_variant(v, search3, 1, 60);
        let (p2, w2, u2, _s2) = run_variant(v, fixed7, 1, 60);
        println!(
            "{vn:28} search3: purity={p1:.3} wconv={w1:.3} upd/pat={u1:.1} srch/pat={s1:.2} | fixed7: purity={p2:.3} wconv={w2:.3} upd/pat={u2:.1}"
        );
    }
}
