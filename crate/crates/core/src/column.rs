//! The p x q synaptic crossbar, parallel neuron evaluation, and 1-WTA
//! inhibition.
//!
//! A `Column` is mutated only by the trainer; inference is read-only.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::neuron::{spike_time, NeuronResult, ResponseKind};
use crate::volley::{SpikeTime, Volley};

/// Synaptic crossbar with `q` neurons fed by `p` input lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    p: usize,
    q: usize,
    theta: u32,
    w_max: u32,
    response: ResponseKind,
    /// q rows of p weights, row-major.
    weights: Vec<u32>,
}

impl Column {
    /// Zero-weight column. Dimensions are fixed for the column's lifetime.
    pub fn new(p: usize, q: usize, theta: u32, w_max: u32) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidConfig(
                "column dimensions must be positive".into(),
            ));
        }
        if theta == 0 {
            return Err(Error::InvalidConfig("theta must be at least 1".into()));
        }
        if w_max == 0 {
            return Err(Error::InvalidConfig("w_max must be at least 1".into()));
        }
        Ok(Column {
            p,
            q,
            theta,
            w_max,
            response: ResponseKind::default(),
            weights: vec![0; p * q],
        })
    }

    pub fn with_response(mut self, kind: ResponseKind) -> Self {
        self.response = kind;
        self
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn theta(&self) -> u32 {
        self.theta
    }

    pub fn w_max(&self) -> u32 {
        self.w_max
    }

    pub fn response(&self) -> ResponseKind {
        self.response
    }

    /// All weights, row-major (neuron-major).
    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    /// Weight row of neuron `j`.
    pub fn row(&self, j: usize) -> &[u32] {
        &self.weights[j * self.p..(j + 1) * self.p]
    }

    pub(crate) fn row_mut(&mut self, j: usize) -> &mut [u32] {
        &mut self.weights[j * self.p..(j + 1) * self.p]
    }

    /// Weight of the synapse from line `i` to neuron `j`.
    pub fn weight(&self, j: usize, i: usize) -> u32 {
        self.weights[j * self.p + i]
    }

    /// Set every weight to `value`.
    pub fn fill_weights(&mut self, value: u32) -> Result<()> {
        if value > self.w_max {
            return Err(Error::WeightOutOfRange {
                value,
                max: self.w_max,
            });
        }
        self.weights.fill(value);
        Ok(())
    }

    /// Replace the whole weight matrix (row-major, length p*q).
    pub fn set_weights(&mut self, values: &[u32]) -> Result<()> {
        if values.len() != self.weights.len() {
            return Err(Error::LengthMismatch {
                expected: self.weights.len(),
                actual: values.len(),
            });
        }
        if let Some(&bad) = values.iter().find(|&&w| w > self.w_max) {
            return Err(Error::WeightOutOfRange {
                value: bad,
                max: self.w_max,
            });
        }
        self.weights.copy_from_slice(values);
        Ok(())
    }

    fn check_input(&self, x: &Volley) -> Result<()> {
        if x.len() != self.p {
            return Err(Error::LengthMismatch {
                expected: self.p,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Evaluate every neuron, returning spike times and crossing potentials.
    pub fn evaluate_full(&self, x: &Volley) -> Result<Vec<NeuronResult>> {
        self.check_input(x)?;
        (0..self.q)
            .map(|j| spike_time(self.response, x, self.row(j), self.theta))
            .collect()
    }

    /// Pre-inhibition output volley y.
    pub fn evaluate(&self, x: &Volley) -> Result<Volley> {
        Ok(self
            .evaluate_full(x)?
            .into_iter()
            .map(|r| r.spike)
            .collect())
    }

    /// Full inference: evaluation followed by 1-WTA inhibition.
    ///
    /// The first spike wins. Spikes landing on the same discrete time step
    /// are simultaneous as far as the inhibition is concerned, so the tie
    /// resolves toward the strongest response: highest body potential at the
    /// crossing, then highest saturated potential (the total weighted match),
    /// then the lowest index. Discrete time makes same-step ties common;
    /// breaking them by raw index instead collapses the competition whenever
    /// several neurons cross the threshold within one step.
    pub fn infer(&self, x: &Volley) -> Result<InferenceResult> {
        let full = self.evaluate_full(x)?;
        let y: Volley = full.iter().map(|r| r.spike).collect();
        let saturated = |j: usize| -> u32 {
            x.iter()
                .zip(self.row(j))
                .filter(|(xi, _)| xi.is_spike())
                .map(|(_, &w)| w)
                .sum()
        };
        let winner = match y.min_time() {
            SpikeTime::Inf => None,
            SpikeTime::At(min) => {
                let prev = |j: usize| -> u32 {
                    if min == 0 {
                        0
                    } else {
                        crate::neuron::body_potential(
                            self.response,
                            x,
                            self.row(j),
                            min as i64 - 1,
                        )
                        .unwrap()
                    }
                };
                // earlier in-step crossing fraction (theta - v(t-1)) / (v(t) - v(t-1))
                // wins; compare by exact cross-multiplication
                let frac_less = |a: usize, b: usize| -> std::cmp::Ordering {
                    let (pa, va) = (prev(a) as u64, full[a].potential_at_spike as u64);
                    let (pb, vb) = (prev(b) as u64, full[b].potential_at_spike as u64);
                    let th = self.theta as u64;
                    let lhs = (th.saturating_sub(pa)) * (vb - pb);
                    let rhs = (th.saturating_sub(pb)) * (va - pa);
                    lhs.cmp(&rhs)
                };
                (0..self.q)
                    .filter(|&j| y.get(j) == SpikeTime::At(min))
                    .min_by(|&a, &b| {
                        frac_less(a, b)
                            .then_with(|| saturated(b).cmp(&saturated(a)))
                            .then(a.cmp(&b))
                    })
            }
        };
        let mut z = Volley::null(self.q);
        let winner_potential = match winner {
            Some(j) => {
                z = Volley::new(
                    (0..self.q)
                        .map(|i| if i == j { y.get(j) } else { SpikeTime::Inf })
                        .collect(),
                );
                full[j].potential_at_spike
            }
            None => 0,
        };
        Ok(InferenceResult {
            y,
            z,
            winner,
            winner_potential,
        })
    }

    /// Write the weight snapshot: a header line `p q w_max theta`, then one
    /// line of p integers per neuron.
    pub fn write_weights<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{} {} {} {}", self.p, self.q, self.w_max, self.theta)?;
        for j in 0..self.q {
            let row: Vec<String> = self.row(j).iter().map(|w| w.to_string()).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }

    pub fn save_weights(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_weights(&mut out).map_err(|e| Error::io(path, e))
    }

    /// Parse a weight snapshot produced by [`Column::write_weights`].
    pub fn read_weights<R: BufRead>(input: R) -> Result<Column> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::BadSnapshot("missing header line".into()))?
            .map_err(|e| Error::BadSnapshot(e.to_string()))?;
        let fields: Vec<u64> = header
            .split_whitespace()
            .map(|f| {
                f.parse::<u64>()
                    .map_err(|_| Error::BadSnapshot(format!("bad header field `{f}`")))
            })
            .collect::<Result<_>>()?;
        let [p, q, w_max, theta] = fields[..] else {
            return Err(Error::BadSnapshot(format!(
                "header has {} fields, expected 4",
                fields.len()
            )));
        };
        let mut col = Column::new(p as usize, q as usize, theta as u32, w_max as u32)?;
        let mut values = Vec::with_capacity(col.p * col.q);
        for (li, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::BadSnapshot(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<u32> = line
                .split_whitespace()
                .map(|f| {
                    f.parse::<u32>()
                        .map_err(|_| Error::BadSnapshot(format!("row {li}: bad weight `{f}`")))
                })
                .collect::<Result<_>>()?;
            if row.len() != col.p {
                return Err(Error::BadSnapshot(format!(
                    "row {li} has {} weights, expected {}",
                    row.len(),
                    col.p
                )));
            }
            values.extend_from_slice(&row);
        }
        if values.len() != col.p * col.q {
            return Err(Error::BadSnapshot(format!(
                "{} weight rows, expected {}",
                values.len() / col.p,
                col.q
            )));
        }
        col.set_weights(&values)?;
        Ok(col)
    }

    pub fn load_weights(path: &Path) -> Result<Column> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Column::read_weights(BufReader::new(file))
    }
}

/// Result of one inference pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceResult {
    /// Pre-inhibition spike times, one per neuron.
    pub y: Volley,
    /// Post-inhibition volley: at most one finite entry, at the winner.
    pub z: Volley,
    /// Index of the surviving neuron, if any line of `z` spikes.
    pub winner: Option<usize>,
    /// Body potential of the winner at its spike time (0 without a winner).
    pub winner_potential: u32,
}

/// 1-winner-take-all over a bare volley: keep only the earliest spike,
/// breaking ties toward the lowest index. The null volley passes through
/// unchanged. [`Column::infer`] additionally sees the crossing potentials
/// and prefers the strongest same-time spike.
pub fn wta(y: &Volley) -> Volley {
    match y.min_time() {
        SpikeTime::Inf => Volley::null(y.len()),
        min => {
            let win = y
                .times()
                .iter()
                .position(|&t| t == min)
                .expect("finite minimum must be present");
            let mut times = vec![SpikeTime::Inf; y.len()];
            times[win] = min;
            Volley::new(times)
        }
    }
}
