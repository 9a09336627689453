//! Experiment driver: configuration, the experiment families, parameter
//! sweeps, and CSV emission.
//!
//! A run streams noisy patterns through the learner with learning always on:
//! a warm-up prefix is discarded and scores are computed over one or more
//! evaluation windows recorded later in the stream. Everything a run emits
//! is a pure function of its config and seed.

use std::fmt;
use std::fs;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::benchgen::{
    gen_stream, load_mnist_idx, select_baselines, BaselineSet, ExemplarIndexing, Schedule,
    StreamSpec, DEFAULT_EXEMPLARS,
};
use crate::column::Column;
use crate::error::{Error, Result};
use crate::kmeans::{kmeans_evaluate, kmeans_fit};
use crate::metrics::{self, Clustering, MetricsReport, Pattern};
use crate::neuron::{extrapolate_spike_time, ResponseKind};
use crate::par;
use crate::rng::SimRng;
use crate::stdp::{StdpParams, StdpTarget, Trainer, UpdateCounts};
use crate::volley::SpikeTime;

const STREAM_TAG: u64 = 0x01;
const LEARNER_TAG: u64 = 0x02;
const INIT_TAG: u64 = 0x03;
const KMEANS_TAG: u64 = 0x1000;

pub const UPDATE_BUCKET: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Baseline,
    Sweep,
    OddEven,
    Rf18,
    Temporal,
    AblationStep,
    Kmeans,
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Experiment::Baseline),
            "sweep" => Ok(Experiment::Sweep),
            "odd-even" => Ok(Experiment::OddEven),
            "rf18" => Ok(Experiment::Rf18),
            "temporal" => Ok(Experiment::Temporal),
            "ablation-step" => Ok(Experiment::AblationStep),
            "kmeans" => Ok(Experiment::Kmeans),
            other => Err(Error::InvalidConfig(format!("unknown experiment `{other}`"))),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Experiment::Baseline => "baseline",
            Experiment::Sweep => "sweep",
            Experiment::OddEven => "odd-even",
            Experiment::Rf18 => "rf18",
            Experiment::Temporal => "temporal",
            Experiment::AblationStep => "ablation-step",
            Experiment::Kmeans => "kmeans",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightInit {
    Zeros,
    Constant(u32),
    Normal { mean_frac: f64, sd_frac: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub config_id: String,
    pub rf_size: usize,
    pub q: usize,
    pub theta: u32,
    /// Functional threshold for post-hoc spike-time rescaling.
    pub theta_f: Option<u32>,
    pub w_max: u32,
    pub mu_search: u32,
    pub mu_capture: u32,
    pub mu_backoff: u32,
    pub mu_min: u32,
    pub init: WeightInit,
    pub warmup: usize,
    pub eval: usize,
    /// Stream length; defaults to warmup + eval when absent.
    pub length: Option<usize>,
    pub seed: u64,
    pub noise_p: f64,
    pub transition: usize,
    pub response: ResponseKind,
    pub stdp_target: StdpTarget,
    pub indexing: ExemplarIndexing,
    pub exemplars: [usize; 10],
    pub binarize_threshold: u8,
    pub kmeans_seeds: usize,
    pub kmeans_max_epochs: usize,
    pub mnist_images: Option<PathBuf>,
    pub mnist_labels: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::Baseline,
            config_id: "search3".into(),
            rf_size: 8,
            q: 10,
            theta: 60,
            theta_f: None,
            w_max: 8,
            mu_search: 3,
            mu_capture: 224,
            mu_backoff: 320,
            mu_min: 32,
            init: WeightInit::Zeros,
            warmup: 60_000,
            eval: 10_000,
            length: None,
            seed: 1,
            noise_p: 0.30,
            transition: 34_916,
            response: ResponseKind::Ramp,
            stdp_target: StdpTarget::PostInhibition,
            indexing: ExemplarIndexing::ClassZeroBased,
            exemplars: DEFAULT_EXEMPLARS,
            binarize_threshold: 128,
            kmeans_seeds: 64,
            kmeans_max_epochs: 100,
            mnist_images: None,
            mnist_labels: None,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn stdp_params(&self) -> Result<StdpParams> {
        StdpParams::new(
            self.mu_search,
            self.mu_capture,
            self.mu_backoff,
            self.mu_min,
            self.w_max,
        )
    }

    pub fn stream_length(&self) -> usize {
        self.length.unwrap_or(self.warmup + self.eval)
    }

    fn schedule(&self) -> Schedule {
        match self.experiment {
            Experiment::OddEven => Schedule::OddsThenEvens {
                transition: self.transition,
            },
            _ => Schedule::UniformAll,
        }
    }

    /// Named evaluation windows over the stream.
    pub fn windows(&self) -> Vec<(String, Range<usize>)> {
        match self.experiment {
            Experiment::OddEven => {
                let length = self.stream_length();
                vec![
                    ("odds".into(), self.warmup..self.warmup + self.eval),
                    ("evens".into(), length - self.eval..length),
                ]
            }
            _ => vec![("eval".into(), self.warmup..self.warmup + self.eval)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.stdp_params()?;
        if self.q == 0 {
            return Err(Error::InvalidConfig("q must be at least 1".into()));
        }
        if self.rf_size < 2 {
            return Err(Error::InvalidConfig("rf_size must be at least 2".into()));
        }
        if self.eval == 0 {
            return Err(Error::InvalidConfig("eval window must be non-empty".into()));
        }
        if !(0.0..=1.0).contains(&self.noise_p) {
            return Err(Error::InvalidConfig(format!(
                "noise probability {} outside [0, 1]",
                self.noise_p
            )));
        }
        if let WeightInit::Constant(c) = self.init {
            if c > self.w_max {
                return Err(Error::WeightOutOfRange {
                    value: c,
                    max: self.w_max,
                });
            }
        }
        if let Some(theta_f) = self.theta_f {
            if theta_f < self.theta {
                return Err(Error::InvalidConfig(format!(
                    "theta_f {theta_f} below theta {}",
                    self.theta
                )));
            }
        }
        let length = self.stream_length();
        for (name, range) in self.windows() {
            if range.end > length {
                return Err(Error::InvalidConfig(format!(
                    "window `{name}` ({}..{}) exceeds stream length {length}",
                    range.start, range.end
                )));
            }
        }
        if self.mnist_images.is_some() != self.mnist_labels.is_some() {
            return Err(Error::InvalidConfig(
                "both or neither of the dataset paths must be given".into(),
            ));
        }
        Ok(())
    }

    /// Load the configured dataset, or fall back to the bundled alphabet.
    pub fn baselines(&self) -> Result<BaselineSet> {
        match (&self.mnist_images, &self.mnist_labels) {
            (Some(images), Some(labels)) => {
                let records = load_mnist_idx(images, labels)?;
                select_baselines(
                    &records,
                    &self.exemplars,
                    self.indexing,
                    self.rf_size,
                    self.binarize_threshold,
                )
            }
            _ => BaselineSet::synthetic(self.rf_size),
        }
    }
}

/// The five stock 8x8 configurations.
pub fn baseline_presets() -> Vec<ExperimentConfig> {
    let base = ExperimentConfig::default();
    vec![
        ExperimentConfig {
            config_id: "search2".into(),
            mu_search: 2,
            mu_backoff: 304,
            ..base.clone()
        },
        ExperimentConfig {
            config_id: "search3".into(),
            ..base.clone()
        },
        ExperimentConfig {
            config_id: "search4".into(),
            mu_search: 4,
            mu_backoff: 336,
            ..base.clone()
        },
        ExperimentConfig {
            config_id: "fixed7".into(),
            mu_search: 0,
            mu_capture: 256,
            mu_backoff: 320,
            mu_min: 36,
            init: WeightInit::Constant(7),
            ..base.clone()
        },
        ExperimentConfig {
            config_id: "normal80".into(),
            mu_search: 0,
            mu_capture: 208,
            mu_backoff: 304,
            mu_min: 36,
            init: WeightInit::Normal {
                mean_frac: 0.80,
                sd_frac: 0.05,
            },
            ..base
        },
    ]
}

/// The two stock 18x18 scale-up configurations.
pub fn rf18_presets() -> Vec<ExperimentConfig> {
    let base = ExperimentConfig {
        experiment: Experiment::Rf18,
        rf_size: 18,
        theta: 56,
        mu_min: 40,
        ..ExperimentConfig::default()
    };
    vec![
        ExperimentConfig {
            config_id: "rf18-search4".into(),
            mu_search: 4,
            mu_capture: 232,
            mu_backoff: 288,
            ..base.clone()
        },
        ExperimentConfig {
            config_id: "rf18-search0".into(),
            mu_search: 0,
            mu_capture: 224,
            mu_backoff: 240,
            init: WeightInit::Constant(7),
            ..base
        },
    ]
}

/// Look up a stock configuration by id.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    baseline_presets()
        .into_iter()
        .chain(rf18_presets())
        .find(|c| c.config_id == name)
}

#[derive(Debug, Clone)]
pub struct WindowReport {
    pub name: String,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, Copy)]
pub struct BucketRow {
    pub start: usize,
    pub counts: UpdateCounts,
}

#[derive(Debug, Clone, Copy)]
pub struct TemporalRow {
    pub time: u32,
    pub count: usize,
    pub cum_coverage: f64,
    pub cum_purity: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config_id: String,
    pub seed: u64,
    pub windows: Vec<WindowReport>,
    pub buckets: Vec<BucketRow>,
    pub temporal: Option<Vec<TemporalRow>>,
    /// Final column state (weights keep evolving through the last window).
    pub column: Column,
    /// Applied updates inside evaluation windows.
    pub eval_updates: UpdateCounts,
}

impl RunReport {
    /// Scores of the last evaluation window.
    pub fn primary(&self) -> &MetricsReport {
        &self.windows.last().expect("a run has at least one window").metrics
    }

    /// Mean applied updates per pattern over a pattern range, from the
    /// bucket log (the range must align to whole buckets).
    pub fn mean_updates_per_pattern(&self, range: Range<usize>) -> f64 {
        let total: u64 = self
            .buckets
            .iter()
            .filter(|b| b.start >= range.start && b.start < range.end)
            .map(|b| b.counts.total())
            .sum();
        total as f64 / (range.end - range.start) as f64
    }
}

struct WindowRecorder {
    name: String,
    range: Range<usize>,
    patterns: Vec<Pattern>,
    winners: Vec<Option<usize>>,
    times: Vec<Option<u32>>,
    w_conv_at_end: f64,
}

fn init_weights(column: &mut Column, init: &WeightInit, mut rng: SimRng) -> Result<()> {
    match init {
        WeightInit::Zeros => Ok(()),
        WeightInit::Constant(c) => column.fill_weights(*c),
        WeightInit::Normal { mean_frac, sd_frac } => {
            let w_max = column.w_max() as f64;
            let values: Vec<u32> = (0..column.p() * column.q())
                .map(|_| {
                    let v = mean_frac * w_max + sd_frac * w_max * rng.normal();
                    v.round().clamp(0.0, w_max) as u32
                })
                .collect();
            column.set_weights(&values)
        }
    }
}

/// Execute one simulation run.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let baselines = config.baselines()?;
    let p = baselines.line_count();
    let mut column = Column::new(p, config.q, config.theta, config.w_max)?
        .with_response(config.response);
    init_weights(
        &mut column,
        &config.init,
        SimRng::new(SimRng::derive_seed(config.seed, INIT_TAG)),
    )?;
    let mut trainer = Trainer::new(
        config.stdp_params()?,
        SimRng::new(SimRng::derive_seed(config.seed, LEARNER_TAG)),
    )?
    .with_target(config.stdp_target);

    let length = config.stream_length();
    let spec = StreamSpec {
        length,
        noise_p: config.noise_p,
        schedule: config.schedule(),
        seed: SimRng::derive_seed(config.seed, STREAM_TAG),
    };
    let stream = gen_stream(&baselines, spec)?;

    let mut recorders: Vec<WindowRecorder> = config
        .windows()
        .into_iter()
        .map(|(name, range)| WindowRecorder {
            name,
            patterns: Vec::with_capacity(range.len()),
            winners: Vec::with_capacity(range.len()),
            times: Vec::with_capacity(range.len()),
            range,
            w_conv_at_end: 0.0,
        })
        .collect();
    let mut buckets = vec![UpdateCounts::default(); length.div_ceil(UPDATE_BUCKET)];
    let mut eval_updates = UpdateCounts::default();

    for (idx, (volley, label)) in stream.enumerate() {
        let (inference, counts) = trainer.step(&mut column, &volley)?;
        buckets[idx / UPDATE_BUCKET].add(&counts);

        let mut in_window = false;
        for rec in &mut recorders {
            if rec.range.contains(&idx) {
                in_window = true;
                rec.patterns
                    .push(Pattern::new(volley.support_bits(), Some(label)));
                rec.winners.push(inference.winner);
                let time = match (inference.winner, config.theta_f) {
                    (Some(j), Some(theta_f)) => {
                        let SpikeTime::At(zt) = inference.z.get(j) else {
                            unreachable!("winner implies a finite post-inhibition spike")
                        };
                        Some(extrapolate_spike_time(
                            zt,
                            inference.winner_potential,
                            theta_f,
                        )?)
                    }
                    (Some(j), None) => inference.z.get(j).finite(),
                    (None, _) => None,
                };
                rec.times.push(time);
            }
            if idx + 1 == rec.range.end {
                rec.w_conv_at_end = metrics::w_conv(column.weights(), column.w_max());
            }
        }
        if in_window {
            eval_updates.add(&counts);
        }
    }

    let mut windows = Vec::with_capacity(recorders.len());
    for rec in &recorders {
        let labels: Vec<u8> = rec
            .patterns
            .iter()
            .map(|p| p.label.expect("stream patterns are labelled"))
            .collect();
        let clustering = Clustering::new(rec.winners.clone(), config.q)?;
        let centroids = metrics::centroids_of(&rec.patterns, &clustering)?;
        windows.push(WindowReport {
            name: rec.name.clone(),
            metrics: MetricsReport {
                w_conv: Some(rec.w_conv_at_end),
                avg_dist: metrics::avg_dist(&rec.patterns, &clustering, &centroids)?,
                c_conv: metrics::c_conv(&rec.patterns, &clustering, &centroids)?,
                purity: metrics::purity(&clustering, &labels)?,
            },
        });
    }

    let temporal = if config.theta_f.is_some() {
        let rec = recorders.last().expect("at least one window");
        let labels: Vec<u8> = rec.patterns.iter().map(|p| p.label.unwrap()).collect();
        Some(temporal_table(&rec.winners, &rec.times, &labels, config.q)?)
    } else {
        None
    };

    let report = RunReport {
        config_id: config.config_id.clone(),
        seed: config.seed,
        windows,
        buckets: buckets
            .into_iter()
            .enumerate()
            .map(|(i, counts)| BucketRow {
                start: i * UPDATE_BUCKET,
                counts,
            })
            .collect(),
        temporal,
        column,
        eval_updates,
    };

    if let Some(dir) = &config.out_dir {
        write_run_outputs(dir, config, &report)?;
    }
    Ok(report)
}

/// Bucket evaluated patterns by winner spike time and accumulate coverage
/// and purity over increasing time cutoffs.
pub fn temporal_table(
    winners: &[Option<usize>],
    times: &[Option<u32>],
    labels: &[u8],
    q: usize,
) -> Result<Vec<TemporalRow>> {
    let total = times.len();
    let mut spiked: Vec<(u32, usize, u8)> = winners
        .iter()
        .zip(times)
        .zip(labels)
        .filter_map(|((w, t), &l)| match (w, t) {
            (Some(w), Some(t)) => Some((*t, *w, l)),
            _ => None,
        })
        .collect();
    if spiked.is_empty() {
        return Err(Error::NoWinners);
    }
    spiked.sort_by_key(|&(t, _, _)| t);

    let mut rows = Vec::new();
    let mut covered = 0usize;
    let mut i = 0;
    let l_max = labels.iter().copied().max().unwrap_or(0) as usize + 1;
    let mut tally = vec![0u64; q * l_max];
    while i < spiked.len() {
        let time = spiked[i].0;
        let mut count = 0;
        while i < spiked.len() && spiked[i].0 == time {
            let (_, w, l) = spiked[i];
            tally[w * l_max + l as usize] += 1;
            count += 1;
            i += 1;
        }
        covered += count;
        let majority: u64 = (0..q)
            .map(|c| tally[c * l_max..(c + 1) * l_max].iter().copied().max().unwrap_or(0))
            .sum();
        rows.push(TemporalRow {
            time,
            count,
            cum_coverage: covered as f64 / total as f64,
            cum_purity: majority as f64 / covered as f64,
        });
    }
    Ok(rows)
}

/// Parameter grid around a base config; every combination is run for every
/// warm-up regime.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub theta: Vec<u32>,
    pub mu_capture: Vec<u32>,
    pub mu_backoff: Vec<u32>,
    pub warmups: Vec<usize>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            theta: vec![56, 60, 64],
            mu_capture: vec![208, 224, 240],
            mu_backoff: vec![320, 336, 352],
            warmups: vec![10_000, 20_000, 60_000],
        }
    }
}

/// Run every grid point (in parallel when enabled), returning reports in
/// grid order: warmup-major, then theta, mu_capture, mu_backoff.
pub fn sweep(base: &ExperimentConfig, grid: &SweepGrid) -> Result<Vec<RunReport>> {
    if grid.theta.is_empty()
        || grid.mu_capture.is_empty()
        || grid.mu_backoff.is_empty()
        || grid.warmups.is_empty()
    {
        return Err(Error::InvalidConfig("empty sweep grid".into()));
    }
    let mut configs = Vec::new();
    for &warmup in &grid.warmups {
        for &theta in &grid.theta {
            for &mu_capture in &grid.mu_capture {
                for &mu_backoff in &grid.mu_backoff {
                    configs.push(ExperimentConfig {
                        theta,
                        mu_capture,
                        mu_backoff,
                        warmup,
                        length: None,
                        config_id: format!(
                            "t{theta}-c{mu_capture}-b{mu_backoff}-w{}k",
                            warmup / 1000
                        ),
                        out_dir: None,
                        ..base.clone()
                    });
                }
            }
        }
    }
    let reports: Vec<Result<RunReport>> = par::map_slice(&configs, run);
    let reports: Vec<RunReport> = reports.into_iter().collect::<Result<_>>()?;
    if let Some(dir) = &base.out_dir {
        write_sweep_csv(&dir.join("sweep.csv"), &reports)?;
    }
    Ok(reports)
}

#[derive(Debug, Clone)]
pub struct KmeansSeedRow {
    pub seed: u64,
    pub epochs: usize,
    pub purity: f64,
    pub avg_dist: f64,
    pub c_conv: f64,
}

#[derive(Debug, Clone)]
pub struct KmeansBatch {
    pub rows: Vec<KmeansSeedRow>,
    pub mean_purity: f64,
    pub best_purity: f64,
    pub worst_purity: f64,
    pub mean_avg_dist: f64,
    pub max_epochs_seen: usize,
}

/// Fit the offline baseline on the warm-up prefix and score it on the
/// evaluation span, over `kmeans_seeds` independent initializations.
pub fn run_kmeans(config: &ExperimentConfig) -> Result<KmeansBatch> {
    config.validate()?;
    let baselines = config.baselines()?;
    let spec = StreamSpec {
        length: config.warmup + config.eval,
        noise_p: config.noise_p,
        schedule: Schedule::UniformAll,
        seed: SimRng::derive_seed(config.seed, STREAM_TAG),
    };
    let mut train = Vec::with_capacity(config.warmup);
    let mut test = Vec::with_capacity(config.eval);
    let mut test_labels = Vec::with_capacity(config.eval);
    for (idx, (volley, label)) in gen_stream(&baselines, spec)?.enumerate() {
        let pattern = Pattern::new(volley.support_bits(), Some(label));
        if idx < config.warmup {
            train.push(pattern);
        } else {
            test.push(pattern);
            test_labels.push(label);
        }
    }

    let seeds: Vec<u64> = (0..config.kmeans_seeds as u64)
        .map(|i| SimRng::derive_seed(config.seed, KMEANS_TAG + i))
        .collect();
    let rows: Vec<Result<KmeansSeedRow>> = par::map_slice(&seeds, |&seed| {
        let mut rng = SimRng::new(seed);
        let model = kmeans_fit(&train, config.q, &mut rng, config.kmeans_max_epochs)?;
        let (report, _) = kmeans_evaluate(&model, &test, &test_labels)?;
        Ok(KmeansSeedRow {
            seed,
            epochs: model.epochs_run,
            purity: report.purity,
            avg_dist: report.avg_dist,
            c_conv: report.c_conv,
        })
    });
    let rows: Vec<KmeansSeedRow> = rows.into_iter().collect::<Result<_>>()?;

    let n = rows.len() as f64;
    let batch = KmeansBatch {
        mean_purity: rows.iter().map(|r| r.purity).sum::<f64>() / n,
        best_purity: rows.iter().map(|r| r.purity).fold(f64::MIN, f64::max),
        worst_purity: rows.iter().map(|r| r.purity).fold(f64::MAX, f64::min),
        mean_avg_dist: rows.iter().map(|r| r.avg_dist).sum::<f64>() / n,
        max_epochs_seen: rows.iter().map(|r| r.epochs).max().unwrap_or(0),
        rows,
    };
    if let Some(dir) = &config.out_dir {
        write_kmeans_csv(&dir.join("kmeans.csv"), &batch)?;
    }
    Ok(batch)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(contents.as_bytes())
        .map_err(|e| Error::io(path, e))
}

fn metrics_csv_rows(config: &ExperimentConfig, report: &RunReport) -> String {
    let mut out = String::from(
        "config_id,theta,mu_search,mu_capture,mu_backoff,mu_min,w_conv,avg_dist,c_conv,purity\n",
    );
    for window in &report.windows {
        let id = if report.windows.len() > 1 {
            format!("{}-{}", report.config_id, window.name)
        } else {
            report.config_id.clone()
        };
        let m = &window.metrics;
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6}\n",
            id,
            config.theta,
            config.mu_search,
            config.mu_capture,
            config.mu_backoff,
            config.mu_min,
            m.w_conv.unwrap_or(f64::NAN),
            m.avg_dist,
            m.c_conv,
            m.purity,
        ));
    }
    out
}

fn updates_csv(report: &RunReport) -> String {
    let mut out = String::from("bucket_start,searches,captures,backoffs\n");
    for b in &report.buckets {
        out.push_str(&format!(
            "{},{},{},{}\n",
            b.start, b.counts.searches, b.counts.captures, b.counts.backoffs
        ));
    }
    out
}

fn temporal_csv(rows: &[TemporalRow]) -> String {
    let mut out = String::from("time,count,cum_coverage,cum_purity\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.6}\n",
            r.time, r.count, r.cum_coverage, r.cum_purity
        ));
    }
    out
}

fn write_run_outputs(dir: &Path, config: &ExperimentConfig, report: &RunReport) -> Result<()> {
    create_dir(dir)?;
    let stem = format!("{}-seed{}", report.config_id, report.seed);
    write_file(
        &dir.join(format!("{stem}-metrics.csv")),
        &metrics_csv_rows(config, report),
    )?;
    write_file(&dir.join(format!("{stem}-updates.csv")), &updates_csv(report))?;
    if let Some(temporal) = &report.temporal {
        write_file(
            &dir.join(format!("{stem}-temporal.csv")),
            &temporal_csv(temporal),
        )?;
    }
    report
        .column
        .save_weights(&dir.join(format!("{stem}-weights.txt")))?;
    Ok(())
}

fn write_sweep_csv(path: &Path, reports: &[RunReport]) -> Result<()> {
    if let Some(dir) = path.parent() {
        create_dir(dir)?;
    }
    // purity sorted descending within each warm-up regime
    let mut by_warmup: Vec<(usize, &RunReport)> = reports
        .iter()
        .map(|r| {
            let warmup: usize = r
                .config_id
                .rsplit("-w")
                .next()
                .and_then(|s| s.strip_suffix('k'))
                .and_then(|s| s.parse::<usize>().ok())
                .map(|k| k * 1000)
                .unwrap_or(0);
            (warmup, r)
        })
        .collect();
    by_warmup.sort_by(|(wa, ra), (wb, rb)| {
        wa.cmp(wb)
            .then(rb.primary().purity.total_cmp(&ra.primary().purity))
    });
    let mut out = String::from("warmup,rank,config_id,purity,c_conv,avg_dist,w_conv\n");
    let mut rank = 0;
    let mut last_warmup = usize::MAX;
    for (warmup, report) in by_warmup {
        if warmup != last_warmup {
            rank = 0;
            last_warmup = warmup;
        }
        rank += 1;
        let m = report.primary();
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6}\n",
            warmup,
            rank,
            report.config_id,
            m.purity,
            m.c_conv,
            m.avg_dist,
            m.w_conv.unwrap_or(f64::NAN)
        ));
    }
    write_file(path, &out)
}

fn write_kmeans_csv(path: &Path, batch: &KmeansBatch) -> Result<()> {
    if let Some(dir) = path.parent() {
        create_dir(dir)?;
    }
    let mut out = String::from("seed,epochs,purity,avg_dist,c_conv\n");
    for r in &batch.rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6}\n",
            r.seed, r.epochs, r.purity, r.avg_dist, r.c_conv
        ));
    }
    write_file(path, &out)
}

/// Parse a plain-text `key = value` config file on top of the defaults.
/// A `preset = <id>` line (anywhere) is applied first; later keys override.
pub fn parse_config_file(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidConfig(format!(
                "line {}: expected `key = value`, got `{raw}`",
                lineno + 1
            )));
        };
        entries.push((key.trim().to_string(), value.trim().to_string()));
    }

    let mut config = ExperimentConfig::default();
    if let Some((_, name)) = entries.iter().find(|(k, _)| k == "preset") {
        config = preset(name)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown preset `{name}`")))?;
    }
    for (key, value) in &entries {
        apply_config_key(&mut config, key, value)?;
    }
    Ok(config)
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::InvalidConfig(format!("bad value `{value}` for `{key}`")))
}

fn apply_config_key(config: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "preset" => {} // handled up front
        "experiment" => config.experiment = value.parse()?,
        "config_id" => config.config_id = value.to_string(),
        "rf_size" => config.rf_size = parse_num(key, value)?,
        "q" => config.q = parse_num(key, value)?,
        "theta" => config.theta = parse_num(key, value)?,
        "theta_f" => {
            config.theta_f = if value == "none" {
                None
            } else {
                Some(parse_num(key, value)?)
            }
        }
        "w_max" => config.w_max = parse_num(key, value)?,
        "mu_search" => config.mu_search = parse_num(key, value)?,
        "mu_capture" => config.mu_capture = parse_num(key, value)?,
        "mu_backoff" => config.mu_backoff = parse_num(key, value)?,
        "mu_min" => config.mu_min = parse_num(key, value)?,
        "init" => {
            config.init = match value {
                "zeros" => WeightInit::Zeros,
                "constant" => WeightInit::Constant(7),
                "normal" => WeightInit::Normal {
                    mean_frac: 0.80,
                    sd_frac: 0.05,
                },
                other => {
                    return Err(Error::InvalidConfig(format!("unknown init `{other}`")));
                }
            }
        }
        "init_value" => config.init = WeightInit::Constant(parse_num(key, value)?),
        "init_mean_pct" => {
            let pct: u32 = parse_num(key, value)?;
            let sd = match config.init {
                WeightInit::Normal { sd_frac, .. } => sd_frac,
                _ => 0.05,
            };
            config.init = WeightInit::Normal {
                mean_frac: pct as f64 / 100.0,
                sd_frac: sd,
            };
        }
        "init_sd_pct" => {
            let pct: u32 = parse_num(key, value)?;
            let mean = match config.init {
                WeightInit::Normal { mean_frac, .. } => mean_frac,
                _ => 0.80,
            };
            config.init = WeightInit::Normal {
                mean_frac: mean,
                sd_frac: pct as f64 / 100.0,
            };
        }
        "warmup" => config.warmup = parse_num(key, value)?,
        "eval" => config.eval = parse_num(key, value)?,
        "length" => {
            config.length = if value == "none" {
                None
            } else {
                Some(parse_num(key, value)?)
            }
        }
        "seed" => config.seed = parse_num(key, value)?,
        "noise_pct" => {
            let pct: u32 = parse_num(key, value)?;
            config.noise_p = pct as f64 / 100.0;
        }
        "transition" => config.transition = parse_num(key, value)?,
        "response" => {
            config.response = match value {
                "ramp" => ResponseKind::Ramp,
                "step" => ResponseKind::Step,
                other => {
                    return Err(Error::InvalidConfig(format!("unknown response `{other}`")));
                }
            }
        }
        "stdp_target" => {
            config.stdp_target = match value {
                "post" => StdpTarget::PostInhibition,
                "pre" => StdpTarget::PreInhibition,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown stdp target `{other}`"
                    )));
                }
            }
        }
        "indexing" => {
            config.indexing = match value {
                "class0" => ExemplarIndexing::ClassZeroBased,
                "class1" => ExemplarIndexing::ClassOneBased,
                "global0" => ExemplarIndexing::GlobalZeroBased,
                "global1" => ExemplarIndexing::GlobalOneBased,
                other => {
                    return Err(Error::InvalidConfig(format!("unknown indexing `{other}`")));
                }
            }
        }
        "threshold" => config.binarize_threshold = parse_num(key, value)?,
        "kmeans_seeds" => config.kmeans_seeds = parse_num(key, value)?,
        "kmeans_max_epochs" => config.kmeans_max_epochs = parse_num(key, value)?,
        _ if key.starts_with("exemplar_") => {
            let digit: usize = key
                .strip_prefix("exemplar_")
                .and_then(|d| d.parse().ok())
                .filter(|&d| d < 10)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown key `{key}`")))?;
            config.exemplars[digit] = parse_num(key, value)?;
        }
        other => {
            return Err(Error::InvalidConfig(format!("unknown key `{other}`")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_round_trip() {
        let text = "
            # stock row with overrides
            preset = fixed7
            seed = 9
            warmup = 1000
            eval = 500
            theta_f = 512
            noise_pct = 25
        ";
        let config = parse_config_str(text).unwrap();
        assert_eq!(config.config_id, "fixed7");
        assert_eq!(config.mu_search, 0);
        assert_eq!(config.mu_capture, 256);
        assert_eq!(config.init, WeightInit::Constant(7));
        assert_eq!(config.seed, 9);
        assert_eq!(config.warmup, 1000);
        assert_eq!(config.eval, 500);
        assert_eq!(config.theta_f, Some(512));
        assert_eq!(config.noise_p, 0.25);
        config.validate().unwrap();
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        assert!(parse_config_str("bogus = 3").is_err());
        assert!(parse_config_str("theta = soup").is_err());
        assert!(parse_config_str("no equals sign here").is_err());
        assert!(parse_config_str("preset = nonexistent").is_err());
    }

    #[test]
    fn validation_catches_bad_windows() {
        let config = ExperimentConfig {
            length: Some(100),
            warmup: 90,
            eval: 20,
            ..ExperimentConfig::default()
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn presets_are_valid() {
        for config in baseline_presets().into_iter().chain(rf18_presets()) {
            config.validate().unwrap();
        }
        assert!(preset("search3").is_some());
        assert!(preset("rf18-search4").is_some());
        assert!(preset("nope").is_none());
    }

    #[test]
    fn odd_even_windows() {
        let config = ExperimentConfig {
            experiment: Experiment::OddEven,
            warmup: 10_000,
            eval: 10_000,
            length: Some(70_000),
            ..ExperimentConfig::default()
        };
        let windows = config.windows();
        assert_eq!(windows[0].1, 10_000..20_000);
        assert_eq!(windows[1].1, 60_000..70_000);
        config.validate().unwrap();
    }

    #[test]
    fn temporal_table_shapes() {
        let winners = vec![Some(0), Some(0), Some(1), None, Some(1)];
        let times = vec![Some(3), Some(1), Some(1), None, Some(5)];
        let labels = vec![0, 0, 1, 2, 0];
        let rows = temporal_table(&winners, &times, &labels, 2).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].time, 1);
        assert_eq!(rows[0].count, 2);
        assert!((rows[0].cum_coverage - 2.0 / 5.0).abs() < 1e-12);
        assert_eq!(rows[2].time, 5);
        assert!((rows[2].cum_coverage - 4.0 / 5.0).abs() < 1e-12);
        // all spiked patterns pure except the last (winner 1 sees labels 1 then 0)
        assert!((rows[2].cum_purity - 3.0 / 4.0).abs() < 1e-12);

        assert!(matches!(
            temporal_table(&[None], &[None], &[0], 2),
            Err(Error::NoWinners)
        ));
    }

    #[test]
    fn small_run_is_deterministic_and_learning_stays_on() {
        let config = ExperimentConfig {
            warmup: 2000,
            eval: 1000,
            ..ExperimentConfig::default()
        };
        let a = run(&config).unwrap();
        let b = run(&config).unwrap();
        assert_eq!(a.column.weights(), b.column.weights());
        assert_eq!(a.primary().purity.to_bits(), b.primary().purity.to_bits());
        assert_eq!(
            a.primary().avg_dist.to_bits(),
            b.primary().avg_dist.to_bits()
        );
        // learning-always-on: updates applied inside the eval window
        assert!(a.eval_updates.total() > 0);
    }

    #[test]
    fn sweep_of_one_point_matches_run() {
        let base = ExperimentConfig {
            warmup: 1500,
            eval: 500,
            ..ExperimentConfig::default()
        };
        let grid = SweepGrid {
            theta: vec![base.theta],
            mu_capture: vec![base.mu_capture],
            mu_backoff: vec![base.mu_backoff],
            warmups: vec![base.warmup],
        };
        let reports = sweep(&base, &grid).unwrap();
        assert_eq!(reports.len(), 1);
        let direct = run(&ExperimentConfig {
            config_id: reports[0].config_id.clone(),
            ..base
        })
        .unwrap();
        assert_eq!(reports[0].primary().purity, direct.primary().purity);
        assert_eq!(reports[0].column.weights(), direct.column.weights());
    }
}
