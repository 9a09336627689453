//! Online unsupervised clustering with a spiking temporal column.
//!
//! A column passes an input spike volley through a synaptic crossbar into a
//! row of ramp no-leak excitatory neurons; winner-take-all inhibition keeps
//! the earliest output spike, and a four-case stochastic learning rule
//! adjusts each synapse from purely local spike timing. The crate bundles
//! the column itself, the evaluation metrics, an offline k-means baseline
//! under the same distance metric, a benchmark generator (noisy digit
//! streams from MNIST IDX files or a bundled synthetic alphabet), and an
//! experiment runner that drives the whole pipeline from plain-text configs.
//!
//! Data-parallel pieces (k-means fits, sweeps, batch scoring) run on rayon
//! by default; disable the `parallel` feature for a fully sequential build.

pub mod benchgen;
pub mod column;
pub mod error;
pub mod kmeans;
pub mod metrics;
pub mod neuron;
pub mod rng;
pub mod runner;
pub mod stdp;
pub mod volley;

mod par;

pub use column::{wta, Column, InferenceResult};
pub use error::{Error, Result};
pub use metrics::{MetricsReport, Pattern};
pub use neuron::{
    body_potential, extrapolate_spike_time, ideal_spike_time, response, spike_time, NeuronResult,
    ResponseKind,
};
pub use rng::{RngMode, SimRng};
pub use runner::{run, run_kmeans, sweep, ExperimentConfig, RunReport};
pub use stdp::{stdp_update, StdpParams, StdpTarget, Trainer, UpdateCounts, UpdateKind};
pub use volley::{posneg_encode, BinaryImage, SpikeTime, Volley};
