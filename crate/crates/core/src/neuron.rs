//! Excitatory neuron model: response functions, body potential, and
//! threshold spiking.
//!
//! The working response function is a ramp that rises by one per time unit
//! from spike arrival until it saturates at the synaptic weight and never
//! decays. A step variant (full weight from arrival onward) is kept behind
//! [`ResponseKind`] for the temporal-flattening ablation.

use crate::error::{Error, Result};
use crate::volley::{SpikeTime, Volley};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResponseKind {
    #[default]
    Ramp,
    Step,
}

/// Outcome of evaluating one neuron against one volley.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeuronResult {
    pub spike: SpikeTime,
    /// Body potential at the spike time; 0 when the neuron never spikes.
    pub potential_at_spike: u32,
}

#[inline]
pub(crate) fn response_unchecked(kind: ResponseKind, w: u32, t: i64) -> u32 {
    match kind {
        ResponseKind::Ramp => {
            if t < 0 {
                0
            } else if t < w as i64 {
                (t + 1) as u32
            } else {
                w
            }
        }
        ResponseKind::Step => {
            if t < 0 {
                0
            } else {
                w
            }
        }
    }
}

/// Response value of a weight-`w` synapse `t` time units after its input
/// spike. `w` must lie in [0, `w_max`].
pub fn response(kind: ResponseKind, w: u32, t: i64, w_max: u32) -> Result<u32> {
    if w > w_max {
        return Err(Error::WeightOutOfRange {
            value: w,
            max: w_max,
        });
    }
    Ok(response_unchecked(kind, w, t))
}

#[inline]
fn potential_unchecked(kind: ResponseKind, x: &Volley, weights: &[u32], t: i64) -> u32 {
    let mut acc = 0u32;
    for (xi, &w) in x.iter().zip(weights) {
        if let Some(xt) = xi.finite() {
            acc += response_unchecked(kind, w, t - xt as i64);
        }
    }
    acc
}

/// Sum of time-shifted responses at time `t`. Lines without a spike
/// contribute nothing.
pub fn body_potential(kind: ResponseKind, x: &Volley, weights: &[u32], t: i64) -> Result<u32> {
    if x.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: weights.len(),
        });
    }
    Ok(potential_unchecked(kind, x, weights, t))
}

/// Earliest time at which the body potential reaches `theta`, together with
/// the potential at that time.
///
/// The potential is zero before the earliest input spike and constant once
/// every response has saturated, so the scan runs over that finite window
/// only; if even the saturated sum stays below `theta` the neuron never
/// spikes.
pub fn spike_time(
    kind: ResponseKind,
    x: &Volley,
    weights: &[u32],
    theta: u32,
) -> Result<NeuronResult> {
    if x.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: weights.len(),
        });
    }
    debug_assert!(theta >= 1);

    let mut saturated = 0u32;
    let mut t_min = u32::MAX;
    let mut t_max = 0u32;
    let mut w_top = 0u32;
    let mut any = false;
    for (xi, &w) in x.iter().zip(weights) {
        if let Some(xt) = xi.finite() {
            any = true;
            saturated += w;
            t_min = t_min.min(xt);
            t_max = t_max.max(xt);
            w_top = w_top.max(w);
        }
    }
    if !any || saturated < theta {
        return Ok(NeuronResult {
            spike: SpikeTime::Inf,
            potential_at_spike: 0,
        });
    }

    let bound = t_max as i64 + w_top as i64;
    for t in t_min as i64..=bound {
        let v = potential_unchecked(kind, x, weights, t);
        if v >= theta {
            return Ok(NeuronResult {
                spike: SpikeTime::At(t as u32),
                potential_at_spike: v,
            });
        }
    }
    // saturated >= theta guarantees the scan hit the threshold
    unreachable!("threshold not reached despite sufficient saturated potential")
}

/// Rescale a spike time observed at implementation threshold crossing
/// potential `v` to the functional threshold `theta_f`: ceil(z * theta_f / v).
pub fn extrapolate_spike_time(z: u32, v: u32, theta_f: u32) -> Result<u32> {
    if v == 0 {
        return Err(Error::ZeroDivisor);
    }
    let num = z as u64 * theta_f as u64;
    Ok(num.div_ceil(v as u64) as u32)
}

/// Spike time of an idealized unbounded ramp fed by `m` simultaneous unit
/// matches: ceil(theta / m) - 1.
pub fn ideal_spike_time(m: u32, theta: u32) -> Result<u32> {
    if m == 0 {
        return Err(Error::ZeroDivisor);
    }
    Ok((theta as u64).div_ceil(m as u64) as u32 - 1)
}
