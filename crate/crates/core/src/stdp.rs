//! Synapse-local stochastic learning.
//!
//! Weight updates are unit increments or decrements gated by Bernoulli draws
//! over /1024 probabilities. Four cases cover the combinations of input and
//! output spikes being present or absent; when both draws of a case must
//! succeed they are combined by logical AND. The weight-dependent stabilizer
//! probabilities make weights sticky near 0 and `w_max`, with a floor of
//! `mu_min` so no weight is permanently stuck.

use crate::column::{Column, InferenceResult};
use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::volley::{SpikeTime, Volley};

/// Learning probabilities, each an integer numerator over 1024.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StdpParams {
    pub mu_search: u32,
    pub mu_capture: u32,
    pub mu_backoff: u32,
    pub mu_min: u32,
    pub w_max: u32,
}

impl StdpParams {
    pub fn new(
        mu_search: u32,
        mu_capture: u32,
        mu_backoff: u32,
        mu_min: u32,
        w_max: u32,
    ) -> Result<Self> {
        let params = StdpParams {
            mu_search,
            mu_capture,
            mu_backoff,
            mu_min,
            w_max,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for value in [self.mu_search, self.mu_capture, self.mu_backoff, self.mu_min] {
            if value > 1024 {
                return Err(Error::NumeratorOutOfRange { value });
            }
        }
        if self.w_max == 0 {
            return Err(Error::InvalidConfig("w_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// Which update case fired, and whether the weight actually moved after the
/// draws and clamping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateKind {
    Search,
    Capture,
    Backoff,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Update {
    pub kind: UpdateKind,
    pub applied: bool,
}

/// Increment-permission probability at weight `w`, as a /1024 numerator:
/// round(1024 * w_n * (2 - w_n)) with w_n = w / w_max.
pub fn f_plus(w: u32, w_max: u32) -> Result<u32> {
    if w > w_max {
        return Err(Error::WeightOutOfRange {
            value: w,
            max: w_max,
        });
    }
    let num = 1024u64 * w as u64 * (2 * w_max - w) as u64;
    let den = w_max as u64 * w_max as u64;
    Ok(((num + den / 2) / den) as u32)
}

/// Decrement-permission probability: the mirror of [`f_plus`] about the
/// midpoint, so weights stick near `w_max` under decrements.
pub fn f_minus(w: u32, w_max: u32) -> Result<u32> {
    if w > w_max {
        return Err(Error::WeightOutOfRange {
            value: w,
            max: w_max,
        });
    }
    f_plus(w_max - w, w_max)
}

#[inline]
fn bump_up(w: u32, w_max: u32, mu: u32, stab: u32, rng: &mut SimRng) -> (u32, bool) {
    // both draws always happen, b1 before b2
    let b1 = rng.brv(mu);
    let b2 = rng.brv(stab);
    if b1 && b2 && w < w_max {
        (w + 1, true)
    } else {
        (w, false)
    }
}

#[inline]
fn bump_down(w: u32, mu: u32, stab: u32, rng: &mut SimRng) -> (u32, bool) {
    let b1 = rng.brv(mu);
    let b2 = rng.brv(stab);
    if b1 && b2 && w > 0 {
        (w - 1, true)
    } else {
        (w, false)
    }
}

#[inline]
fn bump_search(w: u32, w_max: u32, mu: u32, rng: &mut SimRng) -> (u32, bool) {
    let b = rng.brv(mu);
    if b && w < w_max {
        (w + 1, true)
    } else {
        (w, false)
    }
}

/// Apply one update-table case to a single synapse with input spike `x` and
/// output spike `z`, returning the new weight and what happened.
pub fn stdp_update(
    w: u32,
    x: SpikeTime,
    z: SpikeTime,
    params: &StdpParams,
    rng: &mut SimRng,
) -> Result<(u32, Update)> {
    params.validate()?;
    if w > params.w_max {
        return Err(Error::WeightOutOfRange {
            value: w,
            max: params.w_max,
        });
    }
    let up_stab = f_plus(w, params.w_max)?.max(params.mu_min);
    let down_stab = f_minus(w, params.w_max)?.max(params.mu_min);
    let (new_w, kind, applied) = match (x, z) {
        (SpikeTime::At(xt), SpikeTime::At(zt)) if xt <= zt => {
            let (nw, applied) = bump_up(w, params.w_max, params.mu_capture, up_stab, rng);
            (nw, UpdateKind::Capture, applied)
        }
        (SpikeTime::At(_), SpikeTime::At(_)) => {
            let (nw, applied) = bump_down(w, params.mu_backoff, down_stab, rng);
            (nw, UpdateKind::Backoff, applied)
        }
        (SpikeTime::At(_), SpikeTime::Inf) => {
            let (nw, applied) = bump_search(w, params.w_max, params.mu_search, rng);
            (nw, UpdateKind::Search, applied)
        }
        (SpikeTime::Inf, SpikeTime::At(_)) => {
            let (nw, applied) = bump_down(w, params.mu_backoff, down_stab, rng);
            (nw, UpdateKind::Backoff, applied)
        }
        (SpikeTime::Inf, SpikeTime::Inf) => (w, UpdateKind::None, false),
    };
    Ok((new_w, Update { kind, applied }))
}

/// Output signal the learner observes: the post-inhibition volley (default)
/// or the raw pre-inhibition spike times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StdpTarget {
    #[default]
    PostInhibition,
    PreInhibition,
}

/// Counts of applied updates, by kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UpdateCounts {
    pub searches: u64,
    pub captures: u64,
    pub backoffs: u64,
}

impl UpdateCounts {
    pub fn total(&self) -> u64 {
        self.searches + self.captures + self.backoffs
    }

    pub fn add(&mut self, other: &UpdateCounts) {
        self.searches += other.searches;
        self.captures += other.captures;
        self.backoffs += other.backoffs;
    }
}

/// Online learner: owns the learning parameters, the stabilizer tables, and
/// the draw stream.
#[derive(Debug, Clone)]
pub struct Trainer {
    params: StdpParams,
    /// max(F+(w), mu_min) per weight value.
    up_stab: Vec<u32>,
    /// max(F-(w), mu_min) per weight value.
    down_stab: Vec<u32>,
    target: StdpTarget,
    rng: SimRng,
}

impl Trainer {
    pub fn new(params: StdpParams, rng: SimRng) -> Result<Self> {
        params.validate()?;
        let up_stab = (0..=params.w_max)
            .map(|w| Ok(f_plus(w, params.w_max)?.max(params.mu_min)))
            .collect::<Result<_>>()?;
        let down_stab = (0..=params.w_max)
            .map(|w| Ok(f_minus(w, params.w_max)?.max(params.mu_min)))
            .collect::<Result<_>>()?;
        Ok(Trainer {
            params,
            up_stab,
            down_stab,
            target: StdpTarget::default(),
            rng,
        })
    }

    pub fn with_target(mut self, target: StdpTarget) -> Self {
        self.target = target;
        self
    }

    pub fn params(&self) -> &StdpParams {
        &self.params
    }

    pub fn target(&self) -> StdpTarget {
        self.target
    }

    /// Run inference on `x`, then update every synapse against the observed
    /// output spikes. Draws are consumed row-major over synapses so weight
    /// trajectories are reproducible from the seed.
    pub fn step(&mut self, col: &mut Column, x: &Volley) -> Result<(InferenceResult, UpdateCounts)> {
        if col.w_max() != self.params.w_max {
            return Err(Error::InvalidConfig(format!(
                "column w_max {} differs from learner w_max {}",
                col.w_max(),
                self.params.w_max
            )));
        }
        let inference = col.infer(x)?;
        let outputs = match self.target {
            StdpTarget::PostInhibition => &inference.z,
            StdpTarget::PreInhibition => &inference.y,
        };
        let mut counts = UpdateCounts::default();
        let p = col.p();
        let w_max = self.params.w_max;
        for j in 0..col.q() {
            let out = outputs.get(j);
            let row = col.row_mut(j);
            match out {
                SpikeTime::Inf => {
                    // search row: only lines with an input spike draw
                    for i in 0..p {
                        if x.get(i).is_spike() {
                            let (nw, applied) =
                                bump_search(row[i], w_max, self.params.mu_search, &mut self.rng);
                            if applied {
                                row[i] = nw;
                                counts.searches += 1;
                            }
                        }
                    }
                }
                SpikeTime::At(zt) => {
                    for i in 0..p {
                        let w = row[i];
                        match x.get(i) {
                            SpikeTime::At(xt) if xt <= zt => {
                                let (nw, applied) = bump_up(
                                    w,
                                    w_max,
                                    self.params.mu_capture,
                                    self.up_stab[w as usize],
                                    &mut self.rng,
                                );
                                if applied {
                                    row[i] = nw;
                                    counts.captures += 1;
                                }
                            }
                            _ => {
                                // input after output, or no input at all
                                let (nw, applied) = bump_down(
                                    w,
                                    self.params.mu_backoff,
                                    self.down_stab[w as usize],
                                    &mut self.rng,
                                );
                                if applied {
                                    row[i] = nw;
                                    counts.backoffs += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok((inference, counts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(mu_search: u32, mu_capture: u32, mu_backoff: u32, mu_min: u32) -> StdpParams {
        StdpParams::new(mu_search, mu_capture, mu_backoff, mu_min, 8).unwrap()
    }

    #[test]
    fn f_plus_examples() {
        assert_eq!(f_plus(0, 8).unwrap(), 0);
        assert_eq!(f_plus(8, 8).unwrap(), 1024);
        assert_eq!(f_plus(4, 8).unwrap(), 768);
    }

    #[test]
    fn f_minus_mirrors_f_plus() {
        assert_eq!(f_minus(8, 8).unwrap(), 0);
        assert_eq!(f_minus(0, 8).unwrap(), 1024);
        assert_eq!(f_minus(4, 8).unwrap(), 768);
        for w in 0..=8 {
            assert_eq!(f_minus(w, 8).unwrap(), f_plus(8 - w, 8).unwrap());
        }
    }

    #[test]
    fn f_rejects_overweight() {
        assert!(f_plus(9, 8).is_err());
        assert!(f_minus(9, 8).is_err());
    }

    #[test]
    fn forced_capture_increments() {
        let p = params(0, 1024, 0, 1024);
        let mut rng = SimRng::new(1);
        let (w, u) = stdp_update(5, SpikeTime::At(0), SpikeTime::At(3), &p, &mut rng).unwrap();
        assert_eq!(w, 6);
        assert_eq!(u.kind, UpdateKind::Capture);
        assert!(u.applied);
    }

    #[test]
    fn no_spikes_no_update() {
        let p = params(1024, 1024, 1024, 1024);
        let mut rng = SimRng::new(1);
        let (w, u) = stdp_update(5, SpikeTime::Inf, SpikeTime::Inf, &p, &mut rng).unwrap();
        assert_eq!(w, 5);
        assert_eq!(u.kind, UpdateKind::None);
        assert!(!u.applied);
    }

    #[test]
    fn search_clamps_at_ceiling() {
        let p = params(1024, 0, 0, 0);
        let mut rng = SimRng::new(1);
        let (w, u) = stdp_update(8, SpikeTime::At(0), SpikeTime::Inf, &p, &mut rng).unwrap();
        assert_eq!(w, 8);
        assert_eq!(u.kind, UpdateKind::Search);
        assert!(!u.applied);
    }

    #[test]
    fn backoff_clamps_at_floor() {
        let p = params(0, 0, 1024, 1024);
        let mut rng = SimRng::new(1);
        let (w, u) = stdp_update(0, SpikeTime::Inf, SpikeTime::At(2), &p, &mut rng).unwrap();
        assert_eq!(w, 0);
        assert_eq!(u.kind, UpdateKind::Backoff);
        assert!(!u.applied);
    }

    #[test]
    fn input_after_output_backs_off() {
        let p = params(0, 0, 1024, 1024);
        let mut rng = SimRng::new(1);
        let (w, u) = stdp_update(5, SpikeTime::At(4), SpikeTime::At(2), &p, &mut rng).unwrap();
        assert_eq!(w, 4);
        assert_eq!(u.kind, UpdateKind::Backoff);
        assert!(u.applied);
    }

    #[test]
    fn simultaneous_spikes_capture() {
        // x == z counts as input-precedes-output
        let p = params(0, 1024, 0, 1024);
        let mut rng = SimRng::new(1);
        let (_, u) = stdp_update(3, SpikeTime::At(2), SpikeTime::At(2), &p, &mut rng).unwrap();
        assert_eq!(u.kind, UpdateKind::Capture);
    }

    #[test]
    fn trainer_matches_stdp_update_draw_for_draw() {
        // the table-driven trainer path and the public single-synapse path
        // must consume draws identically
        let p = params(100, 700, 500, 32);
        let mut col = Column::new(3, 2, 4, 8).unwrap();
        col.set_weights(&[2, 0, 8, 5, 3, 1]).unwrap();
        let x: Volley = [SpikeTime::At(0), SpikeTime::Inf, SpikeTime::At(0)]
            .into_iter()
            .collect();
        let inference = col.infer(&x).unwrap();

        let mut trainer = Trainer::new(p, SimRng::new(42)).unwrap();
        let mut expect_rng = SimRng::new(42);
        let mut expected = Vec::new();
        for j in 0..2 {
            for i in 0..3 {
                let (w, _) = stdp_update(
                    col.weight(j, i),
                    x.get(i),
                    inference.z.get(j),
                    &p,
                    &mut expect_rng,
                )
                .unwrap();
                expected.push(w);
            }
        }
        trainer.step(&mut col, &x).unwrap();
        assert_eq!(col.weights(), &expected[..]);
    }

    #[test]
    fn all_zero_weights_only_search() {
        let p = params(1024, 1024, 1024, 1024);
        let mut col = Column::new(4, 2, 8, 8).unwrap();
        let x: Volley = [
            SpikeTime::At(0),
            SpikeTime::At(0),
            SpikeTime::Inf,
            SpikeTime::At(0),
        ]
        .into_iter()
        .collect();
        let mut trainer = Trainer::new(p, SimRng::new(9)).unwrap();
        let (inference, counts) = trainer.step(&mut col, &x).unwrap();
        assert_eq!(inference.winner, None);
        assert_eq!(counts.captures, 0);
        assert_eq!(counts.backoffs, 0);
        assert_eq!(counts.searches, 6); // 2 neurons x 3 spiking lines, forced
    }

    #[test]
    fn zero_search_and_no_spikes_means_no_updates() {
        let p = params(0, 1024, 1024, 1024);
        let mut col = Column::new(4, 2, 8, 8).unwrap();
        let x: Volley = [
            SpikeTime::At(0),
            SpikeTime::At(0),
            SpikeTime::Inf,
            SpikeTime::At(0),
        ]
        .into_iter()
        .collect();
        let mut trainer = Trainer::new(p, SimRng::new(9)).unwrap();
        let (_, counts) = trainer.step(&mut col, &x).unwrap();
        assert_eq!(counts.total(), 0);
    }

    #[test]
    fn deterministic_trajectories() {
        let p = params(3, 224, 320, 32);
        let x: Volley = (0..8)
            .map(|i| {
                if i % 2 == 0 {
                    SpikeTime::At(0)
                } else {
                    SpikeTime::Inf
                }
            })
            .collect();
        let run = |seed| {
            let mut col = Column::new(8, 3, 6, 8).unwrap();
            let mut trainer = Trainer::new(p, SimRng::new(seed)).unwrap();
            for _ in 0..500 {
                trainer.step(&mut col, &x).unwrap();
            }
            col.weights().to_vec()
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
    }

    proptest! {
        #[test]
        fn exactly_one_case_applies(
            x in prop_oneof![Just(SpikeTime::Inf), (0u32..6).prop_map(SpikeTime::At)],
            z in prop_oneof![Just(SpikeTime::Inf), (0u32..6).prop_map(SpikeTime::At)],
            w in 0u32..=8,
            seed in 0u64..100,
        ) {
            let p = params(512, 512, 512, 64);
            let mut rng = SimRng::new(seed);
            let (_, u) = stdp_update(w, x, z, &p, &mut rng).unwrap();
            let expected = match (x.finite(), z.finite()) {
                (Some(xt), Some(zt)) if xt <= zt => UpdateKind::Capture,
                (Some(_), Some(_)) => UpdateKind::Backoff,
                (Some(_), None) => UpdateKind::Search,
                (None, Some(_)) => UpdateKind::Backoff,
                (None, None) => UpdateKind::None,
            };
            prop_assert_eq!(u.kind, expected);
            if u.kind == UpdateKind::None {
                prop_assert!(!u.applied);
            }
        }

        #[test]
        fn weights_stay_clamped(seed in 0u64..20) {
            // a million random updates never leave [0, w_max]
            let p = params(800, 900, 900, 100);
            let mut rng = SimRng::new(seed);
            let mut pick = SimRng::new(seed ^ 0xFFFF);
            let mut w = 4u32;
            for _ in 0..50_000 {
                let x = if pick.brv(512) { SpikeTime::At(pick.below(4)) } else { SpikeTime::Inf };
                let z = if pick.brv(512) { SpikeTime::At(pick.below(4)) } else { SpikeTime::Inf };
                let (nw, _) = stdp_update(w, x, z, &p, &mut rng).unwrap();
                prop_assert!(nw <= 8);
                w = nw;
            }
        }

        #[test]
        fn monotone_envelopes(seed in 0u64..50) {
            // no up-cases enabled: weights never increase
            let down_only = params(0, 0, 1024, 1024);
            let mut rng = SimRng::new(seed);
            let mut w = 8u32;
            for i in 0..200 {
                let x = if i % 3 == 0 { SpikeTime::At(2) } else { SpikeTime::Inf };
                let (nw, _) = stdp_update(w, x, SpikeTime::At(0), &down_only, &mut rng).unwrap();
                prop_assert!(nw <= w);
                w = nw;
            }
            // no down-cases enabled: weights never decrease
            let up_only = params(1024, 1024, 0, 1024);
            let mut w = 0u32;
            for i in 0..200 {
                let z = if i % 2 == 0 { SpikeTime::At(3) } else { SpikeTime::Inf };
                let (nw, _) = stdp_update(w, SpikeTime::At(0), z, &up_only, &mut rng).unwrap();
                prop_assert!(nw >= w);
                w = nw;
            }
        }
    }
}
