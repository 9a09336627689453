//! Seedable deterministic random sources.
//!
//! All stochastic machinery in the simulator draws from [`SimRng`], so a run
//! is a pure function of its seeds. The default engine is SplitMix64. An
//! alternative LFSR engine models a hardware-style pseudo-random bit source:
//! a 16-bit maximal-length shift register advanced one bit per draw, with the
//! low 10 bits of the state compared against /1024 numerators.

use crate::error::{Error, Result};

const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RngMode {
    Standard,
    Lfsr,
}

#[derive(Debug, Clone)]
enum Engine {
    SplitMix { state: u64 },
    Lfsr { state: u16 },
}

/// Deterministic pseudo-random generator: identical seed and mode give an
/// identical draw sequence.
#[derive(Debug, Clone)]
pub struct SimRng {
    engine: Engine,
}

fn splitmix_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(SPLITMIX_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fibonacci LFSR, taps 16/14/13/11 (maximal length, period 65535).
fn lfsr_step(state: &mut u16) -> u16 {
    let bit = (*state ^ (*state >> 2) ^ (*state >> 3) ^ (*state >> 5)) & 1;
    *state = (*state >> 1) | (bit << 15);
    bit
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self::with_mode(seed, RngMode::Standard)
    }

    pub fn with_mode(seed: u64, mode: RngMode) -> Self {
        let engine = match mode {
            RngMode::Standard => Engine::SplitMix { state: seed },
            RngMode::Lfsr => {
                let folded = (seed ^ (seed >> 16) ^ (seed >> 32) ^ (seed >> 48)) as u16;
                // the all-zero state is the lock-up state
                let state = if folded == 0 { 0xACE1 } else { folded };
                Engine::Lfsr { state }
            }
        };
        SimRng { engine }
    }

    pub fn mode(&self) -> RngMode {
        match self.engine {
            Engine::SplitMix { .. } => RngMode::Standard,
            Engine::Lfsr { .. } => RngMode::Lfsr,
        }
    }

    /// Derive an independent stream seed from a master seed and a tag.
    pub fn derive_seed(master: u64, tag: u64) -> u64 {
        let mut state = master ^ tag.wrapping_mul(SPLITMIX_GAMMA);
        splitmix_next(&mut state)
    }

    pub fn next_u64(&mut self) -> u64 {
        match &mut self.engine {
            Engine::SplitMix { state } => splitmix_next(state),
            Engine::Lfsr { state } => {
                let mut v = 0u64;
                for _ in 0..64 {
                    v = (v << 1) | lfsr_step(state) as u64;
                }
                v
            }
        }
    }

    /// One value in [0, 1024). Exactly one engine step in LFSR mode.
    fn draw_1024(&mut self) -> u32 {
        match &mut self.engine {
            Engine::SplitMix { state } => (splitmix_next(state) >> 54) as u32,
            Engine::Lfsr { state } => {
                lfsr_step(state);
                (*state & 0x03FF) as u32
            }
        }
    }

    /// Bernoulli draw: true with probability `numerator`/1024.
    /// Consumes exactly one draw regardless of the outcome.
    pub fn bernoulli(&mut self, numerator: u32) -> Result<bool> {
        if numerator > 1024 {
            return Err(Error::NumeratorOutOfRange { value: numerator });
        }
        Ok(self.brv(numerator))
    }

    /// Unchecked Bernoulli for numerators already validated to [0, 1024].
    #[inline]
    pub(crate) fn brv(&mut self, numerator: u32) -> bool {
        self.draw_1024() < numerator
    }

    /// Uniform draw in [0, n).
    pub fn below(&mut self, n: u32) -> u32 {
        debug_assert!(n > 0);
        (((self.next_u64() as u128) * (n as u128)) >> 64) as u32
    }

    /// Coin flip with probability `p`. Always consumes exactly one draw so
    /// stream layouts do not depend on `p`.
    pub fn flip(&mut self, p: f64) -> bool {
        let draw = self.next_u64();
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            (draw as f64 / TWO_POW_64) < p
        }
    }

    /// Approximate standard normal: sum of 12 uniforms, exactly reproducible.
    pub fn normal(&mut self) -> f64 {
        let mut acc = 0.0;
        for _ in 0..12 {
            acc += self.next_u64() as f64 / TWO_POW_64;
        }
        acc - 6.0
    }

    /// `k` distinct indices from [0, n), in draw order (partial Fisher-Yates).
    pub fn distinct_below(&mut self, n: usize, k: usize) -> Vec<usize> {
        debug_assert!(k <= n);
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u32) as usize;
            idx.swap(i, j);
        }
        idx.truncate(k);
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        for mode in [RngMode::Standard, RngMode::Lfsr] {
            let mut a = SimRng::with_mode(42, mode);
            let mut b = SimRng::with_mode(42, mode);
            for _ in 0..200 {
                assert_eq!(a.next_u64(), b.next_u64());
            }
        }
    }

    #[test]
    fn different_seeds_diverge() {
        let mut a = SimRng::new(1);
        let mut b = SimRng::new(2);
        assert_ne!(
            (0..4).map(|_| a.next_u64()).collect::<Vec<_>>(),
            (0..4).map(|_| b.next_u64()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn bernoulli_extremes() {
        for mode in [RngMode::Standard, RngMode::Lfsr] {
            let mut rng = SimRng::with_mode(7, mode);
            for _ in 0..1000 {
                assert!(!rng.bernoulli(0).unwrap());
                assert!(rng.bernoulli(1024).unwrap());
            }
        }
    }

    #[test]
    fn bernoulli_rejects_out_of_range() {
        let mut rng = SimRng::new(0);
        assert!(matches!(
            rng.bernoulli(1025),
            Err(Error::NumeratorOutOfRange { value: 1025 })
        ));
    }

    #[test]
    fn bernoulli_half_frequency() {
        // binomial(1e5, .5): 3 sigma ~ 0.0047, well inside the +-0.01 band
        let mut rng = SimRng::new(99);
        let n = 100_000;
        let hits = (0..n).filter(|_| rng.bernoulli(512).unwrap()).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq = {freq}");
    }

    #[test]
    fn lfsr_is_maximal_length() {
        let mut state = 0xACE1u16;
        let start = state;
        let mut period = 0u32;
        loop {
            lfsr_step(&mut state);
            period += 1;
            if state == start {
                break;
            }
            assert!(period <= 70_000);
        }
        assert_eq!(period, 65_535);
    }

    #[test]
    fn below_stays_in_range() {
        let mut rng = SimRng::new(5);
        for _ in 0..10_000 {
            assert!(rng.below(10) < 10);
        }
    }

    #[test]
    fn flip_extremes_and_draw_count() {
        let mut a = SimRng::new(3);
        let mut b = SimRng::new(3);
        for _ in 0..50 {
            assert!(!a.flip(0.0));
            assert!(b.flip(1.0));
        }
        // both consumed the same number of draws
        assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn distinct_below_is_distinct() {
        let mut rng = SimRng::new(11);
        let picks = rng.distinct_below(100, 50);
        let mut sorted = picks.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 50);
        assert!(picks.iter().all(|&i| i < 100));
    }
}
