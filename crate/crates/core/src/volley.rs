//! Temporal-coding data types: spike times, volleys, and PosNeg encoding.
//!
//! A volley carries at most one spike per line; the spike's time encodes
//! feature strength (earlier means stronger) and its absence is the
//! distinguished value [`SpikeTime::Inf`].

use std::fmt;

use crate::error::{Error, Result};

/// A spike time in discrete units, or no spike at all.
///
/// `Inf` compares greater than every finite time, so ordinary `min`/ordering
/// works across the whole domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpikeTime {
    At(u32),
    Inf,
}

impl SpikeTime {
    #[inline]
    pub fn is_spike(self) -> bool {
        matches!(self, SpikeTime::At(_))
    }

    #[inline]
    pub fn finite(self) -> Option<u32> {
        match self {
            SpikeTime::At(t) => Some(t),
            SpikeTime::Inf => None,
        }
    }
}

impl From<u32> for SpikeTime {
    fn from(t: u32) -> Self {
        SpikeTime::At(t)
    }
}

impl fmt::Display for SpikeTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpikeTime::At(t) => write!(f, "{t}"),
            SpikeTime::Inf => write!(f, "inf"),
        }
    }
}

/// One coordinated wave of spikes, one entry per input line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Volley {
    times: Vec<SpikeTime>,
}

impl Volley {
    pub fn new(times: Vec<SpikeTime>) -> Self {
        Volley { times }
    }

    /// The all-`Inf` volley of the given width.
    pub fn null(len: usize) -> Self {
        Volley {
            times: vec![SpikeTime::Inf; len],
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> SpikeTime {
        self.times[i]
    }

    pub fn times(&self) -> &[SpikeTime] {
        &self.times
    }

    pub fn iter(&self) -> impl Iterator<Item = SpikeTime> + '_ {
        self.times.iter().copied()
    }

    /// True when no line spikes.
    pub fn is_null(&self) -> bool {
        self.times.iter().all(|t| !t.is_spike())
    }

    pub fn spike_count(&self) -> usize {
        self.times.iter().filter(|t| t.is_spike()).count()
    }

    /// Flatten away temporal information: every finite entry becomes 0.
    pub fn binarize(&self) -> Volley {
        Volley {
            times: self
                .times
                .iter()
                .map(|t| match t {
                    SpikeTime::At(_) => SpikeTime::At(0),
                    SpikeTime::Inf => SpikeTime::Inf,
                })
                .collect(),
        }
    }

    /// Minimum entry; `Inf` for the null volley.
    pub fn min_time(&self) -> SpikeTime {
        self.times.iter().copied().min().unwrap_or(SpikeTime::Inf)
    }

    /// Latest finite entry, if any line spikes.
    pub fn max_finite(&self) -> Option<u32> {
        self.times.iter().filter_map(|t| t.finite()).max()
    }

    /// 0/1 view of the spike support, one byte per line.
    pub fn support_bits(&self) -> Vec<u8> {
        self.times.iter().map(|t| t.is_spike() as u8).collect()
    }
}

impl FromIterator<SpikeTime> for Volley {
    fn from_iter<I: IntoIterator<Item = SpikeTime>>(iter: I) -> Self {
        Volley {
            times: iter.into_iter().collect(),
        }
    }
}

/// A width x height bitmap, one 0/1 byte per pixel, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    pixels: Vec<u8>,
    width: usize,
    height: usize,
}

impl BinaryImage {
    pub fn new(pixels: Vec<u8>, width: usize, height: usize) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        if let Some(&bad) = pixels.iter().find(|&&p| p > 1) {
            return Err(Error::InvalidConfig(format!(
                "binary image pixel value {bad} is not a bit"
            )));
        }
        Ok(BinaryImage {
            pixels,
            width,
            height,
        })
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    /// Number of set pixels.
    pub fn ink(&self) -> usize {
        self.pixels.iter().filter(|&&p| p == 1).count()
    }

    pub fn complement(&self) -> BinaryImage {
        BinaryImage {
            pixels: self.pixels.iter().map(|&p| 1 - p).collect(),
            width: self.width,
            height: self.height,
        }
    }

    /// Hamming distance to another image of the same shape.
    pub fn hamming(&self, other: &BinaryImage) -> usize {
        debug_assert_eq!(self.pixels.len(), other.pixels.len());
        self.pixels
            .iter()
            .zip(&other.pixels)
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// Expand an image into paired positive/negative lines spiking at time 0.
///
/// For an n-pixel image the volley has 2n lines: line `i` spikes iff pixel
/// `i` is set, line `n + i` spikes iff it is clear, so exactly n lines spike.
pub fn posneg_encode(img: &BinaryImage) -> Volley {
    let n = img.pixel_count();
    let mut times = vec![SpikeTime::Inf; 2 * n];
    for (i, &p) in img.pixels().iter().enumerate() {
        if p == 1 {
            times[i] = SpikeTime::At(0);
        } else {
            times[n + i] = SpikeTime::At(0);
        }
    }
    Volley { times }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn volley(ts: &[i64]) -> Volley {
        ts.iter()
            .map(|&t| {
                if t < 0 {
                    SpikeTime::Inf
                } else {
                    SpikeTime::At(t as u32)
                }
            })
            .collect()
    }

    #[test]
    fn spike_time_ordering() {
        assert!(SpikeTime::At(0) < SpikeTime::At(3));
        assert!(SpikeTime::At(u32::MAX) < SpikeTime::Inf);
        assert_eq!(SpikeTime::Inf, SpikeTime::Inf);
        assert_eq!(
            SpikeTime::Inf.min(SpikeTime::At(5)),
            SpikeTime::At(5)
        );
    }

    #[test]
    fn binarize_flattens_finite_entries() {
        assert_eq!(volley(&[0, 3, -1, 1]).binarize(), volley(&[0, 0, -1, 0]));
        assert_eq!(volley(&[-1, -1]).binarize(), volley(&[-1, -1]));
        assert_eq!(volley(&[7]).binarize(), volley(&[0]));
    }

    #[test]
    fn min_time_examples() {
        assert_eq!(volley(&[5, 3, -1]).min_time(), SpikeTime::At(3));
        assert_eq!(volley(&[-1, -1]).min_time(), SpikeTime::Inf);
        assert_eq!(volley(&[0, 0]).min_time(), SpikeTime::At(0));
    }

    #[test]
    fn posneg_concatenates_positive_then_negative() {
        let img = BinaryImage::new(vec![1, 0, 1], 3, 1).unwrap();
        assert_eq!(posneg_encode(&img), volley(&[0, -1, 0, -1, 0, -1]));
    }

    #[test]
    fn posneg_all_ones() {
        let img = BinaryImage::new(vec![1; 4], 2, 2).unwrap();
        let v = posneg_encode(&img);
        assert_eq!(v, volley(&[0, 0, 0, 0, -1, -1, -1, -1]));
    }

    #[test]
    fn posneg_spike_balance_8x8() {
        let pixels: Vec<u8> = (0..64).map(|i| ((i * 7) % 3 == 0) as u8).collect();
        let img = BinaryImage::new(pixels, 8, 8).unwrap();
        let v = posneg_encode(&img);
        assert_eq!(v.len(), 128);
        assert_eq!(v.spike_count(), 64);
    }

    #[test]
    fn binary_image_rejects_bad_input() {
        assert!(BinaryImage::new(vec![0, 1, 2], 3, 1).is_err());
        assert!(BinaryImage::new(vec![0, 1], 3, 1).is_err());
    }

    proptest! {
        #[test]
        fn binarize_is_idempotent(ts in proptest::collection::vec(-1i64..50, 0..40)) {
            let v = volley(&ts);
            prop_assert_eq!(v.binarize().binarize(), v.binarize());
        }

        #[test]
        fn binarize_preserves_support(ts in proptest::collection::vec(-1i64..50, 0..40)) {
            let v = volley(&ts);
            prop_assert_eq!(v.binarize().support_bits(), v.support_bits());
        }

        #[test]
        fn posneg_lines_partition(bits in proptest::collection::vec(0u8..=1, 1..64)) {
            let n = bits.len();
            let img = BinaryImage::new(bits, n, 1).unwrap();
            let v = posneg_encode(&img);
            prop_assert_eq!(v.len(), 2 * n);
            prop_assert_eq!(v.spike_count(), n);
            for i in 0..n {
                prop_assert!(v.get(i).is_spike() ^ v.get(n + i).is_spike());
            }
        }
    }
}
