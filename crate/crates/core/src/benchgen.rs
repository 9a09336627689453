//! Benchmark dataset construction: MNIST IDX ingestion, exemplar selection,
//! center cropping, binarization, pixel-flip noise, and stream scheduling.
//!
//! When no dataset files are available, a bundled synthetic alphabet of ten
//! fixed patterns stands in. Its 8x8 member is tuned to the difficulty of
//! the handwritten-digit benchmark: four visually-confusable pairs sit at
//! small Hamming distances while every other pair is well separated.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::volley::{posneg_encode, BinaryImage, Volley};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Stock per-digit exemplar occurrence indices for MNIST-style datasets.
pub const DEFAULT_EXEMPLARS: [usize; 10] = [157, 9, 17, 51, 151, 220, 63, 423, 344, 163];

/// Ten fixed 8x8 patterns, one u64 per pattern, bit i = pixel i (row-major).
/// Pairs (1,7), (4,9), (3,8), (5,6) are close (Hamming 11/11/13/13); all
/// other pairs are at distance 32 or more.
const ALPHABET_8: [u64; 10] = [
    0x75164ed9a5a5d245, // 0
    0x815773baf420a5ad, // 1
    0xc5cc49574c75c43b, // 2
    0xcaa450e1799cd976, // 3
    0x2f7f8b84da24515c, // 4
    0x5c89cb8b43c77a92, // 5
    0x5d83aba9474fb892, // 6
    0xa03771b6f48025af, // 7
    0x88e011a17998ca7c, // 8
    0x3bff9b06b2e4515c, // 9
];

const SYNTHETIC_SEED: u64 = 0x5EED_0BAD_CAFE_F00D;

/// A grayscale bitmap, one byte per pixel, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pixels: Vec<u8>,
    width: usize,
    height: usize,
}

impl GrayImage {
    pub fn new(pixels: Vec<u8>, width: usize, height: usize) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(GrayImage {
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
}

struct IdxReader<'a> {
    bytes: &'a [u8],
    offset: usize,
    path: &'a Path,
}

impl<'a> IdxReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.offset + n > self.bytes.len() {
            return Err(Error::Truncated {
                path: self.path.to_path_buf(),
                offset: self.bytes.len(),
                needed: self.offset + n - self.bytes.len(),
            });
        }
        let slice = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(slice)
    }

    fn read_u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Load an MNIST-style IDX image/label file pair.
///
/// Both headers are big-endian: images carry magic 0x00000803 followed by
/// count, rows, cols; labels carry magic 0x00000801 followed by count. The
/// two counts must agree.
pub fn load_mnist_idx(images_path: &Path, labels_path: &Path) -> Result<Vec<(GrayImage, u8)>> {
    let image_bytes = fs::read(images_path).map_err(|e| Error::io(images_path, e))?;
    let label_bytes = fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;

    let mut ir = IdxReader {
        bytes: &image_bytes,
        offset: 0,
        path: images_path,
    };
    let magic = ir.read_u32()?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::BadMagic {
            path: images_path.to_path_buf(),
            found: magic,
            expected: IDX_IMAGES_MAGIC,
        });
    }
    let count = ir.read_u32()? as usize;
    let rows = ir.read_u32()? as usize;
    let cols = ir.read_u32()? as usize;

    let mut lr = IdxReader {
        bytes: &label_bytes,
        offset: 0,
        path: labels_path,
    };
    let magic = lr.read_u32()?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::BadMagic {
            path: labels_path.to_path_buf(),
            found: magic,
            expected: IDX_LABELS_MAGIC,
        });
    }
    let label_count = lr.read_u32()? as usize;
    if label_count != count {
        return Err(Error::CountMismatch {
            images: count,
            labels: label_count,
        });
    }

    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let pixels = ir.take(rows * cols)?.to_vec();
        let label = lr.take(1)?[0];
        records.push((GrayImage::new(pixels, cols, rows)?, label));
    }
    Ok(records)
}

/// How Figure-style "image numbers" index into the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExemplarIndexing {
    /// n-th occurrence of the digit, counting from 0.
    #[default]
    ClassZeroBased,
    /// n-th occurrence of the digit, counting from 1.
    ClassOneBased,
    /// Dataset position n, counting from 0; the record must carry the digit.
    GlobalZeroBased,
    /// Dataset position n, counting from 1; the record must carry the digit.
    GlobalOneBased,
}

fn pick_exemplar<'a>(
    records: &'a [(GrayImage, u8)],
    digit: u8,
    occurrence: usize,
    indexing: ExemplarIndexing,
) -> Result<&'a GrayImage> {
    match indexing {
        ExemplarIndexing::ClassZeroBased | ExemplarIndexing::ClassOneBased => {
            let skip = if indexing == ExemplarIndexing::ClassOneBased {
                occurrence.checked_sub(1).ok_or(Error::OccurrenceOutOfRange {
                    digit,
                    occurrence,
                })?
            } else {
                occurrence
            };
            records
                .iter()
                .filter(|(_, label)| *label == digit)
                .nth(skip)
                .map(|(img, _)| img)
                .ok_or(Error::OccurrenceOutOfRange { digit, occurrence })
        }
        ExemplarIndexing::GlobalZeroBased | ExemplarIndexing::GlobalOneBased => {
            let index = if indexing == ExemplarIndexing::GlobalOneBased {
                occurrence.checked_sub(1).ok_or(Error::OccurrenceOutOfRange {
                    digit,
                    occurrence,
                })?
            } else {
                occurrence
            };
            let (img, label) = records
                .get(index)
                .ok_or(Error::OccurrenceOutOfRange { digit, occurrence })?;
            if *label != digit {
                return Err(Error::LabelMismatch {
                    index,
                    found: *label,
                    expected: digit,
                });
            }
            Ok(img)
        }
    }
}

/// Crop the centered rf x rf window: rows and columns
/// [(side - rf) / 2, (side - rf) / 2 + rf).
pub fn crop_center(img: &GrayImage, rf: usize) -> Result<GrayImage> {
    let side = img.width().min(img.height());
    if rf > side {
        return Err(Error::ReceptiveFieldTooLarge { rf, side });
    }
    let row0 = (img.height() - rf) / 2;
    let col0 = (img.width() - rf) / 2;
    let mut pixels = Vec::with_capacity(rf * rf);
    for r in row0..row0 + rf {
        let start = r * img.width() + col0;
        pixels.extend_from_slice(&img.pixels()[start..start + rf]);
    }
    GrayImage::new(pixels, rf, rf)
}

/// Threshold a grayscale image: pixel >= threshold becomes 1.
pub fn binarize_pixels(img: &GrayImage, threshold: u8) -> BinaryImage {
    let bits = img
        .pixels()
        .iter()
        .map(|&p| (p >= threshold) as u8)
        .collect();
    BinaryImage::new(bits, img.width(), img.height()).expect("bits are valid by construction")
}

/// Flip each pixel independently with probability `p`. Consumes one draw per
/// pixel regardless of `p`.
pub fn add_noise(img: &BinaryImage, p: f64, rng: &mut SimRng) -> BinaryImage {
    let bits = img
        .pixels()
        .iter()
        .map(|&b| if rng.flip(p) { 1 - b } else { b })
        .collect();
    BinaryImage::new(bits, img.width(), img.height()).expect("flips preserve bit values")
}

/// The ten baseline patterns a stream draws from.
#[derive(Debug, Clone)]
pub struct BaselineSet {
    images: Vec<BinaryImage>,
    rf_size: usize,
}

impl BaselineSet {
    pub fn new(images: Vec<BinaryImage>, rf_size: usize) -> Result<Self> {
        if images.len() != 10 {
            return Err(Error::InvalidConfig(format!(
                "baseline set needs 10 images, got {}",
                images.len()
            )));
        }
        for img in &images {
            if img.width() != rf_size || img.height() != rf_size {
                return Err(Error::InvalidConfig(format!(
                    "baseline image is {}x{}, expected {rf_size}x{rf_size}",
                    img.width(),
                    img.height()
                )));
            }
        }
        Ok(BaselineSet { images, rf_size })
    }

    /// The bundled synthetic alphabet at the given receptive-field size.
    /// The 8x8 set is fixed; other sizes use seeded balanced patterns.
    pub fn synthetic(rf: usize) -> Result<Self> {
        if rf == 8 {
            let images = ALPHABET_8
                .iter()
                .map(|&word| {
                    let bits: Vec<u8> = (0..64).map(|i| ((word >> i) & 1) as u8).collect();
                    BinaryImage::new(bits, 8, 8)
                })
                .collect::<Result<Vec<_>>>()?;
            return BaselineSet::new(images, 8);
        }
        if rf < 2 {
            return Err(Error::InvalidConfig(format!(
                "synthetic receptive field {rf} too small"
            )));
        }
        let n = rf * rf;
        let mut rng = SimRng::new(SYNTHETIC_SEED ^ rf as u64);
        let images = (0..10)
            .map(|_| {
                let mut bits = vec![0u8; n];
                for i in rng.distinct_below(n, n / 2) {
                    bits[i] = 1;
                }
                BinaryImage::new(bits, rf, rf)
            })
            .collect::<Result<Vec<_>>>()?;
        BaselineSet::new(images, rf)
    }

    pub fn image(&self, digit: u8) -> &BinaryImage {
        &self.images[digit as usize]
    }

    pub fn rf_size(&self) -> usize {
        self.rf_size
    }

    /// PosNeg line count: 2 * rf^2.
    pub fn line_count(&self) -> usize {
        2 * self.rf_size * self.rf_size
    }

    /// Noiseless PosNeg volley of one baseline.
    pub fn encode(&self, digit: u8) -> Volley {
        posneg_encode(self.image(digit))
    }
}

/// Pick, crop, and binarize the ten exemplars out of a loaded dataset.
pub fn select_baselines(
    records: &[(GrayImage, u8)],
    occurrences: &[usize; 10],
    indexing: ExemplarIndexing,
    rf: usize,
    threshold: u8,
) -> Result<BaselineSet> {
    let images = (0..10u8)
        .map(|digit| {
            let img = pick_exemplar(records, digit, occurrences[digit as usize], indexing)?;
            Ok(binarize_pixels(&crop_center(img, rf)?, threshold))
        })
        .collect::<Result<Vec<_>>>()?;
    BaselineSet::new(images, rf)
}

/// Label scheduling for a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Uniform over all ten digits.
    UniformAll,
    /// Uniform over {1,3,5,7,9} before `transition`, then {0,2,4,6,8}.
    OddsThenEvens { transition: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamSpec {
    pub length: usize,
    pub noise_p: f64,
    pub schedule: Schedule,
    pub seed: u64,
}

impl Default for StreamSpec {
    fn default() -> Self {
        StreamSpec {
            length: 70_000,
            noise_p: 0.30,
            schedule: Schedule::UniformAll,
            seed: 1,
        }
    }
}

impl StreamSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.noise_p) {
            return Err(Error::InvalidConfig(format!(
                "noise probability {} outside [0, 1]",
                self.noise_p
            )));
        }
        if let Schedule::OddsThenEvens { transition } = self.schedule {
            if transition >= self.length {
                return Err(Error::InvalidConfig(format!(
                    "transition {transition} not inside stream of length {}",
                    self.length
                )));
            }
        }
        Ok(())
    }
}

const ODD_DIGITS: [u8; 5] = [1, 3, 5, 7, 9];
const EVEN_DIGITS: [u8; 5] = [0, 2, 4, 6, 8];

/// Lazily generated sequence of (noisy PosNeg volley, ground-truth label).
pub struct PatternStream<'a> {
    baselines: &'a BaselineSet,
    spec: StreamSpec,
    rng: SimRng,
    index: usize,
}

impl Iterator for PatternStream<'_> {
    type Item = (Volley, u8);

    fn next(&mut self) -> Option<Self::Item> {
        if self.index >= self.spec.length {
            return None;
        }
        let label = match self.spec.schedule {
            Schedule::UniformAll => self.rng.below(10) as u8,
            Schedule::OddsThenEvens { transition } => {
                if self.index < transition {
                    ODD_DIGITS[self.rng.below(5) as usize]
                } else {
                    EVEN_DIGITS[self.rng.below(5) as usize]
                }
            }
        };
        let noisy = add_noise(self.baselines.image(label), self.spec.noise_p, &mut self.rng);
        self.index += 1;
        Some((posneg_encode(&noisy), label))
    }
}

/// Stream generator; two streams with equal (baselines, spec) emit identical
/// sequences.
pub fn gen_stream(baselines: &BaselineSet, spec: StreamSpec) -> Result<PatternStream<'_>> {
    spec.validate()?;
    Ok(PatternStream {
        baselines,
        rng: SimRng::new(spec.seed),
        spec,
        index: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_idx(
        dir: &Path,
        name: &str,
        magic: u32,
        dims: &[u32],
        payload: &[u8],
    ) -> std::path::PathBuf {
        let mut bytes = magic.to_be_bytes().to_vec();
        for d in dims {
            bytes.extend_from_slice(&d.to_be_bytes());
        }
        bytes.extend_from_slice(payload);
        let path = dir.join(name);
        fs::write(&path, bytes).unwrap();
        path
    }

    fn tiny_dataset(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
        // 4 records of 28x28: labels 3, 1, 3, 7
        let mut pixels = Vec::new();
        for v in [10u8, 200, 40, 250] {
            pixels.extend(std::iter::repeat(v).take(28 * 28));
        }
        let images = write_idx(dir, "imgs", IDX_IMAGES_MAGIC, &[4, 28, 28], &pixels);
        let labels = write_idx(dir, "lbls", IDX_LABELS_MAGIC, &[4], &[3, 1, 3, 7]);
        (images, labels)
    }

    #[test]
    fn loads_well_formed_idx() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = tiny_dataset(dir.path());
        let records = load_mnist_idx(&images, &labels).unwrap();
        assert_eq!(records.len(), 4);
        assert_eq!(records[1].1, 1);
        assert_eq!(records[1].0.pixels()[0], 200);
        assert_eq!(records[3].0.width(), 28);
    }

    #[test]
    fn swapped_paths_fail_on_magic() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = tiny_dataset(dir.path());
        match load_mnist_idx(&labels, &images) {
            Err(Error::BadMagic { found, expected, .. }) => {
                assert_eq!(found, IDX_LABELS_MAGIC);
                assert_eq!(expected, IDX_IMAGES_MAGIC);
            }
            other => panic!("expected BadMagic, got {other:?}"),
        }
    }

    #[test]
    fn truncated_file_names_offset() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = tiny_dataset(dir.path());
        let mut bytes = fs::read(&images).unwrap();
        bytes.truncate(16 + 28 * 28 + 100); // cuts into the second record
        fs::write(&images, &bytes).unwrap();
        match load_mnist_idx(&images, &labels) {
            Err(Error::Truncated { offset, needed, .. }) => {
                assert_eq!(offset, 16 + 28 * 28 + 100);
                assert_eq!(needed, 28 * 28 - 100);
            }
            other => panic!("expected Truncated, got {other:?}"),
        }
    }

    #[test]
    fn count_mismatch_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let (images, _) = tiny_dataset(dir.path());
        let labels = write_idx(dir.path(), "short", IDX_LABELS_MAGIC, &[3], &[3, 1, 3]);
        assert!(matches!(
            load_mnist_idx(&images, &labels),
            Err(Error::CountMismatch {
                images: 4,
                labels: 3
            })
        ));
    }

    #[test]
    fn exemplar_selection_by_occurrence() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = tiny_dataset(dir.path());
        let records = load_mnist_idx(&images, &labels).unwrap();
        // second occurrence (0-based index 1) of digit 3 is record 2
        let img = pick_exemplar(&records, 3, 1, ExemplarIndexing::ClassZeroBased).unwrap();
        assert_eq!(img.pixels()[0], 40);
        // first image labeled 1
        let img = pick_exemplar(&records, 1, 0, ExemplarIndexing::ClassZeroBased).unwrap();
        assert_eq!(img.pixels()[0], 200);
        assert!(matches!(
            pick_exemplar(&records, 0, 999_999, ExemplarIndexing::ClassZeroBased),
            Err(Error::OccurrenceOutOfRange { .. })
        ));
        // global indexing checks the label
        let img = pick_exemplar(&records, 7, 3, ExemplarIndexing::GlobalZeroBased).unwrap();
        assert_eq!(img.pixels()[0], 250);
        assert!(matches!(
            pick_exemplar(&records, 7, 0, ExemplarIndexing::GlobalZeroBased),
            Err(Error::LabelMismatch { .. })
        ));
        // one-based variants shift by one
        let a = pick_exemplar(&records, 3, 1, ExemplarIndexing::ClassOneBased).unwrap();
        let b = pick_exemplar(&records, 3, 0, ExemplarIndexing::ClassZeroBased).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn crop_offsets() {
        let pixels: Vec<u8> = (0..28 * 28).map(|i| (i % 251) as u8).collect();
        let img = GrayImage::new(pixels.clone(), 28, 28).unwrap();

        let c8 = crop_center(&img, 8).unwrap();
        assert_eq!(c8.pixels()[0], pixels[10 * 28 + 10]);

        let c18 = crop_center(&img, 18).unwrap();
        assert_eq!(c18.pixels()[0], pixels[5 * 28 + 5]);

        let c28 = crop_center(&img, 28).unwrap();
        assert_eq!(c28.pixels(), &pixels[..]);

        assert!(matches!(
            crop_center(&img, 29),
            Err(Error::ReceptiveFieldTooLarge { rf: 29, side: 28 })
        ));
    }

    #[test]
    fn binarize_threshold_boundary() {
        let img = GrayImage::new(vec![0, 127, 128, 255], 4, 1).unwrap();
        let bits = binarize_pixels(&img, 128);
        assert_eq!(bits.pixels(), &[0, 0, 1, 1]);
    }

    #[test]
    fn noise_extremes() {
        let base = BaselineSet::synthetic(8).unwrap();
        let img = base.image(0);
        let mut rng = SimRng::new(1);
        assert_eq!(&add_noise(img, 0.0, &mut rng), img);
        assert_eq!(add_noise(img, 1.0, &mut rng), img.complement());
    }

    #[test]
    fn noise_flip_rate_matches_binomial() {
        // mean Hamming distance over 1e4 draws: 64 * 0.3 = 19.2 +- 1.5
        let base = BaselineSet::synthetic(8).unwrap();
        let img = base.image(4);
        let mut rng = SimRng::new(33);
        let n = 10_000;
        let total: usize = (0..n)
            .map(|_| add_noise(img, 0.3, &mut rng).hamming(img))
            .sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 19.2).abs() < 1.5, "mean = {mean}");
    }

    #[test]
    fn alphabet_distance_profile() {
        let base = BaselineSet::synthetic(8).unwrap();
        let close = [(1u8, 7u8), (4, 9), (3, 8), (5, 6)];
        for i in 0..10u8 {
            for j in (i + 1)..10 {
                let d = base.image(i).hamming(base.image(j));
                if close.contains(&(i, j)) {
                    assert!((11..=13).contains(&d), "close pair ({i},{j}) at {d}");
                } else {
                    assert!(d >= 32, "far pair ({i},{j}) at {d}");
                }
            }
        }
    }

    #[test]
    fn synthetic_18_is_well_separated() {
        let base = BaselineSet::synthetic(18).unwrap();
        assert_eq!(base.rf_size(), 18);
        assert_eq!(base.line_count(), 648);
        for i in 0..10u8 {
            assert_eq!(base.image(i).ink(), 162);
            for j in (i + 1)..10 {
                let d = base.image(i).hamming(base.image(j));
                assert!(d >= 90, "pair ({i},{j}) at {d}");
            }
        }
    }

    #[test]
    fn stream_is_reproducible() {
        let base = BaselineSet::synthetic(8).unwrap();
        let spec = StreamSpec {
            length: 50,
            ..StreamSpec::default()
        };
        let a: Vec<_> = gen_stream(&base, spec).unwrap().collect();
        let b: Vec<_> = gen_stream(&base, spec).unwrap().collect();
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
    }

    #[test]
    fn stream_volleys_are_posneg_balanced() {
        let base = BaselineSet::synthetic(8).unwrap();
        let spec = StreamSpec {
            length: 200,
            ..StreamSpec::default()
        };
        for (v, label) in gen_stream(&base, spec).unwrap() {
            assert!(label < 10);
            assert_eq!(v.len(), 128);
            assert_eq!(v.spike_count(), 64);
        }
    }

    #[test]
    fn noiseless_stream_replays_baselines() {
        let base = BaselineSet::synthetic(8).unwrap();
        let spec = StreamSpec {
            length: 100,
            noise_p: 0.0,
            ..StreamSpec::default()
        };
        for (v, label) in gen_stream(&base, spec).unwrap() {
            assert_eq!(v, base.encode(label));
        }
    }

    #[test]
    fn odds_then_evens_switches_at_transition() {
        let base = BaselineSet::synthetic(8).unwrap();
        let transition = 34_916;
        let spec = StreamSpec {
            length: 34_920,
            schedule: Schedule::OddsThenEvens { transition },
            ..StreamSpec::default()
        };
        let labels: Vec<u8> = gen_stream(&base, spec).unwrap().map(|(_, l)| l).collect();
        for (i, l) in labels.iter().enumerate() {
            if i < transition {
                assert_eq!(l % 2, 1, "item {i} should be odd");
            } else {
                assert_eq!(l % 2, 0, "item {i} should be even");
            }
        }
    }

    #[test]
    fn uniform_labels_near_uniform() {
        let base = BaselineSet::synthetic(8).unwrap();
        let spec = StreamSpec {
            length: 70_000,
            noise_p: 0.0,
            ..StreamSpec::default()
        };
        let mut counts = [0u32; 10];
        for (_, l) in gen_stream(&base, spec).unwrap() {
            counts[l as usize] += 1;
        }
        // 3 sigma of binomial(70000, 0.1) ~ 238
        for (d, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - 7000.0).abs() < 3.0 * (70_000.0f64 * 0.1 * 0.9).sqrt(),
                "digit {d}: {c}"
            );
        }
    }

    #[test]
    fn invalid_stream_specs_are_rejected() {
        let spec = StreamSpec {
            noise_p: 1.5,
            ..StreamSpec::default()
        };
        assert!(spec.validate().is_err());
        let spec = StreamSpec {
            length: 100,
            schedule: Schedule::OddsThenEvens { transition: 100 },
            ..StreamSpec::default()
        };
        assert!(spec.validate().is_err());
    }
}
