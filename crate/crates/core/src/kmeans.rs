//! Offline k-means baseline under the sad metric.
//!
//! Lloyd iterations with Forgy initialization (k distinct random patterns),
//! stopping when the assignment-stability measure reaches 0.99 or the epoch
//! guard trips. Empty clusters are reseeded from a random pattern.

use crate::error::{Error, Result};
use crate::metrics::{self, Centroid, Clustering, MetricsReport, Pattern};
use crate::par;
use crate::rng::SimRng;

#[derive(Debug, Clone)]
pub struct KMeansModel {
    pub centroids: Vec<Centroid>,
    pub epochs_run: usize,
    pub final_c_conv: f64,
}

/// sad(x, c) = base + sum of per-set-bit deltas; precomputing the two halves
/// turns assignment into a sparse dot product over the spiking lines.
struct CentroidLut {
    base: f64,
    delta: Vec<f64>,
}

impl CentroidLut {
    fn new(c: &Centroid) -> Self {
        CentroidLut {
            base: c.means().iter().sum(),
            delta: c.means().iter().map(|&m| 1.0 - 2.0 * m).collect(),
        }
    }

    #[inline]
    fn dist(&self, set_bits: &[u32]) -> f64 {
        let mut d = self.base;
        for &i in set_bits {
            d += self.delta[i as usize];
        }
        d
    }
}

fn set_bits_of(patterns: &[Pattern]) -> Vec<Vec<u32>> {
    patterns
        .iter()
        .map(|p| {
            p.bits
                .iter()
                .enumerate()
                .filter(|(_, &b)| b == 1)
                .map(|(i, _)| i as u32)
                .collect()
        })
        .collect()
}

fn assign_all(sparse: &[Vec<u32>], centroids: &[Centroid]) -> Vec<usize> {
    let luts: Vec<CentroidLut> = centroids.iter().map(CentroidLut::new).collect();
    par::map_slice(sparse, |bits| {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, lut) in luts.iter().enumerate() {
            let d = lut.dist(bits);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    })
}

fn recompute_centroids(
    patterns: &[Pattern],
    assignments: &[usize],
    k: usize,
    rng: &mut SimRng,
) -> (Vec<Centroid>, bool) {
    let dim = patterns[0].bits.len();
    let mut sums = vec![vec![0u32; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in patterns.iter().zip(assignments) {
        counts[a] += 1;
        for (s, &b) in sums[a].iter_mut().zip(&p.bits) {
            *s += b as u32;
        }
    }
    let mut reseeded = false;
    let centroids = (0..k)
        .map(|c| {
            if counts[c] == 0 {
                // reseed an empty cluster from a random pattern
                reseeded = true;
                let pick = rng.below(patterns.len() as u32) as usize;
                Centroid::from_means(patterns[pick].bits.iter().map(|&b| b as f64).collect())
            } else {
                let n = counts[c] as f64;
                Centroid::from_means(sums[c].iter().map(|&s| s as f64 / n).collect())
            }
        })
        .collect();
    (centroids, reseeded)
}

pub fn kmeans_fit(
    patterns: &[Pattern],
    k: usize,
    rng: &mut SimRng,
    max_epochs: usize,
) -> Result<KMeansModel> {
    if k == 0 || k > patterns.len() {
        return Err(Error::BadClusterCount {
            k,
            n: patterns.len(),
        });
    }
    let sparse = set_bits_of(patterns);
    let picks = rng.distinct_below(patterns.len(), k);
    let mut centroids: Vec<Centroid> = picks
        .iter()
        .map(|&i| Centroid::from_means(patterns[i].bits.iter().map(|&b| b as f64).collect()))
        .collect();

    let mut assignments = assign_all(&sparse, &centroids);
    let mut epochs = 1;
    loop {
        let (next_centroids, reseeded) = recompute_centroids(patterns, &assignments, k, rng);
        centroids = next_centroids;
        let next = assign_all(&sparse, &centroids);
        let stable = next
            .iter()
            .zip(&assignments)
            .filter(|(a, b)| a == b)
            .count() as f64
            / patterns.len() as f64;
        assignments = next;
        epochs += 1;
        // a reseeded epoch is not a converged state, however stable it looks
        if (stable >= 0.99 && !reseeded) || epochs >= max_epochs {
            return Ok(KMeansModel {
                centroids,
                epochs_run: epochs,
                final_c_conv: stable,
            });
        }
    }
}

/// Partition test patterns with the fitted centroids and score the result.
pub fn kmeans_evaluate(
    model: &KMeansModel,
    patterns: &[Pattern],
    labels: &[u8],
) -> Result<(MetricsReport, Clustering)> {
    let sparse = set_bits_of(patterns);
    let assignments: Vec<Option<usize>> = assign_all(&sparse, &model.centroids)
        .into_iter()
        .map(Some)
        .collect();
    let clustering = Clustering::new(assignments, model.centroids.len())?;
    let report = metrics::evaluate_clustering(patterns, &clustering, labels, None)?;
    Ok((report, clustering))
}

/// Total within-cluster sad distance, for convergence diagnostics.
pub fn within_cluster_sad(patterns: &[Pattern], assignments: &[usize], centroids: &[Centroid]) -> f64 {
    patterns
        .iter()
        .zip(assignments)
        .map(|(p, &a)| metrics::sad_bits(&p.bits, &centroids[a]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(bits: &[u8], label: u8) -> Pattern {
        Pattern::new(bits.to_vec(), Some(label))
    }

    fn toy_digits() -> (Vec<Pattern>, Vec<u8>) {
        // 10 well-separated prototypes, each duplicated 100 times
        let mut rng = SimRng::new(77);
        let protos: Vec<Vec<u8>> = (0..10)
            .map(|_| (0..32).map(|_| rng.below(2) as u8).collect())
            .collect();
        let mut patterns = Vec::new();
        let mut labels = Vec::new();
        for rep in 0..100 {
            for (d, proto) in protos.iter().enumerate() {
                let _ = rep;
                patterns.push(pat(proto, d as u8));
                labels.push(d as u8);
            }
        }
        (patterns, labels)
    }

    #[test]
    fn separated_duplicates_reach_full_purity() {
        let (patterns, labels) = toy_digits();
        let mut rng = SimRng::new(1);
        let model = kmeans_fit(&patterns, 10, &mut rng, 100).unwrap();
        let (report, _) = kmeans_evaluate(&model, &patterns, &labels).unwrap();
        assert_eq!(report.purity, 1.0);
        assert_eq!(report.avg_dist, 0.0);
        assert_eq!(report.c_conv, 1.0);
    }

    #[test]
    fn k1_converges_immediately() {
        let (patterns, _) = toy_digits();
        let mut rng = SimRng::new(2);
        let model = kmeans_fit(&patterns, 1, &mut rng, 100).unwrap();
        assert!(model.epochs_run <= 2);
        assert_eq!(model.final_c_conv, 1.0);
        // single centroid is the global mean
        let members: Vec<usize> = (0..patterns.len()).collect();
        let global = metrics::centroid(&patterns, &members).unwrap();
        assert_eq!(model.centroids[0].means(), global.means());
    }

    #[test]
    fn invalid_k_is_rejected() {
        let (patterns, _) = toy_digits();
        let mut rng = SimRng::new(3);
        assert!(matches!(
            kmeans_fit(&patterns, 0, &mut rng, 10),
            Err(Error::BadClusterCount { k: 0, .. })
        ));
        assert!(kmeans_fit(&patterns[..5], 6, &mut rng, 10).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let (patterns, labels) = toy_digits();
        let fit = |seed| {
            let mut rng = SimRng::new(seed);
            let model = kmeans_fit(&patterns, 10, &mut rng, 100).unwrap();
            let (report, _) = kmeans_evaluate(&model, &patterns, &labels).unwrap();
            (model.epochs_run, report.purity, report.avg_dist)
        };
        assert_eq!(fit(5), fit(5));
    }

    #[test]
    fn within_cluster_distance_nonincreasing() {
        // noisy two-cluster data; track the objective across manual epochs
        let mut rng = SimRng::new(10);
        let mut patterns = Vec::new();
        for i in 0..200 {
            let base = if i % 2 == 0 { 0u8 } else { 1u8 };
            let bits: Vec<u8> = (0..16)
                .map(|_| {
                    let b = base;
                    if rng.flip(0.1) {
                        1 - b
                    } else {
                        b
                    }
                })
                .collect();
            patterns.push(pat(&bits, base));
        }
        let sparse = set_bits_of(&patterns);
        let mut fit_rng = SimRng::new(4);
        let picks = fit_rng.distinct_below(patterns.len(), 2);
        let mut centroids: Vec<Centroid> = picks
            .iter()
            .map(|&i| Centroid::from_means(patterns[i].bits.iter().map(|&b| b as f64).collect()))
            .collect();
        let mut assignments = assign_all(&sparse, &centroids);
        let mut prev = f64::INFINITY;
        for _ in 0..8 {
            (centroids, _) = recompute_centroids(&patterns, &assignments, 2, &mut fit_rng);
            assignments = assign_all(&sparse, &centroids);
            let obj = within_cluster_sad(&patterns, &assignments, &centroids);
            assert!(obj <= prev + 1e-9, "objective went up: {prev} -> {obj}");
            prev = obj;
        }
    }
}
