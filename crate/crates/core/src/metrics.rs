//! Clustering evaluation: sad distance, centroids, convergence measures,
//! and purity.

use crate::error::{Error, Result};
use crate::par;

/// A recorded input pattern: the 0/1 line view of a volley plus the source
/// label it was generated from (ground truth for scoring only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub bits: Vec<u8>,
    pub label: Option<u8>,
}

impl Pattern {
    pub fn new(bits: Vec<u8>, label: Option<u8>) -> Self {
        Pattern { bits, label }
    }
}

/// Per-pattern cluster assignments over `q` clusters; `None` marks a pattern
/// no cluster claimed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    assignments: Vec<Option<usize>>,
    q: usize,
}

impl Clustering {
    pub fn new(assignments: Vec<Option<usize>>, q: usize) -> Result<Self> {
        if let Some(bad) = assignments.iter().flatten().find(|&&i| i >= q) {
            return Err(Error::InvalidConfig(format!(
                "cluster index {bad} out of range for q = {q}"
            )));
        }
        Ok(Clustering { assignments, q })
    }

    pub fn assignments(&self) -> &[Option<usize>] {
        &self.assignments
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn assigned_count(&self) -> usize {
        self.assignments.iter().flatten().count()
    }

    /// Member pattern indices per cluster.
    pub fn members_by_cluster(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.q];
        for (idx, a) in self.assignments.iter().enumerate() {
            if let Some(c) = a {
                members[*c].push(idx);
            }
        }
        members
    }
}

/// Element-wise mean of a cluster's members, one entry in [0, 1] per line.
#[derive(Debug, Clone, PartialEq)]
pub struct Centroid {
    means: Vec<f64>,
}

impl Centroid {
    pub fn from_means(means: Vec<f64>) -> Self {
        Centroid { means }
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }
}

/// Sum of absolute differences.
pub fn sad(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum())
}

/// sad distance from a 0/1 pattern to a centroid.
#[inline]
pub fn sad_bits(bits: &[u8], centroid: &Centroid) -> f64 {
    debug_assert_eq!(bits.len(), centroid.dim());
    bits.iter()
        .zip(centroid.means())
        .map(|(&b, &c)| if b == 1 { 1.0 - c } else { c })
        .sum()
}

/// Element-wise mean of the given member patterns.
pub fn centroid(patterns: &[Pattern], members: &[usize]) -> Result<Centroid> {
    if members.is_empty() {
        return Err(Error::NoAssignedPatterns);
    }
    let dim = patterns[members[0]].bits.len();
    let mut sums = vec![0u32; dim];
    for &idx in members {
        for (s, &b) in sums.iter_mut().zip(&patterns[idx].bits) {
            *s += b as u32;
        }
    }
    let n = members.len() as f64;
    Ok(Centroid {
        means: sums.into_iter().map(|s| s as f64 / n).collect(),
    })
}

/// Centroids of every cluster; empty clusters yield `None`.
pub fn centroids_of(patterns: &[Pattern], clustering: &Clustering) -> Result<Vec<Option<Centroid>>> {
    clustering
        .members_by_cluster()
        .iter()
        .map(|members| {
            if members.is_empty() {
                Ok(None)
            } else {
                centroid(patterns, members).map(Some)
            }
        })
        .collect()
}

/// Index of the closest centroid under sad, ties broken toward the lowest
/// index.
pub fn nearest_centroid(bits: &[u8], centroids: &[Centroid]) -> usize {
    debug_assert!(!centroids.is_empty());
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = sad_bits(bits, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Nearest present centroid, reported as the cluster index it belongs to.
fn nearest_present(bits: &[u8], centroids: &[Option<Centroid>]) -> Option<usize> {
    let mut best = None;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        if let Some(c) = c {
            let d = sad_bits(bits, c);
            if d < best_d {
                best_d = d;
                best = Some(i);
            }
        }
    }
    best
}

/// Fraction of assigned patterns whose nearest centroid is their own
/// cluster's.
pub fn c_conv(
    patterns: &[Pattern],
    clustering: &Clustering,
    centroids: &[Option<Centroid>],
) -> Result<f64> {
    let assigned = clustering.assigned_count();
    if assigned == 0 {
        return Err(Error::NoAssignedPatterns);
    }
    let hits: Vec<u64> = par::map_indices(patterns.len(), |idx| {
        match clustering.assignments()[idx] {
            Some(c) => (nearest_present(&patterns[idx].bits, centroids) == Some(c)) as u64,
            None => 0,
        }
    });
    Ok(hits.iter().sum::<u64>() as f64 / assigned as f64)
}

/// Mean sad distance of assigned patterns from their cluster's centroid.
pub fn avg_dist(
    patterns: &[Pattern],
    clustering: &Clustering,
    centroids: &[Option<Centroid>],
) -> Result<f64> {
    let assigned = clustering.assigned_count();
    if assigned == 0 {
        return Err(Error::NoAssignedPatterns);
    }
    let dists: Vec<f64> = par::map_indices(patterns.len(), |idx| {
        match clustering.assignments()[idx] {
            Some(c) => {
                let centroid = centroids[c]
                    .as_ref()
                    .expect("assigned cluster has a centroid");
                sad_bits(&patterns[idx].bits, centroid)
            }
            None => 0.0,
        }
    });
    Ok(dists.iter().sum::<f64>() / assigned as f64)
}

/// Bimodality of the weight matrix: sum of w * (w_max - w) over all synapses,
/// normalized by count * w_max. Zero when every weight sits at a rail.
pub fn w_conv(weights: &[u32], w_max: u32) -> f64 {
    if weights.is_empty() {
        return 0.0;
    }
    let total: u64 = weights
        .iter()
        .map(|&w| w as u64 * (w_max - w) as u64)
        .sum();
    total as f64 / (weights.len() as u64 * w_max as u64) as f64
}

/// Fraction of patterns whose cluster's majority label matches their own.
/// Unassigned patterns count in the denominator only.
pub fn purity(clustering: &Clustering, labels: &[u8]) -> Result<f64> {
    if labels.len() != clustering.len() {
        return Err(Error::LengthMismatch {
            expected: clustering.len(),
            actual: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::NoAssignedPatterns);
    }
    let l_max = labels.iter().copied().max().unwrap_or(0) as usize + 1;
    let mut tally = vec![0u64; clustering.q() * l_max];
    for (a, &label) in clustering.assignments().iter().zip(labels) {
        if let Some(c) = a {
            tally[c * l_max + label as usize] += 1;
        }
    }
    let majority_sum: u64 = (0..clustering.q())
        .map(|c| {
            tally[c * l_max..(c + 1) * l_max]
                .iter()
                .copied()
                .max()
                .unwrap_or(0)
        })
        .sum();
    Ok(majority_sum as f64 / labels.len() as f64)
}

/// The headline scores of one evaluation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    /// Weight bimodality; absent for models without a weight matrix.
    pub w_conv: Option<f64>,
    pub avg_dist: f64,
    pub c_conv: f64,
    pub purity: f64,
}

/// Compute all clustering scores for one window in one call.
pub fn evaluate_clustering(
    patterns: &[Pattern],
    clustering: &Clustering,
    labels: &[u8],
    weights: Option<(&[u32], u32)>,
) -> Result<MetricsReport> {
    let centroids = centroids_of(patterns, clustering)?;
    Ok(MetricsReport {
        w_conv: weights.map(|(w, w_max)| w_conv(w, w_max)),
        avg_dist: avg_dist(patterns, clustering, &centroids)?,
        c_conv: c_conv(patterns, clustering, &centroids)?,
        purity: purity(clustering, labels)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pat(bits: &[u8]) -> Pattern {
        Pattern::new(bits.to_vec(), None)
    }

    #[test]
    fn sad_examples() {
        assert_eq!(sad(&[0.0, 1.0, 1.0], &[1.0, 1.0, 0.0]).unwrap(), 2.0);
        assert_eq!(sad(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(sad(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), 1.0);
        assert!(sad(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn centroid_examples() {
        let patterns = vec![pat(&[0, 1]), pat(&[1, 1])];
        let c = centroid(&patterns, &[0, 1]).unwrap();
        assert_eq!(c.means(), &[0.5, 1.0]);

        let single = centroid(&patterns, &[1]).unwrap();
        assert_eq!(single.means(), &[1.0, 1.0]);

        let copies = vec![pat(&[1, 0]); 5];
        let c = centroid(&copies, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(c.means(), &[1.0, 0.0]);

        assert!(matches!(
            centroid(&patterns, &[]),
            Err(Error::NoAssignedPatterns)
        ));
    }

    #[test]
    fn nearest_centroid_tie_takes_lowest_index() {
        let cents = vec![
            Centroid::from_means(vec![0.0, 0.0]),
            Centroid::from_means(vec![1.0, 1.0]),
        ];
        // [1, 0] is distance 1 from both
        assert_eq!(nearest_centroid(&[1, 0], &cents), 0);
        assert_eq!(nearest_centroid(&[1, 1], &cents), 1);
        assert_eq!(nearest_centroid(&[0, 0], &cents), 0);
    }

    #[test]
    fn c_conv_trivial_cases() {
        let patterns = vec![pat(&[0, 1]), pat(&[1, 1]), pat(&[0, 0])];
        let one_cluster = Clustering::new(vec![Some(0), Some(0), Some(0)], 1).unwrap();
        let cents = centroids_of(&patterns, &one_cluster).unwrap();
        assert_eq!(c_conv(&patterns, &one_cluster, &cents).unwrap(), 1.0);

        let separated = vec![pat(&[1, 1, 0, 0]), pat(&[1, 1, 0, 0]), pat(&[0, 0, 1, 1])];
        let two = Clustering::new(vec![Some(0), Some(0), Some(1)], 2).unwrap();
        let cents = centroids_of(&separated, &two).unwrap();
        assert_eq!(c_conv(&separated, &two, &cents).unwrap(), 1.0);
    }

    #[test]
    fn avg_dist_zero_when_patterns_equal_centroid() {
        let patterns = vec![pat(&[1, 0]), pat(&[1, 0]), pat(&[0, 1])];
        let clustering = Clustering::new(vec![Some(0), Some(0), Some(1)], 2).unwrap();
        let cents = centroids_of(&patterns, &clustering).unwrap();
        assert_eq!(avg_dist(&patterns, &clustering, &cents).unwrap(), 0.0);
    }

    #[test]
    fn w_conv_examples() {
        assert_eq!(w_conv(&[0, 8, 8, 0], 8), 0.0);
        assert_eq!(w_conv(&[4, 4, 4], 8), 2.0);
        // single mid weight among rails
        let w = [0, 8, 4, 8];
        assert!((w_conv(&w, 8) - 16.0 / 32.0).abs() < 1e-12);
    }

    #[test]
    fn purity_hand_counts() {
        // clusters {a, a, b} and {b, b} -> (2 + 2) / 5
        let clustering =
            Clustering::new(vec![Some(0), Some(0), Some(0), Some(1), Some(1)], 2).unwrap();
        let labels = [0, 0, 1, 1, 1];
        assert_eq!(purity(&clustering, &labels).unwrap(), 0.8);
    }

    #[test]
    fn purity_pure_clusters() {
        let clustering = Clustering::new(vec![Some(0), Some(0), Some(1)], 2).unwrap();
        assert_eq!(purity(&clustering, &[3, 3, 5]).unwrap(), 1.0);
    }

    #[test]
    fn purity_counts_unassigned_in_denominator() {
        let clustering = Clustering::new(vec![Some(0), Some(0), None, None], 1).unwrap();
        assert_eq!(purity(&clustering, &[1, 1, 1, 1]).unwrap(), 0.5);
    }

    #[test]
    fn purity_invariant_under_relabeling() {
        let clustering =
            Clustering::new(vec![Some(0), Some(1), Some(0), Some(1), Some(0)], 2).unwrap();
        let labels = [2, 7, 2, 2, 7];
        let base = purity(&clustering, &labels).unwrap();

        // swap cluster ids
        let swapped =
            Clustering::new(vec![Some(1), Some(0), Some(1), Some(0), Some(1)], 2).unwrap();
        assert_eq!(purity(&swapped, &labels).unwrap(), base);

        // swap label names
        let relabeled = [7, 2, 7, 7, 2];
        assert_eq!(purity(&clustering, &relabeled).unwrap(), base);
    }

    #[test]
    fn empty_clusters_are_legal() {
        let patterns = vec![pat(&[1, 0]), pat(&[0, 1])];
        let clustering = Clustering::new(vec![Some(0), Some(0)], 3).unwrap();
        let cents = centroids_of(&patterns, &clustering).unwrap();
        assert!(cents[1].is_none() && cents[2].is_none());
        assert!(c_conv(&patterns, &clustering, &cents).unwrap() <= 1.0);
    }

    proptest! {
        #[test]
        fn sad_metric_axioms(
            a in proptest::collection::vec(0.0f64..4.0, 1..12),
            lens in proptest::collection::vec(0.0f64..4.0, 24..36),
        ) {
            let n = a.len();
            let b = &lens[0..n];
            let c = &lens[n..2 * n];
            let dab = sad(&a, b).unwrap();
            let dba = sad(b, &a).unwrap();
            let dac = sad(&a, c).unwrap();
            let dcb = sad(c, b).unwrap();
            prop_assert!(dab >= 0.0);
            prop_assert_eq!(dab, dba);
            prop_assert_eq!(sad(&a, &a).unwrap(), 0.0);
            // triangle inequality with a float tolerance
            prop_assert!(dab <= dac + dcb + 1e-9);
            if dab == 0.0 {
                for (x, y) in a.iter().zip(b) {
                    prop_assert_eq!(x, y);
                }
            }
        }

        #[test]
        fn centroid_minimizes_mean_squared_distance(
            rows in proptest::collection::vec(proptest::collection::vec(0u8..=1, 6..=6), 1..10),
        ) {
            let patterns: Vec<Pattern> = rows.iter().map(|r| pat(r)).collect();
            let members: Vec<usize> = (0..patterns.len()).collect();
            let c = centroid(&patterns, &members).unwrap();
            let msd = |m: &[f64]| -> f64 {
                patterns.iter().map(|p| {
                    p.bits.iter().zip(m).map(|(&b, &v)| (b as f64 - v).powi(2)).sum::<f64>()
                }).sum::<f64>() / patterns.len() as f64
            };
            let at_centroid = msd(c.means());
            // perturb each coordinate; the mean must not beat the centroid
            for k in 0..6 {
                for delta in [-0.25, 0.25] {
                    let mut m = c.means().to_vec();
                    m[k] = (m[k] + delta).clamp(0.0, 1.0);
                    prop_assert!(msd(&m) + 1e-9 >= at_centroid);
                }
            }
        }

        #[test]
        fn score_ranges(
            assign in proptest::collection::vec(proptest::option::of(0usize..3), 4..30),
            seed in 0u64..500,
        ) {
            use crate::rng::SimRng;
            let mut rng = SimRng::new(seed);
            let n = assign.len();
            let patterns: Vec<Pattern> = (0..n)
                .map(|_| pat(&(0..8).map(|_| rng.below(2) as u8).collect::<Vec<_>>()))
                .collect();
            let labels: Vec<u8> = (0..n).map(|_| rng.below(4) as u8).collect();
            let clustering = Clustering::new(assign, 3).unwrap();
            let p = purity(&clustering, &labels).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            if clustering.assigned_count() > 0 {
                let cents = centroids_of(&patterns, &clustering).unwrap();
                let cc = c_conv(&patterns, &clustering, &cents).unwrap();
                prop_assert!((0.0..=1.0).contains(&cc));
            }
            let weights: Vec<u32> = (0..24).map(|_| rng.below(9)).collect();
            let wc = w_conv(&weights, 8);
            prop_assert!((0.0..=2.0).contains(&wc)); // max w_max/4 at the midpoint
        }
    }
}
