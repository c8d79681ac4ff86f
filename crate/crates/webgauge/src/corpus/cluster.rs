//! Seeded 1-D k-means over task complexity scores.
//!
//! Initialization is deterministic: the three starting centers sit at the
//! 1/6, 1/2, and 5/6 order statistics of the distinct sorted scores, so
//! repeated runs label the corpus identically. The seed only feeds the RNG
//! used to repair a degenerate empty cluster, which keeps that rare path
//! reproducible too.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{CorpusError, Difficulty};

/// Outcome of clustering the score distribution into difficulty levels.
#[derive(Debug, Clone)]
pub struct DifficultyClustering {
    pub k: usize,
    /// Final centers, strictly ascending; index 0 is Easy.
    pub centers: Vec<f64>,
    pub assignment: BTreeMap<String, Difficulty>,
    pub score: BTreeMap<String, f64>,
    /// Observed (min, max) score per level, in Easy/Middle/Hard order.
    pub ranges: Vec<(f64, f64)>,
}

const MAX_ITERATIONS: usize = 200;

pub(super) fn cluster_difficulty(
    scores: &BTreeMap<String, f64>,
    k: usize,
    seed: u64,
) -> Result<DifficultyClustering, CorpusError> {
    if k != 3 {
        return Err(CorpusError::UnsupportedK(k));
    }
    for (id, score) in scores {
        if !score.is_finite() {
            return Err(CorpusError::NonFiniteScore(id.clone()));
        }
    }
    let ids: Vec<&String> = scores.keys().collect();
    let values: Vec<f64> = scores.values().cloned().collect();
    let (centers, labels) = lloyd_1d(&values, k, seed)?;

    let mut assignment = BTreeMap::new();
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); k];
    for (idx, id) in ids.iter().enumerate() {
        let cluster = labels[idx];
        let level = Difficulty::ALL[cluster];
        assignment.insert((*id).clone(), level);
        let range = &mut ranges[cluster];
        range.0 = range.0.min(values[idx]);
        range.1 = range.1.max(values[idx]);
    }
    Ok(DifficultyClustering {
        k,
        centers,
        assignment,
        score: scores.clone(),
        ranges,
    })
}

/// Standard Lloyd iteration on a 1-D point set. Returns ascending centers and
/// a per-point cluster index (0 = lowest center). A point equidistant to two
/// centers is assigned to the lower one.
pub(super) fn lloyd_1d(values: &[f64], k: usize, seed: u64) -> Result<(Vec<f64>, Vec<usize>), CorpusError> {
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < k {
        return Err(CorpusError::TooFewDistinctScores {
            k,
            distinct: distinct.len(),
        });
    }

    // Quantile order statistics of the distinct values keep the initial
    // centers themselves distinct.
    let m = distinct.len();
    let mut centers: Vec<f64> = (1..=k)
        .map(|i| {
            let rank = ((m * (2 * i - 1)).div_ceil(2 * k)).clamp(1, m);
            distinct[rank - 1]
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = vec![0usize; values.len()];
    for _ in 0..MAX_ITERATIONS {
        let new_labels: Vec<usize> = values.iter().map(|v| nearest(&centers, *v)).collect();

        // An empty cluster is reseeded at the point farthest from its own
        // center, which always splits a populated cluster.
        let mut counts = vec![0usize; k];
        for &l in &new_labels {
            counts[l] += 1;
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            let far = values
                .iter()
                .enumerate()
                .max_by(|(_, a), (_, b)| {
                    let da = (*a - centers[nearest(&centers, **a)]).abs();
                    let db = (*b - centers[nearest(&centers, **b)]).abs();
                    da.partial_cmp(&db).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap_or_else(|| rng.random_range(0..values.len()));
            centers[empty] = values[far];
            continue;
        }

        let mut sums = vec![0.0f64; k];
        for (idx, &l) in new_labels.iter().enumerate() {
            sums[l] += values[idx];
        }
        let new_centers: Vec<f64> = (0..k).map(|c| sums[c] / counts[c] as f64).collect();
        let converged = new_labels == labels && new_centers == centers;
        labels = new_labels;
        centers = new_centers;
        if converged {
            break;
        }
    }

    // Relabel so index 0 carries the lowest center.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| centers[a].partial_cmp(&centers[b]).unwrap());
    let mut rank_of = vec![0usize; k];
    for (rank, &cluster) in order.iter().enumerate() {
        rank_of[cluster] = rank;
    }
    let sorted_centers: Vec<f64> = order.iter().map(|&c| centers[c]).collect();
    let sorted_labels: Vec<usize> = labels.iter().map(|&l| rank_of[l]).collect();
    Ok((sorted_centers, sorted_labels))
}

fn nearest(centers: &[f64], value: f64) -> usize {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (idx, c) in centers.iter().enumerate() {
        let d = (value - c).abs();
        // Strict comparison: ties keep the earlier (lower) center.
        if d < best_d {
            best_d = d;
            best = idx;
        }
    }
    best
}

/// Exhaustive optimal 1-D 3-means by enumerating every contiguous
/// 3-partition of the sorted scores. Exponential-free (O(n^2) cuts) and
/// independent of the Lloyd path; intended as a reference for tests.
pub fn brute_force_reference(values: &[f64]) -> Option<(Vec<f64>, Vec<usize>)> {
    let n = values.len();
    if n < 3 {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();

    let sse = |slice: &[f64]| -> f64 {
        let mean = slice.iter().sum::<f64>() / slice.len() as f64;
        slice.iter().map(|v| (v - mean) * (v - mean)).sum()
    };

    let mut best: Option<(f64, usize, usize)> = None;
    for i in 1..n - 1 {
        for j in i + 1..n {
            let total = sse(&sorted[..i]) + sse(&sorted[i..j]) + sse(&sorted[j..]);
            if best.map_or(true, |(b, _, _)| total < b) {
                best = Some((total, i, j));
            }
        }
    }
    let (_, i, j) = best?;
    let centers = vec![
        sorted[..i].iter().sum::<f64>() / i as f64,
        sorted[i..j].iter().sum::<f64>() / (j - i) as f64,
        sorted[j..].iter().sum::<f64>() / (n - j) as f64,
    ];
    let mut labels = vec![0usize; n];
    for (pos, &orig) in order.iter().enumerate() {
        labels[orig] = if pos < i {
            0
        } else if pos < j {
            1
        } else {
            2
        };
    }
    Some((centers, labels))
}
