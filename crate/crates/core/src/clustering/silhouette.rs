//! Mean silhouette coefficient and the k-selection sweep.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::kmeans::{kmeans_fit_with, KMeansParams};

/// Mean over points of (b - a) / max(a, b) with a = mean intra-cluster
/// distance (excluding self) and b = the smallest mean distance to another
/// cluster. Points in singleton clusters score 0.
pub fn silhouette_score(x: &[Vec<f64>], assignment: &[usize]) -> Result<f64> {
    let n = x.len();
    if n == 0 || assignment.len() != n {
        return Err(Error::InvalidArgument(
            "assignment length must match point count".into(),
        ));
    }
    let k = assignment.iter().max().map_or(0, |&m| m + 1);
    let mut sizes = vec![0usize; k];
    for &a in assignment {
        sizes[a] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::InvalidArgument(
            "silhouette requires at least 2 non-empty clusters".into(),
        ));
    }
    let mut total = 0.0;
    let mut sums = vec![0.0f64; k];
    for (i, p) in x.iter().enumerate() {
        sums.fill(0.0);
        for (q, &c) in x.iter().zip(assignment) {
            sums[c] += euclidean(p, q);
        }
        let own = assignment[i];
        if sizes[own] == 1 {
            continue; // singleton scores 0
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = sums
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != own && sizes[c] > 0)
            .map(|(c, &s)| s / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteSweep {
    pub k_values: Vec<usize>,
    pub scores: Vec<f64>,
    pub best_k: usize,
}

pub const DEFAULT_K_MIN: usize = 2;
pub const DEFAULT_K_MAX: usize = 10;

/// K-means fit plus silhouette per k in `[k_min, k_max]`; best_k is the
/// argmax with ties going to the smaller k.
pub fn silhouette_sweep(
    x: &[Vec<f64>],
    k_min: usize,
    k_max: usize,
    seed: u64,
) -> Result<SilhouetteSweep> {
    if k_min < 2 || k_max < k_min {
        return Err(Error::InvalidArgument(format!(
            "sweep range [{k_min}, {k_max}] must satisfy 2 <= k_min <= k_max"
        )));
    }
    if k_max > x.len().saturating_sub(1) {
        return Err(Error::InvalidArgument(format!(
            "k_max = {k_max} must be <= n - 1 = {}",
            x.len().saturating_sub(1)
        )));
    }
    let params = KMeansParams::default();
    let mut k_values = Vec::new();
    let mut scores = Vec::new();
    let mut best_k = k_min;
    let mut best_score = f64::NEG_INFINITY;
    for k in k_min..=k_max {
        let model = kmeans_fit_with(x, k, seed, &params)?;
        let score = silhouette_score(x, &model.assignment)?;
        if score > best_score {
            best_score = score;
            best_k = k;
        }
        k_values.push(k);
        scores.push(score);
    }
    Ok(SilhouetteSweep {
        k_values,
        scores,
        best_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Literal textbook double loop, kept independent of the library path.
    pub(crate) fn silhouette_reference(x: &[Vec<f64>], assignment: &[usize]) -> f64 {
        let n = x.len();
        let k = assignment.iter().max().unwrap() + 1;
        let mut total = 0.0;
        for i in 0..n {
            let own = assignment[i];
            let own_size = assignment.iter().filter(|&&c| c == own).count();
            if own_size == 1 {
                continue;
            }
            let mut a = 0.0;
            for j in 0..n {
                if j != i && assignment[j] == own {
                    a += euclidean(&x[i], &x[j]);
                }
            }
            a /= (own_size - 1) as f64;
            let mut b = f64::INFINITY;
            for c in 0..k {
                if c == own {
                    continue;
                }
                let size = assignment.iter().filter(|&&cc| cc == c).count();
                if size == 0 {
                    continue;
                }
                let mut mean = 0.0;
                for j in 0..n {
                    if assignment[j] == c {
                        mean += euclidean(&x[i], &x[j]);
                    }
                }
                b = b.min(mean / size as f64);
            }
            if a.max(b) > 0.0 {
                total += (b - a) / a.max(b);
            }
        }
        total / n as f64
    }

    #[test]
    fn tight_far_pairs_score_high() {
        let x = vec![
            vec![0.0, 0.0],
            vec![0.1, 0.0],
            vec![100.0, 0.0],
            vec![100.1, 0.0],
        ];
        let s = silhouette_score(&x, &[0, 0, 1, 1]).unwrap();
        assert!(s > 0.9, "score {s}");
        assert!((s - silhouette_reference(&x, &[0, 0, 1, 1])).abs() < 1e-12);
    }

    #[test]
    fn random_split_of_one_blob_scores_low() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x: Vec<Vec<f64>> = (0..80)
            .map(|_| vec![rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)])
            .collect();
        let assignment: Vec<usize> = (0..80).map(|_| rng.gen_range(0..2)).collect();
        let s = silhouette_score(&x, &assignment).unwrap();
        assert!(s <= 0.1, "score {s}");
    }

    #[test]
    fn score_stays_in_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..20 {
            let n = rng.gen_range(4..30);
            let x: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)])
                .collect();
            let assignment: Vec<usize> = (0..n).map(|i| if i == 0 { 0 } else { rng.gen_range(0..3) }).collect();
            if assignment.iter().max() == assignment.iter().min() {
                continue;
            }
            let s = silhouette_score(&x, &assignment).unwrap();
            assert!((-1.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn single_cluster_rejected() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(silhouette_score(&x, &[0, 0]).is_err());
    }

    #[test]
    fn matches_reference_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let n = rng.gen_range(6..40);
            let x: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
                .collect();
            let k = rng.gen_range(2..4);
            let mut assignment: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)) .collect();
            for c in 0..k {
                assignment[c] = c; // guarantee non-empty clusters
            }
            let s = silhouette_score(&x, &assignment).unwrap();
            assert!((s - silhouette_reference(&x, &assignment)).abs() < 1e-9);
        }
    }

    #[test]
    fn sweep_finds_three_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let centers = [(0.0, 0.0), (50.0, 0.0), (0.0, 50.0)];
        let x: Vec<Vec<f64>> = centers
            .iter()
            .flat_map(|&(cx, cy)| {
                let r = &mut rng;
                (0..20)
                    .map(|_| vec![cx + r.gen_range(-1.0..1.0), cy + r.gen_range(-1.0..1.0)])
                    .collect::<Vec<_>>()
            })
            .collect();
        let sweep = silhouette_sweep(&x, 2, 8, 7).unwrap();
        assert_eq!(sweep.best_k, 3);
        assert_eq!(sweep.k_values, vec![2, 3, 4, 5, 6, 7, 8]);
        assert!(sweep.scores.iter().all(|s| (-1.0..=1.0).contains(s)));
    }

    #[test]
    fn sweep_default_range_is_2_to_10() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let x: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.gen_range(-1.0..1.0)])
            .collect();
        let sweep = silhouette_sweep(&x, DEFAULT_K_MIN, DEFAULT_K_MAX, 1).unwrap();
        assert_eq!(sweep.k_values, (2..=10).collect::<Vec<_>>());
        assert!(sweep.k_values.contains(&sweep.best_k));
    }

    #[test]
    fn sweep_range_validation() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert!(silhouette_sweep(&x, 1, 2, 0).is_err());
        assert!(silhouette_sweep(&x, 2, 5, 0).is_err());
    }
}
