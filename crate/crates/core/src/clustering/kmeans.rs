//! Lloyd's algorithm with k-means++ seeding and restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct KMeansParams {
    pub restarts: usize,
    pub max_iter: usize,
    /// Relative centroid-shift threshold: converged when
    /// max_j ||c_j' - c_j|| / (1 + ||c_j'||) falls below this.
    pub tol: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams {
            restarts: DEFAULT_RESTARTS,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub iterations_run: usize,
    pub seed: u64,
    /// Final assignment on the fit data; consistent with `centroids`.
    pub assignment: Vec<usize>,
    /// Inertia after each Lloyd iteration of the winning restart.
    pub inertia_trace: Vec<f64>,
}

/// Serialized form: `k`, `d`, row-major `centroids`, `inertia`, `seed`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KMeansModelJson {
    pub k: usize,
    pub d: usize,
    pub centroids: Vec<f64>,
    pub inertia: f64,
    pub seed: u64,
}

impl KMeansModel {
    pub fn dim(&self) -> usize {
        self.centroids.first().map_or(0, |c| c.len())
    }

    pub fn to_json(&self) -> KMeansModelJson {
        KMeansModelJson {
            k: self.k,
            d: self.dim(),
            centroids: self.centroids.iter().flatten().copied().collect(),
            inertia: self.inertia,
            seed: self.seed,
        }
    }
}

impl KMeansModelJson {
    pub fn to_model(&self) -> Result<KMeansModel> {
        if self.k == 0 || self.d == 0 || self.centroids.len() != self.k * self.d {
            return Err(Error::InvalidArgument(format!(
                "field `centroids` has {} entries, expected k*d = {}",
                self.centroids.len(),
                self.k * self.d
            )));
        }
        Ok(KMeansModel {
            k: self.k,
            centroids: self.centroids.chunks(self.d).map(<[f64]>::to_vec).collect(),
            inertia: self.inertia,
            iterations_run: 0,
            seed: self.seed,
            assignment: Vec::new(),
            inertia_trace: Vec::new(),
        })
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn kmeans_fit(x: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansModel> {
    kmeans_fit_with(x, k, seed, &KMeansParams::default())
}

pub fn kmeans_fit_with(
    x: &[Vec<f64>],
    k: usize,
    seed: u64,
    params: &KMeansParams,
) -> Result<KMeansModel> {
    let n = x.len();
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n} points")));
    }
    let d = x[0].len();
    if x.iter().any(|row| row.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: 0 });
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite feature value".into()));
    }

    let mut best: Option<KMeansModel> = None;
    for r in 0..params.restarts.max(1) {
        let restart_seed = seed
            .wrapping_add((r as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut rng = ChaCha8Rng::seed_from_u64(restart_seed);
        let centroids = plus_plus_init(x, k, &mut rng);
        let model = lloyd(x, centroids, seed, params);
        let better = match &best {
            None => true,
            Some(b) => model.inertia < b.inertia,
        };
        if better {
            best = Some(model);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// k-means++ D^2 seeding.
fn plus_plus_init(x: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = x.len();
    let first = rng.gen_range(0..n);
    let mut centroids = vec![x[first].clone()];
    let mut d2: Vec<f64> = x.iter().map(|p| sq_dist(p, &x[first])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // all remaining mass at existing centers; any point works
            rng.gen_range(0..n)
        };
        centroids.push(x[next].clone());
        let c = centroids.last().unwrap();
        for (i, p) in x.iter().enumerate() {
            let dist = sq_dist(p, c);
            if dist < d2[i] {
                d2[i] = dist;
            }
        }
    }
    centroids
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0usize;
    let mut best_d = sq_dist(point, &centroids[0]);
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(point, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    (best, best_d)
}

fn lloyd(x: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, seed: u64, params: &KMeansParams) -> KMeansModel {
    let n = x.len();
    let k = centroids.len();
    let d = x[0].len();
    let mut assignment = vec![0usize; n];
    let mut trace = Vec::new();
    let mut iterations = 0usize;
    for _ in 0..params.max_iter {
        iterations += 1;
        let mut inertia = 0.0;
        for (i, p) in x.iter().enumerate() {
            let (j, dist) = nearest(p, &centroids);
            assignment[i] = j;
            inertia += dist;
        }
        if let Some(&prev) = trace.last() {
            debug_assert!(
                inertia <= prev + 1e-9 * (1.0 + prev),
                "Lloyd inertia increased: {prev} -> {inertia}"
            );
        }
        trace.push(inertia);

        // means per cluster
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &j) in x.iter().zip(&assignment) {
            counts[j] += 1;
            for (s, &v) in sums[j].iter_mut().zip(p) {
                *s += v;
            }
        }
        // empty cluster: seed it with the point farthest from its centroid
        for j in 0..k {
            if counts[j] == 0 {
                let (far, _) = x
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i, sq_dist(p, &centroids[assignment[i]])))
                    .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                    .unwrap();
                sums[j] = x[far].clone();
                counts[j] = 1;
            }
        }
        let mut shift = 0.0f64;
        for j in 0..k {
            let mut norm2 = 0.0;
            let mut delta2 = 0.0;
            for dd in 0..d {
                let new = sums[j][dd] / counts[j] as f64;
                let diff = new - centroids[j][dd];
                delta2 += diff * diff;
                norm2 += new * new;
                centroids[j][dd] = new;
            }
            shift = shift.max(delta2.sqrt() / (1.0 + norm2.sqrt()));
        }
        if shift < params.tol {
            break;
        }
    }
    // final assignment against the converged centroids
    let mut inertia = 0.0;
    for (i, p) in x.iter().enumerate() {
        let (j, dist) = nearest(p, &centroids);
        assignment[i] = j;
        inertia += dist;
    }
    trace.push(inertia);
    KMeansModel {
        k,
        centroids,
        inertia,
        iterations_run: iterations,
        seed,
        assignment,
        inertia_trace: trace,
    }
}

/// Index of the nearest centroid per row; ties break to the lowest index.
pub fn kmeans_assign(model: &KMeansModel, x: &[Vec<f64>]) -> Result<Vec<usize>> {
    let d = model.dim();
    x.iter()
        .map(|p| {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.len() });
            }
            Ok(nearest(p, &model.centroids).0)
        })
        .collect()
}
