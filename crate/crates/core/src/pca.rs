//! PCA via Jacobi eigendecomposition of the sample covariance matrix.
//!
//! Feature dimensionality here is tiny (d = 9), so cyclic Jacobi rotations
//! on the d x d covariance are exact enough and dependency-free.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// p x d orthonormal rows, ordered by decreasing eigenvalue; each row's
    /// largest-magnitude entry is positive.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    pub column_means: Vec<f64>,
}

pub fn pca_fit(x: &[Vec<f64>], p: usize) -> Result<PcaModel> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2 rows, got {n}")));
    }
    let d = x[0].len();
    if x.iter().any(|row| row.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: 0 });
    }
    if p == 0 || p > d.min(n) {
        return Err(Error::InvalidArgument(format!(
            "p = {p} outside 1..=min(n, d) = {}",
            d.min(n)
        )));
    }

    let mut means = vec![0.0; d];
    for row in x {
        for (m, &v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }

    // sample covariance, 1/(n-1)
    let mut cov = vec![vec![0.0; d]; d];
    for row in x {
        for i in 0..d {
            let di = row[i] - means[i];
            for j in i..d {
                cov[i][j] += di * (row[j] - means[j]);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[i][j] /= (n - 1) as f64;
            cov[j][i] = cov[i][j];
        }
    }
    let trace: f64 = (0..d).map(|i| cov[i][i]).sum();

    let (eigvals, eigvecs) = jacobi_eigen(cov);

    // sort eigenpairs by decreasing eigenvalue
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eigvals[b].partial_cmp(&eigvals[a]).unwrap());

    let mut components = Vec::with_capacity(p);
    let mut explained = Vec::with_capacity(p);
    for &idx in order.iter().take(p) {
        let mut comp: Vec<f64> = (0..d).map(|r| eigvecs[r][idx]).collect();
        // sign convention: largest-magnitude entry positive
        let lead = comp
            .iter()
            .cloned()
            .fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if lead < 0.0 {
            for v in &mut comp {
                *v = -*v;
            }
        }
        components.push(comp);
        explained.push(eigvals[idx].max(0.0));
    }
    let ratio: Vec<f64> = explained
        .iter()
        .map(|&e| if trace > 0.0 { e / trace } else { 0.0 })
        .collect();

    Ok(PcaModel {
        components,
        explained_variance: explained,
        explained_variance_ratio: ratio,
        column_means: means,
    })
}

/// Cyclic Jacobi rotations on a symmetric matrix; returns eigenvalues and
/// a matrix whose columns are the eigenvectors.
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = a.len();
    let mut v = vec![vec![0.0; d]; d];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = a
        .iter()
        .enumerate()
        .map(|(i, row)| row[i].abs())
        .fold(1e-300, f64::max);
    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| ((i + 1)..d).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off.sqrt() < 1e-12 * scale {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..d {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..d {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for i in 0..d {
                    let vip = v[i][p];
                    let viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    let eig: Vec<f64> = (0..d).map(|i| a[i][i]).collect();
    (eig, v)
}

/// Project rows: `(X - column_means) * components^T`.
pub fn pca_transform(model: &PcaModel, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = model.column_means.len();
    x.iter()
        .map(|row| {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: row.len() });
            }
            Ok(model
                .components
                .iter()
                .map(|comp| {
                    comp.iter()
                        .zip(row)
                        .zip(&model.column_means)
                        .map(|((&c, &v), &m)| c * (v - m))
                        .sum()
                })
                .collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_axis_variance() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 0.0, 0.0]).collect();
        let m = pca_fit(&x, 2).unwrap();
        assert!((m.explained_variance_ratio[0] - 1.0).abs() < 1e-12);
        assert!(m.explained_variance_ratio[1].abs() < 1e-12);
        assert!((m.components[0][0] - 1.0).abs() < 1e-9); // +e1 by sign rule
    }

    #[test]
    fn diagonal_gaussian_recovers_axes() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let x: Vec<Vec<f64>> = (0..20_000)
            .map(|_| {
                let u: f64 = rng.sample(rand_distr::StandardNormal);
                let v: f64 = rng.sample(rand_distr::StandardNormal);
                vec![u * 2.0f64.sqrt(), v]
            })
            .collect();
        let m = pca_fit(&x, 2).unwrap();
        // closed form for cov [[2,0],[0,1]]: ratios 2/3 and 1/3
        assert!((m.explained_variance_ratio[0] - 2.0 / 3.0).abs() < 0.02);
        assert!((m.explained_variance_ratio[1] - 1.0 / 3.0).abs() < 0.02);
        assert!(m.components[0][0].abs() > 0.99);
        assert!(m.components[1][1].abs() > 0.99);
    }

    #[test]
    fn transform_of_mean_row_is_zero() {
        let x = vec![vec![1.0, 2.0], vec![3.0, 6.0], vec![5.0, 4.0]];
        let m = pca_fit(&x, 2).unwrap();
        let y = pca_transform(&m, &[m.column_means.clone()]).unwrap();
        assert!(y[0].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn score_variance_matches_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let x: Vec<Vec<f64>> = (0..300)
            .map(|_| (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let m = pca_fit(&x, 3).unwrap();
        let y = pca_transform(&m, &x).unwrap();
        for j in 0..3 {
            let mean = y.iter().map(|r| r[j]).sum::<f64>() / y.len() as f64;
            let var = y.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>()
                / (y.len() - 1) as f64;
            assert!(
                (var - m.explained_variance[j]).abs() < 1e-6,
                "score var {var} vs eigenvalue {}",
                m.explained_variance[j]
            );
        }
    }

    #[test]
    fn orthonormal_components_and_ratio_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let x: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let m = pca_fit(&x, 6).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let dot: f64 = m.components[i]
                    .iter()
                    .zip(&m.components[j])
                    .map(|(a, b)| a * b)
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-9);
            }
        }
        let sum: f64 = m.explained_variance_ratio.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        for pair in m.explained_variance.windows(2) {
            assert!(pair[0] >= pair[1]);
        }
    }

    #[test]
    fn invalid_p_rejected() {
        let x = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert!(pca_fit(&x, 0).is_err());
        assert!(pca_fit(&x, 3).is_err());
        assert!(pca_fit(&x[..1], 1).is_err());
    }

    #[test]
    fn transform_dimension_mismatch() {
        let x = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![0.0, 1.0]];
        let m = pca_fit(&x, 2).unwrap();
        assert!(pca_transform(&m, &[vec![1.0]]).is_err());
    }
}
