//! Principal components from the eigendecomposition of the sample covariance.

use serde::Serialize;

use super::{Matrix, StatsError};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaResult<T> {
    /// Covariance eigenvalues, descending.
    pub eigenvalues: Vec<T>,
    /// Eigenvalues as fractions of total variance; sums to 1.
    pub fractions: Vec<T>,
    /// Unit eigenvectors, one per eigenvalue. Sign fixed so the entry of
    /// largest magnitude is positive.
    pub components: Vec<Vec<T>>,
    pub means: Vec<T>,
    /// Indices of eigenvalues that are zero up to rounding.
    pub zero_eigenvalues: Vec<usize>,
}

impl<T: Real> PcaResult<T> {
    /// Scores of each row on the first `k` components.
    pub fn project(&self, table: &Matrix<T>, k: usize) -> Matrix<T> {
        let k = k.min(self.components.len());
        let mut out = Matrix::zeros(table.rows(), k);
        for i in 0..table.rows() {
            let row = table.row(i);
            for (c, comp) in self.components.iter().take(k).enumerate() {
                out[(i, c)] = row
                    .iter()
                    .zip(&self.means)
                    .zip(comp)
                    .map(|((&v, &m), &w)| (v - m) * w)
                    .sum();
            }
        }
        out
    }

    /// Maps scores on the leading components back to the original space.
    pub fn reconstruct(&self, scores: &Matrix<T>) -> Matrix<T> {
        let d = self.means.len();
        let mut out = Matrix::zeros(scores.rows(), d);
        for i in 0..scores.rows() {
            for j in 0..d {
                out[(i, j)] = self.means[j]
                    + (0..scores.cols())
                        .map(|c| scores[(i, c)] * self.components[c][j])
                        .sum::<T>();
            }
        }
        out
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix given as rows.
/// Returns (eigenvalues, eigenvectors as columns of `v`).
pub fn symmetric_eigen<T: Real>(a: &[Vec<T>]) -> (Vec<T>, Vec<Vec<T>>) {
    let n = a.len();
    let mut a: Vec<Vec<T>> = a.to_vec();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    let two = T::lit(2.0);
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: T = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (two * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// Sample covariance (n−1) of the columns.
pub fn covariance<T: Real>(table: &Matrix<T>) -> Vec<Vec<T>> {
    let d = table.cols();
    let means = table.column_means();
    let denom = T::from_usize(table.rows().saturating_sub(1).max(1)).expect("row count");
    let mut cov = vec![vec![T::zero(); d]; d];
    for row in table.row_iter() {
        for j in 0..d {
            let dj = row[j] - means[j];
            for k in j..d {
                cov[j][k] += dj * (row[k] - means[k]);
            }
        }
    }
    for j in 0..d {
        for k in j..d {
            cov[j][k] /= denom;
            cov[k][j] = cov[j][k];
        }
    }
    cov
}

/// PCA of an (already standardized, if desired) table with more rows than columns.
pub fn pca<T: Real>(table: &Matrix<T>) -> Result<PcaResult<T>, StatsError> {
    let (n, d) = (table.rows(), table.cols());
    if d == 0 || n <= d {
        return Err(StatsError::TooFewRows {
            needed: d + 1,
            got: n,
        });
    }
    if let Some(name) = table.first_non_finite() {
        return Err(StatsError::NonFinite(name.to_string()));
    }
    let (values, vectors) = symmetric_eigen(&covariance(table));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let max = values.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    let cutoff = max * T::epsilon() * T::from_usize(64 * d).expect("small");
    let eigenvalues: Vec<T> = order
        .iter()
        .map(|&i| {
            if values[i].abs() <= cutoff {
                T::zero()
            } else {
                values[i]
            }
        })
        .collect();
    let total: T = eigenvalues.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(StatsError::Numeric("covariance is identically zero".into()));
    }
    let components = order
        .iter()
        .map(|&i| {
            let mut c: Vec<T> = vectors.iter().map(|row| row[i]).collect();
            let lead = c
                .iter()
                .copied()
                .fold(T::zero(), |m, v| if v.abs() > m.abs() { v } else { m });
            if lead < T::zero() {
                c.iter_mut().for_each(|v| *v = -*v);
            }
            c
        })
        .collect();
    Ok(PcaResult {
        fractions: eigenvalues.iter().map(|&v| v / total).collect(),
        zero_eigenvalues: eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == T::zero())
            .map(|(i, _)| i)
            .collect(),
        eigenvalues,
        components,
        means: table.column_means(),
    })
}
