//! KMeans++ seeding with Lloyd refinement, and the inertia elbow.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Matrix, StatsError};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
}

impl KMeansConfig {
    pub fn new(k: usize, restarts: usize, seed: u64) -> Self {
        Self {
            k,
            restarts,
            seed,
            max_iter: 300,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport<T> {
    pub k: usize,
    /// Cluster of each row. Clusters are numbered by decreasing size, ties by
    /// first appearance, so cluster 0 is always the largest.
    pub labels: Vec<usize>,
    pub inertia: T,
    pub counts: Vec<usize>,
    pub centroids: Vec<Vec<T>>,
    /// Per-cluster feature means; of the clustered table unless replaced via
    /// [`ClusterReport::with_feature_means`].
    pub means: Vec<Vec<T>>,
    pub feature_names: Vec<String>,
    pub iterations: usize,
    /// Index of the restart that produced this solution.
    pub restart: usize,
}

impl<T: Real> ClusterReport<T> {
    /// Recomputes the per-cluster means on another table with the same rows,
    /// e.g. the raw features before standardization.
    pub fn with_feature_means(mut self, table: &Matrix<T>) -> Result<Self, StatsError> {
        if table.rows() != self.labels.len() {
            return Err(StatsError::Shape(format!(
                "{} rows for {} labels",
                table.rows(),
                self.labels.len()
            )));
        }
        self.means = cluster_means(table, &self.labels, self.k);
        self.feature_names = table.names().to_vec();
        Ok(self)
    }
}

fn dist2<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Per-cluster column means; empty clusters get zeros.
pub fn cluster_means<T: Real>(table: &Matrix<T>, labels: &[usize], k: usize) -> Vec<Vec<T>> {
    let d = table.cols();
    let mut sums = vec![vec![T::zero(); d]; k];
    let mut counts = vec![0usize; k];
    for (row, &l) in table.row_iter().zip(labels) {
        counts[l] += 1;
        for (s, &v) in sums[l].iter_mut().zip(row) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            let c = T::from_usize(c).expect("count");
            s.iter_mut().for_each(|v| *v /= c);
        }
    }
    sums
}

fn assign<T: Real>(table: &Matrix<T>, centroids: &[Vec<T>], labels: &mut [usize]) -> T {
    let mut inertia = T::zero();
    for (row, label) in table.row_iter().zip(labels.iter_mut()) {
        let (best, d) = centroids
            .iter()
            .enumerate()
            .map(|(c, cent)| (c, dist2(row, cent)))
            .fold(
                (0, T::infinity()),
                |acc, cur| if cur.1 < acc.1 { cur } else { acc },
            );
        *label = best;
        inertia += d;
    }
    inertia
}

/// D²-weighted seeding.
fn seed_centroids<T: Real>(table: &Matrix<T>, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<T>> {
    let n = table.rows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = table
        .row_iter()
        .map(|r| dist2(r, table.row(chosen[0])).as_f64())
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            // rounding can leave `target` past the end; fall back to the last positive weight
            if d2[pick] == 0.0 {
                pick = d2.iter().rposition(|&w| w > 0.0).expect("positive total");
            }
            pick
        } else {
            // every remaining point coincides with a centroid
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        let c = table.row(next);
        for (w, row) in d2.iter_mut().zip(table.row_iter()) {
            *w = w.min(dist2(row, c).as_f64());
        }
    }
    chosen.iter().map(|&i| table.row(i).to_vec()).collect()
}

struct Run<T> {
    labels: Vec<usize>,
    centroids: Vec<Vec<T>>,
    inertia: T,
    iterations: usize,
}

fn lloyd<T: Real>(
    table: &Matrix<T>,
    mut centroids: Vec<Vec<T>>,
    cfg: &KMeansConfig,
) -> Result<Run<T>, StatsError> {
    let k = centroids.len();
    let mut labels = vec![0; table.rows()];
    let mut inertia = assign(table, &centroids, &mut labels);
    let tol = T::lit(cfg.tol);
    let slack = T::lit(1e-12);
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let means = cluster_means(table, &labels, k);
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&l| counts[l] += 1);
        let mut shift = T::zero();
        for c in 0..k {
            // an emptied cluster keeps its centroid
            if counts[c] > 0 {
                shift = shift.max(dist2(&centroids[c], &means[c]).sqrt());
                centroids[c] = means[c].clone();
            }
        }
        let next = assign(table, &centroids, &mut labels);
        if next > inertia + slack * inertia.max(T::one()) {
            return Err(StatsError::Numeric(format!(
                "Lloyd step {iterations} raised inertia from {inertia} to {next}"
            )));
        }
        inertia = next;
        if shift < tol {
            break;
        }
    }
    Ok(Run {
        labels,
        centroids,
        inertia,
        iterations,
    })
}

/// Best-of-restarts KMeans++ on the rows of `table` (squared Euclidean).
/// Restart `r` draws from ChaCha stream `r` of `seed`, so results are
/// reproducible and independent of how restarts are scheduled.
pub fn kmeanspp<T: Real>(
    table: &Matrix<T>,
    cfg: &KMeansConfig,
) -> Result<ClusterReport<T>, StatsError> {
    let n = table.rows();
    if cfg.k == 0 || cfg.restarts == 0 {
        return Err(StatsError::Invalid(
            "k and restarts must be at least 1".into(),
        ));
    }
    if cfg.k > n {
        return Err(StatsError::KTooLarge { k: cfg.k, n });
    }
    if let Some(name) = table.first_non_finite() {
        return Err(StatsError::NonFinite(name.to_string()));
    }
    let mut best: Option<(usize, Run<T>)> = None;
    for r in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(r as u64);
        let run = lloyd(table, seed_centroids(table, cfg.k, &mut rng), cfg)?;
        if best.as_ref().is_none_or(|(_, b)| run.inertia < b.inertia) {
            best = Some((r, run));
        }
    }
    let (restart, run) = best.expect("at least one restart");
    Ok(relabel(table, cfg.k, restart, run))
}

fn relabel<T: Real>(table: &Matrix<T>, k: usize, restart: usize, run: Run<T>) -> ClusterReport<T> {
    let mut counts = vec![0usize; k];
    let mut first = vec![usize::MAX; k];
    for (i, &l) in run.labels.iter().enumerate() {
        counts[l] += 1;
        first[l] = first[l].min(i);
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(first[a].cmp(&first[b])));
    let mut new_id = vec![0; k];
    for (new, &old) in order.iter().enumerate() {
        new_id[old] = new;
    }
    let labels: Vec<usize> = run.labels.iter().map(|&l| new_id[l]).collect();
    ClusterReport {
        k,
        means: cluster_means(table, &labels, k),
        counts: order.iter().map(|&o| counts[o]).collect(),
        centroids: order.iter().map(|&o| run.centroids[o].clone()).collect(),
        labels,
        inertia: run.inertia,
        feature_names: table.names().to_vec(),
        iterations: run.iterations,
        restart,
    }
}

/// `k` at the largest second difference of the inertia curve, ties to the
/// smaller `k`. `ks` must be consecutive.
pub fn elbow<T: Real>(ks: &[usize], inertia: &[T]) -> Result<usize, StatsError> {
    if ks.len() != inertia.len() {
        return Err(StatsError::Shape(format!(
            "{} k values, {} inertias",
            ks.len(),
            inertia.len()
        )));
    }
    if ks.len() < 3 {
        return Err(StatsError::Invalid(format!(
            "elbow needs at least 3 k values, got {}",
            ks.len()
        )));
    }
    if ks.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(StatsError::Invalid("k values must be consecutive".into()));
    }
    let scale = inertia.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let eps = scale * T::lit(1e-12);
    let mut best = (ks[1], inertia[0] - T::lit(2.0) * inertia[1] + inertia[2]);
    for i in 2..ks.len() - 1 {
        let d2 = inertia[i - 1] - T::lit(2.0) * inertia[i] + inertia[i + 1];
        if d2 > best.1 + eps {
            best = (ks[i], d2);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_two_clusters() {
        let t = Matrix::from_rows(&[vec![0.0, 0.0], vec![5.0, 5.0]]).unwrap();
        let r = kmeanspp(&t, &KMeansConfig::new(2, 3, 1)).unwrap();
        assert_eq!(r.inertia, 0.0);
        assert_ne!(r.labels[0], r.labels[1]);
    }

    #[test]
    fn single_cluster_inertia_is_total_ss() {
        let t = Matrix::from_rows(&[
            vec![1.0, 2.0],
            vec![3.0, 0.0],
            vec![2.0, 7.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let r = kmeanspp(&t, &KMeansConfig::new(1, 1, 0)).unwrap();
        let m = t.column_means();
        let ss: f64 = t.row_iter().map(|row| dist2(row, &m)).sum();
        assert!((r.inertia - ss).abs() < 1e-12);
    }

    #[test]
    fn largest_cluster_is_zero() {
        let t =
            Matrix::from_rows(&[vec![10.0], vec![0.0], vec![0.1], vec![0.2], vec![10.1]]).unwrap();
        let r = kmeanspp(&t, &KMeansConfig::new(2, 4, 9)).unwrap();
        assert_eq!(r.counts, vec![3, 2]);
        assert_eq!(r.labels, vec![1, 0, 0, 0, 1]);
    }

    #[test]
    fn errors() {
        let t = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert_eq!(
            kmeanspp(&t, &KMeansConfig::new(2, 1, 0)).unwrap_err(),
            StatsError::KTooLarge { k: 2, n: 1 }
        );
        assert!(kmeanspp(&t, &KMeansConfig::new(1, 0, 0)).is_err());
    }

    #[test]
    fn duplicate_points_do_not_break_seeding() {
        let t = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let r = kmeanspp(&t, &KMeansConfig::new(3, 2, 5)).unwrap();
        assert_eq!(r.inertia, 0.0);
    }

    #[test]
    fn elbow_examples() {
        assert_eq!(
            elbow(&[2, 3, 4, 5, 6], &[100.0, 40.0, 38.0, 37.0, 36.0]).unwrap(),
            3
        );
        assert_eq!(elbow(&[2, 3, 4, 5], &[40.0, 30.0, 20.0, 10.0]).unwrap(), 3);
        let knee5 = [
            900.0, 700.0, 520.0, 350.0, 320.0, 300.0, 285.0, 275.0, 268.0,
        ];
        assert_eq!(elbow(&(2..=10).collect::<Vec<_>>(), &knee5).unwrap(), 5);
        assert!(elbow(&[2, 3], &[1.0, 0.5]).is_err());
    }
}
