//! Ordinary least squares via Householder QR, with the diagnostics of a
//! standard regression summary table.

use serde::Serialize;

use super::special::{chi2_sf_2, f_sf, student_t_two_sided};
use super::{Matrix, StatsError};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionReport<T> {
    pub names: Vec<String>,
    pub coefficients: Vec<T>,
    pub std_errors: Vec<T>,
    pub t_stats: Vec<T>,
    pub p_values: Vec<T>,
    pub n: usize,
    pub df_resid: usize,
    pub r_squared: T,
    pub adj_r_squared: T,
    pub f_statistic: T,
    pub f_p_value: T,
    pub durbin_watson: T,
    /// Residual moments: skewness and (non-excess) kurtosis.
    pub skew: T,
    pub kurtosis: T,
    pub jarque_bera: T,
    pub jb_p_value: T,
    /// D'Agostino K² normality test; needs at least 8 residuals.
    pub omnibus: Option<T>,
    pub omnibus_p_value: Option<T>,
    #[serde(skip)]
    pub residuals: Vec<T>,
    #[serde(skip)]
    pub fitted: Vec<T>,
}

impl<T: Real> RegressionReport<T> {
    pub fn coefficient(&self, name: &str) -> Option<T> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.coefficients[i])
    }

    pub fn p_value(&self, name: &str) -> Option<T> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.p_values[i])
    }
}

/// `Σ(e_t − e_{t−1})² / Σ e_t²`.
pub fn durbin_watson<T: Real>(residuals: &[T]) -> T {
    let num: T = residuals
        .windows(2)
        .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
        .sum();
    let den: T = residuals.iter().map(|&e| e * e).sum();
    if den == T::zero() {
        T::zero()
    } else {
        num / den
    }
}

/// Biased sample skewness and kurtosis.
pub fn moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    if m2 == 0.0 {
        return (0.0, 0.0);
    }
    let m3 = values.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    let m4 = values.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2))
}

/// D'Agostino–Pearson K² from the skewness and kurtosis z-scores.
pub fn omnibus(skew: f64, kurtosis: f64, n: usize) -> Option<(f64, f64)> {
    if n < 8 {
        return None;
    }
    let n = n as f64;
    let y = skew * ((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0))).sqrt();
    let beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0)
        / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    let w2 = -1.0 + (2.0 * (beta2 - 1.0)).sqrt();
    let delta = 1.0 / (0.5 * w2.ln()).sqrt();
    let alpha = (2.0 / (w2 - 1.0)).sqrt();
    let y = if y == 0.0 { 1.0 } else { y };
    let zs = delta * (y / alpha + ((y / alpha).powi(2) + 1.0).sqrt()).ln();

    let e = 3.0 * (n - 1.0) / (n + 1.0);
    let var = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0).powi(2) * (n + 3.0) * (n + 5.0));
    let x = (kurtosis - e) / var.sqrt();
    let sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0))
        * (6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0))).sqrt();
    let a = 6.0
        + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + (1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)).sqrt());
    let term1 = 1.0 - 2.0 / (9.0 * a);
    let denom = 1.0 + x * (2.0 / (a - 4.0)).sqrt();
    if denom == 0.0 {
        return None;
    }
    let term2 = denom.signum() * ((1.0 - 2.0 / a) / denom.abs()).cbrt();
    let zk = (term1 - term2) / (2.0 / (9.0 * a)).sqrt();
    let k2 = zs * zs + zk * zk;
    Some((k2, chi2_sf_2(k2)))
}

/// Householder QR of `x` applied to `y` in place. Returns the upper
/// triangle `r` (p×p) and `Qᵀy`.
fn householder<T: Real>(x: &Matrix<T>, y: &[T]) -> Result<(Vec<Vec<T>>, Vec<T>), StatsError> {
    let (n, p) = (x.rows(), x.cols());
    let mut a: Vec<Vec<T>> = (0..p).map(|j| x.column(j)).collect();
    let norms: Vec<T> = a
        .iter()
        .map(|c| c.iter().map(|&v| v * v).sum::<T>().sqrt())
        .collect();
    let mut qty = y.to_vec();
    let tol = T::lit(1e-10);
    for j in 0..p {
        let alpha_norm = a[j][j..].iter().map(|&v| v * v).sum::<T>().sqrt();
        if !(alpha_norm > tol * norms[j]) || norms[j] == T::zero() {
            return Err(StatsError::RankDeficient(x.names()[j].clone()));
        }
        let alpha = if a[j][j] > T::zero() {
            -alpha_norm
        } else {
            alpha_norm
        };
        let mut v: Vec<T> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: T = v.iter().map(|&e| e * e).sum();
        let two = T::lit(2.0);
        for col in a.iter_mut().skip(j) {
            let dot: T = v.iter().zip(&col[j..]).map(|(&vi, &ci)| vi * ci).sum();
            let f = two * dot / vnorm2;
            for (ci, &vi) in col[j..].iter_mut().zip(&v) {
                *ci -= f * vi;
            }
        }
        let dot: T = v.iter().zip(&qty[j..]).map(|(&vi, &yi)| vi * yi).sum();
        let f = two * dot / vnorm2;
        for (yi, &vi) in qty[j..].iter_mut().zip(&v) {
            *yi -= f * vi;
        }
        debug_assert!(n > j);
    }
    let r = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| if j >= i { a[j][i] } else { T::zero() })
                .collect()
        })
        .collect();
    Ok((r, qty))
}

/// Inverse of an upper-triangular matrix.
fn upper_inverse<T: Real>(r: &[Vec<T>]) -> Vec<Vec<T>> {
    let p = r.len();
    let mut inv = vec![vec![T::zero(); p]; p];
    for col in 0..p {
        for i in (0..=col).rev() {
            let rhs = if i == col { T::one() } else { T::zero() };
            let s: T = (i + 1..=col).map(|k| r[i][k] * inv[k][col]).sum();
            inv[i][col] = (rhs - s) / r[i][i];
        }
    }
    inv
}

/// Least-squares fit of `response` on the columns of `design`. Include an
/// all-ones column for an intercept; R² is centered when one is present.
pub fn ols<T: Real>(design: &Matrix<T>, response: &[T]) -> Result<RegressionReport<T>, StatsError> {
    let (n, p) = (design.rows(), design.cols());
    if response.len() != n {
        return Err(StatsError::Shape(format!(
            "{} responses for {n} rows",
            response.len()
        )));
    }
    if n <= p {
        return Err(StatsError::TooFewRows {
            needed: p + 1,
            got: n,
        });
    }
    if let Some(name) = design.first_non_finite() {
        return Err(StatsError::NonFinite(name.to_string()));
    }
    if response.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite("response".into()));
    }
    let (r, qty) = householder(design, response)?;
    let mut beta = vec![T::zero(); p];
    for i in (0..p).rev() {
        let s: T = (i + 1..p).map(|k| r[i][k] * beta[k]).sum();
        beta[i] = (qty[i] - s) / r[i][i];
    }
    let fitted: Vec<T> = design
        .row_iter()
        .map(|row| row.iter().zip(&beta).map(|(&x, &b)| x * b).sum())
        .collect();
    let residuals: Vec<T> = response.iter().zip(&fitted).map(|(&y, &f)| y - f).collect();
    let rss: T = residuals.iter().map(|&e| e * e).sum();
    let df_resid = n - p;
    let df = T::from_usize(df_resid).expect("df");
    let sigma2 = rss / df;
    let rinv = upper_inverse(&r);
    let std_errors: Vec<T> = (0..p)
        .map(|i| (sigma2 * rinv[i].iter().map(|&v| v * v).sum::<T>()).sqrt())
        .collect();
    let t_stats: Vec<T> = beta.iter().zip(&std_errors).map(|(&b, &s)| b / s).collect();
    let p_values: Vec<T> = t_stats
        .iter()
        .map(|t| T::lit(student_t_two_sided(t.as_f64(), df_resid as f64)))
        .collect();

    let has_intercept = (0..p).any(|j| design.column(j).iter().all(|&v| v == T::one()));
    let nf = T::from_usize(n).expect("n");
    let tss: T = if has_intercept {
        let m = response.iter().copied().sum::<T>() / nf;
        response.iter().map(|&y| (y - m) * (y - m)).sum()
    } else {
        response.iter().map(|&y| y * y).sum()
    };
    let r_squared = if tss > T::zero() {
        T::one() - rss / tss
    } else {
        T::one()
    };
    let df_model = p - usize::from(has_intercept);
    let df_total = T::from_usize(n - usize::from(has_intercept)).expect("df");
    let adj_r_squared = T::one() - (T::one() - r_squared) * df_total / df;
    let (f_statistic, f_p_value) = if df_model == 0 {
        (T::nan(), T::nan())
    } else {
        let dfm = T::from_usize(df_model).expect("df");
        let f = ((tss - rss) / dfm) / sigma2;
        (
            f,
            T::lit(f_sf(f.as_f64(), df_model as f64, df_resid as f64)),
        )
    };

    let res64: Vec<f64> = residuals.iter().map(|e| e.as_f64()).collect();
    let (skew, kurtosis) = moments(&res64);
    let jb = n as f64 / 6.0 * (skew * skew + (kurtosis - 3.0).powi(2) / 4.0);
    let omni = omnibus(skew, kurtosis, n);

    Ok(RegressionReport {
        names: design.names().to_vec(),
        coefficients: beta,
        std_errors,
        t_stats,
        p_values,
        n,
        df_resid,
        r_squared,
        adj_r_squared,
        f_statistic,
        f_p_value,
        durbin_watson: durbin_watson(&residuals),
        skew: T::lit(skew),
        kurtosis: T::lit(kurtosis),
        jarque_bera: T::lit(jb),
        jb_p_value: T::lit(chi2_sf_2(jb)),
        omnibus: omni.map(|o| T::lit(o.0)),
        omnibus_p_value: omni.map(|o| T::lit(o.1)),
        residuals,
        fitted,
    })
}
