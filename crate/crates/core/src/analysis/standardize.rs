//! Column standardization.

use serde::{Deserialize, Serialize};

use super::{Matrix, StatsError};
use crate::scalar::Real;
use crate::stats::{mean, sample_variance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// Subtract the mean, divide by the sample standard deviation.
    ZScore,
    /// Divide by the sample standard deviation only, keeping the mean offset.
    ScaleOnly,
}

/// Per-column parameters, so the same transform can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Standardization<T> {
    pub scaling: Scaling,
    pub means: Vec<T>,
    pub std_devs: Vec<T>,
}

impl<T: Real> Standardization<T> {
    pub fn apply(&self, table: &Matrix<T>) -> Result<Matrix<T>, StatsError> {
        if table.cols() != self.means.len() {
            return Err(StatsError::Shape(format!(
                "{} columns, fitted on {}",
                table.cols(),
                self.means.len()
            )));
        }
        let mut out = table.clone();
        for i in 0..table.rows() {
            for j in 0..table.cols() {
                let v = table[(i, j)];
                out[(i, j)] = match self.scaling {
                    Scaling::ZScore => (v - self.means[j]) / self.std_devs[j],
                    Scaling::ScaleOnly => v / self.std_devs[j],
                };
            }
        }
        Ok(out)
    }
}

/// Standardizes every column using the sample (n−1) standard deviation.
pub fn standardize<T: Real>(
    table: &Matrix<T>,
    scaling: Scaling,
) -> Result<(Matrix<T>, Standardization<T>), StatsError> {
    if table.rows() < 2 {
        return Err(StatsError::TooFewRows {
            needed: 2,
            got: table.rows(),
        });
    }
    if let Some(name) = table.first_non_finite() {
        return Err(StatsError::NonFinite(name.to_string()));
    }
    let mut means = Vec::with_capacity(table.cols());
    let mut std_devs = Vec::with_capacity(table.cols());
    for j in 0..table.cols() {
        let col = table.column(j);
        let m = mean(&col).expect("nonempty");
        let sd = sample_variance(&col).expect("two rows").sqrt();
        // relative to the column's magnitude so a constant column with
        // rounding noise is still caught
        let scale = col.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        if !(sd > scale * T::epsilon() * T::lit(16.0)) {
            return Err(StatsError::ZeroVariance(table.names()[j].clone()));
        }
        means.push(m);
        std_devs.push(sd);
    }
    let params = Standardization {
        scaling,
        means,
        std_devs,
    };
    Ok((params.apply(table)?, params))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Matrix<f64> {
        Matrix::from_rows(&[
            vec![1.0, 10.0],
            vec![2.0, 30.0],
            vec![4.0, 20.0],
            vec![7.0, 60.0],
        ])
        .unwrap()
        .with_names(["a", "b"])
        .unwrap()
    }

    #[test]
    fn zscore_has_zero_mean_unit_sd() {
        let (z, _) = standardize(&table(), Scaling::ZScore).unwrap();
        for j in 0..2 {
            let c = z.column(j);
            assert!(mean(&c).unwrap().abs() < 1e-12);
            assert!((sample_variance(&c).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scale_only_keeps_offset() {
        let t = table();
        let (s, p) = standardize(&t, Scaling::ScaleOnly).unwrap();
        for j in 0..2 {
            let c = s.column(j);
            assert!((mean(&c).unwrap() - p.means[j] / p.std_devs[j]).abs() < 1e-12);
            assert!((sample_variance(&c).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_column_is_named() {
        let t = Matrix::from_rows(&[vec![1.0, 0.1], vec![2.0, 0.1], vec![3.0, 0.1]])
            .unwrap()
            .with_names(["ok", "flat"])
            .unwrap();
        assert_eq!(
            standardize(&t, Scaling::ZScore).unwrap_err(),
            StatsError::ZeroVariance("flat".into())
        );
        let one = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(matches!(
            standardize(&one, Scaling::ZScore),
            Err(StatsError::TooFewRows { .. })
        ));
    }
}
