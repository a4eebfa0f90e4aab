//! Dense row-major matrix with named columns.

use serde::Serialize;

use super::StatsError;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
    names: Vec<String>,
}

fn default_names(cols: usize) -> Vec<String> {
    (0..cols).map(|j| format!("c{j}")).collect()
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
            names: default_names(cols),
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, StatsError> {
        if data.len() != rows * cols {
            return Err(StatsError::Shape(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            data,
            names: default_names(cols),
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, StatsError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(StatsError::Shape(format!(
                "row {i} has {} values, expected {cols}",
                r.len()
            )));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self, StatsError> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if let Some((j, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != rows) {
            return Err(StatsError::Shape(format!(
                "column {j} has {} values, expected {rows}",
                c.len()
            )));
        }
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            for (i, &v) in c.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn with_names<S: Into<String>>(
        mut self,
        names: impl IntoIterator<Item = S>,
    ) -> Result<Self, StatsError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() != self.cols {
            return Err(StatsError::Shape(format!(
                "{} names for {} columns",
                names.len(),
                self.cols
            )));
        }
        self.names = names;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, StatsError> {
        if self.cols != other.rows {
            return Err(StatsError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn column_means(&self) -> Vec<T> {
        let n = T::from_usize(self.rows).unwrap_or_else(T::one);
        (0..self.cols)
            .map(|j| self.column(j).into_iter().sum::<T>() / n)
            .collect()
    }

    /// Name of the first column holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<&str> {
        (0..self.cols)
            .find(|&j| (0..self.rows).any(|i| !self[(i, j)].is_finite()))
            .map(|j| self.names[j].as_str())
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}
