//! Descriptive statistics shared by detection and analysis.

use crate::scalar::Real;

/// Quantile of ascending-sorted data by linear interpolation between order
/// statistics (`h = (n-1) q`, R's type 7). `None` for empty input.
pub fn quantile_sorted<T: Real>(sorted: &[T], q: T) -> Option<T> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let h = T::from_usize(n - 1)? * q.max(T::zero()).min(T::one());
    let lo = h.floor();
    let i = lo.to_usize()?;
    if i + 1 >= n {
        return Some(sorted[n - 1]);
    }
    Some(sorted[i] + (h - lo) * (sorted[i + 1] - sorted[i]))
}

/// Type-7 quantile of unsorted data. NaNs sort last.
pub fn quantile<T: Real>(values: &[T], q: T) -> Option<T> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Greater));
    quantile_sorted(&v, q)
}

pub fn mean<T: Real>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    Some(values.iter().copied().sum::<T>() / T::from_usize(values.len())?)
}

/// Unbiased sample variance; `None` for fewer than two values.
pub fn sample_variance<T: Real>(values: &[T]) -> Option<T> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let ss: T = values.iter().map(|&v| (v - m) * (v - m)).sum();
    Some(ss / T::from_usize(values.len() - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quartiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 100.0];
        assert_eq!(quantile(&v, 0.25), Some(2.0));
        assert_eq!(quantile(&v, 0.75), Some(4.0));
        assert_eq!(quantile(&[4.0, 1.0, 3.0, 2.0], 0.25), Some(1.75));
        assert_eq!(quantile(&[5.0], 0.9), Some(5.0));
        assert_eq!(quantile::<f64>(&[], 0.5), None);
        assert_eq!(quantile(&[1.0, 2.0], 1.0), Some(2.0));
    }

    #[test]
    fn moments() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), Some(2.0));
        assert_eq!(sample_variance(&[1.0, 2.0, 3.0, 4.0]), Some(5.0 / 3.0));
        assert_eq!(sample_variance(&[1.0f32]), None);
    }
}
