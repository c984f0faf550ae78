//! Linear least squares on column-scaled design matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LstsqFit {
    pub coeffs: Vec<f64>,
    /// Root-mean-square residual.
    pub residual: f64,
    /// Largest residual magnitude.
    pub max_residual: f64,
    /// Condition number of the column-scaled design matrix.
    pub condition: f64,
}

/// Solve `min ‖A c - y‖` for `A` given by columns. Columns are scaled to
/// unit norm first; a condition number above `max_condition` is an error.
pub fn lstsq(columns: &[Vec<f64>], y: &[f64], max_condition: f64) -> Result<LstsqFit> {
    let rows = y.len();
    let cols = columns.len();
    if cols == 0 || rows < cols {
        return Err(Error::FitQuality(format!("{rows} samples cannot determine {cols} coefficients")));
    }
    let mut scales = Vec::with_capacity(cols);
    let mut a = DMatrix::zeros(rows, cols);
    for (j, col) in columns.iter().enumerate() {
        assert_eq!(col.len(), rows, "column {j} has the wrong length");
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::FitQuality(format!("column {j} is zero or nonfinite")));
        }
        scales.push(norm);
        for i in 0..rows {
            a[(i, j)] = col[i] / norm;
        }
    }
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > max_condition {
        return Err(Error::FitQuality(format!(
            "condition number {condition:.3e} exceeds {max_condition:.1e} ({cols} columns, {rows} samples)"
        )));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::FitQuality(format!("least-squares solve failed: {e}")))?;
    let r = &a * &x - &b;
    let residual = (r.norm_squared() / rows as f64).sqrt();
    let max_residual = r.amax();
    let coeffs = x.iter().zip(&scales).map(|(c, s)| c / s).collect();
    Ok(LstsqFit { coeffs, residual, max_residual, condition })
}

/// `count` points spaced evenly in `log x` over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_polynomial() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 / 10.0).collect();
        let y: Vec<f64> = xs.iter().map(|x| 1.0 - 2.0 * x + 0.5 * x * x).collect();
        let cols: Vec<Vec<f64>> = (0..3).map(|k| xs.iter().map(|x| x.powi(k)).collect()).collect();
        let fit = lstsq(&cols, &y, 1e12).unwrap();
        for (c, e) in fit.coeffs.iter().zip([1.0, -2.0, 0.5]) {
            assert!((c - e).abs() < 1e-12);
        }
        assert!(fit.residual < 1e-13);
    }

    #[test]
    fn rejects_degenerate_designs() {
        let col = vec![1.0, 2.0, 3.0];
        assert!(matches!(lstsq(&[col.clone(), col.clone()], &[1.0, 2.0, 3.0], 1e12), Err(Error::FitQuality(_))));
        assert!(lstsq(&[col.clone(), col.clone(), col.clone(), col], &[1.0, 2.0, 3.0], 1e12).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(1e-3, 1e-1, 5);
        assert!((g[0] - 1e-3).abs() < 1e-18 && (g[4] - 0.1).abs() < 1e-15);
        assert!((g[2] - 1e-2).abs() < 1e-15);
    }
}
