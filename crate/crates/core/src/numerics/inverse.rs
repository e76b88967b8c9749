use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Default relative pivot threshold for [`invert_general`].
pub const DEFAULT_PIVOT_THRESHOLD: f64 = 1e-13;

/// Inverts a square matrix by Gauss-Jordan elimination with partial pivoting.
pub fn invert_general(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    invert_with_threshold(a, DEFAULT_PIVOT_THRESHOLD)
}

/// As [`invert_general`], rejecting any pivot smaller than
/// `rel_threshold · max|A_ij|`.
pub fn invert_with_threshold(a: &ComplexMatrix, rel_threshold: f64) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "cannot invert a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    let n = a.rows();
    let threshold = rel_threshold * a.max_abs();
    let mut work = a.clone();
    let mut inv = ComplexMatrix::identity(n);

    for col in 0..n {
        let (pivot_row, pivot_mag) = (col..n)
            .map(|r| (r, work[(r, col)].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pivot_mag > threshold) {
            return Err(Error::Singular {
                pivot: pivot_mag,
                threshold,
            });
        }
        if pivot_row != col {
            swap_rows(&mut work, col, pivot_row);
            swap_rows(&mut inv, col, pivot_row);
        }

        let scale = Complex64::new(1.0, 0.0) / work[(col, col)];
        for z in work.row_mut(col) {
            *z *= scale;
        }
        for z in inv.row_mut(col) {
            *z *= scale;
        }

        let pivot_work = work.row(col).to_vec();
        let pivot_inv = inv.row(col).to_vec();
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = work[(r, col)];
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (z, p) in work.row_mut(r).iter_mut().zip(&pivot_work) {
                *z -= factor * p;
            }
            for (z, p) in inv.row_mut(r).iter_mut().zip(&pivot_inv) {
                *z -= factor * p;
            }
        }
    }
    Ok(inv)
}

fn swap_rows(m: &mut ComplexMatrix, a: usize, b: usize) {
    let cols = m.cols();
    for j in 0..cols {
        let tmp = m[(a, j)];
        m[(a, j)] = m[(b, j)];
        m[(b, j)] = tmp;
    }
}

/// Singular values in non-increasing order.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let svd = a.to_nalgebra().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// 2-norm condition number σ_max / σ_min; `f64::INFINITY` when σ_min underflows.
pub fn condition_number(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dimension("condition number needs a square matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    let s = singular_values(a);
    Ok(ratio_or_inf(s[0], s[s.len() - 1]))
}

pub(crate) fn ratio_or_inf(max: f64, min: f64) -> f64 {
    if min <= f64::MIN_POSITIVE || min <= max * f64::EPSILON * 1e-3 {
        f64::INFINITY
    } else {
        max / min
    }
}
