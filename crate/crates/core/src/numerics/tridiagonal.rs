//! Closed-form inverse of a tridiagonal matrix through the forward and
//! backward minor recursions.
//!
//! With diagonal `d_i`, super-diagonal `u_i = H[i][i+1]` and sub-diagonal
//! `l_i = H[i+1][i]` (1-based), the leading minors `alpha` and trailing
//! minors `beta` satisfy
//!
//! ```text
//! alpha_0 = 1, alpha_1 = d_1,  alpha_i = d_i alpha_{i-1} - l_{i-1} u_{i-1} alpha_{i-2}
//! beta_{K+1} = 1, beta_K = d_K, beta_i = d_i beta_{i+1} - l_i u_i beta_{i+2}
//! ```
//!
//! For the Wyner channel `l_{i-1} u_{i-1} = mu^2 b_i a_{i-1}`. The diagonal of
//! the inverse is
//! `(d_i - l_i u_i beta_{i+2}/beta_{i+1} - l_{i-1} u_{i-1} alpha_{i-2}/alpha_{i-1})^-1`
//! and the off-diagonal entries follow from the diagonal one in their column:
//!
//! ```text
//! i < j:  (-1)^{j-i} u_i..u_{j-1} alpha_{i-1}/alpha_{j-1} [H^-1]_jj
//! i > j:  (-1)^{i-j} l_j..l_{i-1} beta_{i+1}/beta_{j+1}   [H^-1]_jj
//! ```

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Relative magnitude below which a minor is treated as a breakdown.
pub const BREAKDOWN_THRESHOLD: f64 = 1e-13;

/// Auxiliary minor vectors of a tridiagonal matrix.
///
/// `alpha[i]` holds `alpha_i` for `i = 0..=K`; `beta[i]` holds `beta_{i+1}`
/// for `i = 0..=K`, so `beta[K]` is the boundary value `beta_{K+1} = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalAux {
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
}

impl TridiagonalAux {
    /// `alpha_i` for `i ∈ 0..=K`.
    pub fn alpha(&self, i: usize) -> Complex64 {
        self.alpha[i]
    }

    /// `beta_i` with index `i ∈ 1..=K+1`.
    pub fn beta(&self, i: usize) -> Complex64 {
        self.beta[i - 1]
    }
}

struct Bands {
    diag: Vec<Complex64>,
    upper: Vec<Complex64>,
    lower: Vec<Complex64>,
}

fn bands(h: &ComplexMatrix) -> Bands {
    let k = h.rows();
    Bands {
        diag: (0..k).map(|i| h[(i, i)]).collect(),
        upper: (0..k.saturating_sub(1)).map(|i| h[(i, i + 1)]).collect(),
        lower: (0..k.saturating_sub(1)).map(|i| h[(i + 1, i)]).collect(),
    }
}

/// Computes the `alpha`/`beta` minors, failing on a breakdown.
pub fn tridiagonal_aux(h: &ComplexMatrix) -> Result<TridiagonalAux> {
    check_shape(h)?;
    aux_from_bands(&bands(h))
}

fn check_shape(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::Dimension("tridiagonal inverse needs a square matrix".into()));
    }
    if !h.is_tridiagonal() {
        return Err(Error::InvalidParameter("matrix is not tridiagonal".into()));
    }
    if !h.is_finite() {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    Ok(())
}

fn aux_from_bands(b: &Bands) -> Result<TridiagonalAux> {
    let k = b.diag.len();
    let one = Complex64::new(1.0, 0.0);
    // coupling[i] = l_i u_i, the product of the two off-diagonals between rows i and i+1 (0-based)
    let coupling: Vec<Complex64> = b.lower.iter().zip(&b.upper).map(|(l, u)| l * u).collect();

    let mut alpha = Vec::with_capacity(k + 1);
    alpha.push(one);
    alpha.push(b.diag[0]);
    for i in 2..=k {
        let next = b.diag[i - 1] * alpha[i - 1] - coupling[i - 2] * alpha[i - 2];
        alpha.push(next);
    }
    check_breakdown(&alpha, 0)?;

    let mut beta = vec![one; k + 1];
    beta[k - 1] = b.diag[k - 1];
    for i in (0..k.saturating_sub(1)).rev() {
        beta[i] = b.diag[i] * beta[i + 1] - coupling[i] * beta[i + 2];
    }
    // Walk beta from the boundary inward so the running maximum follows the recursion.
    let reversed: Vec<Complex64> = beta.iter().rev().copied().collect();
    check_breakdown(&reversed, 0).map_err(|e| match e {
        Error::RecursionBreakdown { index } => Error::RecursionBreakdown { index: k + 1 - index },
        other => other,
    })?;
    Ok(TridiagonalAux { alpha, beta })
}

fn check_breakdown(values: &[Complex64], offset: usize) -> Result<()> {
    let mut running_max = 0.0_f64;
    for (i, v) in values.iter().enumerate() {
        let mag = v.norm();
        running_max = running_max.max(mag);
        if !mag.is_finite() || mag <= BREAKDOWN_THRESHOLD * running_max {
            return Err(Error::RecursionBreakdown { index: i + offset });
        }
    }
    Ok(())
}

/// Inverts a tridiagonal matrix with the closed-form minor recursions.
///
/// Any inter-cell attenuation lives in the off-diagonal entries of `h`
/// itself. Returns [`Error::RecursionBreakdown`] when a minor collapses
/// relative to the running maximum; callers fall back to
/// [`super::invert_general`] in that case.
pub fn tridiagonal_inverse(h: &ComplexMatrix) -> Result<(ComplexMatrix, TridiagonalAux)> {
    check_shape(h)?;
    let b = bands(h);
    let aux = aux_from_bands(&b)?;
    let k = b.diag.len();
    let one = Complex64::new(1.0, 0.0);

    // 1-based accessors keep the formulas readable.
    let d = |i: usize| b.diag[i - 1];
    let coupling = |i: usize| b.lower[i - 1] * b.upper[i - 1]; // between rows i and i+1
    let alpha = |i: usize| aux.alpha[i];
    let beta = |i: usize| aux.beta[i - 1];

    let mut diag_inv = Vec::with_capacity(k);
    for i in 1..=k {
        let mut denom = d(i);
        if i < k {
            denom -= coupling(i) * beta(i + 2) / beta(i + 1);
        }
        if i > 1 {
            denom -= coupling(i - 1) * alpha(i - 2) / alpha(i - 1);
        }
        if !(denom.norm() > 0.0) {
            return Err(Error::RecursionBreakdown { index: i });
        }
        diag_inv.push(one / denom);
    }

    let mut inv = ComplexMatrix::zeros(k, k);
    for j in 1..=k {
        let djj = diag_inv[j - 1];
        inv[(j - 1, j - 1)] = djj;

        // rows above the diagonal: i = j-1 down to 1
        let mut prod = one;
        for i in (1..j).rev() {
            prod *= -b.upper[i - 1];
            inv[(i - 1, j - 1)] = prod * alpha(i - 1) / alpha(j - 1) * djj;
        }
        // rows below the diagonal: i = j+1 up to K
        let mut prod = one;
        for i in j + 1..=k {
            prod *= -b.lower[i - 2];
            inv[(i - 1, j - 1)] = prod * beta(i + 1) / beta(j + 1) * djj;
        }
    }
    if !inv.is_finite() {
        return Err(Error::RecursionBreakdown { index: 0 });
    }
    Ok((inv, aux))
}

/// Closed-form inverse with a general-inverse fallback on breakdown.
/// The flag reports whether the fallback was taken.
pub fn tridiagonal_inverse_or_general(h: &ComplexMatrix) -> Result<(ComplexMatrix, bool)> {
    match tridiagonal_inverse(h) {
        Ok((inv, _)) => Ok((inv, false)),
        Err(Error::RecursionBreakdown { .. }) => super::invert_general(h).map(|inv| (inv, true)),
        Err(e) => Err(e),
    }
}
