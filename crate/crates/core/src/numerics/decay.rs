use super::inverse::{ratio_or_inf, singular_values};
use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Exponential off-diagonal decay bound for the inverse of a banded matrix:
/// `|[A^-1]_ij| <= c * lambda^|i-j|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayBound {
    pub lambda: f64,
    pub c: f64,
    pub bandwidth_m: usize,
    pub cond: f64,
}

impl DecayBound {
    pub fn at_distance(&self, distance: usize) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        self.c * self.lambda.powi(distance as i32)
    }

    /// Number of entries of `inverse` exceeding the bound, with a relative slack
    /// for round-off.
    pub fn violations(&self, inverse: &ComplexMatrix, rel_slack: f64) -> usize {
        let n = inverse.rows();
        let mut count = 0;
        for i in 0..n {
            for j in 0..inverse.cols() {
                let d = i.abs_diff(j);
                if d == 0 && self.c == 0.0 {
                    continue;
                }
                if inverse[(i, j)].norm() > self.at_distance(d) * (1.0 + rel_slack) {
                    count += 1;
                }
            }
        }
        count
    }
}

/// Evaluates the Demko–Moss–Smith bound
///
/// ```text
/// lambda = ((cond - 1) / (cond + 1))^(1/m)
/// C      = (m + 1) lambda^-m ‖A^-1‖ cond max(1, ((1 + cond) / (√2 cond))^2)
/// ```
///
/// `m` counts the band width in the convention where `A_ij = 0` for
/// `|i - j| > m / 2`, so a tridiagonal matrix has `m = 2`.
///
/// When `cond == 1` the bound degenerates to `(0, 0)`: a perfectly
/// conditioned matrix of this family has no off-diagonal mass in its inverse,
/// and the diagonal is then excluded from certification.
pub fn demko_bound(a: &ComplexMatrix, m: usize) -> Result<DecayBound> {
    if m == 0 {
        return Err(Error::InvalidParameter("bandwidth m must be at least 1".into()));
    }
    if !a.is_square() {
        return Err(Error::Dimension("decay bound needs a square matrix".into()));
    }
    let s = singular_values(a);
    let (s_max, s_min) = (s[0], s[s.len() - 1]);
    let cond = ratio_or_inf(s_max, s_min);
    if !cond.is_finite() {
        return Err(Error::Singular {
            pivot: s_min,
            threshold: s_max * f64::EPSILON,
        });
    }
    Ok(demko_from_parts(cond, 1.0 / s_min, m))
}

/// The bound from a condition number and `‖A^-1‖₂`.
pub fn demko_from_parts(cond: f64, inverse_norm: f64, m: usize) -> DecayBound {
    // cond is 1 up to round-off for unitary-like inputs
    if cond <= 1.0 + 1e-12 {
        return DecayBound {
            lambda: 0.0,
            c: 0.0,
            bandwidth_m: m,
            cond,
        };
    }
    let mf = m as f64;
    let lambda = ((cond - 1.0) / (cond + 1.0)).powf(1.0 / mf);
    let shape = ((1.0 + cond) / (std::f64::consts::SQRT_2 * cond)).powi(2);
    let c = (mf + 1.0) * lambda.powi(-(m as i32)) * inverse_norm * cond * shape.max(1.0);
    DecayBound {
        lambda,
        c,
        bandwidth_m: m,
        cond,
    }
}

/// Log-linear fit of a distance-averaged magnitude profile.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Negated slope of `ln(mean magnitude)` against distance, clamped at 0.
    /// `None` when fewer than two distances carry usable magnitude.
    pub rate_gamma: Option<f64>,
    pub intercept_log_c: f64,
    pub num_points: usize,
}

impl DecayFit {
    /// Decay base `exp(-gamma)`.
    pub fn decay_base(&self) -> Option<f64> {
        self.rate_gamma.map(|g| (-g).exp())
    }
}

/// Mean magnitude of the entries at each distance `|i - j| = 0..n`.
pub fn distance_profile(a: &ComplexMatrix) -> Vec<f64> {
    let n = a.rows().max(a.cols());
    let mut sum = vec![0.0; n];
    let mut count = vec![0usize; n];
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let d = i.abs_diff(j);
            sum[d] += a[(i, j)].norm();
            count[d] += 1;
        }
    }
    sum.iter()
        .zip(&count)
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| s / c as f64)
        .collect()
}

/// Least-squares fit of `ln(profile[d])` against `d`, skipping magnitudes
/// at or below 1e-300.
pub fn fit_decay_profile(profile: &[f64]) -> DecayFit {
    let points: Vec<(f64, f64)> = profile
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 1e-300 && m.is_finite())
        .map(|(d, &m)| (d as f64, m.ln()))
        .collect();
    match linear_fit(&points) {
        Some((slope, intercept)) => DecayFit {
            rate_gamma: Some((-slope).max(0.0)),
            intercept_log_c: intercept,
            num_points: points.len(),
        },
        None => DecayFit {
            rate_gamma: None,
            intercept_log_c: points.first().map_or(0.0, |p| p.1),
            num_points: points.len(),
        },
    }
}

/// Fits the exponential decay rate of `|A_ij|` in `|i - j|`.
pub fn fit_decay_rate(a: &ComplexMatrix) -> DecayFit {
    fit_decay_profile(&distance_profile(a))
}

/// Ordinary least squares `y = slope * x + intercept`; `None` with fewer
/// than two distinct abscissae.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn demko_formula_by_hand() {
        // cond 3, m 1, ‖A^-1‖ = 2: lambda = 1/2, C = 2 * 2 * 2 * 3 * 1 = 24
        let b = demko_from_parts(3.0, 2.0, 1);
        assert!((b.lambda - 0.5).abs() < 1e-15);
        assert!((b.c - 24.0).abs() < 1e-12);
    }

    #[test]
    fn demko_lambda_invariant() {
        for &cond in &[1.5, 3.0, 10.0, 1e4] {
            for m in 1..4 {
                let b = demko_from_parts(cond, 1.0, m);
                let expected = ((cond - 1.0) / (cond + 1.0)).powf(1.0 / m as f64);
                assert!((b.lambda - expected).abs() < 1e-12);
                assert!(b.c >= 0.0 && b.lambda < 1.0);
            }
        }
    }

    #[test]
    fn demko_unitary_degenerate() {
        let u = ComplexMatrix::diagonal(&[
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::from_polar(1.0, 0.7),
        ]);
        let b = demko_bound(&u, 2).unwrap();
        assert_eq!((b.lambda, b.c), (0.0, 0.0));
        let inv = crate::numerics::invert_general(&u).unwrap();
        assert_eq!(b.violations(&inv, 0.0), 0);
    }

    #[test]
    fn demko_rejects_singular() {
        let s = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(demko_bound(&s, 2).is_err());
        assert!(demko_bound(&ComplexMatrix::identity(2), 0).is_err());
    }

    #[test]
    fn fit_exact_exponential() {
        let a = ComplexMatrix::from_fn(8, 8, |i, j| {
            Complex64::new(0.5f64.powi(i.abs_diff(j) as i32), 0.0)
        });
        let fit = fit_decay_rate(&a);
        assert!((fit.rate_gamma.unwrap() - 2f64.ln()).abs() < 1e-9);
        assert!((fit.decay_base().unwrap() - 0.5).abs() < 1e-9);
        assert!(fit.intercept_log_c.abs() < 1e-9);
        assert_eq!(fit.num_points, 8);
    }

    #[test]
    fn fit_identity_absent() {
        let fit = fit_decay_rate(&ComplexMatrix::identity(5));
        assert_eq!(fit.rate_gamma, None);
        assert_eq!(fit.num_points, 1);
    }

    #[test]
    fn linear_fit_degenerate() {
        assert!(linear_fit(&[(1.0, 2.0)]).is_none());
        assert!(linear_fit(&[(1.0, 2.0), (1.0, 3.0)]).is_none());
        let (s, c) = linear_fit(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert!((s - 2.0).abs() < 1e-15 && (c - 1.0).abs() < 1e-15);
    }
}
