//! Local zero-forcing precoders and the effective distributed precoder.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{invert_general, tridiagonal_inverse_or_general, ComplexMatrix};
use crate::quantizer::LocalEstimate;

/// The precoder applied over the air: row `j` comes from TX `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectivePrecoder {
    pub matrix: ComplexMatrix,
    pub power: f64,
}

/// Inverse of a channel estimate, through the closed form when it is
/// tridiagonal.
pub fn invert_channel(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    if h.is_tridiagonal() {
        tridiagonal_inverse_or_general(h).map(|(inv, _)| inv)
    } else {
        invert_general(h)
    }
}

/// Normalizes each column of `inv` to squared norm `power`, zeroing the
/// columns whose flag is false.
fn normalized_columns(inv: &ComplexMatrix, power: f64, participation: &[bool]) -> Result<ComplexMatrix> {
    let k = inv.cols();
    let amp = power.sqrt();
    let mut t = ComplexMatrix::zeros(inv.rows(), k);
    for i in 0..k {
        if !participation[i] {
            continue;
        }
        let col = inv.column(i);
        let n = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Singular {
                pivot: n,
                threshold: 0.0,
            });
        }
        let scaled: Vec<Complex64> = col.iter().map(|z| z * (amp / n)).collect();
        t.set_column(i, &scaled);
    }
    Ok(t)
}

/// TX `j`'s local ZF precoder: column `i` is `√P (H^(j))^-1 e_i / ‖(H^(j))^-1 e_i‖`
/// when the TX participates in stream `i`, zero otherwise.
pub fn zf_local(est: &LocalEstimate, power: f64, participation: &[bool]) -> Result<ComplexMatrix> {
    let k = est.matrix.rows();
    if participation.len() != k {
        return Err(Error::Dimension(format!(
            "{} participation flags for K = {k}",
            participation.len()
        )));
    }
    let inv = invert_channel(&est.matrix)?;
    normalized_columns(&inv, power, participation)
}

/// Row `j` of the output is row `j` of `locals[j]`.
pub fn assemble_effective(locals: &[ComplexMatrix], power: f64) -> Result<EffectivePrecoder> {
    let k = locals.len();
    if k == 0 {
        return Err(Error::Dimension("no local precoders".into()));
    }
    let mut t = ComplexMatrix::zeros(k, k);
    for (j, local) in locals.iter().enumerate() {
        if local.rows() != k || local.cols() != k {
            return Err(Error::Dimension(format!(
                "local precoder {j} is {}x{}, expected {k}x{k}",
                local.rows(),
                local.cols()
            )));
        }
        t.row_mut(j).copy_from_slice(local.row(j));
    }
    Ok(EffectivePrecoder { matrix: t, power })
}

/// Centralized ZF with perfect CSI, each column of squared norm `P`.
pub fn zf_perfect(h: &ComplexMatrix, power: f64) -> Result<ComplexMatrix> {
    let inv = invert_channel(h)?;
    normalized_columns(&inv, power, &vec![true; h.cols()])
}

/// `sum_i ‖t_i - t_i^PCSI‖^2` for one realization.
pub fn precoder_distance(t: &EffectivePrecoder, t_pcsi: &ComplexMatrix) -> Result<f64> {
    if (t.matrix.rows(), t.matrix.cols()) != (t_pcsi.rows(), t_pcsi.cols()) {
        return Err(Error::Dimension("precoder shapes differ".into()));
    }
    Ok((&t.matrix - t_pcsi).frobenius_norm().powi(2))
}
