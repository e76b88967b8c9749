//! Local channel estimates under a feedback-bit budget.
//!
//! Vector quantizers act on the channel direction only: the returned vector
//! carries the true norm of the quantized support. For `B >= 1` the selected
//! direction is phase-aligned with the true vector, so two transmitters that
//! receive accurate feedback agree on the phase reference. `B = 0` carries no
//! information at all and yields an independent isotropic direction.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use statrs::function::gamma::gamma;

use crate::allocation::{BitAllocation, Granularity};
use crate::channel::{complex_gaussian, ChannelModel, RandomStream};
use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

/// Hard limit on literal RVQ codebook sizes.
pub const RVQ_BITS_LIMIT: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantizerKind {
    Rvq,
    ErrorModel,
    Scalar,
}

impl QuantizerKind {
    pub fn name(&self) -> &'static str {
        match self {
            QuantizerKind::Rvq => "rvq",
            QuantizerKind::ErrorModel => "error_model",
            QuantizerKind::Scalar => "scalar",
        }
    }
}

impl std::str::FromStr for QuantizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rvq" => Ok(QuantizerKind::Rvq),
            "error_model" => Ok(QuantizerKind::ErrorModel),
            "scalar" => Ok(QuantizerKind::Scalar),
            other => Err(Error::InvalidParameter(format!("unknown quantizer '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerSpec {
    pub kind: QuantizerKind,
    /// Largest budget quantized with a literal codebook; above it the
    /// error model stands in.
    pub rvq_max_bits: u32,
    pub scalar_clip_sigmas: f64,
}

impl Default for QuantizerSpec {
    fn default() -> Self {
        Self {
            kind: QuantizerKind::ErrorModel,
            rvq_max_bits: 16,
            scalar_clip_sigmas: 4.0,
        }
    }
}

impl QuantizerSpec {
    pub fn new(kind: QuantizerKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rvq_max_bits > RVQ_BITS_LIMIT {
            return Err(Error::InvalidParameter(format!(
                "rvq_max_bits must lie in [0,{RVQ_BITS_LIMIT}]"
            )));
        }
        if !(self.scalar_clip_sigmas > 0.0 && self.scalar_clip_sigmas.is_finite()) {
            return Err(Error::InvalidParameter("scalar_clip_sigmas must be positive".into()));
        }
        Ok(())
    }
}

/// One transmitter's view of the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalEstimate {
    pub tx_index: usize,
    pub matrix: ComplexMatrix,
    /// Bits spent on each row `i` (summed over coefficients in scalar mode).
    pub row_bits: Vec<u32>,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn isotropic_unit<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let g: Vec<Complex64> = (0..m).map(|_| complex_gaussian(rng)).collect();
        let n = norm(&g);
        if n > 0.0 {
            return g.into_iter().map(|z| z / n).collect();
        }
    }
}

/// `sin^2` of the angle between two complex directions.
pub fn chordal_sin2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    let c = inner(a, b).norm() / (na * nb);
    (1.0 - c * c).max(0.0)
}

fn check_support(len: usize, support: &[usize]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::Dimension("quantization support is empty".into()));
    }
    if support.len() > len || support.iter().any(|&s| s >= len) {
        return Err(Error::Dimension(format!(
            "support {support:?} does not fit a vector of length {len}"
        )));
    }
    Ok(())
}

fn gather(h: &[Complex64], support: &[usize]) -> Vec<Complex64> {
    support.iter().map(|&s| h[s]).collect()
}

fn scatter(len: usize, support: &[usize], values: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (&s, v) in support.iter().zip(values) {
        out[s] = *v;
    }
    out
}

/// Independent direction scaled to `‖h_support‖`.
fn zero_information(h: &[Complex64], support: &[usize], rng: &mut impl Rng) -> Vec<Complex64> {
    let hs = gather(h, support);
    let scale = norm(&hs);
    let dir = isotropic_unit(support.len(), rng);
    scatter(h.len(), support, &dir.iter().map(|z| z * scale).collect::<Vec<_>>())
}

/// Random vector quantization of `h` restricted to `support` with a fresh
/// codebook of `2^bits` isotropic unit codewords.
pub fn rvq_quantize(
    h: &[Complex64],
    support: &[usize],
    bits: u32,
    stream: RandomStream,
) -> Result<Vec<Complex64>> {
    check_support(h.len(), support)?;
    if bits > RVQ_BITS_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "{bits} bits exceeds the literal codebook limit of {RVQ_BITS_LIMIT}"
        )));
    }
    let mut rng = stream.rng();
    if bits == 0 {
        return Ok(zero_information(h, support, &mut rng));
    }
    let hs = gather(h, support);
    let scale = norm(&hs);
    let m = support.len();
    let mut best = isotropic_unit(m, &mut rng);
    let mut best_corr = inner(&best, &hs).norm();
    let mut candidate = vec![Complex64::new(0.0, 0.0); m];
    for _ in 1..(1u64 << bits) {
        let mut sq = 0.0;
        for c in candidate.iter_mut() {
            *c = complex_gaussian(&mut rng);
            sq += c.norm_sqr();
        }
        // |<c, h>| / ‖c‖ ranks codewords without normalizing each one
        let corr = inner(&candidate, &hs).norm() / sq.sqrt();
        if corr > best_corr {
            best_corr = corr;
            let n = sq.sqrt();
            best = candidate.iter().map(|z| z / n).collect();
        }
    }
    Ok(scatter(h.len(), support, &aligned(&best, &hs, scale)))
}

/// Rotates unit `dir` so that `<dir, target>` is real and positive, then scales.
fn aligned(dir: &[Complex64], target: &[Complex64], scale: f64) -> Vec<Complex64> {
    let ip = inner(dir, target);
    let phase = if ip.norm() > 0.0 {
        ip / ip.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    dir.iter().map(|z| z * phase * scale).collect()
}

/// Mean `sin^2` targeted by the error model.
pub fn error_model_mean_sin2(bits: u32, dim: usize) -> f64 {
    if dim <= 1 {
        return if bits == 0 { 1.0 } else { 0.0 };
    }
    (-(bits as f64) / (dim - 1) as f64).exp2().min(1.0)
}

/// Statistical stand-in for RVQ at budgets where `2^B` codewords is
/// infeasible. The chordal error `Z = sin^2` follows the large-codebook RVQ
/// law `P(Z > z) ≈ exp(-N z^(M-1))`, rescaled so that `E[Z] = 2^(-B/(M-1))`.
pub fn error_model_quantize(
    h: &[Complex64],
    support: &[usize],
    bits: u32,
    stream: RandomStream,
) -> Result<Vec<Complex64>> {
    check_support(h.len(), support)?;
    let mut rng = stream.rng();
    if bits == 0 {
        return Ok(zero_information(h, support, &mut rng));
    }
    let hs = gather(h, support);
    let scale = norm(&hs);
    let m = support.len();
    if scale == 0.0 || m == 1 {
        return Ok(scatter(h.len(), support, &hs));
    }
    let u: Vec<Complex64> = hs.iter().map(|z| z / scale).collect();
    let shape = 1.0 / (m - 1) as f64;
    let e: f64 = Exp1.sample(&mut rng);
    let z = (error_model_mean_sin2(bits, m) * e.powf(shape) / gamma(1.0 + shape)).min(1.0);

    // unit direction orthogonal to u
    let v = loop {
        let g: Vec<Complex64> = (0..m).map(|_| complex_gaussian(&mut rng)).collect();
        let proj = inner(&u, &g);
        let w: Vec<Complex64> = g.iter().zip(&u).map(|(gi, ui)| gi - ui * proj).collect();
        let n = norm(&w);
        if n > 1e-12 {
            break w.into_iter().map(|x| x / n).collect::<Vec<_>>();
        }
    };
    let (a, b) = ((1.0 - z).sqrt(), z.sqrt());
    let est: Vec<Complex64> = u.iter().zip(&v).map(|(ui, vi)| (ui * a + vi * b) * scale).collect();
    Ok(scatter(h.len(), support, &est))
}

fn quantize_component(x: f64, sigma_component: f64, clip: f64, bits: u32) -> f64 {
    if bits == 0 {
        return 0.0;
    }
    let bits = bits.min(60);
    let range = clip * sigma_component;
    let levels = (bits as f64).exp2();
    let step = 2.0 * range / levels;
    let idx = ((x + range) / step).floor().clamp(0.0, levels - 1.0);
    -range + (idx + 0.5) * step
}

/// Uniform mid-rise scalar quantization of one coefficient with known
/// standard deviation `sigma`. The real part gets `ceil(B/2)` bits, the
/// imaginary part `floor(B/2)`; each component is clipped at
/// `±clip_sigmas · sigma / √2`.
pub fn scalar_quantize(x: Complex64, sigma: f64, bits: u32, clip_sigmas: f64) -> Complex64 {
    if bits == 0 || sigma <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let component = sigma * std::f64::consts::FRAC_1_SQRT_2;
    let re_bits = bits.div_ceil(2);
    let im_bits = bits / 2;
    Complex64::new(
        quantize_component(x.re, component, clip_sigmas, re_bits),
        quantize_component(x.im, component, clip_sigmas, im_bits),
    )
}

/// Builds transmitter `tx`'s estimate of `h` under its slice of `alloc`.
///
/// Per-vector allocations quantize each row on its model support (three
/// taps inside a Wyner line, all `K` taps otherwise) with RVQ up to
/// `rvq_max_bits` and the error model above it, or with the error model
/// throughout when that is the configured kind. Per-coefficient allocations,
/// and the scalar kind, quantize each coefficient with its own bits and known
/// standard deviation. A coefficient without bits is replaced by an
/// independent draw from its prior so the estimate stays invertible.
pub fn build_local_estimate(
    h: &ComplexMatrix,
    model: ChannelModel,
    mu: f64,
    tx: usize,
    alloc: &BitAllocation,
    spec: &QuantizerSpec,
    stream: RandomStream,
) -> Result<LocalEstimate> {
    spec.validate()?;
    let k = h.rows();
    if !h.is_square() || alloc.k() != k {
        return Err(Error::Dimension(format!(
            "allocation for K = {} does not match a {}x{} channel",
            alloc.k(),
            h.rows(),
            h.cols()
        )));
    }
    if tx >= k {
        return Err(Error::Dimension(format!("TX index {tx} out of range for K = {k}")));
    }
    let scalar = alloc.granularity() == Granularity::PerCoefficient || spec.kind == QuantizerKind::Scalar;
    let mut matrix = ComplexMatrix::zeros(k, k);
    let mut row_bits = Vec::with_capacity(k);
    for i in 0..k {
        let support = model.row_support(k, i);
        let row_stream = stream.child(i as u64);
        let row = h.row(i);
        let est = if scalar {
            let bits = coefficient_bits(alloc, tx, i, &support);
            row_bits.push(bits.iter().sum());
            let mut rng = row_stream.rng();
            let mut out = vec![Complex64::new(0.0, 0.0); k];
            for (&col, &b) in support.iter().zip(&bits) {
                let sigma = model.coefficient_std(mu, i, col);
                out[col] = if b == 0 {
                    complex_gaussian(&mut rng) * sigma
                } else {
                    scalar_quantize(row[col], sigma, b, spec.scalar_clip_sigmas)
                };
            }
            out
        } else {
            let bits = alloc.vector_bits(tx, i);
            row_bits.push(bits);
            match spec.kind {
                QuantizerKind::Rvq if bits <= spec.rvq_max_bits => {
                    rvq_quantize(row, &support, bits, row_stream)?
                }
                _ => error_model_quantize(row, &support, bits, row_stream)?,
            }
        };
        matrix.row_mut(i).copy_from_slice(&est);
    }
    Ok(LocalEstimate {
        tx_index: tx,
        matrix,
        row_bits,
    })
}

/// Per-coefficient bits of row `i` at `tx`. A per-vector budget is spread
/// evenly over the support, remainder to the lowest column indices.
fn coefficient_bits(alloc: &BitAllocation, tx: usize, i: usize, support: &[usize]) -> Vec<u32> {
    match alloc.granularity() {
        Granularity::PerCoefficient => support.iter().map(|&c| alloc.coefficient_bits(tx, i, c)).collect(),
        Granularity::PerVector => {
            let total = alloc.vector_bits(tx, i);
            let n = support.len() as u32;
            (0..n).map(|s| total / n + u32::from(s < total % n)).collect()
        }
    }
}

/// The unquantized estimate.
pub fn perfect_estimate(h: &ComplexMatrix, tx: usize) -> LocalEstimate {
    LocalEstimate {
        tx_index: tx,
        matrix: h.clone(),
        row_bits: vec![u32::MAX; h.rows()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scalar_zero_bits_is_prior_mean() {
        assert_eq!(scalar_quantize(c(1.3, -0.2), 1.0, 0, 4.0), c(0.0, 0.0));
    }

    #[test]
    fn scalar_step_arithmetic() {
        // component sigma 1, clip 4, 4 bits per component: step 0.5
        let q = scalar_quantize(c(0.3, 0.0), 2f64.sqrt(), 8, 4.0);
        assert!((q.re - 0.3).abs() <= 0.25 + 1e-15);
        assert!((q.re - 0.25).abs() < 1e-12);
        assert!((q.im - 0.25).abs() < 1e-12);
    }

    #[test]
    fn scalar_fine_resolution() {
        let sigma = 0.7;
        for &(re, im) in &[(0.1, -0.2), (-1.0, 0.5), (0.0, 0.0), (1.5, 1.5)] {
            let x = c(re, im) * sigma;
            let q = scalar_quantize(x, sigma, 20, 4.0);
            assert!((q - x).norm() <= 1e-2 * sigma);
        }
    }

    #[test]
    fn scalar_saturates() {
        let q = scalar_quantize(c(100.0, -100.0), 2f64.sqrt(), 2, 4.0);
        assert!((q - c(2.0, -2.0)).norm() < 1e-12);
    }

    #[test]
    fn scalar_odd_bits_favor_real_part() {
        // 3 bits: 2 for re (step 2), 1 for im (step 4)
        let q = scalar_quantize(c(0.3, 0.3), 2f64.sqrt(), 3, 4.0);
        assert!((q - c(1.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn support_checks() {
        let h = vec![c(1.0, 0.0); 3];
        let s = RandomStream::new(1, 1);
        assert!(rvq_quantize(&h, &[], 2, s).is_err());
        assert!(rvq_quantize(&h, &[0, 5], 2, s).is_err());
        assert!(error_model_quantize(&h, &[0, 1, 2, 3], 2, s).is_err());
    }

    #[test]
    fn vector_quantizers_preserve_norm_and_support() {
        let h = vec![c(0.3, 1.0), c(-0.5, 0.2), c(2.0, 0.0), c(0.1, 0.1)];
        let support = [1, 2];
        let target = (h[1].norm_sqr() + h[2].norm_sqr()).sqrt();
        for bits in [0, 1, 5, 10] {
            let s = RandomStream::new(9, bits as u64);
            for est in [
                rvq_quantize(&h, &support, bits, s).unwrap(),
                error_model_quantize(&h, &support, bits, s).unwrap(),
            ] {
                assert_eq!(est[0], c(0.0, 0.0));
                assert_eq!(est[3], c(0.0, 0.0));
                assert!((norm(&est) - target).abs() < 1e-12 * target);
            }
        }
    }

    #[test]
    fn error_model_vanishing_error() {
        let h = vec![c(0.3, 1.0), c(-0.5, 0.2)];
        let est = error_model_quantize(&h, &[0, 1], 200, RandomStream::new(3, 3)).unwrap();
        assert!(chordal_sin2(&est, &h) < 1e-12);
        for (a, b) in est.iter().zip(&h) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn rvq_phase_aligned() {
        let h = vec![c(0.3, 1.0), c(-0.5, 0.2), c(0.0, -1.0)];
        let est = rvq_quantize(&h, &[0, 1, 2], 8, RandomStream::new(5, 5)).unwrap();
        let ip = inner(&est, &h);
        assert!(ip.re > 0.0 && ip.im.abs() < 1e-12 * ip.re);
    }

    #[test]
    fn rvq_rejects_huge_codebooks() {
        let h = vec![c(1.0, 0.0), c(0.0, 1.0)];
        assert!(rvq_quantize(&h, &[0, 1], RVQ_BITS_LIMIT + 1, RandomStream::new(1, 1)).is_err());
    }

    #[test]
    fn single_tap_support() {
        let h = vec![c(0.6, -0.8)];
        let est = error_model_quantize(&h, &[0], 3, RandomStream::new(1, 2)).unwrap();
        assert_eq!(est, h);
        let est = rvq_quantize(&h, &[0], 3, RandomStream::new(1, 2)).unwrap();
        assert!((est[0] - h[0]).norm() < 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(QuantizerSpec::default().validate().is_ok());
        let mut s = QuantizerSpec::default();
        s.rvq_max_bits = 25;
        assert!(s.validate().is_err());
        s.rvq_max_bits = 16;
        s.scalar_clip_sigmas = 0.0;
        assert!(s.validate().is_err());
    }
}
