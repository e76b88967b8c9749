//! Random channel generation for the Wyner and exponentially decaying models.
//!
//! Every draw goes through an explicit [`RandomStream`]. Streams are split
//! by hashing a tuple of labels into a ChaCha stream id, so trials and
//! transmitters can be generated in any order with identical results.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

/// Identifies one reproducible random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

/// Stream labels used by the evaluator.
pub mod purpose {
    pub const CHANNEL: u64 = 1;
    pub const QUANTIZER: u64 = 2;
    pub const ORACLE: u64 = 3;
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Stream for a tuple of labels, e.g. `(purpose, trial, tx)`.
    pub fn derive(seed: u64, labels: &[u64]) -> Self {
        let mut h = 0x243f_6a88_85a3_08d3_u64;
        for &l in labels {
            h = splitmix64(h ^ splitmix64(l));
        }
        Self { seed, stream_id: h }
    }

    /// A child stream with one more label.
    pub fn child(&self, label: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(label.wrapping_add(0x9e37))),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One CN(0, 1) sample: independent real and imaginary parts of variance 1/2.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelModel {
    Wyner,
    ExpDecay,
}

impl ChannelModel {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelModel::Wyner => "wyner",
            ChannelModel::ExpDecay => "expdecay",
        }
    }

    /// Column indices that can be nonzero in row `i`.
    pub fn row_support(&self, k: usize, i: usize) -> Vec<usize> {
        match self {
            ChannelModel::Wyner => (i.saturating_sub(1)..=(i + 1).min(k - 1)).collect(),
            ChannelModel::ExpDecay => (0..k).collect(),
        }
    }

    /// Standard deviation of `H_ik` given the attenuation.
    pub fn coefficient_std(&self, mu: f64, i: usize, k: usize) -> f64 {
        let d = i.abs_diff(k);
        match self {
            ChannelModel::Wyner => match d {
                0 => 1.0,
                1 => mu,
                _ => 0.0,
            },
            ChannelModel::ExpDecay => mu.powi(d as i32),
        }
    }

    pub fn generate(&self, k: usize, mu: f64, stream: RandomStream) -> Result<ComplexMatrix> {
        match self {
            ChannelModel::Wyner => gen_wyner(&WynerParams::new(k, mu)?, stream),
            ChannelModel::ExpDecay => gen_expdecay(&ExpDecayParams::new(k, mu)?, stream),
        }
    }
}

impl std::str::FromStr for ChannelModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "wyner" => Ok(ChannelModel::Wyner),
            "expdecay" | "exp" | "exponential" => Ok(ChannelModel::ExpDecay),
            other => Err(Error::InvalidParameter(format!("unknown channel model '{other}'"))),
        }
    }
}

fn check_params(k: usize, mu: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidParameter("mu must lie in (0,1]".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WynerParams {
    pub k: usize,
    pub mu: f64,
}

impl WynerParams {
    pub fn new(k: usize, mu: f64) -> Result<Self> {
        check_params(k, mu)?;
        Ok(Self { k, mu })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpDecayParams {
    pub k: usize,
    pub mu: f64,
}

impl ExpDecayParams {
    pub fn new(k: usize, mu: f64) -> Result<Self> {
        check_params(k, mu)?;
        Ok(Self { k, mu })
    }
}

/// Tridiagonal Wyner channel: `d_i` on the diagonal, `mu a_i` above and
/// `mu b_i` below, all fading scalars CN(0, 1).
pub fn gen_wyner(p: &WynerParams, stream: RandomStream) -> Result<ComplexMatrix> {
    check_params(p.k, p.mu)?;
    let mut rng = stream.rng();
    let mut h = ComplexMatrix::zeros(p.k, p.k);
    for i in 0..p.k {
        h[(i, i)] = complex_gaussian(&mut rng);
        if i + 1 < p.k {
            h[(i, i + 1)] = complex_gaussian(&mut rng) * p.mu;
        }
        if i > 0 {
            h[(i, i - 1)] = complex_gaussian(&mut rng) * p.mu;
        }
    }
    Ok(h)
}

/// Rayleigh matrix shaped by the Toeplitz profile `mu^|i-j|`.
pub fn gen_expdecay(p: &ExpDecayParams, stream: RandomStream) -> Result<ComplexMatrix> {
    check_params(p.k, p.mu)?;
    let mut rng = stream.rng();
    Ok(ComplexMatrix::from_fn(p.k, p.k, |i, j| {
        complex_gaussian(&mut rng) * p.mu.powi(i.abs_diff(j) as i32)
    }))
}
