//! Feedback-bit allocation policies.
//!
//! Real-valued bit formulas are rounded up before clamping at zero, so a
//! sufficient allocation is never weakened by rounding. Values within 1e-9 of
//! a positive integer snap to it, which keeps exact cases such as
//! `2 log2(100 * 0.4^2) = 8` from rounding up on floating-point noise.

use std::fmt::Write as _;

use crate::channel::ChannelModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    /// `bits[j][i]`: bits for channel vector `h_i` at TX `j`.
    PerVector,
    /// `bits[j][i][k]`: bits for coefficient `H_ik` at TX `j`.
    PerCoefficient,
}

/// A nonnegative integer feedback-bit table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitAllocation {
    granularity: Granularity,
    k: usize,
    bits: Vec<u32>,
}

impl BitAllocation {
    pub fn per_vector(k: usize, mut f: impl FnMut(usize, usize) -> u32) -> Self {
        let mut bits = Vec::with_capacity(k * k);
        for j in 0..k {
            for i in 0..k {
                bits.push(f(j, i));
            }
        }
        Self {
            granularity: Granularity::PerVector,
            k,
            bits,
        }
    }

    pub fn per_coefficient(k: usize, mut f: impl FnMut(usize, usize, usize) -> u32) -> Self {
        let mut bits = Vec::with_capacity(k * k * k);
        for j in 0..k {
            for i in 0..k {
                for c in 0..k {
                    bits.push(f(j, i, c));
                }
            }
        }
        Self {
            granularity: Granularity::PerCoefficient,
            k,
            bits,
        }
    }

    pub fn zeros(k: usize) -> Self {
        Self::per_vector(k, |_, _| 0)
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Bits spent on `h_i` at TX `j`, summed over coefficients for
    /// per-coefficient tables.
    pub fn vector_bits(&self, j: usize, i: usize) -> u32 {
        match self.granularity {
            Granularity::PerVector => self.bits[j * self.k + i],
            Granularity::PerCoefficient => {
                let start = (j * self.k + i) * self.k;
                self.bits[start..start + self.k].iter().sum()
            }
        }
    }

    /// Bits for `H_ik` at TX `j`. Only meaningful for per-coefficient tables;
    /// a per-vector table returns 0.
    pub fn coefficient_bits(&self, j: usize, i: usize, c: usize) -> u32 {
        match self.granularity {
            Granularity::PerVector => 0,
            Granularity::PerCoefficient => self.bits[(j * self.k + i) * self.k + c],
        }
    }

    pub fn total(&self) -> u64 {
        self.bits.iter().map(|&b| u64::from(b)).sum()
    }

    /// Bits held by TX `j`.
    pub fn tx_total(&self, j: usize) -> u64 {
        (0..self.k).map(|i| u64::from(self.vector_bits(j, i))).sum()
    }

    pub fn max_tx_total(&self) -> u64 {
        (0..self.k).map(|j| self.tx_total(j)).max().unwrap_or(0)
    }

    /// TXs with CSI on stream `i`, plus its serving TX.
    pub fn funded_set(&self, i: usize) -> Vec<usize> {
        (0..self.k)
            .filter(|&j| j == i || self.vector_bits(j, i) > 0)
            .collect()
    }

    /// CSV rows `policy,j,i,[k,]bits` with a header line.
    pub fn to_csv(&self, policy: &str) -> String {
        let mut out = String::new();
        match self.granularity {
            Granularity::PerVector => {
                out.push_str("policy,j,i,bits\n");
                for j in 0..self.k {
                    for i in 0..self.k {
                        let _ = writeln!(out, "{policy},{j},{i},{}", self.vector_bits(j, i));
                    }
                }
            }
            Granularity::PerCoefficient => {
                out.push_str("policy,j,i,k,bits\n");
                for j in 0..self.k {
                    for i in 0..self.k {
                        for c in 0..self.k {
                            let _ = writeln!(out, "{policy},{j},{i},{c},{}", self.coefficient_bits(j, i, c));
                        }
                    }
                }
            }
        }
        out
    }
}

/// `max(ceil(x), 0)` with snapping onto nearby positive integers.
pub fn bits_from(x: f64) -> u32 {
    if !(x > 0.0) {
        return 0;
    }
    let r = x.round();
    let b = if r >= 1.0 && (x - r).abs() < 1e-9 { r } else { x.ceil() };
    b.min(u32::MAX as f64) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantMode {
    Vector,
    Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Full,
    Uniform,
    DecayingWyner,
    DecayingExp,
    OverlappingCluster,
    Broadcast,
    /// The same number of bits on every (TX, vector) pair.
    Fixed(u32),
}

impl PolicyKind {
    pub fn name(&self) -> String {
        match self {
            PolicyKind::Full => "full".into(),
            PolicyKind::Uniform => "uniform".into(),
            PolicyKind::DecayingWyner => "decaying_wyner".into(),
            PolicyKind::DecayingExp => "decaying_exp".into(),
            PolicyKind::OverlappingCluster => "cluster".into(),
            PolicyKind::Broadcast => "broadcast".into(),
            PolicyKind::Fixed(b) => format!("fixed{b}"),
        }
    }

    /// Policies whose total is set by a budget rather than a formula.
    pub fn is_budgeted(&self) -> bool {
        matches!(self, PolicyKind::Uniform | PolicyKind::OverlappingCluster)
    }
}

/// Parameters shared by the formula-driven policies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub mode: QuantMode,
    /// Linear transmit power per stream.
    pub power: f64,
    pub mu: f64,
    pub mu_prime: f64,
    pub n_cluster: usize,
    pub broadcast_c: f64,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind, power: f64, mu: f64) -> Self {
        Self {
            kind,
            mode: QuantMode::Vector,
            power,
            mu,
            mu_prime: mu,
            n_cluster: 2,
            broadcast_c: 2.0,
        }
    }

    pub fn with_mode(mut self, mode: QuantMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_mu_prime(mut self, mu_prime: f64) -> Self {
        self.mu_prime = mu_prime;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::InvalidParameter("P must be positive".into()));
        }
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(Error::InvalidParameter("mu must lie in (0,1]".into()));
        }
        if !(self.mu_prime > 0.0) {
            return Err(Error::InvalidParameter("mu_prime must be positive".into()));
        }
        if self.mu_prime > self.mu {
            return Err(Error::InvalidParameter("mu_prime must not exceed mu".into()));
        }
        if !(self.broadcast_c >= 0.0 && self.broadcast_c.is_finite()) {
            return Err(Error::InvalidParameter("broadcast_c must be nonnegative".into()));
        }
        Ok(())
    }

    /// The table for this policy. `budget` is required by the uniform and
    /// cluster policies and ignored otherwise.
    pub fn allocate(&self, k: usize, model: ChannelModel, budget: Option<u64>) -> Result<BitAllocation> {
        self.validate()?;
        let need_budget = || {
            budget.ok_or_else(|| {
                Error::InvalidParameter(format!("policy {} needs a bit budget", self.kind.name()))
            })
        };
        match self.kind {
            PolicyKind::Full => Ok(alloc_full(k, self.power, model)),
            PolicyKind::Uniform => Ok(alloc_uniform_budget(k, need_budget()?)),
            PolicyKind::DecayingWyner => Ok(alloc_decaying_wyner(self, k)),
            PolicyKind::DecayingExp => alloc_decaying_exp(self, k),
            PolicyKind::OverlappingCluster => {
                Ok(alloc_overlapping_cluster(k, need_budget()?, self.n_cluster))
            }
            PolicyKind::Broadcast => Ok(alloc_broadcast(self, k)),
            PolicyKind::Fixed(b) => Ok(BitAllocation::per_vector(k, |_, _| b)),
        }
    }
}

/// Full-CSI scaling: `ceil(s log2 P)` bits on every pair, with `s = 2`
/// nonzero taps per Wyner row and `s = K - 1` for the exponential model.
/// Rounding after the product keeps the decaying policies at `mu = 1`
/// identical to this table.
pub fn alloc_full(k: usize, power: f64, model: ChannelModel) -> BitAllocation {
    let s = match model {
        ChannelModel::Wyner => 2.0,
        ChannelModel::ExpDecay => k.saturating_sub(1) as f64,
    };
    let bits = bits_from(s * power.log2());
    BitAllocation::per_vector(k, |_, _| bits)
}

/// `log2(P mu^(2d))` computed additively.
fn log2_attenuated(power: f64, mu: f64, d: usize) -> f64 {
    power.log2() + 2.0 * d as f64 * mu.log2()
}

/// Decaying Wyner allocation: `max(ceil(2 log2(P mu^(2|i-j|))), 0)` per
/// vector, or per coefficient on the tridiagonal support
/// `max(ceil(log2(P mu^(2|i-j|) mu^(2|k-j|))), 0)`.
pub fn alloc_decaying_wyner(spec: &PolicySpec, k: usize) -> BitAllocation {
    let (p, mu) = (spec.power, spec.mu);
    match spec.mode {
        QuantMode::Vector => {
            BitAllocation::per_vector(k, |j, i| bits_from(2.0 * log2_attenuated(p, mu, i.abs_diff(j))))
        }
        QuantMode::Scalar => BitAllocation::per_coefficient(k, |j, i, c| {
            if i.abs_diff(c) > 1 {
                return 0;
            }
            bits_from(log2_attenuated(p, mu, i.abs_diff(j)) + 2.0 * c.abs_diff(j) as f64 * mu.log2())
        }),
    }
}

/// `log2((P / mu'^2) (mu'/mu)^(2|i-j|))`.
fn exp_log_term(spec: &PolicySpec, d: usize) -> f64 {
    spec.power.log2() - 2.0 * spec.mu_prime.log2()
        + 2.0 * d as f64 * (spec.mu_prime.log2() - spec.mu.log2())
}

/// Decaying allocation for the exponential model. Vector mode spends
/// `max(ceil((K-1) log2((P/mu'^2)(mu'^(2d)/mu^(2d)))), 0)` bits on `h_i` at
/// TX `j`, `d = |i-j|`; scalar mode adds `2|k-j| log2(mu)` per coefficient
/// and drops the `K - 1` factor.
pub fn alloc_decaying_exp(spec: &PolicySpec, k: usize) -> Result<BitAllocation> {
    spec.validate()?;
    let m1 = k.saturating_sub(1) as f64;
    Ok(match spec.mode {
        QuantMode::Vector => {
            BitAllocation::per_vector(k, |j, i| bits_from(m1 * exp_log_term(spec, i.abs_diff(j))))
        }
        QuantMode::Scalar => BitAllocation::per_coefficient(k, |j, i, c| {
            bits_from(exp_log_term(spec, i.abs_diff(j)) + 2.0 * c.abs_diff(j) as f64 * spec.mu.log2())
        }),
    })
}

/// `floor(B / n)` on each of `n` funded pairs, the remainder one bit each in
/// row-major `(j, i)` order.
fn spread_budget(k: usize, budget: u64, funded: impl Fn(usize, usize) -> bool) -> BitAllocation {
    let n = (0..k)
        .flat_map(|j| (0..k).map(move |i| (j, i)))
        .filter(|&(j, i)| funded(j, i))
        .count() as u64;
    if n == 0 {
        return BitAllocation::zeros(k);
    }
    let base = budget / n;
    let mut remainder = budget % n;
    BitAllocation::per_vector(k, |j, i| {
        if !funded(j, i) {
            return 0;
        }
        let extra = u64::from(remainder > 0);
        remainder -= extra;
        (base + extra) as u32
    })
}

pub fn alloc_uniform_budget(k: usize, budget: u64) -> BitAllocation {
    spread_budget(k, budget, |_, _| true)
}

/// Uniform bits on the pairs `|i - j| <= n_cluster`, zero elsewhere.
pub fn alloc_overlapping_cluster(k: usize, budget: u64, n_cluster: usize) -> BitAllocation {
    spread_budget(k, budget, |j, i| i.abs_diff(j) <= n_cluster)
}

/// Bits deliverable over the RX `i` → TX `j` link at its gain:
/// `max(ceil(c log2(P mu^(2|i-j|))), 0)`.
pub fn alloc_broadcast(spec: &PolicySpec, k: usize) -> BitAllocation {
    BitAllocation::per_vector(k, |j, i| {
        bits_from(spec.broadcast_c * log2_attenuated(spec.power, spec.mu, i.abs_diff(j)))
    })
}

/// TXs that must receive symbol `s_i`: those with `2 log2(P mu^(2|i-j|)) > 0`,
/// and always TX `i` itself.
pub fn symbol_sharing_set(power: f64, mu: f64, k: usize, i: usize) -> Vec<usize> {
    (0..k)
        .filter(|&j| j == i || bits_from(2.0 * log2_attenuated(power, mu, i.abs_diff(j))) > 0)
        .collect()
}

/// Ratio of a policy's total to the full-CSI total.
pub fn coverage_fraction(alloc: &BitAllocation, full: &BitAllocation) -> f64 {
    let f = full.total();
    if f == 0 {
        return 0.0;
    }
    alloc.total() as f64 / f as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub k: usize,
    pub total: u64,
    pub max_tx: u64,
    /// Bits at the middle TX.
    pub interior_tx: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub policy: String,
    pub rows: Vec<ScalingRow>,
    /// Best polynomial degree in {1, 2, 3}, absent when a total is zero or
    /// fewer than two sizes were given.
    pub degree: Option<u32>,
    pub loglog_slope: Option<f64>,
}

/// Totals and per-TX maxima over increasing `K`, with the polynomial degree
/// whose fixed-slope log-log line leaves the smallest squared residual.
pub fn total_bits_report(policy: &str, allocs: &[BitAllocation]) -> ScalingReport {
    let rows: Vec<ScalingRow> = allocs
        .iter()
        .map(|a| ScalingRow {
            k: a.k(),
            total: a.total(),
            max_tx: a.max_tx_total(),
            interior_tx: a.tx_total(a.k() / 2),
        })
        .collect();
    let usable = rows.len() >= 2 && rows.iter().all(|r| r.total > 0 && r.k > 0);
    let (degree, loglog_slope) = if usable {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| ((r.k as f64).ln(), (r.total as f64).ln()))
            .collect();
        (
            Some(best_degree(&pts)),
            crate::numerics::linear_fit(&pts).map(|(s, _)| s),
        )
    } else {
        (None, None)
    };
    ScalingReport {
        policy: policy.to_string(),
        rows,
        degree,
        loglog_slope,
    }
}

fn best_degree(pts: &[(f64, f64)]) -> u32 {
    let residual = |d: f64| {
        let offsets: Vec<f64> = pts.iter().map(|(x, y)| y - d * x).collect();
        let mean = offsets.iter().sum::<f64>() / offsets.len() as f64;
        offsets.iter().map(|o| (o - mean).powi(2)).sum::<f64>()
    };
    (1..=3u32)
        .min_by(|&a, &b| residual(a as f64).total_cmp(&residual(b as f64)))
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn by_distance(a: &BitAllocation, j: usize) -> Vec<u32> {
        (j..a.k()).map(|i| a.vector_bits(j, i)).collect()
    }

    #[test]
    fn rounding_rule() {
        assert_eq!(bits_from(-3.2), 0);
        assert_eq!(bits_from(-0.5), 0);
        assert_eq!(bits_from(0.0), 0);
        assert_eq!(bits_from(1e-12), 1);
        assert_eq!(bits_from(8.000000000000002), 8);
        assert_eq!(bits_from(7.2), 8);
        assert_eq!(bits_from(f64::NAN), 0);
    }

    #[test]
    fn full_wyner_by_hand() {
        let a = alloc_full(3, 1024.0, ChannelModel::Wyner);
        assert!((0..3).all(|j| (0..3).all(|i| a.vector_bits(j, i) == 20)));
        assert_eq!(a.total(), 180);
        assert_eq!(alloc_full(3, 1.0, ChannelModel::Wyner).total(), 0);
        assert_eq!(alloc_full(3, 0.5, ChannelModel::Wyner).total(), 0);
        let e = alloc_full(4, 1024.0, ChannelModel::ExpDecay);
        assert_eq!(e.vector_bits(0, 3), 30);
    }

    #[test]
    fn full_wyner_quadruples_with_k() {
        for k in [3, 5, 10] {
            assert_eq!(
                alloc_full(2 * k, 100.0, ChannelModel::Wyner).total(),
                4 * alloc_full(k, 100.0, ChannelModel::Wyner).total()
            );
        }
    }

    #[test]
    fn decaying_wyner_by_hand() {
        let spec = PolicySpec::new(PolicyKind::DecayingWyner, 100.0, 0.5);
        let a = alloc_decaying_wyner(&spec, 9);
        assert_eq!(by_distance(&a, 0), vec![14, 10, 6, 2, 0, 0, 0, 0, 0]);
        // symmetric in i - j
        assert_eq!(a.vector_bits(6, 4), a.vector_bits(4, 6));
    }

    #[test]
    fn decaying_wyner_unattenuated_is_full() {
        for &p in &[10.0, 100.0, 3162.3] {
            let spec = PolicySpec::new(PolicyKind::DecayingWyner, p, 1.0);
            assert_eq!(alloc_decaying_wyner(&spec, 6), alloc_full(6, p, ChannelModel::Wyner));
        }
    }

    #[test]
    fn decaying_wyner_interior_constant() {
        let spec = PolicySpec::new(PolicyKind::DecayingWyner, 100.0, 0.5);
        for k in [9, 25, 49] {
            let a = alloc_decaying_wyner(&spec, k);
            // 14 + 2 * (10 + 6 + 2)
            assert_eq!(a.tx_total(k / 2), 50);
        }
    }

    #[test]
    fn decaying_wyner_scalar_support() {
        let spec = PolicySpec::new(PolicyKind::DecayingWyner, 100.0, 0.5).with_mode(QuantMode::Scalar);
        let a = alloc_decaying_wyner(&spec, 7);
        assert_eq!(a.granularity(), Granularity::PerCoefficient);
        // j = i = 3: log2(100 * 0.25^|k-3|) for k = 2, 3, 4
        assert_eq!(a.coefficient_bits(3, 3, 3), 7);
        assert_eq!(a.coefficient_bits(3, 3, 2), 5);
        assert_eq!(a.coefficient_bits(3, 3, 4), 5);
        assert_eq!(a.coefficient_bits(3, 3, 5), 0);
        assert_eq!(a.vector_bits(3, 3), 17);
    }

    #[test]
    fn decaying_exp_equal_rates_constant() {
        let spec = PolicySpec::new(PolicyKind::DecayingExp, 100.0, 0.5);
        let a = alloc_decaying_exp(&spec, 6).unwrap();
        // ceil(5 * log2(400))
        let expected = (5.0 * 400f64.log2()).ceil() as u32;
        assert_eq!(expected, 44);
        assert!((0..6).all(|j| (0..6).all(|i| a.vector_bits(j, i) == expected)));
    }

    #[test]
    fn decaying_exp_scalar_by_hand() {
        let spec = PolicySpec::new(PolicyKind::DecayingExp, 100.0, 0.5).with_mode(QuantMode::Scalar);
        let a = alloc_decaying_exp(&spec, 12).unwrap();
        let row: Vec<u32> = (0..12).map(|c| a.coefficient_bits(0, 5, c)).collect();
        assert_eq!(row, vec![9, 7, 5, 3, 1, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn decaying_exp_strictly_decreasing() {
        let spec = PolicySpec::new(PolicyKind::DecayingExp, 100.0, 0.5).with_mu_prime(0.4);
        let a = alloc_decaying_exp(&spec, 25).unwrap();
        let row = by_distance(&a, 0);
        let first_zero = row.iter().position(|&b| b == 0).unwrap_or(row.len());
        assert!(first_zero > 2);
        for w in row[..first_zero].windows(2) {
            assert!(w[0] > w[1], "{row:?}");
        }
        assert!(row[first_zero..].iter().all(|&b| b == 0));
    }

    #[test]
    fn decaying_exp_rejects_mu_prime_above_mu() {
        let spec = PolicySpec::new(PolicyKind::DecayingExp, 100.0, 0.5).with_mu_prime(0.6);
        assert!(alloc_decaying_exp(&spec, 5).is_err());
    }

    #[test]
    fn uniform_budget_by_hand() {
        let a = alloc_uniform_budget(2, 10);
        assert_eq!(
            (a.vector_bits(0, 0), a.vector_bits(0, 1), a.vector_bits(1, 0), a.vector_bits(1, 1)),
            (3, 3, 2, 2)
        );
        assert_eq!(a.total(), 10);
        assert_eq!(alloc_uniform_budget(4, 0).total(), 0);
    }

    #[test]
    fn uniform_matches_decaying_budget() {
        let spec = PolicySpec::new(PolicyKind::DecayingWyner, 100.0, 0.5);
        let d = alloc_decaying_wyner(&spec, 25);
        assert_eq!(alloc_uniform_budget(25, d.total()).total(), d.total());
        assert_eq!(alloc_overlapping_cluster(25, d.total(), 2).total(), d.total());
    }

    #[test]
    fn cluster_coverage() {
        let a = alloc_overlapping_cluster(25, 1190, 2);
        assert_eq!((0..25).filter(|&i| a.vector_bits(12, i) > 0).count(), 5);
        assert_eq!((0..25).filter(|&i| a.vector_bits(0, i) > 0).count(), 3);
        let diag = alloc_overlapping_cluster(5, 13, 0);
        assert!((0..5).all(|j| (0..5).all(|i| (diag.vector_bits(j, i) > 0) == (i == j))));
        assert_eq!(diag.total(), 13);
        assert_eq!(alloc_overlapping_cluster(6, 77, 5), alloc_uniform_budget(6, 77));
        assert_eq!(alloc_overlapping_cluster(6, 77, 50), alloc_uniform_budget(6, 77));
    }

    #[test]
    fn broadcast_matches_decaying_wyner() {
        for &(p, mu) in &[(100.0, 0.5), (1e4, 0.3), (31.6, 0.9)] {
            let spec = PolicySpec::new(PolicyKind::Broadcast, p, mu);
            assert_eq!(alloc_broadcast(&spec, 11), alloc_decaying_wyner(&spec, 11));
        }
        let flat = alloc_broadcast(&PolicySpec::new(PolicyKind::Broadcast, 100.0, 1.0), 4);
        assert!((0..4).all(|j| (0..4).all(|i| flat.vector_bits(j, i) == 14)));
    }

    #[test]
    fn broadcast_exponential_by_hand() {
        // 2 log2(100 * 0.16^d): 13.29, 8 exactly, 2.71, negative
        let a = alloc_broadcast(&PolicySpec::new(PolicyKind::Broadcast, 100.0, 0.4), 6);
        assert_eq!(by_distance(&a, 0), vec![14, 8, 3, 0, 0, 0]);
    }

    #[test]
    fn sharing_set_by_hand() {
        assert_eq!(symbol_sharing_set(100.0, 0.5, 25, 12), (9..=15).collect::<Vec<_>>());
        assert_eq!(symbol_sharing_set(1.0, 0.5, 25, 12), vec![12]);
        assert_eq!(symbol_sharing_set(0.3, 0.5, 25, 0), vec![0]);
        assert_eq!(symbol_sharing_set(2.0, 1.0, 7, 3), (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn csv_export() {
        let a = alloc_uniform_budget(2, 5);
        let csv = a.to_csv("uniform");
        assert_eq!(csv, "policy,j,i,bits\nuniform,0,0,2\nuniform,0,1,1\nuniform,1,0,1\nuniform,1,1,1\n");
        let spec = PolicySpec::new(PolicyKind::DecayingWyner, 100.0, 0.5).with_mode(QuantMode::Scalar);
        let csv = alloc_decaying_wyner(&spec, 2).to_csv("d");
        assert!(csv.starts_with("policy,j,i,k,bits\nd,0,0,0,7\n"));
        assert_eq!(csv.lines().count(), 9);
    }

    #[test]
    fn scaling_degrees() {
        let ks = [10, 20, 40];
        let full: Vec<_> = ks.iter().map(|&k| alloc_full(k, 100.0, ChannelModel::Wyner)).collect();
        assert_eq!(total_bits_report("full", &full).degree, Some(2));
        let spec = PolicySpec::new(PolicyKind::DecayingWyner, 100.0, 0.5);
        let dec: Vec<_> = ks.iter().map(|&k| alloc_decaying_wyner(&spec, k)).collect();
        let r = total_bits_report("decaying", &dec);
        assert_eq!(r.degree, Some(1));
        assert!(r.rows.iter().all(|row| row.interior_tx == 50));
        let zero = total_bits_report("zero", &[BitAllocation::zeros(3), BitAllocation::zeros(6)]);
        assert_eq!(zero.degree, None);
    }

    #[test]
    fn budget_policies_need_budget() {
        let spec = PolicySpec::new(PolicyKind::Uniform, 100.0, 0.5);
        assert!(spec.allocate(4, ChannelModel::Wyner, None).is_err());
        assert_eq!(spec.allocate(4, ChannelModel::Wyner, Some(33)).unwrap().total(), 33);
    }
}
