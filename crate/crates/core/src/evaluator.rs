//! Monte Carlo evaluation of distributed ZF under the allocation policies.
//!
//! One trial draws a channel, builds every TX's local estimate, assembles the
//! effective precoder and records the per-user rates and the distance to the
//! perfect-CSI precoder. Trials run in parallel; every random draw comes from
//! a stream keyed by `(purpose, trial, tx)`, and results are reduced in
//! trial-index order, so outputs do not depend on the thread count.
//!
//! The channel and quantizer streams do not depend on the policy, the SNR or
//! `mu`, so policies are compared on common random numbers.

use rayon::prelude::*;

use crate::allocation::{
    alloc_full, BitAllocation, PolicyKind, PolicySpec, QuantMode,
};
use crate::channel::{purpose, ChannelModel, RandomStream};
use crate::error::{Error, Result};
use crate::numerics::{fit_decay_profile, invert_general, linear_fit, ComplexMatrix};
use crate::precoder::{assemble_effective, precoder_distance, zf_local, zf_perfect, EffectivePrecoder};
use crate::quantizer::{build_local_estimate, QuantizerSpec};

/// A precoding policy under evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Every TX knows the channel exactly.
    Perfect,
    Alloc(PolicyKind),
}

impl Policy {
    pub fn name(&self) -> String {
        match self {
            Policy::Perfect => "perfect".into(),
            Policy::Alloc(k) => k.name(),
        }
    }

    /// The decaying policy matching a channel model.
    pub fn decaying(model: ChannelModel) -> Self {
        match model {
            ChannelModel::Wyner => Policy::Alloc(PolicyKind::DecayingWyner),
            ChannelModel::ExpDecay => Policy::Alloc(PolicyKind::DecayingExp),
        }
    }

    /// Parses a policy name; `decaying` resolves against `model`.
    pub fn parse(name: &str, model: ChannelModel, fixed_bits: u32) -> Result<Self> {
        Ok(match name.trim() {
            "perfect" => Policy::Perfect,
            "full" => Policy::Alloc(PolicyKind::Full),
            "decaying" => Policy::decaying(model),
            "decaying_wyner" => Policy::Alloc(PolicyKind::DecayingWyner),
            "decaying_exp" => Policy::Alloc(PolicyKind::DecayingExp),
            "uniform" => Policy::Alloc(PolicyKind::Uniform),
            "cluster" | "overlapping_cluster" => Policy::Alloc(PolicyKind::OverlappingCluster),
            "broadcast" => Policy::Alloc(PolicyKind::Broadcast),
            "fixed" => Policy::Alloc(PolicyKind::Fixed(fixed_bits)),
            other => {
                if let Some(b) = other.strip_prefix("fixed").and_then(|s| s.parse().ok()) {
                    Policy::Alloc(PolicyKind::Fixed(b))
                } else {
                    return Err(Error::InvalidParameter(format!("unknown policy '{other}'")));
                }
            }
        })
    }
}

/// How `mu'` (decay base of the channel inverse) is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuPrime {
    /// `mu' = mu`.
    SameAsMu,
    Fixed(f64),
    /// Fitted on the mean magnitude of 200 channel inverses, capped at `mu`.
    Fitted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: ChannelModel,
    pub k: usize,
    pub mu_list: Vec<f64>,
    pub mu_prime: MuPrime,
    pub snr_db_list: Vec<f64>,
    pub policies: Vec<Policy>,
    pub trials: usize,
    pub seed: u64,
    pub quantizer: QuantizerSpec,
    /// Zero the contribution of TXs without CSI on a stream.
    pub enforce_sharing: bool,
    /// Quantization mode of the decaying policies; `None` picks vector for
    /// the Wyner model and scalar for the exponential one.
    pub mode: Option<QuantMode>,
    pub n_cluster: usize,
    pub broadcast_c: f64,
}

impl SimConfig {
    pub fn new(model: ChannelModel, k: usize, mu: f64) -> Self {
        Self {
            model,
            k,
            mu_list: vec![mu],
            mu_prime: MuPrime::SameAsMu,
            snr_db_list: vec![20.0],
            policies: vec![Policy::Perfect, Policy::decaying(model)],
            trials: 500,
            seed: 42,
            quantizer: QuantizerSpec::default(),
            enforce_sharing: false,
            mode: None,
            n_cluster: 2,
            broadcast_c: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.snr_db_list.is_empty() || self.snr_db_list.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter("snr list must be nonempty and finite".into()));
        }
        if self.mu_list.is_empty() || self.mu_list.iter().any(|&m| !(m > 0.0 && m <= 1.0)) {
            return Err(Error::InvalidParameter("mu must lie in (0,1]".into()));
        }
        if let MuPrime::Fixed(mp) = self.mu_prime {
            if !(mp > 0.0) {
                return Err(Error::InvalidParameter("mu_prime must be positive".into()));
            }
            if self.mu_list.iter().any(|&m| mp > m) {
                return Err(Error::InvalidParameter("mu_prime must not exceed mu".into()));
            }
        }
        if self.policies.is_empty() {
            return Err(Error::InvalidParameter("at least one policy is required".into()));
        }
        self.quantizer.validate()
    }

    pub fn decaying_mode(&self) -> QuantMode {
        self.mode.unwrap_or(match self.model {
            ChannelModel::Wyner => QuantMode::Vector,
            ChannelModel::ExpDecay => QuantMode::Scalar,
        })
    }

    fn channel_stream(&self, trial: usize) -> RandomStream {
        RandomStream::derive(self.seed, &[purpose::CHANNEL, trial as u64])
    }

    fn quantizer_stream(&self, trial: usize, tx: usize) -> RandomStream {
        RandomStream::derive(self.seed, &[purpose::QUANTIZER, trial as u64, tx as u64])
    }

    pub fn draw_channel(&self, mu: f64, trial: usize) -> Result<ComplexMatrix> {
        self.model.generate(self.k, mu, self.channel_stream(trial))
    }
}

/// Linear power from dB.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Decay base of the channel inverse, fitted on the mean magnitude of
/// `draws` inverses and capped at `mu`.
pub fn estimate_mu_prime(model: ChannelModel, k: usize, mu: f64, draws: usize, seed: u64) -> Result<f64> {
    let mut acc = vec![0.0; k * k];
    let mut used = 0usize;
    for t in 0..draws {
        let h = model.generate(k, mu, RandomStream::derive(seed, &[purpose::ORACLE, t as u64]))?;
        let Ok(inv) = invert_general(&h) else { continue };
        for (a, z) in acc.iter_mut().zip(inv.as_slice()) {
            *a += z.norm();
        }
        used += 1;
    }
    if used == 0 {
        return Err(Error::InsufficientData("no invertible draws".into()));
    }
    let mut profile = vec![0.0; k];
    let mut count = vec![0usize; k];
    for i in 0..k {
        for j in 0..k {
            profile[i.abs_diff(j)] += acc[i * k + j] / used as f64;
            count[i.abs_diff(j)] += 1;
        }
    }
    for (p, c) in profile.iter_mut().zip(&count) {
        *p /= *c as f64;
    }
    Ok(fit_decay_profile(&profile).decay_base().unwrap_or(mu).min(mu))
}

/// Resolved parameters of one `(mu, P)` grid point with its allocations.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub power: f64,
    pub mu: f64,
    pub mu_prime: f64,
    /// One entry per configured policy; `None` for perfect CSI.
    pub allocations: Vec<Option<BitAllocation>>,
    pub full: BitAllocation,
}

impl SweepPoint {
    pub fn new(cfg: &SimConfig, snr_db: f64, mu: f64) -> Result<Self> {
        let mu_prime = match cfg.mu_prime {
            MuPrime::SameAsMu => mu,
            MuPrime::Fixed(m) => m,
            MuPrime::Fitted => estimate_mu_prime(cfg.model, cfg.k, mu, 200, cfg.seed)?,
        };
        Self::with_mu_prime(cfg, snr_db, mu, mu_prime)
    }

    pub fn with_mu_prime(cfg: &SimConfig, snr_db: f64, mu: f64, mu_prime: f64) -> Result<Self> {
        let power = db_to_linear(snr_db);
        let spec_for = |kind| {
            let mut s = PolicySpec::new(kind, power, mu)
                .with_mode(cfg.decaying_mode())
                .with_mu_prime(mu_prime);
            s.n_cluster = cfg.n_cluster;
            s.broadcast_c = cfg.broadcast_c;
            s
        };
        let decaying = match cfg.model {
            ChannelModel::Wyner => PolicyKind::DecayingWyner,
            ChannelModel::ExpDecay => PolicyKind::DecayingExp,
        };
        let mut budget = None;
        let mut allocations = Vec::with_capacity(cfg.policies.len());
        for policy in &cfg.policies {
            allocations.push(match policy {
                Policy::Perfect => None,
                Policy::Alloc(kind) => {
                    if kind.is_budgeted() && budget.is_none() {
                        budget = Some(spec_for(decaying).allocate(cfg.k, cfg.model, None)?.total());
                    }
                    Some(spec_for(*kind).allocate(cfg.k, cfg.model, budget)?)
                }
            });
        }
        Ok(Self {
            snr_db,
            power,
            mu,
            mu_prime,
            allocations,
            full: alloc_full(cfg.k, power, cfg.model),
        })
    }
}

/// Per-user rates and precoder distance of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub rates: Vec<f64>,
    pub distance: f64,
}

impl TrialOutcome {
    pub fn mean_rate(&self) -> f64 {
        self.rates.iter().sum::<f64>() / self.rates.len() as f64
    }
}

/// `log2(1 + SINR_i)` per user with unit noise variance, where user `i`
/// sees `(HT)_ii` as signal and `(HT)_il, l != i` as interference.
pub fn user_rates(h: &ComplexMatrix, t: &ComplexMatrix) -> Result<Vec<f64>> {
    let ht = h.checked_mul(t)?;
    Ok((0..ht.rows())
        .map(|i| {
            let row = ht.row(i);
            let signal = row[i].norm_sqr();
            let interference: f64 = row
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != i)
                .map(|(_, z)| z.norm_sqr())
                .sum();
            (1.0 + signal / (1.0 + interference)).log2()
        })
        .collect())
}

/// Effective precoder of one policy on a drawn channel. `None` when a local
/// estimate could not be inverted.
pub fn effective_precoder(
    cfg: &SimConfig,
    h: &ComplexMatrix,
    mu: f64,
    power: f64,
    alloc: &BitAllocation,
    trial: usize,
) -> Result<Option<EffectivePrecoder>> {
    let k = cfg.k;
    let participation: Vec<Vec<bool>> = (0..k)
        .map(|j| {
            (0..k)
                .map(|i| !cfg.enforce_sharing || i == j || alloc.vector_bits(j, i) > 0)
                .collect()
        })
        .collect();
    let mut locals = Vec::with_capacity(k);
    for (j, flags) in participation.iter().enumerate() {
        let est = build_local_estimate(h, cfg.model, mu, j, alloc, &cfg.quantizer, cfg.quantizer_stream(trial, j))?;
        match zf_local(&est, power, flags) {
            Ok(t) => locals.push(t),
            Err(Error::Singular { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    assemble_effective(&locals, power).map(Some)
}

fn evaluate_policy(
    cfg: &SimConfig,
    h: &ComplexMatrix,
    t_pcsi: &ComplexMatrix,
    point: &SweepPoint,
    policy_idx: usize,
    trial: usize,
) -> Result<Option<TrialOutcome>> {
    match &point.allocations[policy_idx] {
        None => Ok(Some(TrialOutcome {
            rates: user_rates(h, t_pcsi)?,
            distance: 0.0,
        })),
        Some(alloc) => {
            let Some(t) = effective_precoder(cfg, h, point.mu, point.power, alloc, trial)? else {
                return Ok(None);
            };
            Ok(Some(TrialOutcome {
                rates: user_rates(h, &t.matrix)?,
                distance: precoder_distance(&t, t_pcsi)?,
            }))
        }
    }
}

/// One trial of one policy; `Ok(None)` marks an outage.
pub fn run_trial(cfg: &SimConfig, point: &SweepPoint, policy_idx: usize, trial: usize) -> Result<Option<TrialOutcome>> {
    let h = cfg.draw_channel(point.mu, trial)?;
    let t_pcsi = match zf_perfect(&h, point.power) {
        Ok(t) => t,
        Err(Error::Singular { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    evaluate_policy(cfg, &h, &t_pcsi, point, policy_idx, trial)
}

/// Every policy on one trial, sharing the channel draw.
fn run_trial_all(cfg: &SimConfig, point: &SweepPoint, trial: usize) -> Result<Vec<Option<TrialOutcome>>> {
    let h = cfg.draw_channel(point.mu, trial)?;
    let t_pcsi = match zf_perfect(&h, point.power) {
        Ok(t) => t,
        Err(Error::Singular { .. }) => return Ok(vec![None; cfg.policies.len()]),
        Err(e) => return Err(e),
    };
    (0..cfg.policies.len())
        .map(|p| evaluate_policy(cfg, &h, &t_pcsi, point, p, trial))
        .collect()
}

/// Aggregate for one `(policy, snr, mu)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub policy: String,
    pub model: ChannelModel,
    pub k: usize,
    pub mu: f64,
    pub mu_prime: f64,
    pub snr_db: f64,
    pub avg_rate_per_user: f64,
    pub stderr: f64,
    pub total_bits: u64,
    pub percent_of_full: f64,
    pub avg_precoder_distance: f64,
    pub distance_stderr: f64,
    pub outage_trials: usize,
    pub trials: usize,
    pub seed: u64,
}

/// Mean and standard error (sample deviation over √n; 0 for a single value).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Runs all trials at one grid point and reduces them per policy.
pub fn run_point(cfg: &SimConfig, point: &SweepPoint) -> Result<Vec<SweepRecord>> {
    let outcomes: Vec<Vec<Option<TrialOutcome>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial_all(cfg, point, t))
        .collect::<Result<_>>()?;

    let full_total = point.full.total();
    cfg.policies
        .iter()
        .enumerate()
        .map(|(p, policy)| {
            let ok: Vec<&TrialOutcome> = outcomes.iter().filter_map(|o| o[p].as_ref()).collect();
            if ok.is_empty() {
                return Err(Error::AllOutage {
                    policy: policy.name(),
                    snr_db: point.snr_db,
                    mu: point.mu,
                });
            }
            let rates: Vec<f64> = ok.iter().map(|o| o.mean_rate()).collect();
            let distances: Vec<f64> = ok.iter().map(|o| o.distance).collect();
            let (avg_rate, stderr) = mean_stderr(&rates);
            let (avg_dist, dist_se) = mean_stderr(&distances);
            // perfect CSI reports the full table as its nominal budget
            let total_bits = point.allocations[p].as_ref().map_or(full_total, |a| a.total());
            let percent_of_full = if full_total == 0 {
                0.0
            } else {
                total_bits as f64 / full_total as f64
            };
            Ok(SweepRecord {
                policy: policy.name(),
                model: cfg.model,
                k: cfg.k,
                mu: point.mu,
                mu_prime: point.mu_prime,
                snr_db: point.snr_db,
                avg_rate_per_user: avg_rate,
                stderr,
                total_bits,
                percent_of_full,
                avg_precoder_distance: avg_dist,
                distance_stderr: dist_se,
                outage_trials: cfg.trials - ok.len(),
                trials: cfg.trials,
                seed: cfg.seed,
            })
        })
        .collect()
}

/// Records ordered by `mu`, then SNR, then policy as configured.
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &mu in &cfg.mu_list {
        for &snr in &cfg.snr_db_list {
            let point = SweepPoint::new(cfg, snr, mu)?;
            out.extend(run_point(cfg, &point)?);
        }
    }
    Ok(out)
}

/// High-SNR slope of rate against `log2 P` over the top half of the SNR
/// range, from `(snr_db, rate)` pairs.
pub fn estimate_mg(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::InsufficientData("at least 3 SNR points are required".into()));
    }
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 20.0 {
        return Err(Error::InsufficientData("SNR points must span at least 20 dB".into()));
    }
    let mid = 0.5 * (lo + hi);
    let top: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 >= mid)
        .map(|&(snr, rate)| (db_to_linear(snr).log2(), rate))
        .collect();
    linear_fit(&top)
        .map(|(slope, _)| slope)
        .ok_or_else(|| Error::InsufficientData("fewer than 2 points in the top half of the SNR range".into()))
}

/// Distance profile of the middle stream's precoder and channel.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeProfile {
    pub stream: usize,
    /// Mean of `log10(|T_ji| / √P)` over trials and TXs at distance `d`.
    pub precoder_log10: Vec<f64>,
    pub precoder_stderr: Vec<f64>,
    /// `log10` of the mean `|H_ij|` at distance `d`.
    pub channel_log10: Vec<f64>,
    pub outage_trials: usize,
}

/// Amplitude-decay profile for stream `ceil(K/2)` of the exponential model.
pub fn amplitude_profile(cfg: &SimConfig, snr_db: f64, mu: f64, policy: Policy) -> Result<AmplitudeProfile> {
    if cfg.model != ChannelModel::ExpDecay {
        return Err(Error::InvalidParameter(
            "amplitude profile is defined for the exponential model".into(),
        ));
    }
    let mut single = cfg.clone();
    single.policies = vec![policy];
    let point = SweepPoint::new(&single, snr_db, mu)?;
    let k = cfg.k;
    let stream = k.div_ceil(2) - 1;
    let amp = point.power.sqrt();

    let per_trial: Vec<Option<(Vec<f64>, Vec<f64>)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<_> {
            let h = single.draw_channel(mu, trial)?;
            let t = match &point.allocations[0] {
                None => match zf_perfect(&h, point.power) {
                    Ok(t) => t,
                    Err(Error::Singular { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                },
                Some(alloc) => match effective_precoder(&single, &h, mu, point.power, alloc, trial)? {
                    Some(t) => t.matrix,
                    None => return Ok(None),
                },
            };
            let precoder = (0..k).map(|j| (t[(j, stream)].norm() / amp).log10()).collect();
            let channel = (0..k).map(|j| h[(stream, j)].norm()).collect();
            Ok(Some((precoder, channel)))
        })
        .collect::<Result<_>>()?;

    let max_d = stream.max(k - 1 - stream);
    let mut pre: Vec<Vec<f64>> = vec![Vec::new(); max_d + 1];
    let mut chan_sum = vec![0.0; max_d + 1];
    let mut chan_n = vec![0usize; max_d + 1];
    let mut outages = 0;
    for trial in &per_trial {
        let Some((p, c)) = trial else {
            outages += 1;
            continue;
        };
        for j in 0..k {
            let d = j.abs_diff(stream);
            if p[j].is_finite() {
                pre[d].push(p[j]);
            }
            chan_sum[d] += c[j];
            chan_n[d] += 1;
        }
    }
    if outages == cfg.trials {
        return Err(Error::AllOutage {
            policy: policy.name(),
            snr_db,
            mu,
        });
    }
    let (precoder_log10, precoder_stderr) = pre.iter().map(|v| mean_stderr(v)).unzip();
    let channel_log10 = chan_sum
        .iter()
        .zip(&chan_n)
        .map(|(s, &n)| (s / n as f64).log10())
        .collect();
    Ok(AmplitudeProfile {
        stream,
        precoder_log10,
        precoder_stderr,
        channel_log10,
        outage_trials: outages,
    })
}
