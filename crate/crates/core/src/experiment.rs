//! Key-value experiment configs, presets and CSV output.
//!
//! A config is a list of `key=value` lines; `#` starts a comment. Lists are
//! comma separated and numeric grids accept `start:step:stop`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::allocation::{PolicyKind, PolicySpec, QuantMode};
use crate::channel::ChannelModel;
use crate::error::{Error, Result};
use crate::evaluator::{amplitude_profile, db_to_linear, run_sweep, MuPrime, Policy, SimConfig, SweepRecord};
use crate::quantizer::{QuantizerKind, RVQ_BITS_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    RateVsSnr,
    RateVsMu,
    AmplitudeProfile,
    ScalingReport,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::RateVsSnr,
        Preset::RateVsMu,
        Preset::AmplitudeProfile,
        Preset::ScalingReport,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::RateVsSnr => "fig_rate_vs_snr",
            Preset::RateVsMu => "fig_rate_vs_mu",
            Preset::AmplitudeProfile => "fig_amplitude_profile",
            Preset::ScalingReport => "scaling_report",
        }
    }

    /// Config text the preset starts from.
    pub fn defaults(&self) -> &'static str {
        match self {
            Preset::RateVsSnr => "model=wyner\nK=25\nmu=0.5\nsnr_db=0:5:45\npolicies=perfect,decaying,cluster,uniform\n",
            Preset::RateVsMu => "model=wyner\nK=25\nmu=0.1:0.1:1.0\nsnr_db=20\npolicies=perfect,decaying,cluster,uniform\n",
            Preset::AmplitudeProfile => "model=expdecay\nK=25\nmu=0.4\nsnr_db=20\npolicies=perfect,decaying\n",
            Preset::ScalingReport => "K_list=9,17,25,49\nmu=0.5\nmu_prime=0.4\nsnr_db=20\npolicies=full,decaying\n",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown preset '{}'", s.trim())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sim: SimConfig,
    pub preset: Option<Preset>,
    pub out_dir: PathBuf,
    /// Network sizes of the scaling report.
    pub k_list: Vec<usize>,
    pub policy_names: Vec<String>,
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        self.preset.map_or("sweep", |p| p.name())
    }

    /// Range checks, reported against the offending key.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: &str| {
            Err(Error::Config {
                key: key.into(),
                message: message.into(),
            })
        };
        let s = &self.sim;
        if s.k == 0 {
            return bad("K", "K must be at least 1");
        }
        if s.mu_list.is_empty() || s.mu_list.iter().any(|&m| !(m > 0.0 && m <= 1.0)) {
            return bad("mu", "mu must lie in (0,1]");
        }
        if let MuPrime::Fixed(mp) = s.mu_prime {
            if !(mp > 0.0) {
                return bad("mu_prime", "mu_prime must be positive");
            }
            if s.mu_list.iter().any(|&m| mp > m) {
                return bad("mu_prime", "mu_prime must not exceed mu");
            }
        }
        if s.trials == 0 {
            return bad("trials", "trials must be at least 1");
        }
        if s.snr_db_list.is_empty() || s.snr_db_list.iter().any(|x| !x.is_finite()) {
            return bad("snr_db", "snr_db must list finite values");
        }
        if s.quantizer.rvq_max_bits > RVQ_BITS_LIMIT {
            return bad("rvq_max_bits", &format!("rvq_max_bits must not exceed {RVQ_BITS_LIMIT}"));
        }
        if !(s.quantizer.scalar_clip_sigmas > 0.0 && s.quantizer.scalar_clip_sigmas.is_finite()) {
            return bad("scalar_clip_sigmas", "scalar_clip_sigmas must be positive");
        }
        if !(s.broadcast_c > 0.0 && s.broadcast_c.is_finite()) {
            return bad("broadcast_c", "broadcast_c must be positive");
        }
        if s.policies.is_empty() {
            return bad("policies", "at least one policy is required");
        }
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return bad("K_list", "sizes must be at least 1");
        }
        if self.preset == Some(Preset::AmplitudeProfile) && s.model != ChannelModel::ExpDecay {
            return bad("model", "the amplitude profile needs model=expdecay");
        }
        s.validate()
    }
}

fn parse_list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, String> {
    value
        .split(',')
        .map(|v| v.trim().parse::<T>().map_err(|_| format!("cannot parse '{}'", v.trim())))
        .collect()
}

/// A comma list of numbers or a `start:step:stop` grid, stop included.
pub fn parse_grid(value: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = value.split(':').collect();
    match parts.as_slice() {
        [_] => parse_list(value),
        [a, b, c] => {
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("cannot parse '{}'", s.trim()));
            let (start, step, stop) = (num(a)?, num(b)?, num(c)?);
            if !(step > 0.0) || stop < start || !start.is_finite() || !stop.is_finite() {
                return Err("grid needs step > 0 and stop >= start".into());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if n > 100_000 {
                return Err("grid has too many points".into());
            }
            Ok((0..n).map(|i| start + i as f64 * step).collect())
        }
        _ => Err("expected a list or start:step:stop".into()),
    }
}

const KEYS: [&str; 19] = [
    "preset",
    "model",
    "K",
    "K_list",
    "mu",
    "mu_prime",
    "snr_db",
    "policies",
    "trials",
    "seed",
    "quantizer",
    "rvq_max_bits",
    "scalar_clip_sigmas",
    "enforce_sharing",
    "mode",
    "n_cluster",
    "broadcast_c",
    "fixed_bits",
    "out",
];

/// Splits config text into `key -> (line, value)`.
fn tokenize(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Parse {
                line,
                message: format!("expected key=value, found '{content}'"),
            });
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Parse {
                line,
                message: format!("unknown key '{key}'"),
            });
        }
        if map.insert(key.to_string(), (line, value.trim().to_string())).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate key '{key}'"),
            });
        }
    }
    Ok(map)
}

/// Parses a config with the documented defaults. A `preset` key starts from
/// that preset's settings.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_with(text, None)
}

/// Parses `text` on top of `preset` (if any); keys in `text` win.
pub fn parse_config_with(text: &str, preset: Option<Preset>) -> Result<ExperimentConfig> {
    let user = tokenize(text)?;
    let preset = match user.get("preset") {
        Some((line, v)) => Some(v.parse::<Preset>().map_err(|e| Error::Parse {
            line: *line,
            message: e.to_string(),
        })?),
        None => preset,
    };
    let mut map = match preset {
        Some(p) => tokenize(p.defaults())?
            .into_iter()
            .map(|(k, (_, v))| (k, (0, v)))
            .collect(),
        None => BTreeMap::new(),
    };
    map.extend(user);

    let mut cfg = ExperimentConfig {
        sim: SimConfig::new(ChannelModel::Wyner, 25, 0.5),
        preset,
        out_dir: PathBuf::from("results"),
        k_list: vec![9, 17, 25, 49],
        policy_names: vec!["perfect".into(), "decaying".into(), "cluster".into(), "uniform".into()],
    };
    let mut fixed_bits = 8u32;

    for (key, (line, value)) in &map {
        let err = |message: String| Error::Parse { line: *line, message: format!("{key}: {message}") };
        let one = |v: &str| -> Result<f64> { v.parse::<f64>().map_err(|_| err(format!("cannot parse '{v}'"))) };
        let s = &mut cfg.sim;
        match key.as_str() {
            "preset" => {}
            "model" => s.model = value.parse().map_err(|e: Error| err(e.to_string()))?,
            "K" => s.k = value.parse().map_err(|_| err(format!("cannot parse '{value}'")))?,
            "K_list" => cfg.k_list = parse_list(value).map_err(err)?,
            "mu" => s.mu_list = parse_grid(value).map_err(err)?,
            "mu_prime" => {
                s.mu_prime = match value.as_str() {
                    "mu" => MuPrime::SameAsMu,
                    "fit" => MuPrime::Fitted,
                    v => MuPrime::Fixed(one(v)?),
                }
            }
            "snr_db" => s.snr_db_list = parse_grid(value).map_err(err)?,
            "policies" => cfg.policy_names = parse_list(value).map_err(err)?,
            "trials" => s.trials = value.parse().map_err(|_| err(format!("cannot parse '{value}'")))?,
            "seed" => s.seed = value.parse().map_err(|_| err(format!("cannot parse '{value}'")))?,
            "quantizer" => s.quantizer.kind = value.parse::<QuantizerKind>().map_err(|e| err(e.to_string()))?,
            "rvq_max_bits" => {
                s.quantizer.rvq_max_bits = value.parse().map_err(|_| err(format!("cannot parse '{value}'")))?
            }
            "scalar_clip_sigmas" => s.quantizer.scalar_clip_sigmas = one(value)?,
            "enforce_sharing" => {
                s.enforce_sharing = value.parse().map_err(|_| err("expected true or false".into()))?
            }
            "mode" => {
                s.mode = match value.as_str() {
                    "auto" => None,
                    "vector" => Some(QuantMode::Vector),
                    "scalar" => Some(QuantMode::Scalar),
                    v => return Err(err(format!("unknown mode '{v}'"))),
                }
            }
            "n_cluster" => s.n_cluster = value.parse().map_err(|_| err(format!("cannot parse '{value}'")))?,
            "broadcast_c" => s.broadcast_c = one(value)?,
            "fixed_bits" => fixed_bits = value.parse().map_err(|_| err(format!("cannot parse '{value}'")))?,
            "out" => cfg.out_dir = PathBuf::from(value),
            _ => unreachable!("keys are checked while tokenizing"),
        }
    }
    cfg.sim.policies = cfg
        .policy_names
        .iter()
        .map(|n| Policy::parse(n, cfg.sim.model, fixed_bits))
        .collect::<Result<_>>()
        .map_err(|e| Error::Config {
            key: "policies".into(),
            message: e.to_string(),
        })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Formats with 10 significant digits, fixed notation where practical.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..15).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

pub const CSV_HEADER: &str = "policy,model,K,mu,mu_prime,snr_db,avg_rate_per_user,stderr,total_bits,percent_of_full,avg_precoder_distance,outage_trials,trials,seed";

pub fn records_to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.policy,
            r.model.name(),
            r.k,
            format_sig(r.mu),
            format_sig(r.mu_prime),
            format_sig(r.snr_db),
            format_sig(r.avg_rate_per_user),
            format_sig(r.stderr),
            r.total_bits,
            format_sig(r.percent_of_full),
            format_sig(r.avg_precoder_distance),
            r.outage_trials,
            r.trials,
            r.seed
        );
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn write_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    write_text(path, &records_to_csv(records))
}

/// Files written and the text summary of one run.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn sweep_summary(records: &[SweepRecord]) -> String {
    let mut s = format!(
        "{:<16} {:>6} {:>8} {:>10} {:>9} {:>10} {:>8}\n",
        "policy", "mu", "snr_db", "rate", "stderr", "bits", "% full"
    );
    for r in records {
        let _ = writeln!(
            s,
            "{:<16} {:>6.3} {:>8.2} {:>10.4} {:>9.4} {:>10} {:>8.2}",
            r.policy,
            r.mu,
            r.snr_db,
            r.avg_rate_per_user,
            r.stderr,
            r.total_bits,
            100.0 * r.percent_of_full
        );
    }
    s
}

fn run_profile(cfg: &ExperimentConfig) -> Result<(String, String)> {
    let s = &cfg.sim;
    let mut csv = String::from("policy,model,K,mu,snr_db,distance,precoder_log10,precoder_stderr,channel_log10,outage_trials,trials,seed\n");
    let mut summary = format!("{:<16} {:>6} {:>8} {:>8} {:>12} {:>12}\n", "policy", "mu", "snr_db", "distance", "precoder", "channel");
    for &mu in &s.mu_list {
        for &snr in &s.snr_db_list {
            for &policy in &s.policies {
                let prof = amplitude_profile(s, snr, mu, policy)?;
                for d in 0..prof.precoder_log10.len() {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{},{},{},{},{},{},{}",
                        policy.name(),
                        s.model.name(),
                        s.k,
                        format_sig(mu),
                        format_sig(snr),
                        d,
                        format_sig(prof.precoder_log10[d]),
                        format_sig(prof.precoder_stderr[d]),
                        format_sig(prof.channel_log10[d]),
                        prof.outage_trials,
                        s.trials,
                        s.seed
                    );
                    let _ = writeln!(
                        summary,
                        "{:<16} {:>6.3} {:>8.2} {:>8} {:>12.4} {:>12.4}",
                        policy.name(),
                        mu,
                        snr,
                        d,
                        prof.precoder_log10[d],
                        prof.channel_log10[d]
                    );
                }
            }
        }
    }
    Ok((csv, summary))
}

fn run_scaling(cfg: &ExperimentConfig) -> Result<(String, String)> {
    let s = &cfg.sim;
    let mut csv = String::from("policy,model,K,mu,mu_prime,snr_db,total_bits,max_tx_bits,interior_tx_bits,degree,loglog_slope\n");
    let mut summary = format!("{:<16} {:<8} {:>6} {:>6} {:>12} {:>8}\n", "policy", "model", "mu", "K", "total_bits", "degree");
    for model in [ChannelModel::Wyner, ChannelModel::ExpDecay] {
        let policies = cfg
            .policy_names
            .iter()
            .map(|n| Policy::parse(n, model, 8))
            .collect::<Result<Vec<_>>>()?;
        for &mu in &s.mu_list {
            let mu_prime = match s.mu_prime {
                MuPrime::Fixed(m) => m,
                _ => mu,
            };
            for &snr in &s.snr_db_list {
                let power = db_to_linear(snr);
                let mode = s.mode.unwrap_or(match model {
                    ChannelModel::Wyner => QuantMode::Vector,
                    ChannelModel::ExpDecay => QuantMode::Scalar,
                });
                for policy in &policies {
                    let Policy::Alloc(kind) = *policy else { continue };
                    let mut allocs = Vec::new();
                    for &k in &cfg.k_list {
                        let spec_for = |kind| {
                            let mut p = PolicySpec::new(kind, power, mu).with_mode(mode).with_mu_prime(mu_prime);
                            p.n_cluster = s.n_cluster;
                            p.broadcast_c = s.broadcast_c;
                            p
                        };
                        let budget = if kind.is_budgeted() {
                            let decaying = match model {
                                ChannelModel::Wyner => PolicyKind::DecayingWyner,
                                ChannelModel::ExpDecay => PolicyKind::DecayingExp,
                            };
                            Some(spec_for(decaying).allocate(k, model, None)?.total())
                        } else {
                            None
                        };
                        allocs.push(spec_for(kind).allocate(k, model, budget)?);
                    }
                    let report = crate::allocation::total_bits_report(&kind.name(), &allocs);
                    let degree = report.degree.map_or(String::new(), |d| d.to_string());
                    let slope = report.loglog_slope.map_or(String::new(), format_sig);
                    for row in &report.rows {
                        let _ = writeln!(
                            csv,
                            "{},{},{},{},{},{},{},{},{},{},{}",
                            report.policy,
                            model.name(),
                            row.k,
                            format_sig(mu),
                            format_sig(mu_prime),
                            format_sig(snr),
                            row.total,
                            row.max_tx,
                            row.interior_tx,
                            degree,
                            slope
                        );
                        let _ = writeln!(
                            summary,
                            "{:<16} {:<8} {:>6.3} {:>6} {:>12} {:>8}",
                            report.policy,
                            model.name(),
                            mu,
                            row.k,
                            row.total,
                            degree
                        );
                    }
                }
            }
        }
    }
    Ok((csv, summary))
}

/// Runs the configured experiment and writes `<out>/<name>.csv`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let (csv, summary) = match cfg.preset {
        Some(Preset::AmplitudeProfile) => run_profile(cfg)?,
        Some(Preset::ScalingReport) => run_scaling(cfg)?,
        _ => {
            let records = run_sweep(&cfg.sim)?;
            (records_to_csv(&records), sweep_summary(&records))
        }
    };
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::Io {
        path: cfg.out_dir.display().to_string(),
        message: e.to_string(),
    })?;
    let path = cfg.out_dir.join(format!("{}.csv", cfg.name()));
    write_text(&path, &csv)?;
    Ok(ExperimentOutput {
        files: vec![path],
        summary,
    })
}
