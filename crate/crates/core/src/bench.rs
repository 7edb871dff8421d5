//! Replicated simulation study: noisy test signals, every estimator,
//! average mean-square errors with standard errors, CSV output.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{bayes_thresh, fdr_threshold, sure_shrink, universal_threshold, DEFAULT_FDR_Q};
use crate::cftp::{CftpConfig, Problem, TierThresholds};
use crate::error::{Error, Result};
use crate::estimator::posterior_median_estimate;
use crate::model::ModelParams;
use crate::rng;
use crate::wavelet::{add_noise, forward_dwt, inverse_dwt, make_test_signal, FilterKind, Signal, TestSignal, WaveletFilter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "AIBT")]
    Aibt,
    #[serde(rename = "SS")]
    SureShrink,
    #[serde(rename = "UNIV")]
    Universal,
    #[serde(rename = "BT")]
    BayesThresh,
    #[serde(rename = "FDR")]
    Fdr,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Aibt,
        Method::SureShrink,
        Method::Universal,
        Method::BayesThresh,
        Method::Fdr,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Aibt => "AIBT",
            Method::SureShrink => "SS",
            Method::Universal => "UNIV",
            Method::BayesThresh => "BT",
            Method::Fdr => "FDR",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName {
                kind: "method",
                name: s.to_string(),
            })
    }
}

/// Which filter each test signal is analysed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletPolicy {
    /// Haar for Blocks, the 20-tap least-asymmetric filter otherwise.
    Standard,
    Haar,
    La10,
}

impl WaveletPolicy {
    pub fn filter_for(self, signal: TestSignal) -> FilterKind {
        match self {
            WaveletPolicy::Standard if signal == TestSignal::Blocks => FilterKind::Haar,
            WaveletPolicy::Standard | WaveletPolicy::La10 => FilterKind::DaubLa10,
            WaveletPolicy::Haar => FilterKind::Haar,
        }
    }
}

/// Prior hyperparameters; the noise level comes from the RSNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorParams {
    pub lambda: f64,
    pub gamma: f64,
    pub tau: f64,
    pub z: f64,
}

impl Default for PriorParams {
    fn default() -> Self {
        Self {
            lambda: 0.05,
            gamma: 3.0,
            tau: 1.0,
            z: 1.0,
        }
    }
}

impl PriorParams {
    pub fn with_sigma(&self, sigma: f64) -> Result<ModelParams<f64>> {
        ModelParams::with_z(self.lambda, self.gamma, self.tau, sigma, self.z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub signals: Vec<TestSignal>,
    pub n: usize,
    pub rsnr: Vec<f64>,
    pub reps: usize,
    pub n_draws: usize,
    pub params: PriorParams,
    pub wavelet_policy: WaveletPolicy,
    pub seed: u64,
    /// Lower tier cut-off; `None` means `lambda * e^4`.
    pub t1: Option<f64>,
    pub t2: f64,
    pub methods: Vec<Method>,
    pub fdr_q: f64,
    pub max_doublings: u32,
    /// Record wall-clock time per cell. Off by default so output files are
    /// byte-reproducible; when off `runtime_s` is written as 0.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let th = TierThresholds::for_lambda(PriorParams::default().lambda);
        Self {
            signals: TestSignal::ALL.to_vec(),
            n: 256,
            rsnr: vec![10.0, 7.0, 3.0],
            reps: 5,
            n_draws: 9,
            params: PriorParams::default(),
            wavelet_policy: WaveletPolicy::Standard,
            seed: 1,
            t1: None,
            t2: th.t2,
            methods: Method::ALL.to_vec(),
            fdr_q: DEFAULT_FDR_Q,
            max_doublings: CftpConfig::default().max_doublings,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    /// The full-scale study: 25 replicates, 25 posterior draws each.
    pub fn full_scale() -> Self {
        Self {
            reps: 25,
            n_draws: 25,
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.n_draws == 0 {
            return Err(Error::Config("n_draws must be at least 1".into()));
        }
        if let Some(r) = self.rsnr.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::Config(format!("rsnr must be positive, got {r}")));
        }
        if !(self.fdr_q > 0.0 && self.fdr_q < 1.0) {
            return Err(Error::Config(format!("fdr_q must lie in (0, 1), got {}", self.fdr_q)));
        }
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(Error::Length(self.n));
        }
        self.params.with_sigma(1.0)?;
        let th = self.thresholds();
        TierThresholds::new(th.t1, th.t2)?;
        Ok(())
    }

    pub fn thresholds(&self) -> TierThresholds {
        TierThresholds {
            t1: self.t1.unwrap_or_else(|| TierThresholds::for_lambda(self.params.lambda).t1),
            t2: self.t2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub signal: TestSignal,
    pub rsnr: f64,
    pub method: Method,
    pub amse: f64,
    pub se: f64,
    /// Replicates that produced an estimate.
    pub reps: usize,
    pub runtime_s: f64,
    /// Replicates lost to sampler non-coalescence.
    pub failures: usize,
}

/// Mean and standard error of per-replicate MSEs.
pub fn amse_from_mses(mses: &[f64]) -> (f64, f64) {
    let r = mses.len();
    if r == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = mses.iter().sum::<f64>() / r as f64;
    if r == 1 {
        return (mean, 0.0);
    }
    let var = mses.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
    (mean, (var / r as f64).sqrt())
}

/// Average over replicates of `(1/n) sum (ghat - g)^2`, and its standard error.
pub fn amse(estimates: &[Signal<f64>], truth: &Signal<f64>) -> Result<(f64, f64)> {
    let mses = estimates.iter().map(|e| e.mse(truth)).collect::<Result<Vec<_>>>()?;
    Ok(amse_from_mses(&mses))
}

struct CellOutcome {
    mse: Vec<Option<f64>>,
    seconds: Vec<f64>,
}

fn cell_seed(root: u64, signal: TestSignal, rsnr: f64, rep: usize) -> u64 {
    rng::path_seed(root, &[rng::tag::CELL, signal as u64, rsnr.to_bits(), rep as u64])
}

fn run_cell(cfg: &ExperimentConfig, signal: TestSignal, rsnr: f64, rep: usize) -> Result<CellOutcome> {
    let truth = make_test_signal::<f64>(signal, cfg.n)?;
    let sigma = 1.0 / rsnr;
    let seed = cell_seed(cfg.seed, signal, rsnr, rep);
    let noisy = add_noise(&truth, sigma, seed)?;
    let filter = WaveletFilter::new(cfg.wavelet_policy.filter_for(signal));
    let dec = forward_dwt(&noisy, &filter);
    let mut mse = Vec::with_capacity(cfg.methods.len());
    let mut seconds = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let start = Instant::now();
        let estimate = match method {
            Method::Aibt => {
                let params = cfg.params.with_sigma(sigma)?;
                let problem = Problem::from_details(&dec.detail_flat(), params, cfg.thresholds())?;
                let cftp = CftpConfig {
                    max_doublings: cfg.max_doublings,
                    ..CftpConfig::default()
                };
                match posterior_median_estimate(&problem, cfg.n_draws, seed, &cftp) {
                    Ok(est) => Some(dec.with_detail_flat(&est)?),
                    Err(e @ Error::NoCoalescence { .. }) => {
                        log::warn!("{signal} rsnr={rsnr} rep={rep}: {e}");
                        None
                    }
                    Err(e) => return Err(e),
                }
            }
            Method::SureShrink => Some(sure_shrink(&dec, sigma)),
            Method::Universal => Some(universal_threshold(&dec, sigma)),
            Method::BayesThresh => Some(bayes_thresh(&dec, sigma)),
            Method::Fdr => Some(fdr_threshold(&dec, sigma, cfg.fdr_q)),
        };
        let value = match estimate {
            Some(d) => Some(inverse_dwt(&d)?.mse(&truth)?),
            None => None,
        };
        mse.push(value);
        seconds.push(start.elapsed().as_secs_f64());
    }
    Ok(CellOutcome { mse, seconds })
}

/// Run every (signal, rsnr, replicate) cell and reduce to one row per
/// (signal, rsnr, method), in configuration order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let jobs: Vec<(TestSignal, f64, usize)> = cfg
        .signals
        .iter()
        .flat_map(|&s| cfg.rsnr.iter().flat_map(move |&r| (0..cfg.reps).map(move |rep| (s, r, rep))))
        .collect();
    let outcomes: Vec<CellOutcome> = jobs
        .par_iter()
        .map(|&(s, r, rep)| run_cell(cfg, s, r, rep))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (chunk, &(signal, rsnr, _)) in outcomes.chunks(cfg.reps).zip(jobs.iter().step_by(cfg.reps)) {
        for (m, &method) in cfg.methods.iter().enumerate() {
            let mses: Vec<f64> = chunk.iter().filter_map(|c| c.mse[m]).collect();
            let (amse, se) = amse_from_mses(&mses);
            let runtime_s = if cfg.timing {
                chunk.iter().map(|c| c.seconds[m]).sum()
            } else {
                0.0
            };
            rows.push(ResultRow {
                signal,
                rsnr,
                method,
                amse,
                se,
                reps: mses.len(),
                runtime_s,
                failures: cfg.reps - mses.len(),
            });
        }
    }
    Ok(rows)
}

/// C-style `%.{digits}g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const CSV_HEADER: &str = "signal,rsnr,method,amse,se,reps,runtime_s";

pub fn write_csv<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.signal,
            format_sig(r.rsnr, 10),
            r.method,
            format_sig(r.amse, 10),
            format_sig(r.se, 10),
            r.reps,
            format_sig(r.runtime_s, 10)
        )?;
    }
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_csv(rows, &mut w)?;
    w.flush()?;
    Ok(())
}
