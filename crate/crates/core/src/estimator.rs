//! Posterior draws of the coefficients and the posterior-median estimate.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::cftp::{cftp_sample, draw_seed, stationary_dominating_counts, CftpConfig, CftpDiagnostics, Problem, Tier, TierThresholds};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rng;
use crate::wavelet::{forward_dwt, inverse_dwt, Signal, WaveletFilter};

/// Mean and variance of a true coefficient given `xi_jk > 0` points at its
/// site and the observed value.
pub fn conditional_moments(xi: u32, dhat: f64, params: &ModelParams<f64>) -> (f64, f64) {
    if xi == 0 {
        return (0.0, 0.0);
    }
    let prior = params.prior_variance(xi);
    let total = params.variance(xi);
    let s2 = params.sigma * params.sigma;
    (prior * dhat / total, s2 * prior / total)
}

/// One draw of every detail coefficient given the tiered counts `xi`.
pub fn sample_d_given_xi(xi: &[u32], problem: &Problem, seed: u64) -> Vec<f64> {
    let params = problem.params();
    let mut rng = rng::stream(seed, &[rng::tag::COEFFICIENTS]);
    problem
        .sites()
        .iter()
        .enumerate()
        .map(|(site, data)| {
            let (mean, var) = match data.tier {
                Tier::Direct => (data.dhat, params.sigma * params.sigma),
                _ => conditional_moments(xi[site], data.dhat, params),
            };
            if var == 0.0 {
                mean
            } else {
                Normal::new(mean, var.sqrt()).expect("finite moments").sample(&mut rng)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraw {
    /// Counts per site: the exact draw at simulated sites, the stationary
    /// dominating count at occupied-assumed sites, 0 at direct sites.
    pub xi: Vec<u32>,
    pub d: Vec<f64>,
    pub diagnostics: CftpDiagnostics,
}

pub fn posterior_draw(problem: &Problem, seed: u64, cfg: &CftpConfig) -> Result<PosteriorDraw> {
    let outcome = cftp_sample(problem, seed, cfg)?;
    let assumed = stationary_dominating_counts(&problem.assumed_rates(), seed);
    let xi: Vec<u32> = outcome
        .config
        .counts()
        .iter()
        .zip(&assumed)
        .map(|(a, b)| a.saturating_add(*b))
        .collect();
    let d = sample_d_given_xi(&xi, problem, seed);
    Ok(PosteriorDraw {
        xi,
        d,
        diagnostics: outcome.diagnostics,
    })
}

/// `n_draws` independent posterior draws, in draw order.
pub fn posterior_draws(problem: &Problem, n_draws: usize, seed: u64, cfg: &CftpConfig) -> Result<Vec<PosteriorDraw>> {
    (0..n_draws as u64)
        .into_par_iter()
        .map(|i| posterior_draw(problem, draw_seed(seed, i), cfg))
        .collect()
}

/// Median of `values`; for an even count, whichever middle value is closer
/// to zero, so a zero on either side of the middle survives.
pub fn thresholding_median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of no values");
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        let (a, b) = (values[n / 2 - 1], values[n / 2]);
        if a.abs() <= b.abs() {
            a
        } else {
            b
        }
    }
}

/// Per-site sample median of the coefficient draws.
pub fn median_of_draws(draws: &[PosteriorDraw]) -> Vec<f64> {
    let sites = draws.first().map_or(0, |d| d.d.len());
    let mut column = Vec::with_capacity(draws.len());
    (0..sites)
        .map(|s| {
            column.clear();
            column.extend(draws.iter().map(|d| d.d[s]));
            thresholding_median(&mut column)
        })
        .collect()
}

pub fn posterior_median_estimate(problem: &Problem, n_draws: usize, seed: u64, cfg: &CftpConfig) -> Result<Vec<f64>> {
    if n_draws == 0 {
        return Err(Error::InvalidParams("need at least one posterior draw".into()));
    }
    let draws = posterior_draws(problem, n_draws, seed, cfg)?;
    Ok(median_of_draws(&draws))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiseConfig {
    pub params: ModelParams<f64>,
    pub n_draws: usize,
    pub seed: u64,
    pub thresholds: TierThresholds,
    pub cftp: CftpConfig,
}

impl DenoiseConfig {
    pub fn new(params: ModelParams<f64>) -> Self {
        Self {
            params,
            n_draws: 25,
            seed: 0,
            thresholds: TierThresholds::for_params(&params),
            cftp: CftpConfig::default(),
        }
    }
}

/// Transform, shrink the details by their posterior median, invert. The
/// scaling coefficient passes through untouched.
pub fn denoise(y: &Signal<f64>, filter: &WaveletFilter<f64>, cfg: &DenoiseConfig) -> Result<Signal<f64>> {
    let dec = forward_dwt(y, filter);
    let problem = Problem::from_details(&dec.detail_flat(), cfg.params, cfg.thresholds)?;
    let estimate = posterior_median_estimate(&problem, cfg.n_draws, cfg.seed, &cfg.cftp)?;
    inverse_dwt(&dec.with_detail_flat(&estimate)?)
}
