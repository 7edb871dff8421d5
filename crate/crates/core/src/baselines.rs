//! Comparator estimators: universal soft thresholding, SureShrink,
//! independent-prior BayesThresh and Benjamini–Hochberg FDR thresholding.
//! Every rule maps a decomposition to a decomposition with the scaling
//! coefficient left alone.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::scalar::Real;
use crate::wavelet::WaveletDecomposition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdKind {
    Hard,
    Soft,
}

pub fn soft<T: Real>(x: T, t: T) -> T {
    let m = x.abs() - t;
    if m > T::zero() {
        m.copysign(x)
    } else {
        T::zero()
    }
}

pub fn hard<T: Real>(x: T, t: T) -> T {
    if x.abs() > t {
        x
    } else {
        T::zero()
    }
}

/// Level-wise thresholds (coarsest level first).
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRule<T> {
    pub kind: ThresholdKind,
    pub thresholds: Vec<T>,
}

impl<T: Real> ThresholdRule<T> {
    pub fn apply(&self, dec: &WaveletDecomposition<T>) -> WaveletDecomposition<T> {
        assert_eq!(self.thresholds.len(), dec.levels(), "one threshold per level");
        let mut out = dec.clone();
        for (j, &t) in self.thresholds.iter().enumerate() {
            for x in out.level_mut(j) {
                *x = match self.kind {
                    ThresholdKind::Hard => hard(*x, t),
                    ThresholdKind::Soft => soft(*x, t),
                };
            }
        }
        out
    }
}

fn std_normal() -> Normal {
    Normal::standard()
}

/// `sigma * sqrt(2 ln n)` for a signal of length `n`.
pub fn universal_threshold_value<T: Real>(n: usize, sigma: T) -> T {
    sigma * T::c((2.0 * (n as f64).ln()).sqrt())
}

/// Soft thresholding of every detail level at the universal threshold.
pub fn universal_threshold<T: Real>(dec: &WaveletDecomposition<T>, sigma: T) -> WaveletDecomposition<T> {
    let t = universal_threshold_value(dec.signal_len(), sigma);
    ThresholdRule {
        kind: ThresholdKind::Soft,
        thresholds: vec![t; dec.levels()],
    }
    .apply(dec)
}

/// Stein's unbiased risk estimate of soft thresholding unit-variance data
/// at `t`.
pub fn sure_risk(x: &[f64], t: f64) -> f64 {
    let d = x.len() as f64;
    let below = x.iter().filter(|v| v.abs() <= t).count() as f64;
    d - 2.0 * below + x.iter().map(|v| v.abs().min(t).powi(2)).sum::<f64>()
}

/// SURE-minimizing threshold for unit-variance data, searched over the
/// data magnitudes below `sqrt(2 ln d)` (and 0).
pub fn sure_minimizer(x: &[f64]) -> f64 {
    let d = x.len();
    let cap = (2.0 * (d as f64).ln()).sqrt();
    let mut sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    sq.sort_by(f64::total_cmp);
    let (mut best_t, mut best_risk) = (0.0, d as f64 - 2.0 * sq.iter().filter(|&&s| s == 0.0).count() as f64);
    let mut cum = 0.0;
    for (k, &s) in sq.iter().enumerate() {
        let t = s.sqrt();
        if t > cap {
            break;
        }
        cum += s;
        let risk = d as f64 - 2.0 * (k + 1) as f64 + cum + (d - k - 1) as f64 * s;
        if risk < best_risk {
            best_risk = risk;
            best_t = t;
        }
    }
    best_t
}

/// Level-wise SureShrink with the hybrid rule: sparse levels (by the
/// `(log2 d)^{3/2} / sqrt(d)` test) use the level's universal threshold.
/// Single-coefficient levels use the global universal threshold.
pub fn sure_shrink_rule<T: Real>(dec: &WaveletDecomposition<T>, sigma: T) -> ThresholdRule<T> {
    let s = sigma.f64();
    let global = universal_threshold_value(dec.signal_len(), s);
    let thresholds = (0..dec.levels())
        .map(|j| {
            let x: Vec<f64> = dec.level(j).iter().map(|v| v.f64() / s).collect();
            let d = x.len() as f64;
            if x.len() < 2 {
                return T::c(global);
            }
            let energy = (x.iter().map(|v| v * v).sum::<f64>() - d) / d;
            let sparsity = d.log2().powf(1.5) / d.sqrt();
            let t = if energy <= sparsity {
                (2.0 * d.ln()).sqrt()
            } else {
                sure_minimizer(&x)
            };
            T::c(t * s)
        })
        .collect();
    ThresholdRule {
        kind: ThresholdKind::Soft,
        thresholds,
    }
}

pub fn sure_shrink<T: Real>(dec: &WaveletDecomposition<T>, sigma: T) -> WaveletDecomposition<T> {
    sure_shrink_rule(dec, sigma).apply(dec)
}

/// Posterior median of `d` under `d ~ pi N(0, tau^2) + (1 - pi) delta_0`
/// observed as `dhat ~ N(d, sigma^2)`.
pub fn bayes_posterior_median(dhat: f64, sigma: f64, pi: f64, tau: f64) -> f64 {
    if pi <= 0.0 || tau <= 0.0 {
        return 0.0;
    }
    let s2 = sigma * sigma;
    let t2 = tau * tau;
    let mean = t2 * dhat / (s2 + t2);
    let sd = (s2 * t2 / (s2 + t2)).sqrt();
    if pi >= 1.0 {
        return mean;
    }
    // Posterior odds of the slab, computed in logs for stability.
    let log_slab = pi.ln() - 0.5 * (s2 + t2).ln() - dhat * dhat / (2.0 * (s2 + t2));
    let log_spike = (1.0 - pi).ln() - 0.5 * s2.ln() - dhat * dhat / (2.0 * s2);
    let odds = (log_spike - log_slab).exp();
    let q = 0.5 * (1.0 + odds.min(1.0));
    let shrunk = mean.abs() - sd * std_normal().inverse_cdf(q);
    if shrunk > 0.0 {
        shrunk.copysign(dhat)
    } else {
        0.0
    }
}

/// Level-dependent prior `tau_j^2 = c1 2^{-alpha j}`, `pi_j = min(1, c2 2^{-beta j})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesThreshPrior {
    pub alpha: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
}

impl BayesThreshPrior {
    pub const DEFAULT_ALPHA: f64 = 0.5;
    pub const DEFAULT_BETA: f64 = 1.0;

    pub fn pi(&self, j: usize) -> f64 {
        (self.c2 * 2f64.powf(-self.beta * j as f64)).min(1.0)
    }

    pub fn tau(&self, j: usize) -> f64 {
        (self.c1 * 2f64.powf(-self.alpha * j as f64)).sqrt()
    }

    fn log_likelihood<T: Real>(&self, dec: &WaveletDecomposition<T>, sigma: f64) -> f64 {
        let s2 = sigma * sigma;
        let mut ll = 0.0;
        for j in 0..dec.levels() {
            let pi = self.pi(j);
            let v = s2 + self.tau(j).powi(2);
            for d in dec.level(j) {
                let d = d.f64();
                let slab = pi * (-d * d / (2.0 * v)).exp() / v.sqrt();
                let spike = (1.0 - pi) * (-d * d / (2.0 * s2)).exp() / sigma;
                ll += (slab + spike).max(f64::MIN_POSITIVE).ln();
            }
        }
        ll
    }

    /// Empirical Bayes fit of `(c1, c2)` by maximizing the marginal
    /// likelihood of the details: a log-scale grid search followed by
    /// alternating golden-section refinement.
    pub fn fit<T: Real>(dec: &WaveletDecomposition<T>, sigma: T) -> Self {
        let sigma = sigma.f64();
        let mut best = Self {
            alpha: Self::DEFAULT_ALPHA,
            beta: Self::DEFAULT_BETA,
            c1: 1.0,
            c2: 1.0,
        };
        let mut best_ll = f64::NEG_INFINITY;
        for a in -40..=16 {
            for b in -24..=24 {
                let cand = Self {
                    c1: 2f64.powf(a as f64 * 0.5),
                    c2: 2f64.powf(b as f64 * 0.5),
                    ..best
                };
                let ll = cand.log_likelihood(dec, sigma);
                if ll > best_ll {
                    best_ll = ll;
                    best = cand;
                }
            }
        }
        for _ in 0..4 {
            let c1 = golden_max(best.c1.log2() - 0.5, best.c1.log2() + 0.5, |x| {
                Self { c1: 2f64.powf(x), ..best }.log_likelihood(dec, sigma)
            });
            best.c1 = 2f64.powf(c1);
            let c2 = golden_max(best.c2.log2() - 0.5, best.c2.log2() + 0.5, |x| {
                Self { c2: 2f64.powf(x), ..best }.log_likelihood(dec, sigma)
            });
            best.c2 = 2f64.powf(c2);
        }
        best
    }
}

fn golden_max(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..40 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

/// Per-coefficient posterior median with level-wise `pi_j` and `tau_j`.
pub fn bayes_thresh_independent<T: Real>(
    dec: &WaveletDecomposition<T>,
    sigma: T,
    pi: &[T],
    tau: &[T],
) -> WaveletDecomposition<T> {
    assert!(pi.len() == dec.levels() && tau.len() == dec.levels(), "one prior per level");
    let mut out = dec.clone();
    for j in 0..dec.levels() {
        let (p, t) = (pi[j].f64(), tau[j].f64());
        for x in out.level_mut(j) {
            *x = T::c(bayes_posterior_median(x.f64(), sigma.f64(), p, t));
        }
    }
    out
}

/// BayesThresh with the prior fitted by [`BayesThreshPrior::fit`].
pub fn bayes_thresh<T: Real>(dec: &WaveletDecomposition<T>, sigma: T) -> WaveletDecomposition<T> {
    let prior = BayesThreshPrior::fit(dec, sigma);
    let pi: Vec<T> = (0..dec.levels()).map(|j| T::c(prior.pi(j))).collect();
    let tau: Vec<T> = (0..dec.levels()).map(|j| T::c(prior.tau(j))).collect();
    bayes_thresh_independent(dec, sigma, &pi, &tau)
}

pub const DEFAULT_FDR_Q: f64 = 0.05;

/// Benjamini–Hochberg step-up on two-sided p-values of `dhat / sigma` over
/// all details; rejected coefficients are kept, the rest zeroed.
pub fn fdr_threshold<T: Real>(dec: &WaveletDecomposition<T>, sigma: T, q: f64) -> WaveletDecomposition<T> {
    let s = sigma.f64();
    let norm = std_normal();
    let mut mags: Vec<f64> = dec.detail_flat().iter().map(|d| d.f64().abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let m = mags.len() as f64;
    let cutoff = mags
        .iter()
        .enumerate()
        .filter(|(i, &a)| 2.0 * norm.sf(a / s) <= (*i as f64 + 1.0) * q / m)
        .map(|(_, &a)| a)
        .next_back();
    let mut out = dec.clone();
    for j in 0..dec.levels() {
        for x in out.level_mut(j) {
            let keep = cutoff.is_some_and(|c| x.f64().abs() >= c && c > 0.0);
            if !keep {
                *x = T::zero();
            }
        }
    }
    out
}
