//! Area-interaction prior on the coefficient lattice and the posterior of
//! the lattice process with the coefficients integrated out.
//!
//! The unnormalized posterior factorizes as `f1 f2 f3 f4` with
//!
//! ```text
//! f1 = lambda^N(xi)
//! f2 = gamma^-m{U(xi)}
//! f3 = prod exp{-dhat^2 / 2 v(xi_jk)}
//! f4 = prod {2 pi v(xi_jk)}^-1/2,     v(x) = sigma^2 + tau^2 x^z
//! ```
//!
//! and each factor has a bounded, monotone conditional intensity. All
//! densities are relative to the unit-rate Poisson counting process.

use crate::error::{Error, Result};
use crate::lattice::{self, Configuration, Coverage, Lattice, LatticeIndex};
use crate::scalar::Real;
use crate::wavelet::WaveletDecomposition;

/// Largest count scanned when validating monotonicity for `z != 1`.
const MONOTONE_SCAN: u32 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    pub lambda: T,
    pub gamma: T,
    pub tau: T,
    pub sigma: T,
    pub z: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(lambda: T, gamma: T, tau: T, sigma: T) -> Result<Self> {
        Self::with_z(lambda, gamma, tau, sigma, T::one())
    }

    pub fn with_z(lambda: T, gamma: T, tau: T, sigma: T, z: T) -> Result<Self> {
        let p = Self {
            lambda,
            gamma,
            tau,
            sigma,
            z,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters used throughout the reference simulation study.
    pub fn study(sigma: T) -> Result<Self> {
        Self::new(T::c(0.05), T::c(3.0), T::one(), sigma)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.lambda, self.gamma, self.tau, self.sigma, self.z]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParams("non-finite model parameter".into()));
        }
        if !(self.gamma > T::one()) {
            return Err(Error::InvalidParams(format!("gamma must exceed 1, got {}", self.gamma)));
        }
        for (name, v) in [("lambda", self.lambda), ("tau", self.tau), ("sigma", self.sigma), ("z", self.z)] {
            if !(v > T::zero()) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if self.z != T::one() {
            self.check_monotone()?;
        }
        Ok(())
    }

    /// With `z != 1` the f3 and f4 intensities can lose monotonicity, which
    /// the coupled sampler relies on; such parameter sets are rejected.
    fn check_monotone(&self) -> Result<()> {
        let mut prev_f3 = self.f3_shape(0);
        let mut prev_f4 = cond_intensity_f4(0, self);
        for x in 1..=MONOTONE_SCAN {
            let f3 = self.f3_shape(x);
            let f4 = cond_intensity_f4(x, self);
            if f3 > prev_f3 * T::c(1.0 + 1e-12) || f4 < prev_f4 * T::c(1.0 - 1e-12) {
                return Err(Error::InvalidParams(format!(
                    "z = {} makes the conditional intensities non-monotone at count {x}",
                    self.z
                )));
            }
            prev_f3 = f3;
            prev_f4 = f4;
        }
        Ok(())
    }

    /// `log f3` per unit of `dhat^2`.
    fn f3_shape(&self, xi: u32) -> T {
        let tau2 = self.tau * self.tau;
        let grow = self.power(xi + 1) - self.power(xi);
        tau2 * grow / (T::c(2.0) * self.variance(xi) * self.variance(xi + 1))
    }

    fn power(&self, xi: u32) -> T {
        let x = T::c(xi as f64);
        if self.z == T::one() {
            x
        } else {
            x.powf(self.z)
        }
    }

    /// `sigma^2 + tau^2 xi^z`, the marginal variance of an observed coefficient.
    pub fn variance(&self, xi: u32) -> T {
        self.sigma * self.sigma + self.tau * self.tau * self.power(xi)
    }

    /// Prior variance `tau^2 xi^z` of the true coefficient.
    pub fn prior_variance(&self, xi: u32) -> T {
        self.tau * self.tau * self.power(xi)
    }
}

pub fn cond_intensity_f1<T: Real>(params: &ModelParams<T>) -> T {
    params.lambda
}

/// `gamma^-m` for `m` uncovered neighbourhood sites.
pub fn f2_from_uncovered<T: Real>(uncovered: usize, params: &ModelParams<T>) -> T {
    params.gamma.powi(-(uncovered as i32))
}

/// `gamma^-m{B(u) \ U(xi)}`; sites flagged in `assumed_occupied` count as
/// occupied whatever their count in `xi`.
pub fn cond_intensity_f2<T: Real>(
    lattice: &Lattice,
    u: LatticeIndex,
    xi: &Configuration,
    params: &ModelParams<T>,
    assumed_occupied: Option<&[bool]>,
) -> T {
    let mut cov = Coverage::from_configuration(lattice, xi);
    if let Some(flags) = assumed_occupied {
        for (site, _) in flags.iter().enumerate().filter(|(_, &f)| f) {
            cov.set_occupied(lattice, site, true);
        }
    }
    f2_from_uncovered(cov.uncovered(lattice, u.flat()), params)
}

pub fn log_cond_intensity_f3<T: Real>(xi_u: u32, dhat_u: T, params: &ModelParams<T>) -> T {
    dhat_u * dhat_u * params.f3_shape(xi_u)
}

pub fn cond_intensity_f3<T: Real>(xi_u: u32, dhat_u: T, params: &ModelParams<T>) -> T {
    log_cond_intensity_f3(xi_u, dhat_u, params).exp()
}

/// `log` of the f3 bound, attained at an empty site.
pub fn log_f3_bound<T: Real>(dhat_u: T, params: &ModelParams<T>) -> T {
    let s2 = params.sigma * params.sigma;
    let t2 = params.tau * params.tau;
    dhat_u * dhat_u * t2 / (T::c(2.0) * s2 * (t2 + s2))
}

pub fn cond_intensity_f4<T: Real>(xi_u: u32, params: &ModelParams<T>) -> T {
    (params.variance(xi_u) / params.variance(xi_u + 1)).sqrt()
}

pub fn log_dominating_rate<T: Real>(dhat_u: T, params: &ModelParams<T>) -> T {
    params.lambda.ln() + log_f3_bound(dhat_u, params)
}

/// Per-site birth rate of the dominating process, `lambda` times the f3
/// bound. Saturates at the largest finite value instead of overflowing.
pub fn dominating_rate<T: Real>(dhat_u: T, params: &ModelParams<T>) -> T {
    let r = params.lambda * log_f3_bound(dhat_u, params).exp();
    if r.is_finite() {
        r
    } else {
        T::max_value()
    }
}

/// Acceptance probability for thinning the dominating process into the
/// initial lower process: the product of per-factor minima over `lambda_dom`.
pub fn lower_thinning_prob<T: Real>(dhat_u: T, params: &ModelParams<T>, max_measure: usize) -> T {
    let s2 = params.sigma * params.sigma;
    let t2 = params.tau * params.tau;
    let log_p = -T::c(max_measure as f64) * params.gamma.ln() + T::c(0.5) * (s2 / (s2 + t2)).ln()
        - log_f3_bound(dhat_u, params);
    log_p.exp()
}

/// Unnormalized log posterior of the lattice process given the observed
/// details (`dhat` in flat site order).
pub fn log_marginal_posterior(
    lattice: &Lattice,
    xi: &Configuration,
    dhat: &[f64],
    params: &ModelParams<f64>,
) -> f64 {
    let n = xi.total() as f64;
    let m = lattice::coverage_measure(lattice, xi) as f64;
    let mut lp = n * params.lambda.ln() - m * params.gamma.ln();
    for (site, &d) in dhat.iter().enumerate() {
        let v = params.variance(xi.count(site));
        lp += -d * d / (2.0 * v) - 0.5 * (2.0 * std::f64::consts::PI * v).ln();
    }
    lp
}

/// `log` of the product of the four conditional intensities for a birth at
/// `u`; equals the log density ratio `p(xi + u) / p(xi)`.
pub fn log_birth_intensity(
    lattice: &Lattice,
    u: LatticeIndex,
    xi: &Configuration,
    dhat: &[f64],
    params: &ModelParams<f64>,
) -> f64 {
    let site = u.flat();
    let c = xi.count(site);
    cond_intensity_f1(params).ln()
        + cond_intensity_f2(lattice, u, xi, params, None).ln()
        + log_cond_intensity_f3(c, dhat[site], params)
        + cond_intensity_f4(c, params).ln()
}

/// Median absolute finest-level detail over 0.6745.
pub fn estimate_sigma_mad<T: Real>(dec: &WaveletDecomposition<T>) -> Result<T> {
    let finest = dec.level(dec.levels() - 1);
    let mut abs: Vec<T> = finest.iter().map(|x| x.abs()).collect();
    abs.sort_by(|a, b| a.partial_cmp(b).expect("finite coefficients"));
    let n = abs.len();
    let median = if n % 2 == 1 {
        abs[n / 2]
    } else {
        (abs[n / 2 - 1] + abs[n / 2]) / T::c(2.0)
    };
    if !(median > T::zero()) {
        return Err(Error::Degenerate("finest-level details have zero median magnitude".into()));
    }
    Ok(median / T::c(0.6745))
}
