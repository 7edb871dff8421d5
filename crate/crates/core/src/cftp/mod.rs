//! Dominated coupling from the past for the lattice posterior.
//!
//! Each site gets its own dominating birth rate `lambda * max f3`, and the
//! upper/lower processes are thinned from the dominating trajectory with
//! cross-coupled acceptance probabilities. Sites whose dominating rate is
//! too large to simulate are tiered out: they count as permanently occupied
//! for the interaction term, and their coefficients are handled by the
//! estimator.

mod coupling;
mod trajectory;

pub use coupling::{run_coupled_forward, CouplingRun, CouplingState, RunOptions};
pub use trajectory::{sample_stationary_dominating, stationary_dominating_counts, DomPoint, Event, EventKind, EventTrajectory};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Configuration, Lattice};
use crate::model::{log_dominating_rate, lower_thinning_prob, ModelParams};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tier {
    /// Enters the birth–death simulation.
    Simulated,
    /// Assumed occupied; count taken from the stationary dominating draw.
    OccupiedAssumed,
    /// Assumed occupied; coefficient drawn from N(dhat, sigma^2).
    Direct,
}

/// Dominating-rate cut-offs separating the tiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierThresholds {
    pub t1: f64,
    pub t2: f64,
}

/// Default `t1` as a multiple of the prior intensity: a site is tiered out
/// once its data term pushes the dominating rate past `lambda * e^4`.
pub const DEFAULT_T1_FACTOR_LOG: f64 = 4.0;
pub const DEFAULT_T2_LOG: f64 = 20.0;

impl TierThresholds {
    /// Default cut-offs for `params`: `t1 = lambda * e^4`, `t2 = e^20`.
    pub fn for_params(params: &ModelParams<f64>) -> Self {
        Self::for_lambda(params.lambda)
    }

    pub fn for_lambda(lambda: f64) -> Self {
        let t2 = DEFAULT_T2_LOG.exp();
        Self {
            t1: (lambda * DEFAULT_T1_FACTOR_LOG.exp()).min(t2),
            t2,
        }
    }

    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        if !(t1 > 0.0 && t1 < t2) {
            return Err(Error::InvalidParams(format!("need 0 < t1 < t2, got t1={t1}, t2={t2}")));
        }
        Ok(Self { t1, t2 })
    }

    /// No tiering at all: every site is simulated.
    pub fn unlimited() -> Self {
        Self {
            t1: f64::INFINITY,
            t2: f64::INFINITY,
        }
    }

    pub fn classify(&self, log_lambda_dom: f64) -> Tier {
        if log_lambda_dom <= self.t1.ln() {
            Tier::Simulated
        } else if log_lambda_dom <= self.t2.ln() {
            Tier::OccupiedAssumed
        } else {
            Tier::Direct
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteData {
    pub dhat: f64,
    pub log_lambda_dom: f64,
    pub thin_prob: f64,
    pub tier: Tier,
}

impl SiteData {
    pub fn lambda_dom(&self) -> f64 {
        let r = self.log_lambda_dom.exp();
        if r.is_finite() {
            r
        } else {
            f64::MAX
        }
    }
}

pub fn classify_sites(dhat: &[f64], params: &ModelParams<f64>, thresholds: &TierThresholds) -> Vec<Tier> {
    dhat.iter()
        .map(|&d| thresholds.classify(log_dominating_rate(d, params)))
        .collect()
}

/// Observed details on a lattice with model parameters and tiering.
#[derive(Debug, Clone)]
pub struct Problem {
    lattice: Lattice,
    params: ModelParams<f64>,
    sites: Vec<SiteData>,
    assumed_occupied: Vec<bool>,
}

impl Problem {
    pub fn new(lattice: Lattice, dhat: &[f64], params: ModelParams<f64>, thresholds: TierThresholds) -> Result<Self> {
        if dhat.len() != lattice.len() {
            return Err(Error::LengthMismatch {
                expected: lattice.len(),
                got: dhat.len(),
            });
        }
        if let Some(d) = dhat.iter().find(|d| !d.is_finite()) {
            return Err(Error::Degenerate(format!("non-finite coefficient {d}")));
        }
        let m = lattice.max_measure();
        let sites: Vec<SiteData> = dhat
            .iter()
            .map(|&d| {
                let log_lambda_dom = log_dominating_rate(d, &params);
                SiteData {
                    dhat: d,
                    log_lambda_dom,
                    thin_prob: lower_thinning_prob(d, &params, m),
                    tier: thresholds.classify(log_lambda_dom),
                }
            })
            .collect();
        let assumed_occupied = sites.iter().map(|s| s.tier != Tier::Simulated).collect();
        Ok(Self {
            lattice,
            params,
            sites,
            assumed_occupied,
        })
    }

    /// Problem on the lattice matching a detail vector of length `2^J - 1`.
    pub fn from_details(dhat: &[f64], params: ModelParams<f64>, thresholds: TierThresholds) -> Result<Self> {
        let depth = (dhat.len() + 1).trailing_zeros() as usize;
        if (1usize << depth) != dhat.len() + 1 {
            return Err(Error::Structure(format!("{} details do not fill a binary tree", dhat.len())));
        }
        Self::new(Lattice::new(depth)?, dhat, params, thresholds)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn params(&self) -> &ModelParams<f64> {
        &self.params
    }

    pub fn sites(&self) -> &[SiteData] {
        &self.sites
    }

    pub fn tiers(&self) -> Vec<Tier> {
        self.sites.iter().map(|s| s.tier).collect()
    }

    pub fn dhat(&self) -> Vec<f64> {
        self.sites.iter().map(|s| s.dhat).collect()
    }

    pub fn assumed_occupied(&self) -> &[bool] {
        &self.assumed_occupied
    }

    /// Birth rates of the simulated part of the dominating process.
    pub fn simulated_rates(&self) -> Vec<f64> {
        self.sites
            .iter()
            .map(|s| if s.tier == Tier::Simulated { s.lambda_dom() } else { 0.0 })
            .collect()
    }

    /// Dominating rates at `OccupiedAssumed` sites, zero elsewhere.
    pub fn assumed_rates(&self) -> Vec<f64> {
        self.sites
            .iter()
            .map(|s| if s.tier == Tier::OccupiedAssumed { s.lambda_dom() } else { 0.0 })
            .collect()
    }

    pub fn census(&self) -> TierCensus {
        let mut c = TierCensus::default();
        for s in &self.sites {
            match s.tier {
                Tier::Simulated => c.simulated += 1,
                Tier::OccupiedAssumed => c.occupied_assumed += 1,
                Tier::Direct => c.direct += 1,
            }
        }
        c
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TierCensus {
    pub simulated: usize,
    pub occupied_assumed: usize,
    pub direct: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CftpConfig {
    pub t0: f64,
    pub max_doublings: u32,
    /// Give up early once the stored trajectory holds this many points.
    pub max_points: usize,
    pub verify: bool,
}

impl Default for CftpConfig {
    fn default() -> Self {
        Self {
            t0: 1.0,
            max_doublings: 20,
            max_points: 10_000_000,
            verify: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CftpDiagnostics {
    pub horizon: f64,
    pub doublings: u32,
    /// Events replayed in the successful run.
    pub events: usize,
    /// Events replayed over all attempts.
    pub total_events: usize,
    pub births_checked: usize,
    pub coalescence_time: f64,
    pub census: TierCensus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CftpOutcome {
    /// Exact draw over the simulated sites; tiered-out sites hold no points.
    pub config: Configuration,
    pub diagnostics: CftpDiagnostics,
}

/// Draw one configuration from the lattice posterior, doubling the horizon
/// until the upper and lower processes coalesce at time 0.
pub fn cftp_sample(problem: &Problem, seed: u64, cfg: &CftpConfig) -> Result<CftpOutcome> {
    if !(cfg.t0 > 0.0) {
        return Err(Error::InvalidParams(format!("initial horizon must be positive, got {}", cfg.t0)));
    }
    let mut traj = EventTrajectory::new(problem.simulated_rates(), seed, cfg.t0);
    let opts = RunOptions { verify: cfg.verify };
    let mut horizon = cfg.t0;
    let mut total_events = 0;
    let mut births_checked = 0;
    let mut doublings = 0;
    loop {
        traj.extend_backward(horizon);
        let run = run_coupled_forward(problem, &traj, opts)?;
        total_events += run.events;
        births_checked += run.births_checked;
        if run.state.coalesced() {
            let diagnostics = CftpDiagnostics {
                horizon,
                doublings,
                events: run.events,
                total_events,
                births_checked,
                coalescence_time: run.coalescence_time.unwrap_or(0.0),
                census: problem.census(),
            };
            log::debug!(
                target: "aibt::cftp",
                "cftp seed={seed} horizon={horizon} doublings={doublings} events={} total_events={total_events} coalescence_time={} simulated={} occupied_assumed={} direct={}",
                run.events,
                diagnostics.coalescence_time,
                diagnostics.census.simulated,
                diagnostics.census.occupied_assumed,
                diagnostics.census.direct,
            );
            return Ok(CftpOutcome {
                config: run.state.upper,
                diagnostics,
            });
        }
        if doublings == cfg.max_doublings || traj.points().len() >= cfg.max_points {
            return Err(Error::NoCoalescence {
                doublings,
                horizon,
                gap: run.state.gap(),
            });
        }
        doublings += 1;
        horizon *= 2.0;
    }
}

/// Seed for the `index`-th posterior draw under a root seed.
pub fn draw_seed(root: u64, index: u64) -> u64 {
    rng::path_seed(root, &[rng::tag::DRAW, index])
}
