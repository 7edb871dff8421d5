//! Cross-coupled upper and lower processes driven by a dominating trajectory.

use super::trajectory::{EventKind, EventTrajectory};
use super::Problem;
use crate::error::{Error, Result};
use crate::lattice::{Configuration, Coverage, Lattice};
use crate::model::{cond_intensity_f4, log_cond_intensity_f3};

/// Slack allowed on log acceptance probabilities for rounding.
const LOG_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Process {
    member: Vec<bool>,
    counts: Vec<u32>,
    coverage: Coverage,
    size: usize,
}

impl Process {
    fn new(problem: &Problem, points: usize) -> Self {
        let lattice = problem.lattice();
        let mut coverage = Coverage::new(lattice.len());
        for (site, &flag) in problem.assumed_occupied().iter().enumerate() {
            if flag {
                coverage.set_occupied(lattice, site, true);
            }
        }
        Self {
            member: vec![false; points],
            counts: vec![0; lattice.len()],
            coverage,
            size: 0,
        }
    }

    fn add(&mut self, lattice: &Lattice, point: usize, site: usize) {
        self.member[point] = true;
        self.counts[site] += 1;
        self.size += 1;
        if self.counts[site] == 1 {
            self.coverage.set_occupied(lattice, site, true);
        }
    }

    fn remove(&mut self, lattice: &Lattice, point: usize, site: usize) -> bool {
        if !self.member[point] {
            return false;
        }
        self.member[point] = false;
        self.counts[site] -= 1;
        self.size -= 1;
        if self.counts[site] == 0 {
            self.coverage.set_occupied(lattice, site, false);
        }
        true
    }

    fn to_configuration(&self, traj: &EventTrajectory) -> Configuration {
        let mut cfg = Configuration::empty(self.counts.len());
        for (i, p) in traj.points().iter().enumerate() {
            if self.member[i] {
                cfg.insert(p.id, p.site).expect("unique ids");
            }
        }
        cfg
    }
}

/// Upper, lower and dominating configurations at time 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingState {
    pub upper: Configuration,
    pub lower: Configuration,
    pub dominating: Configuration,
}

impl CouplingState {
    pub fn coalesced(&self) -> bool {
        self.upper == self.lower
    }

    /// `L ⊆ U ⊆ D` as point-id sets.
    pub fn is_sandwiched(&self) -> bool {
        self.lower.is_subset_of(&self.upper) && self.upper.is_subset_of(&self.dominating)
    }

    pub fn gap(&self) -> usize {
        self.upper.total() - self.lower.total()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    /// Check per-site `L <= U <= D` and funnelling after every event.
    pub verify: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingRun {
    pub state: CouplingState,
    pub events: usize,
    /// Time after which the upper and lower processes agree, if they do at 0.
    pub coalescence_time: Option<f64>,
    /// Birth events whose acceptance pair was checked for ordering.
    pub births_checked: usize,
}

/// Acceptance probabilities `(p_up, p_low)` for a birth at `site`.
///
/// The upper process takes f2 and f4 at the upper state and f3 at the lower
/// state; the lower process the reverse. Each is divided by the site's
/// dominating rate.
fn acceptance(problem: &Problem, site: usize, upper: &Process, lower: &Process) -> Result<(f64, f64)> {
    let lattice = problem.lattice();
    let params = problem.params();
    let data = &problem.sites()[site];
    let ln_gamma = params.gamma.ln();
    let (cu, cl) = (upper.counts[site], lower.counts[site]);
    let d = data.dhat;
    let mu = upper.coverage.uncovered(lattice, site) as f64;
    let ml = lower.coverage.uncovered(lattice, site) as f64;
    let base = params.lambda.ln() - data.log_lambda_dom;
    let log_up = base - mu * ln_gamma + log_cond_intensity_f3(cl, d, params) + cond_intensity_f4(cu, params).ln();
    let log_low = base - ml * ln_gamma + log_cond_intensity_f3(cu, d, params) + cond_intensity_f4(cl, params).ln();
    if log_up > LOG_SLACK || log_low > log_up + LOG_SLACK || log_low.is_nan() {
        return Err(Error::Invariant(format!(
            "acceptance ordering broken at site {site}: log p_up {log_up}, log p_low {log_low}"
        )));
    }
    Ok((log_up.min(0.0).exp(), log_low.min(log_up).min(0.0).exp()))
}

/// Run the coupled processes from `-horizon` to 0.
///
/// The upper process starts as the whole dominating snapshot; the lower one
/// keeps the snapshot points whose mark falls below the site's thinning
/// probability. The same mark then drives every birth decision.
pub fn run_coupled_forward(problem: &Problem, traj: &EventTrajectory, opts: RunOptions) -> Result<CouplingRun> {
    let lattice = problem.lattice();
    let points = traj.points();
    let mut upper = Process::new(problem, points.len());
    let mut lower = Process::new(problem, points.len());
    let mut dom_counts = vec![0u32; lattice.len()];

    for i in traj.snapshot() {
        let p = &points[i];
        upper.add(lattice, i, p.site);
        dom_counts[p.site] += 1;
        if p.mark < problem.sites()[p.site].thin_prob {
            lower.add(lattice, i, p.site);
        }
    }

    let events = traj.events();
    let mut agree_since = (upper.size == lower.size).then_some(-traj.horizon());
    let mut births_checked = 0;
    for e in &events {
        let p = &points[e.point];
        match e.kind {
            EventKind::Birth => {
                let (p_up, p_low) = acceptance(problem, e.site, &upper, &lower)?;
                births_checked += 1;
                if p.mark < p_up {
                    upper.add(lattice, e.point, e.site);
                }
                if p.mark < p_low {
                    lower.add(lattice, e.point, e.site);
                }
                dom_counts[e.site] += 1;
            }
            EventKind::Death => {
                let in_upper = upper.remove(lattice, e.point, e.site);
                let in_lower = lower.remove(lattice, e.point, e.site);
                if in_lower && !in_upper {
                    return Err(Error::Invariant(format!("point {} in lower but not upper", p.id)));
                }
                dom_counts[e.site] -= 1;
            }
        }
        let agree = upper.size == lower.size;
        if opts.verify {
            if agree_since.is_some() && !agree {
                return Err(Error::Invariant(format!("processes split after coalescing at t = {}", e.time)));
            }
            if let Some(site) = (0..lattice.len())
                .find(|&s| lower.counts[s] > upper.counts[s] || upper.counts[s] > dom_counts[s])
            {
                return Err(Error::Invariant(format!("sandwich violated at site {site}, t = {}", e.time)));
            }
        }
        match (agree, agree_since) {
            (true, None) => agree_since = Some(e.time),
            (false, Some(_)) => agree_since = None,
            _ => {}
        }
    }

    let state = CouplingState {
        upper: upper.to_configuration(traj),
        lower: lower.to_configuration(traj),
        dominating: traj.dominating_at(0.0),
    };
    if opts.verify && !state.is_sandwiched() {
        return Err(Error::Invariant("final state not sandwiched".into()));
    }
    Ok(CouplingRun {
        coalescence_time: agree_since,
        state,
        events: events.len(),
        births_checked,
    })
}
