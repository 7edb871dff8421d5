//! Backward-generated trajectory of the dominating birth–death process.
//!
//! The dominating process has birth rate `rate[s]` at site `s` and unit
//! death rate per point, so its stationary law is independent Poisson
//! counts. It is reversible, which lets us generate it backwards from time
//! 0: points alive at 0 have Exp(1) ages, and deaths before 0 form a Poisson
//! stream of rate `rate[s]` whose points have Exp(1) lifetimes.
//!
//! Reverse time is cut into blocks of fixed width, each with its own random
//! stream, so a trajectory extended in several steps is identical to one
//! extended in a single step to the same horizon.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::lattice::Configuration;
use crate::rng::{self, SimRng};

/// One point of the dominating process with its persisted uniform mark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomPoint {
    pub id: u64,
    pub site: usize,
    pub birth: f64,
    /// `f64::INFINITY` when the point is still alive at time 0.
    pub death: f64,
    /// Shared birth mark: decides acceptance into the upper and lower
    /// processes, and membership of the thinned lower start.
    pub mark: f64,
}

impl DomPoint {
    pub fn alive_at(&self, t: f64) -> bool {
        self.birth <= t && t < self.death
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Birth,
    Death,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub site: usize,
    /// Index into [`EventTrajectory::points`].
    pub point: usize,
}

fn poisson_count(rng: &mut SimRng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

/// Independent Poisson(`rates[s]`) counts: the stationary law of the
/// dominating process. Counts saturate at `u32::MAX`.
pub fn stationary_dominating_counts(rates: &[f64], seed: u64) -> Vec<u32> {
    let mut rng = rng::stream(seed, &[rng::tag::DOMINATING]);
    rates
        .iter()
        .map(|&r| poisson_count(&mut rng, r).min(u32::MAX as u64) as u32)
        .collect()
}

/// The stationary dominating draw as a configuration with fresh point ids.
/// Builds one entry per point, so only use it for moderate rates.
pub fn sample_stationary_dominating(rates: &[f64], seed: u64) -> Configuration {
    Configuration::from_counts(&stationary_dominating_counts(rates, seed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventTrajectory {
    seed: u64,
    block_width: f64,
    rates: Vec<f64>,
    points: Vec<DomPoint>,
    blocks: u64,
    horizon: f64,
}

impl EventTrajectory {
    /// Draw the dominating state at time 0; horizon starts at 0.
    pub fn new(rates: Vec<f64>, seed: u64, block_width: f64) -> Self {
        assert!(block_width > 0.0, "block width must be positive");
        let mut traj = Self {
            seed,
            block_width,
            rates,
            points: Vec::new(),
            blocks: 0,
            horizon: 0.0,
        };
        let mut rng = rng::stream(seed, &[rng::tag::TRAJECTORY, 0]);
        for site in 0..traj.rates.len() {
            for _ in 0..poisson_count(&mut rng, traj.rates[site]) {
                let age: f64 = rng.sample(Exp1);
                let mark = rng.random::<f64>();
                traj.push(site, -age, f64::INFINITY, mark);
            }
        }
        traj
    }

    fn push(&mut self, site: usize, birth: f64, death: f64, mark: f64) {
        let id = self.points.len() as u64;
        self.points.push(DomPoint {
            id,
            site,
            birth,
            death,
            mark,
        });
    }

    fn generate_block(&mut self, block: u64) {
        let w = self.block_width;
        let start = (block - 1) as f64 * w;
        let mut rng = rng::stream(self.seed, &[rng::tag::TRAJECTORY, block]);
        for site in 0..self.rates.len() {
            for _ in 0..poisson_count(&mut rng, self.rates[site] * w) {
                let death = -(start + rng.random::<f64>() * w);
                let life: f64 = rng.sample(Exp1);
                let mark = rng.random::<f64>();
                self.push(site, death - life, death, mark);
            }
        }
    }

    /// Extend the trajectory back to `-new_horizon`. Existing points and
    /// marks are never touched.
    pub fn extend_backward(&mut self, new_horizon: f64) {
        assert!(new_horizon >= self.horizon, "horizon can only grow");
        while (self.blocks as f64) * self.block_width < new_horizon {
            self.blocks += 1;
            self.generate_block(self.blocks);
        }
        self.horizon = new_horizon;
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn points(&self) -> &[DomPoint] {
        &self.points
    }

    /// Indices of points alive at `-horizon`.
    pub fn snapshot(&self) -> Vec<usize> {
        let t = -self.horizon;
        (0..self.points.len()).filter(|&i| self.points[i].alive_at(t)).collect()
    }

    /// Births and deaths on `(-horizon, 0]`, in time order.
    pub fn events(&self) -> Vec<Event> {
        let t = -self.horizon;
        let mut events = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            if p.birth > t {
                events.push(Event {
                    time: p.birth,
                    kind: EventKind::Birth,
                    site: p.site,
                    point: i,
                });
            }
            if p.death > t && p.death <= 0.0 {
                events.push(Event {
                    time: p.death,
                    kind: EventKind::Death,
                    site: p.site,
                    point: i,
                });
            }
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        events
    }

    /// Dominating configuration at time `t <= 0`.
    pub fn dominating_at(&self, t: f64) -> Configuration {
        let mut cfg = Configuration::empty(self.rates.len());
        for p in self.points.iter().filter(|p| p.alive_at(t)) {
            cfg.insert(p.id, p.site).expect("unique ids");
        }
        cfg
    }

    /// Replay the events from the `-horizon` snapshot; must reproduce
    /// `dominating_at(0)`.
    pub fn replay(&self) -> Configuration {
        let mut cfg = Configuration::empty(self.rates.len());
        for i in self.snapshot() {
            let p = &self.points[i];
            cfg.insert(p.id, p.site).expect("unique ids");
        }
        for e in self.events() {
            let p = &self.points[e.point];
            match e.kind {
                EventKind::Birth => cfg.insert(p.id, p.site).expect("born once"),
                EventKind::Death => {
                    cfg.remove(p.id).expect("dies after birth");
                }
            }
        }
        cfg
    }
}
