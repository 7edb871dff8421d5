//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the library's model or lattice code.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Neighbourhood of `(j, k)` on a tree with `depth` levels, rebuilt from the
/// verbal rule: self, parent, the parent's neighbour on the side of `k`,
/// both siblings, and the four children `2k-1..=2k+2`, all periodic.
pub fn oracle_neighbourhood(j: usize, k: usize, depth: usize) -> BTreeSet<(usize, usize)> {
    let wrap = |level: usize, i: i64| -> (usize, usize) {
        let w = 1i64 << level;
        (level, i.rem_euclid(w) as usize)
    };
    let k = k as i64;
    let mut set = BTreeSet::new();
    set.insert((j, k as usize));
    set.insert(wrap(j, k - 1));
    set.insert(wrap(j, k + 1));
    if j > 0 {
        set.insert(wrap(j - 1, k / 2));
        let side = if k % 2 == 0 { k / 2 - 1 } else { k / 2 + 1 };
        set.insert(wrap(j - 1, side));
    }
    if j + 1 < depth {
        for c in [2 * k - 1, 2 * k, 2 * k + 1, 2 * k + 2] {
            set.insert(wrap(j + 1, c));
        }
    }
    set
}

pub fn flat(j: usize, k: usize) -> usize {
    (1 << j) - 1 + k
}

pub fn unflat(s: usize) -> (usize, usize) {
    let j = (usize::BITS - 1 - (s + 1).leading_zeros()) as usize;
    (j, s + 1 - (1 << j))
}

/// Area of the union of neighbourhoods of occupied sites.
pub fn oracle_coverage(counts: &[u32], depth: usize) -> usize {
    let mut union = BTreeSet::new();
    for (s, &c) in counts.iter().enumerate() {
        if c > 0 {
            let (j, k) = unflat(s);
            union.extend(oracle_neighbourhood(j, k, depth));
        }
    }
    union.len()
}

#[derive(Debug, Clone, Copy)]
pub struct OracleParams {
    pub lambda: f64,
    pub gamma: f64,
    pub tau: f64,
    pub sigma: f64,
    pub z: f64,
}

impl OracleParams {
    pub fn new(lambda: f64, gamma: f64, tau: f64, sigma: f64) -> Self {
        Self { lambda, gamma, tau, sigma, z: 1.0 }
    }

    pub fn var(&self, xi: u32) -> f64 {
        self.sigma * self.sigma + self.tau * self.tau * (xi as f64).powf(self.z)
    }
}

pub fn log_normal_pdf(x: f64, var: f64) -> f64 {
    -0.5 * (2.0 * PI * var).ln() - x * x / (2.0 * var)
}

/// Unnormalized log density of counts with respect to the unit-rate Poisson
/// reference (no factorial term).
pub fn oracle_log_density(counts: &[u32], dhat: &[f64], p: &OracleParams, depth: usize) -> f64 {
    let n: u32 = counts.iter().sum();
    let m = oracle_coverage(counts, depth) as f64;
    let mut lp = n as f64 * p.lambda.ln() - m * p.gamma.ln();
    for (s, &d) in dhat.iter().enumerate() {
        lp += log_normal_pdf(d, p.var(counts[s]));
    }
    lp
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

/// Normalized probabilities of every count vector with each count at most
/// `cap`, including the `1/xi!` weight of the counting reference.
pub fn enumerate_counts(dhat: &[f64], p: &OracleParams, depth: usize, cap: u32) -> Vec<(Vec<u32>, f64)> {
    let sites = dhat.len();
    let mut states = Vec::new();
    let mut counts = vec![0u32; sites];
    loop {
        let lw = oracle_log_density(&counts, dhat, p, depth) - counts.iter().map(|&c| ln_factorial(c)).sum::<f64>();
        states.push((counts.clone(), lw));
        let mut i = 0;
        loop {
            if i == sites {
                let max = states.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
                let z: f64 = states.iter().map(|s| (s.1 - max).exp()).sum();
                return states.into_iter().map(|(c, lw)| (c, (lw - max).exp() / z)).collect();
            }
            if counts[i] < cap {
                counts[i] += 1;
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

/// Occupancy pattern as a bitmask over sites.
pub fn pattern(counts: &[u32]) -> usize {
    counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(s, _)| 1 << s).sum()
}

/// Per-site occupancy probabilities and batch-means standard errors from a
/// forward birth-death chain with unit death rate per point and birth rate
/// `density(xi + u) / density(xi)` at each site.
pub fn gillespie_occupancy(
    dhat: &[f64],
    p: &OracleParams,
    depth: usize,
    events: usize,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let sites = dhat.len();
    let mut rng = rng(seed);
    let mut counts = vec![0u32; sites];
    let burn_in = events / 100;
    let batches = 50;
    let per_batch = (events - burn_in) / batches;
    let mut batch_occ = vec![vec![0.0; sites]; batches];
    let mut batch_time = vec![0.0; batches];
    // Birth rates per state, keyed by the counts packed eight bits a site.
    assert!(sites <= 8);
    let key = |c: &[u32]| c.iter().fold(0u64, |acc, &x| (acc << 8) | u64::from(x.min(255)));
    let mut cache: HashMap<u64, (Vec<f64>, f64)> = HashMap::new();
    for step in 0..events {
        assert!(counts.iter().all(|&c| c < 255), "count overflowed the packed key");
        let (births, total_birth) = cache.entry(key(&counts)).or_insert_with(|| {
            let lp = oracle_log_density(&counts, dhat, p, depth);
            let mut up = counts.clone();
            let births: Vec<f64> = (0..sites)
                .map(|u| {
                    up[u] += 1;
                    let r = (oracle_log_density(&up, dhat, p, depth) - lp).exp();
                    up[u] -= 1;
                    r
                })
                .collect();
            let total = births.iter().sum();
            (births, total)
        });
        let total_death: f64 = counts.iter().map(|&c| c as f64).sum();
        let total = *total_birth + total_death;
        let hold = -(1.0 - rng.random::<f64>()).ln() / total;
        if step >= burn_in {
            let b = ((step - burn_in) / per_batch).min(batches - 1);
            batch_time[b] += hold;
            for s in 0..sites {
                if counts[s] > 0 {
                    batch_occ[b][s] += hold;
                }
            }
        }
        let mut r = rng.random::<f64>() * total;
        let mut born = None;
        for (u, &rate) in births.iter().enumerate() {
            if r < rate {
                born = Some(u);
                break;
            }
            r -= rate;
        }
        match born {
            Some(u) => counts[u] += 1,
            None => {
                let mut victim = None;
                for u in (0..sites).filter(|&u| counts[u] > 0) {
                    victim = Some(u);
                    let c = counts[u] as f64;
                    if r < c {
                        break;
                    }
                    r -= c;
                }
                counts[victim.expect("a death needs a point")] -= 1;
            }
        }
    }
    let mut mean = vec![0.0; sites];
    let mut se = vec![0.0; sites];
    for s in 0..sites {
        let means: Vec<f64> = (0..batches).map(|b| batch_occ[b][s] / batch_time[b]).collect();
        let m = means.iter().sum::<f64>() / batches as f64;
        let v = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
        mean[s] = batch_occ.iter().map(|b| b[s]).sum::<f64>() / batch_time.iter().sum::<f64>();
        se[s] = (v / batches as f64).sqrt();
    }
    (mean, se)
}

/// Gauss-Hermite nodes and weights for `int exp(-x^2) f(x) dx`, by Newton
/// iteration on the orthonormal Hermite recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `int N(c; 0, prior_var) N(dhat; c, noise_var) dc` by Gauss-Hermite
/// quadrature. The narrower of the two Gaussians supplies the weight so the
/// remaining integrand is smooth on the node scale.
pub fn gh_convolution(dhat: f64, prior_var: f64, noise_var: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let (centre, weight_var, other_var, other_mean) = if prior_var >= noise_var {
        (dhat, noise_var, prior_var, 0.0)
    } else {
        (0.0, prior_var, noise_var, dhat)
    };
    let scale = (2.0 * weight_var).sqrt();
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * log_normal_pdf(centre + scale * x - other_mean, other_var).exp())
        .sum::<f64>()
        / PI.sqrt()
}

/// Normal CDF via the complementary error function series-free route:
/// integrate the density with Simpson's rule on a fine grid. Slow but
/// independent of any library special function.
pub fn normal_cdf_simpson(x: f64) -> f64 {
    if x < -12.0 {
        return 0.0;
    }
    let a = -12.0;
    let steps = 20_000;
    let h = (x - a) / steps as f64;
    let f = |t: f64| (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
    let mut s = f(a) + f(x);
    for i in 1..steps {
        let t = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(t);
    }
    s * h / 3.0
}
