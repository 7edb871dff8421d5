//! The four Donoho–Johnstone test functions, sampled at `t_i = i / n`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Signal;
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestSignal {
    Blocks,
    Bumps,
    Doppler,
    Heavisine,
}

impl TestSignal {
    pub const ALL: [TestSignal; 4] = [
        TestSignal::Blocks,
        TestSignal::Bumps,
        TestSignal::Doppler,
        TestSignal::Heavisine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestSignal::Blocks => "Blocks",
            TestSignal::Bumps => "Bumps",
            TestSignal::Doppler => "Doppler",
            TestSignal::Heavisine => "Heavisine",
        }
    }

    /// Raw (unstandardized) function value at `t` in `[0, 1)`.
    pub fn eval(self, t: f64) -> f64 {
        const KNOTS: [f64; 11] = [0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81];
        match self {
            TestSignal::Blocks => {
                const H: [f64; 11] = [4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2];
                // Right-continuous unit step, so every sample sits on a plateau.
                KNOTS
                    .iter()
                    .zip(H)
                    .map(|(&tj, h)| if t >= tj { h } else { 0.0 })
                    .sum()
            }
            TestSignal::Bumps => {
                const H: [f64; 11] = [4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2];
                const W: [f64; 11] = [
                    0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005,
                ];
                KNOTS
                    .iter()
                    .zip(H.iter().zip(W))
                    .map(|(&tj, (&h, w))| h * (1.0 + ((t - tj) / w).abs()).powi(-4))
                    .sum()
            }
            TestSignal::Doppler => {
                let eps = 0.05;
                (t * (1.0 - t)).sqrt() * (2.0 * PI * (1.0 + eps) / (t + eps)).sin()
            }
            TestSignal::Heavisine => 4.0 * (4.0 * PI * t).sin() - sgn(t - 0.3) - sgn(0.72 - t),
        }
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl fmt::Display for TestSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestSignal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestSignal::ALL
            .into_iter()
            .find(|sig| sig.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName {
                kind: "test signal",
                name: s.to_string(),
            })
    }
}

/// Centre to mean 0 and scale to sample standard deviation 1.
pub fn standardize(values: &mut [f64]) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    for v in values.iter_mut() {
        *v = (*v - mean) / sd;
    }
}

/// Test function sampled on `n` equispaced points, standardized.
pub fn make_test_signal<T: Real>(which: TestSignal, n: usize) -> Result<Signal<T>> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::Length(n));
    }
    let mut values: Vec<f64> = (0..n).map(|i| which.eval(i as f64 / n as f64)).collect();
    standardize(&mut values);
    Signal::new(values.into_iter().map(T::c).collect())
}

/// Add iid N(0, sigma^2) noise; deterministic for a given seed.
pub fn add_noise<T>(signal: &Signal<T>, sigma: T, seed: u64) -> Result<Signal<T>>
where
    T: Real,
    StandardNormal: Distribution<T>,
{
    if !(sigma > T::zero()) {
        return Err(Error::InvalidParams(format!("noise sd must be positive, got {sigma}")));
    }
    let normal = Normal::new(T::zero(), sigma).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let mut rng = rng::stream(seed, &[rng::tag::NOISE]);
    let samples = signal
        .samples()
        .iter()
        .map(|&x| x + normal.sample(&mut rng))
        .collect();
    Signal::new(samples)
}
