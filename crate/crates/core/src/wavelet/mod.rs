//! Periodized orthogonal discrete wavelet transform on dyadic signals.
//!
//! Detail coefficients are stored level by level, coarsest first: level `j`
//! holds `2^j` coefficients, so a signal of length `n = 2^J` decomposes into
//! levels `0..J` (n - 1 details) plus a single scaling coefficient. The flat
//! site index `2^j - 1 + k` is shared with the lattice module.

mod filter;
mod signals;

pub use filter::{FilterKind, WaveletFilter};
pub use signals::{add_noise, make_test_signal, standardize, TestSignal};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sampled signal of dyadic length.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal<T> {
    samples: Vec<T>,
}

impl<T: Real> Signal<T> {
    pub fn new(samples: Vec<T>) -> Result<Self> {
        let n = samples.len();
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Length(n));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::Degenerate("signal contains non-finite samples".into()));
        }
        Ok(Self { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Number of dyadic levels, `J = log2(n)`.
    pub fn levels(&self) -> usize {
        self.samples.len().trailing_zeros() as usize
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    /// Mean of squared differences against another signal of the same length.
    pub fn mse(&self, other: &Signal<T>) -> Result<T> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        let sum: T = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum();
        Ok(sum / T::c(self.len() as f64))
    }
}

/// Full-depth wavelet decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition<T> {
    detail: Vec<Vec<T>>,
    scaling: T,
    filter: WaveletFilter<T>,
}

impl<T: Real> WaveletDecomposition<T> {
    /// Assemble a decomposition from per-level details (coarsest first).
    pub fn from_parts(detail: Vec<Vec<T>>, scaling: T, filter: WaveletFilter<T>) -> Result<Self> {
        if detail.is_empty() {
            return Err(Error::Structure("no detail levels".into()));
        }
        for (j, level) in detail.iter().enumerate() {
            if level.len() != 1 << j {
                return Err(Error::Structure(format!(
                    "level {j} has {} coefficients, expected {}",
                    level.len(),
                    1usize << j
                )));
            }
        }
        Ok(Self {
            detail,
            scaling,
            filter,
        })
    }

    /// Decomposition with all coefficients zero.
    pub fn zeros(levels: usize, filter: WaveletFilter<T>) -> Self {
        let detail = (0..levels).map(|j| vec![T::zero(); 1 << j]).collect();
        Self {
            detail,
            scaling: T::zero(),
            filter,
        }
    }

    pub fn levels(&self) -> usize {
        self.detail.len()
    }

    pub fn signal_len(&self) -> usize {
        1 << self.detail.len()
    }

    pub fn level(&self, j: usize) -> &[T] {
        &self.detail[j]
    }

    pub fn level_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.detail[j]
    }

    pub fn get(&self, j: usize, k: usize) -> T {
        self.detail[j][k]
    }

    pub fn set(&mut self, j: usize, k: usize, value: T) {
        self.detail[j][k] = value;
    }

    pub fn scaling(&self) -> T {
        self.scaling
    }

    pub fn set_scaling(&mut self, value: T) {
        self.scaling = value;
    }

    pub fn filter(&self) -> &WaveletFilter<T> {
        &self.filter
    }

    pub fn detail_count(&self) -> usize {
        self.signal_len() - 1
    }

    /// Detail coefficients in flat site order (`2^j - 1 + k`).
    pub fn detail_flat(&self) -> Vec<T> {
        self.detail.iter().flatten().copied().collect()
    }

    /// Replace all details from a flat site-ordered vector.
    pub fn with_detail_flat(&self, flat: &[T]) -> Result<Self> {
        if flat.len() != self.detail_count() {
            return Err(Error::LengthMismatch {
                expected: self.detail_count(),
                got: flat.len(),
            });
        }
        let mut out = self.clone();
        let mut offset = 0;
        for level in out.detail.iter_mut() {
            let len = level.len();
            level.copy_from_slice(&flat[offset..offset + len]);
            offset += len;
        }
        Ok(out)
    }

    /// Sum of squares of every coefficient, scaling included.
    pub fn energy(&self) -> T {
        self.detail.iter().flatten().map(|&x| x * x).sum::<T>() + self.scaling * self.scaling
    }
}

/// One analysis step: `input` (even length) into approximation and detail halves.
fn analysis_step<T: Real>(input: &[T], filter: &WaveletFilter<T>, approx: &mut Vec<T>, detail: &mut Vec<T>) {
    let n = input.len();
    let half = n / 2;
    approx.clear();
    detail.clear();
    for k in 0..half {
        let mut a = T::zero();
        let mut d = T::zero();
        for (m, (&h, &g)) in filter.lowpass().iter().zip(filter.highpass()).enumerate() {
            let x = input[(2 * k + m) % n];
            a = a + h * x;
            d = d + g * x;
        }
        approx.push(a);
        detail.push(d);
    }
}

/// Transpose of `analysis_step`.
fn synthesis_step<T: Real>(approx: &[T], detail: &[T], filter: &WaveletFilter<T>) -> Vec<T> {
    let n = approx.len() * 2;
    let mut out = vec![T::zero(); n];
    for k in 0..approx.len() {
        for (m, (&h, &g)) in filter.lowpass().iter().zip(filter.highpass()).enumerate() {
            let i = (2 * k + m) % n;
            out[i] = out[i] + h * approx[k] + g * detail[k];
        }
    }
    out
}

/// Periodized pyramid algorithm down to a single scaling coefficient.
pub fn forward_dwt<T: Real>(signal: &Signal<T>, filter: &WaveletFilter<T>) -> WaveletDecomposition<T> {
    let levels = signal.levels();
    let mut detail = vec![Vec::new(); levels];
    let mut current = signal.samples().to_vec();
    let mut approx = Vec::with_capacity(current.len() / 2);
    for j in (0..levels).rev() {
        let mut d = Vec::with_capacity(current.len() / 2);
        analysis_step(&current, filter, &mut approx, &mut d);
        detail[j] = d;
        std::mem::swap(&mut current, &mut approx);
    }
    WaveletDecomposition {
        detail,
        scaling: current[0],
        filter: filter.clone(),
    }
}

pub fn inverse_dwt<T: Real>(dec: &WaveletDecomposition<T>) -> Result<Signal<T>> {
    if dec.detail.is_empty() {
        return Err(Error::Structure("no detail levels".into()));
    }
    let mut current = vec![dec.scaling];
    for (j, d) in dec.detail.iter().enumerate() {
        if d.len() != current.len() {
            return Err(Error::Structure(format!("level {j} missing or truncated")));
        }
        current = synthesis_step(&current, d, &dec.filter);
    }
    if current.len() < 8 {
        // Short reconstructions are legal decompositions but not valid signals.
        return Err(Error::Length(current.len()));
    }
    Signal::new(current)
}
