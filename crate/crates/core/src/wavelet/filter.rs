use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Daubechies least-asymmetric filter with 10 vanishing moments (20 taps),
/// the "symmlet 10" of the standard tables. Values as tabulated by PyWavelets
/// (`sym10`, reconstruction lowpass), which sum to sqrt(2) and are orthonormal
/// under even shifts to about 1e-14.
const LA10: [f64; 20] = [
    -0.000_459_329_421_004_658_8,
    0.000_057_036_083_618_494_284,
    0.004_593_173_585_311_828,
    -0.000_804_358_932_016_544_9,
    -0.020_354_939_812_311_29,
    0.005_764_912_033_581_909,
    0.049_994_972_077_376_69,
    -0.031_990_056_882_427_8,
    -0.035_536_740_473_817_55,
    0.383_826_761_067_085_46,
    0.769_510_037_021_107_1,
    0.471_690_666_938_439_25,
    -0.070_880_535_783_243_85,
    -0.159_494_278_884_917_57,
    0.011_609_893_903_711_381,
    0.045_927_239_231_092_2,
    -0.001_465_382_581_305_051_3,
    -0.008_641_299_277_022_422,
    0.000_095_632_670_722_894_75,
    0.000_770_159_809_114_490_1,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FilterKind {
    Haar,
    DaubLa10,
}

impl FilterKind {
    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Haar => "haar",
            FilterKind::DaubLa10 => "la10",
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" => Ok(FilterKind::Haar),
            "la10" | "daubla10" | "daub-la10" | "sym10" | "s20" => Ok(FilterKind::DaubLa10),
            _ => Err(Error::UnknownName {
                kind: "wavelet",
                name: s.to_string(),
            }),
        }
    }
}

/// Orthonormal two-channel filter bank described by its lowpass filter.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilter<T> {
    kind: FilterKind,
    lowpass: Vec<T>,
    highpass: Vec<T>,
}

impl<T: Real> WaveletFilter<T> {
    pub fn new(kind: FilterKind) -> Self {
        let lowpass: Vec<T> = match kind {
            FilterKind::Haar => vec![T::FRAC_1_SQRT_2(); 2],
            FilterKind::DaubLa10 => LA10.iter().map(|&x| T::c(x)).collect(),
        };
        let len = lowpass.len();
        // Quadrature mirror: g[m] = (-1)^m h[L-1-m].
        let highpass = (0..len)
            .map(|m| {
                let h = lowpass[len - 1 - m];
                if m % 2 == 0 {
                    h
                } else {
                    -h
                }
            })
            .collect();
        Self {
            kind,
            lowpass,
            highpass,
        }
    }

    pub fn haar() -> Self {
        Self::new(FilterKind::Haar)
    }

    pub fn la10() -> Self {
        Self::new(FilterKind::DaubLa10)
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn lowpass(&self) -> &[T] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[T] {
        &self.highpass
    }

    /// Largest deviation from the orthonormality identities: unit energy,
    /// sum sqrt(2) and zero correlation at every nonzero even shift.
    pub fn orthonormality_defect(&self) -> f64 {
        let h: Vec<f64> = self.lowpass.iter().map(|x| x.f64()).collect();
        let energy = h.iter().map(|x| x * x).sum::<f64>();
        let sum = h.iter().sum::<f64>();
        let mut worst = (energy - 1.0).abs().max((sum - std::f64::consts::SQRT_2).abs());
        for shift in (2..h.len()).step_by(2) {
            let c: f64 = h[shift..].iter().zip(&h).map(|(a, b)| a * b).sum();
            worst = worst.max(c.abs());
        }
        worst
    }
}
