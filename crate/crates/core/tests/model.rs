mod common;

use aibt::lattice::{Configuration, Lattice, LatticeIndex};
use aibt::model::{
    cond_intensity_f1, cond_intensity_f2, cond_intensity_f3, cond_intensity_f4, dominating_rate, estimate_sigma_mad,
    log_birth_intensity, log_cond_intensity_f3, log_dominating_rate, log_marginal_posterior, lower_thinning_prob,
    ModelParams,
};
use aibt::wavelet::{forward_dwt, Signal, WaveletFilter};
use common::{enumerate_counts, gauss_hermite, gh_convolution, log_normal_pdf, oracle_coverage, oracle_log_density, OracleParams};
use proptest::prelude::*;
use rand::Rng;

fn study() -> ModelParams<f64> {
    ModelParams::study(0.1).unwrap()
}

#[test]
fn prior_intensity_is_constant() {
    let p = study();
    assert_eq!(cond_intensity_f1(&p), 0.05);
    assert_eq!(cond_intensity_f1(&ModelParams::new(1.0, 3.0, 1.0, 0.1).unwrap()), 1.0);
}

#[test]
fn interaction_term_values() {
    let lattice = Lattice::new(6).unwrap();
    let u = LatticeIndex { j: 3, k: 4 };
    let empty = Configuration::empty(lattice.len());
    let f2 = cond_intensity_f2(&lattice, u, &empty, &study(), None);
    assert!((f2 - 3f64.powi(-9)).abs() < 1e-18);
    assert!((f2 - 5.08e-5).abs() < 1e-7);
    let mut full = Configuration::empty(lattice.len());
    full.add(u.flat());
    assert_eq!(cond_intensity_f2(&lattice, u, &full, &study(), None), 1.0);
    // Flagging every site as occupied also covers B(u).
    let flags = vec![true; lattice.len()];
    assert_eq!(cond_intensity_f2(&lattice, u, &empty, &study(), Some(&flags)), 1.0);
}

#[test]
fn data_term_values() {
    let p = ModelParams::new(0.05, 3.0, 1.0, 0.1).unwrap();
    let expected: f64 = 4.0 / (2.0 * 0.01 * 1.01);
    assert!((log_cond_intensity_f3(0, 2.0, &p) - expected).abs() < 1e-10);
    assert!((expected - 198.019_801_98).abs() < 1e-6);
    for xi in 0..20 {
        assert_eq!(cond_intensity_f3(xi, 0.0, &p), 1.0);
    }
    let mut prev = f64::INFINITY;
    for xi in 0..500 {
        let v = cond_intensity_f3(xi, 0.7, &p);
        assert!(v >= 1.0 && v <= prev);
        prev = v;
    }
    assert!(prev - 1.0 < 1e-3);
}

#[test]
fn variance_term_values() {
    let p = ModelParams::new(0.05, 3.0, 0.4, 0.4).unwrap();
    assert!((cond_intensity_f4(0, &p) - 0.5f64.sqrt()).abs() < 1e-15);
    assert!((cond_intensity_f4(5, &p) - (6.0f64 / 7.0).sqrt()).abs() < 1e-15);
    assert!(1.0 - cond_intensity_f4(1_000_000, &p) < 1e-6);
}

#[test]
fn dominating_rate_values() {
    let p = study();
    assert!((dominating_rate(0.0, &p) - 0.05).abs() < 1e-17);
    let want = 0.05 * (0.09f64 / (2.0 * 0.01 * 1.01)).exp();
    assert!((dominating_rate(0.3, &p) - want).abs() < 1e-12 * want);
    assert!((0.09f64 / (2.0 * 0.01 * 1.01) - 4.455_445_5).abs() < 1e-6);
    // Twenty noise standard deviations with tau = sigma.
    let q = ModelParams::new(0.05, 3.0, 0.1, 0.1).unwrap();
    assert!((log_dominating_rate(2.0, &q) - (0.05f64.ln() + 100.0)).abs() < 1e-10);
    // Overflow saturates instead of returning infinity.
    assert_eq!(dominating_rate(1e6, &q), f64::MAX);
}

#[test]
fn thinning_probability_values() {
    let p = ModelParams::new(0.05, 3.0, 0.2, 0.2).unwrap();
    let want = 3f64.powi(-9) * 0.5f64.sqrt();
    assert!((lower_thinning_prob(0.0, &p, 9) - want).abs() < 1e-15);
    assert!(lower_thinning_prob(50.0, &p, 9) < 1e-300);
    let near = ModelParams::<f64>::new(0.05, 1.0 + 1e-12, 1e-9, 1.0).unwrap();
    assert!((lower_thinning_prob(0.0, &near, 9) - 1.0).abs() < 1e-9);
}

#[test]
fn empty_configuration_reduces_to_noise_likelihood() {
    let lattice = Lattice::new(4).unwrap();
    let p = study();
    let dhat: Vec<f64> = (0..lattice.len()).map(|i| (i as f64 * 0.37).sin()).collect();
    let want: f64 = dhat.iter().map(|&d| log_normal_pdf(d, 0.01)).sum();
    let got = log_marginal_posterior(&lattice, &Configuration::empty(lattice.len()), &dhat, &p);
    assert!((got - want).abs() < 1e-9);
}

#[test]
fn enumeration_normalizes_and_agrees_with_library_density() {
    let depth = 3;
    let lattice = Lattice::new(depth).unwrap();
    let dhat = [0.3, -0.2, 0.8, 0.0, 0.1, -0.6, 0.4];
    let p = ModelParams::new(0.5, 2.0, 1.0, 0.5).unwrap();
    let op = OracleParams::new(0.5, 2.0, 1.0, 0.5);
    let states = enumerate_counts(&dhat, &op, depth, 2);
    assert_eq!(states.len(), 3usize.pow(7));
    let total: f64 = states.iter().map(|s| s.1).sum();
    assert!((total - 1.0).abs() < 1e-12);
    // Log-density differences agree with the independent oracle.
    let base = [0u32; 7];
    let lib0 = log_marginal_posterior(&lattice, &Configuration::from_counts(&base), &dhat, &p);
    let ora0 = oracle_log_density(&base, &dhat, &op, depth);
    for (counts, _) in states.iter().step_by(37) {
        let lib = log_marginal_posterior(&lattice, &Configuration::from_counts(counts), &dhat, &p) - lib0;
        let ora = oracle_log_density(counts, &dhat, &op, depth) - ora0;
        assert!((lib - ora).abs() < 1e-10, "{counts:?}");
    }
}

#[test]
fn marginal_matches_gauss_hermite_integration() {
    let (x, w) = gauss_hermite(64);
    // The rule integrates exp(-x^2) x^2 exactly.
    let second: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
    assert!((second - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    let lattice = Lattice::new(2).unwrap();
    let p = ModelParams::<f64>::new(0.5, 2.0, 1.0, 0.5).unwrap();
    let mut rng = common::rng(8);
    for _ in 0..20 {
        let counts: Vec<u32> = (0..3).map(|_| rng.random_range(0..5)).collect();
        let dhat: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
        let n: u32 = counts.iter().sum();
        let mut joint = p.lambda.powi(n as i32) * p.gamma.powi(-(oracle_coverage(&counts, 2) as i32));
        for (s, &d) in dhat.iter().enumerate() {
            let noise = p.sigma * p.sigma;
            joint *= if counts[s] == 0 {
                log_normal_pdf(d, noise).exp()
            } else {
                gh_convolution(d, p.tau * p.tau * counts[s] as f64, noise, &x, &w)
            };
        }
        let lib = log_marginal_posterior(&lattice, &Configuration::from_counts(&counts), &dhat, &p).exp();
        assert!((lib - joint).abs() < 1e-6 * joint, "{counts:?}: {lib} vs {joint}");
    }
}

#[test]
fn sigma_estimate_on_white_noise() {
    let n = 1 << 14;
    let sigma: f64 = 0.7;
    let noise = aibt::wavelet::add_noise(&Signal::new(vec![0.0; n]).unwrap(), sigma, 21).unwrap();
    let est = estimate_sigma_mad(&forward_dwt(&noise, &WaveletFilter::haar())).unwrap();
    assert!((est / sigma - 1.0).abs() < 0.05, "{est}");
}

#[test]
fn sigma_estimate_edge_cases() {
    let c = 0.3;
    let mut x = vec![0.0; 16];
    for i in 0..8 {
        x[2 * i] = c * 2f64.sqrt() / 2.0;
        x[2 * i + 1] = -c * 2f64.sqrt() / 2.0;
    }
    let dec = forward_dwt(&Signal::new(x).unwrap(), &WaveletFilter::haar());
    let est = estimate_sigma_mad(&dec).unwrap();
    assert!((est - c / 0.6745).abs() < 1e-12);
    let zero = forward_dwt(&Signal::new(vec![0.0; 16]).unwrap(), &WaveletFilter::haar());
    assert!(estimate_sigma_mad(&zero).is_err());
}

#[test]
fn non_unit_power_that_breaks_ordering_is_rejected() {
    assert!(ModelParams::with_z(0.05, 3.0, 1.0, 0.1, 1.0).is_ok());
    assert!(ModelParams::with_z(0.05, 3.0, 1.0, 0.1, 0.5).is_ok());
    assert!(ModelParams::with_z(0.05, 3.0, 1.0, 0.1, -1.0).is_err());
    assert!(ModelParams::new(0.05, 0.9, 1.0, 0.1).is_err());
    assert!(ModelParams::new(0.0, 3.0, 1.0, 0.1).is_err());
    assert!(ModelParams::new(0.05, 3.0, 1.0, 0.0).is_err());
}

proptest! {
    #[test]
    fn conditional_intensity_is_density_ratio(
        depth in 1usize..5,
        seed in any::<u64>(),
        lambda in 0.01f64..2.0,
        gamma in 1.01f64..5.0,
        tau in 0.1f64..3.0,
        sigma in 0.05f64..2.0,
    ) {
        let lattice = Lattice::new(depth).unwrap();
        let p = ModelParams::new(lambda, gamma, tau, sigma).unwrap();
        let mut rng = common::rng(seed);
        let counts: Vec<u32> = (0..lattice.len()).map(|_| rng.random_range(0..4)).collect();
        let dhat: Vec<f64> = (0..lattice.len()).map(|_| rng.random_range(-3.0..3.0) * sigma).collect();
        let u = rng.random_range(0..lattice.len());
        let xi = Configuration::from_counts(&counts);
        let mut more = counts.clone();
        more[u] += 1;
        let diff = log_marginal_posterior(&lattice, &Configuration::from_counts(&more), &dhat, &p)
            - log_marginal_posterior(&lattice, &xi, &dhat, &p);
        let birth = log_birth_intensity(&lattice, LatticeIndex::from_flat(u), &xi, &dhat, &p);
        prop_assert!((diff - birth).abs() < 1e-10);
    }

    #[test]
    fn intensities_respect_bounds_and_ordering(
        seed in any::<u64>(),
        z in prop_oneof![Just(1.0f64), 0.5f64..1.5],
    ) {
        let mut rng = common::rng(seed);
        let Ok(p) = ModelParams::with_z(
            rng.random_range(0.01..1.0),
            rng.random_range(1.01..4.0),
            rng.random_range(0.1..2.0),
            rng.random_range(0.05..1.0),
            z,
        ) else {
            return Ok(());
        };
        let depth = rng.random_range(2..6);
        let lattice = Lattice::new(depth).unwrap();
        let small: Vec<u32> = (0..lattice.len()).map(|_| rng.random_range(0..3)).collect();
        let big: Vec<u32> = small.iter().map(|&c| c + rng.random_range(0..3)).collect();
        let u = LatticeIndex::from_flat(rng.random_range(0..lattice.len()));
        let d = rng.random_range(-4.0..4.0) * p.sigma;
        let (xs, xb) = (Configuration::from_counts(&small), Configuration::from_counts(&big));
        let (cs, cb) = (small[u.flat()], big[u.flat()]);
        let f2s = cond_intensity_f2(&lattice, u, &xs, &p, None);
        let f2b = cond_intensity_f2(&lattice, u, &xb, &p, None);
        prop_assert!(f2s <= f2b && f2b <= 1.0);
        prop_assert!(cond_intensity_f4(cs, &p) <= cond_intensity_f4(cb, &p) + 1e-15);
        prop_assert!(cond_intensity_f4(cb, &p) <= 1.0);
        prop_assert!(log_cond_intensity_f3(cs, d, &p) >= log_cond_intensity_f3(cb, d, &p) - 1e-12);
        prop_assert!(log_cond_intensity_f3(cb, d, &p) >= 0.0);
        let ratio = (p.lambda.ln() + f2s.ln() + log_cond_intensity_f3(cs, d, &p) + cond_intensity_f4(cs, &p).ln()
            - log_dominating_rate(d, &p)).exp();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ratio));
    }
}
