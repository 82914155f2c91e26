use std::collections::HashMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use regperc_core::config_model::{
    is_simple, pairing_to_multigraph, sample_pairing, sample_simple, DEFAULT_MAX_ATTEMPTS,
};
use regperc_core::rng::derive_rng;
use regperc_core::DegreeSpec;

/// Canonical key of a pairing: its sorted list of unordered pairs.
fn key(p: &regperc_core::Pairing) -> Vec<(u32, u32)> {
    let mut k: Vec<(u32, u32)> = p
        .labeled_pairs()
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    k.sort();
    k
}

#[test]
fn fifteen_matchings_are_uniform() {
    const SAMPLES: usize = 100_000;
    let spec = DegreeSpec::regular(2, 3).unwrap();
    let mut rng = derive_rng(11, &[]);
    let mut counts: HashMap<Vec<(u32, u32)>, usize> = HashMap::new();
    for _ in 0..SAMPLES {
        *counts
            .entry(key(&sample_pairing(&spec, &mut rng).unwrap()))
            .or_default() += 1;
    }
    assert_eq!(counts.len(), 15);
    let expected = SAMPLES as f64 / 15.0;
    let chi2: f64 = counts
        .values()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let critical = ChiSquared::new(14.0).unwrap().inverse_cdf(0.999);
    assert!((critical - 36.12).abs() < 0.01);
    assert!(chi2 <= critical, "chi2 = {chi2}");
}

#[test]
fn simple_rate_approaches_limit() {
    // exp(-(d^2 - 1)/4) for d = 3.
    let limit = (-2.0f64).exp();
    let spec = DegreeSpec::regular(2000, 3).unwrap();
    let mut rng = derive_rng(12, &[]);
    let samples = 5000;
    let hits = (0..samples)
        .filter(|_| {
            let p = sample_pairing(&spec, &mut rng).unwrap();
            is_simple(&pairing_to_multigraph(&p, &spec).unwrap())
        })
        .count();
    let rate = hits as f64 / samples as f64;
    let se = (limit * (1.0 - limit) / samples as f64).sqrt();
    assert!((rate - limit).abs() < 4.0 * se, "rate {rate}");
}

#[test]
fn simple_sampling_succeeds_at_moderate_size() {
    let spec = DegreeSpec::regular(100, 3).unwrap();
    let mut rng = derive_rng(13, &[]);
    for _ in 0..20 {
        let g = sample_simple(&spec, &mut rng, 1000).unwrap();
        assert!(is_simple(&g));
        assert!(g.degrees().iter().all(|&d| d == 3));
    }
    assert!(DEFAULT_MAX_ATTEMPTS >= 100);
}
