mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use sagsin_core::channel::LayerKind;
use sagsin_core::secrecy::*;
use sagsin_core::testbed::{default_eve_field, layer_defaults};
use statrs::function::gamma::gamma;

fn query(d: f64, lam: f64, sigma: f64, alpha: f64) -> SpscQuery {
    SpscQuery { distance_km: d, alpha, lambda_eve: lam, sigma, gain_linear: 1e-6, noise_psd: 1e-20 }
}

fn mc(q: &SpscQuery, fading: FadingModel, trials: usize, seed: u64) -> MonteCarloEstimate {
    spsc_monte_carlo(q, fading, trials, default_region_radius(q.distance_km), seed).unwrap()
}

#[test]
fn fitted_calibration_tracks_monte_carlo() {
    let template = query(1.0, 1.0, 0.0, 2.8);
    let lambdas = [1e-6, 2e-6, 5e-6, 1e-5, 2e-5];
    let cal = calibrate(&template, FadingModel::Rayleigh, &[100.0], &lambdas, 20_000, 4).unwrap();
    let field = EveField { calibration: Some(cal), ..default_eve_field() };
    let q = query(100.0, 1e-5, 0.0, 2.8);
    let est = mc(&q, FadingModel::Rayleigh, 50_000, 11);
    let fitted = spsc_calibrated(&q, &field).unwrap();
    assert!((est.probability - fitted).abs() <= 0.02, "{} vs {fitted}", est.probability);
    assert!(est.probability >= spsc_closed_form(&q).unwrap());
}

#[test]
fn rayleigh_is_worst_case_fading() {
    let q = query(150.0, 2e-5, 0.0, 2.8);
    let ray = mc(&q, FadingModel::Rayleigh, 40_000, 3);
    let ric = mc(&q, FadingModel::Rician { k_db: 8.0 }, 40_000, 3);
    let sha = mc(&q, FadingModel::ShadowedRician { k_db: 8.0, m: 200.0 }, 40_000, 3);
    let se = |a: &MonteCarloEstimate, b: &MonteCarloEstimate| 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!(ray.probability <= ric.probability + se(&ray, &ric));
    assert!(ric.probability <= sha.probability + se(&ric, &sha));
    assert!(ric.probability > ray.probability);
}

#[test]
fn more_trials_shrink_std_error() {
    let q = query(100.0, 2e-5, 0.0, 2.8);
    let a = mc(&q, FadingModel::Rayleigh, 10_000, 1);
    let b = mc(&q, FadingModel::Rayleigh, 40_000, 1);
    let ratio = b.std_error / a.std_error;
    assert!((ratio - 0.5).abs() <= 0.1, "{ratio}");
}

#[test]
fn doubling_region_changes_nothing_visible() {
    let q = query(100.0, 1e-5, 0.0, 2.8);
    let r = default_region_radius(q.distance_km);
    let a = spsc_monte_carlo(&q, FadingModel::Rayleigh, 40_000, r, 2).unwrap();
    let b = spsc_monte_carlo(&q, FadingModel::Rayleigh, 40_000, 2.0 * r, 2).unwrap();
    assert!((a.probability - b.probability).abs() <= 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt());
}

#[test]
fn gap_within_jensen_bound() {
    for &(d, lam) in &[(50.0, 1e-5), (100.0, 1e-5), (100.0, 3e-6), (200.0, 1e-6)] {
        let q = query(d, lam, 0.0, 4.5);
        let est = mc(&q, FadingModel::Rayleigh, 20_000, 17);
        let gap = (est.probability - spsc_closed_form(&q).unwrap()).abs();
        let bound = jensen_gap_bound(&q, default_region_radius(d)).unwrap();
        assert!(gap <= bound + 3.0 * est.std_error, "d={d} λ={lam}: {gap} > {bound}");
    }
}

#[test]
fn jensen_bound_vanishes_with_density() {
    let b1 = jensen_gap_bound(&query(100.0, 1e-6, 0.0, 4.5), 2000.0).unwrap();
    let b2 = jensen_gap_bound(&query(100.0, 1e-8, 0.0, 4.5), 2000.0).unwrap();
    assert!((b2 / b1 - 1e-4).abs() < 1e-12);
    let (a, d, lam) = (4.5, 100.0, 1e-6);
    let direct = lam * lam / 2.0 * (2.0 * PI * gamma(2.0 / a) * d * d / a).powi(2) * gamma(1.0 - 4.0 / a);
    assert!((b1 - direct).abs() <= 1e-12 * direct);
}

#[test]
fn inversion_round_trips_through_closed_form() {
    for &(d, lam, tau) in &[(100.0, 1e-4, 0.99), (300.0, 1e-5, 0.9999), (50.0, 1e-3, 0.999)] {
        let q = query(d, lam, 0.0, 2.8);
        let sigma = min_jamming_closed_form(d, q.alpha, lam, q.gain_linear, q.noise_psd, tau).unwrap();
        assert!(sigma > 0.0);
        let back = spsc_closed_form(&SpscQuery { sigma, ..q }).unwrap();
        assert!((back - tau).abs() <= 1e-4, "{back} vs {tau}");
    }
}

#[test]
fn max_distance_shrinks_with_density_and_threshold() {
    let d = layer_defaults();
    let pos = sagsin_core::channel::GeoPosition::new(-20.0, 35.0, 0.0).unwrap();
    let tx = d.node(0, LayerKind::Ground, pos);
    let rx = d.node(1, LayerKind::Ground, pos);
    let field = default_eve_field();
    let mut last = f64::INFINITY;
    for s in [0.5, 1.0, 2.0, 4.0] {
        let dm = max_link_distance(&tx, &rx, &field.scaled(s), TAU, 0.1).unwrap();
        assert!(dm <= last + 0.1);
        last = dm;
    }
    let mut last = f64::INFINITY;
    for tau in [0.9, 0.99, 0.999, 0.9999] {
        let dm = max_link_distance(&tx, &rx, &field, tau, 0.1).unwrap();
        assert!(dm <= last + 0.1);
        last = dm;
    }
}

#[test]
fn without_jamming_fourfold_density_halves_range() {
    let d = layer_defaults().with_p_min_ratio(1.0);
    let pos = sagsin_core::channel::GeoPosition::new(-20.0, 35.0, 0.0).unwrap();
    let tx = d.node(0, LayerKind::Ground, pos);
    let rx = d.node(1, LayerKind::Ground, pos);
    let mut field = default_eve_field();
    field.calibration = None;
    let d1 = max_link_distance(&tx, &rx, &field, 0.99, 0.01).unwrap();
    let d4 = max_link_distance(&tx, &rx, &field.scaled(4.0), 0.99, 0.01).unwrap();
    assert!((d4 / d1 - 0.5).abs() < 1e-3, "{d1} {d4}");
    assert_eq!(max_link_distance(&tx, &rx, &field.scaled(1e-9), 1e-300, 0.1).unwrap(), f64::INFINITY);
}

proptest! {
    #[test]
    fn spsc_monotone(
        d in 1.0f64..500.0,
        lam in 1e-7f64..1e-3,
        sigma in 0.0f64..1e-12,
        alpha in 2.2f64..5.0,
        f in 1.01f64..3.0,
    ) {
        let field = default_eve_field();
        let base = query(d, lam, sigma, alpha);
        for eval in [
            (|q: &SpscQuery, _: &EveField| spsc_closed_form(q).unwrap()) as fn(&SpscQuery, &EveField) -> f64,
            |q, f| spsc_calibrated(q, f).unwrap(),
        ] {
            let p = eval(&base, &field);
            prop_assert!((0.0..=1.0).contains(&p));
            let farther = SpscQuery { distance_km: d * f, ..base };
            let denser = SpscQuery { lambda_eve: lam * f, ..base };
            let jammed = SpscQuery { sigma: sigma * f + 1e-16, ..base };
            prop_assert!(eval(&farther, &field) <= p + 1e-12);
            prop_assert!(eval(&denser, &field) <= p + 1e-12);
            prop_assert!(eval(&jammed, &field) >= p - 1e-12);
        }
    }

    #[test]
    fn no_jamming_reduces_to_classic_form(d in 1.0f64..500.0, lam in 1e-7f64..1e-3, alpha in 2.2f64..5.0) {
        let q = query(d, lam, 0.0, alpha);
        let expect = (-kappa(lam, alpha) * gamma(1.0 - 2.0 / alpha) * d * d).exp();
        let got = spsc_closed_form(&q).unwrap();
        prop_assert!((got - expect).abs() <= 1e-12);
    }
}
