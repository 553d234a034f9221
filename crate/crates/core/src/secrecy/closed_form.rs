use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use super::{check_tau, EveField, SpscQuery};
use crate::channel::{link_gain, noise_psd, NodeSpec};
use crate::error::{Error, Result};
use crate::numeric::bisect_last_true;

/// Upper end of the distance search; longer than any chord between two
/// points below LEO altitude.
pub const MAX_SEARCH_KM: f64 = 20_000.0;

/// `κ = λ (2π/α) Γ(2/α)`.
pub fn kappa(lambda_eve: f64, alpha: f64) -> f64 {
    lambda_eve * 2.0 * PI / alpha * gamma(2.0 / alpha)
}

/// Closed-form SPSC with an arbitrary exponent scale in place of `κ`.
pub fn spsc_with_kappa(q: &SpscQuery, kappa_eff: f64) -> f64 {
    let a = q.alpha;
    let bracket = gamma(1.0 - 2.0 / a) - 2.0 * q.jamming_ratio() / a * gamma(2.0 - 2.0 / a);
    (-kappa_eff * bracket * q.distance_km * q.distance_km).exp().clamp(0.0, 1.0)
}

pub fn spsc_closed_form(q: &SpscQuery) -> Result<f64> {
    q.check()?;
    Ok(spsc_with_kappa(q, kappa(q.lambda_eve, q.alpha)))
}

pub fn spsc_calibrated(q: &SpscQuery, field: &EveField) -> Result<f64> {
    q.check()?;
    let (a, p) = field.calibration_at(q.distance_km)?;
    Ok(spsc_with_kappa(q, a * kappa(q.lambda_eve, q.alpha).powf(p)))
}

/// Minimum jamming PSD meeting `tau` under the uncalibrated closed form.
pub fn min_jamming_closed_form(
    distance_km: f64,
    alpha: f64,
    lambda_eve: f64,
    gain_linear: f64,
    noise_psd: f64,
    tau: f64,
) -> Result<f64> {
    check_tau(tau)?;
    if !(alpha > 2.0) {
        return Err(Error::FreeSpaceDivergence(alpha));
    }
    let d = distance_km;
    let lead = alpha * d.powf(alpha) * noise_psd / (2.0 * gain_linear * (1.0 - 2.0 / alpha));
    let tail = 1.0 + alpha * (2.0 * PI / alpha).sin() / (2.0 * PI * PI * lambda_eve * d * d) * tau.ln();
    Ok((lead * tail).max(0.0))
}

/// Minimum jamming PSD meeting `tau` with exponent scale `kappa_eff`; the
/// `sigma` field of `q` is ignored.
pub fn required_jamming(q: &SpscQuery, kappa_eff: f64, tau: f64) -> f64 {
    let a = q.alpha;
    let d = q.distance_km;
    let j_star = a / (2.0 * (1.0 - 2.0 / a));
    let j = j_star * (1.0 + tau.ln() / (kappa_eff * gamma(1.0 - 2.0 / a) * d * d));
    (j * q.noise_psd * d.powf(a) / q.gain_linear).max(0.0)
}

/// Calibration-aware counterpart of [`min_jamming_closed_form`].
pub fn min_jamming_calibrated(q: &SpscQuery, field: &EveField, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    q.check()?;
    let (a, p) = field.calibration_at(q.distance_km)?;
    Ok(required_jamming(q, a * kappa(q.lambda_eve, q.alpha).powf(p), tau))
}

/// Longest link from `tx` toward a receiver like `rx` that meets `tau` with
/// the whole jamming budget spent. `f64::INFINITY` when the threshold still
/// holds at [`MAX_SEARCH_KM`].
pub fn max_link_distance(tx: &NodeSpec, rx: &NodeSpec, field: &EveField, tau: f64, tol_km: f64) -> Result<f64> {
    check_tau(tau)?;
    if !(tx.alpha > 2.0) {
        return Err(Error::FreeSpaceDivergence(tx.alpha));
    }
    let gain = link_gain(tx, rx);
    let n0 = noise_psd(rx, tx.layer);
    let sigma = tx.jamming_budget_psd();
    let mut failure = None;
    let mut ok = |d: f64| {
        if d <= 0.0 {
            return true;
        }
        let q = SpscQuery {
            distance_km: d,
            alpha: tx.alpha,
            lambda_eve: field.effective_density(&tx.position, tx.layer, d),
            sigma,
            gain_linear: gain,
            noise_psd: n0,
        };
        match spsc_calibrated(&q, field) {
            Ok(p) => p >= tau,
            Err(e) => {
                failure.get_or_insert(e);
                false
            }
        }
    };
    if ok(MAX_SEARCH_KM) {
        return Ok(f64::INFINITY);
    }
    let d = bisect_last_true(0.0, MAX_SEARCH_KM, tol_km, &mut ok);
    match failure {
        Some(e) => Err(e),
        None => Ok(d),
    }
}

/// Upper bound on the gap between the exact SPSC and its closed form.
pub fn jensen_gap_bound(q: &SpscQuery, region_radius_km: f64) -> Result<f64> {
    q.check()?;
    let (a, d, lam) = (q.alpha, q.distance_km, q.lambda_eve);
    if a > 4.0 {
        let scale = 2.0 * PI * gamma(2.0 / a) * d * d / a;
        let moment = scale * scale * (gamma(1.0 - 4.0 / a) - 4.0 * q.jamming_ratio() / a * gamma(2.0 - 4.0 / a));
        Ok(lam * lam / 2.0 * moment)
    } else {
        let c = 1.0 / (d.powf(a) * q.noise_psd - q.sigma * q.gain_linear);
        Ok(lam * lam / 2.0 * (PI.powi(3) / c * region_radius_km.ln() - PI.powi(4) / (4.0 * c)))
    }
}
