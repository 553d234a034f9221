use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use super::{check_tau, FadingModel, SpscQuery};
use crate::error::{Error, Result};
use crate::numeric::stream_rng;

pub const MIN_MC_TRIALS: usize = 1_000;
const CHUNK: usize = 4_096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub trials: usize,
}

pub fn default_region_radius(distance_km: f64) -> f64 {
    (10.0 * distance_km).max(2000.0)
}

/// Empirical SPSC: Eves drawn from a Poisson process in a disk of radius
/// `region_radius_km` around the transmitter. Trial `t` draws from its own
/// stream, so the result does not depend on the worker count.
pub fn spsc_monte_carlo(
    q: &SpscQuery,
    fading: FadingModel,
    trials: usize,
    region_radius_km: f64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    q.check()?;
    fading.validate()?;
    if trials < MIN_MC_TRIALS {
        return Err(Error::InsufficientTrials { required: MIN_MC_TRIALS, got: trials });
    }
    if !(region_radius_km >= 10.0 * q.distance_km) {
        return Err(Error::InvalidRegion { radius_km: region_radius_km, distance_km: q.distance_km });
    }
    let mean_count = q.lambda_eve * PI * region_radius_km * region_radius_km;
    let poisson = if mean_count > 0.0 { Some(Poisson::new(mean_count).expect("finite mean")) } else { None };
    let sampler = fading.sampler();
    // The transmit PSD cancels from the comparison, leaving only the
    // jamming-to-noise scale.
    let jam = q.sigma * q.gain_linear / q.noise_psd;
    let d_pow = q.distance_km.powf(q.alpha);
    let neg_alpha_half = -q.alpha / 2.0;
    let r2 = region_radius_km * region_radius_km;

    let chunks = trials.div_ceil(CHUNK);
    let wins: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut wins = 0u64;
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng = stream_rng(seed, t as u64);
                let legit = sampler.sample(&mut rng) / d_pow;
                let count = poisson.as_ref().map_or(0, |p| p.sample(&mut rng) as u64);
                let mut secure = true;
                for _ in 0..count {
                    let u: f64 = rng.random();
                    let path = sampler.sample(&mut rng) * (u * r2).powf(neg_alpha_half);
                    if path / (jam * path + 1.0) >= legit {
                        secure = false;
                        break;
                    }
                }
                wins += secure as u64;
            }
            wins
        })
        .sum();
    let n = trials as f64;
    let p = wins as f64 / n;
    Ok(MonteCarloEstimate { probability: p, std_error: (p * (1.0 - p) / n).sqrt(), trials })
}

/// Smallest jamming PSD whose Monte-Carlo SPSC reaches `tau`, by bisection
/// in the log domain to `rel_tol`. Every evaluation reuses `seed`, so the
/// estimate is monotone in the jamming level.
pub fn min_jamming_monte_carlo(
    q: &SpscQuery,
    fading: FadingModel,
    tau: f64,
    trials: usize,
    region_radius_km: f64,
    seed: u64,
    rel_tol: f64,
) -> Result<f64> {
    check_tau(tau)?;
    let p = |sigma: f64| {
        spsc_monte_carlo(&SpscQuery { sigma, ..*q }, fading, trials, region_radius_km, seed).map(|e| e.probability)
    };
    if p(0.0)? >= tau {
        return Ok(0.0);
    }
    // Jamming PSD at unit jamming-to-noise ratio.
    let unit = q.noise_psd * q.distance_km.powf(q.alpha) / q.gain_linear;
    let (mut lo, mut hi) = (unit, unit);
    let mut steps = 0;
    while p(hi)? < tau {
        lo = hi;
        hi *= 4.0;
        steps += 1;
        if steps > 80 {
            return Err(Error::InvalidInput(format!("no jamming level reaches tau {tau}")));
        }
    }
    if lo == hi {
        loop {
            lo /= 4.0;
            steps += 1;
            if p(lo)? < tau {
                break;
            }
            hi = lo;
            if steps > 160 {
                return Ok(0.0);
            }
        }
    }
    while hi / lo > 1.0 + rel_tol {
        let mid = (lo * hi).sqrt();
        if p(mid)? >= tau {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
