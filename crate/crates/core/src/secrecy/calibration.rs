use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{kappa, spsc_monte_carlo, FadingModel, SpscQuery};
use crate::error::{Error, Result};
use crate::numeric::{linear_fit, mix_seed};

pub const CALIBRATION_VERSION: u32 = 1;
const SATURATED: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBand {
    pub band_km: f64,
    pub a: f64,
    pub p: f64,
}

/// Per-distance-band exponent correction `κ → a·κ^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub version: u32,
    pub bands: Vec<CalibrationBand>,
    /// Clamp to the end bands outside the covered range.
    #[serde(default = "default_true")]
    pub extrapolate: bool,
}

fn default_true() -> bool {
    true
}

impl Calibration {
    pub fn new(mut bands: Vec<CalibrationBand>) -> Result<Self> {
        bands.sort_by(|x, y| x.band_km.total_cmp(&y.band_km));
        let c = Calibration { version: CALIBRATION_VERSION, bands, extrapolate: true };
        c.validate()?;
        Ok(c)
    }

    pub fn identity() -> Self {
        Calibration {
            version: CALIBRATION_VERSION,
            bands: vec![CalibrationBand { band_km: 1.0, a: 1.0, p: 1.0 }],
            extrapolate: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bands.is_empty() {
            return Err(Error::InvalidInput("calibration has no bands".into()));
        }
        for w in self.bands.windows(2) {
            if !(w[0].band_km < w[1].band_km) {
                return Err(Error::InvalidInput("calibration bands must be strictly increasing".into()));
            }
        }
        for b in &self.bands {
            if !(b.a > 0.0) || !(b.p > 0.0 && b.p < 2.0) {
                return Err(Error::InvalidInput(format!("calibration band {} km out of range", b.band_km)));
            }
        }
        Ok(())
    }

    /// Linear interpolation between bracketing bands.
    pub fn params(&self, distance_km: f64) -> Result<(f64, f64)> {
        let b = &self.bands;
        let (first, last) = (b[0], b[b.len() - 1]);
        if distance_km <= first.band_km || distance_km >= last.band_km {
            let edge = if distance_km <= first.band_km { first } else { last };
            if edge.band_km == distance_km || self.extrapolate {
                return Ok((edge.a, edge.p));
            }
            return Err(Error::MissingCalibration(distance_km));
        }
        let i = b.partition_point(|x| x.band_km <= distance_km);
        let (lo, hi) = (b[i - 1], b[i]);
        let t = (distance_km - lo.band_km) / (hi.band_km - lo.band_km);
        Ok((lo.a + t * (hi.a - lo.a), lo.p + t * (hi.p - lo.p)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Calibration = serde_json::from_str(text).map_err(|e| Error::ParseError(vec![e.to_string()]))?;
        if c.version != CALIBRATION_VERSION {
            return Err(Error::ParseError(vec![format!("unsupported calibration version {}", c.version)]));
        }
        c.validate()?;
        Ok(c)
    }
}

/// Double-log least squares of `(a, p)` for one band from SPSC estimates at
/// the given densities. `template` supplies every query field except
/// `distance_km` and `lambda_eve`.
pub fn fit_band(template: &SpscQuery, band_km: f64, lambdas: &[f64], estimates: &[f64]) -> Result<CalibrationBand> {
    let q = SpscQuery { distance_km: band_km, ..*template };
    let alpha = q.alpha;
    let bracket = statrs::function::gamma::gamma(1.0 - 2.0 / alpha)
        - 2.0 * q.jamming_ratio() / alpha * statrs::function::gamma::gamma(2.0 - 2.0 / alpha);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&lam, &p) in lambdas.iter().zip(estimates) {
        if !(p > 0.0) || p >= SATURATED || bracket <= 0.0 {
            continue;
        }
        xs.push(kappa(lam, alpha).ln());
        ys.push((-p.ln()).ln() - (bracket * band_km * band_km).ln());
    }
    if xs.len() < 3 {
        return Err(Error::DegenerateFit { band_km, cells: xs.len() });
    }
    let (ln_a, p) = linear_fit(&xs, &ys).ok_or(Error::DegenerateFit { band_km, cells: xs.len() })?;
    Ok(CalibrationBand { band_km, a: ln_a.exp(), p })
}

/// Monte-Carlo estimates on a (band, λ) grid followed by a per-band fit.
pub fn calibrate(
    template: &SpscQuery,
    fading: FadingModel,
    distance_bands_km: &[f64],
    lambda_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Calibration> {
    if trials < 10_000 {
        return Err(Error::InsufficientTrials { required: 10_000, got: trials });
    }
    let bands: Result<Vec<CalibrationBand>> = distance_bands_km
        .par_iter()
        .enumerate()
        .map(|(bi, &d)| {
            let estimates: Result<Vec<f64>> = lambda_grid
                .iter()
                .enumerate()
                .map(|(li, &lam)| {
                    let q = SpscQuery { distance_km: d, lambda_eve: lam, ..*template };
                    let r = super::default_region_radius(d);
                    let cell_seed = mix_seed(seed, (bi as u64) << 32 | li as u64);
                    spsc_monte_carlo(&q, fading, trials, r, cell_seed).map(|e| e.probability)
                })
                .collect();
            fit_band(template, d, lambda_grid, &estimates?)
        })
        .collect();
    Calibration::new(bands?)
}
