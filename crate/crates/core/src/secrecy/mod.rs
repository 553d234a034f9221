//! SPSC analytics against Poisson-distributed eavesdroppers.

mod calibration;
mod closed_form;
mod fading;
mod monte_carlo;

pub use calibration::{calibrate, fit_band, Calibration, CalibrationBand, CALIBRATION_VERSION};
pub use closed_form::{
    jensen_gap_bound, kappa, max_link_distance, min_jamming_calibrated, min_jamming_closed_form,
    required_jamming, spsc_calibrated, spsc_closed_form, spsc_with_kappa, MAX_SEARCH_KM,
};
pub use fading::FadingModel;
pub use monte_carlo::{
    default_region_radius, min_jamming_monte_carlo, spsc_monte_carlo, MonteCarloEstimate, MIN_MC_TRIALS,
};

use serde::{Deserialize, Serialize};

use crate::channel::{chord_km, GeoPosition, LayerKind, PerLayer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hotspot {
    pub center: GeoPosition,
    pub radius_km: f64,
    pub density_multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveField {
    /// Eve density in km⁻² for the layer of the transmitter.
    pub density_per_layer: PerLayer<f64>,
    #[serde(default)]
    pub hotspots: Vec<Hotspot>,
    /// `None` means the uncalibrated closed form.
    #[serde(default)]
    pub calibration: Option<Calibration>,
}

impl EveField {
    pub fn validate(&self) -> Result<()> {
        for l in LayerKind::ALL {
            let v = self.density_per_layer.get(l);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("Eve density for {} must be positive", l.tag())));
            }
        }
        for h in &self.hotspots {
            h.center.validate()?;
            if !(h.density_multiplier >= 1.0) || !(h.radius_km >= 0.0) {
                return Err(Error::InvalidInput("hotspot multiplier must be >= 1 and radius >= 0".into()));
            }
        }
        if let Some(c) = &self.calibration {
            c.validate()?;
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> EveField {
        EveField { density_per_layer: self.density_per_layer.map(|v| v * factor), ..self.clone() }
    }

    /// Density seen by a link of length `distance_km` from a transmitter at
    /// `origin`: the layer density times the largest multiplier among hotspots
    /// whose disk meets the transmitter-centred disk of that radius.
    pub fn effective_density(&self, origin: &GeoPosition, layer: LayerKind, distance_km: f64) -> f64 {
        let base = self.density_per_layer.get(layer);
        let boost = self
            .hotspots
            .iter()
            .filter(|h| chord_km(origin, &h.center) <= distance_km + h.radius_km)
            .map(|h| h.density_multiplier)
            .fold(1.0, f64::max);
        base * boost
    }

    /// `(a, p)` for a link length; identity when uncalibrated.
    pub fn calibration_at(&self, distance_km: f64) -> Result<(f64, f64)> {
        match &self.calibration {
            Some(c) => c.params(distance_km),
            None => Ok((1.0, 1.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpscQuery {
    pub distance_km: f64,
    pub alpha: f64,
    pub lambda_eve: f64,
    /// Jamming PSD, W/Hz.
    pub sigma: f64,
    pub gain_linear: f64,
    pub noise_psd: f64,
}

impl SpscQuery {
    /// `σG / (n₀ d^α)`: jamming-to-noise ratio at the legitimate distance.
    pub fn jamming_ratio(&self) -> f64 {
        self.sigma * self.gain_linear / (self.noise_psd * self.distance_km.powf(self.alpha))
    }

    pub(crate) fn check(&self) -> Result<()> {
        if !(self.alpha > 2.0) {
            return Err(Error::FreeSpaceDivergence(self.alpha));
        }
        if !(self.distance_km > 0.0) || !(self.lambda_eve >= 0.0) || !(self.sigma >= 0.0) {
            return Err(Error::InvalidInput(format!("bad SPSC query {self:?}")));
        }
        Ok(())
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("tau {tau} outside (0, 1)")))
    }
}
