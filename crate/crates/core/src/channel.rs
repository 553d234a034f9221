//! Geometry and propagation: geodetic positions, chord distances, link SNR,
//! spectral efficiency and the ergodic spectral-efficiency fit.
//!
//! All quantities are linear inside this module. Conversions from dB, dBi and
//! dBm happen in the helpers below.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::stream_rng;

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const BOLTZMANN: f64 = 1.380649e-23;
/// Path loss is referenced to 1 m while distances are carried in km.
pub const PATHLOSS_REFERENCE_KM: f64 = 1e-3;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPosition {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub altitude_km: f64,
}

impl GeoPosition {
    pub fn new(latitude_deg: f64, longitude_deg: f64, altitude_km: f64) -> Result<Self> {
        let p = GeoPosition { latitude_deg, longitude_deg, altitude_km };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (-90.0..=90.0).contains(&self.latitude_deg)
            && (-180.0..=180.0).contains(&self.longitude_deg)
            && self.altitude_km >= -0.5
            && self.altitude_km.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("position out of range: {self:?}")))
        }
    }
}

/// Earth-centred Cartesian coordinates in km on a spherical Earth.
pub fn geodetic_to_cartesian(p: &GeoPosition) -> [f64; 3] {
    let r = EARTH_RADIUS_KM + p.altitude_km;
    let (phi, lam) = (p.latitude_deg.to_radians(), p.longitude_deg.to_radians());
    [r * phi.cos() * lam.cos(), r * phi.cos() * lam.sin(), r * phi.sin()]
}

pub fn chord_km(a: &GeoPosition, b: &GeoPosition) -> f64 {
    let (pa, pb) = (geodetic_to_cartesian(a), geodetic_to_cartesian(b));
    ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2) + (pa[2] - pb[2]).powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Space,
    Air,
    Ground,
    Sea,
}

impl LayerKind {
    pub const ALL: [LayerKind; 4] = [LayerKind::Space, LayerKind::Air, LayerKind::Ground, LayerKind::Sea];

    pub fn parse(tag: &str) -> Option<Self> {
        match tag.trim().to_ascii_lowercase().as_str() {
            "space" | "leo" | "satellite" => Some(LayerKind::Space),
            "air" | "hap" | "haps" => Some(LayerKind::Air),
            "ground" | "bs" | "cell" => Some(LayerKind::Ground),
            "sea" | "maritime" | "ship" | "vessel" => Some(LayerKind::Sea),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            LayerKind::Space => "space",
            LayerKind::Air => "air",
            LayerKind::Ground => "ground",
            LayerKind::Sea => "sea",
        }
    }
}

/// One value per layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerLayer<T> {
    pub space: T,
    pub air: T,
    pub ground: T,
    pub sea: T,
}

impl<T: Copy> PerLayer<T> {
    pub fn splat(v: T) -> Self {
        PerLayer { space: v, air: v, ground: v, sea: v }
    }

    pub fn get(&self, layer: LayerKind) -> T {
        match layer {
            LayerKind::Space => self.space,
            LayerKind::Air => self.air,
            LayerKind::Ground => self.ground,
            LayerKind::Sea => self.sea,
        }
    }

    pub fn set(&mut self, layer: LayerKind, v: T) {
        match layer {
            LayerKind::Space => self.space = v,
            LayerKind::Air => self.air = v,
            LayerKind::Ground => self.ground = v,
            LayerKind::Sea => self.sea = v,
        }
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> PerLayer<U> {
        PerLayer { space: f(self.space), air: f(self.air), ground: f(self.ground), sea: f(self.sea) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: usize,
    pub layer: LayerKind,
    pub position: GeoPosition,
    /// Total transmit power over the node's band.
    pub p_max_dbm: f64,
    pub p_min_dbm: f64,
    /// Gain toward a peer of the given layer.
    pub tx_gain_dbi: PerLayer<f64>,
    /// Gain when receiving from a peer of the given layer.
    pub rx_gain_dbi: PerLayer<f64>,
    /// Receiver figure of merit when receiving from a peer of the given layer.
    pub gain_to_noise_temp_dbk: PerLayer<f64>,
    pub alpha: f64,
    pub bandwidth_hz: f64,
}

impl NodeSpec {
    pub fn validate(&self) -> Result<()> {
        self.position.validate()?;
        if !(self.p_min_dbm <= self.p_max_dbm) {
            return Err(Error::InvalidInput(format!("node {}: p_min above p_max", self.id)));
        }
        if !(self.alpha > 2.0) {
            return Err(Error::FreeSpaceDivergence(self.alpha));
        }
        let gains = [self.tx_gain_dbi, self.rx_gain_dbi, self.gain_to_noise_temp_dbk];
        if gains.iter().any(|g| LayerKind::ALL.iter().any(|l| !g.get(*l).is_finite())) {
            return Err(Error::InvalidInput(format!("node {}: non-finite gain", self.id)));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::InvalidInput(format!("node {}: bandwidth must be positive", self.id)));
        }
        Ok(())
    }

    /// Maximum transmit PSD in W/Hz.
    pub fn p_max_psd(&self) -> f64 {
        dbm_to_watts(self.p_max_dbm) / self.bandwidth_hz
    }

    pub fn p_min_psd(&self) -> f64 {
        dbm_to_watts(self.p_min_dbm) / self.bandwidth_hz
    }

    /// PSD available for jamming at full budget.
    pub fn jamming_budget_psd(&self) -> f64 {
        (self.p_max_psd() - self.p_min_psd()).max(0.0)
    }

    pub fn psd_to_dbm(&self, psd: f64) -> f64 {
        watts_to_dbm(psd * self.bandwidth_hz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub distance_km: f64,
    pub gain_linear: f64,
    pub noise_psd: f64,
    pub alpha: f64,
}

impl LinkBudget {
    /// `gain · d^-α / n₀`: SNR per unit transmit PSD at unit fading power.
    pub fn snr_per_watt(&self) -> f64 {
        self.gain_linear / (self.noise_psd * self.distance_km.powf(self.alpha))
    }
}

pub fn link_distance(a: &NodeSpec, b: &NodeSpec) -> Result<f64> {
    let d = chord_km(&a.position, &b.position);
    if d <= 0.0 {
        return Err(Error::ZeroDistance(a.id, b.id));
    }
    Ok(d)
}

/// Antenna gain product of `tx` toward `rx`, including the 1 m path-loss reference.
pub fn link_gain(tx: &NodeSpec, rx: &NodeSpec) -> f64 {
    let antennas = db_to_linear(tx.tx_gain_dbi.get(rx.layer) + rx.rx_gain_dbi.get(tx.layer));
    antennas * PATHLOSS_REFERENCE_KM.powf(tx.alpha)
}

/// Noise PSD at `rx` when receiving from a node in layer `from`.
pub fn noise_psd(rx: &NodeSpec, from: LayerKind) -> f64 {
    let temperature = db_to_linear(rx.rx_gain_dbi.get(from)) / db_to_linear(rx.gain_to_noise_temp_dbk.get(from));
    BOLTZMANN * temperature
}

pub fn link_budget(tx: &NodeSpec, rx: &NodeSpec) -> Result<LinkBudget> {
    Ok(LinkBudget {
        distance_km: link_distance(tx, rx)?,
        gain_linear: link_gain(tx, rx),
        noise_psd: noise_psd(rx, tx.layer),
        alpha: tx.alpha,
    })
}

pub fn snr_legitimate(rho: f64, budget: &LinkBudget, fading_power: f64) -> f64 {
    rho * budget.gain_linear * fading_power / (budget.noise_psd * budget.distance_km.powf(budget.alpha))
}

#[allow(clippy::too_many_arguments)]
pub fn snr_wiretap(
    rho: f64,
    sigma: f64,
    gain_linear: f64,
    eve_distance_km: f64,
    alpha: f64,
    noise_psd: f64,
    eve_fading_power: f64,
) -> f64 {
    let path = gain_linear * eve_fading_power * eve_distance_km.powf(-alpha);
    rho * path / (sigma * path + noise_psd)
}

pub fn spectral_efficiency(rho: f64, budget: &LinkBudget) -> f64 {
    (rho * budget.snr_per_watt()).ln_1p() / std::f64::consts::LN_2
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicFit {
    pub scale: f64,
    pub mse: f64,
    /// `(snr_db, monte_carlo, standard_error, closed_form)` per grid point.
    pub points: Vec<(f64, f64, f64, f64)>,
}

pub const ERGODIC_MIN_TRIALS: usize = 10_000;
const ERGODIC_SEED: u64 = 0x5eed_e60d;

/// Fits `scale·log2(1+SNR)` to Monte-Carlo estimates of `E[log2(1+SNR·|h|²)]`
/// under Rayleigh fading.
pub fn ergodic_se_fit(snr_grid_db: &[f64], trials: usize) -> Result<ErgodicFit> {
    ergodic_se_fit_seeded(snr_grid_db, trials, ERGODIC_SEED)
}

pub fn ergodic_se_fit_seeded(snr_grid_db: &[f64], trials: usize, seed: u64) -> Result<ErgodicFit> {
    if trials < ERGODIC_MIN_TRIALS {
        return Err(Error::InsufficientTrials { required: ERGODIC_MIN_TRIALS, got: trials });
    }
    if snr_grid_db.is_empty() {
        return Err(Error::InvalidInput("empty SNR grid".into()));
    }
    let points: Vec<(f64, f64, f64, f64)> = snr_grid_db
        .par_iter()
        .enumerate()
        .map(|(k, &db)| {
            let snr = db_to_linear(db);
            let mut rng = stream_rng(seed, k as u64);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..trials {
                let h: f64 = rng.sample(Exp1);
                let v = (snr * h).ln_1p() / std::f64::consts::LN_2;
                s += v;
                s2 += v * v;
            }
            let n = trials as f64;
            let mean = s / n;
            let se = ((s2 / n - mean * mean).max(0.0) / n).sqrt();
            (db, mean, se, snr.ln_1p() / std::f64::consts::LN_2)
        })
        .collect();
    let num: f64 = points.iter().map(|p| p.1 * p.3).sum();
    let den: f64 = points.iter().map(|p| p.3 * p.3).sum();
    let scale = num / den;
    let mse = points.iter().map(|p| (p.1 - scale * p.3).powi(2)).sum::<f64>() / points.len() as f64;
    Ok(ErgodicFit { scale, mse, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn budget(d: f64) -> LinkBudget {
        LinkBudget { distance_km: d, gain_linear: 1.0, noise_psd: 1.0, alpha: 2.8 }
    }

    #[test]
    fn cartesian_reference_points() {
        let e = geodetic_to_cartesian(&GeoPosition::new(0.0, 0.0, 0.0).unwrap());
        assert_relative_eq!(e[0], 6371.0);
        assert!(e[1].abs() < 1e-9 && e[2].abs() < 1e-9);
        let n = geodetic_to_cartesian(&GeoPosition::new(90.0, 0.0, 0.0).unwrap());
        assert!(n[0].abs() < 1e-9 && n[1].abs() < 1e-9);
        assert_relative_eq!(n[2], 6371.0);
    }

    #[test]
    fn cartesian_mid_latitude_hand_formula() {
        let c = geodetic_to_cartesian(&GeoPosition::new(45.0, 45.0, 550.0).unwrap());
        let r = 6921.0;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(c[0], r * h * h, max_relative = 1e-12);
        assert_relative_eq!(c[1], r * h * h, max_relative = 1e-12);
        assert_relative_eq!(c[2], r * h, max_relative = 1e-12);
    }

    #[test]
    fn rejects_out_of_range_position() {
        assert!(GeoPosition::new(91.0, 0.0, 0.0).is_err());
        assert!(GeoPosition::new(0.0, 181.0, 0.0).is_err());
        assert!(GeoPosition::new(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn snr_trivial_cases() {
        assert_eq!(snr_legitimate(0.0, &budget(1.0), 1.0), 0.0);
        assert_eq!(snr_legitimate(5.0, &budget(1.0), 0.0), 0.0);
        assert_relative_eq!(snr_legitimate(5.0, &budget(1.0), 1.0), 5.0);
    }

    #[test]
    fn wiretap_jamming_limit() {
        let v = snr_wiretap(1.0, 1e6, 1.0, 1.0, 2.8, 1.0, 1.0);
        assert!(v < 1e-5 * (1.0 + 1e-12));
    }

    #[test]
    fn spectral_efficiency_reference_values() {
        assert_relative_eq!(spectral_efficiency(1.0, &budget(1.0)), 1.0);
        assert_eq!(spectral_efficiency(0.0, &budget(1.0)), 0.0);
        assert_relative_eq!(spectral_efficiency(1000.0, &budget(1.0)), 9.967226258835993, max_relative = 1e-12);
    }

    #[test]
    fn ergodic_fit_rejects_few_trials() {
        assert!(matches!(ergodic_se_fit(&[0.0], 9_999), Err(Error::InsufficientTrials { .. })));
    }

    #[test]
    fn ergodic_low_snr_matches_closed_form() {
        let fit = ergodic_se_fit(&[-40.0], 200_000).unwrap();
        let (_, mc, _, cf) = fit.points[0];
        assert!((mc - cf).abs() / cf < 0.01);
    }

    #[test]
    fn noise_from_figure_of_merit() {
        let mut n = crate::testbed::layer_defaults().node(0, LayerKind::Ground, GeoPosition::new(0.0, 0.0, 0.0).unwrap());
        n.rx_gain_dbi = PerLayer::splat(30.0);
        n.gain_to_noise_temp_dbk = PerLayer::splat(10.0);
        // T = 10^(20/10) = 100 K
        assert_relative_eq!(noise_psd(&n, LayerKind::Space), BOLTZMANN * 100.0, max_relative = 1e-12);
    }
}
