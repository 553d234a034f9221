//! Node datasets and randomized scenarios.

mod ingest;

pub use ingest::{
    load_nodes, load_nodes_report, load_scenario, nodes_report_from_text, scenario_from_text, write_nodes_csv,
    write_nodes_json, LoadReport, NodeRecord, Role,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{chord_km, GeoPosition, LayerKind, NodeSpec, PerLayer};
use crate::error::{Error, Result};
use crate::secrecy::{Calibration, EveField};

pub const HAP_ALTITUDE_KM: f64 = 20.0;
pub const LEO_ALTITUDE_KM: f64 = 550.0;
pub const DEFAULT_P_MIN_RATIO: f64 = 0.8;
const BUNDLED_CALIBRATION: &str = include_str!("../../data/calibration.json");
/// Mozambique channel snapshot shipped with the crate (CSV).
pub const BUNDLED_TESTBED_CSV: &str = include_str!("../../data/mozambique_channel_sample.csv");

/// Radio parameters of one layer, in the units of the published table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub carrier_ghz: f64,
    pub bandwidth_mhz: f64,
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: PerLayer<f64>,
    pub rx_gain_dbi: PerLayer<f64>,
    pub gain_to_noise_temp_dbk: PerLayer<f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDefaults {
    pub layers: PerLayer<LayerParams>,
    pub p_min_ratio: f64,
}

fn toward_space(leo: f64, terrestrial: f64) -> PerLayer<f64> {
    PerLayer { space: leo, air: terrestrial, ground: terrestrial, sea: terrestrial }
}

/// Ground, maritime, HAP and LEO parameters.
pub fn layer_defaults() -> LayerDefaults {
    let terrestrial = |gt_leo: f64, gt_other: f64, alpha: f64| LayerParams {
        carrier_ghz: 14.0,
        bandwidth_mhz: 250.0,
        tx_power_dbm: 30.0,
        tx_gain_dbi: toward_space(43.2, 25.0),
        rx_gain_dbi: toward_space(39.7, 25.0),
        gain_to_noise_temp_dbk: toward_space(gt_leo, gt_other),
        alpha,
    };
    let leo = LayerParams {
        carrier_ghz: 20.0,
        bandwidth_mhz: 400.0,
        tx_power_dbm: 21.5,
        tx_gain_dbi: PerLayer::splat(38.5),
        rx_gain_dbi: PerLayer::splat(38.5),
        gain_to_noise_temp_dbk: PerLayer::splat(13.0),
        alpha: 2.4,
    };
    LayerDefaults {
        layers: PerLayer {
            space: leo,
            air: terrestrial(1.5, 16.2, 2.6),
            ground: terrestrial(1.2, 15.9, 2.8),
            sea: terrestrial(1.2, 15.9, 2.7),
        },
        p_min_ratio: DEFAULT_P_MIN_RATIO,
    }
}

impl LayerDefaults {
    pub fn with_p_min_ratio(mut self, ratio: f64) -> Self {
        self.p_min_ratio = ratio;
        self
    }

    pub fn with_bandwidth_hz(mut self, bw: &PerLayer<f64>) -> Self {
        for l in LayerKind::ALL {
            let mut p = self.layers.get(l);
            p.bandwidth_mhz = bw.get(l) / 1e6;
            self.layers.set(l, p);
        }
        self
    }

    pub fn node(&self, id: usize, layer: LayerKind, position: GeoPosition) -> NodeSpec {
        let p = self.layers.get(layer);
        NodeSpec {
            id,
            layer,
            position,
            p_max_dbm: p.tx_power_dbm,
            p_min_dbm: p.tx_power_dbm + 10.0 * self.p_min_ratio.max(1e-12).log10(),
            tx_gain_dbi: p.tx_gain_dbi,
            rx_gain_dbi: p.rx_gain_dbi,
            gain_to_noise_temp_dbk: p.gain_to_noise_temp_dbk,
            alpha: p.alpha,
            bandwidth_hz: p.bandwidth_mhz * 1e6,
        }
    }
}

pub fn bundled_calibration() -> Calibration {
    Calibration::from_json(BUNDLED_CALIBRATION).expect("bundled calibration is valid")
}

/// The bundled Mozambique channel snapshot as a scenario.
pub fn bundled_testbed(defaults: &LayerDefaults) -> Result<Scenario> {
    scenario_from_text(BUNDLED_TESTBED_CSV, false, defaults)
}

/// Baseline Eve densities (space, air, ground, sea) with the bundled calibration.
pub fn default_eve_field() -> EveField {
    EveField {
        density_per_layer: PerLayer { space: 1e-3, air: 2e-3, ground: 3e-4, sea: 1e-4 },
        hotspots: Vec::new(),
        calibration: Some(bundled_calibration()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayerCounts {
    pub ground: usize,
    pub maritime: usize,
    pub haps: usize,
    pub leo: usize,
    pub users: usize,
}

impl Default for LayerCounts {
    fn default() -> Self {
        LayerCounts { ground: 13, maritime: 13, haps: 2, leo: 2, users: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl Default for BoundingBox {
    fn default() -> Self {
        BoundingBox { lat_min: -30.0, lat_max: -10.0, lon_min: 30.0, lon_max: 60.0 }
    }
}

impl BoundingBox {
    pub fn contains(&self, p: &GeoPosition) -> bool {
        (self.lat_min..=self.lat_max).contains(&p.latitude_deg) && (self.lon_min..=self.lon_max).contains(&p.longitude_deg)
    }

    pub fn center(&self) -> GeoPosition {
        GeoPosition {
            latitude_deg: 0.5 * (self.lat_min + self.lat_max),
            longitude_deg: 0.5 * (self.lon_min + self.lon_max),
            altitude_km: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub counts: LayerCounts,
    pub bbox: BoundingBox,
    pub eve_field: EveField,
    pub tau: f64,
    pub p_min_ratio: f64,
    pub bandwidth_hz: PerLayer<f64>,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            counts: LayerCounts::default(),
            bbox: BoundingBox::default(),
            eve_field: default_eve_field(),
            tau: 0.9999,
            p_min_ratio: DEFAULT_P_MIN_RATIO,
            bandwidth_hz: PerLayer { space: 400e6, air: 250e6, ground: 250e6, sea: 250e6 },
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidInput(format!("tau {} outside (0, 1)", self.tau)));
        }
        if !(0.0..=1.0).contains(&self.p_min_ratio) {
            return Err(Error::InvalidInput(format!("p_min_ratio {} outside [0, 1]", self.p_min_ratio)));
        }
        let b = &self.bbox;
        if !(b.lat_min <= b.lat_max && b.lon_min <= b.lon_max) {
            return Err(Error::InvalidInput("empty bounding box".into()));
        }
        GeoPosition::new(b.lat_min, b.lon_min, 0.0)?;
        GeoPosition::new(b.lat_max, b.lon_max, 0.0)?;
        self.eve_field.validate()
    }

    pub fn layer_defaults(&self) -> LayerDefaults {
        layer_defaults().with_p_min_ratio(self.p_min_ratio).with_bandwidth_hz(&self.bandwidth_hz)
    }

    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::ParseError(vec![e.to_string()]))?
        } else {
            toml::from_str(text).map_err(|e| Error::ParseError(vec![e.to_string()]))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// A node set with its root and users. Node ids equal their index; the root,
/// when present, is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub nodes: Vec<NodeSpec>,
    pub root: Option<usize>,
    pub users: Vec<usize>,
}

impl Scenario {
    /// Reorders so the root comes first and renumbers ids to indices.
    pub fn assemble(mut relays: Vec<NodeSpec>, root: Option<usize>, users: Vec<NodeSpec>) -> Scenario {
        if let Some(r) = root {
            let node = relays.remove(r);
            relays.insert(0, node);
        }
        let n_relays = relays.len();
        let mut nodes = relays;
        nodes.extend(users);
        for (i, n) in nodes.iter_mut().enumerate() {
            n.id = i;
        }
        let users = (n_relays..nodes.len()).collect();
        Scenario { nodes, root: root.map(|_| 0), users }
    }

    pub fn relay_count(&self) -> usize {
        self.nodes.len() - self.users.len()
    }
}

fn sample_position<R: Rng>(rng: &mut R, b: &BoundingBox, altitude_km: f64) -> GeoPosition {
    let lat = if b.lat_max > b.lat_min { rng.random_range(b.lat_min..=b.lat_max) } else { b.lat_min };
    let lon = if b.lon_max > b.lon_min { rng.random_range(b.lon_min..=b.lon_max) } else { b.lon_min };
    GeoPosition { latitude_deg: lat, longitude_deg: lon, altitude_km }
}

/// Uniform placement per layer inside the box; the ground node nearest the
/// box centre becomes the root.
pub fn random_scenario(cfg: &ScenarioConfig) -> Scenario {
    let defaults = cfg.layer_defaults();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let c = &cfg.counts;
    let plan = [
        (LayerKind::Ground, c.ground, 0.0),
        (LayerKind::Sea, c.maritime, 0.0),
        (LayerKind::Air, c.haps, HAP_ALTITUDE_KM),
        (LayerKind::Space, c.leo, LEO_ALTITUDE_KM),
    ];
    let mut relays = Vec::new();
    for (layer, count, alt) in plan {
        for _ in 0..count {
            let pos = sample_position(&mut rng, &cfg.bbox, alt);
            relays.push(defaults.node(relays.len(), layer, pos));
        }
    }
    let users: Vec<NodeSpec> = (0..c.users)
        .map(|k| defaults.node(relays.len() + k, LayerKind::Ground, sample_position(&mut rng, &cfg.bbox, 0.0)))
        .collect();
    let center = cfg.bbox.center();
    let root = relays
        .iter()
        .enumerate()
        .filter(|(_, n)| n.layer == LayerKind::Ground)
        .min_by(|a, b| chord_km(&a.1.position, &center).total_cmp(&chord_km(&b.1.position, &center)))
        .map(|(i, _)| i);
    Scenario::assemble(relays, root, users)
}
