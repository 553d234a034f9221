#![allow(dead_code)]

use std::collections::BTreeSet;

use sagsin_core::channel::{GeoPosition, LayerKind, NodeSpec};
use sagsin_core::routing::{Edge, Network};
use sagsin_core::testbed::{default_eve_field, layer_defaults, random_scenario, LayerCounts, ScenarioConfig};

pub const TAU: f64 = 0.9999;

pub fn ground(id: usize, lat: f64, lon: f64) -> NodeSpec {
    layer_defaults().node(id, LayerKind::Ground, GeoPosition::new(lat, lon, 0.0).unwrap())
}

/// Ground nodes at the given (lat, lon); node 0 is the root.
pub fn net_on(points: &[(f64, f64)], users: &[usize], allowed: Option<&[Edge]>) -> Network {
    let nodes: Vec<NodeSpec> = points.iter().enumerate().map(|(i, &(la, lo))| ground(i, la, lo)).collect();
    match allowed {
        Some(e) => {
            let set: BTreeSet<Edge> = e.iter().copied().collect();
            Network::with_allowed_edges(nodes, 0, users.to_vec(), default_eve_field(), TAU, &set).unwrap()
        }
        None => Network::new(nodes, 0, users.to_vec(), default_eve_field(), TAU).unwrap(),
    }
}

pub fn small_config(seed: u64, counts: LayerCounts) -> ScenarioConfig {
    ScenarioConfig { seed, counts, ..Default::default() }
}

/// Random scenario network; `None` when it has no root.
pub fn scenario_net(cfg: &ScenarioConfig) -> Option<Network> {
    let s = random_scenario(cfg);
    s.root?;
    Some(Network::from_scenario(&s, &cfg.eve_field, cfg.tau).unwrap())
}

pub fn tiny(seed: u64) -> Network {
    let counts = LayerCounts { ground: 3, maritime: 1, haps: 1, leo: 0, users: 3 };
    scenario_net(&small_config(seed, counts)).expect("ground nodes present")
}
