//! GeoJSON rendering of routing solutions.

use std::collections::BTreeMap;

use sagsin_core::channel::NodeSpec;
use sagsin_core::routing::{Edge, Network, RoutingSolution};
use serde_json::{json, Value};

fn coordinates(n: &NodeSpec) -> Value {
    let p = &n.position;
    json!([p.longitude_deg, p.latitude_deg, p.altitude_km * 1e3])
}

/// Per-flow rate at each transmitter (min over its flows of `βγ/h`).
pub fn node_rates(sol: &RoutingSolution) -> BTreeMap<usize, f64> {
    let a = &sol.allocation;
    let mut out: BTreeMap<usize, f64> = BTreeMap::new();
    for (&(e, u), &beta) in &a.bandwidth_hz {
        let rate = beta * a.gammas[&e] / sol.graph.hop_counts[&u] as f64;
        let slot = out.entry(e.0).or_insert(f64::INFINITY);
        *slot = slot.min(rate);
    }
    out
}

/// User with the most hops; ties go to the smallest id.
pub fn longest_path_user(sol: &RoutingSolution) -> Option<usize> {
    sol.graph.hop_counts.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(&u, _)| u)
}

/// Transmitter with the lowest per-flow rate; ties go to the smallest id.
pub fn bottleneck_node(sol: &RoutingSolution) -> Option<usize> {
    node_rates(sol).into_iter().min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))).map(|(v, _)| v)
}

/// Every network node as a Point and every tree edge as a LineString.
pub fn export_geojson(sol: &RoutingSolution, net: &Network) -> Value {
    let rates = node_rates(sol);
    let bottleneck = bottleneck_node(sol);
    let longest = longest_path_user(sol);
    let longest_edges: Vec<Edge> = longest.map(|u| sol.graph.user_paths[&u].clone()).unwrap_or_default();
    let a = &sol.allocation;
    let mut features = Vec::with_capacity(net.len() + sol.graph.edges.len());
    for n in &net.nodes {
        let role = if n.id == net.root {
            "root"
        } else if net.is_user(n.id) {
            "user"
        } else {
            "relay"
        };
        let dbm = |m: &BTreeMap<usize, f64>| m.get(&n.id).filter(|&&p| p > 0.0).map(|&p| n.psd_to_dbm(p));
        let rate = rates.get(&n.id).copied();
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "Point", "coordinates": coordinates(n) },
            "properties": {
                "kind": "node",
                "id": n.id,
                "layer": n.layer.tag(),
                "role": role,
                "in_tree": sol.graph.node_ids.contains(&n.id),
                "rho_dbm": dbm(&a.tx_psd),
                "sigma_dbm": dbm(&a.jam_psd),
                "throughput_bps": rate,
                "throughput_share": rate.map(|r| sol.allocation.min_throughput_bps / r),
                "bottleneck": bottleneck == Some(n.id),
            }
        }));
    }
    for &(i, j) in &sol.graph.edges {
        let flows: Vec<(usize, f64)> =
            a.bandwidth_hz.iter().filter(|((e, _), _)| *e == (i, j)).map(|((_, u), &b)| (*u, b)).collect();
        features.push(json!({
            "type": "Feature",
            "geometry": {
                "type": "LineString",
                "coordinates": [coordinates(&net.nodes[i]), coordinates(&net.nodes[j])],
            },
            "properties": {
                "kind": "edge",
                "from": i,
                "to": j,
                "bandwidth_hz": flows.iter().map(|f| f.1).sum::<f64>(),
                "gamma": a.gammas.get(&(i, j)),
                "users": flows.iter().map(|f| f.0).collect::<Vec<_>>(),
                "longest_path": longest_edges.contains(&(i, j)),
            }
        }));
    }
    json!({
        "type": "FeatureCollection",
        "properties": {
            "method": sol.method,
            "min_throughput_bps": sol.min_throughput_bps,
            "unserved": sol.unserved,
            "longest_path_user": longest,
            "bottleneck_node": bottleneck,
        },
        "features": features,
    })
}
