//! Closed-form radio resource management on a fixed tree: per-node bandwidth
//! shares, the transmit/jamming power split and the resulting max-min
//! throughput, plus a checker for the optimality conditions.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::json;

use crate::channel::link_budget;
use crate::error::{Error, Result};
use crate::routing::{Edge, Network, RoutingGraph};
use crate::secrecy::{spsc_calibrated, SpscQuery};

/// Relative tolerance for allocation invariants.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSplit {
    pub rho: BTreeMap<usize, f64>,
    pub sigma: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// β per (edge, user).
    pub bandwidth_hz: BTreeMap<(Edge, usize), f64>,
    pub tx_psd: BTreeMap<usize, f64>,
    pub jam_psd: BTreeMap<usize, f64>,
    pub gammas: BTreeMap<Edge, f64>,
    pub min_throughput_bps: f64,
}

/// Jamming PSD node `v` needs so every outgoing edge of `graph` meets the threshold.
pub fn required_node_jamming(net: &Network, graph: &RoutingGraph, v: usize) -> Result<f64> {
    let mut tau_i: f64 = 0.0;
    for &(a, b) in graph.edges.iter().filter(|e| e.0 == v) {
        tau_i = tau_i.max(net.link_or_compute(a, b)?.sigma_req);
    }
    Ok(tau_i)
}

/// `σ* = τ_i`, `ρ* = p_max − τ_i` on transmitting nodes; `(p_max, 0)` elsewhere.
pub fn optimal_power_split(graph: &RoutingGraph, net: &Network) -> Result<PowerSplit> {
    let transmitters = graph.transmitters();
    let mut rho = BTreeMap::new();
    let mut sigma = BTreeMap::new();
    for &v in &graph.node_ids {
        let node = &net.nodes[v];
        let p_max = node.p_max_psd();
        if !transmitters.contains(&v) {
            rho.insert(v, p_max);
            sigma.insert(v, 0.0);
            continue;
        }
        let tau_i = required_node_jamming(net, graph, v)?;
        let budget = node.jamming_budget_psd();
        if tau_i > budget * (1.0 + EPS) {
            return Err(Error::InfeasibleLink { node: v, required: tau_i, budget });
        }
        rho.insert(v, p_max - tau_i);
        sigma.insert(v, tau_i);
    }
    Ok(PowerSplit { rho, sigma })
}

pub fn edge_gammas(graph: &RoutingGraph, net: &Network, split: &PowerSplit) -> Result<BTreeMap<Edge, f64>> {
    let mut out = BTreeMap::new();
    for &(a, b) in &graph.edges {
        let link = net.link_or_compute(a, b)?;
        out.insert((a, b), link.spectral_efficiency(split.rho[&a]));
    }
    Ok(out)
}

/// `Σ_{j,u} h_u / γ_(i,j)` for every transmitting node.
fn node_loads(graph: &RoutingGraph, gammas: &BTreeMap<Edge, f64>) -> Result<BTreeMap<usize, f64>> {
    let mut loads: BTreeMap<usize, f64> = BTreeMap::new();
    for (&u, path) in &graph.user_paths {
        let h = graph.hop_counts[&u] as f64;
        for e in path {
            let g = gammas.get(e).copied().unwrap_or(0.0);
            if !(g > 0.0) {
                return Err(Error::ZeroRate(e.0, e.1));
            }
            *loads.entry(e.0).or_default() += h / g;
        }
    }
    Ok(loads)
}

/// `β*_(i,j),u = B_i (h_u/γ) / Σ (h/γ)` on every used edge.
pub fn optimal_bandwidth(
    graph: &RoutingGraph,
    gammas: &BTreeMap<Edge, f64>,
    budget: impl Fn(usize) -> f64,
) -> Result<BTreeMap<(Edge, usize), f64>> {
    let loads = node_loads(graph, gammas)?;
    let mut beta = BTreeMap::new();
    for (&u, path) in &graph.user_paths {
        let h = graph.hop_counts[&u] as f64;
        for e in path {
            beta.insert((*e, u), budget(e.0) * (h / gammas[e]) / loads[&e.0]);
        }
    }
    Ok(beta)
}

/// Min over transmitting nodes of `B_i / Σ (h/γ)`; zero without traffic.
pub fn min_throughput(graph: &RoutingGraph, gammas: &BTreeMap<Edge, f64>, budget: impl Fn(usize) -> f64) -> Result<f64> {
    let loads = node_loads(graph, gammas)?;
    let m = loads.iter().map(|(&v, &s)| budget(v) / s).fold(f64::INFINITY, f64::min);
    Ok(if m.is_finite() { m } else { 0.0 })
}

/// Full closed-form allocation for a tree.
pub fn allocate(graph: &RoutingGraph, net: &Network) -> Result<Allocation> {
    let split = optimal_power_split(graph, net)?;
    let gammas = edge_gammas(graph, net, &split)?;
    let budget = |v: usize| net.nodes[v].bandwidth_hz;
    let bandwidth_hz = optimal_bandwidth(graph, &gammas, budget)?;
    let min_throughput_bps = min_throughput(graph, &gammas, budget)?;
    Ok(Allocation { bandwidth_hz, tx_psd: split.rho, jam_psd: split.sigma, gammas, min_throughput_bps })
}

impl Allocation {
    /// Rate `β γ / h_u` of each (edge, user) flow.
    pub fn flow_rates(&self, graph: &RoutingGraph) -> BTreeMap<(Edge, usize), f64> {
        self.bandwidth_hz
            .iter()
            .map(|(&(e, u), &b)| ((e, u), b * self.gammas[&e] / graph.hop_counts[&u] as f64))
            .collect()
    }

    pub fn to_json(&self, net: &Network) -> serde_json::Value {
        let nodes: serde_json::Map<String, serde_json::Value> = self
            .tx_psd
            .iter()
            .map(|(&v, &rho)| {
                let n = &net.nodes[v];
                let sigma = self.jam_psd[&v];
                let sigma_dbm = if sigma > 0.0 { json!(n.psd_to_dbm(sigma)) } else { serde_json::Value::Null };
                (v.to_string(), json!({ "rho_dbm": n.psd_to_dbm(rho), "sigma_dbm": sigma_dbm }))
            })
            .collect();
        let edges: Vec<serde_json::Value> = self
            .bandwidth_hz
            .iter()
            .map(|(&((a, b), u), &bw)| json!({ "from": a, "to": b, "user": u, "bandwidth_hz": bw, "gamma": self.gammas[&(a, b)] }))
            .collect();
        json!({ "nodes": nodes, "edges": edges, "min_throughput_bps": self.min_throughput_bps })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum KktViolation {
    Saturation { node: usize, relative: f64 },
    Equalization { node: usize, spread: f64 },
    PowerSum { node: usize, relative: f64 },
    JammingLevel { node: usize, relative: f64 },
    BelowFloor { node: usize },
    Spsc { edge: Edge, probability: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct KktReport {
    pub violations: Vec<KktViolation>,
}

impl KktReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn spsc_query(net: &Network, from: usize, to: usize, sigma: f64) -> Result<SpscQuery> {
    let (tx, rx) = (&net.nodes[from], &net.nodes[to]);
    let b = link_budget(tx, rx)?;
    Ok(SpscQuery {
        distance_km: b.distance_km,
        alpha: b.alpha,
        lambda_eve: net.field.effective_density(&tx.position, tx.layer, b.distance_km),
        sigma,
        gain_linear: b.gain_linear,
        noise_psd: b.noise_psd,
    })
}

/// Checks saturation, equalization, `ρ + σ = p_max`, `σ = τ_i` and the SPSC
/// threshold on every edge, all at relative tolerance `tol`.
pub fn kkt_verify(alloc: &Allocation, graph: &RoutingGraph, net: &Network, tol: f64) -> Result<KktReport> {
    let mut v = Vec::new();
    let rates = alloc.flow_rates(graph);
    let transmitters: BTreeSet<usize> = alloc.bandwidth_hz.keys().map(|((a, _), _)| *a).collect();
    for &i in &transmitters {
        let b = net.nodes[i].bandwidth_hz;
        let used: f64 = alloc.bandwidth_hz.iter().filter(|(k, _)| k.0 .0 == i).map(|(_, &x)| x).sum();
        let rel = (used - b).abs() / b;
        if rel > tol {
            v.push(KktViolation::Saturation { node: i, relative: rel });
        }
        let node_rates: Vec<f64> = rates.iter().filter(|(k, _)| k.0 .0 == i).map(|(_, &r)| r).collect();
        let hi = node_rates.iter().copied().fold(f64::MIN, f64::max);
        let lo = node_rates.iter().copied().fold(f64::MAX, f64::min);
        if (hi - lo) / hi > tol {
            v.push(KktViolation::Equalization { node: i, spread: (hi - lo) / hi });
        }
    }
    for &i in &graph.node_ids {
        let node = &net.nodes[i];
        let p_max = node.p_max_psd();
        let (rho, sigma) = (alloc.tx_psd[&i], alloc.jam_psd[&i]);
        let rel = (rho + sigma - p_max).abs() / p_max;
        if rel > tol {
            v.push(KktViolation::PowerSum { node: i, relative: rel });
        }
        if rho < node.p_min_psd() * (1.0 - tol) {
            v.push(KktViolation::BelowFloor { node: i });
        }
        let tau_i = if graph.edges.iter().any(|e| e.0 == i) { required_node_jamming(net, graph, i)? } else { 0.0 };
        let rel = (sigma - tau_i).abs() / p_max;
        if rel > tol {
            v.push(KktViolation::JammingLevel { node: i, relative: rel });
        }
    }
    for &(a, b) in &graph.edges {
        let q = spsc_query(net, a, b, alloc.jam_psd[&a])?;
        let p = spsc_calibrated(&q, &net.field)?;
        if p < net.tau * (1.0 - tol) {
            v.push(KktViolation::Spsc { edge: (a, b), probability: p });
        }
    }
    Ok(KktReport { violations: v })
}
