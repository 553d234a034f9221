//! Feasible-graph construction, spanning-tree validation and tree search.

mod astar;
mod bruteforce;
mod eval;
mod genetic;
mod graph;
mod greedy;
mod mcrr;
mod network;
mod paths;

use std::collections::BTreeMap;

use serde::Serialize;

pub use astar::{astar_route, AStarMetric};
pub use bruteforce::{bruteforce_exact, bruteforce_route, bruteforce_sampled, BruteforceMode, EXACT_STATE_LIMIT};
pub use eval::FlowState;
pub use genetic::{genetic_route, genetic_route_from, GeneticConfig};
pub use graph::{validate_spanning_tree, Edge, RoutingGraph, TreeViolation};
pub use greedy::greedy_route;
pub use mcrr::{mcrr, McrrConfig};
pub use network::{build_feasible_graph, FeasibleGraph, Link, Network, DISTANCE_TOL_KM};
pub use paths::{
    link_weight, random_tree_paths, sample_candidate_paths, sample_paths_raw, shortest_path, shortest_path_tree,
    tree_paths, CandidatePath,
};

use crate::error::Result;
use crate::numeric::mix_seed;
use crate::rrm::{allocate, Allocation};

/// Output of every optimizer.
#[derive(Debug, Clone)]
pub struct RoutingSolution {
    pub method: String,
    pub graph: RoutingGraph,
    pub allocation: Allocation,
    /// Users with no feasible root path.
    pub unserved: Vec<usize>,
    /// Zero whenever a user is unserved.
    pub min_throughput_bps: f64,
    /// Objective after each accepted step (optimizer specific).
    pub trace: Vec<f64>,
}

impl RoutingSolution {
    pub fn new(net: &Network, method: &str, paths: &BTreeMap<usize, Vec<usize>>, trace: Vec<f64>) -> Result<Self> {
        let graph = RoutingGraph::from_node_paths(net.root, paths);
        let allocation = allocate(&graph, net)?;
        let unserved: Vec<usize> = net.users.iter().copied().filter(|u| !paths.contains_key(u)).collect();
        let min_throughput_bps = if unserved.is_empty() { allocation.min_throughput_bps } else { 0.0 };
        Ok(RoutingSolution { method: method.to_string(), graph, allocation, unserved, min_throughput_bps, trace })
    }

    pub fn to_json(&self, net: &Network) -> serde_json::Value {
        #[derive(Serialize)]
        struct Out<'a> {
            method: &'a str,
            min_throughput_bps: f64,
            unserved: &'a [usize],
            graph: &'a RoutingGraph,
            allocation: serde_json::Value,
        }
        serde_json::to_value(Out {
            method: &self.method,
            min_throughput_bps: self.min_throughput_bps,
            unserved: &self.unserved,
            graph: &self.graph,
            allocation: self.allocation.to_json(net),
        })
        .expect("solution serializes")
    }
}

/// Edges of `g` that are not feasible links or exceed their transmitter's range.
pub fn range_violations(net: &Network, g: &RoutingGraph) -> Vec<Edge> {
    g.edges
        .iter()
        .filter(|e| net.link(e.0, e.1).is_none_or(|l| l.distance_km > l.d_max_km))
        .copied()
        .collect()
}

/// A random feasible tree: random-weight shortest paths from the root.
pub fn random_tree(net: &Network, seed: u64) -> Result<RoutingSolution> {
    let paths = random_tree_paths(net, mix_seed(seed, 0x7265_6e64), |_| true);
    RoutingSolution::new(net, "random", &paths, Vec::new())
}
