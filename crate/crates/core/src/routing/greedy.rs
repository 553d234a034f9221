use super::astar::metric_path;
use super::{AStarMetric, FlowState, Network, RoutingSolution};
use crate::error::Result;

/// Users in id order; each takes the candidate with the best system
/// min-throughput given the paths already committed. Candidates join the tree
/// at every in-tree node and continue along the shortest fresh path under each
/// A* metric.
pub fn greedy_route(net: &Network) -> Result<RoutingSolution> {
    let mut state = FlowState::new(net);
    let mut trace = Vec::new();
    for &u in net.served_users() {
        let attach: Vec<usize> = (0..net.len()).filter(|&v| state.in_tree(v)).collect();
        let mut best: Option<(Vec<usize>, f64)> = None;
        for &v in &attach {
            for metric in AStarMetric::ALL {
                let Some(suffix) = metric_path(net, metric, v, u, |w| !state.in_tree(w)) else { continue };
                let mut path = state.tree_path(v);
                path.extend_from_slice(&suffix[1..]);
                if !state.add_path(u, &path) {
                    continue;
                }
                let val = state.objective();
                state.remove_path(u);
                if best.as_ref().is_none_or(|b| val > b.1) {
                    best = Some((path, val));
                }
            }
        }
        if let Some((path, val)) = best {
            state.add_path(u, &path);
            trace.push(val);
        }
    }
    RoutingSolution::new(net, "greedy", state.paths(), trace)
}
