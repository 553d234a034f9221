use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{shortest_path, FlowState, Link, Network, RoutingSolution};
use crate::channel::chord_km;
use crate::error::{Error, Result};

/// Fixed link cost for the A* baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AStarMetric {
    Distance,
    Hop,
    InverseSe,
}

impl AStarMetric {
    pub const ALL: [AStarMetric; 3] = [AStarMetric::Distance, AStarMetric::Hop, AStarMetric::InverseSe];

    /// Cost of `link`; inverse SE uses the transmitter's power after jamming.
    pub fn cost(self, net: &Network, link: &Link) -> f64 {
        match self {
            AStarMetric::Distance => link.distance_km,
            AStarMetric::Hop => 1.0,
            AStarMetric::InverseSe => {
                let rho = net.nodes[link.from].p_max_psd() - link.sigma_req;
                let se = link.spectral_efficiency(rho);
                if se > 0.0 {
                    1.0 / se
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AStarMetric::Distance => "astar_distance",
            AStarMetric::Hop => "astar_hop",
            AStarMetric::InverseSe => "astar_inverse_se",
        }
    }
}

impl fmt::Display for AStarMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AStarMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "distance" | "astar_distance" => Ok(AStarMetric::Distance),
            "hop" | "astar_hop" => Ok(AStarMetric::Hop),
            "inverse_se" | "astar_inverse_se" | "se" => Ok(AStarMetric::InverseSe),
            other => Err(Error::InvalidInput(format!("unknown A* metric '{other}'"))),
        }
    }
}

/// Metric shortest path from `from` to `user` avoiding nodes rejected by
/// `allowed`; the chord to the user is the heuristic for distance.
pub(crate) fn metric_path(
    net: &Network,
    metric: AStarMetric,
    from: usize,
    user: usize,
    allowed: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let target = net.nodes[user].position;
    shortest_path(
        net,
        from,
        user,
        |w| !net.is_user(w) && allowed(w),
        |_, l| metric.cost(net, l),
        |v| match metric {
            AStarMetric::Distance => chord_km(&net.nodes[v].position, &target),
            _ => 0.0,
        },
    )
}

/// Per-user shortest root path under `metric`, spliced into the tree in user
/// order so that the first committed parent of a node is kept.
pub fn astar_route(net: &Network, metric: AStarMetric) -> Result<RoutingSolution> {
    let mut state = FlowState::new(net);
    for &u in net.served_users() {
        let path = metric_path(net, metric, net.root, u, |_| true).ok_or(Error::Unreachable(u))?;
        let spliced = state.splice(&path);
        state.add_path(u, &spliced);
    }
    let trace = vec![state.objective()];
    RoutingSolution::new(net, metric.name(), state.paths(), trace)
}
