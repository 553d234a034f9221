//! Optimizer selection shared by sweeps and the CLI.

use std::fmt;
use std::str::FromStr;

use sagsin_core::routing::{
    astar_route, bruteforce_exact, bruteforce_sampled, genetic_route, greedy_route, mcrr, AStarMetric, GeneticConfig,
    McrrConfig, Network, RoutingSolution, EXACT_STATE_LIMIT,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mcrr,
    BruteforceSampled,
    BruteforceExact,
    Genetic,
    Greedy,
    AstarDistance,
    AstarHop,
    AstarInverseSe,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Mcrr,
        Method::BruteforceSampled,
        Method::BruteforceExact,
        Method::Genetic,
        Method::Greedy,
        Method::AstarDistance,
        Method::AstarHop,
        Method::AstarInverseSe,
    ];

    /// Every method except exact brute force.
    pub fn defaults() -> Vec<Method> {
        Method::ALL.into_iter().filter(|m| *m != Method::BruteforceExact).collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Mcrr => "mcrr",
            Method::BruteforceSampled => "bruteforce_sampled",
            Method::BruteforceExact => "bruteforce_exact",
            Method::Genetic => "genetic",
            Method::Greedy => "greedy",
            Method::AstarDistance => "astar_distance",
            Method::AstarHop => "astar_hop",
            Method::AstarInverseSe => "astar_inverse_se",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim().to_ascii_lowercase();
        Method::ALL.into_iter().find(|m| m.name() == t).ok_or_else(|| format!("unknown method '{s}'"))
    }
}

/// Optimizer settings; per-run seeds override the `seed` fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Solvers {
    pub mcrr: McrrConfig,
    pub genetic: GeneticConfig,
    pub bruteforce_trials: usize,
    pub exact_state_limit: u64,
}

impl Default for Solvers {
    fn default() -> Self {
        Solvers {
            mcrr: McrrConfig::default(),
            genetic: GeneticConfig::default(),
            bruteforce_trials: 5000,
            exact_state_limit: EXACT_STATE_LIMIT,
        }
    }
}

pub fn run_method(net: &Network, method: Method, solvers: &Solvers, seed: u64) -> sagsin_core::Result<RoutingSolution> {
    match method {
        Method::Mcrr => mcrr(net, &McrrConfig { seed, ..solvers.mcrr }),
        Method::BruteforceSampled => bruteforce_sampled(net, solvers.bruteforce_trials, seed),
        Method::BruteforceExact => bruteforce_exact(net, solvers.exact_state_limit),
        Method::Genetic => genetic_route(net, &GeneticConfig { seed, ..solvers.genetic.clone() }),
        Method::Greedy => greedy_route(net),
        Method::AstarDistance => astar_route(net, AStarMetric::Distance),
        Method::AstarHop => astar_route(net, AStarMetric::Hop),
        Method::AstarInverseSe => astar_route(net, AStarMetric::InverseSe),
    }
}
