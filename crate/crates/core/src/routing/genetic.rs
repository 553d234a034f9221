//! Two-level genetic search: a bit genome selects relays, a random
//! shortest-path tree over the selected relays turns it into a topology.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{random_tree_paths, FlowState, Network, RoutingSolution};
use crate::error::{Error, Result};
use crate::numeric::{mix_seed, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneticConfig {
    pub generations: usize,
    pub population: usize,
    pub elites: usize,
    pub mutation_rate: f64,
    pub seed: u64,
}

impl Default for GeneticConfig {
    fn default() -> Self {
        GeneticConfig { generations: 5000, population: 50, elites: 6, mutation_rate: 0.05, seed: 0 }
    }
}

impl GeneticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.elites == 0 || self.population <= self.elites {
            return Err(Error::InvalidInput("need population > elites >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::InvalidInput("mutation rate must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

type Genome = Vec<bool>;

struct Evaluator<'n> {
    net: &'n Network,
    relays: Vec<usize>,
    seed: u64,
    memo: HashMap<Genome, f64>,
}

impl<'n> Evaluator<'n> {
    fn key(&self, g: &Genome) -> u64 {
        let mut h = DefaultHasher::new();
        g.hash(&mut h);
        mix_seed(self.seed, h.finish())
    }

    fn tree(&self, g: &Genome) -> BTreeMap<usize, Vec<usize>> {
        let mut selected = vec![true; self.net.len()];
        for (i, &r) in self.relays.iter().enumerate() {
            selected[r] = g[i];
        }
        random_tree_paths(self.net, self.key(g), |v| selected[v])
    }

    /// Min-throughput of the genome's tree; zero if it drops a served user.
    fn fitness(&mut self, g: &Genome) -> f64 {
        if let Some(&f) = self.memo.get(g) {
            return f;
        }
        let paths = self.tree(g);
        let f = if paths.len() < self.net.served_users().len() {
            0.0
        } else {
            let mut state = FlowState::new(self.net);
            for (&u, p) in &paths {
                state.add_path(u, p);
            }
            state.objective()
        };
        self.memo.insert(g.clone(), f);
        f
    }
}

pub fn genetic_route(net: &Network, cfg: &GeneticConfig) -> Result<RoutingSolution> {
    genetic_route_from(net, cfg, None)
}

/// Runs the search, optionally from a given initial population.
pub fn genetic_route_from(net: &Network, cfg: &GeneticConfig, initial: Option<Vec<Vec<bool>>>) -> Result<RoutingSolution> {
    cfg.validate()?;
    let relays: Vec<usize> = (0..net.len()).filter(|&v| v != net.root && !net.is_user(v)).collect();
    let mut rng = stream_rng(cfg.seed, 0x6765_6e65);
    let mut population: Vec<Genome> = match initial {
        Some(p) => {
            if p.len() != cfg.population || p.iter().any(|g| g.len() != relays.len()) {
                return Err(Error::InvalidInput("initial population has the wrong shape".into()));
            }
            p
        }
        None => {
            let mut p = vec![vec![true; relays.len()]];
            while p.len() < cfg.population {
                p.push((0..relays.len()).map(|_| rng.random_bool(0.5)).collect());
            }
            p
        }
    };
    let mut eval = Evaluator { net, relays, seed: cfg.seed, memo: HashMap::new() };
    let mut fitness: Vec<f64> = population.iter().map(|g| eval.fitness(g)).collect();
    let mut trace = Vec::with_capacity(cfg.generations + 1);
    for gen in 0..=cfg.generations {
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
        trace.push(fitness[order[0]]);
        if gen == cfg.generations {
            population = order.iter().map(|&i| population[i].clone()).collect();
            fitness = order.iter().map(|&i| fitness[i]).collect();
            break;
        }
        let mut next: Vec<Genome> = order[..cfg.elites].iter().map(|&i| population[i].clone()).collect();
        let mut next_fit: Vec<f64> = order[..cfg.elites].iter().map(|&i| fitness[i]).collect();
        let n = population.len();
        let pick = |rng: &mut rand_chacha::ChaCha8Rng| {
            let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
            if fitness[b] > fitness[a] {
                b
            } else {
                a
            }
        };
        while next.len() < cfg.population {
            let (pa, pb) = (pick(&mut rng), pick(&mut rng));
            let child: Genome = population[pa]
                .iter()
                .zip(&population[pb])
                .map(|(&x, &y)| {
                    let bit = if rng.random_bool(0.5) { x } else { y };
                    if cfg.mutation_rate > 0.0 && rng.random_bool(cfg.mutation_rate) {
                        !bit
                    } else {
                        bit
                    }
                })
                .collect();
            next_fit.push(eval.fitness(&child));
            next.push(child);
        }
        population = next;
        fitness = next_fit;
    }
    let best = &population[0];
    let paths = if fitness[0] > 0.0 || net.served_users().is_empty() {
        eval.tree(best)
    } else {
        return Err(Error::NoFeasibleTree(net.served_users()[0]));
    };
    RoutingSolution::new(net, "genetic", &paths, trace)
}
