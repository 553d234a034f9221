//! Exhaustive and sampled tree search.
//!
//! Exact mode assigns users in id order. A user's path is the tree path to
//! some node already in the tree followed by a simple suffix through fresh
//! relays, so every tree is generated exactly once. Adding a path never raises
//! the min-throughput, which makes pruning on the partial objective exact.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{greedy_route, random_tree_paths, FlowState, Network, RoutingSolution};
use crate::error::{Error, Result};
use crate::numeric::mix_seed;

/// Search states visited before exact mode gives up.
pub const EXACT_STATE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum BruteforceMode {
    Exact,
    Sampled { trials: usize },
    /// Exact, falling back to sampling on blow-up.
    Auto { trials: usize },
}

struct Search<'a, 'n> {
    state: FlowState<'n>,
    users: &'a [usize],
    best: f64,
    best_paths: BTreeMap<usize, Vec<usize>>,
    visited: u64,
    limit: u64,
}

impl Search<'_, '_> {
    fn tick(&mut self) -> Result<()> {
        self.visited += 1;
        if self.visited > self.limit {
            return Err(Error::CombinatorialBlowup { limit: self.limit });
        }
        Ok(())
    }

    /// Simple paths from `v` to `user` whose interior avoids the tree.
    fn suffixes(&mut self, v: usize, user: usize) -> Result<Vec<Vec<usize>>> {
        let net = self.state.network();
        let mut out = Vec::new();
        let mut stack = vec![v];
        let mut on_path = vec![false; net.len()];
        on_path[v] = true;
        self.extend(v, user, &mut stack, &mut on_path, &mut out)?;
        Ok(out)
    }

    fn extend(
        &mut self,
        at: usize,
        user: usize,
        stack: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        let net = self.state.network();
        for &l in net.out_links(at) {
            let w = net.links()[l].to;
            if w == user {
                self.tick()?;
                let mut p = stack.clone();
                p.push(w);
                out.push(p);
                continue;
            }
            if on_path[w] || net.is_user(w) || self.state.in_tree(w) {
                continue;
            }
            self.tick()?;
            on_path[w] = true;
            stack.push(w);
            self.extend(w, user, stack, on_path, out)?;
            stack.pop();
            on_path[w] = false;
        }
        Ok(())
    }

    fn run(&mut self, idx: usize) -> Result<()> {
        if idx == self.users.len() {
            let val = self.state.objective();
            if val > self.best {
                self.best = val;
                self.best_paths = self.state.paths().clone();
            }
            return Ok(());
        }
        let u = self.users[idx];
        let net = self.state.network();
        let attach: Vec<usize> = (0..net.len()).filter(|&v| self.state.in_tree(v)).collect();
        for v in attach {
            let head = self.state.tree_path(v);
            for suffix in self.suffixes(v, u)? {
                let mut path = head.clone();
                path.extend_from_slice(&suffix[1..]);
                if !self.state.add_path(u, &path) {
                    continue;
                }
                self.tick()?;
                if self.state.min_throughput() > self.best {
                    self.run(idx + 1)?;
                }
                self.state.remove_path(u);
            }
        }
        Ok(())
    }
}

/// Exact optimum over all trees spanning the served users.
pub fn bruteforce_exact(net: &Network, limit: u64) -> Result<RoutingSolution> {
    let seed = greedy_route(net)?;
    let seed_paths: BTreeMap<usize, Vec<usize>> =
        seed.graph.user_paths.keys().map(|&u| (u, seed.graph.node_path(u).expect("user path"))).collect();
    let mut seed_state = FlowState::new(net);
    for (&u, p) in &seed_paths {
        seed_state.add_path(u, p);
    }
    let users = net.served_users().to_vec();
    let mut search = Search {
        state: FlowState::new(net),
        users: &users,
        best: seed_state.objective(),
        best_paths: seed_paths,
        visited: 0,
        limit,
    };
    search.run(0)?;
    let best = search.best;
    RoutingSolution::new(net, "bruteforce_exact", &search.best_paths, vec![best])
}

/// Best of `trials` random-weight shortest-path trees.
pub fn bruteforce_sampled(net: &Network, trials: usize, seed: u64) -> Result<RoutingSolution> {
    let eval = |t: usize| {
        let paths = random_tree_paths(net, mix_seed(seed, t as u64), |_| true);
        let mut state = FlowState::new(net);
        for (&u, p) in &paths {
            state.add_path(u, p);
        }
        (state.objective(), t)
    };
    let best = (0..trials.max(1))
        .into_par_iter()
        .map(eval)
        .reduce(|| (f64::NEG_INFINITY, usize::MAX), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    let paths = random_tree_paths(net, mix_seed(seed, best.1 as u64), |_| true);
    RoutingSolution::new(net, "bruteforce_sampled", &paths, vec![best.0])
}

pub fn bruteforce_route(net: &Network, mode: BruteforceMode, seed: u64) -> Result<RoutingSolution> {
    match mode {
        BruteforceMode::Exact => bruteforce_exact(net, EXACT_STATE_LIMIT),
        BruteforceMode::Sampled { trials } => bruteforce_sampled(net, trials, seed),
        BruteforceMode::Auto { trials } => match bruteforce_exact(net, EXACT_STATE_LIMIT) {
            Err(Error::CombinatorialBlowup { .. }) => bruteforce_sampled(net, trials, seed),
            other => other,
        },
    }
}
