//! Monte-Carlo relay routing: random-weight candidate paths per user, then
//! per-user path swaps that are kept only if the min-throughput improves.
//!
//! Each candidate yields two trees: the candidate inserted unchanged with
//! users sharing one of its nodes re-routed through it, and the candidate
//! joined to the tree at its last node already in the tree.

use serde::{Deserialize, Serialize};

use super::{sample_candidate_paths, CandidatePath, FlowState, Network, RoutingSolution};
use crate::error::Result;
use crate::numeric::mix_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McrrConfig {
    pub k: usize,
    pub epsilon: f64,
    pub max_rounds: usize,
    pub seed: u64,
}

impl Default for McrrConfig {
    fn default() -> Self {
        McrrConfig { k: 12, epsilon: 1e-6, max_rounds: 20, seed: 0 }
    }
}

#[derive(Debug, Clone)]
enum Move {
    Reroute(Vec<usize>),
    Attach(Vec<usize>),
}

impl Move {
    fn apply(&self, state: &mut FlowState, user: usize) {
        let ok = match self {
            Move::Reroute(p) => state.insert_rerouting(user, p).is_some(),
            Move::Attach(p) => state.add_path(user, p),
        };
        debug_assert!(ok);
    }
}

/// Best tree for `user` against the current state, with its objective.
/// Ties keep the first candidate.
fn best_candidate(state: &mut FlowState, user: usize, cands: &[CandidatePath]) -> Option<(Move, f64)> {
    let mut best: Option<(Move, f64)> = None;
    for c in cands {
        if let Some(replaced) = state.insert_rerouting(user, &c.nodes) {
            let val = state.objective();
            state.undo_rerouting(user, replaced);
            if best.as_ref().is_none_or(|b| val > b.1) {
                best = Some((Move::Reroute(c.nodes.clone()), val));
            }
        }
        let path = state.splice(&c.nodes);
        if state.add_path(user, &path) {
            let val = state.objective();
            state.remove_path(user);
            if best.as_ref().is_none_or(|b| val > b.1) {
                best = Some((Move::Attach(path), val));
            }
        }
    }
    best
}

pub fn mcrr(net: &Network, cfg: &McrrConfig) -> Result<RoutingSolution> {
    let users = net.served_users().to_vec();
    let mut candidates = Vec::with_capacity(users.len());
    for &u in &users {
        candidates.push(sample_candidate_paths(net, u, cfg.k.max(1), mix_seed(cfg.seed, u as u64))?);
    }
    let mut state = FlowState::new(net);
    for (i, &u) in users.iter().enumerate() {
        if let Some((m, _)) = best_candidate(&mut state, u, &candidates[i]) {
            m.apply(&mut state, u);
        }
    }
    let mut trace = vec![state.objective()];
    for _ in 0..cfg.max_rounds {
        let start = state.objective();
        for (i, &u) in users.iter().enumerate() {
            let Some(old) = state.remove_path(u) else { continue };
            let current = {
                state.add_path(u, &old);
                let v = state.objective();
                state.remove_path(u);
                v
            };
            match best_candidate(&mut state, u, &candidates[i]) {
                Some((m, val)) if val > current => {
                    m.apply(&mut state, u);
                    trace.push(val);
                }
                _ => {
                    state.add_path(u, &old);
                }
            }
        }
        let gain = state.objective() - start;
        if gain <= cfg.epsilon * start.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    RoutingSolution::new(net, "mcrr", state.paths(), trace)
}
