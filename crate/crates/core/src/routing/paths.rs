//! Shortest paths over the feasible graph and random-weight path sampling.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::Serialize;

use super::{Edge, Link, Network};
use crate::error::{Error, Result};
use crate::numeric::mix_seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidatePath {
    pub user: usize,
    pub nodes: Vec<usize>,
    pub edges: Vec<Edge>,
}

impl CandidatePath {
    pub fn from_nodes(user: usize, nodes: Vec<usize>) -> Self {
        let edges = nodes.windows(2).map(|w| (w[0], w[1])).collect();
        CandidatePath { user, nodes, edges }
    }
}

/// Uniform(0, 1) weight of `link` under draw `key`, open at both ends.
pub fn link_weight(key: u64, link: usize) -> f64 {
    let bits = mix_seed(key, link as u64) >> 11;
    (bits as f64 + 0.5) / (1u64 << 53) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    f: f64,
    g: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // Min-heap on f, then smallest node id.
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A* from `from` to `to` with non-negative `cost` and an admissible
/// `heuristic`. Only nodes with `allowed(v)` are entered (the endpoints are
/// always allowed). Returns the node sequence.
pub fn shortest_path(
    net: &Network,
    from: usize,
    to: usize,
    allowed: impl Fn(usize) -> bool,
    cost: impl Fn(usize, &Link) -> f64,
    heuristic: impl Fn(usize) -> f64,
) -> Option<Vec<usize>> {
    let n = net.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[from] = 0.0;
    heap.push(Entry { f: heuristic(from), g: 0.0, node: from });
    while let Some(Entry { g, node, .. }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        if node == to {
            let mut seq = vec![to];
            let mut cur = to;
            while cur != from {
                cur = parent[cur];
                seq.push(cur);
            }
            seq.reverse();
            return Some(seq);
        }
        for &l in net.out_links(node) {
            let link = &net.links()[l];
            let w = link.to;
            if done[w] || (w != to && !allowed(w)) {
                continue;
            }
            let nd = g + cost(l, link);
            if nd < dist[w] || (nd == dist[w] && node < parent[w]) {
                dist[w] = nd;
                parent[w] = node;
                heap.push(Entry { f: nd + heuristic(w), g: nd, node: w });
            }
        }
    }
    None
}

/// Parent array of the shortest-path tree from `from` under `cost`, over
/// nodes with `allowed(v)`. Unreached nodes have no parent.
pub fn shortest_path_tree(
    net: &Network,
    from: usize,
    allowed: impl Fn(usize) -> bool,
    cost: impl Fn(usize, &Link) -> f64,
) -> Vec<Option<usize>> {
    let n = net.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[from] = 0.0;
    heap.push(Entry { f: 0.0, g: 0.0, node: from });
    while let Some(Entry { g, node, .. }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        for &l in net.out_links(node) {
            let link = &net.links()[l];
            let w = link.to;
            if done[w] || !allowed(w) {
                continue;
            }
            let nd = g + cost(l, link);
            if nd < dist[w] || (nd == dist[w] && parent[w].is_some_and(|p| node < p)) {
                dist[w] = nd;
                parent[w] = Some(node);
                heap.push(Entry { f: nd, g: nd, node: w });
            }
        }
    }
    parent
}

/// Root-to-user node paths of `users` in a parent array; users without a
/// parent chain are skipped.
pub fn tree_paths(root: usize, parent: &[Option<usize>], users: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut out = BTreeMap::new();
    for &u in users {
        let mut seq = vec![u];
        let mut cur = u;
        while let Some(p) = parent[cur] {
            seq.push(p);
            cur = p;
        }
        if cur == root && u != root {
            seq.reverse();
            out.insert(u, seq);
        }
    }
    out
}

/// Random-weight shortest-path tree from the root over nodes with
/// `allowed(v)`, returned as per-user paths.
pub fn random_tree_paths(net: &Network, key: u64, allowed: impl Fn(usize) -> bool) -> BTreeMap<usize, Vec<usize>> {
    let parent = shortest_path_tree(net, net.root, allowed, |l, _| link_weight(key, l));
    tree_paths(net.root, &parent, net.served_users())
}

/// `k` root-to-user shortest paths, each under fresh Uniform(0, 1) weights,
/// duplicates included.
pub fn sample_paths_raw(net: &Network, user: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::with_capacity(k);
    for t in 0..k {
        let key = mix_seed(seed, t as u64);
        match shortest_path(net, net.root, user, |_| true, |l, _| link_weight(key, l), |_| 0.0) {
            Some(p) => out.push(p),
            None => return Err(Error::Unreachable(user)),
        }
    }
    Ok(out)
}

/// Deduplicated random-weight candidates in first-seen order.
pub fn sample_candidate_paths(net: &Network, user: usize, k: usize, seed: u64) -> Result<Vec<CandidatePath>> {
    if user == net.root || user >= net.len() {
        return Err(Error::InvalidInput(format!("bad user id {user}")));
    }
    let mut out: Vec<CandidatePath> = Vec::new();
    for p in sample_paths_raw(net, user, k, seed)? {
        if !out.iter().any(|c| c.nodes == p) {
            out.push(CandidatePath::from_nodes(user, p));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_are_in_open_unit_interval() {
        for l in 0..10_000 {
            let w = link_weight(42, l);
            assert!(w > 0.0 && w < 1.0);
        }
        assert_eq!(link_weight(1, 2), link_weight(1, 2));
        assert_ne!(link_weight(1, 2), link_weight(2, 2));
    }

    #[test]
    fn weight_mean_is_one_half() {
        let m: f64 = (0..100_000).map(|l| link_weight(7, l)).sum::<f64>() / 100_000.0;
        assert!((m - 0.5).abs() < 0.005);
    }
}
