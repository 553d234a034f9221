use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub type Edge = (usize, usize);

/// Spanning-tree relay topology with the path of every served user.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RoutingGraph {
    pub root: usize,
    pub node_ids: BTreeSet<usize>,
    pub edges: BTreeSet<Edge>,
    pub user_paths: BTreeMap<usize, Vec<Edge>>,
    pub hop_counts: BTreeMap<usize, usize>,
}

impl RoutingGraph {
    pub fn empty(root: usize) -> Self {
        RoutingGraph { root, node_ids: BTreeSet::from([root]), ..Default::default() }
    }

    /// Builds the graph from node sequences `root, ..., user`.
    pub fn from_node_paths(root: usize, paths: &BTreeMap<usize, Vec<usize>>) -> Self {
        let mut g = RoutingGraph::empty(root);
        for (&user, nodes) in paths {
            let edges: Vec<Edge> = nodes.windows(2).map(|w| (w[0], w[1])).collect();
            g.node_ids.extend(nodes.iter().copied());
            g.edges.extend(edges.iter().copied());
            g.hop_counts.insert(user, edges.len());
            g.user_paths.insert(user, edges);
        }
        g
    }

    pub fn node_path(&self, user: usize) -> Option<Vec<usize>> {
        let edges = self.user_paths.get(&user)?;
        let mut nodes = vec![edges.first().map_or(user, |e| e.0)];
        nodes.extend(edges.iter().map(|e| e.1));
        Some(nodes)
    }

    /// Outgoing edges of `node` with the users they carry.
    pub fn flows_from(&self, node: usize) -> BTreeMap<Edge, Vec<usize>> {
        let mut out: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
        for (&u, path) in &self.user_paths {
            for &e in path.iter().filter(|e| e.0 == node) {
                out.entry(e).or_default().push(u);
            }
        }
        out
    }

    /// Nodes with at least one outgoing edge.
    pub fn transmitters(&self) -> BTreeSet<usize> {
        self.edges.iter().map(|e| e.0).collect()
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.edges.iter().find(|e| e.1 == node).map(|e| e.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TreeViolation {
    RootHasParent { parents: usize },
    InDegree { node: usize, parents: usize },
    Cycle { node: usize },
    NotReachable { node: usize },
    EdgeOutsideNodes { edge: Edge },
    BadUserPath { user: usize },
    HopCount { user: usize, expected: usize, found: usize },
}

/// Checks root in-degree 0, unit in-degree elsewhere, acyclicity,
/// reachability from the root, and user-path consistency.
pub fn validate_spanning_tree(g: &RoutingGraph) -> Vec<TreeViolation> {
    let mut out = Vec::new();
    let mut parents: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in &g.edges {
        if !g.node_ids.contains(&a) || !g.node_ids.contains(&b) {
            out.push(TreeViolation::EdgeOutsideNodes { edge: (a, b) });
        }
        parents.entry(b).or_default().push(a);
    }
    if let Some(p) = parents.get(&g.root) {
        out.push(TreeViolation::RootHasParent { parents: p.len() });
    }
    for &n in &g.node_ids {
        if n == g.root {
            continue;
        }
        let k = parents.get(&n).map_or(0, Vec::len);
        if k != 1 {
            out.push(TreeViolation::InDegree { node: n, parents: k });
        }
    }
    // Walk parent pointers; a walk longer than the node count is a cycle.
    for &n in &g.node_ids {
        let mut cur = n;
        let mut steps = 0;
        let mut reached = cur == g.root;
        while !reached {
            match parents.get(&cur).and_then(|p| p.first()) {
                Some(&p) => cur = p,
                None => break,
            }
            steps += 1;
            if cur == g.root {
                reached = true;
            } else if steps > g.node_ids.len() {
                out.push(TreeViolation::Cycle { node: n });
                break;
            }
        }
        if !reached && !out.iter().any(|v| matches!(v, TreeViolation::Cycle { node } if *node == n)) {
            out.push(TreeViolation::NotReachable { node: n });
        }
    }
    for (&u, path) in &g.user_paths {
        let chained = path.windows(2).all(|w| w[0].1 == w[1].0);
        let ok = chained
            && path.first().is_some_and(|e| e.0 == g.root)
            && path.last().is_some_and(|e| e.1 == u)
            && path.iter().all(|e| g.edges.contains(e));
        if !ok {
            out.push(TreeViolation::BadUserPath { user: u });
        }
        let found = g.hop_counts.get(&u).copied().unwrap_or(usize::MAX);
        if found != path.len() {
            out.push(TreeViolation::HopCount { user: u, expected: path.len(), found });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> RoutingGraph {
        RoutingGraph::from_node_paths(0, &BTreeMap::from([(2, vec![0, 1, 2])]))
    }

    #[test]
    fn path_graph_is_valid() {
        let g = chain();
        assert!(validate_spanning_tree(&g).is_empty());
        assert_eq!(g.hop_counts[&2], 2);
        assert_eq!(g.node_path(2).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn back_edge_breaks_in_degree() {
        let mut g = chain();
        g.edges.insert((2, 1));
        let v = validate_spanning_tree(&g);
        assert!(v.contains(&TreeViolation::InDegree { node: 1, parents: 2 }));
    }

    #[test]
    fn detects_root_parent_and_orphan() {
        let mut g = chain();
        g.edges.insert((1, 0));
        g.node_ids.insert(7);
        let v = validate_spanning_tree(&g);
        assert!(v.contains(&TreeViolation::RootHasParent { parents: 1 }));
        assert!(v.contains(&TreeViolation::NotReachable { node: 7 }));
    }

    #[test]
    fn detects_detached_cycle() {
        let mut g = chain();
        g.node_ids.extend([5, 6]);
        g.edges.extend([(5, 6), (6, 5)]);
        let v = validate_spanning_tree(&g);
        assert!(v.iter().any(|x| matches!(x, TreeViolation::Cycle { .. })));
    }

    #[test]
    fn wrong_hop_count_reported() {
        let mut g = chain();
        g.hop_counts.insert(2, 5);
        assert_eq!(validate_spanning_tree(&g), vec![TreeViolation::HopCount { user: 2, expected: 2, found: 5 }]);
    }
}
