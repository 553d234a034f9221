//! Incremental min-throughput bookkeeping for tree search.
//!
//! Each transmitting node keeps the per-edge sum of `h_u` over the users it
//! forwards. Adding or removing a path only touches the nodes on that path.

use std::collections::BTreeMap;

use super::{Network, RoutingGraph};

#[derive(Debug, Clone, Copy)]
struct OutFlow {
    link: usize,
    hop_sum: u64,
    users: u32,
}

#[derive(Debug, Clone)]
pub struct FlowState<'a> {
    net: &'a Network,
    flows: Vec<Vec<OutFlow>>,
    node_value: Vec<f64>,
    parent: Vec<Option<usize>>,
    through: Vec<u32>,
    paths: BTreeMap<usize, Vec<usize>>,
}

impl<'a> FlowState<'a> {
    pub fn new(net: &'a Network) -> Self {
        let n = net.len();
        FlowState {
            net,
            flows: vec![Vec::new(); n],
            node_value: vec![f64::INFINITY; n],
            parent: vec![None; n],
            through: vec![0; n],
            paths: BTreeMap::new(),
        }
    }

    pub fn network(&self) -> &'a Network {
        self.net
    }

    pub fn in_tree(&self, v: usize) -> bool {
        v == self.net.root || self.through[v] > 0
    }

    pub fn path(&self, user: usize) -> Option<&[usize]> {
        self.paths.get(&user).map(Vec::as_slice)
    }

    pub fn paths(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.paths
    }

    /// Root-to-`v` node sequence through the current tree.
    pub fn tree_path(&self, v: usize) -> Vec<usize> {
        let mut seq = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            seq.push(p);
            cur = p;
        }
        seq.reverse();
        seq
    }

    /// Rewrites a root-to-user candidate so it joins the tree at its last
    /// node already in the tree, keeping every existing parent.
    pub fn splice(&self, candidate: &[usize]) -> Vec<usize> {
        let k = candidate.iter().rposition(|&v| self.in_tree(v)).unwrap_or(0);
        let mut seq = self.tree_path(candidate[k]);
        seq.extend_from_slice(&candidate[k + 1..]);
        seq
    }

    /// Adds a tree-consistent path (`root, ..., user`). Returns false and
    /// leaves the state unchanged if it would break the tree or uses a
    /// missing link.
    pub fn add_path(&mut self, user: usize, nodes: &[usize]) -> bool {
        if self.paths.contains_key(&user) || nodes.first() != Some(&self.net.root) || nodes.last() != Some(&user) {
            return false;
        }
        for w in nodes.windows(2) {
            let consistent = match self.parent[w[1]] {
                Some(p) => p == w[0],
                None => self.through[w[1]] == 0 && w[1] != self.net.root,
            };
            if !consistent || self.net.link_id(w[0], w[1]).is_none() {
                return false;
            }
        }
        let h = (nodes.len() - 1) as u64;
        for w in nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            self.parent[b] = Some(a);
            self.through[b] += 1;
            let link = self.net.link_id(a, b).expect("checked above");
            // Flows stay sorted by link so node values do not depend on history.
            match self.flows[a].binary_search_by_key(&link, |f| f.link) {
                Ok(k) => {
                    self.flows[a][k].hop_sum += h;
                    self.flows[a][k].users += 1;
                }
                Err(k) => self.flows[a].insert(k, OutFlow { link, hop_sum: h, users: 1 }),
            }
            self.refresh(a);
        }
        self.paths.insert(user, nodes.to_vec());
        true
    }

    /// Inserts `candidate` unchanged as the path of `user`. Every other user
    /// whose path crosses a candidate node is re-routed through the candidate
    /// prefix up to the last such node. Returns the replaced paths, or `None`
    /// (state unchanged) if the candidate is not a valid root-to-user path.
    pub fn insert_rerouting(&mut self, user: usize, candidate: &[usize]) -> Option<Vec<(usize, Vec<usize>)>> {
        if self.paths.contains_key(&user)
            || candidate.first() != Some(&self.net.root)
            || candidate.last() != Some(&user)
            || candidate.windows(2).any(|w| self.net.link_id(w[0], w[1]).is_none())
        {
            return None;
        }
        let mut pos = vec![usize::MAX; self.net.len()];
        for (k, &v) in candidate.iter().enumerate() {
            if pos[v] != usize::MAX {
                return None;
            }
            pos[v] = k;
        }
        let mut changed = Vec::new();
        for (&u, p) in &self.paths {
            let j = p.iter().rposition(|&v| pos[v] != usize::MAX).expect("paths start at the root");
            let mut np = candidate[..=pos[p[j]]].to_vec();
            np.extend_from_slice(&p[j + 1..]);
            if np != *p {
                changed.push((u, np));
            }
        }
        let old: Vec<(usize, Vec<usize>)> =
            changed.iter().map(|(u, _)| (*u, self.remove_path(*u).expect("path present"))).collect();
        let mut ok = self.add_path(user, candidate);
        for (u, np) in &changed {
            ok = ok && self.add_path(*u, np);
        }
        if !ok {
            self.remove_path(user);
            for (u, _) in &changed {
                self.remove_path(*u);
            }
            for (u, p) in &old {
                self.add_path(*u, p);
            }
            return None;
        }
        Some(old)
    }

    /// Reverts [`FlowState::insert_rerouting`].
    pub fn undo_rerouting(&mut self, user: usize, replaced: Vec<(usize, Vec<usize>)>) {
        self.remove_path(user);
        for (u, _) in &replaced {
            self.remove_path(*u);
        }
        for (u, p) in replaced {
            let ok = self.add_path(u, &p);
            debug_assert!(ok);
        }
    }

    pub fn remove_path(&mut self, user: usize) -> Option<Vec<usize>> {
        let nodes = self.paths.remove(&user)?;
        let h = (nodes.len() - 1) as u64;
        for w in nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            self.through[b] -= 1;
            if self.through[b] == 0 {
                self.parent[b] = None;
            }
            let link = self.net.link_id(a, b).expect("path uses links");
            let pos = self.flows[a].binary_search_by_key(&link, |f| f.link).expect("flow present");
            let f = &mut self.flows[a][pos];
            f.hop_sum -= h;
            f.users -= 1;
            if f.users == 0 {
                self.flows[a].remove(pos);
            }
            self.refresh(a);
        }
        Some(nodes)
    }

    fn refresh(&mut self, v: usize) {
        let flows = &self.flows[v];
        if flows.is_empty() {
            self.node_value[v] = f64::INFINITY;
            return;
        }
        let links = self.net.links();
        let node = &self.net.nodes[v];
        let tau_i = flows.iter().map(|f| links[f.link].sigma_req).fold(0.0, f64::max);
        let rho = node.p_max_psd() - tau_i;
        let load: f64 = flows.iter().map(|f| f.hop_sum as f64 / links[f.link].spectral_efficiency(rho)).sum();
        self.node_value[v] = if load.is_finite() { node.bandwidth_hz / load } else { 0.0 };
    }

    /// Min over transmitting nodes; `+∞` when no path is present.
    pub fn min_throughput(&self) -> f64 {
        self.node_value.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Min-throughput as reported: zero for an empty tree.
    pub fn objective(&self) -> f64 {
        let m = self.min_throughput();
        if m.is_finite() {
            m
        } else {
            0.0
        }
    }

    pub fn node_throughput(&self, v: usize) -> f64 {
        self.node_value[v]
    }

    pub fn to_graph(&self) -> RoutingGraph {
        RoutingGraph::from_node_paths(self.net.root, &self.paths)
    }
}
