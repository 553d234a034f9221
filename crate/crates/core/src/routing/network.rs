use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use super::Edge;
use crate::channel::{link_budget, NodeSpec};
use crate::error::{Error, Result};
use crate::secrecy::{check_tau, max_link_distance, min_jamming_calibrated, EveField, SpscQuery};
use crate::testbed::Scenario;

pub const DISTANCE_TOL_KM: f64 = 0.1;
const NO_LINK: u32 = u32::MAX;

/// Directed link with everything the allocator needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub distance_km: f64,
    pub d_max_km: f64,
    /// SNR per unit transmit PSD at unit fading power.
    pub snr_per_watt: f64,
    /// Smallest jamming PSD meeting the SPSC threshold on this link.
    pub sigma_req: f64,
    pub lambda_eff: f64,
}

impl Link {
    pub fn spectral_efficiency(&self, rho: f64) -> f64 {
        (rho * self.snr_per_watt).ln_1p() / std::f64::consts::LN_2
    }
}

/// A scenario with its feasible directed links precomputed.
#[derive(Debug, Clone)]
pub struct Network {
    pub nodes: Vec<NodeSpec>,
    pub root: usize,
    pub users: Vec<usize>,
    pub field: EveField,
    pub tau: f64,
    is_user: Vec<bool>,
    links: Vec<Link>,
    out: Vec<Vec<usize>>,
    index: Vec<u32>,
    served: Vec<usize>,
    disconnected: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibleGraph {
    pub edges: BTreeSet<Edge>,
    /// Users with no root path in the feasible graph.
    pub disconnected: Vec<usize>,
}

impl Network {
    pub fn new(nodes: Vec<NodeSpec>, root: usize, users: Vec<usize>, field: EveField, tau: f64) -> Result<Self> {
        Self::build(nodes, root, users, field, tau, None)
    }

    /// Like [`Network::new`] but only pairs in `allowed` may become links.
    pub fn with_allowed_edges(
        nodes: Vec<NodeSpec>,
        root: usize,
        users: Vec<usize>,
        field: EveField,
        tau: f64,
        allowed: &BTreeSet<Edge>,
    ) -> Result<Self> {
        Self::build(nodes, root, users, field, tau, Some(allowed))
    }

    pub fn from_scenario(s: &Scenario, field: &EveField, tau: f64) -> Result<Self> {
        match s.root {
            Some(r) => Self::new(s.nodes.clone(), r, s.users.clone(), field.clone(), tau),
            None => Err(Error::Unreachable(s.users.first().copied().unwrap_or(0))),
        }
    }

    fn build(
        nodes: Vec<NodeSpec>,
        root: usize,
        users: Vec<usize>,
        field: EveField,
        tau: f64,
        allowed: Option<&BTreeSet<Edge>>,
    ) -> Result<Self> {
        check_tau(tau)?;
        field.validate()?;
        let n = nodes.len();
        for (i, node) in nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::InvalidInput(format!("node at index {i} has id {}", node.id)));
            }
            node.validate()?;
        }
        if root >= n || users.iter().any(|&u| u >= n || u == root) {
            return Err(Error::InvalidInput("root or user id out of range".into()));
        }
        if users.is_empty() {
            return Err(Error::InvalidInput("scenario has no users".into()));
        }
        let mut is_user = vec![false; n];
        for &u in &users {
            is_user[u] = true;
        }
        let mut net = Network {
            nodes,
            root,
            users,
            field,
            tau,
            is_user,
            links: Vec::new(),
            out: vec![Vec::new(); n],
            index: vec![NO_LINK; n * n],
            served: Vec::new(),
            disconnected: Vec::new(),
        };
        let mut d_max_cache: HashMap<(usize, u8, u64, u64), f64> = HashMap::new();
        for i in 0..n {
            if net.is_user[i] {
                continue;
            }
            for j in 0..n {
                if j == i || j == root || allowed.is_some_and(|a| !a.contains(&(i, j))) {
                    continue;
                }
                let (tx, rx) = (&net.nodes[i], &net.nodes[j]);
                let key = (
                    i,
                    rx.layer as u8,
                    rx.rx_gain_dbi.get(tx.layer).to_bits(),
                    rx.gain_to_noise_temp_dbk.get(tx.layer).to_bits(),
                );
                let d_max = match d_max_cache.get(&key) {
                    Some(&d) => d,
                    None => {
                        let d = max_link_distance(tx, rx, &net.field, tau, DISTANCE_TOL_KM)?;
                        d_max_cache.insert(key, d);
                        d
                    }
                };
                let link = match net.compute_link(i, j, d_max) {
                    Ok(l) => l,
                    Err(Error::ZeroDistance(..)) => continue,
                    Err(e) => return Err(e),
                };
                if link.distance_km > d_max || link.sigma_req > tx.jamming_budget_psd() * (1.0 + 1e-9) {
                    continue;
                }
                let link = Link { sigma_req: link.sigma_req.min(tx.jamming_budget_psd()), ..link };
                net.index[i * n + j] = net.links.len() as u32;
                net.out[i].push(net.links.len());
                net.links.push(link);
            }
        }
        let reach = net.reachable_from_root();
        let (served, disconnected): (Vec<usize>, Vec<usize>) = net.users.iter().partition(|&&u| reach[u]);
        net.served = served;
        net.disconnected = disconnected;
        net.served.sort_unstable();
        net.disconnected.sort_unstable();
        Ok(net)
    }

    fn compute_link(&self, i: usize, j: usize, d_max_km: f64) -> Result<Link> {
        let (tx, rx) = (&self.nodes[i], &self.nodes[j]);
        let budget = link_budget(tx, rx)?;
        let lambda_eff = self.field.effective_density(&tx.position, tx.layer, budget.distance_km);
        let q = SpscQuery {
            distance_km: budget.distance_km,
            alpha: budget.alpha,
            lambda_eve: lambda_eff,
            sigma: 0.0,
            gain_linear: budget.gain_linear,
            noise_psd: budget.noise_psd,
        };
        Ok(Link {
            from: i,
            to: j,
            distance_km: budget.distance_km,
            d_max_km,
            snr_per_watt: budget.snr_per_watt(),
            sigma_req: min_jamming_calibrated(&q, &self.field, self.tau)?,
            lambda_eff,
        })
    }

    fn reachable_from_root(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([self.root]);
        seen[self.root] = true;
        while let Some(v) = queue.pop_front() {
            for &l in &self.out[v] {
                let w = self.links[l].to;
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_user(&self, v: usize) -> bool {
        self.is_user[v]
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link_id(&self, from: usize, to: usize) -> Option<usize> {
        let k = self.index[from * self.nodes.len() + to];
        (k != NO_LINK).then_some(k as usize)
    }

    pub fn link(&self, from: usize, to: usize) -> Option<&Link> {
        self.link_id(from, to).map(|k| &self.links[k])
    }

    /// Link properties for any ordered pair, feasible or not.
    pub fn link_or_compute(&self, from: usize, to: usize) -> Result<Link> {
        match self.link(from, to) {
            Some(l) => Ok(*l),
            None => {
                let d_max = max_link_distance(&self.nodes[from], &self.nodes[to], &self.field, self.tau, DISTANCE_TOL_KM)?;
                self.compute_link(from, to, d_max)
            }
        }
    }

    pub fn out_links(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// Users with a feasible root path, ascending.
    pub fn served_users(&self) -> &[usize] {
        &self.served
    }

    pub fn disconnected_users(&self) -> &[usize] {
        &self.disconnected
    }

    pub fn feasible_graph(&self) -> FeasibleGraph {
        FeasibleGraph {
            edges: self.links.iter().map(|l| (l.from, l.to)).collect(),
            disconnected: self.disconnected.clone(),
        }
    }

    /// Edges of `edges` that are not feasible links.
    pub fn infeasible_edges<'a>(&self, edges: impl IntoIterator<Item = &'a Edge>) -> Vec<Edge> {
        edges.into_iter().filter(|e| self.link(e.0, e.1).is_none()).copied().collect()
    }
}

/// Feasible directed edges and the users they leave disconnected.
pub fn build_feasible_graph(
    nodes: &[NodeSpec],
    root: usize,
    users: &[usize],
    field: &EveField,
    tau: f64,
) -> Result<FeasibleGraph> {
    Ok(Network::new(nodes.to_vec(), root, users.to_vec(), field.clone(), tau)?.feasible_graph())
}
