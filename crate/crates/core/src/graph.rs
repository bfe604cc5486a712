//! Influence networks, partial edge assignments and possible graphs.
//!
//! An [`InfluenceNetwork`] is a directed graph whose edges exist independently
//! with their own probability. A [`PossibleGraph`] is one realization of it and
//! a [`StatusAssignment`] fixes some edges to present or absent while leaving
//! the others to chance.

use std::collections::VecDeque;
use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense edge index in `[0, m)`.
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub prob: f64,
}

impl Edge {
    pub fn is_self_loop(&self) -> bool {
        self.src == self.dst
    }
}

/// 2^53, the resolution of a coin flip.
const COIN_SCALE: f64 = 9_007_199_254_740_992.0;

/// Directed graph with an independent existence probability on every edge.
///
/// Immutable once built. Parallel edges are independent coins; self-loops are
/// kept but never change reachability.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceNetwork {
    nodes: usize,
    edges: Vec<Edge>,
    // compressed out-adjacency: out-edges of u sit at adj_start[u]..adj_start[u + 1]
    adj_start: Vec<usize>,
    adj_edge: Vec<EdgeId>,
    adj_dst: Vec<u32>,
    // present iff (next_u64 >> 11) < threshold
    thresholds: Vec<u64>,
}

impl InfluenceNetwork {
    pub fn new(nodes: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut adj_start = vec![0usize; nodes + 1];
        let mut thresholds = Vec::with_capacity(edges.len());
        for (id, e) in edges.iter().enumerate() {
            for end in [e.src, e.dst] {
                if end.0 >= nodes {
                    return Err(Error::InvalidNode { node: end.0, nodes });
                }
            }
            if !(0.0..=1.0).contains(&e.prob) {
                return Err(Error::InvalidProbability {
                    edge: id,
                    prob: e.prob,
                });
            }
            adj_start[e.src.0 + 1] += 1;
            thresholds.push((e.prob * COIN_SCALE).floor() as u64);
        }
        if nodes > u32::MAX as usize {
            return Err(Error::InvalidNode {
                node: nodes,
                nodes: u32::MAX as usize,
            });
        }
        for u in 0..nodes {
            adj_start[u + 1] += adj_start[u];
        }
        let mut fill = adj_start.clone();
        let mut adj_edge = vec![0; edges.len()];
        let mut adj_dst = vec![0; edges.len()];
        for (id, e) in edges.iter().enumerate() {
            let slot = &mut fill[e.src.0];
            adj_edge[*slot] = id;
            adj_dst[*slot] = e.dst.0 as u32;
            *slot += 1;
        }
        Ok(Self {
            nodes,
            edges,
            adj_start,
            adj_edge,
            adj_dst,
            thresholds,
        })
    }

    /// Builds a network from `(src, dst, prob)` triples.
    pub fn from_triples(nodes: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        let edges = triples
            .iter()
            .map(|&(src, dst, prob)| Edge {
                src: NodeId(src),
                dst: NodeId(dst),
                prob,
            })
            .collect();
        Self::new(nodes, edges)
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn prob(&self, id: EdgeId) -> f64 {
        self.edges[id].prob
    }

    /// Out-edges of `node` in input order.
    pub fn out_edges(&self, node: NodeId) -> &[EdgeId] {
        &self.adj_edge[self.adj_start[node.0]..self.adj_start[node.0 + 1]]
    }

    pub fn out_degree(&self, node: NodeId) -> usize {
        self.adj_start[node.0 + 1] - self.adj_start[node.0]
    }

    pub fn self_loop_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_self_loop()).count()
    }

    pub fn check_node(&self, node: NodeId) -> Result<()> {
        if node.0 < self.nodes {
            Ok(())
        } else {
            Err(Error::InvalidNode {
                node: node.0,
                nodes: self.nodes,
            })
        }
    }

    /// Flips the biased coin of edge `id`.
    #[inline]
    pub fn flip<R: RngCore + ?Sized>(&self, id: EdgeId, rng: &mut R) -> bool {
        (rng.next_u64() >> 11) < self.thresholds[id]
    }

    /// Probability of drawing exactly the possible graph `g`.
    pub fn possible_graph_prob(&self, g: &PossibleGraph<'_>) -> f64 {
        self.edges
            .iter()
            .zip(&g.present)
            .map(|(e, &on)| if on { e.prob } else { 1.0 - e.prob })
            .product()
    }

    /// Draws a possible graph consistent with `assign`: determined edges keep
    /// their status, undetermined ones get a fresh coin each.
    pub fn sample_possible_graph<R: RngCore + ?Sized>(
        &self,
        assign: &StatusAssignment,
        rng: &mut R,
    ) -> PossibleGraph<'_> {
        let mut present = vec![false; self.edge_count()];
        sample_into(self, assign, rng, &mut present);
        PossibleGraph { net: self, present }
    }

    /// Edge ids in the order a breadth-first traversal from `s` examines them.
    ///
    /// Every out-edge of a dequeued node is listed in adjacency order, even if
    /// its head was already discovered. Edges whose source is never reached
    /// follow in ascending id order, so the result is a permutation of `0..m`.
    pub fn bfs_edge_order(&self, s: NodeId) -> Result<Vec<EdgeId>> {
        self.check_node(s)?;
        let mut order = Vec::with_capacity(self.edge_count());
        let mut seen = vec![false; self.nodes];
        let mut queue = VecDeque::new();
        seen[s.0] = true;
        queue.push_back(s.0);
        while let Some(u) = queue.pop_front() {
            for &e in self.out_edges(NodeId(u)) {
                order.push(e);
                let v = self.edges[e].dst.0;
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        order.extend((0..self.edge_count()).filter(|&e| !seen[self.edges[e].src.0]));
        Ok(order)
    }

    /// Adds a node wired to every seed by a probability-1 edge.
    ///
    /// The original nodes and edges keep their ids. The influenceability of
    /// the returned node equals the expected number of nodes reachable from
    /// the seed set, seeds included.
    pub fn add_virtual_seed(&self, seeds: &[NodeId]) -> Result<(InfluenceNetwork, NodeId)> {
        if seeds.is_empty() {
            return Err(Error::EmptySeedSet);
        }
        for &s in seeds {
            self.check_node(s)?;
        }
        let hub = NodeId(self.nodes);
        let mut edges = self.edges.clone();
        edges.extend(seeds.iter().map(|&dst| Edge {
            src: hub,
            dst,
            prob: 1.0,
        }));
        Ok((InfluenceNetwork::new(self.nodes + 1, edges)?, hub))
    }
}

/// Status of one edge in a partial assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeStatus {
    Absent,
    Present,
    Undetermined,
}

impl EdgeStatus {
    pub fn from_bit(present: bool) -> Self {
        if present {
            EdgeStatus::Present
        } else {
            EdgeStatus::Absent
        }
    }

    pub fn symbol(self) -> char {
        match self {
            EdgeStatus::Absent => '0',
            EdgeStatus::Present => '1',
            EdgeStatus::Undetermined => '*',
        }
    }
}

/// Per-edge statuses; the determined edges are the ones already sampled or
/// enumerated, the rest are left to their coins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatusAssignment {
    statuses: Vec<EdgeStatus>,
    determined: usize,
}

impl StatusAssignment {
    pub fn undetermined(edges: usize) -> Self {
        Self {
            statuses: vec![EdgeStatus::Undetermined; edges],
            determined: 0,
        }
    }

    pub fn from_statuses(statuses: Vec<EdgeStatus>) -> Self {
        let determined = statuses
            .iter()
            .filter(|&&s| s != EdgeStatus::Undetermined)
            .count();
        Self {
            statuses,
            determined,
        }
    }

    pub fn len(&self) -> usize {
        self.statuses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statuses.is_empty()
    }

    #[inline]
    pub fn get(&self, id: EdgeId) -> EdgeStatus {
        self.statuses[id]
    }

    #[inline]
    pub fn set(&mut self, id: EdgeId, status: EdgeStatus) {
        let was = self.statuses[id] != EdgeStatus::Undetermined;
        let now = status != EdgeStatus::Undetermined;
        self.statuses[id] = status;
        match (was, now) {
            (false, true) => self.determined += 1,
            (true, false) => self.determined -= 1,
            _ => {}
        }
    }

    pub fn determined_count(&self) -> usize {
        self.determined
    }

    pub fn undetermined_count(&self) -> usize {
        self.statuses.len() - self.determined
    }

    pub fn is_complete(&self) -> bool {
        self.determined == self.statuses.len()
    }

    pub fn statuses(&self) -> &[EdgeStatus] {
        &self.statuses
    }

    /// Ids of undetermined edges, ascending.
    pub fn undetermined_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.statuses
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == EdgeStatus::Undetermined)
            .map(|(id, _)| id)
    }

    /// Ids of determined edges, ascending.
    pub fn determined_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.statuses
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != EdgeStatus::Undetermined)
            .map(|(id, _)| id)
    }
}

impl fmt::Display for StatusAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.statuses
            .iter()
            .try_for_each(|s| write!(f, "{}", s.symbol()))
    }
}

/// One fully determined realization of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct PossibleGraph<'a> {
    net: &'a InfluenceNetwork,
    present: Vec<bool>,
}

impl<'a> PossibleGraph<'a> {
    /// `present[e]` says whether edge `e` exists; the length must be `m`.
    pub fn new(net: &'a InfluenceNetwork, present: Vec<bool>) -> Self {
        assert_eq!(present.len(), net.edge_count(), "one flag per edge");
        Self { net, present }
    }

    /// The world whose edges are exactly the bits of `mask`, edge `e` at bit `e`.
    pub fn from_mask(net: &'a InfluenceNetwork, mask: u64) -> Self {
        let present = (0..net.edge_count()).map(|e| mask >> e & 1 == 1).collect();
        Self { net, present }
    }

    pub fn network(&self) -> &'a InfluenceNetwork {
        self.net
    }

    pub fn is_present(&self, id: EdgeId) -> bool {
        self.present[id]
    }

    pub fn present(&self) -> &[bool] {
        &self.present
    }

    pub fn prob(&self) -> f64 {
        self.net.possible_graph_prob(self)
    }

    /// Number of nodes other than `s` reachable from `s`.
    pub fn reach_count(&self, s: NodeId) -> Result<usize> {
        self.net.check_node(s)?;
        let mut scratch = ReachScratch::new(self.net.node_count());
        Ok(scratch.count(self.net, s, |e| self.present[e]))
    }
}

/// Reusable BFS buffers for repeated reachability counts on one network.
#[derive(Debug, Clone)]
pub struct ReachScratch {
    stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<u32>,
}

impl ReachScratch {
    pub fn new(nodes: usize) -> Self {
        Self {
            stamp: vec![0; nodes],
            epoch: 0,
            queue: vec![0; nodes + 1],
        }
    }

    /// Counts nodes other than `s` reachable from `s`. `edge_on` is asked at
    /// most once per edge, in BFS order.
    #[inline]
    pub fn count<F: FnMut(EdgeId) -> bool>(
        &mut self,
        net: &InfluenceNetwork,
        s: NodeId,
        mut edge_on: F,
    ) -> usize {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        self.stamp[s.0] = epoch;
        self.queue[0] = s.0 as u32;
        // Branch-free push: the slot past the tail is always written and only
        // kept when the edge opens a new node.
        let queue = &mut self.queue;
        let stamp = &mut self.stamp;
        let (mut head, mut tail) = (0, 1);
        while head < tail {
            let u = queue[head] as usize;
            head += 1;
            let (lo, hi) = (net.adj_start[u], net.adj_start[u + 1]);
            for (&e, &v) in net.adj_edge[lo..hi].iter().zip(&net.adj_dst[lo..hi]) {
                let v = v as usize;
                let fresh = stamp[v] != epoch;
                let take = fresh & edge_on(e);
                queue[tail] = v as u32;
                tail += take as usize;
                stamp[v] = if take { epoch } else { stamp[v] };
            }
        }
        tail - 1
    }
}

/// Fills `present` with a world drawn under `assign`.
#[inline]
pub(crate) fn sample_into<R: RngCore + ?Sized>(
    net: &InfluenceNetwork,
    assign: &StatusAssignment,
    rng: &mut R,
    present: &mut [bool],
) {
    for (e, slot) in present.iter_mut().enumerate() {
        *slot = match assign.statuses[e] {
            EdgeStatus::Absent => false,
            EdgeStatus::Present => true,
            EdgeStatus::Undetermined => net.flip(e, rng),
        };
    }
}
