//! Naive Monte-Carlo and the basic/recursive stratified samplers.
//!
//! All four stratified estimators share one walk over the stratification
//! tree. A node either samples its budget directly from the conditional law
//! (a leaf) or selects edges, splits into strata, apportions its budget and
//! returns the mass-weighted sum of the children's means.

use rand::{Rng, RngCore};

use crate::graph::{
    sample_into, EdgeId, EdgeStatus, InfluenceNetwork, NodeId, ReachScratch, StatusAssignment,
};

use super::strata::{allocate_samples, pooled_allocation, type1_masses, type2_masses};
use super::{Allocation, SelectionStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Design {
    TypeOne,
    TypeTwo,
}

/// Undetermined edges visible to a tree node.
///
/// With random selection they are `pool[..pos]`; with BFS selection they are
/// the undetermined entries of `order[pos..]`.
#[derive(Debug, Clone, Copy)]
struct Frontier {
    pos: usize,
    remaining: usize,
}

enum Picker {
    Random { pool: Vec<EdgeId> },
    Bfs { order: Vec<EdgeId> },
}

struct Selection {
    edges: Vec<EdgeId>,
    // random: (i, j) swaps to undo; bfs: order position of each edge
    marks: Vec<(usize, usize)>,
}

pub(crate) struct Sampler<'a, R> {
    net: &'a InfluenceNetwork,
    seed: NodeId,
    rng: R,
    width: usize,
    tau: usize,
    lazy: bool,
    allocation: Allocation,
    max_depth: usize,
    assign: StatusAssignment,
    present: Vec<bool>,
    scratch: ReachScratch,
    picker: Picker,
    samples: u64,
    splits: Option<Vec<(usize, Vec<EdgeId>)>>,
}

impl<'a, R: RngCore> Sampler<'a, R> {
    pub(crate) fn new(
        net: &'a InfluenceNetwork,
        seed: NodeId,
        rng: R,
        strategy: SelectionStrategy,
        width: usize,
        tau: usize,
        lazy: bool,
        allocation: Allocation,
    ) -> Self {
        let m = net.edge_count();
        let picker = match strategy {
            SelectionStrategy::Random => Picker::Random {
                pool: (0..m).collect(),
            },
            SelectionStrategy::Bfs => Picker::Bfs {
                order: net.bfs_edge_order(seed).expect("seed validated by caller"),
            },
        };
        Self {
            net,
            seed,
            rng,
            width: width.max(1),
            tau,
            lazy,
            allocation,
            max_depth: m.div_ceil(width.max(1)) + 1,
            assign: StatusAssignment::undetermined(m),
            present: vec![false; if lazy { 0 } else { m }],
            scratch: ReachScratch::new(net.node_count()),
            picker,
            samples: 0,
            splits: None,
        }
    }

    pub(crate) fn samples_used(&self) -> u64 {
        self.samples
    }

    #[cfg(test)]
    /// Records `(depth, selected edges)` for every split from now on.
    pub(crate) fn record_splits(&mut self) {
        self.splits = Some(Vec::new());
    }

    #[cfg(test)]
    pub(crate) fn take_splits(&mut self) -> Vec<(usize, Vec<EdgeId>)> {
        self.splits.take().unwrap_or_default()
    }

    fn root(&self) -> Frontier {
        let m = self.net.edge_count();
        Frontier {
            pos: match self.picker {
                Picker::Random { .. } => m,
                Picker::Bfs { .. } => 0,
            },
            remaining: m,
        }
    }

    /// Plain Monte-Carlo over the current assignment.
    pub(crate) fn naive(&mut self, budget: usize) -> f64 {
        self.leaf(budget)
    }

    /// Stratified estimate. `recursive` selects the RSS variants; otherwise
    /// only the root is stratified.
    pub(crate) fn stratified(&mut self, design: Design, budget: usize, recursive: bool) -> f64 {
        let root = self.root();
        self.node(design, budget, root, 0, recursive)
    }

    fn draw(&mut self) -> usize {
        let Self {
            net,
            seed,
            rng,
            assign,
            present,
            scratch,
            lazy,
            ..
        } = self;
        if *lazy {
            scratch.count(net, *seed, |e| match assign.get(e) {
                EdgeStatus::Present => true,
                EdgeStatus::Absent => false,
                EdgeStatus::Undetermined => net.flip(e, rng),
            })
        } else {
            sample_into(net, assign, rng, present);
            scratch.count(net, *seed, |e| present[e])
        }
    }

    fn leaf(&mut self, budget: usize) -> f64 {
        self.samples += budget as u64;
        if self.assign.is_complete() {
            return self.draw() as f64;
        }
        let mut sum = 0u64;
        for _ in 0..budget {
            sum += self.draw() as u64;
        }
        sum as f64 / budget as f64
    }

    fn node(
        &mut self,
        design: Design,
        budget: usize,
        at: Frontier,
        depth: usize,
        recursive: bool,
    ) -> f64 {
        let stop = if recursive {
            budget < self.tau || at.remaining < self.width || depth >= self.max_depth
        } else {
            depth >= 1
        };
        if stop || at.remaining == 0 {
            return self.leaf(budget);
        }
        let width = self.width.min(at.remaining);
        let sel = self.select(at, width);
        let masses = match design {
            Design::TypeOne => type1_masses(self.net, &sel.edges),
            Design::TypeTwo => type2_masses(self.net, &sel.edges),
        };
        let plan = match self.allocation {
            Allocation::MinOne => (allocate_samples(&masses, budget), Vec::new(), 0.0, 0),
            Allocation::Pooled => {
                let a = pooled_allocation(&masses, budget);
                (a.counts, a.pool, a.pool_mass, a.pool_samples)
            }
        };
        let (counts, pool, pool_mass, pool_samples) = plan;
        if let Some(log) = &mut self.splits {
            log.push((depth, sel.edges.clone()));
        }
        let mut total = 0.0;
        for (k, (&pi, &n)) in masses.iter().zip(&counts).enumerate() {
            if pi == 0.0 || n == 0 {
                continue;
            }
            let child = self.enter(design, &sel, at, k);
            total += pi * self.node(design, n, child, depth + 1, recursive);
        }
        if pool_samples > 0 {
            // each residual draw lands in a light stratum picked by mass
            let mut hits = vec![0usize; pool.len()];
            for _ in 0..pool_samples {
                let mut u = self.rng.gen::<f64>() * pool_mass;
                let mut slot = pool.len() - 1;
                for (j, &i) in pool.iter().enumerate() {
                    if u < masses[i] {
                        slot = j;
                        break;
                    }
                    u -= masses[i];
                }
                hits[slot] += 1;
            }
            let mut sum = 0.0;
            for (&k, &n) in pool.iter().zip(&hits) {
                if n > 0 {
                    let child = self.enter(design, &sel, at, k);
                    sum += n as f64 * self.node(design, n, child, depth + 1, recursive);
                }
            }
            total += pool_mass * sum / pool_samples as f64;
        }
        for &e in &sel.edges {
            self.assign.set(e, EdgeStatus::Undetermined);
        }
        self.release(&sel);
        total
    }

    /// Fixes the selected edges to stratum `k` and returns the child frontier.
    fn enter(&mut self, design: Design, sel: &Selection, at: Frontier, k: usize) -> Frontier {
        let edges = &sel.edges;
        match design {
            Design::TypeOne => {
                for (j, &e) in edges.iter().enumerate() {
                    self.assign.set(e, EdgeStatus::from_bit(k >> j & 1 == 1));
                }
                self.after(sel, at, edges.len())
            }
            Design::TypeTwo if k == 0 => {
                for &e in edges {
                    self.assign.set(e, EdgeStatus::Absent);
                }
                self.after(sel, at, edges.len())
            }
            Design::TypeTwo => {
                for (j, &e) in edges.iter().enumerate() {
                    let status = match (j + 1).cmp(&k) {
                        std::cmp::Ordering::Less => EdgeStatus::Absent,
                        std::cmp::Ordering::Equal => EdgeStatus::Present,
                        std::cmp::Ordering::Greater => EdgeStatus::Undetermined,
                    };
                    self.assign.set(e, status);
                }
                self.after(sel, at, k)
            }
        }
    }

    fn select(&mut self, at: Frontier, width: usize) -> Selection {
        let mut edges = Vec::with_capacity(width);
        let mut marks = Vec::with_capacity(width);
        match &mut self.picker {
            Picker::Random { pool } => {
                for j in 0..width {
                    let end = at.pos - 1 - j;
                    let pick = self.rng.gen_range(0..=end);
                    pool.swap(pick, end);
                    marks.push((pick, end));
                    edges.push(pool[end]);
                }
            }
            Picker::Bfs { order } => {
                let mut p = at.pos;
                while edges.len() < width {
                    let e = order[p];
                    if self.assign.get(e) == EdgeStatus::Undetermined {
                        edges.push(e);
                        marks.push((p, p));
                    }
                    p += 1;
                }
            }
        }
        Selection { edges, marks }
    }

    /// Frontier once the first `fixed` selected edges are determined.
    fn after(&self, sel: &Selection, at: Frontier, fixed: usize) -> Frontier {
        let pos = match self.picker {
            Picker::Random { .. } => at.pos - fixed,
            Picker::Bfs { .. } if fixed == 0 => at.pos,
            Picker::Bfs { .. } => sel.marks[fixed - 1].0 + 1,
        };
        Frontier {
            pos,
            remaining: at.remaining - fixed,
        }
    }

    fn release(&mut self, sel: &Selection) {
        if let Picker::Random { pool } = &mut self.picker {
            for &(i, j) in sel.marks.iter().rev() {
                pool.swap(i, j);
            }
        }
    }
}
