//! Exact influenceability by enumerating possible graphs.

use crate::error::{Error, Result};
use crate::graph::{EdgeId, EdgeStatus, InfluenceNetwork, NodeId, ReachScratch, StatusAssignment};

use super::strata::type1_masses;

/// Largest edge count either exact method will enumerate.
pub const EXACT_EDGE_LIMIT: usize = 25;

fn guard(net: &InfluenceNetwork) -> Result<()> {
    if net.edge_count() > EXACT_EDGE_LIMIT {
        return Err(Error::EnumerationTooLarge {
            edges: net.edge_count(),
            limit: EXACT_EDGE_LIMIT,
        });
    }
    Ok(())
}

/// Sums `Pr[G] * f_s(G)` over all `2^m` possible graphs.
pub fn brute_force_exact(net: &InfluenceNetwork, s: NodeId) -> Result<f64> {
    guard(net)?;
    net.check_node(s)?;
    let m = net.edge_count();
    let mut scratch = ReachScratch::new(net.node_count());
    let mut total = 0.0;
    for mask in 0u64..1 << m {
        let prob: f64 = (0..m)
            .map(|e| {
                if mask >> e & 1 == 1 {
                    net.prob(e)
                } else {
                    1.0 - net.prob(e)
                }
            })
            .product();
        if prob == 0.0 {
            continue;
        }
        let reach = scratch.count(net, s, |e| mask >> e & 1 == 1);
        total += prob * reach as f64;
    }
    Ok(total)
}

/// Divide-and-conquer enumeration: fix up to `r` undetermined edges at a
/// time in all `2^r` ways and recurse until every edge is determined.
///
/// The result does not depend on `r` or on which edges are fixed first.
pub fn exact_dc(net: &InfluenceNetwork, s: NodeId, r: usize) -> Result<f64> {
    guard(net)?;
    net.check_node(s)?;
    if r == 0 {
        return Err(Error::InvalidConfig("r must be at least 1".into()));
    }
    let mut enumerator = Enumerator {
        net,
        seed: s,
        width: r,
        assign: StatusAssignment::undetermined(net.edge_count()),
        scratch: ReachScratch::new(net.node_count()),
    };
    Ok(enumerator.expand())
}

struct Enumerator<'a> {
    net: &'a InfluenceNetwork,
    seed: NodeId,
    width: usize,
    assign: StatusAssignment,
    scratch: ReachScratch,
}

impl Enumerator<'_> {
    fn expand(&mut self) -> f64 {
        if self.assign.is_complete() {
            let assign = &self.assign;
            return self.scratch.count(self.net, self.seed, |e| {
                assign.get(e) == EdgeStatus::Present
            }) as f64;
        }
        let chosen: Vec<EdgeId> = self.assign.undetermined_edges().take(self.width).collect();
        let masses = type1_masses(self.net, &chosen);
        let mut total = 0.0;
        for (k, &pi) in masses.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            for (j, &e) in chosen.iter().enumerate() {
                self.assign.set(e, EdgeStatus::from_bit(k >> j & 1 == 1));
            }
            total += pi * self.expand();
        }
        for &e in &chosen {
            self.assign.set(e, EdgeStatus::Undetermined);
        }
        total
    }
}
