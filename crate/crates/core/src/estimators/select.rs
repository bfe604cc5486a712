use rand::seq::index;
use rand::Rng;

use crate::error::Result;
use crate::graph::{EdgeId, EdgeStatus, InfluenceNetwork, NodeId, StatusAssignment};

use super::SelectionStrategy;

/// Picks up to `r` undetermined edges of `assign` for stratification.
///
/// `Random` samples uniformly without replacement; `Bfs` takes the first
/// undetermined entries of the breadth-first edge order from `s`.
pub fn select_edges<R: Rng + ?Sized>(
    strategy: SelectionStrategy,
    net: &InfluenceNetwork,
    s: NodeId,
    assign: &StatusAssignment,
    r: usize,
    rng: &mut R,
) -> Result<Vec<EdgeId>> {
    match strategy {
        SelectionStrategy::Random => {
            let open: Vec<EdgeId> = assign.undetermined_edges().collect();
            let want = r.min(open.len());
            Ok(index::sample(rng, open.len(), want)
                .into_iter()
                .map(|i| open[i])
                .collect())
        }
        SelectionStrategy::Bfs => Ok(net
            .bfs_edge_order(s)?
            .into_iter()
            .filter(|&e| assign.get(e) == EdgeStatus::Undetermined)
            .take(r)
            .collect()),
    }
}
