//! Stratum designs and sample allocation.
//!
//! Type-I strata fix every selected edge, giving `2^r` strata; pattern `k`
//! sets edge `T[j]` present iff bit `j` of `k` is set. Type-II strata are the
//! `r + 1` prefix patterns: stratum 0 has all selected edges absent, stratum
//! `i` has the first `i - 1` absent, edge `i` present and the rest free.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, EdgeStatus, InfluenceNetwork};

/// Widest type-I stratification accepted (2^20 strata).
pub const MAX_TYPE1_WIDTH: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumDescriptor {
    pub edges: Vec<EdgeId>,
    /// One status per selected edge.
    pub pattern: Vec<EdgeStatus>,
    pub pi: f64,
}

/// Probability mass of a fully determined pattern over `edges`.
pub fn stratum_prob_t1(net: &InfluenceNetwork, edges: &[EdgeId], pattern: &[EdgeStatus]) -> f64 {
    debug_assert_eq!(edges.len(), pattern.len());
    edges
        .iter()
        .zip(pattern)
        .map(|(&e, status)| match status {
            EdgeStatus::Present => net.prob(e),
            EdgeStatus::Absent => 1.0 - net.prob(e),
            EdgeStatus::Undetermined => 1.0,
        })
        .product()
}

/// Probability mass of type-II stratum `index` over `edges`.
pub fn stratum_prob_t2(net: &InfluenceNetwork, edges: &[EdgeId], index: usize) -> Result<f64> {
    let width = edges.len();
    if index > width {
        return Err(Error::StratumOutOfRange { index, width });
    }
    let absent: f64 = if index == 0 {
        edges.iter().map(|&e| 1.0 - net.prob(e)).product()
    } else {
        net.prob(edges[index - 1])
            * edges[..index - 1]
                .iter()
                .map(|&e| 1.0 - net.prob(e))
                .product::<f64>()
    };
    Ok(absent)
}

/// Pattern `k` of a type-I design: bit `j` of `k` decides edge `j`.
pub fn type1_pattern(width: usize, k: usize) -> Vec<EdgeStatus> {
    (0..width)
        .map(|j| EdgeStatus::from_bit(k >> j & 1 == 1))
        .collect()
}

/// Row `index` of a type-II design.
pub fn type2_pattern(width: usize, index: usize) -> Vec<EdgeStatus> {
    (0..width)
        .map(|j| match index {
            0 => EdgeStatus::Absent,
            i if j + 1 < i => EdgeStatus::Absent,
            i if j + 1 == i => EdgeStatus::Present,
            _ => EdgeStatus::Undetermined,
        })
        .collect()
}

/// All `2^|edges|` type-I strata in pattern order.
pub fn type1_strata(net: &InfluenceNetwork, edges: &[EdgeId]) -> Result<Vec<StratumDescriptor>> {
    if edges.len() > MAX_TYPE1_WIDTH {
        return Err(Error::InvalidConfig(format!(
            "type-I stratification over {} edges exceeds the limit of {MAX_TYPE1_WIDTH}",
            edges.len()
        )));
    }
    Ok((0..1usize << edges.len())
        .map(|k| {
            let pattern = type1_pattern(edges.len(), k);
            let pi = stratum_prob_t1(net, edges, &pattern);
            StratumDescriptor {
                edges: edges.to_vec(),
                pattern,
                pi,
            }
        })
        .collect())
}

/// The `|edges| + 1` type-II strata, stratum 0 first.
pub fn type2_strata(net: &InfluenceNetwork, edges: &[EdgeId]) -> Vec<StratumDescriptor> {
    (0..=edges.len())
        .map(|i| StratumDescriptor {
            edges: edges.to_vec(),
            pattern: type2_pattern(edges.len(), i),
            pi: stratum_prob_t2(net, edges, i).expect("index within range"),
        })
        .collect()
}

/// Type-I masses indexed by pattern, built by doubling.
pub(crate) fn type1_masses(net: &InfluenceNetwork, edges: &[EdgeId]) -> Vec<f64> {
    let mut masses = Vec::with_capacity(1 << edges.len());
    masses.push(1.0);
    for &e in edges {
        let p = net.prob(e);
        let half = masses.len();
        for k in 0..half {
            let q = masses[k];
            masses[k] = q * (1.0 - p);
            masses.push(q * p);
        }
    }
    masses
}

/// Type-II masses, stratum 0 first.
pub(crate) fn type2_masses(net: &InfluenceNetwork, edges: &[EdgeId]) -> Vec<f64> {
    let mut masses = Vec::with_capacity(edges.len() + 1);
    masses.push(0.0);
    let mut none_yet = 1.0;
    for &e in edges {
        let p = net.prob(e);
        masses.push(none_yet * p);
        none_yet *= 1.0 - p;
    }
    masses[0] = none_yet;
    masses
}

/// Proportional allocation of `total` samples.
///
/// Largest-remainder apportionment of `total * pis[i]` (ties go to the lower
/// index), after which every stratum with positive mass is raised to at least
/// one sample. The result may therefore sum to more than `total`.
pub fn allocate_samples(pis: &[f64], total: usize) -> Vec<usize> {
    let mut alloc = apportion(pis, total);
    for (n, &p) in alloc.iter_mut().zip(pis) {
        if p > 0.0 && *n == 0 {
            *n = 1;
        }
    }
    alloc
}

/// Largest-remainder apportionment of `total` by mass; sums to `total` exactly
/// whenever some mass is positive.
pub fn apportion(pis: &[f64], total: usize) -> Vec<usize> {
    let quotas: Vec<f64> = pis.iter().map(|&p| p.max(0.0) * total as f64).collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    let left = total.saturating_sub(assigned);
    if left > 0 {
        let mut order: Vec<usize> = (0..pis.len()).filter(|&i| pis[i] > 0.0).collect();
        order.sort_by(|&a, &b| {
            let fa = quotas[a] - quotas[a].floor();
            let fb = quotas[b] - quotas[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for &i in order.iter().cycle().take(left) {
            alloc[i] += 1;
        }
    }
    alloc
}

/// Allocation that keeps the budget at exactly `total`.
///
/// Strata whose quota `total * pis[i]` is below one sample are merged into a
/// single residual stratum, which is apportioned alongside the others and
/// gets at least one sample (taken from the largest allocation if needed).
/// Whenever that top-up is needed some stratum holds two or more samples, so
/// the result sums to `total`.
pub fn pooled_allocation(pis: &[f64], total: usize) -> PooledAllocation {
    let light = |p: f64| p > 0.0 && p * (total as f64) < 1.0;
    let pool: Vec<usize> = (0..pis.len()).filter(|&i| light(pis[i])).collect();
    let pool_mass: f64 = pool.iter().map(|&i| pis[i]).sum();
    // the merged stratum sits at the end of the apportioned vector
    let mut merged: Vec<f64> = pis
        .iter()
        .map(|&p| if light(p) { 0.0 } else { p })
        .collect();
    merged.push(pool_mass);
    let mut counts = apportion(&merged, total);
    let mut pool_samples = counts.pop().unwrap_or(0);
    if !pool.is_empty() && pool_samples == 0 {
        let donor = (0..counts.len())
            .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
            .expect("a light stratum leaves room for heavier ones");
        // only rounding can leave the donor short; overshoot by one then
        if counts[donor] >= 2 {
            counts[donor] -= 1;
        }
        pool_samples = 1;
    }
    PooledAllocation {
        counts,
        pool,
        pool_mass,
        pool_samples,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PooledAllocation {
    /// Samples per stratum; zero for pooled strata.
    pub counts: Vec<usize>,
    /// Strata merged into the residual stratum.
    pub pool: Vec<usize>,
    pub pool_mass: f64,
    /// Samples for the residual stratum, each landing in a pooled stratum
    /// chosen with probability proportional to its mass.
    pub pool_samples: usize,
}

/// Variance-minimizing real-valued allocation `N pi_i sqrt(sigma_i) / sum`.
///
/// Needs the per-stratum variances, which are only known on instances small
/// enough to enumerate; the estimators themselves allocate proportionally.
pub fn optimal_allocation(pis: &[f64], variances: &[f64], total: usize) -> Vec<f64> {
    let weights: Vec<f64> = pis
        .iter()
        .zip(variances)
        .map(|(p, v)| p * v.sqrt())
        .collect();
    let norm: f64 = weights.iter().sum();
    if norm == 0.0 {
        return pis.iter().map(|p| p * total as f64).collect();
    }
    weights.iter().map(|w| total as f64 * w / norm).collect()
}
