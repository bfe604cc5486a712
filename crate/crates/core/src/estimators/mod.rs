//! Influenceability estimators.
//!
//! Two exact methods ([`brute_force_exact`], [`exact_dc`]) and five sampling
//! estimators: naive Monte-Carlo and basic/recursive stratified sampling over
//! the type-I (`2^r` full patterns) and type-II (`r + 1` prefix patterns)
//! stratum designs. Every sampling run is a pure function of the network,
//! seed node and [`EstimatorConfig`].

mod exact;
mod sampling;
mod select;
mod strata;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{InfluenceNetwork, NodeId};

pub use exact::{brute_force_exact, exact_dc, EXACT_EDGE_LIMIT};
pub use select::select_edges;
pub use strata::{
    allocate_samples, apportion, optimal_allocation, pooled_allocation, stratum_prob_t1,
    stratum_prob_t2, type1_pattern, type1_strata, type2_pattern, type2_strata, PooledAllocation,
    StratumDescriptor, MAX_TYPE1_WIDTH,
};

use sampling::{Design, Sampler};

/// Random number generator behind every sampling run.
pub type RunRng = Xoshiro256PlusPlus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Nmc,
    ExactDc,
    BruteForce,
    Bss1,
    Rss1,
    Bss2,
    Rss2,
}

impl EstimatorKind {
    pub fn is_stratified(self) -> bool {
        matches!(self, Self::Bss1 | Self::Rss1 | Self::Bss2 | Self::Rss2)
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Self::ExactDc | Self::BruteForce)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Nmc => "NMC",
            Self::ExactDc => "EXACT-DC",
            Self::BruteForce => "BRUTE",
            Self::Bss1 => "BSS1",
            Self::Rss1 => "RSS1",
            Self::Bss2 => "BSS2",
            Self::Rss2 => "RSS2",
        }
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "nmc" => Self::Nmc,
            "exact-dc" | "dc" => Self::ExactDc,
            "brute" | "brute-force" => Self::BruteForce,
            "bss1" => Self::Bss1,
            "rss1" => Self::Rss1,
            "bss2" => Self::Bss2,
            "rss2" => Self::Rss2,
            other => return Err(Error::InvalidConfig(format!("unknown estimator {other:?}"))),
        })
    }
}

/// How stratification edges are chosen among the undetermined ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionStrategy {
    /// Uniformly without replacement, using the run's random stream.
    Random,
    /// Breadth-first edge order from the seed, computed once per run and
    /// consumed front to back along every branch of the recursion.
    Bfs,
}

impl SelectionStrategy {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Random => "RM",
            Self::Bfs => "BFS",
        }
    }
}

impl FromStr for SelectionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" | "rm" => Ok(Self::Random),
            "bfs" => Ok(Self::Bfs),
            other => Err(Error::InvalidConfig(format!(
                "unknown edge-selection strategy {other:?}"
            ))),
        }
    }
}

/// How a split apportions its budget among strata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Allocation {
    /// Proportional; strata left empty share one residual sample, so a run
    /// draws exactly `N` possible graphs.
    #[default]
    Pooled,
    /// Proportional, then every stratum with positive mass gets at least one
    /// sample. Runs can draw well over `N` graphs when many strata are light.
    MinOne,
}

impl Allocation {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Pooled => "pooled",
            Self::MinOne => "min-one",
        }
    }
}

impl FromStr for Allocation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pooled" => Ok(Self::Pooled),
            "min-one" | "min1" => Ok(Self::MinOne),
            other => Err(Error::InvalidConfig(format!(
                "unknown allocation rule {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    /// Sample budget `N`.
    pub samples: usize,
    /// Stratification width `r`.
    pub r: usize,
    /// Recursion cutoff: nodes whose budget is below `tau` sample directly.
    pub tau: usize,
    pub strategy: SelectionStrategy,
    pub seed: u64,
    /// Flip coins only for edges the traversal examines. Same estimator law,
    /// different random stream consumption.
    pub lazy: bool,
    #[serde(default)]
    pub allocation: Allocation,
}

impl EstimatorConfig {
    pub fn new(kind: EstimatorKind) -> Self {
        let r = match kind {
            EstimatorKind::Bss2 | EstimatorKind::Rss2 => 50,
            _ => 5,
        };
        Self {
            kind,
            samples: 1000,
            r,
            tau: 10,
            strategy: SelectionStrategy::Bfs,
            seed: 0,
            lazy: false,
            allocation: Allocation::Pooled,
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_r(mut self, r: usize) -> Self {
        self.r = r;
        self
    }

    pub fn with_tau(mut self, tau: usize) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_strategy(mut self, strategy: SelectionStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_lazy(mut self, lazy: bool) -> Self {
        self.lazy = lazy;
        self
    }

    pub fn with_allocation(mut self, allocation: Allocation) -> Self {
        self.allocation = allocation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.samples == 0 {
            return bad("sample budget must be at least 1".into());
        }
        if self.r == 0 {
            return bad("r must be at least 1".into());
        }
        if self.tau == 0 {
            return bad("tau must be at least 1".into());
        }
        if matches!(self.kind, EstimatorKind::Bss1 | EstimatorKind::Rss1)
            && self.r > MAX_TYPE1_WIDTH
        {
            return bad(format!(
                "{} with r = {} needs 2^{} strata; r is limited to {MAX_TYPE1_WIDTH}",
                self.kind.name(),
                self.r,
                self.r
            ));
        }
        Ok(())
    }

    /// Short display name, e.g. `RSS1-BFS`.
    pub fn label(&self) -> String {
        if self.kind.is_stratified() {
            format!("{}-{}", self.kind.name(), self.strategy.tag())
        } else {
            self.kind.name().to_owned()
        }
    }
}

impl fmt::Display for EstimatorConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (N={}, r={}, tau={})",
            self.label(),
            self.samples,
            self.r,
            self.tau
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Possible graphs drawn; above `N` only under [`Allocation::MinOne`].
    pub samples_used: u64,
    pub elapsed: Duration,
}

fn sampler<'a>(net: &'a InfluenceNetwork, s: NodeId, cfg: &EstimatorConfig) -> Sampler<'a, RunRng> {
    Sampler::new(
        net,
        s,
        RunRng::seed_from_u64(cfg.seed),
        cfg.strategy,
        cfg.r,
        cfg.tau,
        cfg.lazy,
        cfg.allocation,
    )
}

fn timed(f: impl FnOnce() -> Result<(f64, u64)>) -> Result<Estimate> {
    let start = Instant::now();
    let (value, samples_used) = f()?;
    Ok(Estimate {
        value,
        samples_used,
        elapsed: start.elapsed(),
    })
}

fn expect_kind(cfg: &EstimatorConfig, kind: EstimatorKind) -> Result<()> {
    if cfg.kind != kind {
        return Err(Error::InvalidConfig(format!(
            "{} configuration passed to the {} estimator",
            cfg.kind.name(),
            kind.name()
        )));
    }
    Ok(())
}

fn run_stratified(
    net: &InfluenceNetwork,
    s: NodeId,
    cfg: &EstimatorConfig,
    kind: EstimatorKind,
    design: Design,
    recursive: bool,
) -> Result<Estimate> {
    expect_kind(cfg, kind)?;
    cfg.validate()?;
    net.check_node(s)?;
    timed(|| {
        let mut run = sampler(net, s, cfg);
        let value = run.stratified(design, cfg.samples, recursive);
        Ok((value, run.samples_used()))
    })
}

/// Naive Monte-Carlo: mean reach count over `N` independent possible graphs.
pub fn nmc_estimate(net: &InfluenceNetwork, s: NodeId, cfg: &EstimatorConfig) -> Result<Estimate> {
    expect_kind(cfg, EstimatorKind::Nmc)?;
    cfg.validate()?;
    net.check_node(s)?;
    timed(|| {
        let mut run = sampler(net, s, cfg);
        let value = run.naive(cfg.samples);
        Ok((value, run.samples_used()))
    })
}

/// Basic type-I stratified sampling: one split into `2^r` strata.
pub fn bss1_estimate(net: &InfluenceNetwork, s: NodeId, cfg: &EstimatorConfig) -> Result<Estimate> {
    run_stratified(net, s, cfg, EstimatorKind::Bss1, Design::TypeOne, false)
}

/// Recursive type-I stratified sampling.
pub fn rss1_estimate(net: &InfluenceNetwork, s: NodeId, cfg: &EstimatorConfig) -> Result<Estimate> {
    run_stratified(net, s, cfg, EstimatorKind::Rss1, Design::TypeOne, true)
}

/// Basic type-II stratified sampling: one split into `r + 1` strata.
pub fn bss2_estimate(net: &InfluenceNetwork, s: NodeId, cfg: &EstimatorConfig) -> Result<Estimate> {
    run_stratified(net, s, cfg, EstimatorKind::Bss2, Design::TypeTwo, false)
}

/// Recursive type-II stratified sampling.
pub fn rss2_estimate(net: &InfluenceNetwork, s: NodeId, cfg: &EstimatorConfig) -> Result<Estimate> {
    run_stratified(net, s, cfg, EstimatorKind::Rss2, Design::TypeTwo, true)
}

/// Runs whichever estimator `cfg.kind` names.
pub fn estimate(net: &InfluenceNetwork, s: NodeId, cfg: &EstimatorConfig) -> Result<Estimate> {
    match cfg.kind {
        EstimatorKind::Nmc => nmc_estimate(net, s, cfg),
        EstimatorKind::Bss1 => bss1_estimate(net, s, cfg),
        EstimatorKind::Rss1 => rss1_estimate(net, s, cfg),
        EstimatorKind::Bss2 => bss2_estimate(net, s, cfg),
        EstimatorKind::Rss2 => rss2_estimate(net, s, cfg),
        EstimatorKind::ExactDc => timed(|| Ok((exact_dc(net, s, cfg.r)?, 0))),
        EstimatorKind::BruteForce => timed(|| Ok((brute_force_exact(net, s)?, 0))),
    }
}
