//! Estimator lists for `evaluate`: `kind[-strategy][@r]`, comma separated.

use anyhow::{bail, Context, Result};
use stratinf::{EstimatorConfig, EstimatorKind, SelectionStrategy};

#[derive(Debug, Clone, Copy)]
pub struct Defaults {
    pub samples: usize,
    pub r1: usize,
    pub r2: usize,
    pub tau: usize,
    pub lazy: bool,
    pub allocation: stratinf::Allocation,
}

impl Defaults {
    fn config(&self, kind: EstimatorKind) -> EstimatorConfig {
        let r = match kind {
            EstimatorKind::Bss2 | EstimatorKind::Rss2 => self.r2,
            _ => self.r1,
        };
        EstimatorConfig::new(kind)
            .with_samples(self.samples)
            .with_r(r)
            .with_tau(self.tau)
            .with_lazy(self.lazy)
            .with_allocation(self.allocation)
    }
}

/// The ten estimators of the standard comparison.
pub fn default_roster(d: &Defaults) -> Vec<EstimatorConfig> {
    use EstimatorKind::*;
    use SelectionStrategy::*;
    let mut out = vec![
        d.config(Nmc),
        d.config(Rss1).with_r(1).with_strategy(Random),
    ];
    for kind in [Bss1, Rss1, Bss2, Rss2] {
        for strategy in [Random, Bfs] {
            out.push(d.config(kind).with_strategy(strategy));
        }
    }
    out
}

pub fn parse_roster(spec: &str, d: &Defaults) -> Result<Vec<EstimatorConfig>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| parse_item(item, d).with_context(|| format!("in estimator {item:?}")))
        .collect()
}

fn parse_item(item: &str, d: &Defaults) -> Result<EstimatorConfig> {
    let (name, r) = match item.split_once('@') {
        Some((name, r)) => (
            name,
            Some(r.parse::<usize>().context("bad width after '@'")?),
        ),
        None => (item, None),
    };
    let (kind, strategy) = match name.split_once('-') {
        Some((k, s)) => (k, Some(s.parse::<SelectionStrategy>()?)),
        None => (name, None),
    };
    let kind: EstimatorKind = kind.parse()?;
    if kind.is_exact() {
        bail!("exact methods are not part of an evaluation suite");
    }
    if !kind.is_stratified() && (strategy.is_some() || r.is_some()) {
        bail!("{} takes no strategy or width", kind.name());
    }
    let mut cfg = d.config(kind);
    if let Some(s) = strategy {
        cfg = cfg.with_strategy(s);
    }
    if let Some(r) = r {
        cfg = cfg.with_r(r);
    }
    Ok(cfg)
}
