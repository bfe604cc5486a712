//! Repeated-trial harness: variance of each estimator across independent
//! runs, relative to naive Monte-Carlo on the same seed node.

use std::io::Write;

use rand::seq::index;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{estimate, EstimatorConfig, EstimatorKind, RunRng, SelectionStrategy};
use crate::graph::{InfluenceNetwork, NodeId};

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of trial `trial` on seed node `node`:
/// `master ^ splitmix64(splitmix64(trial) ^ node)`.
///
/// Depends only on its arguments, so a trial gives the same result however
/// the work is scheduled, and every estimator sees the same seed sequence.
pub fn trial_seed(master: u64, node: NodeId, trial: usize) -> u64 {
    master ^ splitmix64(splitmix64(trial as u64) ^ node.index() as u64)
}

/// Unbiased sample variance, `sum (x - mean)^2 / (R - 1)`, by Welford's
/// recurrence.
pub fn sample_variance(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::TooFewTrials(values.len()));
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    Ok((m2 / (values.len() - 1) as f64).max(0.0))
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialBatch {
    pub config: EstimatorConfig,
    pub seed_node: NodeId,
    pub master_seed: u64,
    pub estimates: Vec<f64>,
    pub elapsed_s: Vec<f64>,
    pub samples_used: Vec<u64>,
}

impl TrialBatch {
    pub fn trials(&self) -> usize {
        self.estimates.len()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.estimates)
    }

    pub fn variance(&self) -> Result<f64> {
        sample_variance(&self.estimates)
    }

    /// Standard error of the batch mean.
    pub fn standard_error(&self) -> Result<f64> {
        Ok((self.variance()? / self.trials() as f64).sqrt())
    }

    pub fn mean_elapsed(&self) -> f64 {
        mean(&self.elapsed_s)
    }

    pub fn mean_samples_used(&self) -> f64 {
        self.samples_used.iter().sum::<u64>() as f64 / self.trials() as f64
    }
}

/// `trials` independent runs of `cfg` from `s`. The configured seed is
/// replaced by [`trial_seed`] for each trial.
pub fn run_trials(
    net: &InfluenceNetwork,
    s: NodeId,
    cfg: &EstimatorConfig,
    trials: usize,
    master_seed: u64,
) -> Result<TrialBatch> {
    if trials < 2 {
        return Err(Error::TooFewTrials(trials));
    }
    cfg.validate()?;
    net.check_node(s)?;
    let results = (0..trials)
        .into_par_iter()
        .map(|t| estimate(net, s, &cfg.with_seed(trial_seed(master_seed, s, t))))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialBatch {
        config: *cfg,
        seed_node: s,
        master_seed,
        estimates: results.iter().map(|e| e.value).collect(),
        elapsed_s: results.iter().map(|e| e.elapsed.as_secs_f64()).collect(),
        samples_used: results.iter().map(|e| e.samples_used).collect(),
    })
}

/// Ratio of the two batches' sample variances.
pub fn relative_variance(batch: &TrialBatch, baseline: &TrialBatch) -> Result<f64> {
    let base = baseline.variance()?;
    if base == 0.0 {
        return Err(Error::ZeroBaselineVariance);
    }
    Ok(batch.variance()? / base)
}

/// `count` distinct seed nodes with at least one out-edge, uniformly at
/// random, in ascending order. Fewer are returned if fewer qualify.
pub fn choose_seed_nodes(net: &InfluenceNetwork, count: usize, seed: u64) -> Vec<NodeId> {
    let eligible: Vec<NodeId> = (0..net.node_count())
        .map(NodeId)
        .filter(|&v| net.out_degree(v) > 0)
        .collect();
    let mut rng = RunRng::seed_from_u64(seed);
    let mut picked: Vec<NodeId> =
        index::sample(&mut rng, eligible.len(), count.min(eligible.len()))
            .into_iter()
            .map(|i| eligible[i])
            .collect();
    picked.sort_unstable();
    picked
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedResult {
    pub node: usize,
    pub mean: f64,
    pub variance: f64,
    /// `None` when the baseline batch for this node has zero variance.
    pub relative_variance: Option<f64>,
    pub mean_time_s: Option<f64>,
    pub mean_samples_used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub estimator: String,
    pub kind: EstimatorKind,
    pub strategy: Option<SelectionStrategy>,
    pub r: Option<usize>,
    pub tau: Option<usize>,
    pub samples: usize,
    pub seed_count: usize,
    pub trials: usize,
    /// Averages over seed nodes of the per-node batch statistics.
    pub mean: f64,
    pub variance: f64,
    /// Average of the per-node ratios, over nodes where it is defined.
    pub relative_variance: Option<f64>,
    pub mean_time_s: Option<f64>,
    pub mean_samples_used: f64,
    pub per_seed: Vec<SeedResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkDescriptor {
    pub nodes: usize,
    pub edges: usize,
    pub self_loops: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub network: NetworkDescriptor,
    pub seed_nodes: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    /// Set when no NMC configuration was supplied and one was added.
    pub baseline_added: bool,
    pub rows: Vec<ReportRow>,
}

/// Runs every configuration on every seed node and aggregates per-node
/// statistics. The first NMC configuration is the variance baseline; if
/// there is none, an NMC row with the first configuration's budget is
/// prepended.
pub fn evaluate_suite(
    net: &InfluenceNetwork,
    seed_nodes: &[NodeId],
    configs: &[EstimatorConfig],
    trials: usize,
    master_seed: u64,
) -> Result<EvaluationReport> {
    if seed_nodes.is_empty() {
        return Err(Error::EmptySeedSet);
    }
    let mut configs = configs.to_vec();
    let baseline_added = !configs.iter().any(|c| c.kind == EstimatorKind::Nmc);
    if baseline_added {
        let samples = configs.first().map_or(1000, |c| c.samples);
        configs.insert(
            0,
            EstimatorConfig::new(EstimatorKind::Nmc).with_samples(samples),
        );
    }
    let baseline = configs
        .iter()
        .position(|c| c.kind == EstimatorKind::Nmc)
        .expect("baseline present");

    // batches[seed][config]
    let mut batches = Vec::with_capacity(seed_nodes.len());
    for &s in seed_nodes {
        let per_config = configs
            .iter()
            .map(|cfg| {
                run_trials(net, s, cfg, trials, master_seed).map_err(|e| match e {
                    Error::InvalidConfig(msg) => {
                        Error::InvalidConfig(format!("{}: {msg}", cfg.label()))
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        batches.push(per_config);
    }

    let mut rows = Vec::with_capacity(configs.len());
    for (c, cfg) in configs.iter().enumerate() {
        let mut per_seed = Vec::with_capacity(seed_nodes.len());
        for seed_batches in &batches {
            let batch = &seed_batches[c];
            let relative_variance = match relative_variance(batch, &seed_batches[baseline]) {
                Ok(v) => Some(v),
                Err(Error::ZeroBaselineVariance) => None,
                Err(e) => return Err(e),
            };
            per_seed.push(SeedResult {
                node: batch.seed_node.index(),
                mean: batch.mean(),
                variance: batch.variance()?,
                relative_variance,
                mean_time_s: Some(batch.mean_elapsed()),
                mean_samples_used: batch.mean_samples_used(),
            });
        }
        rows.push(aggregate(cfg, trials, per_seed));
    }

    Ok(EvaluationReport {
        network: NetworkDescriptor {
            nodes: net.node_count(),
            edges: net.edge_count(),
            self_loops: net.self_loop_count(),
        },
        seed_nodes: seed_nodes.iter().map(|s| s.index()).collect(),
        trials,
        master_seed,
        baseline_added,
        rows,
    })
}

fn aggregate(cfg: &EstimatorConfig, trials: usize, per_seed: Vec<SeedResult>) -> ReportRow {
    let avg = |f: &dyn Fn(&SeedResult) -> f64| {
        per_seed.iter().map(f).sum::<f64>() / per_seed.len() as f64
    };
    let ratios: Vec<f64> = per_seed
        .iter()
        .filter_map(|s| s.relative_variance)
        .collect();
    let stratified = cfg.kind.is_stratified();
    ReportRow {
        estimator: cfg.label(),
        kind: cfg.kind,
        strategy: stratified.then_some(cfg.strategy),
        r: (stratified || cfg.kind == EstimatorKind::ExactDc).then_some(cfg.r),
        tau: matches!(cfg.kind, EstimatorKind::Rss1 | EstimatorKind::Rss2).then_some(cfg.tau),
        samples: cfg.samples,
        seed_count: per_seed.len(),
        trials,
        mean: avg(&|s| s.mean),
        variance: avg(&|s| s.variance),
        relative_variance: (!ratios.is_empty()).then(|| mean(&ratios)),
        mean_time_s: Some(avg(&|s| s.mean_time_s.unwrap_or(0.0))),
        mean_samples_used: avg(&|s| s.mean_samples_used),
        per_seed,
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    estimator: &'a str,
    r: Option<usize>,
    tau: Option<usize>,
    #[serde(rename = "N")]
    samples: usize,
    seed_count: usize,
    trials: usize,
    mean: f64,
    variance: f64,
    relative_variance: Option<f64>,
    mean_time_s: Option<f64>,
}

impl EvaluationReport {
    pub fn row(&self, label: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.estimator == label)
    }

    /// Blanks every wall-clock field so the report depends only on its inputs.
    pub fn strip_timing(&mut self) {
        for row in &mut self.rows {
            row.mean_time_s = None;
            for s in &mut row.per_seed {
                s.mean_time_s = None;
            }
        }
    }

    /// Columns: estimator, r, tau, N, seed_count, trials, mean, variance,
    /// relative_variance, mean_time_s. Undefined values are left empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(CsvRow {
                estimator: &row.estimator,
                r: row.r,
                tau: row.tau,
                samples: row.samples,
                seed_count: row.seed_count,
                trials: row.trials,
                mean: row.mean,
                variance: row.variance,
                relative_variance: row.relative_variance,
                mean_time_s: row.mean_time_s,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }
}
