//! Influenceability of nodes in independent-cascade influence networks.
//!
//! The influenceability of a seed node is the expected number of other nodes
//! it reaches when every edge exists independently with its own probability.
//! This crate computes it exactly on small networks and estimates it with
//! naive Monte-Carlo or with basic and recursive stratified sampling, and
//! ships the repeated-trial harness used to compare their variances.

pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod graph;
pub mod ingest;

pub use error::{Error, Result};
pub use estimators::{
    brute_force_exact, bss1_estimate, bss2_estimate, estimate, exact_dc, nmc_estimate,
    rss1_estimate, rss2_estimate, Allocation, Estimate, EstimatorConfig, EstimatorKind,
    SelectionStrategy,
};
pub use evaluation::{
    evaluate_suite, relative_variance, run_trials, sample_variance, EvaluationReport, TrialBatch,
};
pub use graph::{
    Edge, EdgeId, EdgeStatus, InfluenceNetwork, NodeId, PossibleGraph, StatusAssignment,
};
pub use ingest::{
    generate_er, parse_edge_list, weight_to_prob, GeneratorSpec, NodeLabels, ProbLaw, ValueKind,
};
