//! Edge-list input/output and synthetic Erdős–Rényi networks.
//!
//! The text format is one edge per line, `src dst value`, separated by
//! whitespace. Everything after `#` is a comment. Labels are arbitrary tokens
//! and are relabelled densely in order of first appearance.

use std::io::{BufRead, Write};

use indexmap::IndexSet;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, InfluenceNetwork, NodeId};

/// How the third column of an edge list is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    /// An interaction count or strength, mapped through [`weight_to_prob`].
    Weight,
    /// Already an influence probability in `[0, 1]`.
    Probability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawEdgeRecord {
    pub src: String,
    pub dst: String,
    pub value: f64,
    pub value_kind: ValueKind,
}

impl RawEdgeRecord {
    pub fn probability(&self) -> Result<f64> {
        match self.value_kind {
            ValueKind::Weight => weight_to_prob(self.value),
            ValueKind::Probability if (0.0..=1.0).contains(&self.value) => Ok(self.value),
            ValueKind::Probability => Err(Error::InvalidProbability {
                edge: usize::MAX,
                prob: self.value,
            }),
        }
    }
}

/// Dense node id <-> original label table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeLabels {
    labels: IndexSet<String>,
}

impl NodeLabels {
    /// Labels `"0"`, `"1"`, ... for a network built in memory.
    pub fn numeric(nodes: usize) -> Self {
        Self {
            labels: (0..nodes).map(|i| i.to_string()).collect(),
        }
    }

    fn intern(&mut self, label: &str) -> NodeId {
        match self.labels.get_index_of(label) {
            Some(i) => NodeId(i),
            None => NodeId(self.labels.insert_full(label.to_owned()).0),
        }
    }

    pub fn id(&self, label: &str) -> Option<NodeId> {
        self.labels.get_index_of(label).map(NodeId)
    }

    pub fn label(&self, node: NodeId) -> &str {
        &self.labels[node.0]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Exponential CDF with mean 2: `1 - exp(-w / 2)`.
pub fn weight_to_prob(w: f64) -> Result<f64> {
    if w.is_nan() || w < 0.0 {
        return Err(Error::NegativeWeight(w));
    }
    Ok(-(-w / 2.0).exp_m1())
}

fn parse_record(line_no: usize, line: &str, kind: ValueKind) -> Result<Option<RawEdgeRecord>> {
    let content = line.split('#').next().unwrap_or("");
    let mut fields = content.split_whitespace();
    let Some(src) = fields.next() else {
        return Ok(None);
    };
    let parse_err = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    let (Some(dst), Some(raw), None) = (fields.next(), fields.next(), fields.next()) else {
        return Err(parse_err(format!(
            "expected `src dst value`, got {:?}",
            content.trim()
        )));
    };
    let value: f64 = raw
        .parse()
        .map_err(|_| parse_err(format!("value {raw:?} is not a number")))?;
    if !value.is_finite() || value < 0.0 {
        return Err(parse_err(format!(
            "value {raw} must be finite and non-negative"
        )));
    }
    if kind == ValueKind::Probability && value > 1.0 {
        return Err(Error::Parse {
            line: line_no,
            message: format!("probability {raw} is outside [0, 1]"),
        });
    }
    Ok(Some(RawEdgeRecord {
        src: src.to_owned(),
        dst: dst.to_owned(),
        value,
        value_kind: kind,
    }))
}

/// Reads an edge list. Line numbers in errors are 1-based.
pub fn parse_edge_list<R: BufRead>(
    reader: R,
    kind: ValueKind,
) -> Result<(InfluenceNetwork, NodeLabels)> {
    let mut labels = NodeLabels::default();
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let Some(rec) = parse_record(i + 1, &line, kind)? else {
            continue;
        };
        let prob = rec.probability()?;
        let src = labels.intern(&rec.src);
        let dst = labels.intern(&rec.dst);
        edges.push(Edge { src, dst, prob });
    }
    let net = InfluenceNetwork::new(labels.len(), edges)?;
    Ok((net, labels))
}

/// Writes `src dst prob` lines. Probabilities use the shortest decimal that
/// parses back to the same `f64`.
pub fn write_edge_list<W: Write>(
    mut out: W,
    net: &InfluenceNetwork,
    labels: &NodeLabels,
    header: &[String],
) -> Result<()> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    for e in net.edges() {
        writeln!(
            out,
            "{} {} {}",
            labels.label(e.src),
            labels.label(e.dst),
            e.prob
        )?;
    }
    Ok(())
}

/// Law used to draw edge probabilities for generated networks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum ProbLaw {
    /// Uniform on `[0, 1)`.
    Uniform01,
    Constant {
        value: f64,
    },
    /// Integer weight uniform on `1..=max_weight`, then [`weight_to_prob`].
    FromWeights {
        max_weight: u32,
    },
}

impl ProbLaw {
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            ProbLaw::Uniform01 => rng.gen::<f64>(),
            ProbLaw::Constant { value } => value,
            ProbLaw::FromWeights { max_weight } => {
                let w = rng.gen_range(1..=max_weight);
                -(-f64::from(w) / 2.0).exp_m1()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub nodes: usize,
    /// Mean out-edges per node; the edge count is `round(density * nodes)`.
    pub density: f64,
    pub prob_law: ProbLaw,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn edge_count(&self) -> usize {
        (self.density * self.nodes as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGenerator(msg));
        if self.nodes == 0 {
            return bad("need at least one node".into());
        }
        if !self.density.is_finite() || self.density < 0.0 {
            return bad(format!("density {} must be non-negative", self.density));
        }
        let slots = self.nodes as u128 * (self.nodes as u128 - 1);
        if self.edge_count() as u128 > slots {
            return bad(format!(
                "{} edges do not fit among the {} ordered pairs of {} nodes",
                self.edge_count(),
                slots,
                self.nodes
            ));
        }
        match self.prob_law {
            ProbLaw::Constant { value } if !(0.0..=1.0).contains(&value) => {
                bad(format!("constant probability {value} is outside [0, 1]"))
            }
            ProbLaw::FromWeights { max_weight: 0 } => bad("max_weight must be positive".into()),
            _ => Ok(()),
        }
    }
}

/// G(n, m) random directed graph: `m` distinct non-loop ordered pairs chosen
/// uniformly without replacement, listed by `(src, dst)`.
pub fn generate_er(spec: &GeneratorSpec) -> Result<InfluenceNetwork> {
    spec.validate()?;
    let n = spec.nodes;
    let m = spec.edge_count();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(spec.seed);
    let mut pairs: Vec<(usize, usize)> = if m == 0 {
        Vec::new()
    } else {
        index::sample(&mut rng, n * (n - 1), m)
            .into_iter()
            .map(|k| {
                let src = k / (n - 1);
                let off = k % (n - 1);
                (src, if off >= src { off + 1 } else { off })
            })
            .collect()
    };
    pairs.sort_unstable();
    let edges = pairs
        .into_iter()
        .map(|(src, dst)| Edge {
            src: NodeId(src),
            dst: NodeId(dst),
            prob: spec.prob_law.draw(&mut rng),
        })
        .collect();
    InfluenceNetwork::new(n, edges)
}
