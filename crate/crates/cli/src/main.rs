//! `stratinf`: generate networks, compute or estimate influenceability, and
//! run variance-comparison suites.

mod roster;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use stratinf::evaluation::choose_seed_nodes;
use stratinf::ingest::write_edge_list;
use stratinf::{
    brute_force_exact, estimate, evaluate_suite, exact_dc, generate_er, parse_edge_list,
    Allocation, EstimatorConfig, EstimatorKind, GeneratorSpec, InfluenceNetwork, NodeId,
    NodeLabels, ProbLaw, SelectionStrategy, ValueKind,
};

use roster::{default_roster, parse_roster, Defaults};

#[derive(Parser)]
#[command(
    name = "stratinf",
    version,
    about = "Influenceability of nodes in independent-cascade networks"
)]
struct Cli {
    /// Worker threads for repeated trials (default: all cores).
    #[arg(long, global = true, env = "STRATINF_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random G(n, m) network as an edge list.
    Generate(GenerateArgs),
    /// Exact influenceability by possible-world enumeration (small networks only).
    Exact(ExactArgs),
    /// One run of a sampling estimator.
    Estimate(EstimateArgs),
    /// Repeated trials of several estimators over many seed nodes.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Edge list: one `src dst value` triple per line, `#` starts a comment.
    #[arg(long, short)]
    input: PathBuf,
    /// Whether the third column is a probability or a non-negative weight.
    #[arg(long, value_enum, default_value_t = Kind::Probability)]
    value_kind: Kind,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Probability,
    Weight,
}

#[derive(Args)]
struct SeedArgs {
    /// Seed node label. Repeat for a seed set: the set is joined to a virtual
    /// node by certain edges and that node's influenceability is reported,
    /// which counts the seeds themselves.
    #[arg(long = "seed-node", short = 's', required = true)]
    seed_nodes: Vec<String>,
}

#[derive(Args)]
struct GenerateArgs {
    /// TOML file with `nodes`, `density`, `seed` and a `[prob_law]` table;
    /// flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nodes: Option<usize>,
    /// Mean out-degree; the network gets round(density * nodes) edges.
    #[arg(long)]
    density: Option<f64>,
    /// `uniform`, `constant:<p>` or `weights:<max>`.
    #[arg(long, value_parser = parse_law)]
    prob_law: Option<ProbLaw>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (default: stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct GenerateFile {
    nodes: Option<usize>,
    density: Option<f64>,
    prob_law: Option<ProbLaw>,
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Brute,
    Dc,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    seeds: SeedArgs,
    #[arg(long, value_enum, default_value_t = Method::Dc)]
    method: Method,
    /// Edges fixed per enumeration level.
    #[arg(long, default_value_t = 5)]
    r: usize,
}

#[derive(Args)]
struct SamplerArgs {
    /// Sample budget N.
    #[arg(long, short = 'n', default_value_t = 1000)]
    samples: usize,
    /// Recursion cutoff: strata with fewer samples are sampled directly.
    #[arg(long, default_value_t = 10)]
    tau: usize,
    /// Flip coins only for edges the traversal examines.
    #[arg(long)]
    lazy: bool,
    /// How a split spreads its budget over strata.
    #[arg(long, value_enum, default_value_t = AllocationArg::Pooled)]
    allocation: AllocationArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum AllocationArg {
    /// Strata too light for a sample share a merged stratum; exactly N draws.
    Pooled,
    /// Every stratum gets at least one sample; may exceed N.
    MinOne,
}

impl From<AllocationArg> for Allocation {
    fn from(a: AllocationArg) -> Self {
        match a {
            AllocationArg::Pooled => Allocation::Pooled,
            AllocationArg::MinOne => Allocation::MinOne,
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    seeds: SeedArgs,
    /// nmc, bss1, rss1, bss2 or rss2.
    #[arg(long, short)]
    estimator: String,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Stratification width (default 5 for type-I, 50 for type-II).
    #[arg(long)]
    r: Option<usize>,
    /// Edge selection: random (rm) or bfs.
    #[arg(long, default_value = "bfs")]
    strategy: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Comma-separated `kind[-strategy][@r]` items, e.g. `nmc,rss1-bfs@3`.
    /// Default: the ten-estimator comparison.
    #[arg(long)]
    estimators: Option<String>,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Default width for type-I estimators.
    #[arg(long, default_value_t = 5)]
    r1: usize,
    /// Default width for type-II estimators.
    #[arg(long, default_value_t = 50)]
    r2: usize,
    /// Repeated runs per estimator and seed node.
    #[arg(long, default_value_t = 500)]
    trials: usize,
    /// Number of seed nodes drawn among nodes with out-edges.
    #[arg(long, default_value_t = 1000)]
    seed_nodes: usize,
    /// Explicit seed node labels instead of a random draw.
    #[arg(long = "seed-node", conflicts_with = "seed_nodes")]
    seed_node: Vec<String>,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Record mean wall-clock time per run. Reports are then no longer
    /// reproducible byte for byte.
    #[arg(long)]
    timing: bool,
}

/// Bad flags or input detected by the front end itself.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_law(s: &str) -> std::result::Result<ProbLaw, String> {
    let (name, arg) = s.split_once(':').unwrap_or((s, ""));
    match name {
        "uniform" | "uniform01" if arg.is_empty() => Ok(ProbLaw::Uniform01),
        "constant" => arg
            .parse()
            .map(|value| ProbLaw::Constant { value })
            .map_err(|_| format!("bad probability {arg:?}")),
        "weights" => arg
            .parse()
            .map(|max_weight| ProbLaw::FromWeights { max_weight })
            .map_err(|_| format!("bad maximum weight {arg:?}")),
        _ => Err(format!(
            "unknown law {s:?}; use uniform, constant:<p> or weights:<max>"
        )),
    }
}

fn law_text(law: &ProbLaw) -> String {
    match law {
        ProbLaw::Uniform01 => "uniform".into(),
        ProbLaw::Constant { value } => format!("constant:{value}"),
        ProbLaw::FromWeights { max_weight } => format!("weights:{max_weight}"),
    }
}

fn load(graph: &GraphArgs) -> Result<(InfluenceNetwork, NodeLabels)> {
    let file = File::open(&graph.input)
        .with_context(|| format!("cannot open {}", graph.input.display()))?;
    let kind = match graph.value_kind {
        Kind::Probability => ValueKind::Probability,
        Kind::Weight => ValueKind::Weight,
    };
    parse_edge_list(BufReader::new(file), kind)
        .with_context(|| format!("reading {}", graph.input.display()))
}

fn resolve(labels: &NodeLabels, names: &[String]) -> Result<Vec<NodeId>> {
    names
        .iter()
        .map(|n| {
            labels
                .id(n)
                .ok_or_else(|| usage(format!("no node labelled {n:?} in the input")))
        })
        .collect()
}

/// The network to query and the node standing for the seed set.
fn seed_target(net: InfluenceNetwork, seeds: &[NodeId]) -> Result<(InfluenceNetwork, NodeId)> {
    match seeds {
        [s] => Ok((net, *s)),
        _ => Ok(net.add_virtual_seed(seeds)?),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// `value` with ten significant digits.
fn significant(value: f64) -> String {
    let decimals = if value == 0.0 || !value.is_finite() {
        9
    } else {
        (9 - value.abs().log10().floor() as i64).max(0) as usize
    };
    format!("{value:.decimals$}")
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let file: GenerateFile = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => GenerateFile::default(),
    };
    let spec = GeneratorSpec {
        nodes: args
            .nodes
            .or(file.nodes)
            .ok_or_else(|| usage("--nodes is required"))?,
        density: args
            .density
            .or(file.density)
            .ok_or_else(|| usage("--density is required"))?,
        prob_law: args
            .prob_law
            .or(file.prob_law)
            .unwrap_or(ProbLaw::Uniform01),
        seed: args.seed.or(file.seed).unwrap_or(0),
    };
    let net = generate_er(&spec)?;
    let header = vec![format!(
        "G(n, m) network: nodes={} density={} edges={} prob_law={} seed={}",
        spec.nodes,
        spec.density,
        net.edge_count(),
        law_text(&spec.prob_law),
        spec.seed
    )];
    let labels = NodeLabels::numeric(spec.nodes);
    match &args.output {
        Some(path) => {
            let mut out = create(path)?;
            write_edge_list(&mut out, &net, &labels, &header)?;
            out.flush()?;
        }
        None => write_edge_list(io::stdout().lock(), &net, &labels, &header)?,
    }
    Ok(())
}

fn cmd_exact(args: ExactArgs) -> Result<()> {
    let (net, labels) = load(&args.graph)?;
    let seeds = resolve(&labels, &args.seeds.seed_nodes)?;
    let (net, s) = seed_target(net, &seeds)?;
    let value = match args.method {
        Method::Brute => brute_force_exact(&net, s)?,
        Method::Dc => {
            if args.r == 0 {
                return Err(usage("--r must be at least 1"));
            }
            exact_dc(&net, s, args.r)?
        }
    };
    println!("{}", significant(value));
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<()> {
    let kind: EstimatorKind = args.estimator.parse()?;
    if kind.is_exact() {
        return Err(usage("use the `exact` subcommand for exact methods"));
    }
    let strategy: SelectionStrategy = args.strategy.parse()?;
    let mut cfg = EstimatorConfig::new(kind)
        .with_samples(args.sampler.samples)
        .with_tau(args.sampler.tau)
        .with_strategy(strategy)
        .with_seed(args.seed)
        .with_lazy(args.sampler.lazy)
        .with_allocation(args.sampler.allocation.into());
    if let Some(r) = args.r {
        cfg = cfg.with_r(r);
    }
    cfg.validate()?;
    let (net, labels) = load(&args.graph)?;
    let seeds = resolve(&labels, &args.seeds.seed_nodes)?;
    let (net, s) = seed_target(net, &seeds)?;
    let est = estimate(&net, s, &cfg)?;
    println!("estimator\t{}", cfg.label());
    println!("value\t{}", est.value);
    println!("samples_used\t{}", est.samples_used);
    println!("elapsed_s\t{:.6}", est.elapsed.as_secs_f64());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let defaults = Defaults {
        samples: args.sampler.samples,
        r1: args.r1,
        r2: args.r2,
        tau: args.sampler.tau,
        lazy: args.sampler.lazy,
        allocation: args.sampler.allocation.into(),
    };
    let configs = match &args.estimators {
        Some(list) => parse_roster(list, &defaults).map_err(|e| usage(format!("{e:#}")))?,
        None => default_roster(&defaults),
    };
    if configs.is_empty() {
        return Err(usage("--estimators names no estimator"));
    }
    for cfg in &configs {
        cfg.validate().with_context(|| cfg.label())?;
    }
    if args.trials < 2 {
        return Err(stratinf::Error::TooFewTrials(args.trials).into());
    }
    let (net, labels) = load(&args.graph)?;
    let seeds = if args.seed_node.is_empty() {
        choose_seed_nodes(&net, args.seed_nodes, args.master_seed)
    } else {
        resolve(&labels, &args.seed_node)?
    };
    if seeds.is_empty() {
        return Err(stratinf::Error::EmptySeedSet.into());
    }
    let mut report = evaluate_suite(&net, &seeds, &configs, args.trials, args.master_seed)?;
    if report.baseline_added {
        eprintln!(
            "note: added an NMC baseline with N={} for relative variances",
            report.rows[0].samples
        );
    }
    if !args.timing {
        report.strip_timing();
    }
    if let Some(path) = &args.out_csv {
        let mut out = create(path)?;
        report.write_csv(&mut out)?;
        out.flush()?;
    }
    if let Some(path) = &args.out_json {
        let mut out = create(path)?;
        report.write_json(&mut out)?;
        out.flush()?;
    }
    if args.out_csv.is_none() && args.out_json.is_none() {
        report.write_csv(io::stdout().lock())?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<stratinf::Error>() {
            return if e.is_validation() { 2 } else { 1 };
        }
    }
    1
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot start worker threads")?;
    }
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
