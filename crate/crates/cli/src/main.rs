//! `lca`: runs one experiment and writes its report, or the acceptance suite.
//!
//! Exit codes: 0 ok, 1 acceptance failure, 2 invalid input, 3 instance
//! generation failure, 4 algorithm failures over budget.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lca_core::acceptance;
use lca_core::balls_bins::DecisionRule;
use lca_core::coloring::PremiseMode;
use lca_core::harness::{
    self, CompareTarget, Experiment, ExperimentSpec, RunReport, DEFAULT_BALLS_CAP_CONSTANT,
    DEFAULT_MATCHING_CAP_CONSTANT,
};
use lca_core::relevant::{GraphModel, Offspring};
use lca_core::{LcaError, OrderingKind, Seed};

const ZERO_SEED: &str = "0000000000000000000000000000000000000000000000000000000000000000";

#[derive(Parser)]
#[command(name = "lca", version, about = "Local computation algorithm experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Relevant-set size distribution on generated graphs.
    TreeStats(TreeStatsArgs),
    /// Galton-Watson tree size distribution.
    GwSim(GwArgs),
    /// Maximal matching LCA on a bounded-degree graph.
    Matching(MatchingArgs),
    /// Hypergraph 2-coloring LCA.
    Coloring(LllArgs),
    /// k-CNF satisfying assignment LCA.
    Ksat(LllArgs),
    /// Power-of-d-choices load balancing LCA.
    BallsBins(BallsArgs),
    /// Per-item comparison of an LCA against its global algorithm.
    OracleCompare(CompareArgs),
    /// Full-path exploration frequency on a path graph.
    LowerBound(LowerBoundArgs),
    /// Runs an experiment from a spec file (the `spec` field of a report).
    Run(RunArgs),
    /// Runs the acceptance suite.
    Accept(AcceptArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// 256-bit master seed as 64 hex characters.
    #[arg(long, env = "LCA_SEED", default_value = ZERO_SEED)]
    seed: String,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// `full`, `kwise:K` or `kwise:K:PRIME`.
    #[arg(long, default_value = "full")]
    ordering: String,
    /// Largest tolerated fraction of failed queries or runs.
    #[arg(long, default_value_t = 0.01)]
    failure_budget: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-item CSV of a single-trial run (coloring, ksat, balls-bins).
    #[arg(long)]
    per_item: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Bounded,
    Binomial,
    Path,
}

#[derive(Args)]
struct TreeStatsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "bounded")]
    model: Model,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    /// Degree bound, or expected degree for `binomial`.
    #[arg(long, default_value_t = 5.0)]
    d: f64,
    #[arg(long, default_value_t = 1000)]
    queries: usize,
    #[arg(long, default_value_t = usize::MAX)]
    cap: usize,
    /// Sizes `s` at which `Pr[size >= s]` is reported.
    #[arg(long, value_delimiter = ',')]
    thresholds: Vec<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Law {
    Regular,
    Binomial,
}

#[derive(Args)]
struct GwArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "regular")]
    law: Law,
    /// Child slots per node (regular law).
    #[arg(long, default_value_t = 3)]
    d: u64,
    /// Survival is `1/l` per slot (regular law).
    #[arg(long, default_value_t = 9.0)]
    l: f64,
    /// Trials of the binomial law.
    #[arg(long, default_value_t = 10_000)]
    n: u64,
    /// Success probability of the binomial law.
    #[arg(long, default_value_t = 3.0 / 90_000.0)]
    q: f64,
    #[arg(long, default_value_t = 1_000_000)]
    cap: usize,
    #[arg(long, value_delimiter = ',')]
    thresholds: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    fit_lo: usize,
    #[arg(long, default_value_t = 30)]
    fit_hi: usize,
}

#[derive(Args)]
struct MatchingArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    d: usize,
    /// Exploration cap in edges per log2 n.
    #[arg(long, default_value_t = DEFAULT_MATCHING_CAP_CONSTANT)]
    cap_constant: f64,
    /// Edge-list graph file instead of a generated graph.
    #[arg(long)]
    input: Option<String>,
}

#[derive(Args)]
struct LllArgs {
    #[command(flatten)]
    common: Common,
    /// Vertex (variable) count.
    #[arg(long, default_value_t = 800)]
    m: usize,
    /// Edge (clause) count.
    #[arg(long, default_value_t = 40)]
    n: usize,
    #[arg(long, default_value_t = 40)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Refuse parameters outside the local lemma premise (default).
    #[arg(long, conflicts_with = "lenient")]
    strict: bool,
    /// Run anyway with thresholds floored at 1.
    #[arg(long)]
    lenient: bool,
    #[arg(long, default_value_t = 0)]
    probe_queries: usize,
    /// Hypergraph file (coloring) or DIMACS file (ksat).
    #[arg(long)]
    input: Option<String>,
}

#[derive(Args)]
struct BallsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// least-loaded, always-go-left, capacity-weighted or circle-nearest.
    #[arg(long, default_value = "least-loaded")]
    rule: String,
    /// Exploration cap in balls per log2 m.
    #[arg(long, default_value_t = DEFAULT_BALLS_CAP_CONSTANT)]
    cap_constant: f64,
    /// One capacity per line.
    #[arg(long)]
    capacities: Option<PathBuf>,
    /// Ball-choices file instead of a generated instance.
    #[arg(long)]
    input: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "matching")]
    target: Target,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    d: usize,
    #[arg(long)]
    cap_constant: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Matching,
    BallsBins,
    MaxChain,
}

#[derive(Args)]
struct LowerBoundArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, alias = "n", default_value_t = 5)]
    path_len: usize,
}

#[derive(Args)]
struct RunArgs {
    spec: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    per_item: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct AcceptArgs {
    #[arg(long, env = "LCA_SEED", default_value = ZERO_SEED)]
    seed: String,
    /// Criterion ids to run; all when absent.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
    #[arg(long)]
    jobs: Option<usize>,
}

struct Output {
    format: Format,
    out: Option<PathBuf>,
    per_item: Option<PathBuf>,
}

fn parse_ordering(s: &str) -> Result<OrderingKind, LcaError> {
    let bad = || LcaError::InvalidParameter(format!("ordering '{s}' is not full, kwise:K or kwise:K:PRIME"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["full"] => Ok(OrderingKind::FullPseudorandom),
        ["kwise", k] => Ok(OrderingKind::k_wise(k.parse().map_err(|_| bad())?)),
        ["kwise", k, p] => Ok(OrderingKind::KWiseIndependent {
            k: k.parse().map_err(|_| bad())?,
            prime: p.parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

fn read(path: &Path) -> Result<String, LcaError> {
    fs::read_to_string(path).map_err(|e| LcaError::InvalidParameter(format!("cannot read {}: {e}", path.display())))
}

fn build(common: &Common, experiment: Experiment) -> Result<(ExperimentSpec, Output), LcaError> {
    let mut spec = ExperimentSpec::new(Seed::from_hex(&common.seed)?, common.trials, experiment);
    spec.ordering = parse_ordering(&common.ordering)?;
    spec.failure_budget = common.failure_budget;
    Ok((
        spec,
        Output {
            format: common.format,
            out: common.out.clone(),
            per_item: common.per_item.clone(),
        },
    ))
}

fn mode(strict: bool, lenient: bool) -> PremiseMode {
    if lenient && !strict {
        PremiseMode::Lenient
    } else {
        PremiseMode::Strict
    }
}

fn to_spec(command: Command) -> Result<(ExperimentSpec, Output), LcaError> {
    match command {
        Command::TreeStats(a) => {
            let model = match a.model {
                Model::Bounded => {
                    if a.d.fract() != 0.0 || a.d < 0.0 {
                        return Err(LcaError::InvalidParameter(format!("bounded degree d = {} is not a whole number", a.d)));
                    }
                    GraphModel::BoundedDegree { n: a.n, d: a.d as usize }
                }
                Model::Binomial => GraphModel::Binomial { n: a.n, d: a.d },
                Model::Path => GraphModel::Path { n: a.n },
            };
            build(
                &a.common,
                Experiment::TreeStats {
                    model,
                    queries: a.queries,
                    cap: a.cap,
                    thresholds: a.thresholds,
                },
            )
        }
        Command::GwSim(a) => {
            let offspring = match a.law {
                Law::Regular => Offspring::Regular { d: a.d, l: a.l },
                Law::Binomial => Offspring::Binomial { n: a.n, q: a.q },
            };
            build(
                &a.common,
                Experiment::GwSim {
                    offspring,
                    cap: a.cap,
                    thresholds: a.thresholds,
                    fit_range: (a.fit_lo, a.fit_hi),
                },
            )
        }
        Command::Matching(a) => build(
            &a.common,
            Experiment::Matching {
                n: a.n,
                d: a.d,
                cap_constant: a.cap_constant,
                input: a.input,
            },
        ),
        Command::Coloring(a) => build(
            &a.common,
            Experiment::Coloring {
                m: a.m,
                n: a.n,
                k: a.k,
                d: a.d,
                mode: mode(a.strict, a.lenient),
                probe_queries: a.probe_queries,
                input: a.input,
            },
        ),
        Command::Ksat(a) => build(
            &a.common,
            Experiment::Ksat {
                m: a.m,
                n: a.n,
                k: a.k,
                d: a.d,
                mode: mode(a.strict, a.lenient),
                probe_queries: a.probe_queries,
                input: a.input,
            },
        ),
        Command::BallsBins(a) => {
            let capacities = match &a.capacities {
                Some(p) => Some(lca_core::graph::format::parse_capacities(&read(p)?)?),
                None => None,
            };
            build(
                &a.common,
                Experiment::BallsBins {
                    n: a.n,
                    m: a.m,
                    d: a.d,
                    rule: DecisionRule::parse(&a.rule)?,
                    cap_constant: a.cap_constant,
                    capacities,
                    input: a.input,
                },
            )
        }
        Command::OracleCompare(a) => {
            let (target, default_c) = match a.target {
                Target::Matching => (CompareTarget::Matching, DEFAULT_MATCHING_CAP_CONSTANT),
                Target::BallsBins => (CompareTarget::BallsBins, DEFAULT_BALLS_CAP_CONSTANT),
                Target::MaxChain => (CompareTarget::MaxChain, DEFAULT_MATCHING_CAP_CONSTANT),
            };
            build(
                &a.common,
                Experiment::OracleCompare {
                    target,
                    n: a.n,
                    d: a.d,
                    cap_constant: a.cap_constant.unwrap_or(default_c),
                },
            )
        }
        Command::LowerBound(a) => build(&a.common, Experiment::LowerBound { path_len: a.path_len }),
        Command::Run(a) => {
            let spec: ExperimentSpec = serde_json::from_str(&read(&a.spec)?)
                .map_err(|e| LcaError::InvalidParameter(format!("bad spec file: {e}")))?;
            Ok((
                spec,
                Output {
                    format: a.format,
                    out: a.out,
                    per_item: a.per_item,
                },
            ))
        }
        Command::Accept(_) => unreachable!("handled before dispatch"),
    }
}

/// Writes next to the target and renames, so a failed run leaves nothing.
fn write_atomic(path: &Path, contents: &str) -> Result<(), LcaError> {
    let tmp = path.with_extension("partial");
    let io = |e: std::io::Error| LcaError::InvalidParameter(format!("cannot write {}: {e}", path.display()));
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn emit(report: &RunReport, output: &Output) -> Result<(), LcaError> {
    let body = match output.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => report.records_csv(),
    };
    if let Some(path) = &output.per_item {
        let items = report.items_csv.as_deref().ok_or_else(|| {
            LcaError::InvalidParameter("--per-item needs a single-trial coloring, ksat or balls-bins run".into())
        })?;
        write_atomic(path, items)?;
    }
    match &output.out {
        Some(path) => write_atomic(path, &body),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| LcaError::InvalidParameter(format!("cannot write report: {e}")))
        }
    }
}

fn set_jobs(jobs: Option<usize>) -> Result<(), LcaError> {
    if let Some(j) = jobs {
        if j == 0 {
            return Err(LcaError::InvalidParameter("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| LcaError::InvalidParameter(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn accept(a: AcceptArgs) -> Result<ExitCode, LcaError> {
    set_jobs(a.jobs)?;
    let seed = Seed::from_hex(&a.seed)?;
    eprintln!("seed {}", seed.to_hex());
    let ids: Vec<u8> = if a.only.is_empty() {
        (1..=acceptance::CRITERIA).collect()
    } else {
        a.only
    };
    let mut failed = 0;
    for id in ids {
        let r = acceptance::run_criterion(id, &seed)?;
        println!("{r}");
        failed += usize::from(!r.passed);
    }
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn execute(cli: Cli) -> Result<ExitCode, LcaError> {
    if let Command::Accept(a) = cli.command {
        return accept(a);
    }
    let jobs = match &cli.command {
        Command::Run(a) => a.jobs,
        Command::TreeStats(a) => a.common.jobs,
        Command::GwSim(a) => a.common.jobs,
        Command::Matching(a) => a.common.jobs,
        Command::Coloring(a) | Command::Ksat(a) => a.common.jobs,
        Command::BallsBins(a) => a.common.jobs,
        Command::OracleCompare(a) => a.common.jobs,
        Command::LowerBound(a) => a.common.jobs,
        Command::Accept(_) => None,
    };
    set_jobs(jobs)?;
    let (spec, output) = to_spec(cli.command)?;
    let start = Instant::now();
    let report = harness::run(&spec)?;
    emit(&report, &output)?;
    eprintln!(
        "{} seed {} fingerprint {} in {:.3}s",
        spec.experiment.name(),
        spec.seed.to_hex(),
        report.fingerprint,
        start.elapsed().as_secs_f64()
    );
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
