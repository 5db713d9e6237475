//! Reproducible experiments: an [`ExperimentSpec`] in, a [`RunReport`] out.
//!
//! A report is a pure function of its spec. Trials run in parallel on
//! per-trial derived seeds and are collected in trial order, so serial and
//! parallel runs serialize to the same bytes. Wall-clock time is kept out of
//! the serialized report for the same reason.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::balls_bins::{default_cap, max_load_report, scheme_for, BallsBinsLca, DecisionRule, LoadProfile};
use crate::coloring::{verify_coloring, LllInstance, LllLca, LllParams, PremiseMode};
use crate::error::{LcaError, Result};
use crate::graph::{format, gen_bipartite_choices, gen_bounded_degree, gen_cnf, gen_hypergraph, BipartiteChoices, LocalGraph};
use crate::matching::{verify_maximal, EdgeId, MatchingLca};
use crate::online::{eval_global, eval_local, MaxChain};
use crate::rank::{OrderingKind, RankOracle, Seed};
use crate::relevant::{explore_with, sample_gw_tree, tree_stats, GraphModel, Offspring, TreeExperiment, TreeStats};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Matching exploration cap, in edges, per `log2 n`.
pub const DEFAULT_MATCHING_CAP_CONSTANT: f64 = 60.0;

/// Balls-into-bins exploration cap, in balls, per `log2 m`.
pub const DEFAULT_BALLS_CAP_CONSTANT: f64 = 5.0;

fn default_budget() -> f64 {
    0.01
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompareTarget {
    Matching,
    BallsBins,
    MaxChain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    /// Relevant-set sizes on generated graphs; each trial is one instance.
    TreeStats {
        model: GraphModel,
        queries: usize,
        cap: usize,
        thresholds: Vec<usize>,
    },
    /// Galton-Watson tree sizes; each trial is one tree.
    GwSim {
        offspring: Offspring,
        cap: usize,
        thresholds: Vec<usize>,
        /// Inclusive size range for the log-tail slope fit.
        fit_range: (usize, usize),
    },
    Matching {
        n: usize,
        d: usize,
        cap_constant: f64,
        #[serde(default)]
        input: Option<String>,
    },
    Coloring {
        m: usize,
        n: usize,
        k: usize,
        d: usize,
        mode: PremiseMode,
        /// Independent single-vertex queries per trial, for probe counts.
        probe_queries: usize,
        #[serde(default)]
        input: Option<String>,
    },
    Ksat {
        m: usize,
        n: usize,
        k: usize,
        d: usize,
        mode: PremiseMode,
        probe_queries: usize,
        #[serde(default)]
        input: Option<String>,
    },
    BallsBins {
        n: usize,
        m: usize,
        d: usize,
        rule: DecisionRule,
        cap_constant: f64,
        #[serde(default)]
        capacities: Option<Vec<u64>>,
        #[serde(default)]
        input: Option<String>,
    },
    /// Per-item comparison of an LCA against its global oracle.
    OracleCompare {
        target: CompareTarget,
        n: usize,
        d: usize,
        cap_constant: f64,
    },
    /// Frequency with which exploration from a path endpoint covers the path.
    LowerBound { path_len: usize },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::TreeStats { .. } => "tree-stats",
            Experiment::GwSim { .. } => "gw-sim",
            Experiment::Matching { .. } => "matching",
            Experiment::Coloring { .. } => "coloring",
            Experiment::Ksat { .. } => "ksat",
            Experiment::BallsBins { .. } => "balls-bins",
            Experiment::OracleCompare { .. } => "oracle-compare",
            Experiment::LowerBound { .. } => "lower-bound",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub seed: Seed,
    #[serde(default)]
    pub ordering: OrderingKind,
    pub trials: usize,
    /// Largest tolerated fraction of failed LCA queries or runs.
    #[serde(default = "default_budget")]
    pub failure_budget: f64,
    pub experiment: Experiment,
}

fn positive(name: &str, x: usize) -> Result<()> {
    if x == 0 {
        Err(LcaError::invalid(format!("{name} must be positive")))
    } else {
        Ok(())
    }
}

fn positive_f(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(LcaError::invalid(format!("{name} must be a positive number, got {x}")))
    }
}

impl ExperimentSpec {
    pub fn new(seed: Seed, trials: usize, experiment: Experiment) -> Self {
        ExperimentSpec {
            seed,
            ordering: OrderingKind::default(),
            trials,
            failure_budget: default_budget(),
            experiment,
        }
    }

    /// Checks every parameter before any work starts.
    pub fn validate(&self) -> Result<()> {
        positive("trials", self.trials)?;
        if !(0.0..=1.0).contains(&self.failure_budget) {
            return Err(LcaError::invalid("failure budget must lie in [0, 1]"));
        }
        match &self.experiment {
            Experiment::TreeStats { model, queries, cap, .. } => {
                positive("queries", *queries)?;
                positive("cap", *cap)?;
                positive("n", model.n())?;
                if let GraphModel::BoundedDegree { d, .. } = model {
                    positive("d", *d)?;
                }
                self.ordering.validate(model.n() as u64)
            }
            Experiment::GwSim { offspring, cap, fit_range, .. } => {
                positive("cap", *cap)?;
                if fit_range.0 > fit_range.1 {
                    return Err(LcaError::invalid("fit range is empty"));
                }
                let (p, label) = match *offspring {
                    Offspring::Regular { d, l } => {
                        positive("d", d as usize)?;
                        (1.0 / l, "1/L")
                    }
                    Offspring::Binomial { q, .. } => (q, "q"),
                };
                if !(0.0..=1.0).contains(&p) {
                    return Err(LcaError::invalid(format!("{label} = {p} is not a probability")));
                }
                Ok(())
            }
            Experiment::Matching { n, d, cap_constant, input } => {
                if input.is_none() {
                    positive("n", *n)?;
                    positive("d", *d)?;
                    self.ordering.validate((*n as u64).saturating_mul(*n as u64))?;
                }
                positive_f("cap constant", *cap_constant)
            }
            Experiment::Coloring { m, n, k, d, mode, input, .. } | Experiment::Ksat { m, n, k, d, mode, input, .. } => {
                if input.is_none() {
                    positive("m", *m)?;
                    positive("n", *n)?;
                    crate::coloring::compute_thresholds(*k, *d, *mode)?;
                    self.ordering.validate(*m as u64)?;
                }
                Ok(())
            }
            Experiment::BallsBins { n, m, d, cap_constant, capacities, input, .. } => {
                if input.is_none() {
                    positive("m", *m)?;
                    positive("d", *d)?;
                    if let Some(c) = capacities {
                        if c.len() != *m || c.iter().sum::<u64>() != *n as u64 {
                            return Err(LcaError::invalid("capacities must list m bins summing to n"));
                        }
                    }
                    self.ordering.validate(*n as u64)?;
                }
                positive_f("cap constant", *cap_constant)
            }
            Experiment::OracleCompare { n, d, cap_constant, .. } => {
                positive("n", *n)?;
                positive("d", *d)?;
                self.ordering.validate((*n as u64).saturating_mul(*n as u64))?;
                positive_f("cap constant", *cap_constant)
            }
            Experiment::LowerBound { path_len } => {
                if *path_len < 2 {
                    return Err(LcaError::invalid("path length must be at least 2"));
                }
                self.ordering.validate(*path_len as u64)
            }
        }
    }

    /// Hex digest of the crate version and the canonical spec.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"lca-report\0");
        h.update(VERSION.as_bytes());
        h.update(b"\0");
        h.update(serde_json::to_vec(self).expect("spec serializes"));
        hex::encode(&h.finalize()[..16])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub fingerprint: String,
    pub spec: ExperimentSpec,
    pub summary: Value,
    /// One flat object per trial (or histogram row), ready for CSV.
    pub records: Vec<Value>,
    /// Per-item CSV of the first trial, when the experiment has one.
    #[serde(skip)]
    pub items_csv: Option<String>,
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl RunReport {
    /// Records as CSV; columns are the keys of the first record. A report
    /// without records yields its summary as a single row.
    pub fn records_csv(&self) -> String {
        let rows = if self.records.is_empty() {
            std::slice::from_ref(&self.summary)
        } else {
            &self.records[..]
        };
        let Some(Value::Object(first)) = rows.first() else {
            return String::new();
        };
        let keys: Vec<&String> = first.keys().collect();
        let mut out = keys.iter().map(|k| csv_field(k)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for r in rows {
            let row: Vec<String> = keys
                .iter()
                .map(|k| match r.get(k.as_str()) {
                    None | Some(Value::Null) => String::new(),
                    Some(Value::String(s)) => csv_field(s),
                    Some(v) => csv_field(&v.to_string()),
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn read_input(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| LcaError::invalid(format!("cannot read {path}: {e}")))
}

fn log2_ceil_cap(n: usize, constant: f64) -> usize {
    ((constant * (n.max(2) as f64).log2()).ceil() as usize).max(1)
}

/// Least-squares slope of `log2 Pr[size >= s]` against `s` over the
/// inclusive range, using points with nonzero probability.
pub fn log2_tail_slope(stats: &TreeStats, lo: usize, hi: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = (lo..=hi)
        .filter_map(|s| {
            let p = stats.exceedance(s);
            (p > 0.0).then(|| (s as f64, p.log2()))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundResult {
    pub path_len: usize,
    pub trials: u64,
    pub full_paths: u64,
    pub frequency: f64,
    pub expected: f64,
    pub std_error: f64,
    pub z_score: f64,
}

/// Explores from one end of a path of `path_len` vertices under `trials`
/// independent rankings and counts explorations that reach the far end.
/// That happens iff ranks decrease along the path, with probability
/// `1 / path_len!`.
pub fn lower_bound_experiment(path_len: usize, trials: u64, seed: &Seed, kind: OrderingKind) -> Result<LowerBoundResult> {
    if path_len < 2 {
        return Err(LcaError::invalid("path length must be at least 2"));
    }
    if trials == 0 {
        return Err(LcaError::invalid("trials must be positive"));
    }
    kind.validate(path_len as u64)?;
    let g = LocalGraph::path(path_len);
    let full_paths: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let ranks = RankOracle::new(&seed.derive_indexed(b"lower-bound", t), kind, path_len as u64)
                .expect("validated ordering");
            let set = explore_with(&g, 0, |v| ranks.rank_unchecked(v as u64), path_len, |_| true);
            u64::from(set.len() == path_len)
        })
        .sum();
    let expected = 1.0 / (1..=path_len).map(|i| i as f64).product::<f64>();
    let frequency = full_paths as f64 / trials as f64;
    let std_error = (expected * (1.0 - expected) / trials as f64).sqrt();
    Ok(LowerBoundResult {
        path_len,
        trials,
        full_paths,
        frequency,
        expected,
        std_error,
        z_score: (frequency - expected) / std_error,
    })
}

struct Outcome {
    summary: Value,
    records: Vec<Value>,
    items_csv: Option<String>,
    /// (failed queries or runs, total), checked against the budget.
    failures: Option<(u64, u64)>,
}

/// Runs an experiment. On success the report is complete; on error nothing
/// should be written. See [`LcaError::exit_code`].
pub fn run(spec: &ExperimentSpec) -> Result<RunReport> {
    spec.validate()?;
    let start = Instant::now();
    let outcome = match &spec.experiment {
        Experiment::TreeStats { model, queries, cap, thresholds } => run_tree_stats(spec, *model, *queries, *cap, thresholds)?,
        Experiment::GwSim { offspring, cap, thresholds, fit_range } => run_gw(spec, *offspring, *cap, thresholds, *fit_range)?,
        Experiment::Matching { n, d, cap_constant, input } => run_matching(spec, *n, *d, *cap_constant, input.as_deref())?,
        Experiment::Coloring { m, n, k, d, mode, probe_queries, input } => {
            let make = |seed: &Seed| -> Result<crate::graph::Hypergraph> {
                match input {
                    Some(path) => format::parse_hypergraph(&read_input(path)?),
                    None => gen_hypergraph(seed, *m, *n, *k, *d),
                }
            };
            run_lll(spec, *mode, *probe_queries, input.is_some(), make, |h, values| {
                let colors: Vec<_> = values.iter().map(|&b| crate::coloring::Color::from_bit(b)).collect();
                verify_coloring(h, &colors)
            })?
        }
        Experiment::Ksat { m, n, k, d, mode, probe_queries, input } => {
            let make = |seed: &Seed| -> Result<crate::graph::CnfFormula> {
                match input {
                    Some(path) => format::parse_dimacs(&read_input(path)?),
                    None => gen_cnf(seed, *m, *n, *k, *d),
                }
            };
            run_lll(spec, *mode, *probe_queries, input.is_some(), make, |f, values| f.evaluate(values))?
        }
        Experiment::BallsBins { n, m, d, rule, cap_constant, capacities, input } => {
            run_balls(spec, *n, *m, *d, *rule, *cap_constant, capacities.clone(), input.as_deref())?
        }
        Experiment::OracleCompare { target, n, d, cap_constant } => run_compare(spec, *target, *n, *d, *cap_constant)?,
        Experiment::LowerBound { path_len } => {
            let r = lower_bound_experiment(*path_len, spec.trials as u64, &spec.seed, spec.ordering)?;
            Outcome {
                summary: serde_json::to_value(r).expect("serializable"),
                records: Vec::new(),
                items_csv: None,
                failures: None,
            }
        }
    };
    if let Some((failures, runs)) = outcome.failures {
        if runs > 0 && failures as f64 > spec.failure_budget * runs as f64 {
            return Err(LcaError::BudgetExceeded {
                failures,
                runs,
                budget: spec.failure_budget,
            });
        }
    }
    Ok(RunReport {
        version: VERSION.to_string(),
        fingerprint: spec.fingerprint(),
        spec: spec.clone(),
        summary: outcome.summary,
        records: outcome.records,
        items_csv: outcome.items_csv,
        wall_clock: start.elapsed(),
    })
}

fn run_tree_stats(spec: &ExperimentSpec, model: GraphModel, queries: usize, cap: usize, thresholds: &[usize]) -> Result<Outcome> {
    let stats = tree_stats(
        &spec.seed,
        &TreeExperiment {
            model,
            instances: spec.trials,
            queries_per_instance: queries,
            cap,
            kind: spec.ordering,
            thresholds: thresholds.to_vec(),
        },
    )?;
    let log_n = (model.n().max(2) as f64).log2();
    let records = stats
        .histogram
        .iter()
        .map(|(s, c)| json!({"size": s, "count": c}))
        .collect();
    let mut summary = serde_json::to_value(&stats).expect("serializable");
    summary["max_over_log2_n"] = json!(stats.max as f64 / log_n);
    Ok(Outcome {
        summary,
        records,
        items_csv: None,
        failures: None,
    })
}

fn run_gw(spec: &ExperimentSpec, offspring: Offspring, cap: usize, thresholds: &[usize], fit: (usize, usize)) -> Result<Outcome> {
    let samples: Vec<_> = (0..spec.trials as u64)
        .into_par_iter()
        .map(|i| sample_gw_tree(&spec.seed.derive_indexed(b"gw-sim", i), offspring, cap))
        .collect::<Result<_>>()?;
    let mut stats = TreeStats::from_sizes(samples.iter().map(|s| s.size), thresholds);
    stats.truncated = samples.iter().filter(|s| !s.extinct).count() as u64;
    let mu = offspring.mean();
    let mut summary = serde_json::to_value(&stats).expect("serializable");
    summary["mean_offspring"] = json!(mu);
    summary["expected_mean"] = if mu < 1.0 { json!(1.0 / (1.0 - mu)) } else { Value::Null };
    summary["max_depth"] = json!(samples.iter().map(|s| s.depth).max().unwrap_or(0));
    summary["tail_slope_log2"] = json!(log2_tail_slope(&stats, fit.0, fit.1));
    let records = stats
        .histogram
        .iter()
        .map(|(s, c)| json!({"size": s, "count": c}))
        .collect();
    Ok(Outcome {
        summary,
        records,
        items_csv: None,
        failures: None,
    })
}

#[derive(Clone, Debug, Default, Serialize)]
struct MatchingRecord {
    trial: usize,
    edges: usize,
    matched: usize,
    failed: bool,
    mismatches: u64,
    maximal: bool,
    probes_mean: f64,
    probes_max: u64,
    evaluated_mean: f64,
    evaluated_max: usize,
}

fn matching_trial(spec: &ExperimentSpec, trial: usize, g: &LocalGraph, cap: usize) -> Result<MatchingRecord> {
    let ranks = spec.seed.derive_indexed(b"matching/ranks", trial as u64);
    let lca = MatchingLca::new(g, &ranks, spec.ordering, cap)?;
    let global = lca.global_matching();
    let mut rec = MatchingRecord {
        trial,
        edges: g.edge_count(),
        ..Default::default()
    };
    let mut chosen = std::collections::BTreeSet::new();
    let (mut probes, mut evaluated) = (0u64, 0usize);
    for (u, v) in g.edges() {
        let e = EdgeId { u, v };
        match lca.is_matched(e) {
            Ok(verdict) => {
                probes += verdict.probes;
                evaluated += verdict.edges_evaluated;
                rec.probes_max = rec.probes_max.max(verdict.probes);
                rec.evaluated_max = rec.evaluated_max.max(verdict.edges_evaluated);
                rec.mismatches += u64::from(verdict.matched != global.contains(&e));
                if verdict.matched {
                    chosen.insert(e);
                }
            }
            Err(err) if err.is_algorithm_failure() => {
                rec.failed = true;
                break;
            }
            Err(err) => return Err(err),
        }
    }
    rec.matched = chosen.len();
    rec.maximal = !rec.failed && verify_maximal(g, &chosen);
    let answered = rec.edges.max(1) as f64;
    rec.probes_mean = probes as f64 / answered;
    rec.evaluated_mean = evaluated as f64 / answered;
    Ok(rec)
}

fn run_matching(spec: &ExperimentSpec, n: usize, d: usize, cap_constant: f64, input: Option<&str>) -> Result<Outcome> {
    let fixed = input.map(|p| format::parse_graph(&read_input(p)?)).transpose()?;
    let records: Vec<MatchingRecord> = (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            let g = match &fixed {
                Some(g) => g.clone(),
                None => gen_bounded_degree(&spec.seed.derive_indexed(b"matching/instance", t as u64), n, d)?,
            };
            matching_trial(spec, t, &g, log2_ceil_cap(g.n(), cap_constant))
        })
        .collect::<Result<_>>()?;
    let failures = records.iter().filter(|r| r.failed).count() as u64;
    let ok: Vec<&MatchingRecord> = records.iter().filter(|r| !r.failed).collect();
    let summary = json!({
        "trials": records.len(),
        "failures": failures,
        "failure_rate": failures as f64 / records.len() as f64,
        "mismatches": ok.iter().map(|r| r.mismatches).sum::<u64>(),
        "all_maximal": ok.iter().all(|r| r.maximal),
        "probes_mean": mean(ok.iter().map(|r| r.probes_mean)),
        "probes_max": ok.iter().map(|r| r.probes_max).max().unwrap_or(0),
        "evaluated_mean": mean(ok.iter().map(|r| r.evaluated_mean)),
        "evaluated_max": ok.iter().map(|r| r.evaluated_max).max().unwrap_or(0),
        "cap": fixed.as_ref().map_or(log2_ceil_cap(n, cap_constant), |g| log2_ceil_cap(g.n(), cap_constant)),
    });
    Ok(Outcome {
        summary,
        records: to_values(&records),
        items_csv: None,
        failures: Some((failures, records.len() as u64)),
    })
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut count) = (0.0, 0usize);
    for x in xs {
        sum += x;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

fn to_values<T: Serialize>(records: &[T]) -> Vec<Value> {
    records
        .iter()
        .map(|r| serde_json::to_value(r).expect("serializable"))
        .collect()
}

#[derive(Clone, Debug, Default, Serialize)]
struct LllRecord {
    trial: usize,
    failed: bool,
    failure_phase: Option<u8>,
    valid: bool,
    phase1: usize,
    phase2: usize,
    phase3: usize,
    phase4: usize,
    probes_mean: f64,
    probes_max: u64,
    probe_failures: u64,
}

struct LllTrial {
    record: LllRecord,
    values: Option<Vec<bool>>,
    phases: Vec<u8>,
}

fn run_lll<I, M, V>(
    spec: &ExperimentSpec,
    mode: PremiseMode,
    probe_queries: usize,
    fixed_input: bool,
    make: M,
    check: V,
) -> Result<Outcome>
where
    I: LllInstance + Send,
    M: Fn(&Seed) -> Result<I> + Sync,
    V: Fn(&I, &[bool]) -> bool + Sync,
{
    let name = spec.experiment.name();
    let params = LllParams {
        mode,
        ordering: None,
        cap: None,
        d: None,
    };
    let fixed = if fixed_input { Some(make(&spec.seed)?) } else { None };
    let trials: Vec<LllTrial> = (0..spec.trials)
        .into_par_iter()
        .map(|t| -> Result<LllTrial> {
            let generated;
            let inst = match &fixed {
                Some(i) => i,
                None => {
                    generated = make(&spec.seed.derive_indexed(format!("{name}/instance").as_bytes(), t as u64))?;
                    &generated
                }
            };
            let seed = spec.seed.derive_indexed(format!("{name}/run").as_bytes(), t as u64);
            let lca = LllLca::new(inst, &seed, &params)?;
            let mut record = LllRecord {
                trial: t,
                ..Default::default()
            };
            let (mut values, mut phases) = (None, Vec::new());
            match lca.solve_all() {
                Ok(sol) => {
                    record.valid = check(inst, &sol.values);
                    [record.phase1, record.phase2, record.phase3, record.phase4] = sol.phase_histogram();
                    phases = sol.phases.clone();
                    values = Some(sol.values);
                }
                Err(e) if e.is_algorithm_failure() => {
                    record.failed = true;
                    if let LcaError::PhaseFailure { phase, .. } = e {
                        record.failure_phase = Some(phase);
                    }
                }
                Err(e) => return Err(e),
            }
            let m = inst.var_count() as u64;
            let mut probes = Vec::new();
            for q in 0..probe_queries as u64 {
                if m == 0 {
                    break;
                }
                let x = seed.random_in_range(&q.to_le_bytes(), m)? as usize;
                match lca.query(x) {
                    Ok(a) => probes.push(a.probes),
                    Err(e) if e.is_algorithm_failure() => record.probe_failures += 1,
                    Err(e) => return Err(e),
                }
            }
            record.probes_max = probes.iter().copied().max().unwrap_or(0);
            record.probes_mean = mean(probes.iter().map(|&p| p as f64));
            Ok(LllTrial { record, values, phases })
        })
        .collect::<Result<_>>()?;
    let records: Vec<LllRecord> = trials.iter().map(|t| t.record.clone()).collect();
    let failures = records.iter().filter(|r| r.failed).count() as u64;
    let ok: Vec<&LllRecord> = records.iter().filter(|r| !r.failed).collect();
    let mut histogram = [0usize; 4];
    for r in &ok {
        for (h, x) in histogram.iter_mut().zip([r.phase1, r.phase2, r.phase3, r.phase4]) {
            *h += x;
        }
    }
    let mut summary = json!({
        "trials": records.len(),
        "failures": failures,
        "failure_rate": failures as f64 / records.len() as f64,
        "invalid": ok.iter().filter(|r| !r.valid).count(),
        "phase_histogram": histogram,
        "probes_mean": mean(ok.iter().map(|r| r.probes_mean)),
        "probes_max": records.iter().map(|r| r.probes_max).max().unwrap_or(0),
    });
    let mut items_csv = None;
    if let [only] = trials.as_slice() {
        if let Some(values) = &only.values {
            let key = if name == "coloring" { "colors" } else { "values" };
            summary[key] = if name == "coloring" {
                json!(values.iter().map(|&b| crate::coloring::Color::from_bit(b)).collect::<Vec<_>>())
            } else {
                json!(values)
            };
            let mut csv = format!("vertex,{},phase\n", if name == "coloring" { "color" } else { "value" });
            for (v, (&b, &p)) in values.iter().zip(&only.phases).enumerate() {
                let shown = if name == "coloring" {
                    if b { "blue" } else { "red" }.to_string()
                } else {
                    b.to_string()
                };
                csv.push_str(&format!("{v},{shown},{p}\n"));
            }
            items_csv = Some(csv);
        }
    }
    Ok(Outcome {
        summary,
        records: to_values(&records),
        items_csv,
        failures: Some((failures, records.len() as u64)),
    })
}

#[derive(Clone, Debug, Default, Serialize)]
struct BallsRecord {
    trial: usize,
    balls: usize,
    failures: u64,
    mismatches: u64,
    max_load: u64,
    global_max_load: u64,
    probes_mean: f64,
    probes_max: u64,
}

#[allow(clippy::too_many_arguments)]
fn run_balls(
    spec: &ExperimentSpec,
    n: usize,
    m: usize,
    d: usize,
    rule: DecisionRule,
    cap_constant: f64,
    capacities: Option<Vec<u64>>,
    input: Option<&str>,
) -> Result<Outcome> {
    let fixed = match input {
        Some(path) => {
            let mut bc = format::parse_bipartite(&read_input(path)?)?;
            match rule {
                DecisionRule::AlwaysGoLeft => bc = bc.with_groups()?,
                DecisionRule::CapacityWeighted => {
                    let caps = capacities
                        .clone()
                        .unwrap_or_else(|| crate::balls_bins::uniform_capacities(bc.n_balls(), bc.m_bins()));
                    bc = bc.with_capacities(caps)?;
                }
                _ => {}
            }
            Some(bc)
        }
        None => None,
    };
    let results: Vec<(BallsRecord, LoadProfile, LoadProfile, Option<String>)> = (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            let bc: BipartiteChoices = match &fixed {
                Some(bc) => bc.clone(),
                None => gen_bipartite_choices(
                    &spec.seed.derive_indexed(b"balls-bins/instance", t as u64),
                    n,
                    m,
                    d,
                    &scheme_for(rule, capacities.clone(), n, m),
                )?,
            };
            let seed = spec.seed.derive_indexed(b"balls-bins/run", t as u64);
            let lca = BallsBinsLca::new(&bc, rule, &seed, spec.ordering, default_cap(bc.m_bins(), cap_constant))?;
            let (assignments, profile) = lca.assign_all()?;
            let (global, global_profile) = lca.run_global();
            let rec = BallsRecord {
                trial: t,
                balls: assignments.len(),
                failures: assignments.iter().filter(|a| a.failed).count() as u64,
                mismatches: assignments
                    .iter()
                    .zip(&global)
                    .filter(|(a, g)| !a.failed && a.bin != g.bin)
                    .count() as u64,
                max_load: profile.max_load,
                global_max_load: global_profile.max_load,
                probes_mean: mean(assignments.iter().map(|a| a.probes as f64)),
                probes_max: assignments.iter().map(|a| a.probes).max().unwrap_or(0),
            };
            let csv = (spec.trials == 1).then(|| {
                let mut csv = String::from("ball,bin,failed,probes\n");
                for a in &assignments {
                    csv.push_str(&format!("{},{},{},{}\n", a.ball, a.bin, a.failed, a.probes));
                }
                csv
            });
            Ok((rec, profile, global_profile, csv))
        })
        .collect::<Result<_>>()?;
    let records: Vec<BallsRecord> = results.iter().map(|r| r.0.clone()).collect();
    let profiles: Vec<LoadProfile> = results.iter().map(|r| r.1.clone()).collect();
    let global_profiles: Vec<LoadProfile> = results.iter().map(|r| r.2.clone()).collect();
    let balls: u64 = records.iter().map(|r| r.balls as u64).sum();
    let failures: u64 = records.iter().map(|r| r.failures).sum();
    let summary = json!({
        "rule": rule.name(),
        "trials": records.len(),
        "balls": balls,
        "cap": default_cap(fixed.as_ref().map_or(m, |bc| bc.m_bins()), cap_constant),
        "failures": failures,
        "failure_rate": if balls == 0 { 0.0 } else { failures as f64 / balls as f64 },
        "mismatches": records.iter().map(|r| r.mismatches).sum::<u64>(),
        "max_load": max_load_report(&profiles),
        "global_max_load": max_load_report(&global_profiles),
        "probes_mean": mean(records.iter().map(|r| r.probes_mean)),
        "probes_max": records.iter().map(|r| r.probes_max).max().unwrap_or(0),
    });
    Ok(Outcome {
        summary,
        records: to_values(&records),
        items_csv: results.into_iter().next().and_then(|r| r.3),
        failures: Some((failures, balls)),
    })
}

#[derive(Clone, Debug, Default, Serialize)]
struct CompareRecord {
    trial: usize,
    items: u64,
    failures: u64,
    mismatches: u64,
}

fn run_compare(spec: &ExperimentSpec, target: CompareTarget, n: usize, d: usize, cap_constant: f64) -> Result<Outcome> {
    let records: Vec<CompareRecord> = (0..spec.trials)
        .into_par_iter()
        .map(|t| -> Result<CompareRecord> {
            let inst = spec.seed.derive_indexed(b"oracle-compare/instance", t as u64);
            let seed = spec.seed.derive_indexed(b"oracle-compare/run", t as u64);
            let mut rec = CompareRecord {
                trial: t,
                ..Default::default()
            };
            let mut tally = |r: Result<bool>| -> Result<()> {
                rec.items += 1;
                match r {
                    Ok(agree) => rec.mismatches += u64::from(!agree),
                    Err(e) if e.is_algorithm_failure() => rec.failures += 1,
                    Err(e) => return Err(e),
                }
                Ok(())
            };
            match target {
                CompareTarget::Matching => {
                    let g = gen_bounded_degree(&inst, n, d)?;
                    let lca = MatchingLca::new(&g, &seed, spec.ordering, log2_ceil_cap(n, cap_constant))?;
                    let global = lca.global_matching();
                    for (u, v) in g.edges() {
                        let e = EdgeId { u, v };
                        tally(lca.is_matched(e).map(|x| x.matched == global.contains(&e)))?;
                    }
                }
                CompareTarget::BallsBins => {
                    let bc = gen_bipartite_choices(&inst, n, n, d, &scheme_for(DecisionRule::LeastLoaded, None, n, n))?;
                    let lca = BallsBinsLca::new(&bc, DecisionRule::LeastLoaded, &seed, spec.ordering, default_cap(n, cap_constant))?;
                    let (global, _) = lca.run_global();
                    for b in 0..n {
                        let a = lca.assign_query(b)?;
                        if a.failed {
                            tally(Err(LcaError::Truncated {
                                root: b,
                                cap: default_cap(n, cap_constant),
                                probes: a.probes,
                                members: 0,
                            }))?;
                        } else {
                            tally(Ok(a.bin == global[b].bin))?;
                        }
                    }
                }
                CompareTarget::MaxChain => {
                    let g = gen_bounded_degree(&inst, n, d)?;
                    let ranks = RankOracle::new(&seed, spec.ordering, n as u64)?;
                    let rank = |v: usize| ranks.rank_unchecked(v as u64);
                    let global = eval_global(&g, MaxChain, rank);
                    for v in 0..n {
                        tally(eval_local(&g, v, MaxChain, rank, log2_ceil_cap(n, cap_constant)).map(|(x, _)| x == global.outputs[&v]))?;
                    }
                }
            }
            Ok(rec)
        })
        .collect::<Result<_>>()?;
    let items: u64 = records.iter().map(|r| r.items).sum();
    let failures: u64 = records.iter().map(|r| r.failures).sum();
    let summary = json!({
        "target": target,
        "trials": records.len(),
        "items": items,
        "failures": failures,
        "mismatches": records.iter().map(|r| r.mismatches).sum::<u64>(),
    });
    Ok(Outcome {
        summary,
        records: to_values(&records),
        items_csv: None,
        failures: Some((failures, items)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree_spec(n: usize, trials: usize) -> ExperimentSpec {
        ExperimentSpec::new(
            Seed::from_u64(1),
            trials,
            Experiment::TreeStats {
                model: GraphModel::BoundedDegree { n, d: 5 },
                queries: 1,
                cap: 1000,
                thresholds: vec![1, 2],
            },
        )
    }

    #[test]
    fn single_vertex_tree_stats() {
        let r = run(&tree_spec(1, 1)).unwrap();
        assert_eq!(r.summary["histogram"], json!([[1, 1]]));
        assert_eq!(r.records, vec![json!({"size": 1, "count": 1})]);
    }

    #[test]
    fn reports_are_byte_identical() {
        let spec = tree_spec(500, 8);
        let a = serde_json::to_string(&run(&spec).unwrap()).unwrap();
        let b = serde_json::to_string(&run(&spec).unwrap()).unwrap();
        assert_eq!(a, b);
        let other = ExperimentSpec {
            seed: Seed::from_u64(2),
            ..spec
        };
        assert_ne!(a, serde_json::to_string(&run(&other).unwrap()).unwrap());
    }

    #[test]
    fn spec_roundtrips_through_json() {
        let spec = tree_spec(10, 2);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentSpec>(&text).unwrap(), spec);
        assert_eq!(spec.fingerprint().len(), 32);
    }

    #[test]
    fn invalid_specs_map_to_exit_code_two() {
        let bad = [
            tree_spec(10, 0),
            ExperimentSpec::new(Seed::from_u64(0), 1, Experiment::LowerBound { path_len: 1 }),
            ExperimentSpec::new(
                Seed::from_u64(0),
                1,
                Experiment::Coloring {
                    m: 2000,
                    n: 200,
                    k: 20,
                    d: 2,
                    mode: PremiseMode::Strict,
                    probe_queries: 0,
                    input: None,
                },
            ),
        ];
        for spec in bad {
            assert_eq!(run(&spec).unwrap_err().exit_code(), 2, "{spec:?}");
        }
    }

    #[test]
    fn generation_failure_maps_to_exit_code_three() {
        // Too few vertices for 40 edges of size 40 with degree 2.
        let spec = ExperimentSpec::new(
            Seed::from_u64(0),
            1,
            Experiment::Coloring {
                m: 100,
                n: 40,
                k: 40,
                d: 2,
                mode: PremiseMode::Strict,
                probe_queries: 0,
                input: None,
            },
        );
        assert_eq!(run(&spec).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn budget_exceeded_maps_to_exit_code_four() {
        let mut spec = ExperimentSpec::new(
            Seed::from_u64(0),
            2,
            Experiment::Matching {
                n: 200,
                d: 5,
                cap_constant: 0.01,
                input: None,
            },
        );
        spec.failure_budget = 0.0;
        assert_eq!(run(&spec).unwrap_err().exit_code(), 4);
    }

    #[test]
    fn lower_bound_examples() {
        let r = lower_bound_experiment(2, 20_000, &Seed::from_u64(3), OrderingKind::FullPseudorandom).unwrap();
        assert!((r.frequency - 0.5).abs() <= 3.0 * r.std_error, "{r:?}");
        assert!(lower_bound_experiment(5, 0, &Seed::from_u64(3), OrderingKind::FullPseudorandom).is_err());
    }

    #[test]
    fn tail_slope_of_geometric_histogram() {
        // Pr[size >= s] = 2^-(s-1).
        let hist = (1..=20).map(|s| (s, 1u64 << (20 - s))).collect();
        let stats = TreeStats::from_histogram(hist, 0, &[]);
        let slope = log2_tail_slope(&stats, 2, 10).unwrap();
        assert!((slope + 1.0).abs() < 1e-3, "{slope}");
        assert!(log2_tail_slope(&stats, 30, 40).is_none());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = run(&tree_spec(1, 1)).unwrap();
        assert_eq!(r.records_csv(), "count,size\n1,1\n");
    }
}
