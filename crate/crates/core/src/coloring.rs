//! Hypergraph 2-coloring and k-CNF assignment via the Lovász Local Lemma.
//!
//! Both problems share one engine. A vertex (variable) is answered in up to
//! four phases:
//!
//! 1. Random coloring in the order of a seeded ranking, simulated locally
//!    through the vertex's query tree. A vertex is left uncolored (saved) when
//!    one of its constraints is still violable with only `k2` free vertices.
//! 2. and 3. Re-coloring of the saved vertices of the survived component
//!    around the query, repeated with fresh coins until every survived
//!    component is small.
//! 4. Brute force over the last component.
//!
//! Every phase depends only on the component being processed, never on the
//! query that led to it, so all answers agree with one global solution.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{LcaError, Result};
use crate::graph::{CnfFormula, Hypergraph, Incidence, PrimalGraph};
use crate::online::{eval_global, LocalEvaluator, OnlineRule};
use crate::rank::{KeyedHash, OrderingKind, Rank, RankOracle, Seed};

/// Largest phase-4 component, in free vertices, that brute force will try.
pub const MAX_BRUTE_FORCE_VARS: usize = 24;

/// A constraint system the four-phase algorithm can solve.
pub trait LllInstance: Incidence + Sync {
    /// Whether constraint `c` can still end up violated, given the values
    /// assigned so far. Once every variable of `c` is assigned this is
    /// exactly "`c` is violated".
    fn survives(&self, c: usize, value: &dyn Fn(usize) -> Option<bool>) -> bool;
}

impl LllInstance for Hypergraph {
    /// An edge survives while it is monochromatic.
    fn survives(&self, c: usize, value: &dyn Fn(usize) -> Option<bool>) -> bool {
        let mut seen = None;
        for &v in self.constraint_vars(c) {
            if let Some(x) = value(v) {
                match seen {
                    None => seen = Some(x),
                    Some(y) if y != x => return false,
                    _ => {}
                }
            }
        }
        true
    }
}

impl LllInstance for CnfFormula {
    /// A clause survives while no assigned literal satisfies it.
    fn survives(&self, c: usize, value: &dyn Fn(usize) -> Option<bool>) -> bool {
        !self.clauses()[c]
            .iter()
            .any(|l| value(l.var).is_some_and(|x| l.satisfied_by(x)))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PremiseMode {
    /// Refuse parameters that violate the local lemma premise.
    #[default]
    Strict,
    /// Run anyway with thresholds floored at 1; validity is checked after.
    Lenient,
}

/// Free-vertex thresholds per phase: `k1 = k`, `k(i+1) = k(i) - delta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseThresholds {
    pub k1: u32,
    pub k2: u32,
    pub k3: u32,
    pub k4: u32,
    pub delta: u32,
    pub premise_holds: bool,
}

impl PhaseThresholds {
    /// `k(i+1)`: a constraint with this many free vertices left becomes
    /// dangerous during phase `i`.
    pub fn next(&self, phase: u8) -> u32 {
        match phase {
            1 => self.k2,
            2 => self.k3,
            _ => self.k4,
        }
    }
}

fn ceil_log2(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros()
    }
}

/// `2^(k4 - 1) >= e (d + 1)`.
pub fn lll_premise(k4: i64, d: usize) -> bool {
    k4 >= 1 && ((k4 - 1) as f64).exp2() >= std::f64::consts::E * (d as f64 + 1.0)
}

pub fn compute_thresholds(k: usize, d: usize, mode: PremiseMode) -> Result<PhaseThresholds> {
    if k < 2 {
        return Err(LcaError::invalid(format!("constraint size k = {k} must be at least 2")));
    }
    // For d < 2 the (d-1)^3 factor vanishes; it is clamped to 1 and d to 1.
    let dd = d.max(1) as u128;
    let dm1 = (d.saturating_sub(1)).max(1) as u128;
    let delta = ceil_log2(16 * dd * dm1 * dm1 * dm1 * (dd + 1));
    let raw: Vec<i64> = (0..4).map(|i| k as i64 - i * delta as i64).collect();
    let premise_holds = lll_premise(raw[3], d);
    if !premise_holds && mode == PremiseMode::Strict {
        return Err(LcaError::PremiseViolation(format!(
            "2^(k4-1) >= e(d+1) fails for k = {k}, d = {d}: k4 = {}",
            raw[3]
        )));
    }
    let floor = |x: i64| x.max(1) as u32;
    Ok(PhaseThresholds {
        k1: floor(raw[0]),
        k2: floor(raw[1]),
        k3: floor(raw[2]),
        k4: floor(raw[3]),
        delta,
        premise_holds,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    pub fn from_bit(b: bool) -> Self {
        if b {
            Color::Blue
        } else {
            Color::Red
        }
    }

    pub fn is_blue(self) -> bool {
        self == Color::Blue
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringAnswer {
    pub color: Color,
    pub phase_resolved: u8,
    pub probes: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatAnswer {
    pub value: bool,
    pub phase_resolved: u8,
    pub probes: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LllParams {
    #[serde(default)]
    pub mode: PremiseMode,
    /// Vertex ordering; `None` means `ceil(log2 n)^2`-wise independent.
    #[serde(default)]
    pub ordering: Option<OrderingKind>,
    /// Phase-1 query tree cap; `None` explores without limit.
    #[serde(default)]
    pub cap: Option<usize>,
    /// Dependency degree bound; `None` uses the instance's own.
    #[serde(default)]
    pub d: Option<usize>,
}

impl LllParams {
    pub fn lenient() -> Self {
        LllParams {
            mode: PremiseMode::Lenient,
            ..Default::default()
        }
    }
}

/// Round counts and component-size limits derived from the constraint
/// count `n`. Logs are base 2, rounded up and floored at 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseScales {
    pub log_n: usize,
    pub loglog_n: usize,
    /// Re-coloring attempts in phases 2 and 3.
    pub rounds: usize,
    /// Largest admissible survived component after phase 1.
    pub phase1_bound: usize,
    /// Largest survived component of a good phase-2 coloring.
    pub good2: usize,
    /// Largest survived component of a good phase-3 coloring.
    pub good3: usize,
}

impl PhaseScales {
    pub fn new(n: usize, d: usize, k4: u32) -> Self {
        let lg = (n.max(2) as f64).log2();
        let log_n = (lg.ceil() as usize).max(1);
        let loglog_n = (lg.log2().ceil().max(0.0) as usize).max(1);
        let d3 = d.max(1).pow(3);
        PhaseScales {
            log_n,
            loglog_n,
            rounds: log_n,
            phase1_bound: 4 * d3 * log_n,
            good2: 2 * d3 * loglog_n,
            good3: loglog_n.div_ceil(k4.max(1) as usize).max(1),
        }
    }
}

/// Phase-1 state of a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexState {
    Colored(bool),
    Saved,
}

/// The phase-1 online rule: color with the vertex's coin unless one of its
/// constraints is violable with at most `k2` free vertices left.
pub struct Phase1Rule<'a, I> {
    inst: &'a I,
    coins: KeyedHash,
    k_next: usize,
}

impl<I: LllInstance> OnlineRule for Phase1Rule<'_, I> {
    type Output = VertexState;

    fn evaluate(&self, v: usize, earlier: &[(usize, VertexState)]) -> VertexState {
        for &c in self.inst.var_constraints(v) {
            let vars = self.inst.constraint_vars(c);
            let assigned: Vec<(usize, bool)> = earlier
                .iter()
                .filter_map(|&(w, s)| match s {
                    VertexState::Colored(b) if vars.binary_search(&w).is_ok() => Some((w, b)),
                    _ => None,
                })
                .collect();
            let lookup = |w: usize| assigned.iter().find(|a| a.0 == w).map(|a| a.1);
            if vars.len() - assigned.len() <= self.k_next && self.inst.survives(c, &lookup) {
                return VertexState::Saved;
            }
        }
        VertexState::Colored(self.coins.bit(v as u64))
    }
}

/// Values and resolving phase of every vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LllSolution {
    pub values: Vec<bool>,
    pub phases: Vec<u8>,
    pub probes: u64,
}

impl LllSolution {
    pub fn colors(&self) -> Vec<Color> {
        self.values.iter().map(|&b| Color::from_bit(b)).collect()
    }

    /// Vertices resolved in phases 1 to 4.
    pub fn phase_histogram(&self) -> [usize; 4] {
        let mut h = [0; 4];
        for &p in &self.phases {
            h[p as usize - 1] += 1;
        }
        h
    }
}

type Sink = HashMap<usize, (bool, u8)>;

/// The four-phase LCA bound to an instance, a seed and parameters.
pub struct LllLca<'a, I> {
    inst: &'a I,
    primal: PrimalGraph<'a, I>,
    thresholds: PhaseThresholds,
    scales: PhaseScales,
    ranks: RankOracle,
    coins: Seed,
    cap: Option<usize>,
}

impl<'a, I: LllInstance> LllLca<'a, I> {
    pub fn new(inst: &'a I, seed: &Seed, params: &LllParams) -> Result<Self> {
        let actual_d = inst.max_dependency_degree();
        let d = params.d.unwrap_or(actual_d);
        if actual_d > d {
            return Err(LcaError::invalid(format!(
                "instance dependency degree {actual_d} exceeds the bound d = {d}"
            )));
        }
        let n = inst.constraint_count();
        let thresholds = if n == 0 {
            // Nothing to violate: phase 1 colors everything.
            PhaseThresholds {
                k1: 0,
                k2: 0,
                k3: 0,
                k4: 0,
                delta: 0,
                premise_holds: true,
            }
        } else {
            compute_thresholds(inst.constraint_vars(0).len(), d, params.mode)?
        };
        let scales = PhaseScales::new(n, d, thresholds.k4);
        let ordering = params.ordering.unwrap_or_else(|| {
            OrderingKind::k_wise(((scales.log_n * scales.log_n) as u32).max(2))
        });
        let ranks = RankOracle::new(&seed.derive(b"lll/order"), ordering, inst.var_count() as u64)?;
        Ok(LllLca {
            inst,
            primal: PrimalGraph::new(inst),
            thresholds,
            scales,
            ranks,
            coins: seed.derive(b"lll/coins"),
            cap: params.cap,
        })
    }

    pub fn thresholds(&self) -> &PhaseThresholds {
        &self.thresholds
    }

    pub fn scales(&self) -> &PhaseScales {
        &self.scales
    }

    pub fn rank(&self, v: usize) -> Rank {
        self.ranks.rank_unchecked(v as u64)
    }

    /// Coins of phase 1 are ensemble 0; round `t` of phase 2 or 3 gets its
    /// own ensemble.
    fn coins(&self, phase: u8, round: usize) -> KeyedHash {
        let index = match phase {
            1 => 0,
            2 => 1 + round,
            _ => 1 + self.scales.rounds + round,
        };
        KeyedHash::new(&self.coins.ensemble(index as u64))
    }

    fn phase1_rule(&self) -> Phase1Rule<'a, I> {
        Phase1Rule {
            inst: self.inst,
            coins: self.coins(1, 0),
            k_next: self.thresholds.k2 as usize,
        }
    }

    fn check_vertex(&self, x: usize) -> Result<()> {
        if x >= self.inst.var_count() {
            return Err(LcaError::OutOfUniverse {
                id: x as u64,
                universe: self.inst.var_count() as u64,
            });
        }
        Ok(())
    }

    /// Value of `x` and the phase that fixed it.
    pub fn query(&self, x: usize) -> Result<SatAnswer> {
        self.check_vertex(x)?;
        let rank = |v: usize| self.rank(v);
        let mut ev = LocalEvaluator::new(&self.primal, self.phase1_rule(), rank, self.cap.unwrap_or(usize::MAX));
        let mut probes = 0;
        let (value, phase) = self.resolve(&mut ev, x, None, &mut probes)?;
        Ok(SatAnswer {
            value,
            phase_resolved: phase,
            probes: probes + ev.probes(),
        })
    }

    /// Every vertex. Without a cap, phase-1 states and resolved components
    /// are shared across queries; answers are identical to [`Self::query`].
    pub fn solve_all(&self) -> Result<LllSolution> {
        let m = self.inst.var_count();
        if self.cap.is_some() {
            let mut values = Vec::with_capacity(m);
            let mut phases = Vec::with_capacity(m);
            let mut probes = 0;
            for x in 0..m {
                let a = self.query(x)?;
                values.push(a.value);
                phases.push(a.phase_resolved);
                probes += a.probes;
            }
            return Ok(LllSolution { values, phases, probes });
        }
        let rank = |v: usize| self.rank(v);
        let mut ev = LocalEvaluator::new(&self.primal, self.phase1_rule(), rank, usize::MAX);
        let mut sink = Sink::new();
        let mut probes = 0;
        let mut values = Vec::with_capacity(m);
        let mut phases = Vec::with_capacity(m);
        for x in 0..m {
            let (value, phase) = match (ev.get(x), sink.get(&x)) {
                (Some(VertexState::Colored(b)), _) => (*b, 1),
                (_, Some(&found)) => found,
                _ => self.resolve(&mut ev, x, Some(&mut sink), &mut probes)?,
            };
            values.push(value);
            phases.push(phase);
        }
        Ok(LllSolution {
            values,
            phases,
            probes: probes + ev.probes(),
        })
    }

    fn resolve<F: Fn(usize) -> Rank>(
        &self,
        ev: &mut LocalEvaluator<'_, PrimalGraph<'a, I>, Phase1Rule<'a, I>, F>,
        x: usize,
        mut sink: Option<&mut Sink>,
        probes: &mut u64,
    ) -> Result<(bool, u8)> {
        if let VertexState::Colored(b) = ev.eval(x)? {
            return Ok((b, 1));
        }
        let (edges, mut assignment) = self.phase1_component(ev, x, probes)?;
        let mut edges = edges;
        for phase in [2u8, 3] {
            let mut free: Vec<usize> = self.free_vars(&edges, &assignment, probes);
            free.sort_unstable_by_key(|&v| self.rank(v));
            let (next, components) = self.recolor(phase, &edges, &assignment, &free, probes)?;
            if let Some(sink) = sink.as_deref_mut() {
                for &v in &free {
                    if let Some(&b) = next.get(&v) {
                        sink.insert(v, (b, phase));
                    }
                }
            }
            assignment = next;
            if let Some(&b) = assignment.get(&x) {
                return Ok((b, phase));
            }
            edges = components
                .into_iter()
                .find(|comp| comp.iter().any(|&c| self.inst.constraint_vars(c).binary_search(&x).is_ok()))
                .ok_or_else(|| LcaError::PhaseFailure {
                    phase,
                    detail: format!("uncolored vertex {x} lies in no survived constraint"),
                })?;
        }
        let mut free = self.free_vars(&edges, &assignment, probes);
        free.sort_unstable();
        let solved = self.brute_force(&edges, &assignment, &free, probes)?;
        if let Some(sink) = sink {
            for (&v, &b) in &solved {
                sink.insert(v, (b, 4));
            }
        }
        Ok((solved[&x], 4))
    }

    /// Survived component around saved vertex `x` and the phase-1 colors of
    /// its vertices.
    fn phase1_component<F: Fn(usize) -> Rank>(
        &self,
        ev: &mut LocalEvaluator<'_, PrimalGraph<'a, I>, Phase1Rule<'a, I>, F>,
        x: usize,
        probes: &mut u64,
    ) -> Result<(Vec<usize>, HashMap<usize, bool>)> {
        let mut assignment = HashMap::new();
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        let mut component = Vec::new();
        *probes += 1;
        for &c in self.inst.var_constraints(x) {
            seen.insert(c);
            if self.phase1_survives(ev, c, &mut assignment, probes)? {
                queue.push_back(c);
            }
        }
        while let Some(c) = queue.pop_front() {
            component.push(c);
            if component.len() > self.scales.phase1_bound {
                return Err(LcaError::PhaseFailure {
                    phase: 1,
                    detail: format!(
                        "survived component of vertex {x} exceeds {} constraints",
                        self.scales.phase1_bound
                    ),
                });
            }
            *probes += 1;
            for f in self.inst.dependency_neighbors(c) {
                if seen.insert(f) && self.phase1_survives(ev, f, &mut assignment, probes)? {
                    queue.push_back(f);
                }
            }
        }
        if component.is_empty() {
            return Err(LcaError::PhaseFailure {
                phase: 1,
                detail: format!("saved vertex {x} lies in no survived constraint"),
            });
        }
        component.sort_unstable();
        Ok((component, assignment))
    }

    /// Whether `c` survived phase 1; if so its colored vertices are added to
    /// `assignment`.
    fn phase1_survives<F: Fn(usize) -> Rank>(
        &self,
        ev: &mut LocalEvaluator<'_, PrimalGraph<'a, I>, Phase1Rule<'a, I>, F>,
        c: usize,
        assignment: &mut HashMap<usize, bool>,
        probes: &mut u64,
    ) -> Result<bool> {
        *probes += 1;
        let mut local = Vec::new();
        for &v in self.inst.constraint_vars(c) {
            if let VertexState::Colored(b) = ev.eval(v)? {
                local.push((v, b));
            }
        }
        let lookup = |w: usize| local.iter().find(|a| a.0 == w).map(|a| a.1);
        let alive = self.inst.survives(c, &lookup);
        if alive {
            assignment.extend(local);
        }
        Ok(alive)
    }

    fn free_vars(&self, edges: &[usize], assignment: &HashMap<usize, bool>, probes: &mut u64) -> Vec<usize> {
        let mut free: Vec<usize> = edges
            .iter()
            .flat_map(|&c| {
                *probes += 1;
                self.inst.constraint_vars(c).iter().copied()
            })
            .filter(|v| !assignment.contains_key(v))
            .collect();
        free.sort_unstable();
        free.dedup();
        free
    }

    fn free_count(&self, c: usize, assignment: &HashMap<usize, bool>) -> usize {
        self.inst
            .constraint_vars(c)
            .iter()
            .filter(|v| !assignment.contains_key(v))
            .count()
    }

    /// Phases 2 and 3: re-color `free` (in rank order) until the survived
    /// constraints form only small components.
    fn recolor(
        &self,
        phase: u8,
        edges: &[usize],
        base: &HashMap<usize, bool>,
        free: &[usize],
        probes: &mut u64,
    ) -> Result<(HashMap<usize, bool>, Vec<Vec<usize>>)> {
        let limit = if phase == 2 {
            self.scales.good2
        } else {
            self.scales.good3
        };
        let k_next = self.thresholds.next(phase) as usize;
        let mut largest = 0;
        for round in 0..self.scales.rounds {
            let coins = self.coins(phase, round);
            let mut assignment = base.clone();
            for &v in free {
                *probes += 1;
                let saved = self.inst.var_constraints(v).iter().any(|&c| {
                    edges.binary_search(&c).is_ok()
                        && self.free_count(c, &assignment) <= k_next
                        && self.inst.survives(c, &|w| assignment.get(&w).copied())
                });
                if !saved {
                    assignment.insert(v, coins.bit(v as u64));
                }
            }
            let survived: Vec<usize> = edges
                .iter()
                .copied()
                .filter(|&c| self.inst.survives(c, &|w| assignment.get(&w).copied()))
                .collect();
            let components = self.components(&survived, probes);
            largest = components.iter().map(Vec::len).max().unwrap_or(0);
            if largest <= limit {
                return Ok((assignment, components));
            }
        }
        Err(LcaError::PhaseFailure {
            phase,
            detail: format!(
                "no good coloring in {} rounds (last largest component {largest}, limit {limit})",
                self.scales.rounds
            ),
        })
    }

    /// Connected components of the dependency graph restricted to `edges`
    /// (sorted), each sorted.
    fn components(&self, edges: &[usize], probes: &mut u64) -> Vec<Vec<usize>> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for &start in edges {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = vec![start];
            let mut i = 0;
            while i < comp.len() {
                *probes += 1;
                for f in self.inst.dependency_neighbors(comp[i]) {
                    if edges.binary_search(&f).is_ok() && seen.insert(f) {
                        comp.push(f);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Phase 4: the first assignment of `free` (binary counting, lowest id as
    /// the low bit) under which no constraint of `edges` is violated.
    fn brute_force(
        &self,
        edges: &[usize],
        base: &HashMap<usize, bool>,
        free: &[usize],
        probes: &mut u64,
    ) -> Result<HashMap<usize, bool>> {
        if free.len() > MAX_BRUTE_FORCE_VARS {
            return Err(LcaError::PhaseFailure {
                phase: 4,
                detail: format!(
                    "component has {} free vertices, more than {MAX_BRUTE_FORCE_VARS}",
                    free.len()
                ),
            });
        }
        *probes += edges.len() as u64;
        let position: HashMap<usize, usize> = free.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        for mask in 0u64..(1 << free.len()) {
            let value = |w: usize| match position.get(&w) {
                Some(&i) => Some(mask >> i & 1 == 1),
                None => base.get(&w).copied(),
            };
            if edges.iter().all(|&c| !self.inst.survives(c, &value)) {
                return Ok(free
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (v, mask >> i & 1 == 1))
                    .collect());
            }
        }
        Err(LcaError::PhaseFailure {
            phase: 4,
            detail: format!("no assignment of {} free vertices satisfies the component", free.len()),
        })
    }

    /// Phase-1 states of all vertices by running the rule over the whole
    /// order; the oracle for the local phase-1 simulation.
    pub fn phase1_global(&self) -> Vec<VertexState> {
        let trace = eval_global(&self.primal, self.phase1_rule(), |v| self.rank(v));
        trace.outputs.into_values().collect()
    }
}

pub fn color_query(h: &Hypergraph, x: usize, seed: &Seed, params: &LllParams) -> Result<ColoringAnswer> {
    let a = LllLca::new(h, seed, params)?.query(x)?;
    Ok(ColoringAnswer {
        color: Color::from_bit(a.value),
        phase_resolved: a.phase_resolved,
        probes: a.probes,
    })
}

pub fn color_all(h: &Hypergraph, seed: &Seed, params: &LllParams) -> Result<LllSolution> {
    LllLca::new(h, seed, params)?.solve_all()
}

/// Every edge sees both colors.
pub fn verify_coloring(h: &Hypergraph, colors: &[Color]) -> bool {
    colors.len() == h.m()
        && h.edges().iter().all(|e| {
            let first = colors[e[0]];
            e.iter().any(|&v| colors[v] != first)
        })
}

pub fn sat_query(f: &CnfFormula, var: usize, seed: &Seed, params: &LllParams) -> Result<SatAnswer> {
    LllLca::new(f, seed, params)?.query(var)
}

pub fn sat_all(f: &CnfFormula, seed: &Seed, params: &LllParams) -> Result<LllSolution> {
    LllLca::new(f, seed, params)?.solve_all()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_cnf, gen_hypergraph, Literal};

    #[test]
    fn thresholds_examples() {
        let t = compute_thresholds(40, 2, PremiseMode::Strict).unwrap();
        assert_eq!(t.delta, 7);
        assert_eq!((t.k1, t.k2, t.k3, t.k4), (40, 33, 26, 19));
        assert!(t.premise_holds);
        assert!(matches!(
            compute_thresholds(20, 2, PremiseMode::Strict),
            Err(LcaError::PremiseViolation(_))
        ));
        let t = compute_thresholds(20, 2, PremiseMode::Lenient).unwrap();
        assert_eq!((t.k1, t.k2, t.k3, t.k4), (20, 13, 6, 1));
        assert!(!t.premise_holds);
        assert!(compute_thresholds(1, 2, PremiseMode::Lenient).is_err());
    }

    #[test]
    fn premise_boundary() {
        // e * 3 = 8.15: 2^4 passes, 2^3 does not.
        assert!(compute_thresholds(26, 2, PremiseMode::Strict).is_ok());
        assert!(compute_thresholds(25, 2, PremiseMode::Strict).is_err());
        assert!(lll_premise(5, 2) && !lll_premise(4, 2));
        assert!(lll_premise(3, 0) && !lll_premise(2, 0));
        assert!(!lll_premise(0, 0));
    }

    #[test]
    fn small_degree_decrement() {
        // d = 1: 16 * 1 * 1 * 2 = 32.
        assert_eq!(compute_thresholds(30, 1, PremiseMode::Lenient).unwrap().delta, 5);
        assert_eq!(compute_thresholds(30, 0, PremiseMode::Lenient).unwrap().delta, 5);
        // d = 3: 16 * 3 * 8 * 4 = 1536.
        assert_eq!(compute_thresholds(60, 3, PremiseMode::Lenient).unwrap().delta, 11);
    }

    #[test]
    fn scales_for_forty_edges() {
        let s = PhaseScales::new(40, 2, 19);
        assert_eq!((s.log_n, s.loglog_n, s.rounds), (6, 3, 6));
        assert_eq!((s.phase1_bound, s.good2, s.good3), (192, 48, 1));
    }

    #[test]
    fn verify_coloring_examples() {
        let h = Hypergraph::new(2, vec![vec![0, 1]]).unwrap();
        assert!(verify_coloring(&h, &[Color::Red, Color::Blue]));
        assert!(!verify_coloring(&h, &[Color::Red, Color::Red]));
        assert!(!verify_coloring(&h, &[Color::Red]));
    }

    #[test]
    fn survives_semantics() {
        let h = Hypergraph::new(3, vec![vec![0, 1, 2]]).unwrap();
        assert!(h.survives(0, &|_| None));
        assert!(h.survives(0, &|v| (v < 2).then_some(true)));
        assert!(!h.survives(0, &|v| (v < 2).then_some(v == 0)));
        let f = CnfFormula::new(
            2,
            vec![vec![Literal { var: 0, positive: true }, Literal { var: 1, positive: false }]],
        )
        .unwrap();
        assert!(f.survives(0, &|v| (v == 0).then_some(false)));
        assert!(!f.survives(0, &|v| (v == 1).then_some(false)));
    }

    #[test]
    fn empty_and_edgeless_instances() {
        let h = Hypergraph::new(1, vec![]).unwrap();
        let s = color_all(&h, &Seed::from_u64(0), &LllParams::default()).unwrap();
        assert_eq!(s.phases, vec![1]);
        let again = color_all(&h, &Seed::from_u64(0), &LllParams::default()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn one_edge_is_always_properly_colored() {
        let h = Hypergraph::new(30, vec![(0..30).collect()]).unwrap();
        for s in 0..30 {
            let seed = Seed::from_u64(s);
            let sol = color_all(&h, &seed, &LllParams::default()).unwrap();
            assert!(verify_coloring(&h, &sol.colors()));
            for x in [0, 7, 29] {
                let a = color_query(&h, x, &seed, &LllParams::default()).unwrap();
                assert_eq!(a.color, sol.colors()[x]);
                assert_eq!(a.phase_resolved, sol.phases[x]);
            }
        }
    }

    #[test]
    fn single_clause_relaxed() {
        let f = CnfFormula::new(
            2,
            vec![vec![Literal { var: 0, positive: true }, Literal { var: 1, positive: true }]],
        )
        .unwrap();
        for s in 0..50 {
            let sol = sat_all(&f, &Seed::from_u64(s), &LllParams::lenient()).unwrap();
            assert!(f.evaluate(&sol.values));
        }
    }

    #[test]
    fn local_phase1_matches_global() {
        let h = gen_hypergraph(&Seed::from_u64(1), 800, 40, 40, 2).unwrap();
        let lca = LllLca::new(&h, &Seed::from_u64(2), &LllParams::default()).unwrap();
        let global = lca.phase1_global();
        assert!(global.contains(&VertexState::Saved));
        let rank = |v: usize| lca.rank(v);
        for x in (0..800).step_by(37) {
            let mut ev = LocalEvaluator::new(&lca.primal, lca.phase1_rule(), rank, usize::MAX);
            assert_eq!(ev.eval(x).unwrap(), global[x]);
        }
    }

    #[test]
    fn coloring_is_valid_and_consistent() {
        let h = gen_hypergraph(&Seed::from_u64(3), 800, 40, 40, 2).unwrap();
        let seed = Seed::from_u64(4);
        let lca = LllLca::new(&h, &seed, &LllParams::default()).unwrap();
        let sol = lca.solve_all().unwrap();
        assert!(verify_coloring(&h, &sol.colors()));
        for x in (0..800).step_by(53) {
            let a = lca.query(x).unwrap();
            assert_eq!((a.value, a.phase_resolved), (sol.values[x], sol.phases[x]));
        }
    }

    #[test]
    fn later_phases_are_exercised() {
        // A saved vertex must be resolved by a later phase; the deepest
        // phase reached across seeds goes past 1.
        let h = gen_hypergraph(&Seed::from_u64(5), 800, 40, 40, 2).unwrap();
        let deepest = (0..5)
            .map(|s| color_all(&h, &Seed::from_u64(s), &LllParams::default()).unwrap())
            .inspect(|sol| assert!(verify_coloring(&h, &sol.colors())))
            .flat_map(|sol| sol.phases)
            .max()
            .unwrap();
        assert!(deepest >= 2);
    }

    #[test]
    fn cnf_twin_is_satisfying() {
        let f = gen_cnf(&Seed::from_u64(6), 800, 40, 40, 2).unwrap();
        for s in 0..5 {
            let sol = sat_all(&f, &Seed::from_u64(s), &LllParams::default()).unwrap();
            assert!(f.evaluate(&sol.values));
        }
    }

    #[test]
    fn strict_mode_rejects_small_k() {
        let h = gen_hypergraph(&Seed::from_u64(7), 2000, 200, 20, 2).unwrap();
        assert!(matches!(
            color_all(&h, &Seed::from_u64(0), &LllParams::default()),
            Err(LcaError::PremiseViolation(_))
        ));
        let sol = color_all(&h, &Seed::from_u64(0), &LllParams::lenient());
        if let Ok(sol) = sol {
            assert!(verify_coloring(&h, &sol.colors()));
        }
    }

    #[test]
    fn every_phase_is_reached_and_stays_valid() {
        // Lenient parameters with d = 1 leave room between k2, k3 and k4, so
        // some vertices survive to phases 3 and 4.
        let mut hist = [0usize; 4];
        for s in 0..100 {
            let h = gen_hypergraph(&Seed::from_u64(s), 600, 40, 20, 1).unwrap();
            let lca = LllLca::new(&h, &Seed::from_u64(1000 + s), &LllParams::lenient()).unwrap();
            let sol = lca.solve_all().unwrap();
            assert!(verify_coloring(&h, &sol.colors()));
            for (x, &p) in sol.phases.iter().enumerate() {
                if p >= 3 {
                    let a = lca.query(x).unwrap();
                    assert_eq!((a.value, a.phase_resolved), (sol.values[x], p));
                }
            }
            for (a, b) in hist.iter_mut().zip(sol.phase_histogram()) {
                *a += b;
            }
        }
        assert!(hist.iter().all(|&c| c > 0), "{hist:?}");
    }

    #[test]
    fn declared_degree_must_cover_instance() {
        let h = gen_hypergraph(&Seed::from_u64(8), 800, 40, 40, 2).unwrap();
        let params = LllParams {
            d: Some(1),
            ..LllParams::lenient()
        };
        assert!(LllLca::new(&h, &Seed::from_u64(0), &params).is_err());
    }
}

