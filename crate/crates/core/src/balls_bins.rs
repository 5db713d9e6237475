//! Power-of-d-choices load balancing as an LCA.
//!
//! A ball's bin depends on the loads of its `d` bins at its arrival, which
//! depend on earlier balls sharing those bins, and so on. [`BallsBinsLca`]
//! explores that closure and replays the rule over it. A closure larger than
//! the cap is a failure event: the ball falls back to a seeded uniform choice
//! among its own bins.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LcaError, Result};
use crate::graph::{BipartiteChoices, ChoiceScheme};
use crate::rank::{OrderingKind, Rank, RankOracle, Seed};
use crate::relevant::explore_bipartite_with;

/// Per-arrival bin choice; sees only the ball's own bins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionRule {
    /// Least loaded bin; ties to the lowest bin id.
    LeastLoaded,
    /// Least loaded bin; ties to the leftmost group.
    AlwaysGoLeft,
    /// Least `load / capacity`; ties to the lowest bin id.
    CapacityWeighted,
    /// Least loaded among the nearest-point bins; ties to the lowest bin id.
    CircleNearest,
}

impl DecisionRule {
    pub const ALL: [DecisionRule; 4] = [
        DecisionRule::LeastLoaded,
        DecisionRule::AlwaysGoLeft,
        DecisionRule::CapacityWeighted,
        DecisionRule::CircleNearest,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DecisionRule::LeastLoaded => "least-loaded",
            DecisionRule::AlwaysGoLeft => "always-go-left",
            DecisionRule::CapacityWeighted => "capacity-weighted",
            DecisionRule::CircleNearest => "circle-nearest",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| LcaError::invalid(format!("unknown rule '{s}'")))
    }

    /// Checks the metadata the rule needs is present.
    pub fn validate(&self, bc: &BipartiteChoices) -> Result<()> {
        match self {
            DecisionRule::AlwaysGoLeft if bc.groups().is_none() => {
                Err(LcaError::invalid("always-go-left needs group-sampled choices"))
            }
            DecisionRule::CapacityWeighted if bc.capacities().is_none() => {
                Err(LcaError::invalid("capacity-weighted needs bin capacities"))
            }
            _ => Ok(()),
        }
    }

    pub fn choose(&self, bc: &BipartiteChoices, ball: usize, load: impl Fn(usize) -> u64) -> usize {
        let choices = bc.choices(ball);
        match self {
            DecisionRule::LeastLoaded | DecisionRule::CircleNearest => *choices
                .iter()
                .min_by_key(|&&b| (load(b), b))
                .expect("d >= 1"),
            DecisionRule::AlwaysGoLeft => {
                // Strict improvement only, so the leftmost group wins ties.
                let mut best = choices[0];
                let mut best_load = load(best);
                for &b in &choices[1..] {
                    let l = load(b);
                    if l < best_load {
                        best = b;
                        best_load = l;
                    }
                }
                best
            }
            DecisionRule::CapacityWeighted => {
                let caps = bc.capacities().expect("validated");
                let mut best = choices[0];
                for &b in &choices[1..] {
                    if relative_load_less(load(b), caps[b], b, load(best), caps[best], best) {
                        best = b;
                    }
                }
                best
            }
        }
    }
}

/// `(la / ca, a) < (lb / cb, b)`, with zero capacity ranking last.
fn relative_load_less(la: u64, ca: u64, a: usize, lb: u64, cb: u64, b: usize) -> bool {
    match (ca, cb) {
        (0, 0) => (la, a) < (lb, b),
        (0, _) => false,
        (_, 0) => true,
        _ => {
            let lhs = la as u128 * cb as u128;
            let rhs = lb as u128 * ca as u128;
            lhs < rhs || (lhs == rhs && a < b)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub ball: usize,
    pub bin: usize,
    pub failed: bool,
    pub probes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadProfile {
    pub loads: Vec<u64>,
    pub max_load: u64,
}

impl LoadProfile {
    pub fn from_assignments(m_bins: usize, assignments: &[Assignment]) -> Self {
        let mut loads = vec![0u64; m_bins];
        for a in assignments {
            loads[a.bin] += 1;
        }
        let max_load = loads.iter().copied().max().unwrap_or(0);
        LoadProfile { loads, max_load }
    }

    pub fn total(&self) -> u64 {
        self.loads.iter().sum()
    }
}

/// Capacities as even as possible that sum to `n_balls`.
pub fn uniform_capacities(n_balls: usize, m_bins: usize) -> Vec<u64> {
    let m = m_bins.max(1);
    (0..m_bins)
        .map(|b| (n_balls / m + usize::from(b < n_balls % m)) as u64)
        .collect()
}

/// The choice scheme a rule is meant to run on.
pub fn scheme_for(rule: DecisionRule, capacities: Option<Vec<u64>>, n_balls: usize, m_bins: usize) -> ChoiceScheme {
    match rule {
        DecisionRule::LeastLoaded => ChoiceScheme::Uniform,
        DecisionRule::AlwaysGoLeft => ChoiceScheme::Groups,
        DecisionRule::CapacityWeighted => ChoiceScheme::CapacityProportional {
            capacities: capacities.unwrap_or_else(|| uniform_capacities(n_balls, m_bins)),
        },
        DecisionRule::CircleNearest => ChoiceScheme::Circle,
    }
}

/// `ceil(constant * log2 m)`, at least 1.
pub fn default_cap(m_bins: usize, constant: f64) -> usize {
    let log = (m_bins.max(2) as f64).log2();
    ((constant * log).ceil() as usize).max(1)
}

pub struct BallsBinsLca<'a> {
    bc: &'a BipartiteChoices,
    rule: DecisionRule,
    ranks: RankOracle,
    fallback: Seed,
    cap: usize,
}

impl<'a> BallsBinsLca<'a> {
    pub fn new(
        bc: &'a BipartiteChoices,
        rule: DecisionRule,
        seed: &Seed,
        kind: OrderingKind,
        cap: usize,
    ) -> Result<Self> {
        rule.validate(bc)?;
        Ok(BallsBinsLca {
            bc,
            rule,
            ranks: RankOracle::new(seed, kind, bc.n_balls() as u64)?,
            fallback: seed.derive(b"balls-bins/fallback"),
            cap,
        })
    }

    fn rank(&self, ball: usize) -> Rank {
        self.ranks.rank_unchecked(ball as u64)
    }

    pub fn assign_query(&self, ball: usize) -> Result<Assignment> {
        if ball >= self.bc.n_balls() {
            return Err(LcaError::OutOfUniverse {
                id: ball as u64,
                universe: self.bc.n_balls() as u64,
            });
        }
        let set = explore_bipartite_with(self.bc, ball, |b| self.rank(b), self.cap);
        if set.truncated {
            let pick = self
                .fallback
                .random_in_range(&(ball as u64).to_le_bytes(), self.bc.d() as u64)?;
            return Ok(Assignment {
                ball,
                bin: self.bc.choices(ball)[pick as usize],
                failed: true,
                probes: set.probes,
            });
        }
        let mut loads: HashMap<usize, u64> = HashMap::new();
        for (b, _) in &set.members {
            let bin = self.rule.choose(self.bc, *b, |u| loads.get(&u).copied().unwrap_or(0));
            if *b == ball {
                return Ok(Assignment {
                    ball,
                    bin,
                    failed: false,
                    probes: set.probes,
                });
            }
            *loads.entry(bin).or_insert(0) += 1;
        }
        unreachable!("the queried ball is a member of its relevant set")
    }

    /// Every ball queried independently (in parallel).
    pub fn assign_all(&self) -> Result<(Vec<Assignment>, LoadProfile)> {
        let assignments: Vec<Assignment> = (0..self.bc.n_balls())
            .into_par_iter()
            .map(|b| self.assign_query(b))
            .collect::<Result<_>>()?;
        let profile = LoadProfile::from_assignments(self.bc.m_bins(), &assignments);
        Ok((assignments, profile))
    }

    /// The online algorithm itself over the full arrival order.
    pub fn run_global(&self) -> (Vec<Assignment>, LoadProfile) {
        let mut order: Vec<usize> = (0..self.bc.n_balls()).collect();
        order.sort_unstable_by_key(|&b| self.rank(b));
        let mut loads = vec![0u64; self.bc.m_bins()];
        let mut assignments = vec![
            Assignment {
                ball: 0,
                bin: 0,
                failed: false,
                probes: 0
            };
            self.bc.n_balls()
        ];
        for b in order {
            let bin = self.rule.choose(self.bc, b, |u| loads[u]);
            loads[bin] += 1;
            assignments[b] = Assignment {
                ball: b,
                bin,
                failed: false,
                probes: 0,
            };
        }
        let max_load = loads.iter().copied().max().unwrap_or(0);
        (assignments, LoadProfile { loads, max_load })
    }
}

pub fn assign_query(
    bc: &BipartiteChoices,
    ball: usize,
    rule: DecisionRule,
    seed: &Seed,
    kind: OrderingKind,
    cap: usize,
) -> Result<Assignment> {
    BallsBinsLca::new(bc, rule, seed, kind, cap)?.assign_query(ball)
}

pub fn assign_all(
    bc: &BipartiteChoices,
    rule: DecisionRule,
    seed: &Seed,
    kind: OrderingKind,
    cap: usize,
) -> Result<(Vec<Assignment>, LoadProfile)> {
    BallsBinsLca::new(bc, rule, seed, kind, cap)?.assign_all()
}

pub fn run_global(
    bc: &BipartiteChoices,
    rule: DecisionRule,
    seed: &Seed,
    kind: OrderingKind,
) -> Result<(Vec<Assignment>, LoadProfile)> {
    Ok(BallsBinsLca::new(bc, rule, seed, kind, 0)?.run_global())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxLoadSummary {
    pub runs: usize,
    pub mean: f64,
    pub min: u64,
    pub median: u64,
    pub p95: u64,
    pub max: u64,
}

/// Summary of `max_load` across runs; `None` for an empty slice.
pub fn max_load_report(profiles: &[LoadProfile]) -> Option<MaxLoadSummary> {
    if profiles.is_empty() {
        return None;
    }
    let mut maxima: Vec<u64> = profiles.iter().map(|p| p.max_load).collect();
    maxima.sort_unstable();
    let pct = |q: f64| maxima[((q * (maxima.len() - 1) as f64).round()) as usize];
    Some(MaxLoadSummary {
        runs: maxima.len(),
        mean: maxima.iter().sum::<u64>() as f64 / maxima.len() as f64,
        min: maxima[0],
        median: pct(0.5),
        p95: pct(0.95),
        max: *maxima.last().unwrap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_bipartite_choices;

    fn kind() -> OrderingKind {
        OrderingKind::FullPseudorandom
    }

    #[test]
    fn lonely_ball_takes_lowest_bin() {
        let bc = BipartiteChoices::new(4, 2, vec![vec![3, 1]]).unwrap();
        let a = assign_query(&bc, 0, DecisionRule::LeastLoaded, &Seed::from_u64(0), kind(), 10).unwrap();
        assert_eq!(a.bin, 1);
        assert!(!a.failed);
    }

    #[test]
    fn two_balls_sharing_both_bins() {
        let bc = BipartiteChoices::new(2, 2, vec![vec![0, 1], vec![0, 1]]).unwrap();
        for s in 0..10 {
            let seed = Seed::from_u64(s);
            let lca = BallsBinsLca::new(&bc, DecisionRule::LeastLoaded, &seed, kind(), 10).unwrap();
            let first = if lca.rank(0) < lca.rank(1) { 0 } else { 1 };
            assert_eq!(lca.assign_query(first).unwrap().bin, 0);
            assert_eq!(lca.assign_query(1 - first).unwrap().bin, 1);
        }
    }

    #[test]
    fn zero_cap_fails_into_own_choices() {
        let bc = gen_bipartite_choices(&Seed::from_u64(1), 50, 20, 3, &ChoiceScheme::Uniform).unwrap();
        for ball in 0..50 {
            let a = assign_query(&bc, ball, DecisionRule::LeastLoaded, &Seed::from_u64(2), kind(), 0).unwrap();
            assert!(a.failed);
            assert!(bc.choices(ball).contains(&a.bin));
        }
    }

    #[test]
    fn empty_and_single_choice_instances() {
        let bc = BipartiteChoices::new(3, 1, vec![]).unwrap();
        let (a, p) = assign_all(&bc, DecisionRule::LeastLoaded, &Seed::from_u64(0), kind(), 5).unwrap();
        assert!(a.is_empty());
        assert_eq!(p.max_load, 0);
        let bc = gen_bipartite_choices(&Seed::from_u64(3), 100, 10, 1, &ChoiceScheme::Uniform).unwrap();
        let (a, _) = assign_all(&bc, DecisionRule::LeastLoaded, &Seed::from_u64(0), kind(), 1000).unwrap();
        assert!(a.iter().all(|x| x.bin == bc.choices(x.ball)[0]));
    }

    #[test]
    fn always_go_left_breaks_ties_leftward() {
        let bc = BipartiteChoices::new(4, 2, vec![vec![1, 2]]).unwrap().with_groups().unwrap();
        let a = assign_query(&bc, 0, DecisionRule::AlwaysGoLeft, &Seed::from_u64(0), kind(), 5).unwrap();
        assert_eq!(a.bin, 1);
        // Leftmost group wins even when its bin id is larger.
        let bc = BipartiteChoices::new(4, 2, vec![vec![1, 0]]).unwrap();
        assert_eq!(DecisionRule::AlwaysGoLeft.choose(&bc, 0, |_| 0), 1);
        assert_eq!(DecisionRule::LeastLoaded.choose(&bc, 0, |_| 0), 0);
    }

    #[test]
    fn rules_require_metadata() {
        let bc = BipartiteChoices::new(4, 2, vec![vec![1, 2]]).unwrap();
        assert!(BallsBinsLca::new(&bc, DecisionRule::AlwaysGoLeft, &Seed::from_u64(0), kind(), 5).is_err());
        assert!(BallsBinsLca::new(&bc, DecisionRule::CapacityWeighted, &Seed::from_u64(0), kind(), 5).is_err());
    }

    #[test]
    fn capacity_weighted_prefers_room() {
        let bc = BipartiteChoices::new(2, 2, vec![vec![0, 1]; 4])
            .unwrap()
            .with_capacities(vec![1, 3])
            .unwrap();
        // Loads 1 and 2: relative 1/1 vs 2/3.
        let loads = [1u64, 2];
        assert_eq!(DecisionRule::CapacityWeighted.choose(&bc, 0, |b| loads[b]), 1);
        assert!(relative_load_less(5, 0, 0, 100, 1, 1) == false);
        assert!(relative_load_less(0, 2, 1, 0, 2, 0) == false);
    }

    #[test]
    fn local_equals_global_small() {
        let bc = gen_bipartite_choices(&Seed::from_u64(4), 2000, 2000, 2, &ChoiceScheme::Uniform).unwrap();
        let seed = Seed::from_u64(5);
        let lca = BallsBinsLca::new(&bc, DecisionRule::LeastLoaded, &seed, kind(), 100_000).unwrap();
        let (global, gp) = lca.run_global();
        let (local, lp) = lca.assign_all().unwrap();
        assert_eq!(gp.total(), 2000);
        assert_eq!(gp, lp);
        for (g, l) in global.iter().zip(&local) {
            assert_eq!(g.bin, l.bin);
        }
    }

    #[test]
    fn uniform_capacities_sum_to_balls() {
        assert_eq!(uniform_capacities(7, 3), vec![3, 2, 2]);
        assert_eq!(uniform_capacities(4, 4), vec![1; 4]);
        assert_eq!(uniform_capacities(0, 2), vec![0, 0]);
    }

    #[test]
    fn report_of_single_profile() {
        let p = LoadProfile { loads: vec![1, 3], max_load: 3 };
        let r = max_load_report(&[p]).unwrap();
        assert_eq!((r.min, r.median, r.p95, r.max), (3, 3, 3, 3));
        assert!(max_load_report(&[]).is_none());
    }
}
