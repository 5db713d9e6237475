use serde::{Deserialize, Serialize};

use super::NeighborOracle;
use crate::error::{LcaError, Result};

/// Variable/constraint incidence shared by hypergraphs and CNF formulas.
///
/// Vertex lists of a constraint are sorted ascending.
pub trait Incidence {
    fn var_count(&self) -> usize;
    fn constraint_count(&self) -> usize;
    fn constraint_vars(&self, c: usize) -> &[usize];
    fn var_constraints(&self, v: usize) -> &[usize];

    /// Constraints sharing at least one variable with `c`, ascending.
    fn dependency_neighbors(&self, c: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .constraint_vars(c)
            .iter()
            .flat_map(|&v| self.var_constraints(v).iter().copied())
            .filter(|&f| f != c)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn max_dependency_degree(&self) -> usize {
        (0..self.constraint_count())
            .map(|c| self.dependency_neighbors(c).len())
            .max()
            .unwrap_or(0)
    }
}

fn transpose(m: usize, lists: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut incidence = vec![Vec::new(); m];
    for (c, vars) in lists.iter().enumerate() {
        for &v in vars {
            incidence[v].push(c);
        }
    }
    incidence
}

fn check_uniform(m: usize, lists: &[Vec<usize>], what: &str) -> Result<usize> {
    let k = lists.first().map_or(0, Vec::len);
    for (i, vars) in lists.iter().enumerate() {
        if vars.len() != k {
            return Err(LcaError::invalid(format!(
                "{what} {i} has {} vertices, expected {k}",
                vars.len()
            )));
        }
        if vars.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LcaError::invalid(format!("{what} {i} repeats a vertex")));
        }
        if let Some(&v) = vars.last() {
            if v >= m {
                return Err(LcaError::invalid(format!(
                    "{what} {i} uses vertex {v} outside range {m}"
                )));
            }
        }
    }
    Ok(k)
}

/// A k-uniform hypergraph with vertex-to-edge incidence lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    m: usize,
    k: usize,
    edges: Vec<Vec<usize>>,
    incidence: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(m: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let edges: Vec<Vec<usize>> = edges
            .into_iter()
            .map(|mut e| {
                e.sort_unstable();
                e
            })
            .collect();
        let k = check_uniform(m, &edges, "edge")?;
        if !edges.is_empty() && k == 0 {
            return Err(LcaError::invalid("edges must be non-empty"));
        }
        let incidence = transpose(m, &edges);
        Ok(Hypergraph {
            m,
            k,
            edges,
            incidence,
        })
    }

    /// Vertex count.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Edge count.
    pub fn n(&self) -> usize {
        self.edges.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }
}

impl Incidence for Hypergraph {
    fn var_count(&self) -> usize {
        self.m
    }
    fn constraint_count(&self) -> usize {
        self.edges.len()
    }
    fn constraint_vars(&self, c: usize) -> &[usize] {
        &self.edges[c]
    }
    fn var_constraints(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn satisfied_by(&self, value: bool) -> bool {
        value == self.positive
    }

    /// DIMACS integer: `var + 1`, negated for negative literals.
    pub fn to_dimacs(&self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }
}

/// A k-CNF formula; clause literal lists are sorted by variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    m: usize,
    k: usize,
    clauses: Vec<Vec<Literal>>,
    clause_vars: Vec<Vec<usize>>,
    incidence: Vec<Vec<usize>>,
}

impl CnfFormula {
    pub fn new(m: usize, clauses: Vec<Vec<Literal>>) -> Result<Self> {
        let clauses: Vec<Vec<Literal>> = clauses
            .into_iter()
            .map(|mut c| {
                c.sort_unstable_by_key(|l| l.var);
                c
            })
            .collect();
        let clause_vars: Vec<Vec<usize>> = clauses
            .iter()
            .map(|c| c.iter().map(|l| l.var).collect())
            .collect();
        let k = check_uniform(m, &clause_vars, "clause")?;
        if !clauses.is_empty() && k == 0 {
            return Err(LcaError::invalid("clauses must be non-empty"));
        }
        let incidence = transpose(m, &clause_vars);
        Ok(CnfFormula {
            m,
            k,
            clauses,
            clause_vars,
            incidence,
        })
    }

    /// Variable count.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Clause count.
    pub fn n(&self) -> usize {
        self.clauses.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    /// Polarity of `var` inside clause `c`, if present.
    pub fn literal_in(&self, c: usize, var: usize) -> Option<Literal> {
        let i = self.clause_vars[c].binary_search(&var).ok()?;
        Some(self.clauses[c][i])
    }

    /// Independent evaluator: every clause has a satisfied literal.
    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.m
            && self
                .clauses
                .iter()
                .all(|c| c.iter().any(|l| l.satisfied_by(assignment[l.var])))
    }
}

impl Incidence for CnfFormula {
    fn var_count(&self) -> usize {
        self.m
    }
    fn constraint_count(&self) -> usize {
        self.clauses.len()
    }
    fn constraint_vars(&self, c: usize) -> &[usize] {
        &self.clause_vars[c]
    }
    fn var_constraints(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }
}

/// Variables adjacent when they share a constraint.
#[derive(Clone, Copy, Debug)]
pub struct PrimalGraph<'a, I> {
    inner: &'a I,
}

impl<'a, I: Incidence> PrimalGraph<'a, I> {
    pub fn new(inner: &'a I) -> Self {
        PrimalGraph { inner }
    }
}

impl<I: Incidence> NeighborOracle for PrimalGraph<'_, I> {
    fn node_count(&self) -> usize {
        self.inner.var_count()
    }

    fn neighbors_into(&self, v: usize, out: &mut Vec<usize>) {
        out.clear();
        for &c in self.inner.var_constraints(v) {
            out.extend(self.inner.constraint_vars(c).iter().copied().filter(|&w| w != v));
        }
        out.sort_unstable();
        out.dedup();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incidence_is_transpose() {
        let h = Hypergraph::new(5, vec![vec![0, 1, 2], vec![2, 3, 4]]).unwrap();
        assert_eq!(h.var_constraints(2), &[0, 1]);
        assert_eq!(h.var_constraints(4), &[1]);
        assert_eq!(h.dependency_neighbors(0), vec![1]);
        assert_eq!(h.max_dependency_degree(), 1);
    }

    #[test]
    fn non_uniform_rejected() {
        assert!(Hypergraph::new(5, vec![vec![0, 1, 2], vec![3, 4]]).is_err());
        assert!(Hypergraph::new(5, vec![vec![0, 0, 2]]).is_err());
        assert!(Hypergraph::new(3, vec![vec![0, 1, 3]]).is_err());
    }

    #[test]
    fn primal_neighbors() {
        let h = Hypergraph::new(5, vec![vec![0, 1, 2], vec![2, 3, 4]]).unwrap();
        let mut out = Vec::new();
        PrimalGraph::new(&h).neighbors_into(2, &mut out);
        assert_eq!(out, vec![0, 1, 3, 4]);
    }

    #[test]
    fn cnf_evaluator() {
        let lit = |var, positive| Literal { var, positive };
        let f = CnfFormula::new(2, vec![vec![lit(0, true), lit(1, true)]]).unwrap();
        assert!(f.evaluate(&[true, false]));
        assert!(!f.evaluate(&[false, false]));
        assert_eq!(f.literal_in(0, 1), Some(lit(1, true)));
        assert!(CnfFormula::new(2, vec![vec![lit(0, true), lit(0, false)]]).is_err());
    }
}
