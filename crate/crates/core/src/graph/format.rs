//! Line-oriented ASCII instance formats. `#` starts a comment; blank lines
//! are ignored.
//!
//! ```text
//! graph n=<n>                      hypergraph m=<m> k=<k>
//! <u> <v>                          <e> <v1> ... <vk>
//!
//! p cnf <vars> <clauses>           bipartite balls=<n> bins=<m> d=<d>
//! <lit> ... <lit> 0                <ball> <bin1> ... <bind>
//! ```
//!
//! CNF follows DIMACS: `c` lines are comments too, variables are 1-based and
//! negative literals are negated. Hyperedge and ball ids must appear in order.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{BipartiteChoices, CnfFormula, Hypergraph, LocalGraph, Literal};
use crate::error::{LcaError, Result};

fn parse_err(line: usize, message: impl Into<String>) -> LcaError {
    LcaError::Parse {
        line,
        message: message.into(),
    }
}

/// Non-empty, comment-stripped lines with their 1-based line numbers.
fn records(text: &str, dimacs: bool) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(move |(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (dimacs && (line == "c" || line.starts_with("c "))) {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

fn header<'a>(
    line_no: usize,
    line: &'a str,
    kind: &str,
    keys: &[&str],
) -> Result<HashMap<&'a str, usize>> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(kind) {
        return Err(parse_err(line_no, format!("expected '{kind}' header")));
    }
    let mut fields = HashMap::new();
    for part in parts {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, format!("malformed header field '{part}'")))?;
        let value = value
            .parse()
            .map_err(|_| parse_err(line_no, format!("'{key}' is not a non-negative integer")))?;
        fields.insert(key, value);
    }
    for key in keys {
        if !fields.contains_key(key) {
            return Err(parse_err(line_no, format!("header missing '{key}='")));
        }
    }
    Ok(fields)
}

fn numbers<T: std::str::FromStr>(line_no: usize, line: &str) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(line_no, format!("'{t}' is not a valid integer")))
        })
        .collect()
}

pub fn parse_graph(text: &str) -> Result<LocalGraph> {
    let mut lines = records(text, false);
    let (no, first) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
    let n = header(no, first, "graph", &["n"])?["n"];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (no, line) in lines {
        let nums: Vec<usize> = numbers(no, line)?;
        let [u, v] = nums[..] else {
            return Err(parse_err(no, "expected 'u v'"));
        };
        if u >= n || v >= n {
            return Err(parse_err(no, format!("vertex out of range 0..{n}")));
        }
        if u == v {
            return Err(parse_err(no, "self-loop"));
        }
        if adj[u].contains(&v) {
            return Err(parse_err(no, format!("duplicate edge {u} {v}")));
        }
        adj[u].push(v);
        adj[v].push(u);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    Ok(LocalGraph::from_sorted_adjacency(adj))
}

pub fn write_graph(g: &LocalGraph) -> String {
    let mut out = format!("graph n={}\n", g.n());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn parse_hypergraph(text: &str) -> Result<Hypergraph> {
    let mut lines = records(text, false);
    let (no, first) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
    let h = header(no, first, "hypergraph", &["m", "k"])?;
    let (m, k) = (h["m"], h["k"]);
    let mut edges = Vec::new();
    for (no, line) in lines {
        let nums: Vec<usize> = numbers(no, line)?;
        if nums.first() != Some(&edges.len()) {
            return Err(parse_err(no, format!("expected edge id {}", edges.len())));
        }
        let mut vars = nums[1..].to_vec();
        if vars.len() != k {
            return Err(parse_err(no, format!("edge has {} vertices, expected {k}", vars.len())));
        }
        if let Some(&v) = vars.iter().find(|&&v| v >= m) {
            return Err(parse_err(no, format!("vertex {v} out of range 0..{m}")));
        }
        vars.sort_unstable();
        if vars.windows(2).any(|w| w[0] == w[1]) {
            return Err(parse_err(no, "edge repeats a vertex"));
        }
        edges.push(vars);
    }
    Hypergraph::new(m, edges)
}

pub fn write_hypergraph(h: &Hypergraph) -> String {
    let mut out = format!("hypergraph m={} k={}\n", h.m(), h.k());
    for (i, e) in h.edges().iter().enumerate() {
        let _ = write!(out, "{i}");
        for v in e {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut lines = records(text, true);
    let (no, first) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
    let parts: Vec<&str> = first.split_whitespace().collect();
    let (vars, clause_count) = match parts[..] {
        ["p", "cnf", v, c] => (
            v.parse::<usize>().map_err(|_| parse_err(no, "bad variable count"))?,
            c.parse::<usize>().map_err(|_| parse_err(no, "bad clause count"))?,
        ),
        _ => return Err(parse_err(no, "expected 'p cnf <vars> <clauses>'")),
    };
    let mut clauses = Vec::with_capacity(clause_count);
    let mut current: Vec<Literal> = Vec::new();
    let mut last_line = no;
    for (no, line) in lines {
        last_line = no;
        for lit in numbers::<i64>(no, line)? {
            if lit == 0 {
                let mut seen: Vec<usize> = current.iter().map(|l| l.var).collect();
                seen.sort_unstable();
                if seen.windows(2).any(|w| w[0] == w[1]) {
                    return Err(parse_err(no, "clause repeats a variable"));
                }
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            let var = lit.unsigned_abs() as usize - 1;
            if var >= vars {
                return Err(parse_err(no, format!("variable {} exceeds declared {vars}", var + 1)));
            }
            current.push(Literal {
                var,
                positive: lit > 0,
            });
        }
    }
    if !current.is_empty() {
        return Err(parse_err(last_line, "last clause not terminated by 0"));
    }
    if clauses.len() != clause_count {
        return Err(parse_err(
            last_line,
            format!("declared {clause_count} clauses, found {}", clauses.len()),
        ));
    }
    if let Some(k) = clauses.first().map(Vec::len) {
        if let Some(i) = clauses.iter().position(|c| c.len() != k) {
            return Err(parse_err(last_line, format!("clause {i} is not of width {k}")));
        }
    }
    CnfFormula::new(vars, clauses)
}

pub fn write_dimacs(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.m(), f.n());
    for c in f.clauses() {
        for l in c {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}

pub fn parse_bipartite(text: &str) -> Result<BipartiteChoices> {
    let mut lines = records(text, false);
    let (no, first) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
    let h = header(no, first, "bipartite", &["balls", "bins", "d"])?;
    let (n, m, d) = (h["balls"], h["bins"], h["d"]);
    let mut choices = Vec::with_capacity(n);
    let mut last_line = no;
    for (no, line) in lines {
        last_line = no;
        let nums: Vec<usize> = numbers(no, line)?;
        if nums.first() != Some(&choices.len()) {
            return Err(parse_err(no, format!("expected ball id {}", choices.len())));
        }
        if nums.len() != d + 1 {
            return Err(parse_err(no, format!("expected {d} bins")));
        }
        if let Some(&b) = nums[1..].iter().find(|&&b| b >= m) {
            return Err(parse_err(no, format!("bin {b} out of range 0..{m}")));
        }
        choices.push(nums[1..].to_vec());
    }
    if choices.len() != n {
        return Err(parse_err(
            last_line,
            format!("declared {n} balls, found {}", choices.len()),
        ));
    }
    BipartiteChoices::new(m, d, choices)
}

pub fn write_bipartite(bc: &BipartiteChoices) -> String {
    let mut out = format!(
        "bipartite balls={} bins={} d={}\n",
        bc.n_balls(),
        bc.m_bins(),
        bc.d()
    );
    for ball in 0..bc.n_balls() {
        let _ = write!(out, "{ball}");
        for b in bc.choices(ball) {
            let _ = write!(out, " {b}");
        }
        out.push('\n');
    }
    out
}

/// One non-negative integer capacity per line.
pub fn parse_capacities(text: &str) -> Result<Vec<u64>> {
    records(text, false)
        .map(|(no, line)| {
            line.parse()
                .map_err(|_| parse_err(no, format!("'{line}' is not a capacity")))
        })
        .collect()
}
