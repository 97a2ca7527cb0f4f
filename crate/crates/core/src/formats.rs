//! Text formats: DIMACS CNF, the `cspneg` listing of forbidden tuples, and a
//! JSON encoding of decompositions.
//!
//! A `cspneg` file forbidding `(x1, x2) = (0, 0)` and nothing on `x3`:
//!
//! ```text
//! c comment lines start with c
//! p cspneg 3 2
//! s 2 1 2 1
//! 0 0
//! s 1 3 0
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counter::{cnf_to_cspneg, CountError, CspNegInstance, Relation};
use crate::hypergraph::{
    is_disjoint_branches, is_join_tree, Decomposition, EdgeId, Hypergraph, Vertex,
};

/// Largest declared variable count accepted by the parsers.
pub const MAX_VARS: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    Cnf,
    CspNeg,
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputKind::Cnf => "cnf",
            InputKind::CspNeg => "cspneg",
        })
    }
}

/// One clause or constraint as written, with 1-based variable numbers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Record {
    Clause {
        line: usize,
        literals: Vec<i64>,
    },
    Constraint {
        line: usize,
        scope: Vec<usize>,
        forbidden: Vec<Vec<bool>>,
    },
}

impl Record {
    pub fn line(&self) -> usize {
        match self {
            Record::Clause { line, .. } | Record::Constraint { line, .. } => *line,
        }
    }
}

/// Normalizations applied while parsing, by source line.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub duplicate_literals: Vec<usize>,
    pub tautologies: Vec<usize>,
    pub empty_clauses: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedInput {
    pub kind: InputKind,
    pub num_vars: usize,
    pub records: Vec<Record>,
    pub report: ParseReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("input is not valid UTF-8")]
    Utf8,
    #[error("missing `p` header")]
    MissingHeader,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("duplicate header")]
    DuplicateHeader,
    #[error("{declared} variables exceed the limit of {MAX_VARS}")]
    TooManyVariables { declared: usize },
    #[error("invalid token `{0}`")]
    InvalidToken(String),
    #[error("variable index {index} out of range 1..={num_vars}")]
    IndexOutOfRange { index: i64, num_vars: usize },
    #[error("header declares {declared} records, found {found}")]
    CountMismatch { declared: usize, found: usize },
    #[error("data after the last declared record")]
    TrailingGarbage,
    #[error("clause not terminated by 0")]
    UnterminatedClause,
    #[error("expected {expected} values, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("constraint arity must be positive")]
    ZeroArity,
    #[error("variable {0} repeated in scope")]
    RepeatedVariable(usize),
    #[error("non-binary value `{0}`")]
    NonBinaryValue(String),
    #[error("constraint declares {declared} tuples, found {found}")]
    TupleCountMismatch { declared: usize, found: usize },
    #[error("expected a constraint line starting with `s`")]
    ExpectedConstraint,
}

/// A diagnostic located at a 1-based source line (0 when no line applies).
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn err<T>(line: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { line, kind })
}

/// Decodes input bytes, locating the first invalid sequence.
pub fn decode_utf8(bytes: &[u8]) -> Result<&str, ParseError> {
    std::str::from_utf8(bytes).map_err(|e| {
        let line = 1 + bytes[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count();
        ParseError {
            line,
            kind: ParseErrorKind::Utf8,
        }
    })
}

/// Non-blank, non-comment lines with their 1-based numbers. Handles CRLF.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.first() {
            None => None,
            Some(t) if t.starts_with('c') => None,
            Some(_) => Some((i + 1, toks)),
        }
    })
}

fn parse_count(line: usize, tok: &str) -> Result<usize, ParseError> {
    tok.parse::<usize>()
        .or_else(|_| err(line, ParseErrorKind::InvalidToken(tok.to_string())))
}

fn parse_header(line: usize, toks: &[&str], format: &str) -> Result<(usize, usize), ParseError> {
    if toks.len() != 4 || toks[0] != "p" || toks[1] != format {
        return err(
            line,
            ParseErrorKind::BadHeader(format!("expected `p {format} <vars> <count>`")),
        );
    }
    let n = parse_count(line, toks[2])?;
    let m = parse_count(line, toks[3])?;
    if n > MAX_VARS {
        return err(line, ParseErrorKind::TooManyVariables { declared: n });
    }
    Ok((n, m))
}

/// Finds the header among the content lines. Returns its position.
fn find_header(
    lines: &[(usize, Vec<&str>)],
    format: &str,
) -> Result<(usize, usize, usize), ParseError> {
    match lines.first() {
        None => err(0, ParseErrorKind::MissingHeader),
        Some((line, toks)) if toks[0] != "p" => err(*line, ParseErrorKind::MissingHeader),
        Some((line, toks)) => {
            let (n, m) = parse_header(*line, toks, format)?;
            Ok((*line, n, m))
        }
    }
}

/// Parses DIMACS CNF: a `p cnf <n> <m>` header, then exactly `m` clauses of
/// signed variable indices, each terminated by `0`. Clauses may span lines.
pub fn parse_dimacs(text: &str) -> Result<ParsedInput, ParseError> {
    let lines: Vec<_> = content_lines(text).collect();
    let (header_line, n, m) = find_header(&lines, "cnf")?;
    let mut records = Vec::new();
    let mut report = ParseReport::default();
    let mut current: Vec<i64> = Vec::new();
    let mut start = 0;
    let mut last_line = header_line;
    for (line, toks) in &lines[1..] {
        last_line = *line;
        if toks[0] == "p" {
            return err(*line, ParseErrorKind::DuplicateHeader);
        }
        for tok in toks {
            let lit: i64 = tok
                .parse()
                .or_else(|_| err(*line, ParseErrorKind::InvalidToken(tok.to_string())))?;
            if records.len() == m {
                return err(*line, ParseErrorKind::TrailingGarbage);
            }
            if current.is_empty() {
                start = *line;
            }
            if lit == 0 {
                let clause = std::mem::take(&mut current);
                note_clause(&clause, start, &mut report);
                records.push(Record::Clause {
                    line: start,
                    literals: clause,
                });
                continue;
            }
            if lit.unsigned_abs() > n as u64 {
                return err(
                    *line,
                    ParseErrorKind::IndexOutOfRange {
                        index: lit,
                        num_vars: n,
                    },
                );
            }
            current.push(lit);
        }
    }
    if !current.is_empty() {
        return err(start, ParseErrorKind::UnterminatedClause);
    }
    if records.len() != m {
        return err(
            last_line,
            ParseErrorKind::CountMismatch {
                declared: m,
                found: records.len(),
            },
        );
    }
    Ok(ParsedInput {
        kind: InputKind::Cnf,
        num_vars: n,
        records,
        report,
    })
}

fn note_clause(clause: &[i64], line: usize, report: &mut ParseReport) {
    if clause.is_empty() {
        report.empty_clauses.push(line);
        return;
    }
    let distinct: BTreeSet<i64> = clause.iter().copied().collect();
    if distinct.len() < clause.len() {
        report.duplicate_literals.push(line);
    }
    if distinct.iter().any(|l| distinct.contains(&-l)) {
        report.tautologies.push(line);
    }
}

/// Parses the `cspneg` format: a `p cspneg <n> <m>` header, then `m`
/// constraints, each a line `s <arity> <var>... <t>` followed by `t` lines of
/// `arity` values in {0, 1} listing forbidden tuples.
pub fn parse_cspneg(text: &str) -> Result<ParsedInput, ParseError> {
    let lines: Vec<_> = content_lines(text).collect();
    let (header_line, n, m) = find_header(&lines, "cspneg")?;
    let mut records = Vec::new();
    let mut rest = lines[1..].iter().peekable();
    while let Some((line, toks)) = rest.next() {
        let line = *line;
        if toks[0] == "p" {
            return err(line, ParseErrorKind::DuplicateHeader);
        }
        if toks[0] != "s" {
            return err(line, ParseErrorKind::ExpectedConstraint);
        }
        if records.len() == m {
            return err(line, ParseErrorKind::TrailingGarbage);
        }
        let arity = match toks.get(1) {
            Some(t) => parse_count(line, t)?,
            None => {
                return err(
                    line,
                    ParseErrorKind::ArityMismatch {
                        expected: 1,
                        found: 0,
                    },
                )
            }
        };
        if arity == 0 {
            return err(line, ParseErrorKind::ZeroArity);
        }
        let found = toks.len() - 2;
        if found != arity + 1 {
            return err(
                line,
                ParseErrorKind::ArityMismatch {
                    expected: arity + 1,
                    found,
                },
            );
        }
        let mut scope = Vec::with_capacity(arity);
        for tok in &toks[2..2 + arity] {
            let v = parse_count(line, tok)?;
            if v == 0 || v > n {
                return err(
                    line,
                    ParseErrorKind::IndexOutOfRange {
                        index: v as i64,
                        num_vars: n,
                    },
                );
            }
            if scope.contains(&v) {
                return err(line, ParseErrorKind::RepeatedVariable(v));
            }
            scope.push(v);
        }
        let t = parse_count(line, toks[arity + 2])?;
        let mut forbidden = Vec::new();
        while forbidden.len() < t {
            let Some((tline, ttoks)) = rest.next_if(|(_, tt)| tt[0] != "s" && tt[0] != "p") else {
                let at = rest.peek().map_or(line, |(l, _)| *l);
                return err(
                    at,
                    ParseErrorKind::TupleCountMismatch {
                        declared: t,
                        found: forbidden.len(),
                    },
                );
            };
            if ttoks.len() != arity {
                return err(
                    *tline,
                    ParseErrorKind::ArityMismatch {
                        expected: arity,
                        found: ttoks.len(),
                    },
                );
            }
            let tuple = ttoks
                .iter()
                .map(|&v| match v {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => err(*tline, ParseErrorKind::NonBinaryValue(other.to_string())),
                })
                .collect::<Result<Vec<bool>, _>>()?;
            forbidden.push(tuple);
        }
        records.push(Record::Constraint {
            line,
            scope,
            forbidden,
        });
    }
    if records.len() != m {
        let at = lines.last().map_or(header_line, |(l, _)| *l);
        return err(
            at,
            ParseErrorKind::CountMismatch {
                declared: m,
                found: records.len(),
            },
        );
    }
    Ok(ParsedInput {
        kind: InputKind::CspNeg,
        num_vars: n,
        records,
        report: ParseReport::default(),
    })
}

/// Dispatches on the header's format name.
pub fn parse_input(text: &str) -> Result<ParsedInput, ParseError> {
    let header = content_lines(text).next();
    match header {
        Some((_, toks)) if toks.len() >= 2 && toks[0] == "p" && toks[1] == "cspneg" => {
            parse_cspneg(text)
        }
        Some((_, toks)) if toks.len() >= 2 && toks[0] == "p" && toks[1] == "cnf" => {
            parse_dimacs(text)
        }
        Some((line, toks)) if toks[0] == "p" => err(
            line,
            ParseErrorKind::BadHeader("unknown format, expected `cnf` or `cspneg`".into()),
        ),
        Some((line, _)) => err(line, ParseErrorKind::MissingHeader),
        None => err(0, ParseErrorKind::MissingHeader),
    }
}

impl ParsedInput {
    /// The instance in negative representation over vertices `0..num_vars`.
    pub fn to_instance(&self) -> Result<CspNegInstance, CountError> {
        match self.kind {
            InputKind::Cnf => {
                let clauses: Vec<Vec<i64>> = self
                    .records
                    .iter()
                    .filter_map(|r| match r {
                        Record::Clause { literals, .. } => Some(literals.clone()),
                        Record::Constraint { .. } => None,
                    })
                    .collect();
                cnf_to_cspneg(&clauses, self.num_vars)
            }
            InputKind::CspNeg => {
                let mut constraints = Vec::with_capacity(self.records.len());
                for r in &self.records {
                    if let Record::Constraint {
                        scope, forbidden, ..
                    } = r
                    {
                        let scope = scope.iter().map(|v| v - 1).collect();
                        constraints.push(Relation::new(scope, forbidden.clone())?);
                    }
                }
                CspNegInstance::new(self.num_vars, constraints)
            }
        }
    }
}

/// Writes the instance as DIMACS CNF: one clause per forbidden tuple. A
/// constraint forbidding nothing becomes a tautological clause on its scope,
/// and the `unsat` flag an empty clause.
pub fn write_dimacs(inst: &CspNegInstance) -> String {
    let mut clauses: Vec<String> = Vec::new();
    for r in &inst.constraints {
        let scope = r.scope();
        if r.is_empty() {
            let mut lits: Vec<String> = scope.iter().map(|v| (v + 1).to_string()).collect();
            lits.push(format!("-{}", scope[0] + 1));
            clauses.push(lits.join(" "));
        }
        for t in r.tuples() {
            let lits: Vec<String> = scope
                .iter()
                .zip(t)
                .map(|(v, &b)| {
                    if b {
                        format!("-{}", v + 1)
                    } else {
                        (v + 1).to_string()
                    }
                })
                .collect();
            clauses.push(lits.join(" "));
        }
    }
    if inst.unsat {
        clauses.push(String::new());
    }
    let mut out = format!("p cnf {} {}\n", inst.num_vars, clauses.len());
    for c in clauses {
        if c.is_empty() {
            out.push_str("0\n");
        } else {
            out.push_str(&c);
            out.push_str(" 0\n");
        }
    }
    out
}

/// Writes the instance in `cspneg` form. The `unsat` flag is written as a
/// constraint forbidding both values of variable 1.
pub fn write_cspneg(inst: &CspNegInstance) -> String {
    let n = if inst.unsat {
        inst.num_vars.max(1)
    } else {
        inst.num_vars
    };
    let m = inst.constraints.len() + usize::from(inst.unsat);
    let mut out = format!("p cspneg {n} {m}\n");
    for r in &inst.constraints {
        let vars: Vec<String> = r.scope().iter().map(|v| (v + 1).to_string()).collect();
        out.push_str(&format!(
            "s {} {} {}\n",
            vars.len(),
            vars.join(" "),
            r.len()
        ));
        for t in r.tuples() {
            let vals: Vec<&str> = t.iter().map(|&b| if b { "1" } else { "0" }).collect();
            out.push_str(&vals.join(" "));
            out.push('\n');
        }
    }
    if inst.unsat {
        out.push_str("s 1 1 2\n0\n1\n");
    }
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecompositionDoc {
    root: usize,
    nodes: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: usize,
    vars: Vec<usize>,
    children: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecompositionError {
    #[error("schema: {0}")]
    Schema(String),
    #[error("validation: {0}")]
    Validation(String),
}

/// Serializes `d` with each node's hyperedge from `h`. Variables are written
/// 1-based; nodes are listed by id with sorted vars and children.
pub fn write_decomposition(
    d: &Decomposition,
    h: &Hypergraph,
) -> Result<String, DecompositionError> {
    let mut nodes = Vec::with_capacity(d.len());
    for n in d.nodes() {
        let vars = h
            .edge(n)
            .map_err(|e| DecompositionError::Schema(e.to_string()))?;
        nodes.push(NodeDoc {
            id: n.0,
            vars: vars.iter().map(|v| v + 1).collect(),
            children: d.children(n).iter().map(|c| c.0).collect(),
        });
    }
    nodes.sort_by_key(|n| n.id);
    // One node per line keeps large trees readable and diffable.
    let lines: Vec<String> = nodes
        .iter()
        .map(|n| serde_json::to_string(n).expect("plain data serializes"))
        .collect();
    Ok(format!(
        "{{\"root\":{},\"nodes\":[\n{}\n]}}\n",
        d.root().0,
        lines.join(",\n")
    ))
}

/// Parses a decomposition document into the hypergraph of its nodes and the
/// tree, then checks it is a disjoint branches decomposition.
pub fn read_decomposition(text: &str) -> Result<(Hypergraph, Decomposition), DecompositionError> {
    let schema = |m: String| DecompositionError::Schema(m);
    let doc: DecompositionDoc = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    let mut edges = Vec::with_capacity(doc.nodes.len());
    let mut children = BTreeMap::new();
    for node in &doc.nodes {
        let id = EdgeId(node.id);
        let mut vars: Vec<Vertex> = Vec::with_capacity(node.vars.len());
        for &v in &node.vars {
            if v == 0 || v > MAX_VARS {
                return Err(schema(format!(
                    "node {}: variable {v} out of range",
                    node.id
                )));
            }
            vars.push(v - 1);
        }
        let distinct: BTreeSet<Vertex> = vars.iter().copied().collect();
        if distinct.len() != vars.len() {
            return Err(schema(format!("node {}: repeated variable", node.id)));
        }
        if children
            .insert(id, node.children.iter().map(|&c| EdgeId(c)).collect())
            .is_some()
        {
            return Err(schema(format!("duplicate node id {}", node.id)));
        }
        edges.push((id, vars));
    }
    let h = Hypergraph::with_ids(edges).map_err(|e| schema(e.to_string()))?;
    let d = Decomposition::from_children(EdgeId(doc.root), children)
        .map_err(|e| schema(e.to_string()))?;
    let valid = is_join_tree(&h, &d)
        .and_then(|jt| Ok(jt && is_disjoint_branches(&h, &d)?))
        .map_err(|e| DecompositionError::Validation(e.to_string()))?;
    if !valid {
        let what = if is_join_tree(&h, &d).unwrap_or(false) {
            "branches are not variable-disjoint"
        } else {
            "not a join tree"
        };
        return Err(DecompositionError::Validation(what.to_string()));
    }
    Ok((h, d))
}
