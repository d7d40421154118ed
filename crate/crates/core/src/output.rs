//! Text forms of solver output.
//!
//! Matching files:
//!
//! ```text
//! m <u> <v> <w>     matched edge, ascending u
//! d <u>             discarded left vertex
//! s weight <total> matched <count> discarded <count> moves <P>
//! ```
//!
//! Trace files carry one `t` line per move:
//! `t <p> <u> <v> <w> <label_before> <label_after> <displaced|-> <locked 0|1>`.

use std::fmt::Write as _;

use crate::auction::{Matching, MoveRecord, SolveResult};
use crate::graph::io::{parse_index, parse_weight};
use crate::graph::{BipartiteGraph, ParseError};
use crate::oracle::ExactResult;

pub fn format_matching(graph: &BipartiteGraph, result: &SolveResult) -> String {
    let mut out = String::new();
    for (u, v) in result.matching.pairs() {
        let w = graph.weight(u, v).expect("matched pairs are edges");
        let _ = writeln!(out, "m {} {} {}", u + 1, v + 1, w);
    }
    for &u in &result.discarded {
        let _ = writeln!(out, "d {}", u + 1);
    }
    let _ = writeln!(
        out,
        "s weight {} matched {} discarded {} moves {}",
        result.total_weight,
        result.matched(),
        result.discarded.len(),
        result.moves
    );
    out
}

pub fn format_exact(graph: &BipartiteGraph, result: &ExactResult) -> String {
    let mut out = String::new();
    for (u, v) in result.matching.pairs() {
        let w = graph.weight(u, v).expect("matched pairs are edges");
        let _ = writeln!(out, "m {} {} {}", u + 1, v + 1, w);
    }
    let _ = writeln!(
        out,
        "s optimum {} cardinality {}",
        result.optimum_weight, result.cardinality
    );
    out
}

pub fn format_trace(trace: &[MoveRecord]) -> String {
    let mut out = String::with_capacity(48 * trace.len());
    for r in trace {
        let displaced = r.displaced.map_or_else(|| "-".to_string(), |y| (y + 1).to_string());
        let _ = writeln!(
            out,
            "t {} {} {} {} {} {} {} {}",
            r.index,
            r.left + 1,
            r.right + 1,
            r.weight,
            r.label_before,
            r.label_after,
            displaced,
            u8::from(r.locked)
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub weight: f64,
    pub matched: usize,
    pub discarded: usize,
    pub moves: u64,
}

/// Parsed matching file. Indices are 0-based.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchingFile {
    pub pairs: Vec<(usize, usize, f64)>,
    pub discarded: Vec<usize>,
    pub summary: Option<Summary>,
}

fn one_based(tok: Option<&str>, what: &str, line: usize) -> Result<usize, ParseError> {
    match parse_index(tok, what, line)? {
        0 => Err(ParseError::new(line, format!("{what} must be 1-based"))),
        i => Ok(i - 1),
    }
}

/// Parses a matching file. Comment lines and audit verdict lines
/// (`ok …`, `violation …`, `skip …`) are ignored.
pub fn parse_matching(text: &str) -> Result<MatchingFile, ParseError> {
    let mut file = MatchingFile::default();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let mut toks = line.split_whitespace();
        match toks.next() {
            None | Some("c" | "ok" | "violation" | "skip") => {}
            Some("m") => {
                let u = one_based(toks.next(), "left index", lineno)?;
                let v = one_based(toks.next(), "right index", lineno)?;
                let w = parse_weight(toks.next(), lineno)?;
                file.pairs.push((u, v, w));
            }
            Some("d") => file.discarded.push(one_based(toks.next(), "left index", lineno)?),
            Some("s") => {
                let mut field = |name: &str| -> Result<Option<&str>, ParseError> {
                    match toks.next() {
                        Some(t) if t == name => Ok(toks.next()),
                        _ => Err(ParseError::new(lineno, format!("expected '{name}' in summary"))),
                    }
                };
                let weight = parse_weight(field("weight")?, lineno)?;
                let matched = parse_index(field("matched")?, "matched count", lineno)?;
                let discarded = parse_index(field("discarded")?, "discarded count", lineno)?;
                let moves = parse_index(field("moves")?, "move count", lineno)? as u64;
                file.summary = Some(Summary {
                    weight,
                    matched,
                    discarded,
                    moves,
                });
            }
            Some(other) => {
                return Err(ParseError::new(lineno, format!("unknown line type '{other}'")));
            }
        }
    }
    Ok(file)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub weight: f64,
    pub matched: usize,
    pub problems: Vec<String>,
}

impl Verification {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Static checks of a matching file against its graph: every pair is an
/// edge with the stated weight, no vertex is used twice, discarded vertices
/// are unmatched, and the summary agrees with the recomputed totals.
pub fn verify_matching(graph: &BipartiteGraph, file: &MatchingFile) -> Verification {
    let mut problems = Vec::new();
    let mut valid = Vec::new();
    for &(u, v, w) in &file.pairs {
        if u >= graph.n_left() || v >= graph.n_right() {
            problems.push(format!("pair ({}, {}) out of range", u + 1, v + 1));
            continue;
        }
        match graph.weight(u, v) {
            None => problems.push(format!("({}, {}) is not an edge", u + 1, v + 1)),
            Some(gw) if gw != w => problems.push(format!(
                "({}, {}) has weight {} in the graph, {} in the matching",
                u + 1,
                v + 1,
                gw,
                w
            )),
            Some(_) => valid.push((u, v)),
        }
    }
    let matching = match Matching::from_pairs(graph.n_left(), graph.n_right(), valid) {
        Ok(m) => m,
        Err(e) => {
            problems.push(e);
            Matching::new(graph.n_left(), graph.n_right())
        }
    };
    for &u in &file.discarded {
        if u >= graph.n_left() {
            problems.push(format!("discarded vertex {} out of range", u + 1));
        } else if matching.right_of(u).is_some() {
            problems.push(format!("discarded vertex {} is matched", u + 1));
        }
    }
    let weight = matching.weight(graph).unwrap_or(f64::NAN);
    if let Some(s) = &file.summary {
        let tol = 1e-9 * (1.0 + weight.abs());
        if (s.weight - weight).abs() > tol {
            problems.push(format!("summary weight {} but edges sum to {}", s.weight, weight));
        }
        if s.matched != matching.len() {
            problems.push(format!("summary says {} matched, found {}", s.matched, matching.len()));
        }
        if s.discarded != file.discarded.len() {
            problems.push(format!(
                "summary says {} discarded, found {}",
                s.discarded,
                file.discarded.len()
            ));
        }
    }
    Verification {
        weight,
        matched: matching.len(),
        problems,
    }
}
