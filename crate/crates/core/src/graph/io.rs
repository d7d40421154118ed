//! Line-oriented text format.
//!
//! ```text
//! c optional comment
//! p bpm <n_left> <n_right> <m>
//! e <u> <v> <w>        (m lines, 1-based indices)
//! ```

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use thiserror::Error;

use super::{BipartiteGraph, Edge, GraphError};

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

pub(crate) fn parse_index(tok: Option<&str>, what: &str, line: usize) -> Result<usize, ParseError> {
    let tok = tok.ok_or_else(|| ParseError::new(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| ParseError::new(line, format!("invalid {what} '{tok}'")))
}

pub(crate) fn parse_weight(tok: Option<&str>, line: usize) -> Result<f64, ParseError> {
    let tok = tok.ok_or_else(|| ParseError::new(line, "missing weight"))?;
    match tok.parse::<f64>() {
        Ok(w) if w.is_finite() => Ok(w),
        _ => Err(ParseError::new(line, format!("invalid weight '{tok}'"))),
    }
}

/// Parses a graph from any reader.
pub fn parse<R: Read>(reader: R) -> Result<BipartiteGraph, ParseError> {
    let reader = BufReader::new(reader);
    let mut header: Option<(usize, usize, usize, usize)> = None;
    let mut adjacency: Vec<Vec<Edge>> = Vec::new();
    let mut seen = 0usize;
    let mut last_line = 0;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = line.map_err(|e| ParseError::new(lineno, e.to_string()))?;
        let mut toks = line.split_whitespace();
        let Some(tag) = toks.next() else { continue };
        match tag {
            "c" => continue,
            "p" => {
                if header.is_some() {
                    return Err(ParseError::new(lineno, "duplicate header"));
                }
                if toks.next() != Some("bpm") {
                    return Err(ParseError::new(lineno, "expected 'p bpm <n_left> <n_right> <m>'"));
                }
                let n_left = parse_index(toks.next(), "n_left", lineno)?;
                let n_right = parse_index(toks.next(), "n_right", lineno)?;
                let m = parse_index(toks.next(), "edge count", lineno)?;
                if toks.next().is_some() {
                    return Err(ParseError::new(lineno, "trailing tokens in header"));
                }
                if n_right == 0 {
                    return Err(ParseError::new(lineno, "n_right must be at least 1"));
                }
                adjacency = vec![Vec::new(); n_left];
                header = Some((n_left, n_right, m, lineno));
            }
            "e" => {
                let Some((n_left, n_right, m, _)) = header else {
                    return Err(ParseError::new(lineno, "edge before header"));
                };
                let u = parse_index(toks.next(), "left index", lineno)?;
                let v = parse_index(toks.next(), "right index", lineno)?;
                let w = parse_weight(toks.next(), lineno)?;
                if toks.next().is_some() {
                    return Err(ParseError::new(lineno, "trailing tokens in edge line"));
                }
                if u == 0 || u > n_left {
                    return Err(ParseError::new(
                        lineno,
                        format!("left index {u} out of range 1..={n_left}"),
                    ));
                }
                if v == 0 || v > n_right {
                    return Err(ParseError::new(
                        lineno,
                        format!("right index {v} out of range 1..={n_right}"),
                    ));
                }
                seen += 1;
                if seen > m {
                    return Err(ParseError::new(
                        lineno,
                        format!("more edge lines than the {m} declared"),
                    ));
                }
                let edges = &mut adjacency[u - 1];
                if edges.iter().any(|e| e.right == v - 1) {
                    return Err(ParseError::new(lineno, format!("duplicate edge ({u}, {v})")));
                }
                edges.push(Edge {
                    right: v - 1,
                    weight: w,
                });
            }
            other => {
                return Err(ParseError::new(lineno, format!("unknown line type '{other}'")));
            }
        }
    }

    let Some((_, n_right, m, header_line)) = header else {
        return Err(ParseError::new(last_line.max(1), "missing 'p bpm' header"));
    };
    if seen != m {
        return Err(ParseError::new(
            header_line,
            format!("header declares {m} edges but {seen} found"),
        ));
    }
    BipartiteGraph::new(n_right, adjacency).map_err(|e: GraphError| ParseError::new(header_line, e.to_string()))
}

pub fn parse_str(text: &str) -> Result<BipartiteGraph, ParseError> {
    parse(text.as_bytes())
}

/// Canonical text form: header, then edges sorted by `(u, v)`. Weights use
/// the shortest decimal that round-trips.
pub fn serialize_to_string(graph: &BipartiteGraph) -> String {
    let mut out = String::with_capacity(16 * (graph.edge_count() + 1));
    let _ = writeln!(out, "p bpm {} {} {}", graph.n_left(), graph.n_right(), graph.edge_count());
    for (u, v, w) in graph.edges() {
        let _ = writeln!(out, "e {} {} {}", u + 1, v + 1, w);
    }
    out
}

pub fn serialize(graph: &BipartiteGraph) -> Vec<u8> {
    serialize_to_string(graph).into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        let g = parse_str("p bpm 1 1 1\ne 1 1 5.0\n").unwrap();
        assert_eq!((g.n_left(), g.n_right()), (1, 1));
        assert_eq!(g.weight(0, 0), Some(5.0));
        assert_eq!(serialize_to_string(&g), "p bpm 1 1 1\ne 1 1 5\n");
    }

    #[test]
    fn empty_left_set() {
        let g = parse_str("c nothing on the left\np bpm 0 3 0\n").unwrap();
        assert_eq!(serialize_to_string(&g), "p bpm 0 3 0\n");
    }

    #[test]
    fn canonicalizes_edge_order() {
        let text = "c x\np bpm 2 2 3\ne 2 2 0.1\ne 1 2 3\n\ne 1 1 -2.5e0\n";
        let canon = serialize_to_string(&parse_str(text).unwrap());
        assert_eq!(canon, "p bpm 2 2 3\ne 1 1 -2.5\ne 1 2 3\ne 2 2 0.1\n");
        assert_eq!(serialize_to_string(&parse_str(&canon).unwrap()), canon);
    }

    #[test]
    fn weights_round_trip_exactly() {
        let w = 0.1f64 + 0.2;
        let g = BipartiteGraph::from_edges(1, 1, [(0, 0, w)]).unwrap();
        let back = parse_str(&serialize_to_string(&g)).unwrap();
        assert_eq!(back.weight(0, 0).unwrap().to_bits(), w.to_bits());
    }

    fn err(text: &str) -> ParseError {
        parse_str(text).unwrap_err()
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = err("p bpm 1 1 1\ne 1 2 5.0\n");
        assert_eq!(e.line, 2);
        assert!(e.message.contains("right index 2"));

        let e = err("c hi\np bpm 2 2 3\ne 1 1 1\ne 2 2 1\n");
        assert_eq!(e.line, 2);
        assert!(e.message.contains("declares 3 edges but 2"));

        assert_eq!(err("p bpm 1 2 2\ne 1 1 1\ne 1 1 2\n").line, 3);
        assert_eq!(err("e 1 1 1\n").line, 1);
        assert_eq!(err("p bpm 1 1 0\np bpm 1 1 0\n").line, 2);
        assert_eq!(err("p bpm 1 1 1\ne 1 1 nan\n").line, 2);
        assert_eq!(err("p bpm 1 1 1\ne 0 1 1\n").line, 2);
        assert_eq!(err("p bpm 1 1 1\nx\n").line, 2);
        assert_eq!(err("p bpm 1 0 0\n").line, 1);
        assert_eq!(err("p bpm 1 1 0\ne 1 1 1\n").line, 2);
        assert!(err("").message.contains("missing"));
    }
}
