//! Text formats for graphs, measures and signals.
//!
//! Graph file: first line `n m`, then `m` lines `u v w` with 0-based
//! vertices and the rate `w(u, v)`. A pair given in one direction only is
//! completed by detailed balance. Measure and signal files hold one number
//! per line. Blank lines and lines starting with `#` are ignored.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, line: usize, what: &str) -> Result<T> {
    let field = field.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} `{field}`"),
    })
}

/// Parses a graph file; `mu` is the optional measure.
pub fn parse_graph(text: &str, mu: Option<&[f64]>) -> Result<WeightedGraph> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty graph file".into(),
    })?;
    let mut parts = header.split_whitespace();
    let n: usize = parse_field(parts.next(), line, "vertex count")?;
    let m: usize = parse_field(parts.next(), line, "edge count")?;
    if parts.next().is_some() {
        return Err(Error::Parse {
            line,
            message: "header must be `n m`".into(),
        });
    }
    let mut edges = Vec::with_capacity(m);
    for (line, l) in lines {
        let mut parts = l.split_whitespace();
        let u: usize = parse_field(parts.next(), line, "source vertex")?;
        let v: usize = parse_field(parts.next(), line, "target vertex")?;
        let w: f64 = parse_field(parts.next(), line, "rate")?;
        if parts.next().is_some() {
            return Err(Error::Parse {
                line,
                message: "edge line must be `u v w`".into(),
            });
        }
        edges.push((u, v, w));
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: 1,
            message: format!("header announces {m} edges, found {}", edges.len()),
        });
    }
    if let Some(mu) = mu {
        if mu.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: mu.len(),
            });
        }
    }
    WeightedGraph::from_edges(n, &edges, mu)
}

/// Writes a graph; symmetric pairs are written once, others in both directions.
pub fn write_graph(g: &WeightedGraph) -> String {
    let mut lines = Vec::new();
    for (x, y, r) in g.edges() {
        if x < y || g.rate(y, x) != r {
            lines.push(format!("{x} {y} {r}"));
        }
    }
    format!("{} {}\n{}\n", g.n(), lines.len(), lines.join("\n"))
}

/// Writes the measure of a graph, one value per line.
pub fn write_measure(g: &WeightedGraph) -> String {
    write_vector(g.mu())
}

/// Parses one number per line; checks the length when `expected` is given.
pub fn parse_vector(text: &str, expected: Option<usize>) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        let v: f64 = parse_field(Some(l), line, "value")?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("non-finite value `{l}`"),
            });
        }
        out.push(v);
    }
    if let Some(n) = expected {
        if out.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: out.len(),
            });
        }
    }
    Ok(out)
}

pub fn write_vector(v: &[f64]) -> String {
    let mut s = String::with_capacity(v.len() * 20);
    for x in v {
        s.push_str(&format!("{x}\n"));
    }
    s
}

/// Reads a graph file and an optional measure file.
pub fn read_graph(path: &Path, mu_path: Option<&Path>) -> Result<WeightedGraph> {
    let mu = mu_path.map(|p| fs::read_to_string(p).map_err(Error::from).and_then(|t| parse_vector(&t, None))).transpose()?;
    parse_graph(&fs::read_to_string(path)?, mu.as_deref())
}

pub fn read_vector(path: &Path, expected: Option<usize>) -> Result<Vec<f64>> {
    parse_vector(&fs::read_to_string(path)?, expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip_symmetric() {
        let g = WeightedGraph::from_edges(4, &[(0, 1, 1.5), (1, 2, 0.25), (2, 3, 1.0), (3, 0, 2.0)], None).unwrap();
        let text = write_graph(&g);
        assert!(text.starts_with("4 4\n"));
        let back = parse_graph(&text, None).unwrap();
        assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn graph_round_trip_with_measure() {
        let mu = [0.2, 0.3, 0.5];
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.5), (1, 2, 0.5)], Some(&mu)).unwrap();
        let text = write_graph(&g);
        let mu_back = parse_vector(&write_measure(&g), Some(3)).unwrap();
        let back = parse_graph(&text, Some(&mu_back)).unwrap();
        assert_eq!(back.mu(), g.mu());
        assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_graph("", None), Err(Error::Parse { .. })));
        assert!(matches!(parse_graph("2 1\n0 1\n", None), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_graph("2 2\n0 1 1\n", None), Err(Error::Parse { .. })));
        assert!(matches!(parse_graph("3 1\n0 1 1\n", None), Err(Error::Disconnected { .. })));
        assert!(matches!(parse_vector("1\nx\n", None), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_vector("1\n2\n", Some(3)), Err(Error::DimensionMismatch { .. })));
        let g = parse_graph("# comment\n2 1\n\n0 1 2.5\n", None).unwrap();
        assert_eq!(g.rate(1, 0), 2.5);
    }
}
