//! Plain-text edge lists:
//!
//! ```text
//! # nodes=3
//! 0 1
//! 1 2
//! # sat
//! 2
//! ```

use std::io::{BufRead, Write};

use super::SocialGraph;
use crate::error::ParseError;

pub fn export_edge_list<W: Write>(graph: &SocialGraph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# nodes={}", graph.node_count())?;
    for (u, v) in graph.edges() {
        writeln!(out, "{u} {v}")?;
    }
    writeln!(out, "# sat")?;
    for (i, &s) in graph.sat_flags().iter().enumerate() {
        if s {
            writeln!(out, "{i}")?;
        }
    }
    Ok(())
}

pub fn import_edge_list<R: BufRead>(input: R) -> Result<SocialGraph, ParseError> {
    let mut graph: Option<SocialGraph> = None;
    let mut in_sat = false;
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let err = |reason: String| ParseError::Line { line: lineno, reason };
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(n) = rest.strip_prefix("nodes=") {
                if graph.is_some() {
                    return Err(err("duplicate nodes header".into()));
                }
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad node count `{n}`")))?;
                graph = Some(SocialGraph::empty(n));
            } else if rest == "sat" {
                in_sat = true;
            }
            continue;
        }
        let g = graph.as_mut().ok_or(ParseError::MissingHeader)?;
        let n = g.node_count();
        let parse_id = |tok: &str| -> Result<usize, ParseError> {
            let id: usize = tok.parse().map_err(|_| err(format!("bad node id `{tok}`")))?;
            if id >= n {
                return Err(err(format!("node id {id} out of range (nodes={n})")));
            }
            Ok(id)
        };
        let toks: Vec<&str> = text.split_whitespace().collect();
        if in_sat {
            if toks.len() != 1 {
                return Err(err(format!("expected one node id, got `{text}`")));
            }
            g.set_sat_enabled(parse_id(toks[0])?, true);
        } else {
            if toks.len() != 2 {
                return Err(err(format!("expected `u v`, got `{text}`")));
            }
            let (u, v) = (parse_id(toks[0])?, parse_id(toks[1])?);
            if u == v {
                return Err(err(format!("self-loop at {u}")));
            }
            g.add_edge(u, v);
        }
    }
    graph.ok_or(ParseError::MissingHeader)
}
