use std::io::{BufRead, Write};

use super::Graph;
use crate::{Error, Result};

/// Header line `n_nodes m_edges`, then one `i j` line per edge with `i < j`.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", g.n_nodes(), g.n_edges())?;
    for (i, j) in g.edges() {
        writeln!(out, "{i} {j}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_edge_list<R: BufRead>(input: R) -> Result<Graph> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::parse(1, "missing header"))??;
    let (n_nodes, m_edges) = parse_pair(&header).ok_or_else(|| Error::parse(1, "header must be `n_nodes m_edges`"))?;
    let n_nodes = n_nodes as usize;
    let mut edges = Vec::with_capacity(m_edges as usize);
    for (idx, line) in lines.enumerate() {
        let line_no = idx as u64 + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (i, j) = parse_pair(&line).ok_or_else(|| Error::parse(line_no, "expected `i j`"))?;
        let (i, j) = (u32::try_from(i), u32::try_from(j));
        let (Ok(i), Ok(j)) = (i, j) else {
            return Err(Error::parse(line_no, "node id out of range"));
        };
        if i as usize >= n_nodes || j as usize >= n_nodes {
            return Err(Error::parse(line_no, format!("node id exceeds n_nodes = {n_nodes}")));
        }
        if i == j {
            return Err(Error::parse(line_no, "self-loop"));
        }
        edges.push((i, j));
    }
    if edges.len() as u64 != m_edges {
        return Err(Error::Input(format!("header declares {m_edges} edges, found {}", edges.len())));
    }
    Graph::from_edges(n_nodes, &edges).map_err(|e| Error::Input(e.to_string()))
}

fn parse_pair(line: &str) -> Option<(u64, u64)> {
    let mut it = line.split_whitespace();
    let a = it.next()?.parse().ok()?;
    let b = it.next()?.parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some((a, b))
}
