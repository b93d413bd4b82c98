use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::Graph;
use crate::error::{Error, Result};

/// A graph read from an edge list together with the original node tokens;
/// `names[id]` is the token compacted to `id`.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub names: Vec<String>,
}

/// Reads a whitespace-separated `u v [w]` edge list. `#` lines and blank
/// lines are skipped. Node tokens are compacted to `0..n` in order of first
/// appearance; repeated edges keep the first weight and self-loops are
/// dropped. With `weighted == false` a third column is ignored.
pub fn load_edge_list(path: impl AsRef<Path>, weighted: bool) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut names = Vec::new();
    let mut edges = Vec::new();

    let mut intern = |token: &str| -> usize {
        if let Some(&id) = ids.get(token) {
            return id;
        }
        let id = names.len();
        ids.insert(token.to_owned(), id);
        names.push(token.to_owned());
        id
    };

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() < 2 || tokens.len() > 3 {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: line_no,
                message: format!("expected `u v [w]`, found {} tokens", tokens.len()),
            });
        }
        let w = match (weighted, tokens.get(2)) {
            (true, Some(tok)) => {
                let w: f64 = tok.parse().map_err(|_| Error::Parse {
                    path: path.to_owned(),
                    line: line_no,
                    message: format!("weight `{tok}` is not a number"),
                })?;
                if !(w > 0.0) || !w.is_finite() {
                    return Err(Error::Validation(format!(
                        "{}:{line_no}: weight {w} must be positive",
                        path.display()
                    )));
                }
                w
            }
            _ => 1.0,
        };
        let a = intern(tokens[0]);
        let b = intern(tokens[1]);
        if a != b {
            edges.push((a, b, w));
        }
    }
    let graph = Graph::new(names.len(), edges)?;
    Ok(LoadedGraph { graph, names })
}

/// Writes `u v` lines, or `u v w` when the graph carries non-unit weights.
pub fn write_edge_list(graph: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(
        out,
        "# nodes={} edges={}",
        graph.num_nodes(),
        graph.num_edges()
    )?;
    let weighted = !graph.is_unit_weight();
    for e in graph.edges() {
        if weighted {
            writeln!(out, "{} {} {}", e.u, e.v, e.w)?;
        } else {
            writeln!(out, "{} {}", e.u, e.v)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes the `token<TAB>id` compaction map.
pub fn write_node_map(names: &[String], path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for (id, name) in names.iter().enumerate() {
        writeln!(out, "{name}\t{id}")?;
    }
    out.flush()?;
    Ok(())
}
