//! Tab-separated readers and writers for edge lists, attribute triplets and labels.
//!
//! All three formats are UTF-8 text, one record per line, fields separated by tabs
//! (any run of whitespace is accepted when reading). Lines starting with `#` and
//! blank lines are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{AttributedGraph, Attributes, EdgeStats, Labels, SparseRows};
use crate::error::{Error, Result};

const ATTR_HEADER: &str = "%%g2g-attrs";

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let t = line.trim();
        (!t.is_empty() && !t.starts_with('#')).then_some((i + 1, t))
    })
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    field: Option<&str>,
    what: &str,
) -> Result<T> {
    let raw = field.ok_or_else(|| parse_err(path, line, format!("missing {what}")))?;
    raw.parse()
        .map_err(|_| parse_err(path, line, format!("invalid {what} {raw:?}")))
}

/// Reads `src<TAB>dst` lines into a structure-only graph.
///
/// The node count is `max id + 1`, or `num_nodes_hint` when given (every id must then be
/// below the hint). Self-loops and duplicates are dropped and counted in the returned stats.
pub fn load_edge_list(
    path: impl AsRef<Path>,
    directed: bool,
    num_nodes_hint: Option<usize>,
) -> Result<(AttributedGraph, EdgeStats)> {
    let path = path.as_ref();
    let text = read(path)?;
    let mut edges = Vec::new();
    let mut max_id = None::<usize>;
    for (line, content) in data_lines(&text) {
        let mut fields = content.split_whitespace();
        let u: usize = parse_field(path, line, fields.next(), "source id")?;
        let v: usize = parse_field(path, line, fields.next(), "target id")?;
        if fields.next().is_some() {
            return Err(parse_err(path, line, "expected exactly two fields"));
        }
        if let Some(hint) = num_nodes_hint {
            if let Some(&bad) = [u, v].iter().find(|&&x| x >= hint) {
                return Err(Error::OutOfBounds {
                    what: "node id",
                    index: bad,
                    limit: hint,
                });
            }
        }
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push((u, v));
    }
    let n = max_id.map_or(0, |m| m + 1).max(num_nodes_hint.unwrap_or(0));
    AttributedGraph::from_edges(n, directed, edges)
}

/// Reads a `%%g2g-attrs N D` header followed by `node<TAB>feature<TAB>value` triplets.
pub fn load_attributes(path: impl AsRef<Path>, num_nodes: usize) -> Result<Attributes> {
    let path = path.as_ref();
    let text = read(path)?;
    let mut lines = data_lines(&text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "missing attribute header"))?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some(ATTR_HEADER) {
        return Err(parse_err(
            path,
            hline,
            format!("expected header '{ATTR_HEADER} N D'"),
        ));
    }
    let n: usize = parse_field(path, hline, fields.next(), "row count")?;
    let d: usize = parse_field(path, hline, fields.next(), "column count")?;
    if n != num_nodes {
        return Err(Error::Shape(format!(
            "attribute file declares {n} nodes, graph has {num_nodes}"
        )));
    }
    let mut triplets = Vec::new();
    for (line, content) in lines {
        let mut fields = content.split_whitespace();
        let node: usize = parse_field(path, line, fields.next(), "node id")?;
        let feat: usize = parse_field(path, line, fields.next(), "feature id")?;
        let value: f64 = parse_field(path, line, fields.next(), "value")?;
        if !value.is_finite() {
            return Err(parse_err(path, line, "non-finite attribute value"));
        }
        triplets.push((node, feat, value));
    }
    Ok(Attributes::Sparse(SparseRows::from_triplets(
        n, d, triplets,
    )?))
}

/// Reads the header of an attribute file without loading the data.
pub fn attribute_shape(path: &Path) -> Result<(usize, usize)> {
    let text = read(path)?;
    let (hline, header) = data_lines(&text)
        .next()
        .ok_or_else(|| parse_err(path, 1, "missing attribute header"))?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some(ATTR_HEADER) {
        return Err(parse_err(path, hline, "bad attribute header"));
    }
    Ok((
        parse_field(path, hline, fields.next(), "row count")?,
        parse_field(path, hline, fields.next(), "column count")?,
    ))
}

/// Reads `node<TAB>label` lines; label strings get dense ids in first-appearance order.
pub fn load_labels(path: impl AsRef<Path>, num_nodes: usize) -> Result<Labels> {
    let path = path.as_ref();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::LabelsRequired(format!(
                "label file {} not found",
                path.display()
            )))
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut classes = vec![None; num_nodes];
    let mut names: Vec<String> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    for (line, content) in data_lines(&text) {
        let mut fields = content.split_whitespace();
        let node: usize = parse_field(path, line, fields.next(), "node id")?;
        let label = fields
            .next()
            .ok_or_else(|| parse_err(path, line, "missing label"))?;
        if node >= num_nodes {
            return Err(Error::OutOfBounds {
                what: "node id",
                index: node,
                limit: num_nodes,
            });
        }
        if classes[node].is_some() {
            return Err(Error::Conflict(format!(
                "{}:{line}: node {node} labeled twice",
                path.display()
            )));
        }
        let next = names.len();
        let id = *ids.entry(label.to_string()).or_insert_with(|| {
            names.push(label.to_string());
            next
        });
        classes[node] = Some(id);
    }
    Labels::new(classes, names)
}

fn write(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_edge_list(path: impl AsRef<Path>, graph: &AttributedGraph) -> Result<()> {
    let mut out = String::new();
    for (u, v) in graph.edges() {
        writeln!(out, "{u}\t{v}").unwrap();
    }
    write(path.as_ref(), out)
}

pub fn write_attributes(path: impl AsRef<Path>, attributes: &Attributes) -> Result<()> {
    let mut out = format!(
        "{ATTR_HEADER} {} {}\n",
        attributes.nrows(),
        attributes.ncols()
    );
    for r in 0..attributes.nrows() {
        attributes.for_each_nonzero(r, |c, v| {
            writeln!(out, "{r}\t{c}\t{v:?}").unwrap();
        });
    }
    write(path.as_ref(), out)
}

pub fn write_labels(path: impl AsRef<Path>, labels: &Labels) -> Result<()> {
    let mut out = String::new();
    for (node, class) in labels.classes().iter().enumerate() {
        if let Some(c) = class {
            writeln!(out, "{node}\t{}", labels.names()[*c]).unwrap();
        }
    }
    write(path.as_ref(), out)
}
