use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::PopulationGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    EdgeCsv,
    Graphml,
    Dot,
}

impl ExportFormat {
    pub fn name(self) -> &'static str {
        match self {
            ExportFormat::EdgeCsv => "edge-csv",
            ExportFormat::Graphml => "graphml",
            ExportFormat::Dot => "dot",
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [ExportFormat::EdgeCsv, ExportFormat::Graphml, ExportFormat::Dot]
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::config("format", format!("unknown export format `{s}`")))
    }
}

/// `graph.csv` → `graph.nodes.csv`.
pub fn nodes_path(edges: &Path) -> PathBuf {
    let stem = edges.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    edges.with_file_name(format!("{stem}.nodes.csv"))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            column: String::new(),
            message: format!("{other:?}"),
        },
    }
}

/// Writes `src,dst[,weight]` to `path` and `node[,age]` to [`nodes_path`].
pub fn write_edge_csv(graph: &PopulationGraph, path: &Path, include_labels: bool) -> Result<Vec<PathBuf>> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let weights = graph.weights();
    let header: &[&str] = if weights.is_some() { &["src", "dst", "weight"] } else { &["src", "dst"] };
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        let mut record = vec![i.to_string(), j.to_string()];
        if let Some(ws) = weights {
            record.push(ws[e].to_string());
        }
        w.write_record(&record).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;

    let nodes = nodes_path(path);
    let mut w = csv::Writer::from_path(&nodes).map_err(|e| csv_error(&nodes, e))?;
    let header: &[&str] = if include_labels { &["node", "age"] } else { &["node"] };
    w.write_record(header).map_err(|e| csv_error(&nodes, e))?;
    for (i, y) in graph.labels().iter().enumerate() {
        let mut record = vec![i.to_string()];
        if include_labels {
            record.push(y.to_string());
        }
        w.write_record(&record).map_err(|e| csv_error(&nodes, e))?;
    }
    w.flush().map_err(|e| Error::io(&nodes, e))?;
    Ok(vec![path.to_path_buf(), nodes])
}

/// Edges (and weights, if the file has a `weight` column) of an edge file.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeList {
    pub edges: Vec<(usize, usize)>,
    pub weights: Option<Vec<f64>>,
}

pub fn read_edge_csv(path: &Path) -> Result<EdgeList> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = r.headers().map_err(|e| csv_error(path, e))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let parse_err = |line: usize, column: &str, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column: column.to_string(),
        message,
    };
    let (Some(src), Some(dst)) = (find("src"), find("dst")) else {
        return Err(parse_err(1, "src", "header must contain `src` and `dst`".into()));
    };
    let weight = find("weight");
    let mut edges = Vec::new();
    let mut weights = weight.map(|_| Vec::new());
    for (row, record) in r.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| csv_error(path, e))?;
        let field = |idx: usize, name: &str| {
            record
                .get(idx)
                .ok_or_else(|| parse_err(line, name, "missing value".into()))
        };
        let node = |idx: usize, name: &str| -> Result<usize> {
            let v = field(idx, name)?;
            v.trim().parse().map_err(|_| parse_err(line, name, format!("`{v}` is not a node index")))
        };
        edges.push((node(src, "src")?, node(dst, "dst")?));
        if let (Some(idx), Some(ws)) = (weight, weights.as_mut()) {
            let v = field(idx, "weight")?;
            ws.push(v.trim().parse().map_err(|_| parse_err(line, "weight", format!("`{v}` is not a number")))?);
        }
    }
    Ok(EdgeList { edges, weights })
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_graphml(graph: &PopulationGraph, include_labels: bool) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" \
         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns \
         http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n",
    );
    if include_labels {
        out.push_str("  <key id=\"age\" for=\"node\" attr.name=\"age\" attr.type=\"double\"/>\n");
    }
    let weights = graph.weights();
    if weights.is_some() {
        out.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
    }
    let _ = writeln!(
        out,
        "  <graph id=\"{}\" edgedefault=\"undirected\">",
        xml_escape(graph.method().name())
    );
    for (i, y) in graph.labels().iter().enumerate() {
        if include_labels {
            let _ = writeln!(out, "    <node id=\"n{i}\"><data key=\"age\">{y}</data></node>");
        } else {
            let _ = writeln!(out, "    <node id=\"n{i}\"/>");
        }
    }
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        match weights {
            Some(ws) => {
                let _ = writeln!(
                    out,
                    "    <edge source=\"n{i}\" target=\"n{j}\"><data key=\"weight\">{}</data></edge>",
                    ws[e]
                );
            }
            None => {
                let _ = writeln!(out, "    <edge source=\"n{i}\" target=\"n{j}\"/>");
            }
        }
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

pub fn render_dot(graph: &PopulationGraph, include_labels: bool) -> String {
    let mut out = format!("graph \"{}\" {{\n", graph.method().name());
    for (i, y) in graph.labels().iter().enumerate() {
        if include_labels {
            let _ = writeln!(out, "  {i} [age={y}];");
        } else {
            let _ = writeln!(out, "  {i};");
        }
    }
    let weights = graph.weights();
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        match weights {
            Some(ws) => {
                let _ = writeln!(out, "  {i} -- {j} [weight={}];", ws[e]);
            }
            None => {
                let _ = writeln!(out, "  {i} -- {j};");
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Writes `graph` in `format`; returns every file written.
pub fn export_graph(graph: &PopulationGraph, format: ExportFormat, include_labels: bool, path: &Path) -> Result<Vec<PathBuf>> {
    let text = match format {
        ExportFormat::EdgeCsv => return write_edge_csv(graph, path, include_labels),
        ExportFormat::Graphml => render_graphml(graph, include_labels),
        ExportFormat::Dot => render_dot(graph, include_labels),
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(vec![path.to_path_buf()])
}
