//! Reading and writing bipartite graphs.
//!
//! Two formats are supported. An edge list has one `agent,artifact` pair
//! per line with an optional `agent,artifact` header; ids are arbitrary
//! strings assigned dense indices in order of first appearance. A sidecar
//! `<file>.ids.json` records both id lists so that isolated nodes and the
//! index order survive a round trip. A dense matrix is a CSV whose first
//! row holds artifact ids and whose first column holds agent ids.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spine::BipartiteGraph;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    EdgeList,
    Dense,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "edges" | "edgelist" | "edge-list" => Some(Format::EdgeList),
            "dense" | "matrix" => Some(Format::Dense),
            _ => None,
        }
    }

    /// `.csv` files are dense matrices; everything else is an edge list.
    pub fn detect(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Dense,
            _ => Format::EdgeList,
        }
    }
}

/// A graph together with the external ids of its rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    pub graph: BipartiteGraph,
    pub agents: Vec<String>,
    pub artifacts: Vec<String>,
    pub warnings: Vec<String>,
}

impl LabeledGraph {
    /// Label rows and columns with their indices.
    pub fn indexed(graph: BipartiteGraph) -> Self {
        Self {
            agents: (0..graph.m()).map(|i| format!("a{i}")).collect(),
            artifacts: (0..graph.n()).map(|k| format!("t{k}")).collect(),
            graph,
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct IdMaps {
    agents: Vec<String>,
    artifacts: Vec<String>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".ids.json");
    PathBuf::from(name)
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn is_header(fields: &[&str]) -> bool {
    matches!(
        fields,
        [a, b] if (a.eq_ignore_ascii_case("agent") && b.eq_ignore_ascii_case("artifact"))
            || (a.eq_ignore_ascii_case("agent_id") && b.eq_ignore_ascii_case("artifact_id"))
    )
}

/// Records of a headerless, trimmed, possibly ragged CSV with their line numbers.
fn records(path: &Path, text: &str) -> Result<Vec<(usize, Vec<String>)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        out.push((line, record.iter().map(str::to_string).collect()));
    }
    Ok(out)
}

/// Parse edge-list text. `ids` seeds the index order (from a sidecar).
pub fn parse_edge_list(
    path: &Path,
    text: &str,
    ids: Option<(Vec<String>, Vec<String>)>,
) -> Result<LabeledGraph, CliError> {
    let (mut agents, mut artifacts) = ids.unwrap_or_default();
    let mut agent_index: HashMap<String, usize> = agents.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let mut artifact_index: HashMap<String, usize> =
        artifacts.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let mut edges = Vec::new();
    for (pos, (line, fields)) in records(path, text)?.into_iter().enumerate() {
        let refs: Vec<&str> = fields.iter().map(String::as_str).collect();
        if pos == 0 && is_header(&refs) {
            continue;
        }
        let [a, t] = refs[..] else {
            return Err(parse_err(path, line, format!("expected 2 fields `agent,artifact`, found {}", refs.len())));
        };
        if a.is_empty() || t.is_empty() {
            return Err(parse_err(path, line, "empty id"));
        }
        let next = agent_index.len();
        let i = *agent_index.entry(a.to_string()).or_insert_with(|| {
            agents.push(a.to_string());
            next
        });
        let next = artifact_index.len();
        let k = *artifact_index.entry(t.to_string()).or_insert_with(|| {
            artifacts.push(t.to_string());
            next
        });
        edges.push((i, k, line));
    }
    if agents.is_empty() || artifacts.is_empty() {
        return Err(parse_err(path, 1, "no edges"));
    }
    let mut graph = BipartiteGraph::empty(agents.len(), artifacts.len())?;
    let mut warnings = Vec::new();
    for (i, k, line) in edges {
        if graph.get(i, k) {
            let msg = format!("line {line}: duplicate pair ({},{}) ignored", agents[i], artifacts[k]);
            log::warn!("{msg}");
            warnings.push(msg);
        }
        graph.set(i, k, true);
    }
    Ok(LabeledGraph {
        graph,
        agents,
        artifacts,
        warnings,
    })
}

/// Parse dense-matrix text.
pub fn parse_dense(path: &Path, text: &str) -> Result<LabeledGraph, CliError> {
    let mut recs = records(path, text)?.into_iter();
    let Some((_, header)) = recs.next() else {
        return Err(parse_err(path, 1, "empty file"));
    };
    let artifacts: Vec<String> = header.into_iter().skip(1).collect();
    if artifacts.is_empty() {
        return Err(parse_err(path, 1, "header names no artifacts"));
    }
    let mut agents = Vec::new();
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for (line, fields) in recs {
        if fields.len() != artifacts.len() + 1 {
            return Err(parse_err(
                path,
                line,
                format!("expected {} cells, found {}", artifacts.len(), fields.len().saturating_sub(1)),
            ));
        }
        let row = fields[1..]
            .iter()
            .map(|c| match c.as_str() {
                "0" => Ok(0),
                "1" => Ok(1),
                other => Err(parse_err(path, line, format!("cell `{other}` is not 0 or 1"))),
            })
            .collect::<Result<Vec<u8>, _>>()?;
        agents.push(fields[0].clone());
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 2, "no agent rows"));
    }
    Ok(LabeledGraph {
        graph: BipartiteGraph::from_rows(&rows)?,
        agents,
        artifacts,
        warnings: Vec::new(),
    })
}

pub fn read_graph(path: &Path, format: Option<Format>) -> Result<LabeledGraph, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input {
        path: path.display().to_string(),
        source: e,
    })?;
    match format.unwrap_or_else(|| Format::detect(path)) {
        Format::Dense => parse_dense(path, &text),
        Format::EdgeList => {
            let sidecar = sidecar_path(path);
            let ids = match fs::read_to_string(&sidecar) {
                Ok(json) => {
                    let maps: IdMaps = serde_json::from_str(&json)
                        .map_err(|e| parse_err(&sidecar, e.line(), e.to_string()))?;
                    Some((maps.agents, maps.artifacts))
                }
                Err(_) => None,
            };
            parse_edge_list(path, &text, ids)
        }
    }
}

fn to_csv(rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("utf-8 input")
}

pub fn edge_list_text(g: &LabeledGraph) -> String {
    let header = std::iter::once(vec!["agent".to_string(), "artifact".to_string()]);
    let body = (0..g.graph.m()).flat_map(|i| {
        g.graph
            .row_indices(i)
            .into_iter()
            .map(move |k| vec![g.agents[i].clone(), g.artifacts[k].clone()])
    });
    to_csv(header.chain(body))
}

pub fn dense_text(g: &LabeledGraph) -> String {
    let header = std::iter::once(std::iter::once("agent".to_string()).chain(g.artifacts.iter().cloned()).collect());
    let body = g.graph.to_rows().into_iter().enumerate().map(|(i, row)| {
        std::iter::once(g.agents[i].clone())
            .chain(row.into_iter().map(|v| v.to_string()))
            .collect()
    });
    to_csv(header.chain(body))
}

/// Write `g` in `format` (detected from the extension when `None`); edge
/// lists also get an id sidecar.
pub fn write_graph(path: &Path, g: &LabeledGraph, format: Option<Format>) -> Result<(), CliError> {
    match format.unwrap_or_else(|| Format::detect(path)) {
        Format::Dense => write(path, &dense_text(g)),
        Format::EdgeList => {
            write(path, &edge_list_text(g))?;
            let maps = IdMaps {
                agents: g.agents.clone(),
                artifacts: g.artifacts.clone(),
            };
            write(&sidecar_path(path), &serde_json::to_string_pretty(&maps).expect("id maps serialize"))
        }
    }
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Output {
            path: parent.display().to_string(),
            source: e,
        })?;
    }
    fs::write(path, contents).map_err(|e| CliError::Output {
        path: path.display().to_string(),
        source: e,
    })
}

/// Format a probability with ten significant digits.
pub fn sig10(p: f64) -> String {
    format!("{p:.9e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_with_header_and_duplicates() {
        let text = "agent,artifact\nx,p\ny,q\nx,q\nx,p\n";
        let g = parse_edge_list(Path::new("t"), text, None).unwrap();
        assert_eq!(g.agents, ["x", "y"]);
        assert_eq!(g.artifacts, ["p", "q"]);
        assert_eq!(g.graph.to_rows(), vec![vec![1, 1], vec![0, 1]]);
        assert_eq!(g.warnings.len(), 1);
    }

    #[test]
    fn edge_list_error_names_line() {
        let err = parse_edge_list(Path::new("t"), "a,b\nc\n", None).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn dense_rejects_bad_cells() {
        let err = parse_dense(Path::new("t"), "agent,p,q\nx,1,0\ny,2,1\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }), "{err}");
        let err = parse_dense(Path::new("t"), "agent,p,q\nx,1\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(0.05), "5.000000000e-2");
        assert_eq!(sig10(1.0 / 3.0), "3.333333333e-1");
    }
}
