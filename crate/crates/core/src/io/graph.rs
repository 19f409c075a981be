//! Graph exports: canonical JSON, Graphviz DOT and adjacency-matrix CSV.
//! Also the saliency JSON used by the scorer.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{edge_probability, normalize_score_graph};
use crate::io::format::{format_float, round_float};
use crate::model::{AttentionGraph, Level, NodeKey, ObjectSaliency};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Dot,
    AdjacencyCsv,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ExportFormat::Json),
            "dot" => Ok(ExportFormat::Dot),
            "adjacency_csv" | "adjacency-csv" | "csv" => Ok(ExportFormat::AdjacencyCsv),
            other => Err(Error::input(format!("unknown export format '{other}'"))),
        }
    }
}

impl ExportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ExportFormat::Json => "json",
            ExportFormat::Dot => "dot",
            ExportFormat::AdjacencyCsv => "csv",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightView {
    Counts,
    Probability,
    Score,
}

impl FromStr for WeightView {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "counts" | "count" => Ok(WeightView::Counts),
            "probability" | "prob" => Ok(WeightView::Probability),
            "score" => Ok(WeightView::Score),
            other => Err(Error::input(format!("unknown weight view '{other}'"))),
        }
    }
}

/// Edge weights under the chosen view, rounded as they will be written.
fn edge_weights(g: &AttentionGraph, view: WeightView) -> BTreeMap<(NodeKey, NodeKey), f64> {
    match view {
        WeightView::Counts => g.edge_counts.iter().map(|(k, &c)| (k.clone(), c as f64)).collect(),
        WeightView::Probability => g
            .edge_counts
            .keys()
            .map(|(s, t)| {
                let p = edge_probability(g, s, t).expect("edge sources are nodes");
                ((s.clone(), t.clone()), round_float(p))
            })
            .collect(),
        WeightView::Score => normalize_score_graph(g)
            .scores
            .into_iter()
            .map(|(k, v)| (k, round_float(v)))
            .collect(),
    }
}

pub fn graph_to_json(g: &AttentionGraph) -> String {
    let probs = edge_weights(g, WeightView::Probability);
    let scores = edge_weights(g, WeightView::Score);
    let edges: Vec<Value> = g
        .edge_counts
        .iter()
        .map(|(k, &count)| {
            json!({
                "count": count,
                "dst": k.1,
                "probability": probs[k],
                "score": scores[k],
                "src": k.0,
            })
        })
        .collect();
    let doc = json!({
        "edges": edges,
        "image_id": g.image_id,
        "level": g.level,
        "nodes": g.nodes,
        "observer_count": g.observer_count,
    });
    serde_json::to_string_pretty(&doc).expect("graph serializes") + "\n"
}

#[derive(Deserialize)]
struct JsonEdge {
    count: u64,
    dst: NodeKey,
    src: NodeKey,
}

#[derive(Deserialize)]
struct JsonGraph {
    edges: Vec<JsonEdge>,
    image_id: String,
    level: Level,
    nodes: Vec<NodeKey>,
    observer_count: u64,
}

/// Re-imports a graph written by [`graph_to_json`]. Probabilities and
/// scores in the file are ignored; they are derived from the counts.
pub fn graph_from_json(text: &str, origin: &Path) -> Result<AttentionGraph> {
    let doc: JsonGraph =
        serde_json::from_str(text).map_err(|e| Error::parse(origin, e.line(), e.to_string()))?;
    let mut g = AttentionGraph::empty(&doc.image_id, doc.level);
    g.observer_count = doc.observer_count;
    g.nodes.extend(doc.nodes);
    for e in doc.edges {
        if g.edge_counts.insert((e.src.clone(), e.dst.clone()), e.count).is_some() {
            return Err(Error::parse(origin, 0, format!("edge {} -> {} listed twice", e.src, e.dst)));
        }
    }
    g.check_invariants()
        .map_err(|e| Error::parse(origin, 0, e.to_string()))?;
    Ok(g)
}

pub fn load_graph(path: &Path) -> Result<AttentionGraph> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    graph_from_json(&text, path)
}

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn graph_to_dot(g: &AttentionGraph, view: WeightView) -> String {
    let weights = edge_weights(g, view);
    let mut out = String::new();
    writeln!(out, "digraph {} {{", dot_quote(&g.image_id)).unwrap();
    for node in &g.nodes {
        writeln!(out, "  {};", dot_quote(&node.to_string())).unwrap();
    }
    for ((s, t), &count) in &g.edge_counts {
        writeln!(
            out,
            "  {} -> {} [label={}, weight={}];",
            dot_quote(&s.to_string()),
            dot_quote(&t.to_string()),
            dot_quote(&format_float(weights[&(s.clone(), t.clone())])),
            count
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// Square matrix in sorted node order; row = source, column = target.
pub fn graph_to_adjacency_csv(g: &AttentionGraph, view: WeightView) -> String {
    let weights = edge_weights(g, view);
    let nodes: Vec<&NodeKey> = g.nodes.iter().collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["node".to_string()];
    header.extend(nodes.iter().map(|n| n.to_string()));
    w.write_record(&header).expect("in-memory write");
    for &s in &nodes {
        let mut row = vec![s.to_string()];
        for &t in &nodes {
            let v = weights.get(&(s.clone(), t.clone())).copied().unwrap_or(0.0);
            row.push(format_float(v));
        }
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 labels")
}

pub fn export_graph(g: &AttentionGraph, format: ExportFormat, view: WeightView) -> String {
    match format {
        ExportFormat::Json => graph_to_json(g),
        ExportFormat::Dot => graph_to_dot(g, view),
        ExportFormat::AdjacencyCsv => graph_to_adjacency_csv(g, view),
    }
}

pub fn saliency_to_json(sal: &ObjectSaliency, level: Level) -> String {
    let values: serde_json::Map<String, Value> = sal
        .values
        .iter()
        .map(|(k, &v)| (k.to_string(), json!(round_float(v))))
        .collect();
    let doc = json!({
        "image_id": sal.image_id,
        "level": level,
        "values": values,
    });
    serde_json::to_string_pretty(&doc).expect("saliency serializes") + "\n"
}

#[derive(Deserialize)]
struct JsonSaliency {
    image_id: String,
    level: Level,
    values: BTreeMap<String, f64>,
}

/// Parses saliency JSON; accepts a single document or an array of them.
pub fn saliency_from_json(text: &str, origin: &Path) -> Result<Vec<(Level, ObjectSaliency)>> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::parse(origin, e.line(), e.to_string()))?;
    let docs = match value {
        Value::Array(items) => items,
        single => vec![single],
    };
    docs.into_iter()
        .map(|doc| {
            let s: JsonSaliency =
                serde_json::from_value(doc).map_err(|e| Error::parse(origin, 0, e.to_string()))?;
            let values = s
                .values
                .into_iter()
                .map(|(k, v)| {
                    if !(v >= 0.0 && v.is_finite()) {
                        return Err(Error::parse(origin, 0, format!("saliency of {k} must be non-negative")));
                    }
                    Ok((NodeKey::parse(s.level, &k).map_err(|e| Error::parse(origin, 0, e.to_string()))?, v))
                })
                .collect::<Result<_>>()?;
            Ok((
                s.level,
                ObjectSaliency {
                    image_id: s.image_id,
                    values,
                },
            ))
        })
        .collect()
}
