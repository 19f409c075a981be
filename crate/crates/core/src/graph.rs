//! Attention graph construction and the views derived from it.
//!
//! Graphs store raw shift counts. Shift probabilities and max-normalized
//! scores are computed on demand, since only counts add up correctly when
//! graphs are merged or pooled over observers.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{AttentionGraph, Level, NodeKey, Scene, ScoreGraph, SemanticScanpath};

/// Pools the gaze shifts of several observers' scanpaths on one image.
///
/// Every consecutive term pair adds one to its edge. A scanpath with a
/// single term records a self-loop on that node, so an observer who never
/// left one object still leaves a trace.
pub fn build_attention_graph<'a, I>(scanpaths: I) -> Result<AttentionGraph>
where
    I: IntoIterator<Item = &'a SemanticScanpath>,
{
    let mut iter = scanpaths.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::input("cannot build an attention graph from zero scanpaths"))?;
    let mut graph = AttentionGraph::empty(&first.image_id, first.level);
    add_scanpath(&mut graph, first)?;
    for sp in iter {
        add_scanpath(&mut graph, sp)?;
    }
    Ok(graph)
}

/// Adds one observer's scanpath to an existing graph.
pub fn add_scanpath(graph: &mut AttentionGraph, sp: &SemanticScanpath) -> Result<()> {
    if sp.image_id != graph.image_id {
        return Err(Error::input(format!(
            "scanpath for image {} cannot join graph of image {}",
            sp.image_id, graph.image_id
        )));
    }
    if sp.level != graph.level {
        return Err(Error::LevelMismatch {
            expected: graph.level,
            found: sp.level,
        });
    }
    sp.check_invariants()?;
    graph.nodes.extend(sp.terms.iter().cloned());
    if let [only] = sp.terms.as_slice() {
        *graph.edge_counts.entry((only.clone(), only.clone())).or_default() += 1;
    }
    for (s, t) in sp.shifts() {
        *graph.edge_counts.entry((s.clone(), t.clone())).or_default() += 1;
    }
    graph.observer_count += 1;
    Ok(())
}

fn require_node(g: &AttentionGraph, node: &NodeKey) -> Result<()> {
    if g.nodes.contains(node) {
        Ok(())
    } else {
        Err(Error::UnknownNode {
            image_id: g.image_id.clone(),
            node: node.clone(),
        })
    }
}

/// Share of `source`'s outgoing shifts that go to `target`.
pub fn edge_probability(g: &AttentionGraph, source: &NodeKey, target: &NodeKey) -> Result<f64> {
    require_node(g, source)?;
    let total = g.out_count(source);
    if total == 0 {
        return Ok(0.0);
    }
    Ok(g.count(source, target) as f64 / total as f64)
}

/// Divides every outgoing count of a node by that node's largest outgoing
/// count, giving scores in `(0, 1]` with a maximum of exactly 1.
pub fn normalize_score_graph(g: &AttentionGraph) -> ScoreGraph {
    let mut max_out: BTreeMap<&NodeKey, u64> = BTreeMap::new();
    for ((s, _), &c) in &g.edge_counts {
        let m = max_out.entry(s).or_default();
        *m = (*m).max(c);
    }
    let scores = g
        .edge_counts
        .iter()
        .map(|((s, t), &c)| ((s.clone(), t.clone()), c as f64 / max_out[s] as f64))
        .collect();
    ScoreGraph {
        image_id: g.image_id.clone(),
        level: g.level,
        scores,
    }
}

/// Relabels an object graph by attribute key and sums the counts.
///
/// Shifts between two objects sharing a key become self-loops and are kept,
/// so the total shift count is unchanged.
pub fn merge_to_attribute_graph(g: &AttentionGraph, scene: &Scene) -> Result<AttentionGraph> {
    if g.level != Level::Object {
        return Err(Error::LevelMismatch {
            expected: Level::Object,
            found: g.level,
        });
    }
    let mut merged = AttentionGraph::empty(&g.image_id, Level::Attribute);
    merged.observer_count = g.observer_count;
    let mut key_of: BTreeMap<&NodeKey, NodeKey> = BTreeMap::new();
    for node in &g.nodes {
        let key = scene.attribute_node(node)?;
        merged.nodes.insert(key.clone());
        key_of.insert(node, key);
    }
    for ((s, t), &c) in &g.edge_counts {
        let (ks, kt) = match (key_of.get(s), key_of.get(t)) {
            (Some(ks), Some(kt)) => (ks.clone(), kt.clone()),
            _ => {
                return Err(Error::input(format!(
                    "edge {s} -> {t} has an endpoint outside the node set"
                )))
            }
        };
        *merged.edge_counts.entry((ks, kt)).or_default() += c;
    }
    Ok(merged)
}

/// Total number of gaze shifts in the graph, self-loops included.
pub fn node_intensity(g: &AttentionGraph) -> u64 {
    g.edge_counts.values().sum()
}

/// Random walk over the graph following its shift distribution.
///
/// The walk starts at `start` and stops after `max_len` terms, at a node
/// without outgoing shifts, or when a self-loop is drawn (a self-loop records
/// an observer who stayed on one node). Identical seeds give identical walks.
pub fn sample_scanpath(
    g: &AttentionGraph,
    start: &NodeKey,
    max_len: usize,
    seed: u64,
) -> Result<SemanticScanpath> {
    sample_scanpath_until(g, start, None, max_len, seed)
}

/// Like [`sample_scanpath`] but also stops once `stop_at` is reached.
pub fn sample_scanpath_until(
    g: &AttentionGraph,
    start: &NodeKey,
    stop_at: Option<&NodeKey>,
    max_len: usize,
    seed: u64,
) -> Result<SemanticScanpath> {
    require_node(g, start)?;
    if max_len == 0 {
        return Err(Error::input("max_len must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = vec![start.clone()];
    let mut current = start.clone();
    while terms.len() < max_len && stop_at != Some(&current) {
        let total = g.out_count(&current);
        if total == 0 {
            break;
        }
        let mut pick = rng.random_range(0..total);
        let mut next = None;
        for (target, count) in g.successors(&current) {
            if pick < count {
                next = Some(target.clone());
                break;
            }
            pick -= count;
        }
        let next = next.expect("draw is below the outgoing total");
        if next == current {
            break;
        }
        terms.push(next.clone());
        current = next;
    }
    let source_spans = (0..terms.len() as u32).map(|i| (i, i)).collect();
    Ok(SemanticScanpath {
        image_id: g.image_id.clone(),
        observer_id: format!("sample-{seed}"),
        level: g.level,
        terms,
        source_spans,
    })
}
