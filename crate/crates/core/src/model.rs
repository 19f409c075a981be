//! Shared domain types: fixations, annotated scenes, semantic scanpaths and
//! the graph views built from them.
//!
//! Every type here is a plain immutable value once constructed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Attribute key used for objects that carry no labelled attribute.
pub const NO_ATTRIBUTE: &str = "None";

/// Separator used when an object with several attributes is treated as one
/// combined attribute.
pub const ATTRIBUTE_JOIN: &str = " & ";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Object,
    Attribute,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Object => "object",
            Level::Attribute => "attribute",
        })
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "object" | "obj" => Ok(Level::Object),
            "attribute" | "att" => Ok(Level::Attribute),
            other => Err(Error::input(format!("unknown level '{other}'"))),
        }
    }
}

/// A node of a semantic scanpath or attention graph.
///
/// Object-level nodes are annotation ids; attribute-level nodes are the
/// canonical attribute key of the object (see [`ObjectInfo::attribute_key`]).
/// `Object(0)` sorts before every other key.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeKey {
    Object(u32),
    Attribute(String),
}

impl NodeKey {
    pub fn level(&self) -> Level {
        match self {
            NodeKey::Object(_) => Level::Object,
            NodeKey::Attribute(_) => Level::Attribute,
        }
    }

    pub(crate) const MIN: NodeKey = NodeKey::Object(0);

    /// Parses a node label written by [`fmt::Display`] at the given level.
    pub fn parse(level: Level, s: &str) -> Result<Self> {
        match level {
            Level::Object => s
                .trim()
                .parse::<u32>()
                .map(NodeKey::Object)
                .map_err(|_| Error::input(format!("'{s}' is not an object id"))),
            Level::Attribute => Ok(NodeKey::Attribute(s.to_string())),
        }
    }
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKey::Object(id) => write!(f, "{id}"),
            NodeKey::Attribute(key) => f.write_str(key),
        }
    }
}

impl From<u32> for NodeKey {
    fn from(id: u32) -> Self {
        NodeKey::Object(id)
    }
}

impl From<&str> for NodeKey {
    fn from(key: &str) -> Self {
        NodeKey::Attribute(key.to_string())
    }
}

/// One gaze sample. `x` is the column and `y` the row, origin top-left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixation {
    pub image_id: String,
    pub observer_id: String,
    pub seq_index: u32,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub duration_ms: f64,
}

impl Fixation {
    pub fn new(image_id: &str, observer_id: &str, seq_index: u32, x: f64, y: f64) -> Self {
        Fixation {
            image_id: image_id.to_string(),
            observer_id: observer_id.to_string(),
            seq_index,
            x,
            y,
            duration_ms: 0.0,
        }
    }

    /// Raster cell the fixation falls in, if it is inside a `width` x `height` grid.
    pub fn pixel(&self, width: u32, height: u32) -> Option<(u32, u32)> {
        if !(self.x >= 0.0 && self.y >= 0.0) {
            return None;
        }
        let (col, row) = (self.x.floor(), self.y.floor());
        if col < width as f64 && row < height as f64 {
            Some((col as u32, row as u32))
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectInfo {
    pub object_id: u32,
    pub attributes: BTreeSet<String>,
    pub pixel_count: u64,
}

impl ObjectInfo {
    /// Canonical attribute key: sorted attribute names joined by `" & "`,
    /// or `"None"` for an object without attributes.
    pub fn attribute_key(&self) -> String {
        attribute_key(&self.attributes)
    }
}

pub fn attribute_key(attributes: &BTreeSet<String>) -> String {
    if attributes.is_empty() {
        NO_ATTRIBUTE.to_string()
    } else {
        attributes
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>()
            .join(ATTRIBUTE_JOIN)
    }
}

/// An annotated stimulus: a per-pixel object label raster (0 = background)
/// plus per-object attribute sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scene {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    /// Row-major, `width * height` entries.
    pub labels: Vec<u32>,
    pub objects: BTreeMap<u32, ObjectInfo>,
}

impl Scene {
    /// Builds a scene from a label raster, deriving the object table from it.
    ///
    /// Objects in the raster without an entry in `attributes` get an empty
    /// attribute set. Attributes for ids absent from the raster are rejected.
    pub fn from_labels(
        image_id: &str,
        width: u32,
        height: u32,
        labels: Vec<u32>,
        attributes: BTreeMap<u32, BTreeSet<String>>,
    ) -> Result<Scene> {
        if width == 0 || height == 0 {
            return Err(Error::input(format!(
                "scene {image_id}: dimensions must be positive, got {width}x{height}"
            )));
        }
        if labels.len() != width as usize * height as usize {
            return Err(Error::input(format!(
                "scene {image_id}: raster has {} cells, expected {}x{}",
                labels.len(),
                width,
                height
            )));
        }
        let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
        for &label in labels.iter().filter(|&&l| l != 0) {
            *counts.entry(label).or_default() += 1;
        }
        let unknown: Vec<String> = attributes
            .keys()
            .filter(|id| !counts.contains_key(id))
            .map(|id| format!("attributes given for object {id} which is not in the raster"))
            .collect();
        if !unknown.is_empty() {
            return Err(Error::InvalidScene {
                image_id: image_id.to_string(),
                violations: unknown,
            });
        }
        let objects = counts
            .into_iter()
            .map(|(object_id, pixel_count)| {
                let info = ObjectInfo {
                    object_id,
                    attributes: attributes.get(&object_id).cloned().unwrap_or_default(),
                    pixel_count,
                };
                (object_id, info)
            })
            .collect();
        Ok(Scene {
            image_id: image_id.to_string(),
            width,
            height,
            labels,
            objects,
        })
    }

    #[inline]
    pub fn label_at(&self, col: u32, row: u32) -> u32 {
        self.labels[row as usize * self.width as usize + col as usize]
    }

    pub fn object(&self, object_id: u32) -> Result<&ObjectInfo> {
        self.objects.get(&object_id).ok_or_else(|| Error::UnknownObject {
            image_id: self.image_id.clone(),
            object_id,
        })
    }

    /// Maps an object-level node onto the requested level.
    pub fn node_key(&self, object_id: u32, level: Level) -> Result<NodeKey> {
        match level {
            Level::Object => self.object(object_id).map(|_| NodeKey::Object(object_id)),
            Level::Attribute => Ok(NodeKey::Attribute(self.object(object_id)?.attribute_key())),
        }
    }

    /// Attribute key of an object-level node.
    pub fn attribute_node(&self, node: &NodeKey) -> Result<NodeKey> {
        match node {
            NodeKey::Object(id) => self.node_key(*id, Level::Attribute),
            NodeKey::Attribute(_) => Err(Error::LevelMismatch {
                expected: Level::Object,
                found: Level::Attribute,
            }),
        }
    }
}

/// Lists every broken scene invariant. An empty list means the scene is
/// consistent.
pub fn validate_scene(scene: &Scene) -> Vec<String> {
    let mut violations = Vec::new();
    if scene.width == 0 || scene.height == 0 {
        violations.push(format!(
            "dimensions must be positive, got {}x{}",
            scene.width, scene.height
        ));
    }
    let expected = scene.width as usize * scene.height as usize;
    if scene.labels.len() != expected {
        violations.push(format!(
            "raster has {} cells, expected {}",
            scene.labels.len(),
            expected
        ));
    }
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for &label in scene.labels.iter().filter(|&&l| l != 0) {
        *counts.entry(label).or_default() += 1;
    }
    for label in counts.keys() {
        if !scene.objects.contains_key(label) {
            violations.push(format!("raster label {label} missing from objects"));
        }
    }
    for (&id, info) in &scene.objects {
        if id == 0 {
            violations.push("object id 0 is reserved for background".to_string());
            continue;
        }
        if info.object_id != id {
            violations.push(format!(
                "object table key {id} disagrees with object_id {}",
                info.object_id
            ));
        }
        match counts.get(&id) {
            None => violations.push(format!("object {id} missing from raster")),
            Some(&n) if n != info.pixel_count => violations.push(format!(
                "pixel_count mismatch for object {id}: listed {}, raster has {n}",
                info.pixel_count
            )),
            Some(_) => {}
        }
    }
    violations
}

/// A fixation sequence re-encoded as object or attribute nodes, with
/// adjacent repeats merged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemanticScanpath {
    pub image_id: String,
    pub observer_id: String,
    pub level: Level,
    pub terms: Vec<NodeKey>,
    /// Inclusive `(first, last)` raw `seq_index` range behind each term.
    pub source_spans: Vec<(u32, u32)>,
}

impl SemanticScanpath {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Consecutive `(source, target)` term pairs.
    pub fn shifts(&self) -> impl Iterator<Item = (&NodeKey, &NodeKey)> {
        self.terms.windows(2).map(|w| (&w[0], &w[1]))
    }

    pub fn check_invariants(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::input(format!(
                "scanpath {}/{} has no terms",
                self.image_id, self.observer_id
            )));
        }
        if self.terms.len() != self.source_spans.len() {
            return Err(Error::input(format!(
                "scanpath {}/{} has {} terms but {} source spans",
                self.image_id,
                self.observer_id,
                self.terms.len(),
                self.source_spans.len()
            )));
        }
        if let Some(term) = self.terms.iter().find(|t| t.level() != self.level) {
            return Err(Error::input(format!(
                "scanpath {}/{} at {} level contains {} node {term}",
                self.image_id,
                self.observer_id,
                self.level,
                term.level()
            )));
        }
        if let Some(w) = self.terms.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::input(format!(
                "scanpath {}/{} repeats node {} in adjacent terms",
                self.image_id, self.observer_id, w[0]
            )));
        }
        Ok(())
    }
}

/// Gaze-shift counts pooled over observers for one scene.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttentionGraph {
    pub image_id: String,
    pub level: Level,
    pub nodes: BTreeSet<NodeKey>,
    pub edge_counts: BTreeMap<(NodeKey, NodeKey), u64>,
    pub observer_count: u64,
}

impl AttentionGraph {
    pub fn empty(image_id: &str, level: Level) -> Self {
        AttentionGraph {
            image_id: image_id.to_string(),
            level,
            nodes: BTreeSet::new(),
            edge_counts: BTreeMap::new(),
            observer_count: 0,
        }
    }

    pub fn count(&self, source: &NodeKey, target: &NodeKey) -> u64 {
        self.edge_counts
            .get(&(source.clone(), target.clone()))
            .copied()
            .unwrap_or(0)
    }

    /// Outgoing `(target, count)` pairs of `source`, in target order.
    pub fn successors<'a>(&'a self, source: &'a NodeKey) -> impl Iterator<Item = (&'a NodeKey, u64)> + 'a {
        self.edge_counts
            .range((source.clone(), NodeKey::MIN)..)
            .take_while(move |((s, _), _)| s == source)
            .map(|((_, t), &c)| (t, c))
    }

    pub fn out_count(&self, source: &NodeKey) -> u64 {
        self.successors(source).map(|(_, c)| c).sum()
    }

    pub fn sources(&self) -> BTreeSet<&NodeKey> {
        self.edge_counts.keys().map(|(s, _)| s).collect()
    }

    pub fn check_invariants(&self) -> Result<()> {
        for ((s, t), &c) in &self.edge_counts {
            if c == 0 {
                return Err(Error::input(format!("edge {s} -> {t} has zero count")));
            }
            for end in [s, t] {
                if !self.nodes.contains(end) {
                    return Err(Error::input(format!("edge endpoint {end} is not a node")));
                }
                if end.level() != self.level {
                    return Err(Error::LevelMismatch {
                        expected: self.level,
                        found: end.level(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Per-source max-normalized edge scores in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreGraph {
    pub image_id: String,
    pub level: Level,
    pub scores: BTreeMap<(NodeKey, NodeKey), f64>,
}

impl ScoreGraph {
    /// Score of one shift; missing edges (and unknown nodes) score 0.
    pub fn score(&self, source: &NodeKey, target: &NodeKey) -> f64 {
        self.scores
            .get(&(source.clone(), target.clone()))
            .copied()
            .unwrap_or(0.0)
    }
}

/// Fixation density mass per node.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectSaliency {
    pub image_id: String,
    pub values: BTreeMap<NodeKey, f64>,
}

impl ObjectSaliency {
    pub fn get(&self, node: &NodeKey) -> f64 {
        self.values.get(node).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.values.values().sum()
    }

    /// Re-keys object saliency to `level`, summing objects that share an
    /// attribute key.
    pub fn at_level(&self, scene: &Scene, level: Level) -> Result<ObjectSaliency> {
        let mut values = BTreeMap::new();
        for (node, &v) in &self.values {
            let key = match (node, level) {
                (NodeKey::Object(_), Level::Object) => node.clone(),
                (NodeKey::Object(_), Level::Attribute) => scene.attribute_node(node)?,
                (NodeKey::Attribute(_), Level::Attribute) => node.clone(),
                (NodeKey::Attribute(_), Level::Object) => {
                    return Err(Error::LevelMismatch {
                        expected: Level::Object,
                        found: Level::Attribute,
                    })
                }
            };
            *values.entry(key).or_insert(0.0) += v;
        }
        Ok(ObjectSaliency {
            image_id: self.image_id.clone(),
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_object_scene() -> Scene {
        #[rustfmt::skip]
        let labels = vec![
            1, 1, 0, 0,
            1, 1, 0, 2,
            0, 0, 0, 2,
        ];
        let mut attrs = BTreeMap::new();
        attrs.insert(1, BTreeSet::from(["Touch".to_string()]));
        Scene::from_labels("img", 4, 3, labels, attrs).unwrap()
    }

    #[test]
    fn consistent_scene_has_no_violations() {
        let scene = two_object_scene();
        assert_eq!(scene.objects[&1].pixel_count, 4);
        assert_eq!(scene.objects[&2].pixel_count, 2);
        assert_eq!(validate_scene(&scene), Vec::<String>::new());
    }

    #[test]
    fn raster_label_missing_from_objects() {
        let mut scene = two_object_scene();
        scene.labels[2] = 5;
        scene.objects.get_mut(&1).unwrap();
        let v = validate_scene(&scene);
        assert_eq!(v, vec!["raster label 5 missing from objects".to_string()]);
    }

    #[test]
    fn pixel_count_mismatch_matches_brute_force_count() {
        let mut scene = two_object_scene();
        scene.objects.get_mut(&1).unwrap().pixel_count = 3;
        let brute = scene.labels.iter().filter(|&&l| l == 1).count();
        let v = validate_scene(&scene);
        assert_eq!(v.len(), 1);
        assert!(v[0].starts_with("pixel_count mismatch for object 1"));
        assert!(v[0].ends_with(&format!("raster has {brute}")));
    }

    #[test]
    fn validate_is_idempotent() {
        let mut scene = two_object_scene();
        scene.objects.remove(&2);
        let before = scene.clone();
        assert_eq!(validate_scene(&scene), validate_scene(&scene));
        assert_eq!(scene, before);
    }

    #[test]
    fn attribute_keys() {
        let scene = two_object_scene();
        assert_eq!(scene.node_key(1, Level::Attribute).unwrap(), NodeKey::from("Touch"));
        assert_eq!(scene.node_key(2, Level::Attribute).unwrap(), NodeKey::from("None"));
        let multi = BTreeSet::from(["Watchability".to_string(), "Touch".to_string()]);
        assert_eq!(attribute_key(&multi), "Touch & Watchability");
    }

    #[test]
    fn attributes_for_unknown_object_rejected() {
        let mut attrs = BTreeMap::new();
        attrs.insert(9, BTreeSet::from(["Smell".to_string()]));
        let err = Scene::from_labels("img", 2, 1, vec![1, 0], attrs).unwrap_err();
        assert!(matches!(err, Error::InvalidScene { .. }));
    }

    #[test]
    fn fixation_pixel_floors() {
        let f = Fixation::new("i", "o", 0, 3.99, 0.0);
        assert_eq!(f.pixel(4, 3), Some((3, 0)));
        assert_eq!(Fixation::new("i", "o", 0, 4.0, 0.0).pixel(4, 3), None);
        assert_eq!(Fixation::new("i", "o", 0, -0.1, 0.0).pixel(4, 3), None);
        assert_eq!(Fixation::new("i", "o", 0, f64::NAN, 0.0).pixel(4, 3), None);
    }

    #[test]
    fn successors_are_scoped_to_source() {
        let mut g = AttentionGraph::empty("i", Level::Object);
        for (s, t, c) in [(1, 2, 3), (1, 3, 1), (2, 1, 5), (0, 1, 1)] {
            g.edge_counts.insert((s.into(), t.into()), c);
        }
        let succ: Vec<_> = g.successors(&1.into()).map(|(t, c)| (t.clone(), c)).collect();
        assert_eq!(succ, vec![(2.into(), 3), (3.into(), 1)]);
        assert_eq!(g.out_count(&2.into()), 5);
        assert_eq!(g.out_count(&7.into()), 0);
    }
}
