//! Semantic scanpaths and attention graphs for eye-tracking data.
//!
//! Raw fixations are mapped onto annotated objects (or their attributes)
//! to form semantic scanpaths; the scanpaths of many observers pool into a
//! weighted directed attention graph per image. Predicted scanpaths are
//! scored against that graph, and groups of observers can be told apart by
//! which group's graphs fit a subject best.

pub mod baselines;
pub mod cli;
pub mod cohort;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod io;
pub mod locate;
pub mod metrics;
pub mod model;
pub mod scanpath;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{
    build_attention_graph, edge_probability, merge_to_attribute_graph, node_intensity,
    normalize_score_graph, sample_scanpath, sample_scanpath_until,
};
pub use locate::{assign_fixation, AssignmentOutcome, FixationAssignment, ObjectLocator};
pub use metrics::{
    fixation_density, object_saliency, score_scanpath, score_scanpath_weighted, DensityMap, Metric,
    ScanScore,
};
pub use model::{
    validate_scene, AttentionGraph, Fixation, Level, NodeKey, ObjectInfo, ObjectSaliency, Scene,
    ScoreGraph, SemanticScanpath,
};
pub use scanpath::{build_object_scanpath, coverage_statistic, to_attribute_scanpath};
