//! File formats: fixation tables, scenes, scanpath files, graph exports and
//! dataset manifests. All writers are canonical: the same value always
//! produces the same bytes.

pub mod fixations;
pub mod format;
pub mod graph;
pub mod manifest;
pub mod scanpaths;
pub mod scene;

pub use fixations::{load_fixations, load_fixations_in_file_order, write_fixations};
pub use format::{format_float, round_float};
pub use graph::{export_graph, graph_from_json, graph_to_json, load_graph, ExportFormat, WeightView};
pub use manifest::{load_cohort, load_dataset, Dataset, DatasetManifest, SubjectConvention};
pub use scanpaths::{load_scanpaths, parse_scanpaths, write_scanpaths};
pub use scene::{load_scene, load_scenes_dir};
