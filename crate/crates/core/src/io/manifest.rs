//! Dataset manifests.
//!
//! ```toml
//! name = "td"
//! fixations = "fixations.csv"
//! scenes = "scenes"
//! attributes = "attributes.json"   # optional
//! tolerance_px = 30.0              # optional
//! sigma_px = 24.0                  # optional
//! coordinates = "x=column,y=row,origin=top-left"
//! subject_convention = "observer_id"   # or "sequence_index"
//! ```
//!
//! Relative paths are resolved against the manifest's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::cohort::{CohortDataset, Subject};
use crate::error::{Error, Result};
use crate::io::fixations::{check_against_scenes, load_fixations_in_file_order, sort_fixations};
use crate::io::scene::load_scenes_dir;
use crate::locate::DEFAULT_TOLERANCE_PX;
use crate::metrics::DEFAULT_SIGMA_PX;
use crate::model::{Fixation, Scene};

/// The only coordinate convention the loaders accept.
pub const COORDINATES: &str = "x=column,y=row,origin=top-left";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubjectConvention {
    /// Each observer id is one subject.
    #[default]
    ObserverId,
    /// Datasets without subject ids: the i-th sequence recorded on each
    /// image (in file order) belongs to subject i.
    SequenceIndex,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    pub fixations: PathBuf,
    pub scenes: PathBuf,
    #[serde(default)]
    pub attributes: Option<PathBuf>,
    #[serde(default = "default_tolerance")]
    pub tolerance_px: f64,
    #[serde(default = "default_sigma")]
    pub sigma_px: f64,
    pub coordinates: String,
    #[serde(default)]
    pub subject_convention: SubjectConvention,
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE_PX
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA_PX
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: DatasetManifest = toml::from_str(&text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start].lines().count().max(1))
                .unwrap_or(0);
            Error::parse(path, line, e.message().to_string())
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        m.fixations = base.join(&m.fixations);
        m.scenes = base.join(&m.scenes);
        m.attributes = m.attributes.map(|a| base.join(a));
        m.check(path)?;
        Ok(m)
    }

    fn check(&self, origin: &Path) -> Result<()> {
        if self.coordinates.replace(' ', "") != COORDINATES {
            return Err(Error::parse(
                origin,
                0,
                format!("coordinates must be \"{COORDINATES}\", found \"{}\"", self.coordinates),
            ));
        }
        for (field, v) in [("tolerance_px", self.tolerance_px), ("sigma_px", self.sigma_px)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::parse(origin, 0, format!("{field} must be positive, found {v}")));
            }
        }
        let mut paths = vec![&self.fixations, &self.scenes];
        paths.extend(self.attributes.as_ref());
        for p in paths {
            if !p.exists() {
                return Err(Error::parse(origin, 0, format!("{} does not exist", p.display())));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    /// In file order.
    pub fixations: Vec<Fixation>,
    pub scenes: BTreeMap<String, Scene>,
}

impl Dataset {
    pub fn sorted_fixations(&self) -> Vec<Fixation> {
        let mut f = self.fixations.clone();
        sort_fixations(&mut f);
        f
    }
}

pub fn load_dataset(manifest_path: &Path) -> Result<Dataset> {
    let manifest = DatasetManifest::load(manifest_path)?;
    let scenes = load_scenes_dir(&manifest.scenes, manifest.attributes.as_deref())?;
    let fixations = load_fixations_in_file_order(&manifest.fixations)?;
    check_against_scenes(&fixations, &scenes)?;
    Ok(Dataset {
        manifest,
        fixations,
        scenes,
    })
}

/// Groups a dataset's fixations into subjects of `group`.
pub fn subjects_of(ds: &Dataset, group: &str) -> BTreeMap<String, Subject> {
    let mut subjects: BTreeMap<String, Subject> = BTreeMap::new();
    // (image, observer) -> subject id, in order of first appearance
    let mut assigned: BTreeMap<(&str, &str), String> = BTreeMap::new();
    let mut per_image_count: BTreeMap<&str, usize> = BTreeMap::new();
    for f in &ds.fixations {
        let key = (f.image_id.as_str(), f.observer_id.as_str());
        let sid = assigned
            .entry(key)
            .or_insert_with(|| match ds.manifest.subject_convention {
                SubjectConvention::ObserverId => format!("{group}/{}", f.observer_id),
                SubjectConvention::SequenceIndex => {
                    let n = per_image_count.entry(key.0).or_default();
                    *n += 1;
                    format!("{group}/{}", *n - 1)
                }
            })
            .clone();
        subjects
            .entry(sid)
            .or_insert_with(|| Subject {
                group: group.to_string(),
                sequences: BTreeMap::new(),
            })
            .sequences
            .entry(f.image_id.clone())
            .or_default()
            .push(f.clone());
    }
    for s in subjects.values_mut() {
        for seq in s.sequences.values_mut() {
            seq.sort_by_key(|f| f.seq_index);
        }
    }
    subjects
}

/// Builds a two-group cohort from one manifest per group. Group labels are
/// the manifest names.
pub fn load_cohort(manifest_a: &Path, manifest_b: &Path) -> Result<(CohortDataset, Dataset, Dataset)> {
    let a = load_dataset(manifest_a)?;
    let b = load_dataset(manifest_b)?;
    let mut scenes = a.scenes.clone();
    for (id, scene) in &b.scenes {
        match scenes.get(id) {
            Some(existing) if existing != scene => {
                return Err(Error::input(format!(
                    "image {id} is annotated differently in {} and {}",
                    manifest_a.display(),
                    manifest_b.display()
                )))
            }
            Some(_) => {}
            None => {
                scenes.insert(id.clone(), scene.clone());
            }
        }
    }
    let mut subjects = subjects_of(&a, &a.manifest.name);
    subjects.extend(subjects_of(&b, &b.manifest.name));
    let ds = CohortDataset::new(&a.manifest.name, &b.manifest.name, subjects, scenes)?;
    Ok((ds, a, b))
}
