//! Group-graph classification of observers.
//!
//! Each group pools its members' scanpaths into one attention graph per
//! image. A subject is scored against both groups' graphs on every image it
//! viewed; each image votes for the higher-scoring group and the majority of
//! votes decides. Leave-one-subject-out evaluation rebuilds the held-out
//! subject's own group without it.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{build_attention_graph, node_intensity, normalize_score_graph};
use crate::locate::{ObjectLocator, DEFAULT_TOLERANCE_PX};
use crate::metrics::{fixation_density, object_saliency, score_with, Metric, DEFAULT_SIGMA_PX};
use crate::model::{AttentionGraph, Fixation, Level, ObjectSaliency, Scene, ScoreGraph, SemanticScanpath};
use crate::stats::{mean, welch_t_test, TTest};

#[derive(Clone, Debug, PartialEq)]
pub struct Subject {
    pub group: String,
    /// Ordered fixations per image id.
    pub sequences: BTreeMap<String, Vec<Fixation>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CohortDataset {
    pub group_a: String,
    pub group_b: String,
    pub subjects: BTreeMap<String, Subject>,
    pub scenes: BTreeMap<String, Scene>,
}

impl CohortDataset {
    pub fn new(
        group_a: &str,
        group_b: &str,
        subjects: BTreeMap<String, Subject>,
        scenes: BTreeMap<String, Scene>,
    ) -> Result<Self> {
        if group_a == group_b {
            return Err(Error::input(format!("both groups are labelled '{group_a}'")));
        }
        for (id, s) in &subjects {
            if s.group != group_a && s.group != group_b {
                return Err(Error::input(format!(
                    "subject {id} belongs to unknown group '{}'",
                    s.group
                )));
            }
            if let Some(image) = s.sequences.keys().find(|i| !scenes.contains_key(*i)) {
                return Err(Error::input(format!("subject {id} viewed image {image} which has no scene")));
            }
        }
        Ok(CohortDataset {
            group_a: group_a.to_string(),
            group_b: group_b.to_string(),
            subjects,
            scenes,
        })
    }

    fn check_group(&self, group: &str) -> Result<()> {
        if group == self.group_a || group == self.group_b {
            Ok(())
        } else {
            Err(Error::input(format!("unknown group '{group}'")))
        }
    }

    pub fn members<'a>(&'a self, group: &'a str) -> impl Iterator<Item = (&'a String, &'a Subject)> + 'a {
        self.subjects.iter().filter(move |(_, s)| s.group == group)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CohortConfig {
    pub level: Level,
    pub metric: Metric,
    pub tolerance_px: f64,
    pub sigma_px: f64,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            level: Level::Object,
            metric: Metric::SScan,
            tolerance_px: DEFAULT_TOLERANCE_PX,
            sigma_px: DEFAULT_SIGMA_PX,
        }
    }
}

/// Everything a group contributes on one image.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupImageModel {
    pub graph: AttentionGraph,
    pub score_graph: ScoreGraph,
    /// Saliency of the group's own fixations, keyed at the graph's level.
    pub saliency: ObjectSaliency,
}

pub type GroupModels = BTreeMap<String, GroupImageModel>;

/// Subject scanpaths computed once and reused across folds.
struct Prepared<'a> {
    ds: &'a CohortDataset,
    config: CohortConfig,
    /// subject -> image -> scanpath; images whose fixations were all
    /// discarded are absent.
    scanpaths: BTreeMap<&'a str, BTreeMap<&'a str, SemanticScanpath>>,
}

impl<'a> Prepared<'a> {
    fn new(ds: &'a CohortDataset, config: CohortConfig) -> Result<Self> {
        let locators: BTreeMap<&str, ObjectLocator<'_>> = ds
            .scenes
            .iter()
            .map(|(id, scene)| (id.as_str(), ObjectLocator::new(scene)))
            .collect();
        let mut scanpaths = BTreeMap::new();
        for (sid, subject) in &ds.subjects {
            let mut per_image = BTreeMap::new();
            for (image, fixations) in &subject.sequences {
                match locators[image.as_str()].scanpath(fixations, config.tolerance_px, config.level) {
                    Ok(sp) => {
                        per_image.insert(image.as_str(), sp);
                    }
                    Err(Error::EmptyScanpath { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            scanpaths.insert(sid.as_str(), per_image);
        }
        Ok(Prepared {
            ds,
            config,
            scanpaths,
        })
    }

    fn group_models(&self, group: &str, exclude: Option<&str>) -> Result<GroupModels> {
        self.ds.check_group(group)?;
        let members: Vec<(&String, &Subject)> = self
            .ds
            .members(group)
            .filter(|(id, _)| Some(id.as_str()) != exclude)
            .collect();
        let mut models = GroupModels::new();
        for (image_id, scene) in &self.ds.scenes {
            let paths: Vec<&SemanticScanpath> = members
                .iter()
                .filter_map(|(id, _)| self.scanpaths[id.as_str()].get(image_id.as_str()))
                .collect();
            if paths.is_empty() {
                continue;
            }
            let graph = build_attention_graph(paths.iter().copied())?;
            let score_graph = normalize_score_graph(&graph);
            let saliency = match self.config.metric {
                Metric::SScanWeighted => {
                    let fixations = members
                        .iter()
                        .filter_map(|(_, s)| s.sequences.get(image_id))
                        .flatten();
                    let density = fixation_density(
                        image_id,
                        fixations,
                        scene.width,
                        scene.height,
                        self.config.sigma_px,
                    )?;
                    object_saliency(&density, scene)?.at_level(scene, self.config.level)?
                }
                // unused by the unweighted score
                Metric::SScan => ObjectSaliency {
                    image_id: image_id.clone(),
                    values: BTreeMap::new(),
                },
            };
            models.insert(
                image_id.clone(),
                GroupImageModel {
                    graph,
                    score_graph,
                    saliency,
                },
            );
        }
        if models.is_empty() {
            return Err(Error::EmptyGroup {
                group: group.to_string(),
            });
        }
        Ok(models)
    }
}

/// Per-image graphs, score graphs and saliency for one group, optionally
/// leaving one subject out.
pub fn build_group_graphs(
    ds: &CohortDataset,
    group: &str,
    exclude_subject: Option<&str>,
    config: CohortConfig,
) -> Result<GroupModels> {
    Prepared::new(ds, config)?.group_models(group, exclude_subject)
}

/// Outcome of scoring one subject against both groups.
#[derive(Clone, Debug, PartialEq)]
pub struct SubjectVote {
    pub predicted: String,
    pub votes_a: usize,
    pub votes_b: usize,
    /// Images that could not be scored or where both groups tied.
    pub skipped: usize,
    /// Sum over scored images of `score_a - score_b`.
    pub margin: f64,
}

/// Votes over the subject's images.
///
/// Images without a scorable scanpath (fewer than two terms) or without a
/// graph for either group are skipped, as are images where both groups
/// score equally. A tied vote goes to the group with the larger summed score
/// margin, and then to `group_a`.
pub fn classify_subject(
    subject: &str,
    scanpaths: &BTreeMap<String, SemanticScanpath>,
    models_a: &GroupModels,
    models_b: &GroupModels,
    metric: Metric,
    group_a: &str,
    group_b: &str,
) -> Result<SubjectVote> {
    let mut votes_a = 0;
    let mut votes_b = 0;
    let mut skipped = 0;
    let mut margin = 0.0;
    let mut scored = 0;
    for (image_id, sp) in scanpaths {
        let (Some(ma), Some(mb)) = (models_a.get(image_id), models_b.get(image_id)) else {
            skipped += 1;
            continue;
        };
        if sp.len() < 2 {
            skipped += 1;
            continue;
        }
        let sa = score_with(metric, sp, &ma.score_graph, Some(&ma.saliency))?.value;
        let sb = score_with(metric, sp, &mb.score_graph, Some(&mb.saliency))?.value;
        scored += 1;
        margin += sa - sb;
        if sa > sb {
            votes_a += 1;
        } else if sb > sa {
            votes_b += 1;
        } else {
            skipped += 1;
        }
    }
    if scored == 0 {
        return Err(Error::Unclassifiable {
            subject: subject.to_string(),
        });
    }
    let a_wins = match votes_a.cmp(&votes_b) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => margin >= 0.0,
    };
    Ok(SubjectVote {
        predicted: if a_wins { group_a } else { group_b }.to_string(),
        votes_a,
        votes_b,
        skipped,
        margin,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubjectResult {
    pub true_group: String,
    /// `None` when the subject could not be classified.
    pub predicted: Option<String>,
    pub votes_a: usize,
    pub votes_b: usize,
    pub skipped: usize,
    pub margin: f64,
}

impl SubjectResult {
    pub fn is_correct(&self) -> bool {
        self.predicted.as_deref() == Some(self.true_group.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationReport {
    pub group_a: String,
    pub group_b: String,
    pub level: Level,
    pub metric: Metric,
    pub per_subject: BTreeMap<String, SubjectResult>,
    pub correct: usize,
    pub total: usize,
}

impl ClassificationReport {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    /// Accuracy with its raw counts, e.g. `0.80 (33/41)`.
    pub fn summary(&self) -> String {
        format!("{:.2} ({}/{})", self.accuracy(), self.correct, self.total)
    }
}

impl fmt::Display for ClassificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# {} vs {} | level={} metric={}",
            self.group_a, self.group_b, self.level, self.metric
        )?;
        writeln!(f, "subject\ttrue\tpredicted\tvotes_{}\tvotes_{}\tskipped", self.group_a, self.group_b)?;
        for (id, r) in &self.per_subject {
            writeln!(
                f,
                "{id}\t{}\t{}\t{}\t{}\t{}",
                r.true_group,
                r.predicted.as_deref().unwrap_or("-"),
                r.votes_a,
                r.votes_b,
                r.skipped
            )?;
        }
        write!(f, "accuracy\t{}", self.summary())
    }
}

/// Leave-one-subject-out classification of every subject.
///
/// The opposite group's graphs never contained the held-out subject and are
/// built once; the subject's own group is rebuilt without it for each fold.
/// Subjects that cannot be classified count as errors in the accuracy.
pub fn loso_evaluate(ds: &CohortDataset, config: CohortConfig) -> Result<ClassificationReport> {
    for group in [&ds.group_a, &ds.group_b] {
        let n = ds.members(group).count();
        if n < 2 {
            return Err(Error::input(format!(
                "leave-one-subject-out needs at least 2 subjects in group {group}, found {n}"
            )));
        }
    }
    let prepared = Prepared::new(ds, config)?;
    let full_a = prepared.group_models(&ds.group_a, None)?;
    let full_b = prepared.group_models(&ds.group_b, None)?;

    let subjects: Vec<(&String, &Subject)> = ds.subjects.iter().collect();
    let results: Vec<(String, SubjectResult)> = subjects
        .par_iter()
        .map(|&(sid, subject)| -> Result<(String, SubjectResult)> {
            let own = match prepared.group_models(&subject.group, Some(sid)) {
                Ok(m) => Some(m),
                Err(Error::EmptyGroup { .. }) => None,
                Err(e) => return Err(e),
            };
            let scanpaths: BTreeMap<String, SemanticScanpath> = prepared.scanpaths[sid.as_str()]
                .iter()
                .map(|(image, sp)| (image.to_string(), sp.clone()))
                .collect();
            let unbuilt = subject.sequences.len() - scanpaths.len();
            let vote = match own {
                None => Err(Error::Unclassifiable {
                    subject: sid.clone(),
                }),
                Some(own) => {
                    let (ma, mb) = if subject.group == ds.group_a {
                        (&own, &full_b)
                    } else {
                        (&full_a, &own)
                    };
                    classify_subject(sid, &scanpaths, ma, mb, config.metric, &ds.group_a, &ds.group_b)
                }
            };
            let result = match vote {
                Ok(v) => SubjectResult {
                    true_group: subject.group.clone(),
                    predicted: Some(v.predicted),
                    votes_a: v.votes_a,
                    votes_b: v.votes_b,
                    skipped: v.skipped + unbuilt,
                    margin: v.margin,
                },
                Err(Error::Unclassifiable { .. }) => SubjectResult {
                    true_group: subject.group.clone(),
                    predicted: None,
                    votes_a: 0,
                    votes_b: 0,
                    skipped: subject.sequences.len(),
                    margin: 0.0,
                },
                Err(e) => return Err(e),
            };
            Ok((sid.clone(), result))
        })
        .collect::<Result<_>>()?;

    let per_subject: BTreeMap<String, SubjectResult> = results.into_iter().collect();
    let correct = per_subject.values().filter(|r| r.is_correct()).count();
    Ok(ClassificationReport {
        group_a: ds.group_a.clone(),
        group_b: ds.group_b.clone(),
        level: config.level,
        metric: config.metric,
        total: per_subject.len(),
        correct,
        per_subject,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntensityComparison {
    pub per_image_a: BTreeMap<String, u64>,
    pub per_image_b: BTreeMap<String, u64>,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Welch test of `mean_a - mean_b`; `None` when undefined.
    pub welch: Option<TTest>,
}

/// Total gaze shifts of each group's graph per image, with a Welch
/// comparison of the group means.
pub fn group_node_intensity(ds: &CohortDataset, config: CohortConfig) -> Result<IntensityComparison> {
    let config = CohortConfig {
        metric: Metric::SScan,
        ..config
    };
    let prepared = Prepared::new(ds, config)?;
    let per_group = |group: &str| -> Result<BTreeMap<String, u64>> {
        Ok(prepared
            .group_models(group, None)?
            .into_iter()
            .map(|(image, m)| (image, node_intensity(&m.graph)))
            .collect())
    };
    let per_image_a = per_group(&ds.group_a)?;
    let per_image_b = per_group(&ds.group_b)?;
    let a: Vec<f64> = per_image_a.values().map(|&v| v as f64).collect();
    let b: Vec<f64> = per_image_b.values().map(|&v| v as f64).collect();
    Ok(IntensityComparison {
        mean_a: mean(&a),
        mean_b: mean(&b),
        welch: welch_t_test(&a, &b),
        per_image_a,
        per_image_b,
    })
}

/// Convenience for callers holding raw fixations: one subject's scanpaths
/// per image at the configured level, skipping images with no retained
/// fixation.
pub fn subject_scanpaths(
    sequences: &BTreeMap<String, Vec<Fixation>>,
    scenes: &BTreeMap<String, Scene>,
    config: &CohortConfig,
) -> Result<BTreeMap<String, SemanticScanpath>> {
    let mut out = BTreeMap::new();
    for (image, fixations) in sequences {
        let scene = scenes
            .get(image)
            .ok_or_else(|| Error::input(format!("no scene for image {image}")))?;
        match ObjectLocator::new(scene).scanpath(fixations, config.tolerance_px, config.level) {
            Ok(sp) => {
                out.insert(image.clone(), sp);
            }
            Err(Error::EmptyScanpath { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
