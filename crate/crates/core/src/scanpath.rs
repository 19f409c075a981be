//! Semantic scanpath construction.
//!
//! Fixations are first assigned to objects; discarded fixations are dropped,
//! and the remaining run of assignments is collapsed so that consecutive
//! fixations on the same node become one term. Revisits are kept.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::locate::{check_tolerance, ObjectLocator};
use crate::model::{Fixation, Level, NodeKey, Scene, SemanticScanpath};

/// Collapses `(node, seq_index)` pairs into terms and inclusive spans.
pub(crate) fn collapse<I>(items: I) -> (Vec<NodeKey>, Vec<(u32, u32)>)
where
    I: IntoIterator<Item = (NodeKey, (u32, u32))>,
{
    let mut terms: Vec<NodeKey> = Vec::new();
    let mut spans: Vec<(u32, u32)> = Vec::new();
    for (node, (first, last)) in items {
        match terms.last() {
            Some(prev) if *prev == node => spans.last_mut().unwrap().1 = last,
            _ => {
                terms.push(node);
                spans.push((first, last));
            }
        }
    }
    (terms, spans)
}

fn check_sequence(fixations: &[Fixation], scene: &Scene) -> Result<()> {
    let Some(first) = fixations.first() else {
        return Ok(());
    };
    for f in fixations {
        if f.image_id != first.image_id || f.observer_id != first.observer_id {
            return Err(Error::input(format!(
                "fixation sequence mixes {}/{} with {}/{}",
                first.image_id, first.observer_id, f.image_id, f.observer_id
            )));
        }
    }
    if first.image_id != scene.image_id {
        return Err(Error::input(format!(
            "fixations for image {} given with scene {}",
            first.image_id, scene.image_id
        )));
    }
    if let Some(w) = fixations.windows(2).find(|w| w[1].seq_index <= w[0].seq_index) {
        return Err(Error::input(format!(
            "fixations of {}/{} are not in increasing seq_index order ({} then {})",
            first.image_id, first.observer_id, w[0].seq_index, w[1].seq_index
        )));
    }
    Ok(())
}

impl<'a> ObjectLocator<'a> {
    /// Object-level semantic scanpath of one observer's ordered fixations.
    pub fn object_scanpath(
        &self,
        fixations: &[Fixation],
        tolerance_px: f64,
    ) -> Result<SemanticScanpath> {
        check_tolerance(tolerance_px)?;
        let scene = self.scene();
        check_sequence(fixations, scene)?;
        let mut retained = Vec::with_capacity(fixations.len());
        for f in fixations {
            if let Some(id) = self.outcome(f, tolerance_px)?.object_id() {
                retained.push((NodeKey::Object(id), (f.seq_index, f.seq_index)));
            }
        }
        let observer_id = fixations
            .first()
            .map(|f| f.observer_id.clone())
            .unwrap_or_default();
        if retained.is_empty() {
            return Err(Error::EmptyScanpath {
                image_id: scene.image_id.clone(),
                observer_id,
            });
        }
        let (terms, source_spans) = collapse(retained);
        Ok(SemanticScanpath {
            image_id: scene.image_id.clone(),
            observer_id,
            level: Level::Object,
            terms,
            source_spans,
        })
    }

    /// Object scanpath mapped to `level`.
    pub fn scanpath(
        &self,
        fixations: &[Fixation],
        tolerance_px: f64,
        level: Level,
    ) -> Result<SemanticScanpath> {
        let sp = self.object_scanpath(fixations, tolerance_px)?;
        match level {
            Level::Object => Ok(sp),
            Level::Attribute => to_attribute_scanpath(&sp, self.scene()),
        }
    }
}

pub fn build_object_scanpath(
    fixations: &[Fixation],
    scene: &Scene,
    tolerance_px: f64,
) -> Result<SemanticScanpath> {
    ObjectLocator::new(scene).object_scanpath(fixations, tolerance_px)
}

/// Replaces each object term with its attribute key and merges adjacent
/// equal keys.
pub fn to_attribute_scanpath(sp: &SemanticScanpath, scene: &Scene) -> Result<SemanticScanpath> {
    if sp.level != Level::Object {
        return Err(Error::LevelMismatch {
            expected: Level::Object,
            found: sp.level,
        });
    }
    let mapped = sp
        .terms
        .iter()
        .zip(&sp.source_spans)
        .map(|(term, &span)| Ok((scene.attribute_node(term)?, span)))
        .collect::<Result<Vec<_>>>()?;
    let (terms, source_spans) = collapse(mapped);
    Ok(SemanticScanpath {
        image_id: sp.image_id.clone(),
        observer_id: sp.observer_id.clone(),
        level: Level::Attribute,
        terms,
        source_spans,
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Coverage {
    /// `(retained, total)` fixation counts per image.
    pub per_image: BTreeMap<String, (u64, u64)>,
    pub retained: u64,
    pub total: u64,
}

impl Coverage {
    pub fn overall(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.retained as f64 / self.total as f64
        }
    }

    pub fn image_fraction(&self, image_id: &str) -> Option<f64> {
        self.per_image
            .get(image_id)
            .map(|&(r, t)| if t == 0 { 0.0 } else { r as f64 / t as f64 })
    }
}

/// Fraction of fixations located in or near an annotated object.
pub fn coverage_statistic(
    fixations: &[Fixation],
    scenes: &BTreeMap<String, Scene>,
    tolerance_px: f64,
) -> Result<Coverage> {
    check_tolerance(tolerance_px)?;
    let mut by_image: BTreeMap<&str, Vec<&Fixation>> = BTreeMap::new();
    for f in fixations {
        by_image.entry(f.image_id.as_str()).or_default().push(f);
    }
    let mut coverage = Coverage::default();
    for (image_id, fs) in by_image {
        let scene = scenes
            .get(image_id)
            .ok_or_else(|| Error::input(format!("no scene for image {image_id}")))?;
        let locator = ObjectLocator::new(scene);
        let mut retained = 0;
        for f in &fs {
            if locator.outcome(f, tolerance_px)?.is_retained() {
                retained += 1;
            }
        }
        coverage
            .per_image
            .insert(image_id.to_string(), (retained, fs.len() as u64));
        coverage.retained += retained;
        coverage.total += fs.len() as u64;
    }
    Ok(coverage)
}

/// Splits fixations into per-(image, observer) sequences sorted by `seq_index`.
pub fn group_sequences(fixations: &[Fixation]) -> BTreeMap<(String, String), Vec<Fixation>> {
    let mut groups: BTreeMap<(String, String), Vec<Fixation>> = BTreeMap::new();
    for f in fixations {
        groups
            .entry((f.image_id.clone(), f.observer_id.clone()))
            .or_default()
            .push(f.clone());
    }
    for seq in groups.values_mut() {
        seq.sort_by_key(|f| f.seq_index);
    }
    groups
}
