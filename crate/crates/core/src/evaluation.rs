//! Scoring predicted scanpaths against the human attention graph of each
//! image, plus the leave-one-observer-out human reference.

use std::collections::BTreeMap;

use crate::cohort::GroupImageModel;
use crate::error::{Error, Result};
use crate::graph::{build_attention_graph, normalize_score_graph};
use crate::metrics::{fixation_density, object_saliency, score_scanpath, score_scanpath_weighted};
use crate::model::{Fixation, Level, Scene, SemanticScanpath};

/// Graph, score graph and saliency of a set of observers on one scene.
pub fn image_model<'a, F>(
    scene: &Scene,
    scanpaths: &[&SemanticScanpath],
    fixations: F,
    level: Level,
    sigma_px: f64,
) -> Result<GroupImageModel>
where
    F: IntoIterator<Item = &'a Fixation>,
{
    let graph = build_attention_graph(scanpaths.iter().copied())?;
    if graph.level != level {
        return Err(Error::LevelMismatch {
            expected: level,
            found: graph.level,
        });
    }
    let score_graph = normalize_score_graph(&graph);
    let density = fixation_density(&scene.image_id, fixations, scene.width, scene.height, sigma_px)?;
    let saliency = object_saliency(&density, scene)?.at_level(scene, level)?;
    Ok(GroupImageModel {
        graph,
        score_graph,
        saliency,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathScore {
    pub image_id: String,
    pub observer_id: String,
    /// `None` when the path has fewer than two terms.
    pub s_scan: Option<f64>,
    pub s_scan_weighted: Option<f64>,
}

pub fn score_against(sp: &SemanticScanpath, model: &GroupImageModel) -> Result<PathScore> {
    let (s, sw) = if sp.len() < 2 {
        (None, None)
    } else {
        (
            Some(score_scanpath(sp, &model.score_graph)?.value),
            Some(score_scanpath_weighted(sp, &model.score_graph, &model.saliency)?.value),
        )
    };
    Ok(PathScore {
        image_id: sp.image_id.clone(),
        observer_id: sp.observer_id.clone(),
        s_scan: s,
        s_scan_weighted: sw,
    })
}

/// Scores every human observer against a graph built from all the other
/// observers of the same image.
///
/// `observers` maps observer id to its raw fixations and its scanpath (if
/// any fixation was retained). Observers without a scanpath still add
/// density to the others' saliency.
pub fn leave_one_observer_out(
    scene: &Scene,
    observers: &BTreeMap<String, (Vec<Fixation>, Option<SemanticScanpath>)>,
    level: Level,
    sigma_px: f64,
) -> Result<Vec<PathScore>> {
    let mut out = Vec::new();
    for (held_out, (_, sp)) in observers {
        let Some(sp) = sp else { continue };
        let others: Vec<&SemanticScanpath> = observers
            .iter()
            .filter(|(id, _)| *id != held_out)
            .filter_map(|(_, (_, p))| p.as_ref())
            .collect();
        if others.is_empty() {
            continue;
        }
        let fixations = observers
            .iter()
            .filter(|(id, _)| *id != held_out)
            .flat_map(|(_, (f, _))| f.iter());
        let model = image_model(scene, &others, fixations, level, sigma_px)?;
        out.push(score_against(sp, &model)?);
    }
    Ok(out)
}

/// Mean of the defined values, `None` if there are none.
pub fn mean_defined<I: IntoIterator<Item = Option<f64>>>(values: I) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scanpath::build_object_scanpath;

    fn strip() -> Scene {
        let mut labels = vec![0u32; 30];
        labels[0..3].fill(1);
        labels[10..13].fill(2);
        labels[20..23].fill(3);
        Scene::from_labels("img", 30, 1, labels, BTreeMap::new()).unwrap()
    }

    fn observer(id: &str, xs: &[f64]) -> (String, (Vec<Fixation>, Option<SemanticScanpath>)) {
        let f: Vec<Fixation> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| Fixation::new("img", id, i as u32, x, 0.0))
            .collect();
        let sp = build_object_scanpath(&f, &strip(), 0.0).ok();
        (id.to_string(), (f, sp))
    }

    #[test]
    fn identical_observers_score_one() {
        let obs: BTreeMap<_, _> = ["a", "b", "c"]
            .iter()
            .map(|id| observer(id, &[1.0, 11.0, 21.0]))
            .collect();
        let scores = leave_one_observer_out(&strip(), &obs, Level::Object, 2.0).unwrap();
        assert_eq!(scores.len(), 3);
        for s in scores {
            assert_eq!(s.s_scan, Some(1.0));
            assert_eq!(s.s_scan_weighted, Some(1.0));
        }
    }

    #[test]
    fn held_out_observer_is_excluded() {
        // only "a" ever shifts 3 -> 1; held out, that edge is missing
        let obs: BTreeMap<_, _> = [
            observer("a", &[21.0, 1.0]),
            observer("b", &[1.0, 11.0]),
            observer("c", &[1.0, 11.0]),
        ]
        .into_iter()
        .collect();
        let scores = leave_one_observer_out(&strip(), &obs, Level::Object, 2.0).unwrap();
        let a = scores.iter().find(|s| s.observer_id == "a").unwrap();
        assert_eq!(a.s_scan, Some(0.0));
        let b = scores.iter().find(|s| s.observer_id == "b").unwrap();
        assert_eq!(b.s_scan, Some(1.0));
    }

    #[test]
    fn means_skip_undefined() {
        assert_eq!(mean_defined([Some(1.0), None, Some(0.0)]), Some(0.5));
        assert_eq!(mean_defined([None]), None);
    }
}
