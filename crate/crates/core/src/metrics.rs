//! Fixation density, object saliency and the graph-based scanpath scores.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Fixation, NodeKey, ObjectSaliency, Scene, ScoreGraph, SemanticScanpath};

/// Default Gaussian width, roughly one degree of visual angle at typical
/// free-viewing distances.
pub const DEFAULT_SIGMA_PX: f64 = 24.0;

/// Kernel support, in standard deviations.
pub const TRUNCATE_SIGMAS: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMap {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    /// Row-major; sums to 1 unless there were no fixations.
    pub values: Vec<f64>,
}

impl DensityMap {
    pub fn at(&self, col: u32, row: u32) -> f64 {
        self.values[row as usize * self.width as usize + col as usize]
    }

    pub fn argmax(&self) -> Option<(u32, u32)> {
        let (i, &v) = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))?;
        (v > 0.0).then(|| ((i % self.width as usize) as u32, (i / self.width as usize) as u32))
    }
}

/// Sum of isotropic Gaussian bumps, truncated at 3 sigma, centred on the
/// raster cell of each fixation and normalized to unit mass.
pub fn fixation_density<'a, I>(
    image_id: &str,
    fixations: I,
    width: u32,
    height: u32,
    sigma_px: f64,
) -> Result<DensityMap>
where
    I: IntoIterator<Item = &'a Fixation>,
{
    if !(sigma_px > 0.0 && sigma_px.is_finite()) {
        return Err(Error::input(format!("sigma must be positive, got {sigma_px}")));
    }
    let (w, h) = (width as i64, height as i64);
    let mut values = vec![0.0f64; width as usize * height as usize];

    let reach = (TRUNCATE_SIGMAS * sigma_px).floor() as i64;
    let cutoff = (TRUNCATE_SIGMAS * sigma_px).powi(2);
    let denom = 2.0 * sigma_px * sigma_px;
    let mut kernel = Vec::new();
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            let d2 = (dx * dx + dy * dy) as f64;
            if d2 <= cutoff {
                kernel.push((dx, dy, (-d2 / denom).exp()));
            }
        }
    }

    for f in fixations {
        if !(f.x.is_finite() && f.y.is_finite()) {
            continue;
        }
        let (cx, cy) = (f.x.floor() as i64, f.y.floor() as i64);
        for &(dx, dy, k) in &kernel {
            let (x, y) = (cx + dx, cy + dy);
            if x >= 0 && x < w && y >= 0 && y < h {
                values[(y * w + x) as usize] += k;
            }
        }
    }
    let total: f64 = values.iter().sum();
    if total > 0.0 {
        values.iter_mut().for_each(|v| *v /= total);
    }
    Ok(DensityMap {
        image_id: image_id.to_string(),
        width,
        height,
        values,
    })
}

/// Density mass inside each object; background mass is ignored.
pub fn object_saliency(density: &DensityMap, scene: &Scene) -> Result<ObjectSaliency> {
    if density.width != scene.width || density.height != scene.height {
        return Err(Error::input(format!(
            "density map is {}x{} but scene {} is {}x{}",
            density.width, density.height, scene.image_id, scene.width, scene.height
        )));
    }
    let mut sums: BTreeMap<u32, f64> = scene.objects.keys().map(|&id| (id, 0.0)).collect();
    for (&label, &v) in scene.labels.iter().zip(&density.values) {
        if label != 0 {
            *sums.entry(label).or_default() += v;
        }
    }
    Ok(ObjectSaliency {
        image_id: scene.image_id.clone(),
        values: sums.into_iter().map(|(id, v)| (NodeKey::Object(id), v)).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Mean edge score along the path.
    SScan,
    /// Edge scores weighted by the saliency of each shift's source node.
    SScanWeighted,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::SScan => "s_scan",
            Metric::SScanWeighted => "s_scan_weighted",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s_scan" | "s-scan" | "sscan" => Ok(Metric::SScan),
            "s_scan_weighted" | "s-scan-weighted" | "weighted" => Ok(Metric::SScanWeighted),
            other => Err(Error::input(format!("unknown metric '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeTerm {
    pub source: NodeKey,
    pub target: NodeKey,
    pub score: f64,
    /// Source saliency for the weighted score, 1 otherwise.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanScore {
    pub value: f64,
    pub per_edge: Vec<EdgeTerm>,
}

fn check_scorable(p: &SemanticScanpath, sg: &ScoreGraph) -> Result<()> {
    if p.level != sg.level {
        return Err(Error::LevelMismatch {
            expected: sg.level,
            found: p.level,
        });
    }
    if p.terms.len() < 2 {
        return Err(Error::DegenerateScanpath {
            image_id: p.image_id.clone(),
            observer_id: p.observer_id.clone(),
            terms: p.terms.len(),
        });
    }
    Ok(())
}

/// Mean ScoreGraph score over the path's shifts; absent edges score 0.
pub fn score_scanpath(p: &SemanticScanpath, sg: &ScoreGraph) -> Result<ScanScore> {
    check_scorable(p, sg)?;
    let per_edge: Vec<EdgeTerm> = p
        .shifts()
        .map(|(s, t)| EdgeTerm {
            source: s.clone(),
            target: t.clone(),
            score: sg.score(s, t),
            weight: 1.0,
        })
        .collect();
    let value = per_edge.iter().map(|e| e.score).sum::<f64>() / per_edge.len() as f64;
    Ok(ScanScore { value, per_edge })
}

/// Saliency-weighted mean of the path's edge scores.
///
/// Each shift is weighted by the saliency of its source node; the final
/// node's saliency does not enter. A zero total weight scores 0.
pub fn score_scanpath_weighted(
    p: &SemanticScanpath,
    sg: &ScoreGraph,
    saliency: &ObjectSaliency,
) -> Result<ScanScore> {
    check_scorable(p, sg)?;
    let per_edge: Vec<EdgeTerm> = p
        .shifts()
        .map(|(s, t)| EdgeTerm {
            source: s.clone(),
            target: t.clone(),
            score: sg.score(s, t),
            weight: saliency.get(s),
        })
        .collect();
    let mu: f64 = per_edge.iter().map(|e| e.weight).sum();
    let value = if mu > 0.0 {
        per_edge.iter().map(|e| e.weight * e.score).sum::<f64>() / mu
    } else {
        0.0
    };
    Ok(ScanScore { value, per_edge })
}

/// Scores with the chosen metric. `saliency` is required for the weighted one.
pub fn score_with(
    metric: Metric,
    p: &SemanticScanpath,
    sg: &ScoreGraph,
    saliency: Option<&ObjectSaliency>,
) -> Result<ScanScore> {
    match metric {
        Metric::SScan => score_scanpath(p, sg),
        Metric::SScanWeighted => {
            let sal = saliency.ok_or_else(|| {
                Error::input("the weighted score needs object saliency values")
            })?;
            score_scanpath_weighted(p, sg, sal)
        }
    }
}
