//! Chance and Random reference scanpaths.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::locate::ObjectLocator;
use crate::model::{Fixation, Scene, SemanticScanpath};

pub const CHANCE_OBSERVER: &str = "chance";

/// Object scanpath from `n_points` positions drawn uniformly over the image.
pub fn chance_scanpath(
    scene: &Scene,
    n_points: usize,
    seed: u64,
    tolerance_px: f64,
) -> Result<SemanticScanpath> {
    chance_scanpath_with(&ObjectLocator::new(scene), n_points, seed, tolerance_px)
}

pub fn chance_scanpath_with(
    locator: &ObjectLocator<'_>,
    n_points: usize,
    seed: u64,
    tolerance_px: f64,
) -> Result<SemanticScanpath> {
    if n_points == 0 {
        return Err(Error::input("chance baseline needs at least one point"));
    }
    let scene = locator.scene();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (scene.width as f64, scene.height as f64);
    let points: Vec<Fixation> = (0..n_points)
        .map(|i| {
            let x = rng.random::<f64>() * w;
            let y = rng.random::<f64>() * h;
            Fixation::new(&scene.image_id, CHANCE_OBSERVER, i as u32, x, y)
        })
        .collect();
    locator.object_scanpath(&points, tolerance_px)
}

/// Median sequence length, rounding half up; `None` for no sequences.
pub fn median_fixation_count<'a, I>(sequences: I) -> Option<usize>
where
    I: IntoIterator<Item = &'a [Fixation]>,
{
    let mut lens: Vec<usize> = sequences.into_iter().map(<[Fixation]>::len).collect();
    if lens.is_empty() {
        return None;
    }
    lens.sort_unstable();
    let n = lens.len();
    Some(if n % 2 == 1 {
        lens[n / 2]
    } else {
        (lens[n / 2 - 1] + lens[n / 2]).div_ceil(2)
    })
}

/// Picks a donor sequence recorded on an image other than `target_image`.
/// Returns its index in `pool`.
pub fn choose_donor(pool: &[&[Fixation]], target_image: &str, seed: u64) -> Option<usize> {
    let eligible: Vec<usize> = pool
        .iter()
        .enumerate()
        .filter(|(_, seq)| seq.first().is_some_and(|f| f.image_id != target_image))
        .map(|(i, _)| i)
        .collect();
    if eligible.is_empty() {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Some(eligible[rng.random_range(0..eligible.len())])
}

/// Replays another scene's human fixations on `target`.
///
/// Positions outside the target are clamped to the nearest in-bounds pixel
/// so the sequence length is preserved.
pub fn random_scanpath(
    donor: &[Fixation],
    target: &Scene,
    tolerance_px: f64,
) -> Result<SemanticScanpath> {
    random_scanpath_with(donor, &ObjectLocator::new(target), tolerance_px)
}

pub fn random_scanpath_with(
    donor: &[Fixation],
    locator: &ObjectLocator<'_>,
    tolerance_px: f64,
) -> Result<SemanticScanpath> {
    let target = locator.scene();
    let first = donor
        .first()
        .ok_or_else(|| Error::input("random baseline needs a non-empty donor sequence"))?;
    if first.image_id == target.image_id {
        return Err(Error::input(format!(
            "donor sequence was recorded on the target image {}",
            target.image_id
        )));
    }
    let observer = format!("random:{}/{}", first.image_id, first.observer_id);
    let max_x = (target.width - 1) as f64;
    let max_y = (target.height - 1) as f64;
    let replayed: Vec<Fixation> = donor
        .iter()
        .map(|f| Fixation {
            image_id: target.image_id.clone(),
            observer_id: observer.clone(),
            seq_index: f.seq_index,
            x: clamp_coord(f.x, max_x),
            y: clamp_coord(f.y, max_y),
            duration_ms: f.duration_ms,
        })
        .collect();
    locator.object_scanpath(&replayed, tolerance_px)
}

fn clamp_coord(v: f64, max: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else if v >= max + 1.0 {
        max
    } else {
        v.max(0.0)
    }
}
