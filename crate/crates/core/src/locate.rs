//! Fixation-to-object assignment.
//!
//! A fixation is located at the raster cell it falls in. Distances are
//! measured between cell centres, so squared distances are integers and the
//! tolerance comparison is exact.

use crate::error::{Error, Result};
use crate::model::{Fixation, Scene};

/// Default tolerance around objects, in pixels.
pub const DEFAULT_TOLERANCE_PX: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AssignmentOutcome {
    Inside(u32),
    Near { object_id: u32, distance_px: f64 },
    /// `distance_px` is infinite when the scene has no objects at all.
    Discarded { distance_px: f64 },
}

impl AssignmentOutcome {
    pub fn object_id(&self) -> Option<u32> {
        match *self {
            AssignmentOutcome::Inside(id) => Some(id),
            AssignmentOutcome::Near { object_id, .. } => Some(object_id),
            AssignmentOutcome::Discarded { .. } => None,
        }
    }

    pub fn is_retained(&self) -> bool {
        self.object_id().is_some()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixationAssignment {
    pub image_id: String,
    pub observer_id: String,
    pub seq_index: u32,
    pub outcome: AssignmentOutcome,
}

/// Exact squared Euclidean distance from every cell to the nearest labelled
/// cell of a scene, computed once and shared by all lookups on that scene.
#[derive(Clone, Debug)]
pub struct ObjectLocator<'a> {
    scene: &'a Scene,
    /// `None` where the scene has no labelled cell at all.
    sq_dist: Vec<Option<u64>>,
}

impl<'a> ObjectLocator<'a> {
    pub fn new(scene: &'a Scene) -> Self {
        let sq_dist = squared_distance_field(
            scene.width as usize,
            scene.height as usize,
            |i| scene.labels[i] != 0,
        );
        ObjectLocator { scene, sq_dist }
    }

    pub fn scene(&self) -> &'a Scene {
        self.scene
    }

    /// Squared distance from cell `(col, row)` to the closest labelled cell.
    pub fn squared_distance(&self, col: u32, row: u32) -> Option<u64> {
        self.sq_dist[row as usize * self.scene.width as usize + col as usize]
    }

    /// Nearest object to a cell; equidistant objects resolve to the smallest id.
    pub fn nearest_object(&self, col: u32, row: u32) -> Option<(u32, u64)> {
        let d2 = self.squared_distance(col, row)?;
        let label = self.scene.label_at(col, row);
        if d2 == 0 {
            return Some((label, 0));
        }
        let (w, h) = (self.scene.width as i64, self.scene.height as i64);
        let (c, r) = (col as i64, row as i64);
        let reach = isqrt(d2) as i64;
        let mut best: Option<u32> = None;
        for dy in -reach..=reach {
            let rest = d2 as i64 - dy * dy;
            let dx = isqrt(rest as u64) as i64;
            if dx * dx != rest {
                continue;
            }
            let y = r + dy;
            if y < 0 || y >= h {
                continue;
            }
            for x in [c - dx, c + dx] {
                if x < 0 || x >= w {
                    continue;
                }
                let id = self.scene.label_at(x as u32, y as u32);
                if id != 0 {
                    best = Some(best.map_or(id, |b| b.min(id)));
                }
            }
        }
        best.map(|id| (id, d2))
    }

    pub fn assign(&self, fixation: &Fixation, tolerance_px: f64) -> Result<FixationAssignment> {
        let outcome = self.outcome(fixation, tolerance_px)?;
        Ok(FixationAssignment {
            image_id: fixation.image_id.clone(),
            observer_id: fixation.observer_id.clone(),
            seq_index: fixation.seq_index,
            outcome,
        })
    }

    pub fn outcome(&self, fixation: &Fixation, tolerance_px: f64) -> Result<AssignmentOutcome> {
        let scene = self.scene;
        let (col, row) = fixation
            .pixel(scene.width, scene.height)
            .ok_or_else(|| Error::OutOfBounds {
                image_id: fixation.image_id.clone(),
                observer_id: fixation.observer_id.clone(),
                seq_index: fixation.seq_index,
                x: fixation.x,
                y: fixation.y,
                width: scene.width,
                height: scene.height,
            })?;
        let label = scene.label_at(col, row);
        if label != 0 {
            return Ok(AssignmentOutcome::Inside(label));
        }
        let Some(d2) = self.squared_distance(col, row) else {
            return Ok(AssignmentOutcome::Discarded {
                distance_px: f64::INFINITY,
            });
        };
        let distance_px = (d2 as f64).sqrt();
        // "beyond" the tolerance is discarded; exactly at it is kept
        if (d2 as f64) <= tolerance_px * tolerance_px {
            let (object_id, _) = self
                .nearest_object(col, row)
                .expect("finite distance implies a labelled cell");
            Ok(AssignmentOutcome::Near {
                object_id,
                distance_px,
            })
        } else {
            Ok(AssignmentOutcome::Discarded { distance_px })
        }
    }
}

/// Assigns a single fixation. Builds a fresh distance field; prefer
/// [`ObjectLocator`] when assigning many fixations on one scene.
pub fn assign_fixation(
    fixation: &Fixation,
    scene: &Scene,
    tolerance_px: f64,
) -> Result<FixationAssignment> {
    check_tolerance(tolerance_px)?;
    ObjectLocator::new(scene).assign(fixation, tolerance_px)
}

pub(crate) fn check_tolerance(tolerance_px: f64) -> Result<()> {
    if tolerance_px >= 0.0 && tolerance_px.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!(
            "tolerance must be a non-negative number of pixels, got {tolerance_px}"
        )))
    }
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Two-pass exact squared Euclidean distance transform (lower envelope of
/// parabolas), using integer arithmetic throughout.
fn squared_distance_field(
    width: usize,
    height: usize,
    is_site: impl Fn(usize) -> bool,
) -> Vec<Option<u64>> {
    // column pass: vertical distance to the nearest site in the same column
    let mut vertical: Vec<Option<u64>> = vec![None; width * height];
    for col in 0..width {
        let mut last: Option<usize> = None;
        for row in 0..height {
            let i = row * width + col;
            if is_site(i) {
                last = Some(row);
            }
            vertical[i] = last.map(|r| (row - r) as u64);
        }
        let mut next: Option<usize> = None;
        for row in (0..height).rev() {
            let i = row * width + col;
            if is_site(i) {
                next = Some(row);
            }
            if let Some(r) = next {
                let d = (r - row) as u64;
                vertical[i] = Some(vertical[i].map_or(d, |v| v.min(d)));
            }
        }
    }

    let mut out = vec![None; width * height];
    let mut f: Vec<Option<i64>> = vec![None; width];
    let mut env = LowerEnvelope::with_capacity(width);
    for row in 0..height {
        for col in 0..width {
            f[col] = vertical[row * width + col].map(|d| (d * d) as i64);
        }
        env.build(&f);
        env.evaluate(&f, &mut out[row * width..(row + 1) * width]);
    }
    out
}

/// Lower envelope of the parabolas `(x - q)^2 + f(q)`. Region boundaries are
/// kept as exact fractions `num / den` with `den > 0`.
struct LowerEnvelope {
    sites: Vec<i64>,
    starts: Vec<(i64, i64)>,
}

impl LowerEnvelope {
    fn with_capacity(n: usize) -> Self {
        LowerEnvelope {
            sites: Vec::with_capacity(n),
            starts: Vec::with_capacity(n),
        }
    }

    fn build(&mut self, f: &[Option<i64>]) {
        self.sites.clear();
        self.starts.clear();
        for (q, fq) in f.iter().enumerate() {
            let Some(fq) = *fq else { continue };
            let q = q as i64;
            loop {
                let Some(&p) = self.sites.last() else {
                    self.sites.push(q);
                    // -inf start: never compared for the first region
                    self.starts.push((i64::MIN, 1));
                    break;
                };
                let fp = f[p as usize].unwrap();
                // intersection of parabolas at p and q
                let num = (fq + q * q) - (fp + p * p);
                let den = 2 * (q - p);
                let &(zn, zd) = self.starts.last().unwrap();
                // s <= z  <=>  num * zd <= zn * den  (both denominators positive)
                let at_or_before = self.starts.len() > 1
                    && (num as i128) * (zd as i128) <= (zn as i128) * (den as i128);
                if at_or_before {
                    self.sites.pop();
                    self.starts.pop();
                } else {
                    self.sites.push(q);
                    self.starts.push((num, den));
                    break;
                }
            }
        }
    }

    fn evaluate(&self, f: &[Option<i64>], out: &mut [Option<u64>]) {
        if self.sites.is_empty() {
            out.iter_mut().for_each(|o| *o = None);
            return;
        }
        let mut k = 0;
        for (x, slot) in out.iter_mut().enumerate() {
            let x = x as i64;
            // advance while the next region starts strictly before x
            while k + 1 < self.sites.len() {
                let (zn, zd) = self.starts[k + 1];
                if (zn as i128) < (x as i128) * (zd as i128) {
                    k += 1;
                } else {
                    break;
                }
            }
            let q = self.sites[k];
            let d = (x - q) * (x - q) + f[q as usize].unwrap();
            *slot = Some(d as u64);
        }
    }
}
