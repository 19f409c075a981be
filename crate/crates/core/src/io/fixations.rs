//! Delimiter-separated fixation tables.
//!
//! Header: `image_id,observer_id,seq_index,x,y[,duration_ms]`. The delimiter
//! (comma, tab or semicolon) is taken from the header line.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::format::format_float;
use crate::model::{Fixation, Scene};

const REQUIRED: [&str; 5] = ["image_id", "observer_id", "seq_index", "x", "y"];

fn sniff_delimiter(text: &str) -> u8 {
    let header = text.lines().next().unwrap_or("");
    if header.contains('\t') {
        b'\t'
    } else if header.contains(';') && !header.contains(',') {
        b';'
    } else {
        b','
    }
}

/// Parses fixations, keeping file order.
pub fn parse_fixations(text: &str, origin: &Path) -> Result<Vec<Fixation>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(sniff_delimiter(text))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(origin, 1, e.to_string()))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(REQUIRED) {
        *slot = column(name)
            .ok_or_else(|| Error::parse(origin, 1, format!("header is missing column '{name}'")))?;
    }
    let duration_col = column("duration_ms");

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(origin, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(i).unwrap_or("");
        let number = |i: usize, name: &str| -> Result<f64> {
            let raw = field(i);
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(origin, line, format!("{name} '{raw}' is not a finite number")))
        };
        let seq_raw = field(idx[2]);
        let seq_index = seq_raw.parse::<u32>().map_err(|_| {
            Error::parse(origin, line, format!("seq_index '{seq_raw}' is not a non-negative integer"))
        })?;
        let duration_ms = match duration_col.map(field) {
            None | Some("") => 0.0,
            Some(_) => number(duration_col.unwrap(), "duration_ms")?,
        };
        if duration_ms < 0.0 {
            return Err(Error::parse(origin, line, "duration_ms is negative"));
        }
        let image_id = field(idx[0]);
        let observer_id = field(idx[1]);
        if image_id.is_empty() || observer_id.is_empty() {
            return Err(Error::parse(origin, line, "image_id and observer_id must be non-empty"));
        }
        out.push(Fixation {
            image_id: image_id.to_string(),
            observer_id: observer_id.to_string(),
            seq_index,
            x: number(idx[3], "x")?,
            y: number(idx[4], "y")?,
            duration_ms,
        });
    }
    Ok(out)
}

/// Checks that every (image, observer) run of `seq_index` is unique and
/// contiguous from 0.
pub fn check_sequences(fixations: &[Fixation], origin: &Path) -> Result<()> {
    let mut seen: HashMap<(&str, &str), Vec<u32>> = HashMap::new();
    for f in fixations {
        seen.entry((&f.image_id, &f.observer_id)).or_default().push(f.seq_index);
    }
    let mut keys: Vec<_> = seen.keys().copied().collect();
    keys.sort();
    for key in keys {
        let mut idx = seen[&key].clone();
        idx.sort_unstable();
        if let Some(w) = idx.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::parse(
                origin,
                0,
                format!("duplicate seq_index {} for observer {} on image {}", w[0], key.1, key.0),
            ));
        }
        if let Some((pos, &v)) = idx.iter().enumerate().find(|&(i, &v)| v != i as u32) {
            return Err(Error::parse(
                origin,
                0,
                format!(
                    "seq_index for observer {} on image {} is not a contiguous run from 0 (expected {pos}, found {v})",
                    key.1, key.0
                ),
            ));
        }
    }
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    let mut text = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    Ok(text)
}

/// Loads and validates a fixation table, in file order.
pub fn load_fixations_in_file_order(path: &Path) -> Result<Vec<Fixation>> {
    let fixations = parse_fixations(&read_text(path)?, path)?;
    check_sequences(&fixations, path)?;
    Ok(fixations)
}

/// Loads and validates a fixation table, sorted by image, observer and
/// `seq_index`.
pub fn load_fixations(path: &Path) -> Result<Vec<Fixation>> {
    let mut fixations = load_fixations_in_file_order(path)?;
    sort_fixations(&mut fixations);
    Ok(fixations)
}

pub fn sort_fixations(fixations: &mut [Fixation]) {
    fixations.sort_by(|a, b| {
        (&a.image_id, &a.observer_id, a.seq_index).cmp(&(&b.image_id, &b.observer_id, b.seq_index))
    });
}

/// Rejects fixations that lie outside their scene or reference a missing one.
pub fn check_against_scenes(fixations: &[Fixation], scenes: &BTreeMap<String, Scene>) -> Result<()> {
    for f in fixations {
        let scene = scenes.get(&f.image_id).ok_or_else(|| {
            Error::input(format!(
                "fixation {}/{} references image {} which has no scene",
                f.observer_id, f.seq_index, f.image_id
            ))
        })?;
        if f.pixel(scene.width, scene.height).is_none() {
            return Err(Error::OutOfBounds {
                image_id: f.image_id.clone(),
                observer_id: f.observer_id.clone(),
                seq_index: f.seq_index,
                x: f.x,
                y: f.y,
                width: scene.width,
                height: scene.height,
            });
        }
    }
    Ok(())
}

pub fn write_fixations<W: Write>(out: W, fixations: &[Fixation]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["image_id", "observer_id", "seq_index", "x", "y", "duration_ms"])?;
    for f in fixations {
        w.write_record([
            f.image_id.clone(),
            f.observer_id.clone(),
            f.seq_index.to_string(),
            format_float(f.x),
            format_float(f.y),
            format_float(f.duration_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}
