//! Scanpath files: one JSON object per line with the keys `image_id`,
//! `level`, `observer_id`, `source_spans` and `terms`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::model::{Level, NodeKey, SemanticScanpath};

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    image_id: String,
    level: Level,
    observer_id: String,
    source_spans: Vec<(u32, u32)>,
    terms: Vec<NodeKey>,
}

pub fn scanpath_to_json(sp: &SemanticScanpath) -> String {
    // serde_json maps keep keys sorted
    json!({
        "image_id": sp.image_id,
        "level": sp.level,
        "observer_id": sp.observer_id,
        "source_spans": sp.source_spans,
        "terms": sp.terms,
    })
    .to_string()
}

pub fn write_scanpaths<'a, I>(scanpaths: I) -> String
where
    I: IntoIterator<Item = &'a SemanticScanpath>,
{
    let mut out = String::new();
    for sp in scanpaths {
        out.push_str(&scanpath_to_json(sp));
        out.push('\n');
    }
    out
}

pub fn parse_scanpaths(text: &str, origin: &Path) -> Result<Vec<SemanticScanpath>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record =
            serde_json::from_str(line).map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        let sp = SemanticScanpath {
            image_id: rec.image_id,
            observer_id: rec.observer_id,
            level: rec.level,
            terms: rec.terms,
            source_spans: rec.source_spans,
        };
        sp.check_invariants()
            .map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        out.push(sp);
    }
    Ok(out)
}

pub fn load_scanpaths(path: &Path) -> Result<Vec<SemanticScanpath>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scanpaths(&text, path)
}
