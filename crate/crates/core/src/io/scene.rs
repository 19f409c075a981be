//! Label rasters and object attributes.
//!
//! A raster is either a single-channel portable graymap (8- or 16-bit) or a
//! JSON run-length encoding:
//!
//! ```json
//! {"height": 2, "runs": [[0, 3], [5, 1]], "width": 2}
//! ```
//!
//! Runs are `[label, length]` pairs in row-major order. Attribute files map
//! object ids to attribute names, `{"1": ["Touch"], "2": []}`; a dataset-wide
//! attribute file nests that map under image ids.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufReader, Cursor};
use std::path::{Path, PathBuf};

use image::codecs::pnm::PnmDecoder;
use image::DynamicImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_scene, Scene};

pub type AttributeMap = BTreeMap<u32, BTreeSet<String>>;

pub const RLE_SUFFIX: &str = ".rle.json";
pub const PGM_SUFFIX: &str = ".pgm";

#[derive(Debug, Serialize, Deserialize)]
struct RleRaster {
    height: u32,
    runs: Vec<(u32, u64)>,
    width: u32,
}

/// Image id implied by a raster file name (`img01.pgm`, `img01.rle.json`).
pub fn image_id_from_path(path: &Path) -> Option<String> {
    let name = path.file_name()?.to_str()?;
    name.strip_suffix(RLE_SUFFIX)
        .or_else(|| name.strip_suffix(PGM_SUFFIX))
        .map(str::to_string)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn decode_pgm(bytes: &[u8], path: &Path) -> Result<(u32, u32, Vec<u32>)> {
    let fail = |msg: String| Error::parse(path, 0, msg);
    let decoder = PnmDecoder::new(BufReader::new(Cursor::new(bytes)))
        .map_err(|e| fail(format!("not a portable graymap: {e}")))?;
    let img = DynamicImage::from_decoder(decoder).map_err(|e| fail(e.to_string()))?;
    let (w, h) = (img.width(), img.height());
    let labels = match img {
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(u32::from).collect(),
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(u32::from).collect(),
        other => {
            return Err(fail(format!(
                "label raster must be single-channel, found {:?}",
                other.color()
            )))
        }
    };
    Ok((w, h, labels))
}

fn decode_rle(bytes: &[u8], path: &Path) -> Result<(u32, u32, Vec<u32>)> {
    let rle: RleRaster = serde_json::from_slice(bytes)
        .map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    let expected = rle.width as u64 * rle.height as u64;
    let total: u64 = rle.runs.iter().map(|&(_, n)| n).sum();
    if total != expected {
        return Err(Error::parse(
            path,
            0,
            format!("runs cover {total} cells, expected {}x{}", rle.width, rle.height),
        ));
    }
    let mut labels = Vec::with_capacity(expected as usize);
    for (label, n) in rle.runs {
        labels.extend(std::iter::repeat_n(label, n as usize));
    }
    Ok((rle.width, rle.height, labels))
}

/// Decodes a raster file into `(width, height, labels)`.
pub fn load_raster(path: &Path) -> Result<(u32, u32, Vec<u32>)> {
    let bytes = read_bytes(path)?;
    let is_json = path
        .file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.ends_with(".json"));
    if is_json {
        decode_rle(&bytes, path)
    } else {
        decode_pgm(&bytes, path)
    }
}

fn parse_attribute_map(value: serde_json::Value, path: &Path) -> Result<AttributeMap> {
    let raw: BTreeMap<String, Vec<String>> =
        serde_json::from_value(value).map_err(|e| Error::parse(path, 0, e.to_string()))?;
    raw.into_iter()
        .map(|(k, v)| {
            let id = k
                .trim()
                .parse::<u32>()
                .ok()
                .filter(|&id| id > 0)
                .ok_or_else(|| Error::parse(path, 0, format!("'{k}' is not a positive object id")))?;
            Ok((id, v.into_iter().collect()))
        })
        .collect()
}

fn read_json(path: &Path) -> Result<serde_json::Value> {
    serde_json::from_slice(&read_bytes(path)?).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

/// Reads a per-scene attribute file (`{"object id": [attributes]}`).
pub fn load_attributes(path: &Path) -> Result<AttributeMap> {
    parse_attribute_map(read_json(path)?, path)
}

/// Reads a dataset attribute file (`{"image id": {"object id": [attributes]}}`).
pub fn load_dataset_attributes(path: &Path) -> Result<BTreeMap<String, AttributeMap>> {
    let value = read_json(path)?;
    let serde_json::Value::Object(images) = value else {
        return Err(Error::parse(path, 0, "expected an object keyed by image id"));
    };
    images
        .into_iter()
        .map(|(image, v)| Ok((image, parse_attribute_map(v, path)?)))
        .collect()
}

fn assemble(image_id: &str, raster: (u32, u32, Vec<u32>), attributes: AttributeMap, path: &Path) -> Result<Scene> {
    let (w, h, labels) = raster;
    let scene = Scene::from_labels(image_id, w, h, labels, attributes).map_err(|e| match e {
        Error::Input(msg) => Error::parse(path, 0, msg),
        other => other,
    })?;
    let violations = validate_scene(&scene);
    if !violations.is_empty() {
        return Err(Error::InvalidScene {
            image_id: image_id.to_string(),
            violations,
        });
    }
    Ok(scene)
}

/// Loads one scene. The image id is taken from the raster file name.
pub fn load_scene(raster: &Path, attributes: Option<&Path>) -> Result<Scene> {
    let image_id = image_id_from_path(raster).ok_or_else(|| {
        Error::parse(raster, 0, format!("raster name must end in {PGM_SUFFIX} or {RLE_SUFFIX}"))
    })?;
    let attrs = attributes.map(load_attributes).transpose()?.unwrap_or_default();
    assemble(&image_id, load_raster(raster)?, attrs, raster)
}

/// Loads every raster in a directory, attaching attributes from an optional
/// dataset-wide attribute file.
pub fn load_scenes_dir(dir: &Path, attributes: Option<&Path>) -> Result<BTreeMap<String, Scene>> {
    let mut attrs = attributes
        .map(load_dataset_attributes)
        .transpose()?
        .unwrap_or_default();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_file() && image_id_from_path(&path).is_some() {
            paths.push(path);
        }
    }
    paths.sort();
    let mut scenes = BTreeMap::new();
    for path in paths {
        let image_id = image_id_from_path(&path).unwrap();
        if scenes.contains_key(&image_id) {
            return Err(Error::parse(&path, 0, format!("second raster for image {image_id}")));
        }
        let scene_attrs = attrs.remove(&image_id).unwrap_or_default();
        let scene = assemble(&image_id, load_raster(&path)?, scene_attrs, &path)?;
        scenes.insert(image_id, scene);
    }
    if let Some((image, _)) = attrs.into_iter().next() {
        let at = attributes.map(Path::to_path_buf).unwrap_or_default();
        return Err(Error::parse(at, 0, format!("attributes given for image {image} which has no raster")));
    }
    Ok(scenes)
}

/// 16-bit binary graymap (`P5`, maxval 65535, big-endian samples).
pub fn encode_pgm(scene: &Scene) -> Result<Vec<u8>> {
    let mut out = format!("P5\n{} {}\n65535\n", scene.width, scene.height).into_bytes();
    out.reserve(scene.labels.len() * 2);
    for &l in &scene.labels {
        let v = u16::try_from(l)
            .map_err(|_| Error::input(format!("label {l} does not fit a 16-bit raster")))?;
        out.extend_from_slice(&v.to_be_bytes());
    }
    Ok(out)
}

/// Run-length JSON of a scene's labels.
pub fn encode_rle(scene: &Scene) -> String {
    let mut runs: Vec<(u32, u64)> = Vec::new();
    for &label in &scene.labels {
        match runs.last_mut() {
            Some((l, n)) if *l == label => *n += 1,
            _ => runs.push((label, 1)),
        }
    }
    let rle = RleRaster {
        height: scene.height,
        runs,
        width: scene.width,
    };
    serde_json::to_string(&rle).expect("raster serializes") + "\n"
}

/// `{"object id": [attributes]}` for a scene.
pub fn encode_attributes(scene: &Scene) -> String {
    let map: BTreeMap<String, &BTreeSet<String>> = scene
        .objects
        .values()
        .map(|o| (o.object_id.to_string(), &o.attributes))
        .collect();
    serde_json::to_string_pretty(&map).expect("attributes serialize") + "\n"
}
