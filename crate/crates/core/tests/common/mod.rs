//! Fixture builders shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semscan::cohort::{CohortDataset, Subject};
use semscan::io::scene::encode_rle;
use semscan::{AttentionGraph, Fixation, Level, NodeKey, Scene, SemanticScanpath};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn path(image: &str, observer: &str, level: Level, terms: Vec<NodeKey>) -> SemanticScanpath {
    SemanticScanpath {
        image_id: image.into(),
        observer_id: observer.into(),
        level,
        source_spans: (0..terms.len() as u32).map(|i| (i, i)).collect(),
        terms,
    }
}

pub fn letters(s: &str) -> Vec<NodeKey> {
    s.chars().map(|c| NodeKey::from(c.to_string().as_str())).collect()
}

/// Attribute-level graph with letter nodes A..I whose score graph gives
/// F->G 0.3 (and no G->I edge), and A->B, B->E, E->D scores 1.0, 0.7, 0.79.
pub fn letter_graph() -> AttentionGraph {
    let mut g = AttentionGraph::empty("fig", Level::Attribute);
    for n in letters("ABCDEFGHI") {
        g.nodes.insert(n);
    }
    let edges = [
        ("A", "B", 5),
        ("A", "C", 2),
        ("B", "E", 7),
        ("B", "C", 10),
        ("E", "D", 79),
        ("E", "F", 100),
        ("F", "G", 3),
        ("F", "H", 10),
        ("G", "H", 4),
        ("I", "A", 1),
    ];
    for (s, t, c) in edges {
        g.edge_counts.insert((s.into(), t.into()), c);
    }
    g.observer_count = 12;
    g
}

/// Square object blocks on a grid of `cell`-sized cells. Cell `i` holds
/// object `ids[i]` (0 leaves the cell empty).
pub struct GridScene {
    pub scene: Scene,
    pub centres: BTreeMap<u32, (f64, f64)>,
    pub block: u32,
}

pub fn grid_scene(
    image_id: &str,
    cols: u32,
    rows: u32,
    cell: u32,
    block: u32,
    ids: &[u32],
    attributes: BTreeMap<u32, BTreeSet<String>>,
) -> GridScene {
    assert_eq!(ids.len(), (cols * rows) as usize);
    let (w, h) = (cols * cell, rows * cell);
    let mut labels = vec![0u32; (w * h) as usize];
    let mut centres = BTreeMap::new();
    let pad = (cell - block) / 2;
    for (i, &id) in ids.iter().enumerate() {
        if id == 0 {
            continue;
        }
        let (cx, cy) = ((i as u32 % cols) * cell + pad, (i as u32 / cols) * cell + pad);
        for y in cy..cy + block {
            for x in cx..cx + block {
                labels[(y * w + x) as usize] = id;
            }
        }
        centres.insert(id, (cx as f64 + block as f64 / 2.0, cy as f64 + block as f64 / 2.0));
    }
    GridScene {
        scene: Scene::from_labels(image_id, w, h, labels, attributes).unwrap(),
        centres,
        block,
    }
}

/// Row-stochastic matrix without self-transitions.
pub fn random_transitions(rng: &mut impl Rng, k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| {
            let mut row: Vec<f64> = (0..k)
                .map(|j| if i == j { 0.0 } else { rng.random::<f64>().powi(3) + 0.01 })
                .collect();
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
            row
        })
        .collect()
}

pub fn markov_walk(rng: &mut impl Rng, trans: &[Vec<f64>], len: usize) -> Vec<usize> {
    let mut state = rng.random_range(0..trans.len());
    let mut out = vec![state];
    while out.len() < len {
        let mut u = rng.random::<f64>();
        let row = &trans[state];
        let mut next = row.len() - 1;
        for (j, &p) in row.iter().enumerate() {
            if u < p {
                next = j;
                break;
            }
            u -= p;
        }
        if row[next] == 0.0 {
            next = row.iter().rposition(|&p| p > 0.0).unwrap();
        }
        state = next;
        out.push(state);
    }
    out
}

/// Fixations visiting `objects` in order: one to three jittered fixations
/// inside each block, so adjacent repeats get collapsed.
pub fn visit_fixations(
    rng: &mut impl Rng,
    grid: &GridScene,
    observer: &str,
    objects: &[u32],
) -> Vec<Fixation> {
    let half = grid.block as f64 / 2.0 - 1.0;
    let mut out = Vec::new();
    for &o in objects {
        let (cx, cy) = grid.centres[&o];
        for _ in 0..rng.random_range(1..=3) {
            let x = cx + rng.random_range(-half..half);
            let y = cy + rng.random_range(-half..half);
            out.push(Fixation::new(&grid.scene.image_id, observer, out.len() as u32, x, y));
        }
    }
    out
}

/// Two-group cohort over `images` grid scenes. Each group's observers walk
/// the objects with the transition matrix its `transitions` returns for
/// the image.
pub fn markov_cohort<F>(
    seed: u64,
    images: usize,
    per_group: usize,
    walk_len: usize,
    mut transitions: F,
) -> CohortDataset
where
    F: FnMut(&mut ChaCha8Rng, usize, &str) -> Vec<Vec<f64>>,
{
    let mut rng = rng(seed);
    let k = 6u32;
    let mut scenes = BTreeMap::new();
    let mut subjects: BTreeMap<String, Subject> = BTreeMap::new();
    for i in 0..images {
        let image = format!("img{i:02}");
        let mut ids: Vec<u32> = (1..=k).collect();
        ids.shuffle(&mut rng);
        let grid = grid_scene(&image, 3, 2, 16, 10, &ids, BTreeMap::new());
        for group in ["a", "b"] {
            let trans = transitions(&mut rng, i, group);
            for s in 0..per_group {
                let sid = format!("{group}/s{s}");
                let objs: Vec<u32> = markov_walk(&mut rng, &trans, walk_len)
                    .into_iter()
                    .map(|j| j as u32 + 1)
                    .collect();
                let fix = visit_fixations(&mut rng, &grid, &sid, &objs);
                subjects
                    .entry(sid)
                    .or_insert_with(|| Subject {
                        group: group.into(),
                        sequences: BTreeMap::new(),
                    })
                    .sequences
                    .insert(image.clone(), fix);
            }
        }
        scenes.insert(image, grid.scene);
    }
    CohortDataset::new("a", "b", subjects, scenes).unwrap()
}

/// Transition matrix over 6 nodes that only steps by the given offsets.
pub fn offset_transitions(offsets: &[usize]) -> Vec<Vec<f64>> {
    let k = 6;
    (0..k)
        .map(|i| {
            let mut row = vec![0.0; k];
            for &o in offsets {
                row[(i + o) % k] += 1.0 / offsets.len() as f64;
            }
            row
        })
        .collect()
}

/// Random attention graph with up to `max_nodes` nodes.
pub fn random_graph(rng: &mut impl Rng, max_nodes: usize, level: Level) -> AttentionGraph {
    const NAMES: [&str; 12] = [
        "Face", "Text", "Touch", "Smell & Taste", "None", "say \"hi\"", "a,b", "back\\slash",
        "Gazed", "Motion", "Operability", "Watchability",
    ];
    let n = rng.random_range(1..=max_nodes);
    let nodes: Vec<NodeKey> = match level {
        Level::Object => {
            let mut ids: Vec<u32> = (1..=40).collect();
            ids.shuffle(rng);
            ids[..n].iter().map(|&i| NodeKey::Object(i)).collect()
        }
        Level::Attribute => {
            let mut names = NAMES.to_vec();
            names.shuffle(rng);
            names[..n].iter().map(|&s| NodeKey::from(s)).collect()
        }
    };
    let mut g = AttentionGraph::empty(&format!("g{}", rng.random::<u16>()), level);
    g.nodes.extend(nodes.iter().cloned());
    for s in &nodes {
        for t in &nodes {
            if rng.random_bool(0.4) {
                g.edge_counts.insert((s.clone(), t.clone()), rng.random_range(1..60));
            }
        }
    }
    g.observer_count = rng.random_range(1..30);
    g
}

/// Writes a dataset (scenes, fixations, manifest) for one group and returns
/// the manifest path.
pub fn write_group(dir: &Path, name: &str, ds: &CohortDataset, group: &str) -> PathBuf {
    let root = dir.join(name);
    std::fs::create_dir_all(root.join("scenes")).unwrap();
    for scene in ds.scenes.values() {
        std::fs::write(root.join(format!("scenes/{}.rle.json", scene.image_id)), encode_rle(scene)).unwrap();
    }
    let mut fixations: Vec<Fixation> = Vec::new();
    for (sid, s) in ds.members(group) {
        let observer = sid.rsplit('/').next().unwrap();
        for seq in s.sequences.values() {
            fixations.extend(seq.iter().map(|f| Fixation {
                observer_id: observer.to_string(),
                ..f.clone()
            }));
        }
    }
    let mut buf = Vec::new();
    semscan::io::write_fixations(&mut buf, &fixations).unwrap();
    std::fs::write(root.join("fixations.csv"), buf).unwrap();
    let manifest = root.join("manifest.toml");
    std::fs::write(
        &manifest,
        format!(
            "name = \"{name}\"\nfixations = \"fixations.csv\"\nscenes = \"scenes\"\n\
             coordinates = \"x=column,y=row,origin=top-left\"\nsubject_convention = \"observer_id\"\n"
        ),
    )
    .unwrap();
    manifest
}
