//! Python bindings: `import pysemscan`.
//!
//! Object nodes surface as `int`, attribute nodes as `str`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use semscan::cohort::{loso_evaluate, CohortConfig};
use semscan::io::graph::{graph_to_dot, WeightView};
use semscan::io::{self as sio, ExportFormat};
use semscan::{Error, Level, Metric, NodeKey};

create_exception!(pysemscan, SemscanError, PyValueError);

fn err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => SemscanError::new_err(other.to_string()),
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for semscan::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().py_err()
}

#[derive(Clone, FromPyObject, IntoPyObject)]
enum Node {
    Object(u32),
    Attribute(String),
}

impl From<&NodeKey> for Node {
    fn from(k: &NodeKey) -> Self {
        match k {
            NodeKey::Object(id) => Node::Object(*id),
            NodeKey::Attribute(s) => Node::Attribute(s.clone()),
        }
    }
}

impl From<Node> for NodeKey {
    fn from(n: Node) -> Self {
        match n {
            Node::Object(id) => NodeKey::Object(id),
            Node::Attribute(s) => NodeKey::Attribute(s),
        }
    }
}

#[pyclass(name = "Fixation", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFixation(semscan::Fixation);

#[pymethods]
impl PyFixation {
    #[new]
    #[pyo3(signature = (image_id, observer_id, seq_index, x, y, duration_ms = 0.0))]
    fn new(image_id: &str, observer_id: &str, seq_index: u32, x: f64, y: f64, duration_ms: f64) -> Self {
        PyFixation(semscan::Fixation {
            duration_ms,
            ..semscan::Fixation::new(image_id, observer_id, seq_index, x, y)
        })
    }
    #[getter]
    fn image_id(&self) -> &str {
        &self.0.image_id
    }
    #[getter]
    fn observer_id(&self) -> &str {
        &self.0.observer_id
    }
    #[getter]
    fn seq_index(&self) -> u32 {
        self.0.seq_index
    }
    #[getter]
    fn x(&self) -> f64 {
        self.0.x
    }
    #[getter]
    fn y(&self) -> f64 {
        self.0.y
    }
    #[getter]
    fn duration_ms(&self) -> f64 {
        self.0.duration_ms
    }
    fn __repr__(&self) -> String {
        let f = &self.0;
        format!("Fixation({:?}, {:?}, {}, {}, {})", f.image_id, f.observer_id, f.seq_index, f.x, f.y)
    }
}

fn unwrap_fixations(fs: Vec<PyRef<'_, PyFixation>>) -> Vec<semscan::Fixation> {
    fs.iter().map(|f| f.0.clone()).collect()
}

/// An annotated stimulus: label raster plus object attributes.
#[pyclass(name = "Scene", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyScene(semscan::Scene);

#[pymethods]
impl PyScene {
    /// `labels` is row-major; 0 is background.
    #[staticmethod]
    #[pyo3(signature = (image_id, width, height, labels, attributes = None))]
    fn from_labels(
        image_id: &str,
        width: u32,
        height: u32,
        labels: Vec<u32>,
        attributes: Option<BTreeMap<u32, Vec<String>>>,
    ) -> PyResult<Self> {
        let attrs = attributes
            .unwrap_or_default()
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().collect::<BTreeSet<String>>()))
            .collect();
        semscan::Scene::from_labels(image_id, width, height, labels, attrs)
            .map(PyScene)
            .py_err()
    }

    /// Loads a `.pgm` or `.rle.json` raster, optionally with an attribute file.
    #[staticmethod]
    #[pyo3(signature = (raster, attributes = None))]
    fn load(raster: PathBuf, attributes: Option<PathBuf>) -> PyResult<Self> {
        sio::load_scene(&raster, attributes.as_deref()).map(PyScene).py_err()
    }

    #[getter]
    fn image_id(&self) -> &str {
        &self.0.image_id
    }
    #[getter]
    fn width(&self) -> u32 {
        self.0.width
    }
    #[getter]
    fn height(&self) -> u32 {
        self.0.height
    }
    /// `{object_id: sorted attribute names}`.
    #[getter]
    fn objects(&self) -> BTreeMap<u32, Vec<String>> {
        self.0
            .objects
            .iter()
            .map(|(&id, o)| (id, o.attributes.iter().cloned().collect()))
            .collect()
    }
    fn label_at(&self, col: u32, row: u32) -> PyResult<u32> {
        if col >= self.0.width || row >= self.0.height {
            return Err(PyValueError::new_err(format!("({col}, {row}) is outside the scene")));
        }
        Ok(self.0.label_at(col, row))
    }
    /// Object a fixation at `(x, y)` is assigned to, or `None` if discarded.
    #[pyo3(signature = (x, y, tolerance_px = 30.0))]
    fn assign(&self, x: f64, y: f64, tolerance_px: f64) -> PyResult<Option<u32>> {
        let f = semscan::Fixation::new(&self.0.image_id, "", 0, x, y);
        Ok(semscan::assign_fixation(&f, &self.0, tolerance_px).py_err()?.outcome.object_id())
    }
    fn __repr__(&self) -> String {
        format!("Scene({:?}, {}x{}, {} objects)", self.0.image_id, self.0.width, self.0.height, self.0.objects.len())
    }
}

#[pyclass(name = "Scanpath", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyScanpath(semscan::SemanticScanpath);

#[pymethods]
impl PyScanpath {
    #[getter]
    fn image_id(&self) -> &str {
        &self.0.image_id
    }
    #[getter]
    fn observer_id(&self) -> &str {
        &self.0.observer_id
    }
    #[getter]
    fn level(&self) -> String {
        self.0.level.to_string()
    }
    #[getter]
    fn terms(&self) -> Vec<Node> {
        self.0.terms.iter().map(Node::from).collect()
    }
    #[getter]
    fn source_spans(&self) -> Vec<(u32, u32)> {
        self.0.source_spans.clone()
    }
    /// Attribute-level version of an object scanpath.
    fn to_attributes(&self, scene: &PyScene) -> PyResult<Self> {
        semscan::to_attribute_scanpath(&self.0, &scene.0).map(PyScanpath).py_err()
    }
    fn to_json(&self) -> String {
        sio::write_scanpaths(std::slice::from_ref(&self.0)).trim_end().to_string()
    }
    fn __len__(&self) -> usize {
        self.0.len()
    }
    fn __repr__(&self) -> String {
        let terms: Vec<String> = self.0.terms.iter().map(ToString::to_string).collect();
        format!("Scanpath({:?}, {:?}, [{}])", self.0.image_id, self.0.observer_id, terms.join(", "))
    }
}

/// Pooled gaze-shift counts for one image.
#[pyclass(name = "AttentionGraph", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGraph(semscan::AttentionGraph);

#[pymethods]
impl PyGraph {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        sio::graph_from_json(text, std::path::Path::new("<string>")).map(PyGraph).py_err()
    }
    #[getter]
    fn image_id(&self) -> &str {
        &self.0.image_id
    }
    #[getter]
    fn level(&self) -> String {
        self.0.level.to_string()
    }
    #[getter]
    fn observer_count(&self) -> u64 {
        self.0.observer_count
    }
    #[getter]
    fn nodes(&self) -> Vec<Node> {
        self.0.nodes.iter().map(Node::from).collect()
    }
    /// `{(source, target): count}`.
    #[getter]
    fn edges(&self) -> Vec<((Node, Node), u64)> {
        self.0
            .edge_counts
            .iter()
            .map(|((s, t), &c)| ((s.into(), t.into()), c))
            .collect()
    }
    fn count(&self, source: Node, target: Node) -> u64 {
        self.0.count(&source.into(), &target.into())
    }
    fn probability(&self, source: Node, target: Node) -> PyResult<f64> {
        semscan::edge_probability(&self.0, &source.into(), &target.into()).py_err()
    }
    /// Per-source max-normalized scores.
    fn scores(&self) -> Vec<((Node, Node), f64)> {
        semscan::normalize_score_graph(&self.0)
            .scores
            .iter()
            .map(|((s, t), &v)| ((s.into(), t.into()), v))
            .collect()
    }
    fn intensity(&self) -> u64 {
        semscan::node_intensity(&self.0)
    }
    fn merge_to_attributes(&self, scene: &PyScene) -> PyResult<Self> {
        semscan::merge_to_attribute_graph(&self.0, &scene.0).map(PyGraph).py_err()
    }
    #[pyo3(signature = (start, max_len = 10, seed = 0, until = None))]
    fn sample(&self, start: Node, max_len: usize, seed: u64, until: Option<Node>) -> PyResult<PyScanpath> {
        let until: Option<NodeKey> = until.map(Into::into);
        semscan::sample_scanpath_until(&self.0, &start.into(), until.as_ref(), max_len, seed)
            .map(PyScanpath)
            .py_err()
    }
    fn to_json(&self) -> String {
        sio::graph_to_json(&self.0)
    }
    /// `format`: json | dot | adjacency_csv; `weights`: counts | probability | score.
    #[pyo3(signature = (format = "json", weights = "score"))]
    fn export(&self, format: &str, weights: &str) -> PyResult<String> {
        let format: ExportFormat = parse(format)?;
        let view: WeightView = parse(weights)?;
        Ok(match format {
            ExportFormat::Dot => graph_to_dot(&self.0, view),
            f => sio::export_graph(&self.0, f, view),
        })
    }
    fn __repr__(&self) -> String {
        format!(
            "AttentionGraph({:?}, {} nodes, {} edges, {} observers)",
            self.0.image_id,
            self.0.nodes.len(),
            self.0.edge_counts.len(),
            self.0.observer_count
        )
    }
}

/// Semantic scanpath of one observer's fixations on `scene`.
#[pyfunction]
#[pyo3(signature = (fixations, scene, tolerance_px = 30.0, level = "object"))]
fn build_scanpath(
    fixations: Vec<PyRef<'_, PyFixation>>,
    scene: &PyScene,
    tolerance_px: f64,
    level: &str,
) -> PyResult<PyScanpath> {
    let level: Level = parse(level)?;
    semscan::ObjectLocator::new(&scene.0)
        .scanpath(&unwrap_fixations(fixations), tolerance_px, level)
        .map(PyScanpath)
        .py_err()
}

#[pyfunction]
fn build_graph(scanpaths: Vec<PyRef<'_, PyScanpath>>) -> PyResult<PyGraph> {
    semscan::build_attention_graph(scanpaths.iter().map(|p| &p.0))
        .map(PyGraph)
        .py_err()
}

/// Mean score-graph weight along the path (absent edges count 0).
#[pyfunction]
fn score(scanpath: &PyScanpath, graph: &PyGraph) -> PyResult<f64> {
    let sg = semscan::normalize_score_graph(&graph.0);
    Ok(semscan::score_scanpath(&scanpath.0, &sg).py_err()?.value)
}

/// Saliency-weighted score; `saliency` maps nodes to non-negative weights.
#[pyfunction]
fn score_weighted(scanpath: &PyScanpath, graph: &PyGraph, saliency: Vec<(Node, f64)>) -> PyResult<f64> {
    let sg = semscan::normalize_score_graph(&graph.0);
    let sal = semscan::ObjectSaliency {
        image_id: graph.0.image_id.clone(),
        values: saliency.into_iter().map(|(k, v)| (k.into(), v)).collect(),
    };
    Ok(semscan::score_scanpath_weighted(&scanpath.0, &sg, &sal).py_err()?.value)
}

/// Fixation density as a row-major list of `height * width` floats.
#[pyfunction]
#[pyo3(signature = (fixations, width, height, sigma_px = 24.0))]
fn density(fixations: Vec<PyRef<'_, PyFixation>>, width: u32, height: u32, sigma_px: f64) -> PyResult<Vec<f64>> {
    let fs = unwrap_fixations(fixations);
    let image = fs.first().map(|f| f.image_id.clone()).unwrap_or_default();
    Ok(semscan::fixation_density(&image, &fs, width, height, sigma_px).py_err()?.values)
}

/// Density mass per node of `scene`.
#[pyfunction]
#[pyo3(signature = (fixations, scene, sigma_px = 24.0, level = "object"))]
fn object_saliency(
    fixations: Vec<PyRef<'_, PyFixation>>,
    scene: &PyScene,
    sigma_px: f64,
    level: &str,
) -> PyResult<Vec<(Node, f64)>> {
    let level: Level = parse(level)?;
    let s = &scene.0;
    let d = semscan::fixation_density(&s.image_id, &unwrap_fixations(fixations), s.width, s.height, sigma_px)
        .py_err()?;
    let sal = semscan::object_saliency(&d, s).py_err()?.at_level(s, level).py_err()?;
    Ok(sal.values.iter().map(|(k, &v)| (k.into(), v)).collect())
}

#[pyfunction]
#[pyo3(signature = (scene, n_points, seed = 0, tolerance_px = 30.0))]
fn chance_scanpath(scene: &PyScene, n_points: usize, seed: u64, tolerance_px: f64) -> PyResult<PyScanpath> {
    semscan::baselines::chance_scanpath(&scene.0, n_points, seed, tolerance_px)
        .map(PyScanpath)
        .py_err()
}

/// Replays a donor sequence from another image on `scene`.
#[pyfunction]
#[pyo3(signature = (donor, scene, tolerance_px = 30.0))]
fn random_scanpath(donor: Vec<PyRef<'_, PyFixation>>, scene: &PyScene, tolerance_px: f64) -> PyResult<PyScanpath> {
    semscan::baselines::random_scanpath(&unwrap_fixations(donor), &scene.0, tolerance_px)
        .map(PyScanpath)
        .py_err()
}

#[pyfunction]
fn load_fixations(path: PathBuf) -> PyResult<Vec<PyFixation>> {
    Ok(sio::load_fixations(&path).py_err()?.into_iter().map(PyFixation).collect())
}

/// `{image_id: Scene}` for every raster in `directory`.
#[pyfunction]
#[pyo3(signature = (directory, attributes = None))]
fn load_scenes(directory: PathBuf, attributes: Option<PathBuf>) -> PyResult<BTreeMap<String, PyScene>> {
    Ok(sio::load_scenes_dir(&directory, attributes.as_deref())
        .py_err()?
        .into_iter()
        .map(|(k, s)| (k, PyScene(s)))
        .collect())
}

/// Share of fixations in or near an annotated object.
#[pyfunction]
#[pyo3(signature = (fixations, scenes, tolerance_px = 30.0))]
fn coverage(
    fixations: Vec<PyRef<'_, PyFixation>>,
    scenes: BTreeMap<String, PyRef<'_, PyScene>>,
    tolerance_px: f64,
) -> PyResult<f64> {
    let scenes: BTreeMap<String, semscan::Scene> = scenes.into_iter().map(|(k, s)| (k, s.0.clone())).collect();
    Ok(semscan::coverage_statistic(&unwrap_fixations(fixations), &scenes, tolerance_px)
        .py_err()?
        .overall())
}

/// Leave-one-subject-out classification of two manifest-described groups.
///
/// Returns `(summary, accuracy, {subject: (true_group, predicted)})`.
#[pyfunction]
#[pyo3(signature = (group_a, group_b, level = "object", metric = "s_scan", tolerance_px = None, sigma_px = None))]
fn classify(
    py: Python<'_>,
    group_a: PathBuf,
    group_b: PathBuf,
    level: &str,
    metric: &str,
    tolerance_px: Option<f64>,
    sigma_px: Option<f64>,
) -> PyResult<(String, f64, BTreeMap<String, (String, Option<String>)>)> {
    let level: Level = parse(level)?;
    let metric: Metric = parse(metric)?;
    let report = py.detach(|| -> semscan::Result<_> {
        let (ds, a, _) = sio::load_cohort(&group_a, &group_b)?;
        let config = CohortConfig {
            level,
            metric,
            tolerance_px: tolerance_px.unwrap_or(a.manifest.tolerance_px),
            sigma_px: sigma_px.unwrap_or(a.manifest.sigma_px),
        };
        loso_evaluate(&ds, config)
    });
    let report = report.py_err()?;
    let subjects = report
        .per_subject
        .iter()
        .map(|(id, r)| (id.clone(), (r.true_group.clone(), r.predicted.clone())))
        .collect();
    Ok((report.summary(), report.accuracy(), subjects))
}

#[pymodule]
fn pysemscan(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SemscanError", m.py().get_type::<SemscanError>())?;
    m.add_class::<PyFixation>()?;
    m.add_class::<PyScene>()?;
    m.add_class::<PyScanpath>()?;
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(build_scanpath, m)?)?;
    m.add_function(wrap_pyfunction!(build_graph, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(score_weighted, m)?)?;
    m.add_function(wrap_pyfunction!(density, m)?)?;
    m.add_function(wrap_pyfunction!(object_saliency, m)?)?;
    m.add_function(wrap_pyfunction!(chance_scanpath, m)?)?;
    m.add_function(wrap_pyfunction!(random_scanpath, m)?)?;
    m.add_function(wrap_pyfunction!(load_fixations, m)?)?;
    m.add_function(wrap_pyfunction!(load_scenes, m)?)?;
    m.add_function(wrap_pyfunction!(coverage, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    Ok(())
}
