//! Command-line interface.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 when input data fails
//! to load or validate.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::baselines::{chance_scanpath_with, choose_donor, median_fixation_count, random_scanpath_with};
use crate::cohort::{group_node_intensity, loso_evaluate, ClassificationReport, CohortConfig};
use crate::error::Error;
use crate::evaluation::{image_model, leave_one_observer_out, mean_defined, score_against, PathScore};
use crate::graph::{build_attention_graph, merge_to_attribute_graph, normalize_score_graph, sample_scanpath_until};
use crate::io::format::format_float;
use crate::io::graph::{saliency_from_json, saliency_to_json};
use crate::io::{self, ExportFormat, WeightView};
use crate::locate::{ObjectLocator, DEFAULT_TOLERANCE_PX};
use crate::metrics::{
    fixation_density, object_saliency, score_scanpath, score_scanpath_weighted, Metric, DEFAULT_SIGMA_PX,
};
use crate::model::{AttentionGraph, Fixation, Level, NodeKey, ObjectSaliency, Scene, SemanticScanpath};
use crate::scanpath::{coverage_statistic, group_sequences};

#[derive(Debug, Parser)]
#[command(name = "semscan", version, about = "Semantic scanpaths and attention graphs for eye-tracking data")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Fixations farther than this from every object are discarded [default: 30, or the manifest value]
    #[arg(long, global = true)]
    tolerance_px: Option<f64>,
    /// Gaussian width for fixation density [default: 24, or the manifest value]
    #[arg(long, global = true)]
    sigma_px: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = LevelArg::Object)]
    level: LevelArg,
    #[arg(long, global = true, value_enum, default_value_t = MetricArg::SScan)]
    metric: MetricArg,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (or directory for multi-image graph exports); stdout if omitted
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LevelArg {
    Object,
    Attribute,
}

impl From<LevelArg> for Level {
    fn from(l: LevelArg) -> Self {
        match l {
            LevelArg::Object => Level::Object,
            LevelArg::Attribute => Level::Attribute,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    SScan,
    SScanWeighted,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::SScan => Metric::SScan,
            MetricArg::SScanWeighted => Metric::SScanWeighted,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Dot,
    AdjacencyCsv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WeightArg {
    Counts,
    Probability,
    Score,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaselineKind {
    Chance,
    Random,
}

#[derive(Debug, Args)]
struct SceneArgs {
    /// Directory of label rasters (<image_id>.pgm or <image_id>.rle.json)
    #[arg(long)]
    scenes: PathBuf,
    /// Dataset attribute file: {"image_id": {"object_id": [attributes]}}
    #[arg(long)]
    attributes: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode fixations as semantic scanpaths (JSON lines)
    BuildScanpaths {
        #[arg(long)]
        fixations: PathBuf,
        #[command(flatten)]
        scenes: SceneArgs,
    },
    /// Pool scanpaths into per-image attention graphs and export them
    BuildGraph {
        #[arg(long)]
        scanpaths: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        #[arg(long, value_enum, default_value_t = WeightArg::Score)]
        weights: WeightArg,
        /// Merge an object-level graph into an attribute-level one (needs --scenes)
        #[arg(long)]
        merge_attributes: bool,
        #[arg(long)]
        scenes: Option<PathBuf>,
        #[arg(long)]
        attributes: Option<PathBuf>,
    },
    /// Score semantic scanpaths against attention graphs
    Score {
        /// Graph JSON file, or a directory of them
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        scanpaths: PathBuf,
        /// Saliency JSON (enables the weighted score column)
        #[arg(long)]
        saliency: Option<PathBuf>,
    },
    /// Score predicted fixations of one or more models against human graphs
    Eval {
        /// Human fixations
        #[arg(long)]
        human: PathBuf,
        /// Predicted fixations; observer_id names the model
        #[arg(long)]
        predicted: PathBuf,
        #[command(flatten)]
        scenes: SceneArgs,
        /// Skip the leave-one-observer-out human reference row
        #[arg(long)]
        no_human: bool,
    },
    /// Generate Chance or Random baseline scanpaths
    Baseline {
        #[arg(value_enum)]
        kind: BaselineKind,
        /// Human fixations (length reference for chance, donor pool for random)
        #[arg(long)]
        fixations: PathBuf,
        #[command(flatten)]
        scenes: SceneArgs,
        /// Fixed number of chance points instead of the per-image human median
        #[arg(long)]
        n_points: Option<usize>,
    },
    /// Leave-one-subject-out classification of two groups
    Classify {
        #[arg(long)]
        group_a: PathBuf,
        #[arg(long)]
        group_b: PathBuf,
    },
    /// Dataset statistics
    Stats {
        #[command(subcommand)]
        what: StatsCommand,
    },
    /// Sample scanpaths from an attention graph
    Sample {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        start: String,
        /// Stop when this node is reached
        #[arg(long)]
        until: Option<String>,
        #[arg(long, default_value_t = 10)]
        max_len: usize,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
}

#[derive(Debug, Subcommand)]
enum StatsCommand {
    /// Fraction of fixations in or near an annotated object
    Coverage {
        #[arg(long)]
        fixations: PathBuf,
        #[command(flatten)]
        scenes: SceneArgs,
    },
    /// Node intensity (total gaze shifts) per image for two groups
    Intensity {
        #[arg(long)]
        group_a: PathBuf,
        #[arg(long)]
        group_b: PathBuf,
    },
    /// Object saliency per image from fixation density
    Saliency {
        #[arg(long)]
        fixations: PathBuf,
        #[command(flatten)]
        scenes: SceneArgs,
    },
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type CliResult<T = ()> = std::result::Result<T, Failure>;

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn emit(output: Option<&Path>, text: &str) -> CliResult {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn tolerance(g: &GlobalOpts, fallback: Option<f64>) -> CliResult<f64> {
    let v = g.tolerance_px.or(fallback).unwrap_or(DEFAULT_TOLERANCE_PX);
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::Usage(format!("--tolerance-px must be non-negative, got {v}")))
    }
}

fn sigma(g: &GlobalOpts, fallback: Option<f64>) -> CliResult<f64> {
    let v = g.sigma_px.or(fallback).unwrap_or(DEFAULT_SIGMA_PX);
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::Usage(format!("--sigma-px must be positive, got {v}")))
    }
}

fn load_scenes(args: &SceneArgs) -> CliResult<BTreeMap<String, Scene>> {
    Ok(io::load_scenes_dir(&args.scenes, args.attributes.as_deref())?)
}

fn load_checked_fixations(path: &Path, scenes: &BTreeMap<String, Scene>) -> CliResult<Vec<Fixation>> {
    let fixations = io::load_fixations(path)?;
    io::fixations::check_against_scenes(&fixations, scenes)?;
    Ok(fixations)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), format_float)
}

fn run(cli: Cli) -> CliResult {
    let g = &cli.global;
    let out = g.output.as_deref();
    let level: Level = g.level.into();
    match cli.command {
        Command::BuildScanpaths { fixations, scenes } => {
            let tol = tolerance(g, None)?;
            let scenes = load_scenes(&scenes)?;
            let fixations = load_checked_fixations(&fixations, &scenes)?;
            let locators: BTreeMap<&str, ObjectLocator<'_>> =
                scenes.iter().map(|(id, s)| (id.as_str(), ObjectLocator::new(s))).collect();
            let mut paths = Vec::new();
            for ((image, observer), seq) in group_sequences(&fixations) {
                match locators[image.as_str()].scanpath(&seq, tol, level) {
                    Ok(sp) => paths.push(sp),
                    Err(Error::EmptyScanpath { .. }) => {
                        eprintln!("warning: {observer} on {image}: every fixation was discarded")
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            emit(out, &io::write_scanpaths(&paths))
        }
        Command::BuildGraph {
            scanpaths,
            format,
            weights,
            merge_attributes,
            scenes,
            attributes,
        } => {
            let paths = io::load_scanpaths(&scanpaths)?;
            if paths.is_empty() {
                return Err(Error::input(format!("{} holds no scanpaths", scanpaths.display())).into());
            }
            let scenes = if merge_attributes {
                let dir = scenes.ok_or_else(|| Failure::Usage("--merge-attributes needs --scenes".into()))?;
                Some(io::load_scenes_dir(&dir, attributes.as_deref())?)
            } else {
                None
            };
            let mut by_image: BTreeMap<&str, Vec<&SemanticScanpath>> = BTreeMap::new();
            for sp in &paths {
                by_image.entry(sp.image_id.as_str()).or_default().push(sp);
            }
            let mut graphs = Vec::new();
            for (image, sps) in by_image {
                let mut graph = build_attention_graph(sps.iter().copied())?;
                if let Some(scenes) = &scenes {
                    let scene = scenes
                        .get(image)
                        .ok_or_else(|| Error::input(format!("no scene for image {image}")))?;
                    graph = merge_to_attribute_graph(&graph, scene)?;
                }
                graphs.push(graph);
            }
            let format = match format {
                FormatArg::Json => ExportFormat::Json,
                FormatArg::Dot => ExportFormat::Dot,
                FormatArg::AdjacencyCsv => ExportFormat::AdjacencyCsv,
            };
            let view = match weights {
                WeightArg::Counts => WeightView::Counts,
                WeightArg::Probability => WeightView::Probability,
                WeightArg::Score => WeightView::Score,
            };
            write_graphs(&graphs, format, view, out)
        }
        Command::Score {
            graph,
            scanpaths,
            saliency,
        } => {
            let graphs = load_graphs(&graph)?;
            let paths = io::load_scanpaths(&scanpaths)?;
            let saliency = match &saliency {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                    Some(
                        saliency_from_json(&text, p)?
                            .into_iter()
                            .map(|(_, s)| (s.image_id.clone(), s))
                            .collect::<BTreeMap<String, ObjectSaliency>>(),
                    )
                }
                None => None,
            };
            score_command(&graphs, &paths, saliency.as_ref(), out)
        }
        Command::Eval {
            human,
            predicted,
            scenes,
            no_human,
        } => {
            let tol = tolerance(g, None)?;
            let sig = sigma(g, None)?;
            let scenes = load_scenes(&scenes)?;
            let human = load_checked_fixations(&human, &scenes)?;
            let predicted = load_checked_fixations(&predicted, &scenes)?;
            eval_command(&scenes, &human, &predicted, !no_human, level, tol, sig, out)
        }
        Command::Baseline {
            kind,
            fixations,
            scenes,
            n_points,
        } => {
            let tol = tolerance(g, None)?;
            let scenes = load_scenes(&scenes)?;
            let fixations = load_checked_fixations(&fixations, &scenes)?;
            baseline_command(kind, &scenes, &fixations, n_points, g.seed, level, tol, out)
        }
        Command::Classify { group_a, group_b } => {
            let (ds, a, _) = io::load_cohort(&group_a, &group_b)?;
            let config = CohortConfig {
                level,
                metric: g.metric.into(),
                tolerance_px: tolerance(g, Some(a.manifest.tolerance_px))?,
                sigma_px: sigma(g, Some(a.manifest.sigma_px))?,
            };
            let report = loso_evaluate(&ds, config)?;
            println!("{report}");
            if let Some(path) = out {
                emit(Some(path), &report_json(&report))?;
            }
            Ok(())
        }
        Command::Stats { what } => stats_command(what, g, level, out),
        Command::Sample {
            graph,
            start,
            until,
            max_len,
            count,
        } => {
            let graph = io::load_graph(&graph)?;
            let start = NodeKey::parse(graph.level, &start)?;
            let until = until.map(|u| NodeKey::parse(graph.level, &u)).transpose()?;
            if max_len == 0 {
                return Err(Failure::Usage("--max-len must be at least 1".into()));
            }
            let mut walks = Vec::new();
            for i in 0..count {
                walks.push(sample_scanpath_until(&graph, &start, until.as_ref(), max_len, g.seed.wrapping_add(i))?);
            }
            emit(out, &io::write_scanpaths(&walks))
        }
    }
}

fn write_graphs(graphs: &[AttentionGraph], format: ExportFormat, view: WeightView, out: Option<&Path>) -> CliResult {
    if let [graph] = graphs {
        if out.is_none_or(|p| !p.is_dir()) {
            return emit(out, &io::export_graph(graph, format, view));
        }
    }
    let dir = out.ok_or_else(|| {
        Failure::Usage("scanpaths cover several images; pass --output <directory>".into())
    })?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for graph in graphs {
        let path = dir.join(format!("{}.{}", graph.image_id, format.extension()));
        emit(Some(&path), &io::export_graph(graph, format, view))?;
    }
    Ok(())
}

fn load_graphs(path: &Path) -> CliResult<BTreeMap<String, AttentionGraph>> {
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut v: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        v.sort();
        v
    } else {
        vec![path.to_path_buf()]
    };
    let mut graphs = BTreeMap::new();
    for f in files {
        let graph = io::load_graph(&f)?;
        if graphs.contains_key(&graph.image_id) {
            return Err(Error::parse(&f, 0, format!("second graph for image {}", graph.image_id)).into());
        }
        graphs.insert(graph.image_id.clone(), graph);
    }
    Ok(graphs)
}

fn score_command(
    graphs: &BTreeMap<String, AttentionGraph>,
    paths: &[SemanticScanpath],
    saliency: Option<&BTreeMap<String, ObjectSaliency>>,
    out: Option<&Path>,
) -> CliResult {
    let score_graphs: BTreeMap<&str, _> = graphs
        .iter()
        .map(|(id, g)| (id.as_str(), normalize_score_graph(g)))
        .collect();
    let mut text = String::from("image_id\tobserver_id\ts_scan");
    if saliency.is_some() {
        text.push_str("\ts_scan_weighted");
    }
    text.push('\n');
    for sp in paths {
        let sg = score_graphs
            .get(sp.image_id.as_str())
            .ok_or_else(|| Error::input(format!("no graph for image {} (observer {})", sp.image_id, sp.observer_id)))?;
        let (s, sw) = if sp.len() < 2 {
            (None, None)
        } else {
            let s = Some(score_scanpath(sp, sg)?.value);
            let sw = match saliency {
                Some(map) => {
                    let sal = map.get(&sp.image_id).ok_or_else(|| {
                        Error::input(format!("no saliency for image {}", sp.image_id))
                    })?;
                    Some(score_scanpath_weighted(sp, sg, sal)?.value)
                }
                None => None,
            };
            (s, sw)
        };
        write!(text, "{}\t{}\t{}", sp.image_id, sp.observer_id, opt(s)).unwrap();
        if saliency.is_some() {
            write!(text, "\t{}", opt(sw)).unwrap();
        }
        text.push('\n');
    }
    emit(out, &text)
}

#[allow(clippy::too_many_arguments)]
fn eval_command(
    scenes: &BTreeMap<String, Scene>,
    human: &[Fixation],
    predicted: &[Fixation],
    with_human: bool,
    level: Level,
    tol: f64,
    sig: f64,
    out: Option<&Path>,
) -> CliResult {
    const HUMAN: &str = "Human";
    let human_seqs = group_sequences(human);
    let predicted_seqs = group_sequences(predicted);
    let mut rows: Vec<PathScore> = Vec::new();
    for (image_id, scene) in scenes {
        let locator = ObjectLocator::new(scene);
        let mut observers: BTreeMap<String, (Vec<Fixation>, Option<SemanticScanpath>)> = BTreeMap::new();
        for ((img, obs), seq) in human_seqs.range((image_id.clone(), String::new())..) {
            if img != image_id {
                break;
            }
            let sp = match locator.scanpath(seq, tol, level) {
                Ok(sp) => Some(sp),
                Err(Error::EmptyScanpath { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            observers.insert(obs.clone(), (seq.clone(), sp));
        }
        let human_paths: Vec<&SemanticScanpath> = observers.values().filter_map(|(_, sp)| sp.as_ref()).collect();
        if human_paths.is_empty() {
            continue;
        }
        if with_human {
            let loo = leave_one_observer_out(scene, &observers, level, sig)?;
            rows.push(PathScore {
                image_id: image_id.clone(),
                observer_id: HUMAN.to_string(),
                s_scan: mean_defined(loo.iter().map(|s| s.s_scan)),
                s_scan_weighted: mean_defined(loo.iter().map(|s| s.s_scan_weighted)),
            });
        }
        let model = image_model(scene, &human_paths, observers.values().flat_map(|(f, _)| f.iter()), level, sig)?;
        for ((img, _), seq) in predicted_seqs.range((image_id.clone(), String::new())..) {
            if img != image_id {
                break;
            }
            match locator.scanpath(seq, tol, level) {
                Ok(sp) => rows.push(score_against(&sp, &model)?),
                Err(Error::EmptyScanpath { observer_id, .. }) => rows.push(PathScore {
                    image_id: image_id.clone(),
                    observer_id,
                    s_scan: None,
                    s_scan_weighted: None,
                }),
                Err(e) => return Err(e.into()),
            }
        }
    }
    let mut text = String::from("image_id\tsource\ts_scan\ts_scan_weighted\n");
    for r in &rows {
        writeln!(text, "{}\t{}\t{}\t{}", r.image_id, r.observer_id, opt(r.s_scan), opt(r.s_scan_weighted)).unwrap();
    }
    let mut by_source: BTreeMap<&str, Vec<&PathScore>> = BTreeMap::new();
    for r in &rows {
        by_source.entry(r.observer_id.as_str()).or_default().push(r);
    }
    text.push_str("\n# mean over images\nsource\ts_scan\ts_scan_weighted\n");
    for (source, rs) in by_source {
        writeln!(
            text,
            "{source}\t{}\t{}",
            opt(mean_defined(rs.iter().map(|r| r.s_scan))),
            opt(mean_defined(rs.iter().map(|r| r.s_scan_weighted)))
        )
        .unwrap();
    }
    emit(out, &text)
}

#[allow(clippy::too_many_arguments)]
fn baseline_command(
    kind: BaselineKind,
    scenes: &BTreeMap<String, Scene>,
    fixations: &[Fixation],
    n_points: Option<usize>,
    seed: u64,
    level: Level,
    tol: f64,
    out: Option<&Path>,
) -> CliResult {
    let seqs = group_sequences(fixations);
    let pool: Vec<&[Fixation]> = seqs.values().map(Vec::as_slice).collect();
    let mut paths = Vec::new();
    for (i, (image_id, scene)) in scenes.iter().enumerate() {
        let image_seed = seed.wrapping_add(i as u64);
        let locator = ObjectLocator::new(scene);
        let result = match kind {
            BaselineKind::Chance => {
                let n = n_points.or_else(|| {
                    median_fixation_count(pool.iter().copied().filter(|s| s[0].image_id == *image_id))
                });
                let Some(n) = n else {
                    eprintln!("warning: no human fixations on {image_id}; pass --n-points");
                    continue;
                };
                chance_scanpath_with(&locator, n, image_seed, tol)
            }
            BaselineKind::Random => {
                let Some(donor) = choose_donor(&pool, image_id, image_seed) else {
                    eprintln!("warning: no donor sequence from another image for {image_id}");
                    continue;
                };
                random_scanpath_with(pool[donor], &locator, tol)
            }
        };
        match result {
            Ok(sp) => paths.push(match level {
                Level::Object => sp,
                Level::Attribute => crate::scanpath::to_attribute_scanpath(&sp, scene)?,
            }),
            Err(Error::EmptyScanpath { .. }) => {
                eprintln!("warning: baseline on {image_id} retained no points")
            }
            Err(e) => return Err(e.into()),
        }
    }
    emit(out, &io::write_scanpaths(&paths))
}

fn report_json(report: &ClassificationReport) -> String {
    let subjects: serde_json::Map<String, serde_json::Value> = report
        .per_subject
        .iter()
        .map(|(id, r)| {
            (
                id.clone(),
                json!({
                    "predicted": r.predicted,
                    "skipped": r.skipped,
                    "true_group": r.true_group,
                    "votes_a": r.votes_a,
                    "votes_b": r.votes_b,
                }),
            )
        })
        .collect();
    let doc = json!({
        "accuracy": io::round_float(report.accuracy()),
        "correct": report.correct,
        "group_a": report.group_a,
        "group_b": report.group_b,
        "level": report.level,
        "metric": report.metric,
        "subjects": subjects,
        "summary": report.summary(),
        "total": report.total,
    });
    serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
}

fn stats_command(what: StatsCommand, g: &GlobalOpts, level: Level, out: Option<&Path>) -> CliResult {
    match what {
        StatsCommand::Coverage { fixations, scenes } => {
            let tol = tolerance(g, None)?;
            let scenes = load_scenes(&scenes)?;
            let fixations = load_checked_fixations(&fixations, &scenes)?;
            let c = coverage_statistic(&fixations, &scenes, tol)?;
            let mut text = String::from("image_id\tretained\ttotal\tfraction\n");
            for (image, &(r, t)) in &c.per_image {
                writeln!(text, "{image}\t{r}\t{t}\t{}", opt(c.image_fraction(image))).unwrap();
            }
            writeln!(text, "overall\t{}\t{}\t{}", c.retained, c.total, format_float(c.overall())).unwrap();
            emit(out, &text)
        }
        StatsCommand::Intensity { group_a, group_b } => {
            let (ds, a, _) = io::load_cohort(&group_a, &group_b)?;
            let config = CohortConfig {
                level,
                metric: Metric::SScan,
                tolerance_px: tolerance(g, Some(a.manifest.tolerance_px))?,
                sigma_px: sigma(g, Some(a.manifest.sigma_px))?,
            };
            let cmp = group_node_intensity(&ds, config)?;
            let mut text = format!("image_id\t{}\t{}\n", ds.group_a, ds.group_b);
            let images: std::collections::BTreeSet<&String> =
                cmp.per_image_a.keys().chain(cmp.per_image_b.keys()).collect();
            for image in images {
                let cell = |m: &BTreeMap<String, u64>| m.get(image).map_or("NA".to_string(), u64::to_string);
                writeln!(text, "{image}\t{}\t{}", cell(&cmp.per_image_a), cell(&cmp.per_image_b)).unwrap();
            }
            writeln!(text, "mean\t{}\t{}", format_float(cmp.mean_a), format_float(cmp.mean_b)).unwrap();
            match cmp.welch {
                Some(t) => writeln!(
                    text,
                    "welch_t\t{}\ndf\t{}\np_two_sided\t{}",
                    format_float(t.t),
                    format_float(t.df),
                    format_float(t.p_two_sided)
                )
                .unwrap(),
                None => text.push_str("welch_t\tNA\n"),
            }
            emit(out, &text)
        }
        StatsCommand::Saliency { fixations, scenes } => {
            let sig = sigma(g, None)?;
            let scenes = load_scenes(&scenes)?;
            let fixations = load_checked_fixations(&fixations, &scenes)?;
            let mut by_image: BTreeMap<&str, Vec<&Fixation>> = BTreeMap::new();
            for f in &fixations {
                by_image.entry(f.image_id.as_str()).or_default().push(f);
            }
            let mut docs = Vec::new();
            for (image, fs) in by_image {
                let scene = &scenes[image];
                let d = fixation_density(image, fs.iter().copied(), scene.width, scene.height, sig)?;
                let sal = object_saliency(&d, scene)?.at_level(scene, level)?;
                let doc: serde_json::Value =
                    serde_json::from_str(&saliency_to_json(&sal, level)).expect("valid json");
                docs.push(doc);
            }
            let text = serde_json::to_string_pretty(&docs).expect("saliency serializes") + "\n";
            emit(out, &text)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(cli_main(["semscan", "frobnicate"]), 1);
        assert_eq!(cli_main(["semscan"]), 1);
        assert_eq!(cli_main(["semscan", "--help"]), 0);
    }

    #[test]
    fn missing_input_exits_two() {
        assert_eq!(
            cli_main(["semscan", "build-graph", "--scanpaths", "/nonexistent/x.jsonl"]),
            2
        );
    }
}
