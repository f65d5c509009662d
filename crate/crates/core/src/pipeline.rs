//! Directory-level scoring runs and their CSV / JSON reports.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apls::{aggregate_tiles, score_road_tile, AplsParams, RoadChallengeReport, TileRoadScore};
use crate::buildings::{match_buildings, overall_buildings_score, score_city, CityScore, IouThreshold, SceneScore};
use crate::geometry::{BoundingBox, LocalProjection};
use crate::ingest::{
    load_building_tile, load_road_tile, pair_tiles, parse_roads, IngestError, Pairing, RoadAttributes,
    RoadSegmentRecord, TileIdPattern, TilePair,
};
use crate::mask::{
    read_mask, refine_mask, render_road_mask, skeleton_to_graph, skeletonize, write_mask, MaskError,
    SkeletonGraphParams,
};
use crate::road_graph::{GraphError, RoadGraph};

pub const GEOJSON_EXTENSIONS: &[&str] = &["geojson", "json"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Unreadable paths or invalid parameters.
    Configuration,
    /// A file that does not parse or holds invalid geometry.
    MalformedInput,
    /// Two files claim the same tile id.
    TileConflict,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{path}: {source}")]
    Mask {
        path: PathBuf,
        #[source]
        source: MaskError,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    pub fn class(&self) -> ErrorClass {
        match self {
            PipelineError::Ingest(e) if e.is_tile_conflict() => ErrorClass::TileConflict,
            PipelineError::Ingest(e) if e.is_configuration() => ErrorClass::Configuration,
            PipelineError::Ingest(_) => ErrorClass::MalformedInput,
            PipelineError::Graph(_) | PipelineError::Config(_) | PipelineError::Io { .. } => {
                ErrorClass::Configuration
            }
            PipelineError::Mask { source, .. } => match source {
                MaskError::Io { .. } | MaskError::InvalidParameter { .. } => ErrorClass::Configuration,
                _ => ErrorClass::MalformedInput,
            },
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn require_dir(path: &Path) -> Result<(), PipelineError> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(PipelineError::Config(format!("{} is not a directory", path.display())))
    }
}

fn pool(parallelism: usize) -> Result<rayon::ThreadPool, PipelineError> {
    if parallelism == 0 {
        return Err(PipelineError::Config("parallelism must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| PipelineError::Config(e.to_string()))
}

fn pairing_warnings(pairing: &Pairing) -> Vec<String> {
    let mut w: Vec<String> = pairing
        .orphans
        .iter()
        .map(|p| format!("{}: proposal has no truth tile; ignored", p.display()))
        .collect();
    w.extend(
        pairing
            .unmatched
            .iter()
            .map(|p| format!("{}: file name has no tile id; ignored", p.display())),
    );
    w
}

fn missing_proposal_warning(pair: &TilePair) -> Option<String> {
    pair.proposal
        .is_none()
        .then(|| format!("{}: no proposal file; scored as empty", pair.key.tile_id))
}

/// Recomputed total compared against the reported one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Consistency {
    pub reported: f64,
    pub recomputed: f64,
    pub consistent: bool,
}

impl Consistency {
    fn new(reported: f64, recomputed: f64) -> Self {
        Consistency {
            reported,
            recomputed,
            consistent: (reported - recomputed).abs() <= 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingsConfig {
    pub truth: PathBuf,
    pub proposal: PathBuf,
    pub iou_threshold: f64,
    pub tile_pattern: String,
    pub parallelism: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CityScene {
    pub city: String,
    #[serde(flatten)]
    pub score: SceneScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingsReport {
    pub config: BuildingsConfig,
    pub scenes: Vec<CityScene>,
    pub cities: Vec<CityScore>,
    pub overall: f64,
    pub warnings: Vec<String>,
    pub consistency: Consistency,
}

pub fn score_buildings_dirs(config: &BuildingsConfig) -> Result<BuildingsReport, PipelineError> {
    require_dir(&config.truth)?;
    require_dir(&config.proposal)?;
    let threshold =
        IouThreshold::new(config.iou_threshold).map_err(|e| PipelineError::Config(e.to_string()))?;
    let pattern = TileIdPattern::new(&config.tile_pattern)?;
    let pairing = pair_tiles(&config.truth, &config.proposal, &pattern, GEOJSON_EXTENSIONS)?;
    let mut warnings = pairing_warnings(&pairing);
    let results: Vec<(CityScene, Vec<String>)> = pool(config.parallelism)?.install(|| {
        pairing
            .tiles
            .par_iter()
            .map(|pair| {
                let tile = load_building_tile(pair)?;
                let mut w = tile.warnings.clone();
                w.extend(missing_proposal_warning(pair));
                let score = match_buildings(&tile.tile_id, &tile.truth, &tile.proposal, threshold);
                Ok((CityScene { city: tile.city, score }, w))
            })
            .collect::<Result<Vec<_>, PipelineError>>()
    })?;
    let mut scenes = Vec::with_capacity(results.len());
    for (s, w) in results {
        warnings.extend(w);
        scenes.push(s);
    }
    scenes.sort_by(|a, b| a.score.tile_id.cmp(&b.score.tile_id));
    let cities = buildings_cities(&scenes);
    let overall = overall_buildings_score(&cities);
    let recomputed = recompute_buildings_total(&buildings_rows(&scenes, &cities, overall));
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(BuildingsReport {
        config: config.clone(),
        scenes,
        cities,
        overall,
        warnings,
        consistency: Consistency::new(overall, recomputed),
    })
}

fn buildings_cities(scenes: &[CityScene]) -> Vec<CityScore> {
    let mut by_city: BTreeMap<&str, Vec<SceneScore>> = BTreeMap::new();
    for s in scenes {
        by_city.entry(&s.city).or_default().push(s.score.clone());
    }
    by_city.into_iter().map(|(city, ss)| score_city(city, &ss)).collect()
}

/// One CSV row of the buildings report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingsRow {
    pub kind: String,
    pub name: String,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// Empty on the total row, which averages city F1 instead.
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: f64,
}

fn buildings_rows(scenes: &[CityScene], cities: &[CityScore], overall: f64) -> Vec<BuildingsRow> {
    let mut rows: Vec<BuildingsRow> = scenes
        .iter()
        .map(|s| {
            let c = score_city(&s.city, std::slice::from_ref(&s.score));
            BuildingsRow {
                kind: format!("scene:{}", s.city),
                name: s.score.tile_id.clone(),
                tp: c.true_positives,
                fp: c.false_positives,
                fn_: c.false_negatives,
                precision: Some(c.precision),
                recall: Some(c.recall),
                f1: c.f1,
            }
        })
        .collect();
    rows.extend(cities.iter().map(|c| BuildingsRow {
        kind: "city".into(),
        name: c.city.clone(),
        tp: c.true_positives,
        fp: c.false_positives,
        fn_: c.false_negatives,
        precision: Some(c.precision),
        recall: Some(c.recall),
        f1: c.f1,
    }));
    let sum = |f: fn(&CityScore) -> usize| cities.iter().map(f).sum::<usize>();
    rows.push(BuildingsRow {
        kind: "total".into(),
        name: "overall".into(),
        tp: sum(|c| c.true_positives),
        fp: sum(|c| c.false_positives),
        fn_: sum(|c| c.false_negatives),
        precision: None,
        recall: None,
        f1: overall,
    });
    rows
}

/// Rebuild the overall score from scene rows alone.
pub fn recompute_buildings_total(rows: &[BuildingsRow]) -> f64 {
    let mut by_city: BTreeMap<&str, (usize, usize, usize)> = BTreeMap::new();
    for r in rows {
        if let Some(city) = r.kind.strip_prefix("scene:") {
            let e = by_city.entry(city).or_default();
            e.0 += r.tp;
            e.1 += r.fp;
            e.2 += r.fn_;
        }
    }
    let cities: Vec<CityScore> = by_city
        .into_iter()
        .map(|(city, (tp, fp, fn_))| {
            score_city(
                city,
                &[SceneScore {
                    tile_id: String::new(),
                    true_positives: tp,
                    false_positives: fp,
                    false_negatives: fn_,
                    matches: vec![],
                }],
            )
        })
        .collect();
    overall_buildings_score(&cities)
}

pub fn write_buildings_csv(report: &BuildingsReport, out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in buildings_rows(&report.scenes, &report.cities, report.overall) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadsConfig {
    pub truth: PathBuf,
    pub proposal: PathBuf,
    pub buffer: f64,
    pub spacing: f64,
    pub merge_tolerance: f64,
    pub tile_pattern: String,
    pub parallelism: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadsReport {
    pub config: RoadsConfig,
    #[serde(flatten)]
    pub challenge: RoadChallengeReport,
    pub warnings: Vec<String>,
    pub consistency: Consistency,
}

pub fn score_roads_dirs(config: &RoadsConfig) -> Result<RoadsReport, PipelineError> {
    require_dir(&config.truth)?;
    require_dir(&config.proposal)?;
    let params = AplsParams::new(config.buffer, config.spacing)?;
    if !(config.merge_tolerance.is_finite() && config.merge_tolerance >= 0.0) {
        return Err(PipelineError::Config(format!(
            "merge tolerance must be non-negative, got {}",
            config.merge_tolerance
        )));
    }
    let pattern = TileIdPattern::new(&config.tile_pattern)?;
    let pairing = pair_tiles(&config.truth, &config.proposal, &pattern, GEOJSON_EXTENSIONS)?;
    let mut warnings = pairing_warnings(&pairing);
    let tiles: Vec<TileRoadScore> = pool(config.parallelism)?.install(|| {
        pairing
            .tiles
            .par_iter()
            .map(|pair| {
                let tile = load_road_tile(pair)?;
                let mut score = score_road_tile(&tile, params, config.merge_tolerance)?;
                score.warnings.extend(missing_proposal_warning(pair));
                Ok(score)
            })
            .collect::<Result<Vec<_>, PipelineError>>()
    })?;
    let challenge = aggregate_tiles(tiles);
    for t in &challenge.tiles {
        warnings.extend(t.warnings.iter().cloned());
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let recomputed = recompute_roads_total(&roads_rows(&challenge));
    let consistency = Consistency::new(challenge.total, recomputed);
    Ok(RoadsReport {
        config: config.clone(),
        challenge,
        warnings,
        consistency,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadsRow {
    pub tile_id: String,
    pub city: String,
    pub part1: f64,
    pub part2: f64,
    pub total: f64,
    #[serde(rename = "N1")]
    pub n1: usize,
    #[serde(rename = "N2")]
    pub n2: usize,
    pub missing1: usize,
    pub missing2: usize,
}

fn roads_rows(report: &RoadChallengeReport) -> Vec<RoadsRow> {
    report
        .tiles
        .iter()
        .map(|t| RoadsRow {
            tile_id: t.tile_id.clone(),
            city: t.city.clone(),
            part1: t.score.part1,
            part2: t.score.part2,
            total: t.score.total,
            n1: t.score.path_counts.0,
            n2: t.score.path_counts.1,
            missing1: t.score.missing_paths.0,
            missing2: t.score.missing_paths.1,
        })
        .collect()
}

/// Rebuild the challenge total from tile rows alone.
pub fn recompute_roads_total(rows: &[RoadsRow]) -> f64 {
    let mut by_city: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in rows {
        by_city.entry(&r.city).or_default().push(r.total);
    }
    let means: Vec<f64> = by_city
        .values()
        .map(|v| v.iter().sum::<f64>() / v.len() as f64)
        .collect();
    crate::apls::challenge_total(&means)
}

pub fn write_roads_csv(report: &RoadsReport, out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in roads_rows(&report.challenge) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Write `report` as pretty JSON to `path`.
pub fn write_json<T: Serialize>(path: &Path, report: &T) -> Result<(), PipelineError> {
    let text = serde_json::to_string_pretty(report).expect("reports serialize");
    std::fs::write(path, text + "\n").map_err(io_err(path))
}

/// Write a CSV body to `path`.
pub fn write_csv_file(
    path: &Path,
    write: impl FnOnce(&mut Vec<u8>) -> Result<(), csv::Error>,
) -> Result<(), PipelineError> {
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| PipelineError::Config(e.to_string()))?;
    std::fs::write(path, buf).map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskConfig {
    pub pixel_size: f64,
    pub halfwidth: f64,
    /// Margin added around the road extent, in meters.
    pub margin: f64,
}

/// Render one road GeoJSON file into `out_dir/<stem>.png` plus sidecar.
/// Returns `None` (with a warning) when the file has no roads.
pub fn make_mask_file(input: &Path, out_dir: &Path, config: &MaskConfig) -> Result<Option<PathBuf>, PipelineError> {
    let bytes = std::fs::read(input).map_err(io_err(input))?;
    let parsed = parse_roads(&bytes, None).map_err(|e| e.in_file(input))?;
    for w in &parsed.warnings {
        log::warn!("{}: {w}", input.display());
    }
    let Some(origin) = parsed.origin else {
        log::warn!("{}: no roads; mask skipped", input.display());
        return Ok(None);
    };
    let Some(extent) = BoundingBox::from_points(parsed.records.iter().flat_map(|r| r.geometry.vertices())) else {
        log::warn!("{}: no roads; mask skipped", input.display());
        return Ok(None);
    };
    let extent = extent.expanded(config.margin.max(0.0) + config.halfwidth);
    let mask_err = |source| PipelineError::Mask {
        path: input.to_path_buf(),
        source,
    };
    let mask = render_road_mask(&parsed.records, &extent, config.pixel_size, config.halfwidth).map_err(mask_err)?;
    let t = mask.transform().with_geo_origin(origin);
    let mask = mask.with_transform(t);
    let stem = input.file_stem().unwrap_or_default();
    let out = out_dir.join(stem).with_extension("png");
    write_mask(&out, &mask).map_err(|source| PipelineError::Mask {
        path: out.clone(),
        source,
    })?;
    Ok(Some(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub threshold: f64,
    pub open_radius: usize,
    pub close_radius: usize,
    pub prune_px: f64,
    pub simplify_px: f64,
    pub corner_px: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        let g = SkeletonGraphParams::default();
        RefineConfig {
            threshold: 0.5,
            open_radius: 0,
            close_radius: 0,
            prune_px: g.prune_px,
            simplify_px: g.simplify_px,
            corner_px: g.corner_px,
        }
    }
}

/// Read a mask, refine, thin and trace it. Returns the graph in the mask's
/// local frame plus the projection back to lon/lat when the sidecar has one.
pub fn mask_file_to_graph(
    png: &Path,
    config: &RefineConfig,
) -> Result<(RoadGraph, Option<LocalProjection>), PipelineError> {
    let mask_err = |source| PipelineError::Mask {
        path: png.to_path_buf(),
        source,
    };
    let mask = read_mask(png, config.threshold).map_err(mask_err)?;
    let refined = refine_mask(&mask, config.open_radius, config.close_radius);
    let skeleton = skeletonize(&refined);
    let graph = skeleton_to_graph(
        &skeleton,
        SkeletonGraphParams {
            prune_px: config.prune_px,
            simplify_px: config.simplify_px,
            corner_px: config.corner_px,
        },
    )
    .map_err(mask_err)?;
    let projection = match mask.transform().geo_origin() {
        Some(o) => Some(LocalProjection::new(o).map_err(|e| mask_err(MaskError::Sidecar(e.to_string())))?),
        None => None,
    };
    Ok((graph, projection))
}

/// Graph edges as road records, ready for GeoJSON export.
pub fn graph_to_roads(graph: &RoadGraph) -> Vec<RoadSegmentRecord> {
    graph
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| RoadSegmentRecord {
            road_id: i as i64,
            geometry: e.geometry.clone(),
            attributes: RoadAttributes::default(),
        })
        .collect()
}
