//! Average Path Length Similarity between a truth and a proposal road graph.

use std::collections::BTreeMap;
use std::collections::HashMap;

use rayon::prelude::*;
use rstar::primitives::{GeomWithData, Line};
use rstar::RTree;
use serde::{Deserialize, Serialize};

use crate::buildings::mean;
use crate::ingest::{RoadSegmentRecord, TileSet};
use crate::road_graph::{
    all_paths_from_sources, build_graph, check_positive, dijkstra, inject_midpoints, ControlNodeSet, GraphError,
    NodeId, NodeKind, RoadGraph, DEFAULT_MERGE_TOLERANCE, DEFAULT_MIDPOINT_SPACING,
};

pub const DEFAULT_BUFFER: f64 = 4.0;

/// Nearest-point ties closer than this go to the lower edge index.
const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AplsParams {
    /// Maximum snap distance in meters.
    pub buffer: f64,
    /// Midpoint spacing in meters.
    pub spacing: f64,
}

impl Default for AplsParams {
    fn default() -> Self {
        AplsParams {
            buffer: DEFAULT_BUFFER,
            spacing: DEFAULT_MIDPOINT_SPACING,
        }
    }
}

impl AplsParams {
    pub fn new(buffer: f64, spacing: f64) -> Result<Self, GraphError> {
        Ok(AplsParams {
            buffer: check_positive("snap buffer", buffer)?,
            spacing: check_positive("midpoint spacing", spacing)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapResult {
    /// The target graph with a node injected at every snap point.
    pub augmented: RoadGraph,
    /// Per source control node, in control order: the target node it snapped
    /// to, or `None` when no target edge lies within the buffer.
    pub mapping: Vec<Option<NodeId>>,
    /// Snap distance per control node; infinite when unsnapped.
    pub distances: Vec<f64>,
    pub buffer: f64,
}

impl SnapResult {
    pub fn unsnapped(&self) -> usize {
        self.mapping.iter().filter(|m| m.is_none()).count()
    }
}

type IndexedSegment = GeomWithData<Line<[f64; 2]>, (usize, usize)>;

/// Snap each source control node to the nearest point on any target edge.
///
/// Nodes farther than `buffer` stay unsnapped. Snap points split their
/// target edge, so path lengths through the augmented graph follow the
/// original geometry.
pub fn snap_control_nodes(
    source: &RoadGraph,
    controls: &ControlNodeSet,
    target: &RoadGraph,
    buffer: f64,
) -> Result<SnapResult, GraphError> {
    let buffer = check_positive("snap buffer", buffer)?;
    let segments: Vec<IndexedSegment> = target
        .edges()
        .iter()
        .enumerate()
        .flat_map(|(ei, e)| {
            e.geometry
                .segments()
                .enumerate()
                .map(move |(si, (a, b))| GeomWithData::new(Line::new([a.x, a.y], [b.x, b.y]), (ei, si)))
        })
        .collect();
    let index = RTree::bulk_load(segments);

    let mut cuts = Vec::new();
    let mut cut_of = Vec::with_capacity(controls.len());
    let mut distances = Vec::with_capacity(controls.len());
    for &id in controls.ids() {
        let p = source.node(id)?.position;
        let mut hits: Vec<(usize, usize)> = index
            .locate_within_distance([p.x, p.y], buffer * buffer)
            .map(|h| h.data)
            .collect();
        hits.sort_unstable();
        // (distance, edge, arc position)
        let mut best: Option<(f64, usize, f64)> = None;
        for (ei, si) in hits {
            let geom = &target.edges()[ei].geometry;
            let (a, b) = (geom.vertices()[si], geom.vertices()[si + 1]);
            let (nearest, param) = crate::geometry::closest_on_segment(p, a, b);
            let d = p.distance(nearest);
            if d > buffer {
                continue;
            }
            let arc = geom.distance_along(si, param);
            let better = match best {
                None => true,
                Some((bd, be, ba)) => {
                    d < bd - TIE_EPS || ((d - bd).abs() <= TIE_EPS && (ei, arc) < (be, ba))
                }
            };
            if better {
                best = Some((d, ei, arc));
            }
        }
        match best {
            Some((d, ei, arc)) => {
                cut_of.push(Some(cuts.len()));
                cuts.push((ei, arc));
                distances.push(d);
            }
            None => {
                cut_of.push(None);
                distances.push(f64::INFINITY);
            }
        }
    }
    let (augmented, nodes) = target.subdivide(&cuts, NodeKind::Snapped);
    let mapping = cut_of.into_iter().map(|c| c.map(|ci| nodes[ci])).collect();
    Ok(SnapResult {
        augmented,
        mapping,
        distances,
        buffer,
    })
}

/// Score of one direction (source graph measured against a target).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionScore {
    pub score: f64,
    /// Unordered control pairs connected in the source graph.
    pub paths: usize,
    /// Pairs penalised fully because an end did not snap or no target path exists.
    pub missing: usize,
}

/// Proportional path-length difference, capped at 1.
pub fn path_contribution(source_len: f64, target_len: Option<f64>) -> f64 {
    match target_len {
        Some(t) => ((source_len - t).abs() / source_len).min(1.0),
        None => 1.0,
    }
}

/// `1 - mean contribution` over every connected source control pair.
///
/// Pairs at zero source distance are skipped since their relative error is
/// undefined. With no pairs, the score is 1 when the target is also empty
/// and 0 otherwise.
pub fn apls_one_direction(source: &RoadGraph, controls: &ControlNodeSet, snap: &SnapResult) -> DirectionScore {
    let table = all_paths_from_sources(source, controls);
    let mut target_rows: HashMap<NodeId, Vec<f64>> = HashMap::new();
    for &t in snap.mapping.iter().flatten() {
        target_rows
            .entry(t)
            .or_insert_with(|| dijkstra(&snap.augmented, t).expect("snapped node exists"));
    }
    let n = controls.len();
    let mut sum = 0.0;
    let mut paths = 0;
    let mut missing = 0;
    for i in 0..n {
        for j in i + 1..n {
            let Some(l) = table.get(i, j) else { continue };
            if l <= 0.0 {
                continue;
            }
            paths += 1;
            let target_len = match (snap.mapping[i], snap.mapping[j]) {
                (Some(a), Some(b)) => Some(target_rows[&a][b]).filter(|d| d.is_finite()),
                _ => None,
            };
            if target_len.is_none() {
                missing += 1;
            }
            sum += path_contribution(l, target_len);
        }
    }
    let score = if paths == 0 {
        if snap.augmented.is_empty() {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - sum / paths as f64).clamp(0.0, 1.0)
    };
    DirectionScore { score, paths, missing }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AplsScore {
    /// Truth control nodes snapped onto the proposal.
    pub part1: f64,
    /// Proposal control nodes snapped onto the truth.
    pub part2: f64,
    pub total: f64,
    pub path_counts: (usize, usize),
    pub missing_paths: (usize, usize),
}

/// Harmonic mean of the two parts, 0 if either is 0.
pub fn combine_parts(part1: f64, part2: f64) -> f64 {
    if part1 > 0.0 && part2 > 0.0 {
        2.0 * part1 * part2 / (part1 + part2)
    } else {
        0.0
    }
}

/// Symmetric APLS with midpoints injected into both graphs.
///
/// Two empty graphs score 1; one empty graph against a non-empty one scores 0.
pub fn apls(truth: &RoadGraph, proposal: &RoadGraph, params: AplsParams) -> Result<AplsScore, GraphError> {
    check_positive("snap buffer", params.buffer)?;
    let (t, tc) = inject_midpoints(truth, params.spacing)?;
    let (p, pc) = inject_midpoints(proposal, params.spacing)?;
    let forward = snap_control_nodes(&t, &tc, &p, params.buffer)?;
    let d1 = apls_one_direction(&t, &tc, &forward);
    let backward = snap_control_nodes(&p, &pc, &t, params.buffer)?;
    let d2 = apls_one_direction(&p, &pc, &backward);
    Ok(AplsScore {
        part1: d1.score,
        part2: d2.score,
        total: combine_parts(d1.score, d2.score),
        path_counts: (d1.paths, d2.paths),
        missing_paths: (d1.missing, d2.missing),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileRoadScore {
    pub tile_id: String,
    pub city: String,
    pub score: AplsScore,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CityRoadScore {
    pub city: String,
    pub score: f64,
    pub tiles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadChallengeReport {
    pub tiles: Vec<TileRoadScore>,
    pub cities: Vec<CityRoadScore>,
    pub total: f64,
}

/// Mean of per-city scores.
pub fn challenge_total(city_scores: &[f64]) -> f64 {
    mean(city_scores.iter().copied())
}

/// Group tile scores by city (mean per city) and average the cities.
pub fn aggregate_tiles(mut tiles: Vec<TileRoadScore>) -> RoadChallengeReport {
    tiles.sort_by(|a, b| a.tile_id.cmp(&b.tile_id));
    let mut by_city: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for t in &tiles {
        by_city.entry(&t.city).or_default().push(t.score.total);
    }
    let cities: Vec<CityRoadScore> = by_city
        .into_iter()
        .map(|(city, scores)| CityRoadScore {
            city: city.to_string(),
            score: mean(scores.iter().copied()),
            tiles: scores.len(),
        })
        .collect();
    let total = challenge_total(&cities.iter().map(|c| c.score).collect::<Vec<_>>());
    RoadChallengeReport { tiles, cities, total }
}

/// Score one loaded tile: build both graphs and compute APLS.
pub fn score_road_tile(
    tile: &TileSet<RoadSegmentRecord>,
    params: AplsParams,
    merge_tolerance: f64,
) -> Result<TileRoadScore, GraphError> {
    let truth = build_graph(&tile.truth, merge_tolerance)?;
    let proposal = build_graph(&tile.proposal, merge_tolerance)?;
    let mut warnings = tile.warnings.clone();
    warnings.extend(truth.warnings.iter().map(|w| format!("truth: {w}")));
    warnings.extend(proposal.warnings.iter().map(|w| format!("proposal: {w}")));
    let score = apls(&truth.graph, &proposal.graph, params)?;
    Ok(TileRoadScore {
        tile_id: tile.tile_id.clone(),
        city: tile.city.clone(),
        score,
        warnings,
    })
}

/// Per-tile APLS in parallel, then city means and their mean.
pub fn score_road_challenge(
    tiles: &[TileSet<RoadSegmentRecord>],
    params: AplsParams,
) -> Result<RoadChallengeReport, GraphError> {
    let scores = tiles
        .par_iter()
        .map(|t| score_road_tile(t, params, DEFAULT_MERGE_TOLERANCE))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate_tiles(scores))
}
