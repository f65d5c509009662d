//! Pairing truth and proposal files by tile id.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use regex::Regex;

use super::geojson_io::{
    layer_origin, project_buildings, project_roads, read_building_features, read_road_features,
};
use super::{BuildingRecord, IngestError, RoadSegmentRecord};
use crate::geometry::GeoPoint;

/// Captures `AOI_<n>_<city>_img<k>`; the `tile` and `city` groups are optional
/// in user-supplied patterns.
pub const DEFAULT_TILE_PATTERN: &str = r"(?P<tile>AOI_\d+_(?P<city>[A-Za-z]+)_img\d+)";

/// City assigned to tiles whose pattern has no `city` group.
const DEFAULT_CITY: &str = "all";

#[derive(Debug, Clone)]
pub struct TileIdPattern {
    regex: Regex,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TileKey {
    pub tile_id: String,
    pub city: String,
}

impl Default for TileIdPattern {
    fn default() -> Self {
        TileIdPattern::new(DEFAULT_TILE_PATTERN).expect("default pattern compiles")
    }
}

impl TileIdPattern {
    pub fn new(pattern: &str) -> Result<Self, IngestError> {
        Regex::new(pattern)
            .map(|regex| TileIdPattern { regex })
            .map_err(|e| IngestError::Pattern(e.to_string()))
    }

    pub fn as_str(&self) -> &str {
        self.regex.as_str()
    }

    /// Tile id from the `tile` group (or the whole match) and city from the
    /// `city` group.
    pub fn extract(&self, name: &str) -> Option<TileKey> {
        let caps = self.regex.captures(name)?;
        let tile_id = caps
            .name("tile")
            .unwrap_or_else(|| caps.get(0).expect("group 0 always matches"))
            .as_str()
            .to_string();
        let city = caps
            .name("city")
            .map_or(DEFAULT_CITY, |m| m.as_str())
            .to_string();
        Some(TileKey { tile_id, city })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilePair {
    pub key: TileKey,
    pub truth: PathBuf,
    pub proposal: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pairing {
    /// Sorted by tile id.
    pub tiles: Vec<TilePair>,
    /// Proposal files without a truth counterpart; excluded from scoring.
    pub orphans: Vec<PathBuf>,
    /// Files whose names do not match the tile pattern.
    pub unmatched: Vec<PathBuf>,
}

/// All files in `dir` with one of `extensions`, keyed by tile id.
pub fn list_tile_files(
    dir: &Path,
    pattern: &TileIdPattern,
    extensions: &[&str],
) -> Result<(BTreeMap<TileKey, PathBuf>, Vec<PathBuf>), IngestError> {
    let io = |source| IngestError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()).map_err(io))
        .collect::<Result<_, _>>()?;
    paths.sort();
    let mut found: BTreeMap<TileKey, PathBuf> = BTreeMap::new();
    let mut unmatched = Vec::new();
    for path in paths {
        let ext_ok = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| extensions.iter().any(|x| x.eq_ignore_ascii_case(e)));
        if !path.is_file() || !ext_ok {
            continue;
        }
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let Some(key) = pattern.extract(name) else {
            unmatched.push(path);
            continue;
        };
        if let Some(first) = found.get(&key) {
            return Err(IngestError::DuplicateTile {
                tile_id: key.tile_id,
                dir: dir.to_path_buf(),
                first: first.clone(),
                second: path,
            });
        }
        found.insert(key, path);
    }
    Ok((found, unmatched))
}

/// Pair every truth tile with at most one proposal file of the same tile id.
pub fn pair_tiles(
    truth_dir: &Path,
    proposal_dir: &Path,
    pattern: &TileIdPattern,
    extensions: &[&str],
) -> Result<Pairing, IngestError> {
    let (truth, mut unmatched) = list_tile_files(truth_dir, pattern, extensions)?;
    let (mut proposals, unmatched_prop) = list_tile_files(proposal_dir, pattern, extensions)?;
    unmatched.extend(unmatched_prop);
    let tiles = truth
        .into_iter()
        .map(|(key, truth)| {
            let proposal = proposals.remove(&key);
            TilePair {
                key,
                truth,
                proposal,
            }
        })
        .collect();
    Ok(Pairing {
        tiles,
        orphans: proposals.into_values().collect(),
        unmatched,
    })
}

/// Truth and proposal records of one tile, projected into a shared frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TileSet<T> {
    pub tile_id: String,
    pub city: String,
    /// Centre of the truth extent (or of the proposal extent for an empty truth tile).
    pub origin: Option<GeoPoint>,
    pub truth: Vec<T>,
    pub proposal: Vec<T>,
    pub warnings: Vec<String>,
}

fn read(path: &Path) -> Result<Vec<u8>, IngestError> {
    fs::read(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn tagged(path: &Path, warnings: Vec<String>) -> impl Iterator<Item = String> + '_ {
    warnings
        .into_iter()
        .map(move |w| format!("{}: {w}", path.display()))
}

pub fn load_building_tile(pair: &TilePair) -> Result<TileSet<BuildingRecord>, IngestError> {
    let truth = read_building_features(&read(&pair.truth)?).map_err(|e| e.in_file(&pair.truth))?;
    let proposal = match &pair.proposal {
        Some(p) => Some(read_building_features(&read(p)?).map_err(|e| e.in_file(p))?),
        None => None,
    };
    let origin = layer_origin(truth.features.iter().flat_map(|b| &b.exterior)).or_else(|| {
        proposal
            .as_ref()
            .and_then(|p| layer_origin(p.features.iter().flat_map(|b| &b.exterior)))
    });
    let mut warnings: Vec<String> = tagged(&pair.truth, truth.warnings.clone()).collect();
    let (truth_records, proposal_records) = match origin {
        None => (Vec::new(), Vec::new()),
        Some(o) => {
            let t = project_buildings(&truth.features, o).map_err(|e| e.in_file(&pair.truth))?;
            let p = match (&proposal, &pair.proposal) {
                (Some(layer), Some(path)) => {
                    project_buildings(&layer.features, o).map_err(|e| e.in_file(path))?
                }
                _ => Vec::new(),
            };
            (t, p)
        }
    };
    if let (Some(layer), Some(path)) = (proposal, &pair.proposal) {
        warnings.extend(tagged(path, layer.warnings));
    }
    Ok(TileSet {
        tile_id: pair.key.tile_id.clone(),
        city: pair.key.city.clone(),
        origin,
        truth: truth_records,
        proposal: proposal_records,
        warnings,
    })
}

pub fn load_road_tile(pair: &TilePair) -> Result<TileSet<RoadSegmentRecord>, IngestError> {
    let truth = read_road_features(&read(&pair.truth)?).map_err(|e| e.in_file(&pair.truth))?;
    let proposal = match &pair.proposal {
        Some(p) => Some(read_road_features(&read(p)?).map_err(|e| e.in_file(p))?),
        None => None,
    };
    let origin = layer_origin(truth.features.iter().flat_map(|r| &r.coordinates)).or_else(|| {
        proposal
            .as_ref()
            .and_then(|p| layer_origin(p.features.iter().flat_map(|r| &r.coordinates)))
    });
    let mut truth_warnings = truth.warnings.clone();
    let mut proposal_warnings = proposal.as_ref().map(|p| p.warnings.clone()).unwrap_or_default();
    let (truth_records, proposal_records) = match origin {
        None => (Vec::new(), Vec::new()),
        Some(o) => {
            let t = project_roads(&truth.features, o, &mut truth_warnings)
                .map_err(|e| e.in_file(&pair.truth))?;
            let p = match (&proposal, &pair.proposal) {
                (Some(layer), Some(path)) => {
                    project_roads(&layer.features, o, &mut proposal_warnings)
                        .map_err(|e| e.in_file(path))?
                }
                _ => Vec::new(),
            };
            (t, p)
        }
    };
    let mut warnings: Vec<String> = tagged(&pair.truth, truth_warnings).collect();
    if let Some(path) = &pair.proposal {
        warnings.extend(tagged(path, proposal_warnings));
    }
    Ok(TileSet {
        tile_id: pair.key.tile_id.clone(),
        city: pair.key.city.clone(),
        origin,
        truth: truth_records,
        proposal: proposal_records,
        warnings,
    })
}
