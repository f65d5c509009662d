//! Building-footprint F1: greedy one-to-one IoU matching per scene, summed
//! counts per city, and an unweighted mean over cities.

use std::cmp::Ordering;

use rstar::primitives::{GeomWithData, Rectangle};
use rstar::{RTree, AABB};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::iou;
use crate::ingest::BuildingRecord;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildingsError {
    #[error("IoU threshold must be in (0, 1], got {0}")]
    Threshold(f64),
}

/// An IoU threshold in `(0, 1]`; a pair with IoU `>=` the threshold is a match candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IouThreshold(f64);

impl IouThreshold {
    pub const DEFAULT: IouThreshold = IouThreshold(0.5);

    pub fn new(value: f64) -> Result<Self, BuildingsError> {
        if value > 0.0 && value <= 1.0 {
            Ok(IouThreshold(value))
        } else {
            Err(BuildingsError::Threshold(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for IouThreshold {
    fn default() -> Self {
        IouThreshold::DEFAULT
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingMatch {
    pub truth_id: i64,
    pub proposal_id: i64,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneScore {
    pub tile_id: String,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub matches: Vec<BuildingMatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CityScore {
    pub city: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    truth: usize,
    proposal: usize,
    iou: f64,
}

type IndexedBox = GeomWithData<Rectangle<[f64; 2]>, usize>;

/// Every (truth, proposal) pair with IoU at or above `threshold`.
fn candidates(
    truth: &[BuildingRecord],
    proposal: &[BuildingRecord],
    threshold: IouThreshold,
) -> Vec<Candidate> {
    let index: RTree<IndexedBox> = RTree::bulk_load(
        proposal
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let b = p.footprint.bbox();
                GeomWithData::new(
                    Rectangle::from_corners([b.min.x, b.min.y], [b.max.x, b.max.y]),
                    i,
                )
            })
            .collect(),
    );
    let mut out = Vec::new();
    for (ti, t) in truth.iter().enumerate() {
        let b = t.footprint.bbox();
        let query = AABB::from_corners([b.min.x, b.min.y], [b.max.x, b.max.y]);
        for hit in index.locate_in_envelope_intersecting(&query) {
            let pi = hit.data;
            let (ta, pa) = (t.footprint.area(), proposal[pi].footprint.area());
            // IoU can never exceed the area ratio.
            if ta.min(pa) / ta.max(pa) < threshold.value() {
                continue;
            }
            let value = iou(&t.footprint, &proposal[pi].footprint).unwrap_or(0.0);
            if value >= threshold.value() {
                out.push(Candidate {
                    truth: ti,
                    proposal: pi,
                    iou: value,
                });
            }
        }
    }
    out
}

fn bbox_key(b: &BuildingRecord) -> (f64, f64) {
    let bb = b.footprint.bbox();
    (bb.min.x, bb.min.y)
}

/// Greedy matching in decreasing IoU order; each truth and each proposal is
/// used at most once.
///
/// Ties are broken by `(truth_id, proposal_id)`, then by footprint position,
/// so the outcome does not depend on input order.
pub fn match_buildings(
    tile_id: &str,
    truth: &[BuildingRecord],
    proposal: &[BuildingRecord],
    threshold: IouThreshold,
) -> SceneScore {
    let mut cands = candidates(truth, proposal, threshold);
    cands.sort_by(|a, b| {
        b.iou
            .total_cmp(&a.iou)
            .then_with(|| truth[a.truth].building_id.cmp(&truth[b.truth].building_id))
            .then_with(|| {
                proposal[a.proposal]
                    .building_id
                    .cmp(&proposal[b.proposal].building_id)
            })
            .then_with(|| cmp_pair(bbox_key(&truth[a.truth]), bbox_key(&truth[b.truth])))
            .then_with(|| {
                cmp_pair(
                    bbox_key(&proposal[a.proposal]),
                    bbox_key(&proposal[b.proposal]),
                )
            })
    });
    let mut truth_used = vec![false; truth.len()];
    let mut proposal_used = vec![false; proposal.len()];
    let mut matches = Vec::new();
    for c in cands {
        if truth_used[c.truth] || proposal_used[c.proposal] {
            continue;
        }
        truth_used[c.truth] = true;
        proposal_used[c.proposal] = true;
        matches.push(BuildingMatch {
            truth_id: truth[c.truth].building_id,
            proposal_id: proposal[c.proposal].building_id,
            iou: c.iou,
        });
    }
    let tp = matches.len();
    SceneScore {
        tile_id: tile_id.to_string(),
        true_positives: tp,
        false_positives: proposal.len() - tp,
        false_negatives: truth.len() - tp,
        matches,
    }
}

fn cmp_pair(a: (f64, f64), b: (f64, f64)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.total_cmp(&b.1))
}

/// Sum scene counts into city precision, recall and F1.
pub fn score_city(city: &str, scenes: &[SceneScore]) -> CityScore {
    let tp: usize = scenes.iter().map(|s| s.true_positives).sum();
    let fp: usize = scenes.iter().map(|s| s.false_positives).sum();
    let fn_: usize = scenes.iter().map(|s| s.false_negatives).sum();
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    CityScore {
        city: city.to_string(),
        precision,
        recall,
        f1: f1_score(precision, recall),
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
    }
}

/// Arithmetic mean of city F1 scores; 0 for an empty list.
pub fn overall_buildings_score(cities: &[CityScore]) -> f64 {
    mean(cities.iter().map(|c| c.f1))
}

pub(crate) fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}
