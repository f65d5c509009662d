use serde::{Deserialize, Serialize};

use super::{MaskError, RasterMask};

pub const DEFAULT_RELAX_RADIUS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelMetrics {
    pub iou: f64,
    pub f1: f64,
    pub relaxed_precision: f64,
    pub relaxed_recall: f64,
    pub relaxed_f1: f64,
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Pixels of `mask` dilated by a Euclidean disk of `radius` pixels.
fn within_radius(mask: &RasterMask, radius: usize) -> Vec<bool> {
    let (w, h) = (mask.width() as isize, mask.height() as isize);
    let r = radius as isize;
    let offsets: Vec<(isize, isize)> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(|(dx, dy)| dx * dx + dy * dy <= r * r)
        .collect();
    let mut out = vec![false; mask.data().len()];
    for row in 0..h {
        for col in 0..w {
            if !mask.get(col as usize, row as usize) {
                continue;
            }
            for (dx, dy) in &offsets {
                let (c, rr) = (col + dx, row + dy);
                if c >= 0 && rr >= 0 && c < w && rr < h {
                    out[(rr * w + c) as usize] = true;
                }
            }
        }
    }
    out
}

/// Pixel IoU, pixel F1 and relaxed F1.
///
/// Relaxed precision is the share of proposal pixels within `relax_radius`
/// pixels of a truth pixel; relaxed recall swaps the roles. Two empty masks
/// agree perfectly and score 1 everywhere.
pub fn pixel_metrics(truth: &RasterMask, proposal: &RasterMask, relax_radius: usize) -> Result<PixelMetrics, MaskError> {
    if !truth.same_shape(proposal) {
        return Err(MaskError::DimensionMismatch(
            truth.width(),
            truth.height(),
            proposal.width(),
            proposal.height(),
        ));
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&t, &p) in truth.data().iter().zip(proposal.data()) {
        match (t, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            _ => {}
        }
    }
    if tp + fp + fn_ == 0 {
        return Ok(PixelMetrics {
            iou: 1.0,
            f1: 1.0,
            relaxed_precision: 1.0,
            relaxed_recall: 1.0,
            relaxed_f1: 1.0,
        });
    }
    let iou = tp as f64 / (tp + fp + fn_) as f64;
    let f1_px = 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64;

    let near_truth = within_radius(truth, relax_radius);
    let near_proposal = within_radius(proposal, relax_radius);
    let ratio = |mask: &RasterMask, near: &[bool]| {
        let total = mask.count();
        if total == 0 {
            return 0.0;
        }
        let hit = mask.data().iter().zip(near).filter(|(&m, &n)| m && n).count();
        hit as f64 / total as f64
    };
    let relaxed_precision = ratio(proposal, &near_truth);
    let relaxed_recall = ratio(truth, &near_proposal);
    Ok(PixelMetrics {
        iou,
        f1: f1_px,
        relaxed_precision,
        relaxed_recall,
        relaxed_f1: f1(relaxed_precision, relaxed_recall),
    })
}
