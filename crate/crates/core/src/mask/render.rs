use super::{GeoTransform, MaskError, RasterMask};
use crate::geometry::{segment_distance, BoundingBox, Point2};
use crate::ingest::RoadSegmentRecord;

pub const DEFAULT_HALFWIDTH: f64 = 2.0;

/// Rasterize centerlines: a pixel is set iff its center lies within
/// `halfwidth` meters of some centerline.
///
/// The grid covers `extent` with its top-left corner at
/// `(extent.min.x, extent.max.y)`.
pub fn render_road_mask(
    roads: &[RoadSegmentRecord],
    extent: &BoundingBox,
    pixel_size: f64,
    halfwidth: f64,
) -> Result<RasterMask, MaskError> {
    if !(halfwidth.is_finite() && halfwidth >= 0.0) {
        return Err(MaskError::InvalidParameter {
            name: "halfwidth",
            value: halfwidth,
        });
    }
    if !(extent.width() > 0.0 && extent.height() > 0.0) || !extent.min.is_finite() || !extent.max.is_finite() {
        return Err(MaskError::DegenerateExtent(format!(
            "{:?} to {:?}",
            extent.min, extent.max
        )));
    }
    let transform = GeoTransform::new(Point2::new(extent.min.x, extent.max.y), pixel_size)?;
    let width = (extent.width() / pixel_size).ceil() as usize;
    let height = (extent.height() / pixel_size).ceil() as usize;
    let mut mask = RasterMask::new(width, height, transform)?;
    for road in roads {
        for (a, b) in road.geometry.segments() {
            let (c0, r1) = transform.to_pixel(Point2::new(a.x.min(b.x) - halfwidth, a.y.min(b.y) - halfwidth));
            let (c1, r0) = transform.to_pixel(Point2::new(a.x.max(b.x) + halfwidth, a.y.max(b.y) + halfwidth));
            let clamp_c = |v: f64| v.clamp(0.0, (width - 1) as f64);
            let clamp_r = |v: f64| v.clamp(0.0, (height - 1) as f64);
            if c1 < 0.0 || r1 < 0.0 || c0 > (width - 1) as f64 || r0 > (height - 1) as f64 {
                continue;
            }
            let (c0, c1) = (clamp_c(c0.floor()) as usize, clamp_c(c1.ceil()) as usize);
            let (r0, r1) = (clamp_r(r0.floor()) as usize, clamp_r(r1.ceil()) as usize);
            for row in r0..=r1 {
                for col in c0..=c1 {
                    if mask.get(col, row) {
                        continue;
                    }
                    let p = transform.pixel_center(col as f64, row as f64);
                    if segment_distance(p, a, b) <= halfwidth {
                        mask.set(col, row, true);
                    }
                }
            }
        }
    }
    Ok(mask)
}
