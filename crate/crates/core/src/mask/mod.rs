//! Binary road masks: rendering from centerlines, refinement, thinning,
//! conversion back into graphs, and pixel-level metrics.

mod io;
mod metrics;
mod morphology;
mod render;
mod skeleton;
mod to_graph;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeoPoint, Point2};

pub use io::{decode_png_gray, encode_png_gray, read_mask, sidecar_path, write_mask};
pub use metrics::{pixel_metrics, PixelMetrics, DEFAULT_RELAX_RADIUS};
pub use morphology::{close, dilate, erode, open, refine_mask};
pub use render::{render_road_mask, DEFAULT_HALFWIDTH};
pub use skeleton::{is_simple, skeletonize, yokoi_connectivity};
pub use to_graph::{skeleton_to_graph, SkeletonGraphParams, DEFAULT_CORNER_PX, DEFAULT_PRUNE_PX};

#[derive(Debug, Error)]
pub enum MaskError {
    #[error("degenerate extent: {0}")]
    DegenerateExtent(String),
    #[error("{name} is invalid: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("mask dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("PNG: {0}")]
    Png(String),
    #[error("geotransform sidecar: {0}")]
    Sidecar(String),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Pixel grid placement in the local metric frame. Rows run south, so
/// y decreases with the row index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoTransform {
    /// Top-left corner of pixel (0, 0).
    pub origin_x: f64,
    pub origin_y: f64,
    /// Pixel edge length in meters.
    pub pixel_size: f64,
    /// Geographic origin of the local frame, if known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_lon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_lat: Option<f64>,
}

impl GeoTransform {
    pub fn new(origin: Point2, pixel_size: f64) -> Result<Self, MaskError> {
        if !(pixel_size.is_finite() && pixel_size > 0.0) {
            return Err(MaskError::InvalidParameter {
                name: "pixel size",
                value: pixel_size,
            });
        }
        if !origin.is_finite() {
            return Err(MaskError::Sidecar("non-finite origin".into()));
        }
        Ok(GeoTransform {
            origin_x: origin.x,
            origin_y: origin.y,
            pixel_size,
            origin_lon: None,
            origin_lat: None,
        })
    }

    pub fn with_geo_origin(mut self, origin: GeoPoint) -> Self {
        self.origin_lon = Some(origin.lon);
        self.origin_lat = Some(origin.lat);
        self
    }

    pub fn geo_origin(&self) -> Option<GeoPoint> {
        GeoPoint::new(self.origin_lon?, self.origin_lat?).ok()
    }

    /// Parse and validate a sidecar JSON document.
    pub fn from_json(bytes: &[u8]) -> Result<Self, MaskError> {
        let t: GeoTransform = serde_json::from_slice(bytes).map_err(|e| MaskError::Sidecar(e.to_string()))?;
        let checked = GeoTransform::new(Point2::new(t.origin_x, t.origin_y), t.pixel_size)?;
        match (t.origin_lon, t.origin_lat) {
            (None, None) => Ok(checked),
            (Some(lon), Some(lat)) => GeoPoint::new(lon, lat)
                .map(|g| checked.with_geo_origin(g))
                .map_err(|e| MaskError::Sidecar(e.to_string())),
            _ => Err(MaskError::Sidecar("origin_lon and origin_lat must appear together".into())),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }

    /// Center of pixel `(col, row)` in meters.
    pub fn pixel_center(&self, col: f64, row: f64) -> Point2 {
        Point2::new(
            self.origin_x + (col + 0.5) * self.pixel_size,
            self.origin_y - (row + 0.5) * self.pixel_size,
        )
    }

    /// Fractional pixel coordinates `(col, row)` whose center maps to `p`.
    pub fn to_pixel(&self, p: Point2) -> (f64, f64) {
        (
            (p.x - self.origin_x) / self.pixel_size - 0.5,
            (self.origin_y - p.y) / self.pixel_size - 0.5,
        )
    }
}

/// A binary mask placed in the local metric frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterMask {
    width: usize,
    height: usize,
    transform: GeoTransform,
    data: Vec<bool>,
}

impl RasterMask {
    pub fn new(width: usize, height: usize, transform: GeoTransform) -> Result<Self, MaskError> {
        if width == 0 || height == 0 {
            return Err(MaskError::DegenerateExtent(format!("{width}x{height} pixels")));
        }
        Ok(RasterMask {
            width,
            height,
            transform,
            data: vec![false; width * height],
        })
    }

    /// Mask from raw row-major values; any nonzero byte at or above
    /// `threshold * 255` is foreground.
    pub fn from_gray(
        width: usize,
        height: usize,
        transform: GeoTransform,
        values: &[u8],
        threshold: f64,
    ) -> Result<Self, MaskError> {
        if !(threshold.is_finite() && (0.0..=1.0).contains(&threshold)) {
            return Err(MaskError::InvalidParameter {
                name: "threshold",
                value: threshold,
            });
        }
        let mut m = RasterMask::new(width, height, transform)?;
        if values.len() != width * height {
            return Err(MaskError::DimensionMismatch(width, height, values.len(), 1));
        }
        let cut = threshold * 255.0;
        for (d, &v) in m.data.iter_mut().zip(values) {
            *d = v > 0 && v as f64 >= cut;
        }
        Ok(m)
    }

    /// Same pixels, placed with `transform`.
    pub fn with_transform(mut self, transform: GeoTransform) -> Self {
        self.transform = transform;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn transform(&self) -> &GeoTransform {
        &self.transform
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.data[row * self.width + col]
    }

    /// Like [`get`](Self::get) but `false` outside the grid.
    pub fn get_signed(&self, col: isize, row: isize) -> bool {
        col >= 0
            && row >= 0
            && (col as usize) < self.width
            && (row as usize) < self.height
            && self.data[row as usize * self.width + col as usize]
    }

    pub fn set(&mut self, col: usize, row: usize, value: bool) {
        self.data[row * self.width + col] = value;
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&v| v)
    }

    pub fn same_shape(&self, other: &RasterMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Pixel-wise OR of two masks of the same shape.
    pub fn union(&self, other: &RasterMask) -> Result<RasterMask, MaskError> {
        if !self.same_shape(other) {
            return Err(MaskError::DimensionMismatch(self.width, self.height, other.width, other.height));
        }
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(&other.data) {
            *a |= b;
        }
        Ok(out)
    }

    /// Row-major 0/255 bytes.
    pub fn to_gray(&self) -> Vec<u8> {
        self.data.iter().map(|&v| if v { 255 } else { 0 }).collect()
    }

    pub(crate) fn with_data(&self, data: Vec<bool>) -> RasterMask {
        debug_assert_eq!(data.len(), self.data.len());
        RasterMask {
            width: self.width,
            height: self.height,
            transform: self.transform,
            data,
        }
    }

    /// Number of 8-connected foreground components.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.data.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.data.len() {
            if !self.data[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(i) = stack.pop() {
                let (c, r) = ((i % self.width) as isize, (i / self.width) as isize);
                for (dc, dr) in NEIGHBORS_8 {
                    let (nc, nr) = (c + dc, r + dr);
                    if self.get_signed(nc, nr) {
                        let j = nr as usize * self.width + nc as usize;
                        if !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        count
    }
}

/// Offsets of the 8-neighbourhood, clockwise from north.
pub(crate) const NEIGHBORS_8: [(isize, isize); 8] =
    [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];
