use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::{ImageFormat, ImageReader, Limits};

use super::{GeoTransform, MaskError, RasterMask};

/// Largest accepted mask edge, in pixels.
const MAX_EDGE: u32 = 16_384;

/// Decode a PNG into row-major 8-bit luminance.
pub fn decode_png_gray(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>), MaskError> {
    let mut reader = ImageReader::with_format(Cursor::new(bytes), ImageFormat::Png);
    let mut limits = Limits::default();
    limits.max_image_width = Some(MAX_EDGE);
    limits.max_image_height = Some(MAX_EDGE);
    limits.max_alloc = Some(1 << 30);
    reader.limits(limits);
    let img = reader.decode().map_err(|e| MaskError::Png(e.to_string()))?;
    let gray = img.to_luma8();
    let (w, h) = gray.dimensions();
    Ok((w as usize, h as usize, gray.into_raw()))
}

/// Encode row-major 8-bit luminance as PNG.
pub fn encode_png_gray(width: usize, height: usize, values: &[u8]) -> Result<Vec<u8>, MaskError> {
    let img = image::GrayImage::from_raw(width as u32, height as u32, values.to_vec())
        .ok_or_else(|| MaskError::Png("buffer does not match dimensions".into()))?;
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| MaskError::Png(e.to_string()))?;
    Ok(out.into_inner())
}

/// `tile.png` -> `tile.json`.
pub fn sidecar_path(png: &Path) -> PathBuf {
    png.with_extension("json")
}

/// Write the mask PNG and its geotransform sidecar.
pub fn write_mask(png: &Path, mask: &RasterMask) -> Result<(), MaskError> {
    let bytes = encode_png_gray(mask.width(), mask.height(), &mask.to_gray())?;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| MaskError::Io { path, source }
    };
    std::fs::write(png, bytes).map_err(io(png))?;
    let side = sidecar_path(png);
    std::fs::write(&side, mask.transform().to_json()).map_err(io(&side))?;
    Ok(())
}

/// Read a mask PNG plus sidecar, binarizing at `threshold` (fraction of 255).
pub fn read_mask(png: &Path, threshold: f64) -> Result<RasterMask, MaskError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| MaskError::Io { path, source }
    };
    let bytes = std::fs::read(png).map_err(io(png))?;
    let side = sidecar_path(png);
    let side_bytes = std::fs::read(&side).map_err(io(&side))?;
    let transform = GeoTransform::from_json(&side_bytes)?;
    let (w, h, values) = decode_png_gray(&bytes)?;
    RasterMask::from_gray(w, h, transform, &values, threshold)
}
