use super::RasterMask;

/// Offsets of a discrete disk: `dx^2 + dy^2 <= (r + 0.5)^2`.
/// Radius 1 gives the 3x3 square.
fn disk(radius: usize) -> Vec<(isize, isize)> {
    let r = radius as isize;
    let lim = (radius as f64 + 0.5).powi(2);
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if ((dx * dx + dy * dy) as f64) <= lim {
                out.push((dx, dy));
            }
        }
    }
    out
}

fn apply(mask: &RasterMask, radius: usize, erode: bool) -> RasterMask {
    if radius == 0 {
        return mask.clone();
    }
    let se = disk(radius);
    let (w, h) = (mask.width() as isize, mask.height() as isize);
    let mut data = vec![false; mask.data().len()];
    for row in 0..h {
        for col in 0..w {
            let hit = |&(dx, dy): &(isize, isize)| {
                let (c, r) = (col + dx, row + dy);
                if c < 0 || r < 0 || c >= w || r >= h {
                    // The outside counts as foreground for erosion and
                    // background for dilation, so neither eats the border.
                    erode
                } else {
                    mask.get(c as usize, r as usize)
                }
            };
            data[(row * w + col) as usize] = if erode { se.iter().all(hit) } else { se.iter().any(hit) };
        }
    }
    mask.with_data(data)
}

pub fn erode(mask: &RasterMask, radius: usize) -> RasterMask {
    apply(mask, radius, true)
}

pub fn dilate(mask: &RasterMask, radius: usize) -> RasterMask {
    apply(mask, radius, false)
}

pub fn open(mask: &RasterMask, radius: usize) -> RasterMask {
    dilate(&erode(mask, radius), radius)
}

pub fn close(mask: &RasterMask, radius: usize) -> RasterMask {
    erode(&dilate(mask, radius), radius)
}

/// Opening then closing. Thresholding happens when the mask is decoded
/// (see [`RasterMask::from_gray`]).
pub fn refine_mask(mask: &RasterMask, open_radius: usize, close_radius: usize) -> RasterMask {
    close(&open(mask, open_radius), close_radius)
}
