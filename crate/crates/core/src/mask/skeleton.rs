use super::{RasterMask, NEIGHBORS_8};

/// Neighbourhood bits in `NEIGHBORS_8` order (N, NE, E, SE, S, SW, W, NW).
fn neighborhood(mask: &RasterMask, col: usize, row: usize) -> u8 {
    let mut bits = 0u8;
    for (k, (dc, dr)) in NEIGHBORS_8.iter().enumerate() {
        if mask.get_signed(col as isize + dc, row as isize + dr) {
            bits |= 1 << k;
        }
    }
    bits
}

/// Yokoi connectivity number for 8-connected foreground.
pub fn yokoi_connectivity(bits: u8) -> u32 {
    let x = |k: usize| 1 - ((bits >> (k % 8)) & 1) as u32;
    // Edge neighbours are N, E, S, W at even positions.
    [0usize, 2, 4, 6]
        .iter()
        .map(|&k| x(k) - x(k) * x(k + 1) * x(k + 2))
        .sum()
}

/// Whether removing the center pixel leaves the local topology unchanged.
pub fn is_simple(bits: u8) -> bool {
    yokoi_connectivity(bits) == 1
}

/// Deletion tables for the two subiterations, indexed by neighbourhood bits.
///
/// A pixel may go when its Hilditch crossing number is 1 (removal keeps
/// local 8-connectivity), it has enough neighbours that it is not a line
/// end, and it lies on the side of the stroke the subiteration peels:
/// south-east first, then north-west.
fn deletion_tables() -> [[bool; 256]; 2] {
    let mut tables = [[false; 256]; 2];
    for bits in 0..=255u8 {
        // Counter-clockwise from east: E, NE, N, NW, W, SW, S, SE.
        let x: [bool; 8] = [2, 1, 0, 7, 6, 5, 4, 3].map(|k| bits >> k & 1 == 1);
        let crossings = [0, 2, 4, 6]
            .iter()
            .filter(|&&i| !x[i] && (x[i + 1] || x[(i + 2) % 8]))
            .count();
        let n1 = [1, 3, 5, 7].iter().filter(|&&k| x[k - 1] || x[k]).count();
        let n2 = [1, 3, 5, 7].iter().filter(|&&k| x[k] || x[(k + 1) % 8]).count();
        if crossings != 1 || !(2..=3).contains(&n1.min(n2)) {
            continue;
        }
        tables[0][bits as usize] = !((x[1] || x[2] || !x[7]) && x[0]);
        tables[1][bits as usize] = !((x[5] || x[6] || !x[3]) && x[4]);
    }
    tables
}

/// Thin a mask to a one-pixel-wide 8-connected skeleton.
///
/// Two-subiteration parallel thinning: each subiteration marks every
/// deletable pixel against the same image, then removes them together.
/// Line ends survive, so strokes keep their length; the number of
/// 8-connected components never changes, and a skeleton is a fixed point.
pub fn skeletonize(mask: &RasterMask) -> RasterMask {
    let tables = deletion_tables();
    let mut m = mask.clone();
    let (w, h) = (m.width(), m.height());
    loop {
        let mut changed = false;
        for table in &tables {
            let doomed: Vec<(usize, usize)> = (0..h)
                .flat_map(|row| (0..w).map(move |col| (col, row)))
                .filter(|&(col, row)| m.get(col, row) && table[neighborhood(&m, col, row) as usize])
                .collect();
            changed |= !doomed.is_empty();
            for (col, row) in doomed {
                m.set(col, row, false);
            }
        }
        if !changed {
            return m;
        }
    }
}
