//! Largest-component selection and hole filling.
//!
//! Foreground uses 4-connectivity and background 8-connectivity, so a
//! 4-connected closed ring always separates its inside from the border.

use std::collections::VecDeque;

use super::region::BinaryMask;

const FOUR: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const EIGHT: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

/// Labels 4-connected foreground components in raster discovery order.
/// Returns per-pixel component ids (0 = background, components from 1) and
/// the pixel count of each component.
pub fn label_components(region: &BinaryMask) -> (Vec<u32>, Vec<usize>) {
    let (w, h) = (region.width(), region.height());
    let mut ids = vec![0u32; w * h];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !region.as_slice()[start] || ids[start] != 0 {
            continue;
        }
        let id = sizes.len() as u32 + 1;
        let mut size = 0;
        ids[start] = id;
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            size += 1;
            let (col, row) = ((idx % w) as i64, (idx / w) as i64);
            for (dc, dr) in FOUR {
                let (c, r) = (col + dc, row + dr);
                if region.get_signed(c, r) {
                    let n = r as usize * w + c as usize;
                    if ids[n] == 0 {
                        ids[n] = id;
                        queue.push_back(n);
                    }
                }
            }
        }
        sizes.push(size);
    }
    (ids, sizes)
}

/// The 4-connected component with the most pixels; on ties the one
/// discovered first in raster order.
pub fn largest_component(region: &BinaryMask) -> BinaryMask {
    let (ids, sizes) = label_components(region);
    let mut best = 0u32;
    let mut best_size = 0usize;
    for (i, &size) in sizes.iter().enumerate() {
        if size > best_size {
            best_size = size;
            best = i as u32 + 1;
        }
    }
    BinaryMask::from_vec(
        region.width(),
        region.height(),
        ids.iter().map(|&id| best != 0 && id == best).collect(),
    )
}

/// Sets every background pixel not 8-connected to the grid border.
pub fn fill_holes(region: &BinaryMask) -> BinaryMask {
    let (w, h) = (region.width(), region.height());
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();
    for row in 0..h {
        for col in 0..w {
            let border = row == 0 || col == 0 || row + 1 == h || col + 1 == w;
            let idx = row * w + col;
            if border && !region.as_slice()[idx] {
                outside[idx] = true;
                queue.push_back(idx);
            }
        }
    }
    while let Some(idx) = queue.pop_front() {
        let (col, row) = ((idx % w) as i64, (idx / w) as i64);
        for (dc, dr) in EIGHT {
            let (c, r) = (col + dc, row + dr);
            if c < 0 || r < 0 || c as usize >= w || r as usize >= h {
                continue;
            }
            let n = r as usize * w + c as usize;
            if !outside[n] && !region.as_slice()[n] {
                outside[n] = true;
                queue.push_back(n);
            }
        }
    }
    BinaryMask::from_vec(w, h, outside.iter().map(|&o| !o).collect())
}

/// Post-processing applied to predictions: keep the largest component, then
/// fill its holes. Empty input gives empty output.
pub fn keep_largest_fill_holes(region: &BinaryMask) -> BinaryMask {
    fill_holes(&largest_component(region))
}
