//! Closed extrusion of a grayscale heightmap.
//!
//! Pixels are grid vertices at `(x, y) = (col, height - 1 - row)`. A grid cell
//! (the square between four neighbouring pixels) is kept when any of its
//! corners exceeds the threshold. Kept cells get a top sheet at
//! `z = height_scale · intensity / 255`, a flat bottom sheet at `z = 0`, and
//! vertical walls along the boundary of the kept region.

use super::{GrayImage, TriMesh};
use crate::{Error, Result};

pub fn heightmap_to_closed_mesh(
    img: &GrayImage,
    height_scale: f64,
    base_threshold: u8,
) -> Result<TriMesh> {
    let (w, h) = (img.width(), img.height());
    if !img.pixels().iter().any(|&p| p > base_threshold) {
        return Err(Error::EmptyImage);
    }
    if w < 2 || h < 2 {
        return Err(Error::InvalidMesh(format!("image {w}x{h} is smaller than 2x2")));
    }
    let (cw, ch) = (w - 1, h - 1);
    let mut active = vec![false; cw * ch];
    for r in 0..ch {
        for c in 0..cw {
            active[r * cw + c] = [(r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)]
                .iter()
                .any(|&(pr, pc)| img.get(pr, pc) > base_threshold);
        }
    }
    fill_diagonal_contacts(&mut active, cw, ch);

    let mut top = vec![usize::MAX; w * h];
    let mut bottom = vec![usize::MAX; w * h];
    let mut vertices = Vec::new();
    for r in 0..ch {
        for c in 0..cw {
            if !active[r * cw + c] {
                continue;
            }
            for (pr, pc) in [(r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)] {
                let k = pr * w + pc;
                if top[k] == usize::MAX {
                    let (x, y) = (pc as f64, (h - 1 - pr) as f64);
                    let z = height_scale * img.get(pr, pc) as f64 / 255.0;
                    top[k] = vertices.len();
                    vertices.push([x, y, z]);
                    bottom[k] = vertices.len();
                    vertices.push([x, y, 0.0]);
                }
            }
        }
    }

    let is_active = |r: isize, c: isize| {
        r >= 0 && c >= 0 && (r as usize) < ch && (c as usize) < cw && active[r as usize * cw + c as usize]
    };
    let mut faces = Vec::new();
    for r in 0..ch {
        for c in 0..cw {
            if !active[r * cw + c] {
                continue;
            }
            // Corners named by (row offset, col offset); y grows upward, so the
            // counter-clockwise order seen from +z is 10 → 11 → 01 → 00.
            let p00 = r * w + c;
            let p01 = r * w + c + 1;
            let p10 = (r + 1) * w + c;
            let p11 = (r + 1) * w + c + 1;
            faces.push([top[p10], top[p11], top[p01]]);
            faces.push([top[p10], top[p01], top[p00]]);
            faces.push([bottom[p10], bottom[p01], bottom[p11]]);
            faces.push([bottom[p10], bottom[p00], bottom[p01]]);

            let (ri, ci) = (r as isize, c as isize);
            // Each side as the directed top edge p → q it carries, with the
            // neighbour cell across it.
            let sides = [
                (p10, p11, ri + 1, ci),
                (p11, p01, ri, ci + 1),
                (p01, p00, ri - 1, ci),
                (p00, p10, ri, ci - 1),
            ];
            for (p, q, nr, nc) in sides {
                if !is_active(nr, nc) {
                    faces.push([top[q], top[p], bottom[p]]);
                    faces.push([top[q], bottom[p], bottom[q]]);
                }
            }
        }
    }
    Ok(TriMesh::from_parts(vertices, faces))
}

/// Activates the two missing cells of any 2×2 block whose active cells touch
/// only at a corner, which would otherwise leave a non-manifold wall edge.
fn fill_diagonal_contacts(active: &mut [bool], cw: usize, ch: usize) {
    loop {
        let mut changed = false;
        for r in 0..ch.saturating_sub(1) {
            for c in 0..cw.saturating_sub(1) {
                let ids = [r * cw + c, r * cw + c + 1, (r + 1) * cw + c, (r + 1) * cw + c + 1];
                let [a, b, d, e] = ids.map(|i| active[i]);
                if (a && e && !b && !d) || (b && d && !a && !e) {
                    for i in ids {
                        active[i] = true;
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}
