//! Rigid motions, refinement and the perturbations used by the robustness
//! experiments.

use std::collections::{HashMap, HashSet};

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::geometry::raw_triangle_area;
use super::{TriMesh, DEGENERATE_EPS};
use crate::so3::RotationMatrix;
use crate::{Error, Result};

pub fn rotate_mesh(mesh: &TriMesh, r: &RotationMatrix) -> TriMesh {
    let vertices = mesh.vertices().iter().map(|&v| r.apply(v)).collect();
    TriMesh::from_parts(vertices, mesh.faces().to_vec())
}

/// `x ↦ scale·x + offset` for every vertex.
pub fn scale_translate_mesh(mesh: &TriMesh, scale: f64, offset: [f64; 3]) -> TriMesh {
    let vertices = mesh
        .vertices()
        .iter()
        .map(|v| std::array::from_fn(|k| scale * v[k] + offset[k]))
        .collect();
    TriMesh::from_parts(vertices, mesh.faces().to_vec())
}

/// Splits every triangle 1:4 at its edge midpoints. Midpoints are shared
/// between neighbouring faces so closed meshes stay closed.
pub fn subdivide_midpoint(mesh: &TriMesh) -> TriMesh {
    let mut vertices = mesh.vertices().to_vec();
    let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<[f64; 3]>| {
        *mids.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let (p, q) = (vertices[a], vertices[b]);
            vertices.push(std::array::from_fn(|k| 0.5 * (p[k] + q[k])));
            vertices.len() - 1
        })
    };
    let mut faces = Vec::with_capacity(4 * mesh.num_faces());
    for &[a, b, c] in mesh.faces() {
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        faces.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    TriMesh::from_parts(vertices, faces)
}

/// Deletes `⌊fraction·F⌋` uniformly chosen faces. Surviving faces keep their
/// relative order and all vertices are retained.
pub fn remove_faces(mesh: &TriMesh, fraction: f64, seed: u64) -> Result<TriMesh> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::Config(format!("removal fraction must be in [0, 1), got {fraction}")));
    }
    let f = mesh.num_faces();
    let k = (fraction * f as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let removed: HashSet<usize> = index::sample(&mut rng, f, k).into_iter().collect();
    let faces = (0..f)
        .filter(|i| !removed.contains(i))
        .map(|i| mesh.faces()[i])
        .collect();
    Ok(TriMesh::from_parts(mesh.vertices().to_vec(), faces))
}

/// Vertex-clustering decimation. The grid cell size is found by bisection
/// (on a log scale) so that the surviving face count lands within 10% of
/// `ratio·F` when possible; otherwise the closest count found is returned.
pub fn decimate_cluster(mesh: &TriMesh, ratio: f64) -> Result<TriMesh> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::Config(format!("decimation ratio must be in (0, 1], got {ratio}")));
    }
    if ratio == 1.0 || mesh.num_faces() == 0 {
        return Ok(mesh.clone());
    }
    let target = ratio * mesh.num_faces() as f64;
    let (lo_corner, hi_corner) = mesh.bounding_box();
    let diag = (0..3)
        .map(|k| (hi_corner[k] - lo_corner[k]).powi(2))
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let (mut lo, mut hi) = ((diag * 1e-6).ln(), diag.ln());
    let mut best: Option<(f64, TriMesh)> = None;
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        let candidate = cluster(mesh, lo_corner, mid.exp());
        let count = candidate.num_faces() as f64;
        let miss = (count - target).abs();
        if best.as_ref().is_none_or(|(m, _)| miss < *m) {
            best = Some((miss, candidate));
        }
        if miss <= 0.1 * target {
            break;
        }
        if count > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.expect("at least one bisection step").1)
}

fn cluster(mesh: &TriMesh, origin: [f64; 3], cell: f64) -> TriMesh {
    let mut cell_of: HashMap<[i64; 3], usize> = HashMap::new();
    let mut sums: Vec<([f64; 3], usize)> = Vec::new();
    let remap: Vec<usize> = mesh
        .vertices()
        .iter()
        .map(|v| {
            let key = std::array::from_fn(|k| ((v[k] - origin[k]) / cell).floor() as i64);
            let id = *cell_of.entry(key).or_insert_with(|| {
                sums.push(([0.0; 3], 0));
                sums.len() - 1
            });
            for k in 0..3 {
                sums[id].0[k] += v[k];
            }
            sums[id].1 += 1;
            id
        })
        .collect();
    let vertices: Vec<[f64; 3]> = sums
        .iter()
        .map(|(s, n)| std::array::from_fn(|k| s[k] / *n as f64))
        .collect();
    let mut seen = HashSet::new();
    let mut faces = Vec::new();
    for f in mesh.faces() {
        let g = f.map(|i| remap[i]);
        if g[0] == g[1] || g[1] == g[2] || g[0] == g[2] {
            continue;
        }
        let mut key = g;
        key.sort_unstable();
        if !seen.insert(key) {
            continue;
        }
        if raw_triangle_area(vertices[g[0]], vertices[g[1]], vertices[g[2]]) < DEGENERATE_EPS {
            continue;
        }
        faces.push(g);
    }
    TriMesh::from_parts(vertices, faces)
}

/// Reindexes a mesh: old vertex `i` becomes `vertex_perm[i]`, and output face
/// `j` is input face `face_order[j]`. Index order inside each face is kept.
pub fn reindex_mesh(mesh: &TriMesh, vertex_perm: &[usize], face_order: &[usize]) -> Result<TriMesh> {
    let is_perm = |p: &[usize], n: usize| {
        let mut hit = vec![false; n];
        p.len() == n && p.iter().all(|&i| i < n && !std::mem::replace(&mut hit[i], true))
    };
    if !is_perm(vertex_perm, mesh.num_vertices()) || !is_perm(face_order, mesh.num_faces()) {
        return Err(Error::Config("reindexing needs two permutations matching the mesh".into()));
    }
    let mut vertices = vec![[0.0; 3]; mesh.num_vertices()];
    for (old, &new) in vertex_perm.iter().enumerate() {
        vertices[new] = mesh.vertices()[old];
    }
    let faces = face_order
        .iter()
        .map(|&j| mesh.faces()[j].map(|i| vertex_perm[i]))
        .collect();
    Ok(TriMesh::from_parts(vertices, faces))
}

/// Random vertex and face reindexing; the surface and its winding are kept.
pub fn permute_mesh(mesh: &TriMesh, seed: u64) -> TriMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vperm: Vec<usize> = (0..mesh.num_vertices()).collect();
    vperm.shuffle(&mut rng);
    let mut forder: Vec<usize> = (0..mesh.num_faces()).collect();
    forder.shuffle(&mut rng);
    reindex_mesh(mesh, &vperm, &forder).expect("shuffles are permutations")
}
