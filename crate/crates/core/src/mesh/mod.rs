//! Geometric inputs: triangle meshes, polyline shape graphs and grayscale
//! images, together with the generators and perturbations used by the
//! experiments.

mod generate;
mod geometry;
mod heightmap;
pub mod io;
mod ops;

use std::collections::HashMap;

pub use generate::{generate_synthetic_shape, ShapeKind};
pub use geometry::{segment_geometry, triangle_geometry, SegmentGeometry, TriangleGeometry};
pub use heightmap::heightmap_to_closed_mesh;
pub use io::{load_mesh, save_mesh, MeshFormat};
pub use ops::{
    decimate_cluster, permute_mesh, reindex_mesh, remove_faces, rotate_mesh, scale_translate_mesh,
    subdivide_midpoint,
};

use crate::{Error, Result};

/// Area/length below which a cell is treated as degenerate.
pub const DEGENERATE_EPS: f64 = 1e-12;

/// A triangle mesh in ℝ³. Face winding (counter-clockwise seen from outside)
/// defines the outward normal.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Builds a mesh after checking that every face index is in range and
    /// that every coordinate is finite.
    ///
    /// Winding consistency is not checked here since decimation can produce
    /// folded but still usable meshes; see [`TriMesh::check_winding`].
    pub fn new(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(i) = vertices
            .iter()
            .position(|v| v.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
        }
        let n = vertices.len();
        if let Some(f) = faces.iter().position(|f| f.iter().any(|&i| i >= n)) {
            return Err(Error::InvalidMesh(format!(
                "face {f} references a vertex out of range ({n} vertices)"
            )));
        }
        Ok(Self { vertices, faces })
    }

    pub(crate) fn from_parts(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Self {
        debug_assert!(faces.iter().all(|f| f.iter().all(|&i| i < vertices.len())));
        Self { vertices, faces }
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn face_vertices(&self, face: usize) -> [[f64; 3]; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Sum of the areas of all faces, degenerate ones included (they
    /// contribute ~0).
    pub fn total_area(&self) -> f64 {
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.face_vertices(f);
                geometry::raw_triangle_area(a, b, c)
            })
            .sum()
    }

    /// Counts how many times each directed edge is traversed by a face.
    fn directed_edges(&self) -> HashMap<(usize, usize), usize> {
        let mut edges = HashMap::with_capacity(self.faces.len() * 3);
        for f in &self.faces {
            for k in 0..3 {
                *edges.entry((f[k], f[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        edges
    }

    /// Shared-edge opposite-orientation rule: two faces sharing an edge must
    /// traverse it in opposite directions, so no directed edge may appear
    /// twice.
    pub fn check_winding(&self) -> Result<()> {
        match self.directed_edges().into_iter().find(|&(_, n)| n > 1) {
            Some(((a, b), _)) => Err(Error::InvalidMesh(format!(
                "inconsistent winding: edge {a}->{b} traversed twice in the same direction"
            ))),
            None => Ok(()),
        }
    }

    /// True when every undirected edge borders exactly two faces, with
    /// opposite orientations.
    pub fn is_closed(&self) -> bool {
        let edges = self.directed_edges();
        edges
            .iter()
            .all(|(&(a, b), &n)| n == 1 && edges.get(&(b, a)) == Some(&1))
    }

    /// Axis-aligned bounding box `(min, max)`. Returns zeros for an empty mesh.
    pub fn bounding_box(&self) -> ([f64; 3], [f64; 3]) {
        if self.vertices.is_empty() {
            return ([0.0; 3], [0.0; 3]);
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }
}

/// A polyline shape graph in ℝⁿ (n = 2 or 3): vertices joined by straight
/// edges. Branches are simply disjoint edge subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct PolylineGraph {
    dim: usize,
    coords: Vec<f64>,
    edges: Vec<[usize; 2]>,
}

impl PolylineGraph {
    pub fn new(dim: usize, vertices: &[Vec<f64>], edges: Vec<[usize; 2]>) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidMesh(format!(
                "graph dimension must be 2 or 3, got {dim}"
            )));
        }
        let mut coords = Vec::with_capacity(vertices.len() * dim);
        for (i, v) in vertices.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::InvalidMesh(format!(
                    "vertex {i} has {} coordinates, expected {dim}",
                    v.len()
                )));
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
            }
            coords.extend_from_slice(v);
        }
        let n = vertices.len();
        if let Some(e) = edges.iter().position(|e| e[0] >= n || e[1] >= n) {
            return Err(Error::InvalidMesh(format!(
                "edge {e} references a vertex out of range ({n} vertices)"
            )));
        }
        Ok(Self {
            dim,
            coords,
            edges,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Disjoint union of two graphs of the same dimension.
    pub fn union(&self, other: &PolylineGraph) -> Result<PolylineGraph> {
        if self.dim != other.dim {
            return Err(Error::InvalidMesh(format!(
                "cannot join graphs of dimension {} and {}",
                self.dim, other.dim
            )));
        }
        let offset = self.num_vertices();
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|e| [e[0] + offset, e[1] + offset]));
        Ok(PolylineGraph {
            dim: self.dim,
            coords,
            edges,
        })
    }
}

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::InvalidMesh(format!(
                "image has {} pixels, expected {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Intensity at `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }
}
