use nalgebra::Vector3;

use super::{PolylineGraph, TriMesh, DEGENERATE_EPS};
use crate::{Error, Result};

/// Centroid, unit normal (from winding) and area of one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleGeometry {
    pub center: [f64; 3],
    pub normal: [f64; 3],
    pub area: f64,
}

/// Midpoint, unit tangent (edge order) and length of one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentGeometry {
    pub center: Vec<f64>,
    pub tangent: Vec<f64>,
    pub length: f64,
}

pub(crate) fn raw_triangle_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let a = Vector3::from(a);
    (Vector3::from(b) - a).cross(&(Vector3::from(c) - a)).norm() * 0.5
}

pub fn triangle_geometry(mesh: &TriMesh, face: usize) -> Result<TriangleGeometry> {
    let [a, b, c] = mesh.face_vertices(face);
    let (pa, pb, pc) = (Vector3::from(a), Vector3::from(b), Vector3::from(c));
    let cross = (pb - pa).cross(&(pc - pa));
    let norm = cross.norm();
    let area = 0.5 * norm;
    if area < DEGENERATE_EPS {
        return Err(Error::DegenerateFace(face));
    }
    let center = (pa + pb + pc) / 3.0;
    let normal = cross / norm;
    Ok(TriangleGeometry {
        center: center.into(),
        normal: normal.into(),
        area,
    })
}

pub fn segment_geometry(graph: &PolylineGraph, edge: usize) -> Result<SegmentGeometry> {
    let [i, j] = graph.edges()[edge];
    let (p, q) = (graph.vertex(i), graph.vertex(j));
    let delta: Vec<f64> = q.iter().zip(p).map(|(b, a)| b - a).collect();
    let length = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
    if length < DEGENERATE_EPS {
        return Err(Error::DegenerateEdge(edge));
    }
    Ok(SegmentGeometry {
        center: p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect(),
        tangent: delta.iter().map(|d| d / length).collect(),
        length,
    })
}
