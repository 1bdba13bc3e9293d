//! Procedural closed meshes used as stand-ins for scanned datasets.

use std::collections::HashMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TriMesh;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    Ellipsoid { radii: [f64; 3] },
    Torus { major: f64, minor: f64 },
    /// Box with two seeded Gaussian bumps pushed outward.
    BumpedBox { half_extents: [f64; 3], bump_height: f64 },
    /// Sphere with seeded radial Gaussian lobes of relative height `amplitude`.
    Blob { amplitude: f64 },
}

impl ShapeKind {
    pub fn name(&self) -> &'static str {
        match self {
            ShapeKind::Ellipsoid { .. } => "ellipsoid",
            ShapeKind::Torus { .. } => "torus",
            ShapeKind::BumpedBox { .. } => "bumped_box",
            ShapeKind::Blob { .. } => "blob",
        }
    }

    /// Default parameters for a kind name.
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "ellipsoid" => ShapeKind::Ellipsoid { radii: [1.0, 0.8, 0.6] },
            "torus" => ShapeKind::Torus { major: 1.0, minor: 0.35 },
            "bumped_box" => ShapeKind::BumpedBox {
                half_extents: [1.0, 0.7, 0.5],
                bump_height: 0.4,
            },
            "blob" => ShapeKind::Blob { amplitude: 0.6 },
            other => return Err(Error::Config(format!("unknown shape kind {other:?}"))),
        })
    }
}

/// Generates a closed, outward-wound triangle mesh. `resolution` is the
/// number of grid cells along each cube edge (sphere-like kinds) or around
/// the tube (torus).
pub fn generate_synthetic_shape(kind: &ShapeKind, resolution: usize, seed: u64) -> Result<TriMesh> {
    if resolution < 4 {
        return Err(Error::Config(format!("resolution must be >= 4, got {resolution}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = match *kind {
        ShapeKind::Ellipsoid { radii } => {
            let (mut v, f) = cube_grid(resolution);
            for p in &mut v {
                let u = normalized(*p);
                *p = [u[0] * radii[0], u[1] * radii[1], u[2] * radii[2]];
            }
            TriMesh::new(v, f)?
        }
        ShapeKind::Torus { major, minor } => torus(major, minor, 2 * resolution, resolution)?,
        ShapeKind::BumpedBox {
            half_extents,
            bump_height,
        } => {
            let (mut v, f) = cube_grid(resolution);
            for p in &mut v {
                *p = [p[0] * half_extents[0], p[1] * half_extents[1], p[2] * half_extents[2]];
            }
            // Bump centers on two distinct, randomly chosen surface points.
            let sigma = 0.35 * half_extents.iter().cloned().fold(f64::INFINITY, f64::min);
            let first = rng.random_range(0..v.len());
            let mut second = rng.random_range(0..v.len());
            while dist2(v[first], v[second]) < (2.0 * sigma).powi(2) {
                second = rng.random_range(0..v.len());
            }
            let centers = [(v[first], 1.0), (v[second], 0.6)];
            for p in &mut v {
                let lift: f64 = centers
                    .iter()
                    .map(|(c, w)| w * (-dist2(*p, *c) / (2.0 * sigma * sigma)).exp())
                    .sum();
                let u = normalized(*p);
                for k in 0..3 {
                    p[k] += bump_height * lift * u[k];
                }
            }
            TriMesh::new(v, f)?
        }
        ShapeKind::Blob { amplitude } => {
            let (mut v, f) = cube_grid(resolution);
            let lobes: Vec<([f64; 3], f64, f64)> = (0..5)
                .map(|_| {
                    let dir = normalized([
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    ]);
                    (dir, rng.random_range(0.3..1.0), rng.random_range(0.25..0.6))
                })
                .collect();
            for p in &mut v {
                let u = normalized(*p);
                let r = 1.0
                    + amplitude
                        * lobes
                            .iter()
                            .map(|(d, w, s)| {
                                let c = u[0] * d[0] + u[1] * d[1] + u[2] * d[2];
                                w * (-(1.0 - c) / (s * s)).exp()
                            })
                            .sum::<f64>();
                *p = [u[0] * r, u[1] * r, u[2] * r];
            }
            TriMesh::new(v, f)?
        }
    };
    Ok(mesh)
}

fn normalized(p: [f64; 3]) -> [f64; 3] {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / n, p[1] / n, p[2] / n]
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

/// Surface of `[-1,1]³` with `res × res` quads per side, each split into two
/// triangles, wound counter-clockwise seen from outside.
fn cube_grid(res: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::with_capacity(12 * res * res);
    let coord = |i: usize| -1.0 + 2.0 * i as f64 / res as f64;
    let mut vid = |lattice: [usize; 3]| -> usize {
        *index.entry(lattice).or_insert_with(|| {
            vertices.push([coord(lattice[0]), coord(lattice[1]), coord(lattice[2])]);
            vertices.len() - 1
        })
    };
    for axis in 0..3 {
        // (u, v, axis) is a cyclic permutation, so e_u × e_v = e_axis.
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in [0, res] {
            for i in 0..res {
                for j in 0..res {
                    let mut corner = |di: usize, dj: usize| {
                        let mut l = [0usize; 3];
                        l[axis] = side;
                        l[u] = i + di;
                        l[v] = j + dj;
                        vid(l)
                    };
                    let (p00, p10, p11, p01) = (corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1));
                    if side == res {
                        faces.push([p00, p10, p11]);
                        faces.push([p00, p11, p01]);
                    } else {
                        faces.push([p00, p11, p10]);
                        faces.push([p00, p01, p11]);
                    }
                }
            }
        }
    }
    (vertices, faces)
}

fn torus(major: f64, minor: f64, nu: usize, nv: usize) -> Result<TriMesh> {
    if !(major > minor && minor > 0.0) {
        return Err(Error::Config(format!(
            "torus needs major > minor > 0, got {major} and {minor}"
        )));
    }
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = TAU * i as f64 / nu as f64;
        for j in 0..nv {
            let v = TAU * j as f64 / nv as f64;
            let ring = major + minor * v.cos();
            vertices.push([ring * u.cos(), ring * u.sin(), minor * v.sin()]);
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            // ∂u × ∂v points away from the tube axis.
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh::new(vertices, faces)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::mesh::triangle_geometry;

    fn all_kinds() -> Vec<ShapeKind> {
        ["ellipsoid", "torus", "bumped_box", "blob"]
            .iter()
            .map(|n| ShapeKind::from_name(n).unwrap())
            .collect()
    }

    #[test]
    fn every_kind_is_closed_and_consistently_wound() {
        for kind in all_kinds() {
            for res in [4, 7] {
                let m = generate_synthetic_shape(&kind, res, 3).unwrap();
                m.check_winding().unwrap();
                assert!(m.is_closed(), "{} not closed", kind.name());
                for f in 0..m.num_faces() {
                    triangle_geometry(&m, f).unwrap();
                }
            }
        }
    }

    #[test]
    fn star_shaped_kinds_face_outward() {
        for name in ["ellipsoid", "bumped_box", "blob"] {
            let m = generate_synthetic_shape(&ShapeKind::from_name(name).unwrap(), 8, 11).unwrap();
            for f in 0..m.num_faces() {
                let g = triangle_geometry(&m, f).unwrap();
                let d: f64 = (0..3).map(|k| g.center[k] * g.normal[k]).sum();
                assert!(d > 0.0, "{name}: face {f} points inward");
            }
        }
    }

    #[test]
    fn unit_sphere_area() {
        let m = generate_synthetic_shape(&ShapeKind::Ellipsoid { radii: [1.0; 3] }, 24, 0).unwrap();
        let rel = (m.total_area() - 4.0 * PI).abs() / (4.0 * PI);
        assert!(rel < 0.02, "relative area error {rel}");
    }

    #[test]
    fn torus_area() {
        let m = generate_synthetic_shape(&ShapeKind::Torus { major: 1.0, minor: 0.3 }, 32, 0).unwrap();
        let exact = 4.0 * PI * PI * 0.3;
        assert!((m.total_area() - exact).abs() / exact < 0.02);
        assert!(generate_synthetic_shape(&ShapeKind::Torus { major: 0.2, minor: 0.3 }, 8, 0).is_err());
    }

    #[test]
    fn seeded_shapes_are_deterministic() {
        let blob = ShapeKind::from_name("blob").unwrap();
        assert_eq!(
            generate_synthetic_shape(&blob, 10, 7).unwrap(),
            generate_synthetic_shape(&blob, 10, 7).unwrap()
        );
        assert_ne!(
            generate_synthetic_shape(&blob, 10, 7).unwrap(),
            generate_synthetic_shape(&blob, 10, 8).unwrap()
        );
    }

    #[test]
    fn low_resolution_rejected() {
        assert!(generate_synthetic_shape(&ShapeKind::from_name("blob").unwrap(), 3, 0).is_err());
        assert!(ShapeKind::from_name("teapot").is_err());
    }
}
