#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svarm::mesh::{generate_synthetic_shape, rotate_mesh, ShapeKind, TriMesh};
use svarm::model::{MlpParams, SVarMModel};
use svarm::so3::random_rotation;

/// A random closed mesh: one of the generator kinds at a small resolution,
/// randomly rotated and with every vertex jittered.
pub fn random_mesh(seed: u64) -> TriMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = match rng.random_range(0..4) {
        0 => ShapeKind::Ellipsoid {
            radii: [rng.random_range(0.5..1.5), rng.random_range(0.5..1.5), rng.random_range(0.5..1.5)],
        },
        1 => ShapeKind::Torus {
            major: rng.random_range(0.8..1.2),
            minor: rng.random_range(0.2..0.4),
        },
        2 => ShapeKind::BumpedBox {
            half_extents: [1.0, rng.random_range(0.5..1.0), rng.random_range(0.4..0.8)],
            bump_height: 0.3,
        },
        _ => ShapeKind::Blob { amplitude: 0.6 },
    };
    let res = rng.random_range(4..7);
    let mesh = generate_synthetic_shape(&kind, res, seed).unwrap();
    let mesh = rotate_mesh(&mesh, &random_rotation(seed));
    jitter(&mesh, 0.02, &mut rng)
}

/// A random closed mesh with at most `max_faces` faces.
pub fn small_mesh(seed: u64, max_faces: usize) -> TriMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = if rng.random_bool(0.5) {
        ShapeKind::Blob { amplitude: 0.5 }
    } else {
        ShapeKind::Ellipsoid { radii: [1.0, 0.7, 0.5] }
    };
    let mesh = generate_synthetic_shape(&kind, 4, seed).unwrap();
    assert!(mesh.num_faces() <= max_faces);
    jitter(&mesh, 0.05, &mut rng)
}

pub fn jitter(mesh: &TriMesh, amount: f64, rng: &mut impl Rng) -> TriMesh {
    let vertices = mesh
        .vertices()
        .iter()
        .map(|p| p.map(|c| c + rng.random_range(-amount..amount)))
        .collect();
    TriMesh::new(vertices, mesh.faces().to_vec()).unwrap()
}

/// Sigmoid MLP with weights drawn uniformly from `[-scale, scale]` and
/// random biases.
pub fn random_mlp(dims: &[usize], scale: f64, rng: &mut impl Rng) -> MlpParams {
    let weights = dims
        .windows(2)
        .map(|w| Array2::from_shape_simple_fn((w[1], w[0]), || rng.random_range(-scale..scale)))
        .collect();
    let biases = dims[1..]
        .iter()
        .map(|&d| Array1::from_shape_simple_fn(d, || rng.random_range(-0.5..0.5)))
        .collect();
    MlpParams::from_parts(weights, biases).unwrap()
}

pub fn random_model(dims: &[usize], rng: &mut impl Rng) -> SVarMModel {
    let c = *dims.last().unwrap();
    let beta = Array1::from_shape_simple_fn(c, || rng.random_range(-1.0..1.0));
    SVarMModel::new(random_mlp(dims, 1.5, rng), beta).unwrap()
}

/// Random hidden depth 0..=2 and widths 2..=12, input 6.
pub fn random_dims(rng: &mut impl Rng, outputs: usize) -> Vec<usize> {
    let mut dims = vec![6];
    for _ in 0..rng.random_range(0..3) {
        dims.push(rng.random_range(2..13));
    }
    dims.push(outputs);
    dims
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
