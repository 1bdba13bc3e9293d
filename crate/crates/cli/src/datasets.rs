//! Builders for the two experiment datasets: MNIST heightmap surfaces and
//! rotated copies of a synthetic shape.

use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use svarm::mesh::{generate_synthetic_shape, heightmap_to_closed_mesh, rotate_mesh, scale_translate_mesh, GrayImage, ShapeKind, TriMesh};
use svarm::so3::{axis_rotation, sample_rotation, Axis};
use svarm::train::Label;

use crate::error::{CliError, Result};
use crate::idx::{read_images, read_labels};
use crate::manifest::{Manifest, TaskKind};

/// Heightmap extrusion settings for MNIST digits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MnistOptions {
    /// Top-sheet height of a full-intensity pixel, in pixel units.
    pub height_scale: f64,
    pub threshold: u8,
    /// Vertices are mapped by `x ↦ scale·x + offset` after extrusion.
    pub scale: f64,
    pub offset: [f64; 3],
}

impl Default for MnistOptions {
    fn default() -> Self {
        Self {
            height_scale: 5.0,
            threshold: 16,
            scale: 0.2,
            offset: [-2.7, -2.7, 0.0],
        }
    }
}

/// Closed surface of one digit image, centered on the image midpoint.
pub fn digit_mesh(pixels: &[u8], rows: usize, cols: usize, opts: &MnistOptions) -> Result<TriMesh> {
    let img = GrayImage::new(cols, rows, pixels.to_vec())?;
    let mesh = heightmap_to_closed_mesh(&img, opts.height_scale, opts.threshold)?;
    Ok(scale_translate_mesh(&mesh, opts.scale, opts.offset))
}

/// The first `count` digits of an IDX image/label pair as labelled meshes.
pub fn mnist_meshes(images: &Path, labels: &Path, count: usize, opts: &MnistOptions) -> Result<Vec<(TriMesh, Label)>> {
    let imgs = read_images(images)?;
    let labs = read_labels(labels)?;
    let available = imgs.count.min(labs.len());
    if count > available {
        return Err(CliError::Usage(format!("requested {count} digits, only {available} available")));
    }
    (0..count)
        .map(|i| Ok((digit_mesh(imgs.image(i), imgs.rows, imgs.cols, opts)?, Label::Class(labs[i] as usize))))
        .collect()
}

/// Extrudes `count` digits to OFF meshes in `out_dir` and writes the manifest.
pub fn ingest_mnist(images: &Path, labels: &Path, count: usize, opts: &MnistOptions, out_dir: &Path) -> Result<Manifest> {
    let meshes = mnist_meshes(images, labels, count, opts)?;
    let items: Vec<_> = meshes
        .into_iter()
        .enumerate()
        .map(|(i, (m, l))| (format!("digit_{i:05}.off"), m, l))
        .collect();
    let params = serde_json::json!({
        "source": "mnist",
        "images": images.display().to_string(),
        "labels": labels.display().to_string(),
        "count": count,
        "height_scale": opts.height_scale,
        "threshold": opts.threshold,
        "normalization": { "scale": opts.scale, "offset": opts.offset },
    });
    Manifest::write(out_dir, TaskKind::Classification, Some(10), params, &items)
}

/// How rotated copies are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationMode {
    /// Angle uniform in `[0, 2π)` about one axis; label in radians.
    Axis(Axis),
    /// Haar-uniform rotation; label is the row-major matrix.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationOptions {
    pub shape: ShapeKind,
    pub resolution: usize,
    pub samples: usize,
    pub mode: RotationMode,
    pub seed: u64,
}

/// Rotated copies of one seeded base shape. The base shape uses `seed`; the
/// rotations use an independent stream derived from it.
pub fn rotation_meshes(opts: &RotationOptions) -> Result<Vec<(TriMesh, Label)>> {
    if opts.samples < 10 {
        return Err(CliError::Usage(format!("need at least 10 samples, got {}", opts.samples)));
    }
    let base = generate_synthetic_shape(&opts.shape, opts.resolution, opts.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    Ok((0..opts.samples)
        .map(|_| match opts.mode {
            RotationMode::Axis(axis) => {
                let angle = rng.random_range(0.0..TAU);
                (rotate_mesh(&base, &axis_rotation(axis, angle)), Label::Scalar(angle))
            }
            RotationMode::Full => {
                let r = sample_rotation(&mut rng);
                (rotate_mesh(&base, &r), Label::Rotation(r.to_row_major()))
            }
        })
        .collect())
}

pub fn synth_rotation_dataset(opts: &RotationOptions, out_dir: &Path) -> Result<Manifest> {
    let meshes = rotation_meshes(opts)?;
    let items: Vec<_> = meshes
        .into_iter()
        .enumerate()
        .map(|(i, (m, l))| (format!("{}_{i:05}.off", opts.shape.name()), m, l))
        .collect();
    let task = match opts.mode {
        RotationMode::Axis(_) => TaskKind::Angle,
        RotationMode::Full => TaskKind::Rotation9,
    };
    let params = serde_json::json!({
        "source": "synthetic",
        "options": opts,
        "label_distribution": match opts.mode {
            RotationMode::Axis(_) => "uniform angle in [0, 2pi)",
            RotationMode::Full => "Haar-uniform on SO(3)",
        },
    });
    Manifest::write(out_dir, task, None, params, &items)
}
