//! Rotation utilities for the alignment experiments: axis rotations, Haar
//! sampling, the SO(3) geodesic distance and projection of arbitrary 3×3
//! matrices onto the rotation group.

use std::str::FromStr;

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance for the orthogonality and determinant checks.
pub const ROTATION_TOL: f64 = 1e-9;

/// A 3×3 rotation matrix: `RᵀR = I` and `det R = +1`, both within 1e-9.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMesh("rotation has non-finite entries".into()));
        }
        let ortho = (m.transpose() * m - Matrix3::identity()).abs().max();
        let det = m.determinant();
        if ortho > ROTATION_TOL || (det - 1.0).abs() > ROTATION_TOL {
            return Err(Error::InvalidMesh(format!(
                "not a rotation: |RᵀR - I|max = {ortho:e}, det = {det}"
            )));
        }
        Ok(Self(m))
    }

    pub fn from_row_major(m: &[f64; 9]) -> Result<Self> {
        Self::new(Matrix3::from_row_slice(m))
    }

    #[rustfmt::skip]
    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[(0, 0)], m[(0, 1)], m[(0, 2)],
            m[(1, 0)], m[(1, 1)], m[(1, 2)],
            m[(2, 0)], m[(2, 1)], m[(2, 2)],
        ]
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        (self.0 * Vector3::from(v)).into()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn compose(&self, rhs: &RotationMatrix) -> Self {
        Self(self.0 * rhs.0)
    }

    pub(crate) fn from_quaternion(q: Quaternion<f64>) -> Self {
        Self(*UnitQuaternion::from_quaternion(q).to_rotation_matrix().matrix())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            _ => Err(Error::Config(format!("unknown axis {s:?}"))),
        }
    }
}

pub fn axis_rotation(axis: Axis, angle: f64) -> RotationMatrix {
    let (s, c) = angle.sin_cos();
    let m = match axis {
        Axis::X => Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
        Axis::Y => Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
        Axis::Z => Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
    };
    RotationMatrix(m)
}

/// Uniform unit quaternion by Shoemake's subgroup algorithm; the induced
/// rotation is Haar-distributed on SO(3).
pub fn sample_unit_quaternion<R: Rng + ?Sized>(rng: &mut R) -> Quaternion<f64> {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    let u3: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    Quaternion::new(a * u2.sin(), a * u2.cos(), b * u3.sin(), b * u3.cos())
}

pub fn sample_rotation<R: Rng + ?Sized>(rng: &mut R) -> RotationMatrix {
    RotationMatrix::from_quaternion(sample_unit_quaternion(rng))
}

pub fn random_rotation(seed: u64) -> RotationMatrix {
    sample_rotation(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// Rotation angle of `R1ᵀR2`, in radians.
pub fn geodesic_distance_so3(r1: &RotationMatrix, r2: &RotationMatrix) -> f64 {
    let tr = (r1.0.transpose() * r2.0).trace();
    ((tr - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
}

/// Nearest rotation in Frobenius norm to a row-major 3×3 matrix, via SVD
/// with a sign correction on the smallest singular direction.
pub fn project_to_so3(m: &[f64; 9]) -> Result<RotationMatrix> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularInput);
    }
    let mat = Matrix3::from_row_slice(m);
    let svd = mat.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let sv = svd.singular_values;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let scale = sv[order[0]].max(f64::MIN_POSITIVE);
    // With two vanishing singular values the minimizer is not unique.
    if sv[order[0]] == 0.0 || sv[order[1]] <= 1e-12 * scale {
        return Err(Error::SingularInput);
    }
    let d = (u * v_t).determinant().signum();
    let mut sigma = Matrix3::identity();
    sigma[(order[2], order[2])] = d;
    let r = u * sigma * v_t;
    RotationMatrix::new(r).map_err(|_| Error::SingularInput)
}
