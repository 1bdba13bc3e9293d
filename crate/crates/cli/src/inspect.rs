//! Per-face dump of the learned test function.

use std::fmt::Write as _;

use svarm::mesh::{triangle_geometry, TriMesh};
use svarm::model::SVarMModel;
use svarm::varifold::Representation;
use svarm::Error;

use crate::error::{CliError, Result};

/// One row per non-degenerate face: the face index and `h` at that face's
/// feature point, as seen by `representation`.
pub fn inspect_h(model: &SVarMModel, representation: Representation, mesh: &TriMesh) -> Result<Vec<(usize, Vec<f64>)>> {
    let expected = representation.feature_dim(3);
    if model.input_dim() != expected {
        return Err(CliError::DimensionMismatch(format!(
            "checkpoint takes {}-dimensional inputs, {representation} features of a surface mesh have {expected}",
            model.input_dim()
        )));
    }
    let mut rows = Vec::with_capacity(mesh.num_faces());
    let mut feature = Vec::with_capacity(6);
    for f in 0..mesh.num_faces() {
        let g = match triangle_geometry(mesh, f) {
            Ok(g) => g,
            Err(Error::DegenerateFace(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        feature.clear();
        match representation {
            Representation::Varifold => {
                feature.extend_from_slice(&g.center);
                feature.extend_from_slice(&g.normal);
            }
            Representation::Spatial => feature.extend_from_slice(&g.center),
            Representation::Directional => feature.extend_from_slice(&g.normal),
        }
        rows.push((f, model.mlp().forward(&feature)?));
    }
    Ok(rows)
}

/// `face_index,h` for scalar outputs, `face_index,h_0,…` otherwise.
pub fn inspect_csv(rows: &[(usize, Vec<f64>)], width: usize) -> String {
    let mut out = String::from("face_index");
    if width == 1 {
        out.push_str(",h");
    } else {
        for c in 0..width {
            write!(out, ",h_{c}").unwrap();
        }
    }
    out.push('\n');
    for (f, h) in rows {
        write!(out, "{f}").unwrap();
        for v in h {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}
