//! Dataset manifests: a JSON list of mesh files with labels plus the
//! parameters that produced them.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use svarm::mesh::{load_mesh, MeshFormat, TriMesh};
use svarm::train::{Label, RegressionKind, Task};

use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// What the labels of a manifest mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Classification,
    /// Rotation angle about one axis, in radians.
    Angle,
    /// Flattened row-major rotation matrix.
    Rotation9,
}

impl TaskKind {
    pub fn task(&self) -> Task {
        match self {
            TaskKind::Classification => Task::Classification,
            TaskKind::Angle => Task::Regression(RegressionKind::Angle),
            TaskKind::Rotation9 => Task::Regression(RegressionKind::Rotation9),
        }
    }

    /// Output width of a network for this task.
    pub fn output_dim(&self, num_classes: Option<usize>) -> usize {
        match self {
            TaskKind::Classification => num_classes.unwrap_or(2),
            TaskKind::Angle => 1,
            TaskKind::Rotation9 => 9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Mesh path relative to the manifest's directory.
    pub path: String,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub task: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_classes: Option<usize>,
    /// Generation parameters, recorded verbatim.
    pub params: serde_json::Value,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Manifest {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Writes every mesh as OFF plus `manifest.json` into `dir`.
    pub fn write(dir: &Path, task: TaskKind, num_classes: Option<usize>, params: serde_json::Value, items: &[(String, TriMesh, Label)]) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut entries = Vec::with_capacity(items.len());
        for (name, mesh, label) in items {
            svarm::mesh::save_mesh(mesh, dir.join(name), MeshFormat::Off)?;
            entries.push(ManifestEntry {
                path: name.clone(),
                label: label.clone(),
            });
        }
        let manifest = Manifest {
            task,
            num_classes,
            params,
            entries,
        };
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, manifest.to_json()).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }

    /// Loads every mesh, resolving paths against `base_dir`.
    pub fn load_meshes(&self, base_dir: &Path) -> Result<Vec<(TriMesh, Label)>> {
        self.entries
            .iter()
            .map(|e| {
                let path: PathBuf = base_dir.join(&e.path);
                let format = MeshFormat::from_path(&path)?;
                Ok((load_mesh(&path, format)?, e.label.clone()))
            })
            .collect()
    }
}

/// Accepts either a manifest file or a directory containing `manifest.json`.
pub fn resolve_manifest(path: &Path) -> (PathBuf, PathBuf) {
    if path.is_dir() {
        (path.join(MANIFEST_FILE), path.to_path_buf())
    } else {
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        (path.to_path_buf(), base)
    }
}
