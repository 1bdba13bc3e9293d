//! OBJ / OFF text readers and writers.
//!
//! Only geometry is read: `v` and `f` records for OBJ (other records are
//! skipped), the standard header/counts layout for OFF. Polygons with more
//! than three corners are fan-triangulated around their first corner.
//! Loaded meshes must have consistent winding.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::TriMesh;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Off,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or_default()
            .to_ascii_lowercase();
        ext.parse()
    }
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "off" => Ok(MeshFormat::Off),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<TriMesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text, format)
}

pub fn parse_mesh(text: &str, format: MeshFormat) -> Result<TriMesh> {
    let mesh = match format {
        MeshFormat::Obj => parse_obj(text)?,
        MeshFormat::Off => parse_off(text)?,
    };
    mesh.check_winding()?;
    Ok(mesh)
}

fn fan(corners: &[usize], faces: &mut Vec<[usize; 3]>) {
    for k in 1..corners.len() - 1 {
        faces.push([corners[0], corners[k], corners[k + 1]]);
    }
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::parse(line, "missing coordinate"))?;
    let x: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("bad number {tok:?}")))?;
    if !x.is_finite() {
        return Err(Error::parse(line, format!("non-finite coordinate {tok:?}")));
    }
    Ok(x)
}

fn parse_obj(text: &str) -> Result<TriMesh> {
    let mut vertices = Vec::new();
    // (line number, 1-based or negative raw indices)
    let mut polys: Vec<(usize, Vec<i64>)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(toks.next(), line_no)?;
                let y = parse_f64(toks.next(), line_no)?;
                let z = parse_f64(toks.next(), line_no)?;
                vertices.push([x, y, z]);
            }
            Some("f") => {
                let idx = toks
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        head.parse::<i64>()
                            .map_err(|_| Error::parse(line_no, format!("bad face index {t:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if idx.len() < 3 {
                    return Err(Error::parse(line_no, "face with fewer than 3 vertices"));
                }
                polys.push((line_no, idx));
            }
            _ => {}
        }
    }
    let n = vertices.len() as i64;
    let mut faces = Vec::new();
    for (line_no, idx) in polys {
        let corners = idx
            .iter()
            .map(|&i| {
                let zero_based = if i > 0 { i - 1 } else { n + i };
                if i == 0 || zero_based < 0 || zero_based >= n {
                    Err(Error::parse(line_no, format!("vertex index {i} out of range")))
                } else {
                    Ok(zero_based as usize)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        fan(&corners, &mut faces);
    }
    TriMesh::new(vertices, faces)
}

fn parse_off(text: &str) -> Result<TriMesh> {
    // Tokens with their line numbers, comments stripped.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty OFF file"))?;
    let mut head_toks = header.split_whitespace();
    if head_toks.next() != Some("OFF") {
        return Err(Error::UnsupportedFormat(format!(
            "expected OFF header, found {header:?}"
        )));
    }
    let mut rest: Vec<&str> = head_toks.collect();
    let mut count_line = hline;
    if rest.is_empty() {
        let (l, t) = lines
            .next()
            .ok_or_else(|| Error::parse(hline, "missing OFF counts"))?;
        count_line = l;
        rest = t.split_whitespace().collect();
    }
    if rest.len() < 2 {
        return Err(Error::parse(count_line, "OFF counts need vertex and face numbers"));
    }
    let parse_count = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| Error::parse(count_line, format!("bad count {t:?}")))
    };
    let nv = parse_count(rest[0])?;
    let nf = parse_count(rest[1])?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, t) = lines
            .next()
            .ok_or_else(|| Error::parse(count_line, "truncated vertex list"))?;
        let mut toks = t.split_whitespace();
        vertices.push([
            parse_f64(toks.next(), l)?,
            parse_f64(toks.next(), l)?,
            parse_f64(toks.next(), l)?,
        ]);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, t) = lines
            .next()
            .ok_or_else(|| Error::parse(count_line, "truncated face list"))?;
        let nums = t
            .split_whitespace()
            .map(|x| x.parse::<usize>().map_err(|_| Error::parse(l, format!("bad index {x:?}"))));
        let mut nums = nums;
        let k = nums.next().ok_or_else(|| Error::parse(l, "empty face line"))??;
        if k < 3 {
            return Err(Error::parse(l, "face with fewer than 3 vertices"));
        }
        // Trailing color values after the k indices are ignored.
        let corners = nums.take(k).collect::<Result<Vec<_>>>()?;
        if corners.len() != k {
            return Err(Error::parse(l, "face line shorter than its vertex count"));
        }
        if let Some(&bad) = corners.iter().find(|&&i| i >= nv) {
            return Err(Error::parse(l, format!("vertex index {bad} out of range")));
        }
        fan(&corners, &mut faces);
    }
    TriMesh::new(vertices, faces)
}

pub fn write_obj(mesh: &TriMesh) -> String {
    let mut s = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn write_off(mesh: &TriMesh) -> String {
    let mut s = String::from("OFF\n");
    let _ = writeln!(s, "{} {} 0", mesh.num_vertices(), mesh.num_faces());
    for v in mesh.vertices() {
        let _ = writeln!(s, "{} {} {}", v[0], v[1], v[2]);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
    }
    s
}

/// Writes `mesh` with shortest round-trip decimal formatting.
pub fn save_mesh(mesh: &TriMesh, path: impl AsRef<Path>, format: MeshFormat) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        MeshFormat::Obj => write_obj(mesh),
        MeshFormat::Off => write_off(mesh),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
