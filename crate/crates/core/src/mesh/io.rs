//! Plain-text mesh format.
//!
//! ```text
//! nv nt
//! x y [boundary-flag]      (nv lines)
//! i j k                    (nt lines, 0-based)
//! ```
//! Lines starting with `#` are ignored on input.

use std::fmt::Write as _;
use std::path::Path;

use super::{Mesh, Point};
use crate::error::MeshError;

pub fn write_mesh_string(mesh: &Mesh) -> String {
    let mut s = String::new();
    writeln!(s, "{} {}", mesh.n_vertices(), mesh.n_triangles()).unwrap();
    for (v, p) in mesh.vertices().iter().enumerate() {
        writeln!(s, "{} {} {}", p[0], p[1], u8::from(mesh.is_boundary_vertex(v))).unwrap();
    }
    for t in mesh.triangles() {
        writeln!(s, "{} {} {}", t[0], t[1], t[2]).unwrap();
    }
    s
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    std::fs::write(path, write_mesh_string(mesh))?;
    Ok(())
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

/// Boundary flags in the file are informational: boundary vertices are
/// always recomputed from the edge topology.
pub fn parse_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let err = |line: usize, message: &str| MeshError::Parse {
        line,
        message: message.to_string(),
    };
    let (hl, header) = lines.next().ok_or_else(|| err(0, "empty mesh file"))?;
    let counts: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(hl, "expected 'nv nt'")))
        .collect::<Result<_, _>>()?;
    let [nv, nt] = counts[..] else {
        return Err(err(hl, "expected 'nv nt'"));
    };
    let mut vertices: Vec<Point> = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| err(0, "missing vertex lines"))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 2 && f.len() != 3 {
            return Err(err(ln, "expected 'x y [flag]'"));
        }
        let x: f64 = f[0].parse().map_err(|_| err(ln, "bad x coordinate"))?;
        let y: f64 = f[1].parse().map_err(|_| err(ln, "bad y coordinate"))?;
        if let Some(flag) = f.get(2) {
            if *flag != "0" && *flag != "1" {
                return Err(err(ln, "boundary flag must be 0 or 1"));
            }
        }
        vertices.push([x, y]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, l) = lines.next().ok_or_else(|| err(0, "missing triangle lines"))?;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(ln, "bad vertex index")))
            .collect::<Result<_, _>>()?;
        let [i, j, k] = idx[..] else {
            return Err(err(ln, "expected 'i j k'"));
        };
        triangles.push([i, j, k]);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "trailing data after the triangle list"));
    }
    Mesh::new(vertices, triangles)
}
