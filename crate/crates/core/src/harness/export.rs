//! Sampled field output: legacy VTK and CSV.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::elements::{ElementKind, Field, Space};
use crate::mesh::Point;

/// A field sampled on a display grid inside every HCT subtriangle.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSamples {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    pub triangles: Vec<[usize; 3]>,
}

impl FieldSamples {
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_vtk(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "hct field samples")?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(w, "POINTS {} double", self.points.len())?;
        for p in &self.points {
            writeln!(w, "{:e} {:e} 0", p[0], p[1])?;
        }
        writeln!(w, "CELLS {} {}", self.triangles.len(), 4 * self.triangles.len())?;
        for t in &self.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(w, "CELL_TYPES {}", self.triangles.len())?;
        for _ in &self.triangles {
            writeln!(w, "5")?;
        }
        writeln!(w, "POINT_DATA {}", self.points.len())?;
        writeln!(w, "SCALARS u double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in &self.values {
            writeln!(w, "{v:e}")?;
        }
        Ok(())
    }

    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "x,y,u")?;
        for (p, v) in self.points.iter().zip(&self.values) {
            writeln!(w, "{:e},{:e},{:e}", p[0], p[1], v)?;
        }
        Ok(())
    }
}

/// Splits every subtriangle into `samples²` display triangles. Points on shared
/// sub-edges are repeated per subtriangle so each carries its own piece's value.
pub fn sample_field(space: &Space, field: &Field, samples: usize) -> FieldSamples {
    let s = samples.max(1);
    let mut out = FieldSamples {
        points: Vec::new(),
        values: Vec::new(),
        triangles: Vec::new(),
    };
    let local = |i: usize, j: usize| i * (2 * s + 3 - i) / 2 + j;
    for t in 0..space.mesh().n_triangles() {
        let el = space.element(t);
        let split = el.geometry.hct_split();
        for (piece, v) in split.iter().enumerate().take(el.pieces.len().max(1)) {
            let v = if el.pieces.len() == 1 { &el.geometry.vertices } else { v };
            let base = out.points.len();
            for i in 0..=s {
                for j in 0..=(s - i) {
                    let (a, b) = (i as f64 / s as f64, j as f64 / s as f64);
                    let c = 1.0 - a - b;
                    let p = [
                        c * v[0][0] + a * v[1][0] + b * v[2][0],
                        c * v[0][1] + a * v[1][1] + b * v[2][1],
                    ];
                    out.points.push(p);
                    out.values.push(space.eval_in_piece(field, t, piece, p).value);
                }
            }
            for i in 0..s {
                for j in 0..(s - i) {
                    out.triangles.push([base + local(i, j), base + local(i + 1, j), base + local(i, j + 1)]);
                    if j + 1 < s - i {
                        out.triangles
                            .push([base + local(i + 1, j), base + local(i + 1, j + 1), base + local(i, j + 1)]);
                    }
                }
            }
        }
    }
    out
}

/// Coefficient file: a header line `kind n`, then one coefficient per line.
pub fn write_coefficients(field: &Field, w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "{} {}", field.kind, field.coeffs.len())?;
    for c in &field.coeffs {
        writeln!(w, "{c:e}")?;
    }
    Ok(())
}

pub fn parse_coefficients(text: &str) -> Result<Field, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or("empty coefficient file")?;
    let mut parts = header.split_whitespace();
    let kind: ElementKind = parts.next().ok_or("missing element kind")?.parse()?;
    let n: usize = parts
        .next()
        .ok_or("missing coefficient count")?
        .parse()
        .map_err(|e| format!("bad coefficient count: {e}"))?;
    let coeffs = lines
        .map(|l| l.trim().parse::<f64>().map_err(|e| format!("bad coefficient '{l}': {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if coeffs.len() != n {
        return Err(format!("header announces {n} coefficients, found {}", coeffs.len()));
    }
    Ok(Field { kind, coeffs })
}

/// Writes `<stem>.vtk` and `<stem>.csv`; returns the two paths.
pub fn export_field(space: &Space, field: &Field, stem: &Path, samples: usize) -> io::Result<(PathBuf, PathBuf)> {
    let data = sample_field(space, field, samples);
    let vtk = stem.with_extension("vtk");
    let csv = stem.with_extension("csv");
    let mut w = BufWriter::new(File::create(&vtk)?);
    data.write_vtk(&mut w)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(&csv)?);
    data.write_csv(&mut w)?;
    w.flush()?;
    Ok((vtk, csv))
}
