use super::{Mesh, Point};

/// Structured mesh of the unit square: `n x n` cells, each cut along its
/// rising diagonal into two triangles (`2 n^2` triangles, `6 n^2` HCT cells).
pub fn unit_square(n: usize) -> Mesh {
    assert!(n >= 1, "need at least one cell per side");
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices: Vec<Point> = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    // exact corner coordinates
    for v in vertices.iter_mut() {
        for c in v.iter_mut() {
            if (*c - 1.0).abs() < 1e-14 {
                *c = 1.0;
            }
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    Mesh::new(vertices, triangles).expect("structured square mesh is valid")
}
