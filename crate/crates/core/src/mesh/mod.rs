//! Conforming triangle meshes of polygonal domains.
//!
//! A [`Mesh`] is immutable once built: refinement and coarsening return new
//! meshes. Triangles are stored counter-clockwise; edges are derived and carry
//! their one or two adjacent triangles. Every triangle also remembers how it
//! was produced (root, red child or green child) so refinement can be undone.

mod generate;
mod io;
mod refine;

use std::collections::HashMap;

pub use generate::unit_square;
pub use io::{parse_mesh, read_mesh, write_mesh, write_mesh_string};
pub use refine::{coarsen, coarsen_with_map, refine};

use crate::error::MeshError;

pub type Point = [f64; 2];

/// Default bound on `h_K / rho_K` above which [`Mesh::check_shape_regularity`] warns.
pub const DEFAULT_SIGMA0: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Red,
    Green,
}

/// How a triangle came to exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Root,
    /// Child of the refinement group with this index.
    Child(usize),
}

/// One refinement event: a parent triangle split into red or green children.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementGroup {
    pub kind: GroupKind,
    /// Vertex ids of the parent triangle (counter-clockwise).
    pub parent: [usize; 3],
    pub parent_origin: Origin,
    /// Green groups: the bisection vertex on the split edge.
    pub midpoint: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Endpoints with `vertices[0] < vertices[1]`.
    pub vertices: [usize; 2],
    pub triangles: [Option<usize>; 2],
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.triangles[1].is_none()
    }

    /// The triangle across this edge from `t`.
    pub fn neighbor(&self, t: usize) -> Option<usize> {
        match self.triangles {
            [Some(a), b] if a == t => b,
            [a, Some(b)] if b == t => a,
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    origins: Vec<Origin>,
    groups: Vec<RefinementGroup>,
    edges: Vec<Edge>,
    /// `triangle_edges[t][i]` is the edge opposite local vertex `i`.
    triangle_edges: Vec<[usize; 3]>,
    boundary_vertex: Vec<bool>,
}

/// Shape data of one triangle. Side `i` is the side opposite vertex `a_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleGeometry {
    pub vertices: [Point; 3],
    /// Diameter `h_K` (longest side).
    pub diameter: f64,
    /// Diameter of the inscribed circle, `rho_K`.
    pub inradius_diameter: f64,
    pub area: f64,
    /// Squared side lengths, `side_sq[i] = |a_{i+2} - a_{i+1}|^2`.
    pub side_sq: [f64; 3],
    /// Eccentricity parameters `E_i = (l_{i+2}^2 - l_{i+1}^2) / l_i^2`.
    pub eccentricity: [f64; 3],
    pub barycenter: Point,
    /// Constant gradients of the barycentric coordinates.
    pub grad_lambda: [[f64; 2]; 3],
}

impl TriangleGeometry {
    pub fn new(vertices: [Point; 3]) -> Self {
        let [a0, a1, a2] = vertices;
        let area = 0.5 * ((a1[0] - a0[0]) * (a2[1] - a0[1]) - (a2[0] - a0[0]) * (a1[1] - a0[1]));
        let mut side_sq = [0.0; 3];
        let mut grad_lambda = [[0.0; 2]; 3];
        for i in 0..3 {
            let p = vertices[(i + 1) % 3];
            let q = vertices[(i + 2) % 3];
            let e = [q[0] - p[0], q[1] - p[1]];
            side_sq[i] = e[0] * e[0] + e[1] * e[1];
            grad_lambda[i] = [-e[1] / (2.0 * area), e[0] / (2.0 * area)];
        }
        let eccentricity =
            std::array::from_fn(|i| (side_sq[(i + 2) % 3] - side_sq[(i + 1) % 3]) / side_sq[i]);
        let perimeter: f64 = side_sq.iter().map(|s| s.sqrt()).sum();
        let diameter = side_sq.iter().cloned().fold(0.0, f64::max).sqrt();
        TriangleGeometry {
            vertices,
            diameter,
            inradius_diameter: 4.0 * area.abs() / perimeter,
            area,
            side_sq,
            eccentricity,
            barycenter: [(a0[0] + a1[0] + a2[0]) / 3.0, (a0[1] + a1[1] + a2[1]) / 3.0],
            grad_lambda,
        }
    }

    pub fn barycentric(&self, p: Point) -> [f64; 3] {
        let b = self.barycenter;
        let d = [p[0] - b[0], p[1] - b[1]];
        let mut l: [f64; 3] =
            std::array::from_fn(|i| 1.0 / 3.0 + self.grad_lambda[i][0] * d[0] + self.grad_lambda[i][1] * d[1]);
        // keep the partition of unity exact
        let s = l[0] + l[1] + l[2];
        l.iter_mut().for_each(|x| *x /= s);
        l
    }

    pub fn point_at(&self, lambda: [f64; 3]) -> Point {
        let v = &self.vertices;
        [
            lambda[0] * v[0][0] + lambda[1] * v[1][0] + lambda[2] * v[2][0],
            lambda[0] * v[0][1] + lambda[1] * v[1][1] + lambda[2] * v[2][1],
        ]
    }

    pub fn side_length(&self, i: usize) -> f64 {
        self.side_sq[i].sqrt()
    }

    /// Altitude from `a_i` onto side `i`.
    pub fn altitude(&self, i: usize) -> f64 {
        2.0 * self.area / self.side_length(i)
    }

    /// The three HCT subtriangles `K_i = (a_0, a_{i+1}, a_{i+2})`, `a_0` the barycenter.
    pub fn hct_split(&self) -> [[Point; 3]; 3] {
        std::array::from_fn(|i| {
            [
                self.barycenter,
                self.vertices[(i + 1) % 3],
                self.vertices[(i + 2) % 3],
            ]
        })
    }

    pub fn shape_ratio(&self) -> f64 {
        self.diameter / self.inradius_diameter
    }
}

/// Index of the HCT subtriangle containing the point with barycentrics `lambda`.
///
/// `K_i` is where `lambda_i` is the smallest coordinate; ties go to the lower index.
pub fn subtriangle_of(lambda: [f64; 3]) -> usize {
    let mut best = 0;
    for i in 1..3 {
        if lambda[i] < lambda[best] {
            best = i;
        }
    }
    best
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl Mesh {
    /// Builds a mesh from raw vertices and index triples.
    ///
    /// Clockwise triangles are reoriented. Fails on out-of-range indices,
    /// zero-area triangles, edges shared by more than two triangles and hanging vertices.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let n = triangles.len();
        Self::from_parts(vertices, triangles, vec![Origin::Root; n], Vec::new())
    }

    pub(crate) fn from_parts(
        vertices: Vec<Point>,
        mut triangles: Vec<[usize; 3]>,
        origins: Vec<Origin>,
        groups: Vec<RefinementGroup>,
    ) -> Result<Self, MeshError> {
        let nv = vertices.len();
        for (t, tri) in triangles.iter_mut().enumerate() {
            for &v in tri.iter() {
                if v >= nv {
                    return Err(MeshError::IndexOutOfRange {
                        triangle: t,
                        vertex: v,
                        n_vertices: nv,
                    });
                }
            }
            let [a, b, c] = tri.map(|v| vertices[v]);
            let area = signed_area(a, b, c);
            let scale = [(a, b), (b, c), (c, a)]
                .iter()
                .map(|(p, q)| (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2))
                .fold(0.0, f64::max);
            if area.abs() <= 1e-14 * scale || scale == 0.0 {
                return Err(MeshError::Degenerate(t));
            }
            if area < 0.0 {
                tri.swap(1, 2);
            }
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * triangles.len());
        let mut edges: Vec<Edge> = Vec::with_capacity(3 * triangles.len() / 2 + 4);
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0; 3];
            for i in 0..3 {
                let (p, q) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
                let key = (p.min(q), p.max(q));
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        triangles: [None, None],
                    });
                    edges.len() - 1
                });
                let slot = &mut edges[e].triangles;
                if slot[0].is_none() {
                    slot[0] = Some(t);
                } else if slot[1].is_none() {
                    slot[1] = Some(t);
                } else {
                    return Err(MeshError::NonManifoldEdge(key.0, key.1));
                }
                te[i] = e;
            }
            triangle_edges.push(te);
        }

        let mut boundary_vertex = vec![false; nv];
        for e in edges.iter().filter(|e| e.is_boundary()) {
            boundary_vertex[e.vertices[0]] = true;
            boundary_vertex[e.vertices[1]] = true;
        }

        let mesh = Mesh {
            vertices,
            triangles,
            origins,
            groups,
            edges,
            triangle_edges,
            boundary_vertex,
        };
        if let Some((vertex, a, b)) = mesh.find_hanging_vertex() {
            return Err(MeshError::HangingVertex { vertex, a, b });
        }
        Ok(mesh)
    }

    /// A vertex lying strictly inside an edge it is not an endpoint of.
    ///
    /// Only topological boundary edges can carry one: the long edge and the two
    /// short edges of a hanging configuration each have a single neighbor.
    pub fn find_hanging_vertex(&self) -> Option<(usize, usize, usize)> {
        let boundary: Vec<&Edge> = self.edges.iter().filter(|e| e.is_boundary()).collect();
        let candidates: Vec<usize> = (0..self.vertices.len())
            .filter(|&v| self.boundary_vertex[v])
            .collect();
        for e in &boundary {
            let [a, b] = e.vertices;
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let d = [pb[0] - pa[0], pb[1] - pa[1]];
            let len_sq = d[0] * d[0] + d[1] * d[1];
            for &v in &candidates {
                if v == a || v == b {
                    continue;
                }
                let p = self.vertices[v];
                let w = [p[0] - pa[0], p[1] - pa[1]];
                let s = (w[0] * d[0] + w[1] * d[1]) / len_sq;
                if s <= 1e-12 || s >= 1.0 - 1e-12 {
                    continue;
                }
                let cross = w[0] * d[1] - w[1] * d[0];
                if cross.abs() <= 1e-12 * len_sq {
                    return Some((v, a, b));
                }
            }
        }
        None
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn origins(&self) -> &[Origin] {
        &self.origins
    }

    pub fn groups(&self) -> &[RefinementGroup] {
        &self.groups
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Number of HCT cells (three subtriangles per triangle).
    pub fn n_cells(&self) -> usize {
        3 * self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn boundary_vertices(&self) -> &[bool] {
        &self.boundary_vertex
    }

    pub fn n_boundary_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.is_boundary()).count()
    }

    pub fn n_interior_edges(&self) -> usize {
        self.edges.len() - self.n_boundary_edges()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn geometry(&self, t: usize) -> Result<TriangleGeometry, MeshError> {
        if t >= self.triangles.len() {
            return Err(MeshError::TriangleOutOfRange(t));
        }
        Ok(TriangleGeometry::new(self.triangle_points(t)))
    }

    pub fn barycentric(&self, t: usize, p: Point) -> Result<[f64; 3], MeshError> {
        Ok(self.geometry(t)?.barycentric(p))
    }

    pub fn hct_split(&self, t: usize) -> Result<[[Point; 3]; 3], MeshError> {
        Ok(self.geometry(t)?.hct_split())
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.n_triangles())
            .map(|t| TriangleGeometry::new(self.triangle_points(t)).diameter)
            .fold(0.0, f64::max)
    }

    pub fn area(&self) -> f64 {
        (0..self.n_triangles())
            .map(|t| TriangleGeometry::new(self.triangle_points(t)).area)
            .sum()
    }

    /// Largest `h_K / rho_K` over the mesh.
    pub fn shape_regularity(&self) -> f64 {
        (0..self.n_triangles())
            .map(|t| TriangleGeometry::new(self.triangle_points(t)).shape_ratio())
            .fold(0.0, f64::max)
    }

    /// Triangles whose `h_K / rho_K` exceeds `sigma0`. Logged as a warning, never an error.
    pub fn check_shape_regularity(&self, sigma0: f64) -> Vec<usize> {
        let bad: Vec<usize> = (0..self.n_triangles())
            .filter(|&t| TriangleGeometry::new(self.triangle_points(t)).shape_ratio() > sigma0)
            .collect();
        if !bad.is_empty() {
            log::warn!(
                "{} triangle(s) exceed the shape-regularity bound {sigma0}",
                bad.len()
            );
        }
        bad
    }

    /// Triangle containing `p`, by brute-force search with a small tolerance.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for t in 0..self.n_triangles() {
            let l = TriangleGeometry::new(self.triangle_points(t)).barycentric(p);
            let worst = l.iter().cloned().fold(f64::INFINITY, f64::min);
            if worst >= -1e-12 {
                return Some((t, l));
            }
            if best.as_ref().map_or(true, |b| worst > b.2) {
                best = Some((t, l, worst));
            }
        }
        best.filter(|b| b.2 > -1e-9).map(|b| (b.0, b.1))
    }

    /// Sorted coordinate triples of every triangle, for comparing meshes up to renumbering.
    pub fn canonical_triangles(&self) -> Vec<[[u64; 2]; 3]> {
        let mut out: Vec<[[u64; 2]; 3]> = self
            .triangles
            .iter()
            .map(|tri| {
                let mut pts = tri.map(|v| {
                    let p = self.vertices[v];
                    [p[0].to_bits(), p[1].to_bits()]
                });
                pts.sort();
                pts
            })
            .collect();
        out.sort();
        out
    }
}
