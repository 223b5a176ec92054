//! Global C¹ spaces: DOF numbering, per-element global basis, fields and interpolation.

use rayon::prelude::*;

use super::{ElementKind, Jet, LocalElement, Poly};
use crate::error::ElementError;
use crate::mesh::{Mesh, Point, TriangleGeometry};
use crate::quadrature::TriangleRule;

/// A function that can be sampled together with its derivatives.
pub trait Smooth {
    fn value(&self, p: Point) -> f64;
    fn gradient(&self, p: Point) -> [f64; 2];
    /// `[xx, xy, yy]`; only the Bell element needs it.
    fn hessian(&self, _p: Point) -> Option<[f64; 3]> {
        None
    }
}

/// [`Smooth`] built from a value closure and a gradient closure.
pub struct FnSmooth<F, G> {
    pub value: F,
    pub gradient: G,
}

impl<F, G> FnSmooth<F, G>
where
    F: Fn(Point) -> f64,
    G: Fn(Point) -> [f64; 2],
{
    pub fn new(value: F, gradient: G) -> Self {
        FnSmooth { value, gradient }
    }
}

impl<F, G> Smooth for FnSmooth<F, G>
where
    F: Fn(Point) -> f64,
    G: Fn(Point) -> [f64; 2],
{
    fn value(&self, p: Point) -> f64 {
        (self.value)(p)
    }
    fn gradient(&self, p: Point) -> [f64; 2] {
        (self.gradient)(p)
    }
}

/// Global numbering.
///
/// HCT: vertex `v` owns `3v` (value), `3v+1` (`∂x`), `3v+2` (`∂y`); for the
/// complete element edge `e` owns `3nv + e`, the derivative along the unit
/// normal `edge_normals[e]` at the edge midpoint. Bell (one reference
/// triangle only): `6v + k` with the local vertex order.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub kind: ElementKind,
    pub n_dofs: usize,
    pub element_dofs: Vec<Vec<usize>>,
    pub edge_normals: Vec<[f64; 2]>,
    /// Clamped-plate constraints: all vertex DOFs on the boundary and the
    /// edge DOFs of boundary edges.
    pub constrained: Vec<bool>,
}

impl DofMap {
    pub fn n_constrained(&self) -> usize {
        self.constrained.iter().filter(|&&c| c).count()
    }

    pub fn n_free(&self) -> usize {
        self.n_dofs - self.n_constrained()
    }
}

fn edge_normal(mesh: &Mesh, e: usize) -> [f64; 2] {
    let [lo, hi] = mesh.edges()[e].vertices;
    let (a, b) = (mesh.vertices()[lo], mesh.vertices()[hi]);
    let d = [b[0] - a[0], b[1] - a[1]];
    let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
    [d[1] / len, -d[0] / len]
}

pub fn local_to_global_dofs(kind: ElementKind, mesh: &Mesh) -> Result<DofMap, ElementError> {
    let nv = mesh.n_vertices();
    match kind {
        ElementKind::Bell => {
            if mesh.n_triangles() != 1 {
                return Err(ElementError::UnsupportedKind(format!(
                    "{kind} on a mesh with {} triangles",
                    mesh.n_triangles()
                )));
            }
            let tri = mesh.triangles()[0];
            Ok(DofMap {
                kind,
                n_dofs: 18,
                element_dofs: vec![tri.iter().flat_map(|&v| (0..6).map(move |k| 6 * v + k)).collect()],
                edge_normals: Vec::new(),
                constrained: vec![false; 18],
            })
        }
        ElementKind::HctComplete | ElementKind::HctReduced => {
            let complete = kind == ElementKind::HctComplete;
            let n_dofs = 3 * nv + if complete { mesh.n_edges() } else { 0 };
            let element_dofs = (0..mesh.n_triangles())
                .map(|t| {
                    let tri = mesh.triangles()[t];
                    let mut d: Vec<usize> = tri.iter().flat_map(|&v| [3 * v, 3 * v + 1, 3 * v + 2]).collect();
                    if complete {
                        d.extend(mesh.triangle_edges(t).iter().map(|&e| 3 * nv + e));
                    }
                    d
                })
                .collect();
            let edge_normals = if complete {
                (0..mesh.n_edges()).map(|e| edge_normal(mesh, e)).collect()
            } else {
                Vec::new()
            };
            let mut constrained = vec![false; n_dofs];
            for v in 0..nv {
                if mesh.is_boundary_vertex(v) {
                    constrained[3 * v..3 * v + 3].iter_mut().for_each(|c| *c = true);
                }
            }
            if complete {
                for (e, edge) in mesh.edges().iter().enumerate() {
                    if edge.is_boundary() {
                        constrained[3 * nv + e] = true;
                    }
                }
            }
            Ok(DofMap {
                kind,
                n_dofs,
                element_dofs,
                edge_normals,
                constrained,
            })
        }
    }
}

/// Global basis restricted to one triangle, one list per subtriangle,
/// ordered like `DofMap::element_dofs[t]`. Variable: `p - barycenter`.
#[derive(Debug, Clone)]
pub struct SpaceElement {
    pub geometry: TriangleGeometry,
    pub pieces: Vec<Vec<Poly>>,
}

impl SpaceElement {
    pub fn piece_of(&self, lambda: [f64; 3]) -> usize {
        if self.pieces.len() == 1 {
            0
        } else {
            crate::mesh::subtriangle_of(lambda)
        }
    }

    pub fn jets_in_piece(&self, piece: usize, p: Point) -> Vec<Jet> {
        let b = self.geometry.barycenter;
        let (dx, dy) = (p[0] - b[0], p[1] - b[1]);
        self.pieces[piece].iter().map(|q| q.jet(dx, dy)).collect()
    }

    pub fn jets(&self, p: Point) -> Vec<Jet> {
        self.jets_in_piece(self.piece_of(self.geometry.barycentric(p)), p)
    }

    /// Quadrature nodes `(piece, point, weight)` integrating over each subtriangle separately.
    pub fn quadrature(&self, rule: &TriangleRule) -> Vec<(usize, Point, f64)> {
        let mut out = Vec::with_capacity(self.pieces.len() * rule.len());
        if self.pieces.len() == 1 {
            out.extend(rule.mapped(self.geometry.vertices).map(|(p, w)| (0, p, w)));
        } else {
            for (i, sub) in self.geometry.hct_split().into_iter().enumerate() {
                out.extend(rule.mapped(sub).map(|(p, w)| (i, p, w)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub kind: ElementKind,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Space {
    kind: ElementKind,
    mesh: Mesh,
    dofs: DofMap,
    elements: Vec<SpaceElement>,
}

fn element_transform(
    kind: ElementKind,
    mesh: &Mesh,
    dofs: &DofMap,
    t: usize,
    local: &LocalElement,
) -> Vec<Vec<Poly>> {
    let g = &local.geometry;
    let n_local = kind.n_local_dofs();
    if kind == ElementKind::Bell {
        return local.pieces.clone();
    }
    // t_mat[l][g] : local DOF l of the global-local basis function g
    let mut t_mat = vec![vec![0.0; n_local]; n_local];
    let a = g.vertices;
    for j in 0..3 {
        t_mat[j][3 * j] = 1.0;
        for (slot, k) in [(3 + 2 * j, (j + 1) % 3), (4 + 2 * j, (j + 2) % 3)] {
            t_mat[slot][3 * j + 1] = a[k][0] - a[j][0];
            t_mat[slot][3 * j + 2] = a[k][1] - a[j][1];
        }
    }
    if kind == ElementKind::HctComplete {
        let edges = mesh.triangle_edges(t);
        for j in 0..3 {
            let n = dofs.edge_normals[edges[j]];
            let (p, q) = (a[(j + 1) % 3], a[(j + 2) % 3]);
            let to_vertex = [a[j][0] - 0.5 * (p[0] + q[0]), a[j][1] - 0.5 * (p[1] + q[1])];
            let s = (n[0] * to_vertex[0] + n[1] * to_vertex[1]).signum();
            t_mat[9 + j][9 + j] = s * g.altitude(j);
        }
    }
    local
        .pieces
        .iter()
        .map(|phi| {
            (0..n_local)
                .map(|gi| {
                    let mut acc = Poly::zero();
                    for (l, row) in t_mat.iter().enumerate() {
                        if row[gi] != 0.0 {
                            acc += phi[l] * row[gi];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

impl Space {
    pub fn new(mesh: &Mesh, kind: ElementKind) -> Result<Self, ElementError> {
        let dofs = local_to_global_dofs(kind, mesh)?;
        let elements = (0..mesh.n_triangles())
            .into_par_iter()
            .map(|t| {
                let local = LocalElement::new(kind, mesh.geometry(t)?)?;
                let pieces = element_transform(kind, mesh, &dofs, t, &local);
                Ok(SpaceElement {
                    geometry: local.geometry,
                    pieces,
                })
            })
            .collect::<Result<Vec<_>, ElementError>>()?;
        Ok(Space {
            kind,
            mesh: mesh.clone(),
            dofs,
            elements,
        })
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs
    }

    pub fn element(&self, t: usize) -> &SpaceElement {
        &self.elements[t]
    }

    pub fn elements(&self) -> &[SpaceElement] {
        &self.elements
    }

    pub fn element_dofs(&self, t: usize) -> &[usize] {
        &self.dofs.element_dofs[t]
    }

    pub fn zeros(&self) -> Field {
        Field {
            kind: self.kind,
            coeffs: vec![0.0; self.n_dofs()],
        }
    }

    /// Interpolant of the constant `c`: unit value DOFs, zero derivative DOFs.
    pub fn constant(&self, c: f64) -> Field {
        let mut f = self.zeros();
        let stride = if self.kind == ElementKind::Bell { 6 } else { 3 };
        for v in 0..self.mesh.n_vertices() {
            f.coeffs[stride * v] = c;
        }
        f
    }

    pub fn check(&self, field: &Field) -> Result<(), ElementError> {
        if field.coeffs.len() != self.n_dofs() || field.kind != self.kind {
            return Err(ElementError::FieldSize {
                expected: self.n_dofs(),
                got: field.coeffs.len(),
            });
        }
        Ok(())
    }

    /// Combines basis jets with the field's coefficients on triangle `t`.
    pub fn combine(&self, field: &Field, t: usize, jets: &[Jet]) -> Jet {
        let mut out = Jet::default();
        for (j, &g) in jets.iter().zip(&self.dofs.element_dofs[t]) {
            let c = field.coeffs[g];
            if c != 0.0 {
                out.axpy(c, j);
            }
        }
        out
    }

    pub fn eval_in_piece(&self, field: &Field, t: usize, piece: usize, p: Point) -> Jet {
        self.combine(field, t, &self.elements[t].jets_in_piece(piece, p))
    }

    /// Field jet at `p`, which must lie in triangle `t`.
    pub fn eval_in(&self, field: &Field, t: usize, p: Point) -> Jet {
        self.combine(field, t, &self.elements[t].jets(p))
    }

    pub fn eval(&self, field: &Field, p: Point) -> Result<Jet, ElementError> {
        let (t, lambda) = self.mesh.locate(p).ok_or(ElementError::PointOutside {
            triangle: usize::MAX,
            lambda: [f64::NAN; 3],
        })?;
        let e = &self.elements[t];
        Ok(self.combine(field, t, &e.jets_in_piece(e.piece_of(lambda), p)))
    }

    /// Applies the global DOF functionals to `v`.
    pub fn interpolate(&self, v: &dyn Smooth) -> Result<Field, ElementError> {
        let mut f = self.zeros();
        let nv = self.mesh.n_vertices();
        match self.kind {
            ElementKind::Bell => {
                for (vi, &p) in self.mesh.vertices().iter().enumerate() {
                    let g = v.gradient(p);
                    let h = v.hessian(p).ok_or(ElementError::MissingHessian)?;
                    f.coeffs[6 * vi..6 * vi + 6].copy_from_slice(&[v.value(p), g[0], g[1], h[0], h[1], h[2]]);
                }
            }
            _ => {
                for (vi, &p) in self.mesh.vertices().iter().enumerate() {
                    let g = v.gradient(p);
                    f.coeffs[3 * vi..3 * vi + 3].copy_from_slice(&[v.value(p), g[0], g[1]]);
                }
                if self.kind == ElementKind::HctComplete {
                    for (e, edge) in self.mesh.edges().iter().enumerate() {
                        let [a, b] = edge.vertices.map(|i| self.mesh.vertices()[i]);
                        let m = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
                        let g = v.gradient(m);
                        let n = self.dofs.edge_normals[e];
                        f.coeffs[3 * nv + e] = g[0] * n[0] + g[1] * n[1];
                    }
                }
            }
        }
        Ok(f)
    }

    /// Re-interpolates a field of `other` onto this space (values and gradients at the new anchors).
    pub fn transfer(&self, other: &Space, field: &Field) -> Result<Field, ElementError> {
        let probe = |p: Point| -> Result<Jet, ElementError> { other.eval(field, p) };
        let mut f = self.zeros();
        let nv = self.mesh.n_vertices();
        for (vi, &p) in self.mesh.vertices().iter().enumerate() {
            let j = probe(p)?;
            f.coeffs[3 * vi..3 * vi + 3].copy_from_slice(&[j.value, j.grad[0], j.grad[1]]);
        }
        if self.kind == ElementKind::HctComplete {
            for (e, edge) in self.mesh.edges().iter().enumerate() {
                let [a, b] = edge.vertices.map(|i| self.mesh.vertices()[i]);
                let j = probe([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])])?;
                let n = self.dofs.edge_normals[e];
                f.coeffs[3 * nv + e] = j.grad[0] * n[0] + j.grad[1] * n[1];
            }
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square() -> Mesh {
        Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn dof_counts_on_the_square() {
        let c = local_to_global_dofs(ElementKind::HctComplete, &square()).unwrap();
        assert_eq!(c.n_dofs, 17);
        assert_eq!(c.n_constrained(), 16);
        assert_eq!(c.n_free(), 1);
        let r = local_to_global_dofs(ElementKind::HctReduced, &square()).unwrap();
        assert_eq!(r.n_dofs, 12);
        assert_eq!(r.n_constrained(), 12);
        assert!(local_to_global_dofs(ElementKind::Bell, &square()).is_err());
    }

    fn random_quad(rng: &mut impl Rng) -> Mesh {
        loop {
            let p: Vec<Point> = (0..4)
                .map(|k| {
                    let ang = std::f64::consts::FRAC_PI_2 * k as f64 + rng.gen_range(-0.4..0.4);
                    let r = rng.gen_range(0.5..1.5);
                    [r * ang.cos(), r * ang.sin()]
                })
                .collect();
            if let Ok(m) = Mesh::new(p, vec![[0, 1, 2], [0, 2, 3]]) {
                if m.shape_regularity() < 20.0 {
                    return m;
                }
            }
        }
    }

    #[test]
    fn random_fields_are_c1_across_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let mesh = random_quad(&mut rng);
            for kind in [ElementKind::HctComplete, ElementKind::HctReduced] {
                let space = Space::new(&mesh, kind).unwrap();
                let field = Field {
                    kind,
                    coeffs: (0..space.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                };
                let (a, b) = (mesh.vertices()[0], mesh.vertices()[2]);
                for k in 0..10 {
                    let s = (k as f64 + 0.5) / 10.0;
                    let p = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                    let j0 = space.eval_in(&field, 0, p);
                    let j1 = space.eval_in(&field, 1, p);
                    assert!((j0.value - j1.value).abs() < 1e-9);
                    assert!((j0.grad[0] - j1.grad[0]).abs() < 1e-9, "{kind}");
                    assert!((j0.grad[1] - j1.grad[1]).abs() < 1e-9, "{kind}");
                }
            }
        }
    }

    fn monomial(i: i32, j: i32) -> impl Smooth {
        let pw = |x: f64, k: i32| if k < 0 { 0.0 } else { x.powi(k) };
        FnSmooth::new(
            move |p: Point| pw(p[0], i) * pw(p[1], j),
            move |p: Point| {
                [
                    i as f64 * pw(p[0], i - 1) * pw(p[1], j),
                    j as f64 * pw(p[0], i) * pw(p[1], j - 1),
                ]
            },
        )
    }

    #[test]
    fn polynomial_reproduction() {
        let mesh = crate::mesh::unit_square(3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts: Vec<Point> = (0..100).map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
        for (kind, max_deg) in [(ElementKind::HctComplete, 3), (ElementKind::HctReduced, 2)] {
            let space = Space::new(&mesh, kind).unwrap();
            for i in 0..=max_deg {
                for j in 0..=max_deg - i {
                    let v = monomial(i, j);
                    let f = space.interpolate(&v).unwrap();
                    for &p in &pts {
                        let jet = space.eval(&f, p).unwrap();
                        let g = v.gradient(p);
                        let err = (jet.value - v.value(p)).abs().max((jet.grad[0] - g[0]).abs()).max((jet.grad[1] - g[1]).abs());
                        assert!(err < 1e-10, "{kind} x^{i} y^{j}: {err}");
                    }
                }
            }
        }
    }

    #[test]
    fn constant_field_is_one() {
        let mesh = crate::mesh::unit_square(2);
        let space = Space::new(&mesh, ElementKind::HctComplete).unwrap();
        let one = space.constant(1.0);
        let j = space.eval(&one, [0.3, 0.7]).unwrap();
        assert!((j.value - 1.0).abs() < 1e-12 && j.grad[0].abs() < 1e-12);
        assert!(space.check(&one).is_ok());
        assert!(space.check(&Field { kind: ElementKind::HctComplete, coeffs: vec![0.0; 3] }).is_err());
    }

    #[test]
    fn bell_interpolation_needs_hessian() {
        let mesh = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        let space = Space::new(&mesh, ElementKind::Bell).unwrap();
        assert!(matches!(space.interpolate(&monomial(1, 0)), Err(ElementError::MissingHessian)));
    }

    #[test]
    fn transfer_between_meshes_is_exact_for_cubics() {
        let coarse = crate::mesh::unit_square(2);
        let fine = crate::mesh::refine(&coarse, &[0usize, 3].into_iter().collect());
        let v = monomial(2, 1);
        let a = Space::new(&coarse, ElementKind::HctComplete).unwrap();
        let b = Space::new(&fine, ElementKind::HctComplete).unwrap();
        let moved = b.transfer(&a, &a.interpolate(&v).unwrap()).unwrap();
        let direct = b.interpolate(&v).unwrap();
        for (x, y) in moved.coeffs.iter().zip(&direct.coeffs) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
