//! C¹ element kernels: DOF functionals and basis evaluation.
//!
//! HCT elements live on arbitrary triangles; Bell is only provided on the
//! reference triangle.

pub mod bell;
mod hct;
pub mod poly;
mod space;

use std::fmt;
use std::str::FromStr;

pub use bell::BellTable;
pub use poly::{Jet, Poly};
pub use space::{local_to_global_dofs, DofMap, Field, FnSmooth, Smooth, Space};

use crate::error::ElementError;
use crate::mesh::{subtriangle_of, Mesh, Point, TriangleGeometry};

/// Barycentric coordinates may be this negative and still count as inside.
pub const INSIDE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    HctComplete,
    HctReduced,
    Bell,
}

impl ElementKind {
    pub fn n_local_dofs(self) -> usize {
        match self {
            ElementKind::HctComplete => 12,
            ElementKind::HctReduced => 9,
            ElementKind::Bell => 18,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::HctComplete => "hct-c",
            ElementKind::HctReduced => "hct-r",
            ElementKind::Bell => "bell",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ElementKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "hct-c" | "hct_c" | "hctc" => Ok(ElementKind::HctComplete),
            "hct-r" | "hct_r" | "hctr" => Ok(ElementKind::HctReduced),
            "bell" => Ok(ElementKind::Bell),
            _ => Err(format!("unknown element kind '{s}' (expected hct-c, hct-r or bell)")),
        }
    }
}

/// A linear functional acting on smooth functions at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    Value,
    /// `∇p · d`
    Directional([f64; 2]),
    /// `d1ᵀ ∇²p d2`
    Second([f64; 2], [f64; 2]),
}

impl Functional {
    pub fn apply(&self, jet: &Jet) -> f64 {
        match *self {
            Functional::Value => jet.value,
            Functional::Directional(d) => jet.grad[0] * d[0] + jet.grad[1] * d[1],
            Functional::Second(a, b) => {
                let h = jet.hess;
                a[0] * (h[0] * b[0] + h[1] * b[1]) + a[1] * (h[1] * b[0] + h[2] * b[1])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DofDescriptor {
    pub functional: Functional,
    pub point: Point,
}

fn is_reference(v: [Point; 3]) -> bool {
    let r = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    v.iter()
        .zip(&r)
        .all(|(a, b)| (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14)
}

/// Table basis of one triangle: one list of polynomials per subtriangle
/// (a single list for Bell), in the variable `p - barycenter`.
#[derive(Debug, Clone)]
pub struct LocalElement {
    pub kind: ElementKind,
    pub geometry: TriangleGeometry,
    pub pieces: Vec<Vec<Poly>>,
}

impl LocalElement {
    pub fn new(kind: ElementKind, geometry: TriangleGeometry) -> Result<Self, ElementError> {
        Self::with_bell_table(kind, geometry, BellTable::default())
    }

    pub fn with_bell_table(
        kind: ElementKind,
        geometry: TriangleGeometry,
        table: BellTable,
    ) -> Result<Self, ElementError> {
        let pieces = match kind {
            ElementKind::HctComplete => hct::local_basis(&geometry, true).to_vec(),
            ElementKind::HctReduced => hct::local_basis(&geometry, false).to_vec(),
            ElementKind::Bell => {
                if !is_reference(geometry.vertices) {
                    return Err(ElementError::BellNotReference);
                }
                vec![bell::basis(table)]
            }
        };
        Ok(LocalElement {
            kind,
            geometry,
            pieces,
        })
    }

    /// Index of the polynomial piece used at barycentrics `lambda`.
    pub fn piece_of(&self, lambda: [f64; 3]) -> usize {
        if self.pieces.len() == 1 {
            0
        } else {
            subtriangle_of(lambda)
        }
    }

    /// All basis jets at a physical point, without an inside check.
    pub fn eval_unchecked(&self, p: Point) -> Vec<Jet> {
        let lambda = self.geometry.barycentric(p);
        let b = self.geometry.barycenter;
        let (dx, dy) = (p[0] - b[0], p[1] - b[1]);
        self.pieces[self.piece_of(lambda)].iter().map(|q| q.jet(dx, dy)).collect()
    }

    pub fn eval(&self, p: Point) -> Result<Vec<Jet>, ElementError> {
        let lambda = self.geometry.barycentric(p);
        if lambda.iter().any(|&l| l < -INSIDE_TOL) {
            return Err(ElementError::PointOutside {
                triangle: usize::MAX,
                lambda,
            });
        }
        Ok(self.eval_unchecked(p))
    }

    pub fn functionals(&self) -> Vec<DofDescriptor> {
        local_functionals(self.kind, &self.geometry)
    }
}

fn local_functionals(kind: ElementKind, g: &TriangleGeometry) -> Vec<DofDescriptor> {
    let a = g.vertices;
    let sub = |p: Point, q: Point| [p[0] - q[0], p[1] - q[1]];
    match kind {
        ElementKind::Bell => {
            let (ex, ey) = ([1.0, 0.0], [0.0, 1.0]);
            a.iter()
                .flat_map(|&p| {
                    [
                        Functional::Value,
                        Functional::Directional(ex),
                        Functional::Directional(ey),
                        Functional::Second(ex, ex),
                        Functional::Second(ex, ey),
                        Functional::Second(ey, ey),
                    ]
                    .map(|functional| DofDescriptor { functional, point: p })
                })
                .collect()
        }
        _ => {
            let mut out: Vec<DofDescriptor> = (0..3)
                .map(|j| DofDescriptor {
                    functional: Functional::Value,
                    point: a[j],
                })
                .collect();
            for j in 0..3 {
                for k in [(j + 1) % 3, (j + 2) % 3] {
                    out.push(DofDescriptor {
                        functional: Functional::Directional(sub(a[k], a[j])),
                        point: a[j],
                    });
                }
            }
            if kind == ElementKind::HctComplete {
                for j in 0..3 {
                    let (p, q) = (a[(j + 1) % 3], a[(j + 2) % 3]);
                    let b = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                    let t = 0.5 * (1.0 + g.eccentricity[j]);
                    let c = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
                    out.push(DofDescriptor {
                        functional: Functional::Directional(sub(a[j], c)),
                        point: b,
                    });
                }
            }
            out
        }
    }
}

/// DOF functionals of one triangle, in basis order.
pub fn dof_functionals(kind: ElementKind, mesh: &Mesh, t: usize) -> Result<Vec<DofDescriptor>, ElementError> {
    let g = mesh.geometry(t)?;
    if kind == ElementKind::Bell && !is_reference(g.vertices) {
        return Err(ElementError::BellNotReference);
    }
    Ok(local_functionals(kind, &g))
}

/// Values, gradients, Hessians and Laplacian gradients of the table basis at `p`.
pub fn eval_basis(kind: ElementKind, mesh: &Mesh, t: usize, p: Point) -> Result<Vec<Jet>, ElementError> {
    let el = LocalElement::new(kind, mesh.geometry(t)?)?;
    el.eval(p).map_err(|e| match e {
        ElementError::PointOutside { lambda, .. } => ElementError::PointOutside { triangle: t, lambda },
        e => e,
    })
}

/// `M[i][j]` = functional `i` applied to basis function `j`.
pub fn duality_matrix(el: &LocalElement) -> Vec<Vec<f64>> {
    let f = el.functionals();
    let jets: Vec<Vec<Jet>> = f.iter().map(|d| el.eval_unchecked(d.point)).collect();
    f.iter()
        .zip(&jets)
        .map(|(d, js)| js.iter().map(|j| d.functional.apply(j)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_triangle(rng: &mut impl Rng) -> TriangleGeometry {
        loop {
            let v: [Point; 3] = std::array::from_fn(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
            let g = TriangleGeometry::new(v);
            if g.area > 0.0 && g.shape_ratio() < 15.0 {
                return g;
            }
        }
    }

    fn max_dev_from_identity(m: &[Vec<f64>]) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    #[test]
    fn hct_duality_on_random_triangles() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let g = random_triangle(&mut rng);
            for kind in [ElementKind::HctComplete, ElementKind::HctReduced] {
                let el = LocalElement::new(kind, g.clone()).unwrap();
                let m = duality_matrix(&el);
                assert_eq!(m.len(), kind.n_local_dofs());
                assert!(max_dev_from_identity(&m) < 1e-9, "{kind}: {}", max_dev_from_identity(&m));
            }
        }
    }

    #[test]
    fn bell_duality() {
        let g = TriangleGeometry::new([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let el = LocalElement::new(ElementKind::Bell, g.clone()).unwrap();
        assert!(max_dev_from_identity(&duality_matrix(&el)) < 1e-12);
        let lit = LocalElement::with_bell_table(ElementKind::Bell, g, BellTable::Literal).unwrap();
        let m = duality_matrix(&lit);
        // basis columns 6..=9 and 13 are the ones with printed typos
        let bad: Vec<usize> = (0..18)
            .filter(|&j| (0..18).any(|i| (m[i][j] - if i == j { 1.0 } else { 0.0 }).abs() > 1e-9))
            .collect();
        assert_eq!(bad, vec![6, 7, 8, 9, 13]);
    }

    #[test]
    fn bell_rejects_physical_triangle() {
        let g = TriangleGeometry::new([[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]]);
        assert!(matches!(
            LocalElement::new(ElementKind::Bell, g),
            Err(ElementError::BellNotReference)
        ));
    }

    #[test]
    fn value_basis_at_vertices_and_partition_of_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_triangle(&mut rng);
        let el = LocalElement::new(ElementKind::HctComplete, g.clone()).unwrap();
        for j in 0..3 {
            let jets = el.eval_unchecked(g.vertices[j]);
            for k in 0..3 {
                assert!((jets[k].value - if j == k { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        let red = LocalElement::new(ElementKind::HctReduced, g.clone()).unwrap();
        for _ in 0..100 {
            let mut l: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.0..1.0));
            let s: f64 = l.iter().sum();
            l.iter_mut().for_each(|x| *x /= s);
            let jets = red.eval_unchecked(g.point_at(l));
            let sum: f64 = jets[..3].iter().map(|j| j.value).sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn c1_inside_macro_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let g = random_triangle(&mut rng);
            for kind in [ElementKind::HctComplete, ElementKind::HctReduced] {
                let el = LocalElement::new(kind, g.clone()).unwrap();
                // points on the internal edge a0 - a_{i+2}, shared by K_i and K_{i+1}
                for i in 0..3 {
                    for s in [0.0, 0.3, 0.7, 1.0] {
                        let v = g.vertices[(i + 2) % 3];
                        let b = g.barycenter;
                        let d = [s * (v[0] - b[0]), s * (v[1] - b[1])];
                        for q in 0..kind.n_local_dofs() {
                            let j1 = el.pieces[i][q].jet(d[0], d[1]);
                            let j2 = el.pieces[(i + 1) % 3][q].jet(d[0], d[1]);
                            let scale = 1.0 + j1.value.abs() + j1.grad[0].abs() + j1.grad[1].abs();
                            assert!((j1.value - j2.value).abs() < 1e-10 * scale);
                            assert!((j1.grad[0] - j2.grad[0]).abs() < 1e-10 * scale);
                            assert!((j1.grad[1] - j2.grad[1]).abs() < 1e-10 * scale);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn hessians_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_triangle(&mut rng);
        let el = LocalElement::new(ElementKind::HctComplete, g.clone()).unwrap();
        let p = g.point_at([0.5, 0.3, 0.2]);
        let h = 1e-5;
        let jp = el.eval_unchecked([p[0] + h, p[1]]);
        let jm = el.eval_unchecked([p[0] - h, p[1]]);
        let j0 = el.eval_unchecked(p);
        for q in 0..12 {
            let fd = (jp[q].grad[0] - jm[q].grad[0]) / (2.0 * h);
            assert!((fd - j0[q].hess[0]).abs() <= 1e-5 * (1.0 + j0[q].hess[0].abs()));
            let fd = (jp[q].grad[1] - jm[q].grad[1]) / (2.0 * h);
            assert!((fd - j0[q].hess[1]).abs() <= 1e-5 * (1.0 + j0[q].hess[1].abs()));
        }
    }

    #[test]
    fn pieces_are_cubic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = random_triangle(&mut rng);
        let el = LocalElement::new(ElementKind::HctComplete, g).unwrap();
        assert!(el.pieces.iter().flatten().all(|p| p.vanishes_from_degree(4, 0.0)));
    }

    #[test]
    fn functional_counts_and_outside_point() {
        let mesh = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        assert_eq!(dof_functionals(ElementKind::HctReduced, &mesh, 0).unwrap().len(), 9);
        assert_eq!(dof_functionals(ElementKind::HctComplete, &mesh, 0).unwrap().len(), 12);
        assert!(dof_functionals(ElementKind::Bell, &mesh, 0).is_err());
        assert!(matches!(
            eval_basis(ElementKind::HctComplete, &mesh, 0, [0.0, 1.0]),
            Err(ElementError::PointOutside { triangle: 0, .. })
        ));
        assert!(eval_basis(ElementKind::HctComplete, &mesh, 0, [0.5, 0.25]).is_ok());
        let reference = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        assert_eq!(dof_functionals(ElementKind::Bell, &reference, 0).unwrap().len(), 18);
    }
}
