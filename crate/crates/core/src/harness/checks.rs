//! Element self-checks: duality, C¹ continuity and polynomial reproduction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elements::{duality_matrix, BellTable, ElementKind, Field, FnSmooth, LocalElement, Space};
use crate::error::ElementError;
use crate::mesh::{Mesh, Point, TriangleGeometry};

/// Random triangle in `[-2, 2]²` with `h/ρ < 15`.
pub fn random_triangle(rng: &mut impl Rng) -> TriangleGeometry {
    loop {
        let v: [Point; 3] = std::array::from_fn(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
        let g = TriangleGeometry::new(v);
        if g.area > 0.0 && g.shape_ratio() < 15.0 {
            return g;
        }
    }
}

/// Largest deviation from the identity and the columns that deviate by more than `tol`.
pub fn identity_defect(m: &[Vec<f64>], tol: f64) -> (f64, Vec<(usize, f64)>) {
    let n = m.len();
    let mut worst = 0.0f64;
    let mut cols = Vec::new();
    for j in 0..n {
        let col = (0..n)
            .map(|i| (m[i][j] - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        worst = worst.max(col);
        if col > tol {
            cols.push((j, col));
        }
    }
    (worst, cols)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    pub triangles: usize,
    pub hct_complete: f64,
    pub hct_reduced: f64,
    pub bell_corrected: f64,
    pub bell_literal: f64,
    /// Basis columns of the literal Bell table that fail, with their defect.
    pub bell_literal_failures: Vec<(usize, f64)>,
}

pub fn check_duality(triangles: usize, seed: u64, tol: f64) -> Result<DualityReport, ElementError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut c, mut r) = (0.0f64, 0.0f64);
    for _ in 0..triangles {
        let g = random_triangle(&mut rng);
        c = c.max(identity_defect(&duality_matrix(&LocalElement::new(ElementKind::HctComplete, g.clone())?), tol).0);
        r = r.max(identity_defect(&duality_matrix(&LocalElement::new(ElementKind::HctReduced, g)?), tol).0);
    }
    let reference = TriangleGeometry::new([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
    let bell = |table| -> Result<_, ElementError> {
        let el = LocalElement::with_bell_table(ElementKind::Bell, reference.clone(), table)?;
        Ok(identity_defect(&duality_matrix(&el), tol))
    };
    let (bell_corrected, _) = bell(BellTable::Corrected)?;
    let (bell_literal, bell_literal_failures) = bell(BellTable::Literal)?;
    Ok(DualityReport {
        triangles,
        hct_complete: c,
        hct_reduced: r,
        bell_corrected,
        bell_literal,
        bell_literal_failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConformityReport {
    pub edge_value: f64,
    pub edge_gradient: f64,
    /// Mismatch of value and gradient between the three pieces at the barycenter.
    pub barycenter: f64,
}

/// Two triangles sharing the diagonal of a random convex quadrilateral.
fn random_pair(rng: &mut impl Rng) -> Mesh {
    loop {
        let v: Vec<Point> = (0..4)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_2 * (k as f64 + rng.gen_range(-0.3..0.3));
                let r = rng.gen_range(0.5..2.0);
                [r * a.cos(), r * a.sin()]
            })
            .collect();
        if let Ok(m) = Mesh::new(v, vec![[0, 1, 2], [0, 2, 3]]) {
            if m.shape_regularity() < 15.0 {
                return m;
            }
        }
    }
}

pub fn check_conformity(meshes: usize, samples: usize, seed: u64) -> Result<ConformityReport, ElementError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = ConformityReport::default();
    for _ in 0..meshes {
        let mesh = random_pair(&mut rng);
        for kind in [ElementKind::HctComplete, ElementKind::HctReduced] {
            let space = Space::new(&mesh, kind)?;
            let field = Field {
                kind,
                coeffs: (0..space.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            };
            let [a, b] = [mesh.vertices()[0], mesh.vertices()[2]];
            for s in 0..samples {
                let t = (s as f64 + 0.5) / samples as f64;
                let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let (l, r) = (space.eval_in(&field, 0, p), space.eval_in(&field, 1, p));
                rep.edge_value = rep.edge_value.max((l.value - r.value).abs());
                rep.edge_gradient = rep
                    .edge_gradient
                    .max((l.grad[0] - r.grad[0]).abs().max((l.grad[1] - r.grad[1]).abs()));
            }
            for t in 0..2 {
                let c = mesh.geometry(t)?.barycenter;
                let jets: Vec<_> = (0..3).map(|k| space.eval_in_piece(&field, t, k, c)).collect();
                for k in 1..3 {
                    let d = (jets[k].value - jets[0].value)
                        .abs()
                        .max((jets[k].grad[0] - jets[0].grad[0]).abs())
                        .max((jets[k].grad[1] - jets[0].grad[1]).abs());
                    rep.barycenter = rep.barycenter.max(d);
                }
            }
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReproductionReport {
    /// Worst value/gradient error over all monomials of degree ≤ 3.
    pub hct_complete_cubic: f64,
    /// Worst value/gradient error over all monomials of degree ≤ 2.
    pub hct_reduced_quadratic: f64,
}

/// Interpolates monomials on a random two-triangle mesh and samples value and
/// gradient errors on a grid inside every piece.
pub fn check_reproduction(seed: u64) -> Result<ReproductionReport, ElementError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = random_pair(&mut rng);
    let worst = |kind: ElementKind, degree: i32| -> Result<f64, ElementError> {
        let space = Space::new(&mesh, kind)?;
        let mut w = 0.0f64;
        for n in 0..=degree {
            for j in 0..=n {
                let i = n - j;
                let mono = move |p: Point| p[0].powi(i) * p[1].powi(j);
                let grad = move |p: Point| {
                    let dx = if i > 0 { i as f64 * p[0].powi(i - 1) * p[1].powi(j) } else { 0.0 };
                    let dy = if j > 0 { j as f64 * p[0].powi(i) * p[1].powi(j - 1) } else { 0.0 };
                    [dx, dy]
                };
                let field = space.interpolate(&FnSmooth::new(mono, grad))?;
                for t in 0..mesh.n_triangles() {
                    for piece in space.element(t).geometry.hct_split() {
                        for (a, b) in [(1, 1), (4, 1), (1, 4), (2, 2), (3, 2), (2, 3)] {
                            let l = [a as f64 / 7.0, b as f64 / 7.0, 1.0 - (a + b) as f64 / 7.0];
                            let p = [
                                l[0] * piece[0][0] + l[1] * piece[1][0] + l[2] * piece[2][0],
                                l[0] * piece[0][1] + l[1] * piece[1][1] + l[2] * piece[2][1],
                            ];
                            let jet = space.eval_in(&field, t, p);
                            let g = grad(p);
                            w = w
                                .max((jet.value - mono(p)).abs())
                                .max((jet.grad[0] - g[0]).abs())
                                .max((jet.grad[1] - g[1]).abs());
                        }
                    }
                }
            }
        }
        Ok(w)
    };
    Ok(ReproductionReport {
        hct_complete_cubic: worst(ElementKind::HctComplete, 3)?,
        hct_reduced_quadratic: worst(ElementKind::HctReduced, 2)?,
    })
}
