//! Local a posteriori indicators for the discretization error (`eta_D`) and the
//! linearization error (`eta_L`), data oscillation and effectivity.
//!
//! For a triangle `K` with diameter `h_K`:
//!
//! ```text
//! eta_D = h_K² ‖f_h − λ|u^n|^{2p} u^n‖_K              (Δ²u^{n+1} = 0 on each subtriangle)
//!       + Σ_e ‖avg Δu^{n+1}‖_e                        (Average variant)
//!       | Σ_e h_e^{1/2} ‖[Δu^{n+1}]‖_e                 (Jump variant)
//!       + ½ Σ_e h_e^{3/2} ‖[∂Δu^{n+1}/∂n]‖_e
//! eta_L = λ h_K² ‖Δ(u^n − u^{n+1})‖_K
//! ```
//!
//! Edge sums run over the interior sides of `K`; `f_h` is the L² projection
//! of `f` onto P1(K).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::assembly::{QuadCache, MASS_DEGREE};
use crate::elements::{Field, Space};
use crate::error::EstimatorError;
use crate::mesh::Point;
use crate::quadrature::{edge_rule, triangle_rule};

pub type Source<'f> = dyn Fn(Point) -> f64 + Sync + 'f;

const EDGE_DEGREE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimatorVariant {
    /// Edge term `‖avg Δu‖_e` without a mesh-size weight.
    #[default]
    Average,
    /// Edge term `h_e^{1/2} ‖[Δu]‖_e`.
    Jump,
}

impl fmt::Display for EstimatorVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorVariant::Average => "average",
            EstimatorVariant::Jump => "jump",
        })
    }
}

impl FromStr for EstimatorVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "average" => Ok(EstimatorVariant::Average),
            "jump" => Ok(EstimatorVariant::Jump),
            _ => Err(format!("unknown estimator variant '{s}' (expected average or jump)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ElementIndicator {
    pub h: f64,
    pub eta_d: f64,
    pub eta_l: f64,
    pub oscillation: f64,
}

impl ElementIndicator {
    pub fn eta(&self) -> f64 {
        self.eta_d.hypot(self.eta_l)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Indicators {
    pub elements: Vec<ElementIndicator>,
    pub eta_d: f64,
    pub eta_l: f64,
    pub eta: f64,
    pub oscillation: f64,
}

impl Indicators {
    pub fn from_elements(elements: Vec<ElementIndicator>) -> Self {
        let eta_d = aggregate(elements.iter().map(|e| e.eta_d));
        let eta_l = aggregate(elements.iter().map(|e| e.eta_l));
        let oscillation = aggregate(elements.iter().map(|e| e.oscillation));
        Indicators {
            eta_d,
            eta_l,
            eta: eta_d.hypot(eta_l),
            oscillation,
            elements,
        }
    }

    pub fn eta_d_values(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.eta_d).collect()
    }
}

/// Root-sum-square of local values.
pub fn aggregate(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `sqrt(eta_D² + eta_L²) / err_H2`.
pub fn effectivity(err_h2: f64, indicators: &Indicators) -> Result<f64, EstimatorError> {
    if !(err_h2 > 0.0) {
        return Err(EstimatorError::ZeroError(err_h2));
    }
    Ok(indicators.eta / err_h2)
}

/// Coefficients of the P1 L² projection of `f` on the triangle `v`, in barycentric form.
pub fn p1_projection(v: [Point; 3], f: &Source<'_>) -> [f64; 3] {
    let rule = triangle_rule(MASS_DEGREE).expect("stocked rule");
    let area = crate::mesh::signed_area(v[0], v[1], v[2]).abs();
    let mut r = [0.0; 3];
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let p = [
            l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
            l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
        ];
        let fv = f(p) * w * area;
        for k in 0..3 {
            r[k] += fv * l[k];
        }
    }
    // the P1 mass matrix is area/12 (I + 11ᵀ), its inverse 12/area (I - 11ᵀ/4)
    let s = (r[0] + r[1] + r[2]) / 4.0;
    r.map(|rk| 12.0 / area * (rk - s))
}

/// Precomputed data for evaluating indicators on one space and source.
pub struct Estimator<'a> {
    space: &'a Space,
    samples: &'a QuadCache,
    f: &'a Source<'a>,
    projections: Vec<[f64; 3]>,
    lambda: f64,
    p: f64,
    variant: EstimatorVariant,
}

impl<'a> Estimator<'a> {
    pub fn new(
        space: &'a Space,
        samples: &'a QuadCache,
        f: &'a Source<'a>,
        lambda: f64,
        p: f64,
        variant: EstimatorVariant,
    ) -> Self {
        let projections = space
            .elements()
            .par_iter()
            .map(|el| p1_projection(el.geometry.vertices, f))
            .collect();
        Estimator {
            space,
            samples,
            f,
            projections,
            lambda,
            p,
            variant,
        }
    }

    fn f_h(&self, t: usize, x: Point) -> f64 {
        let l = self.space.element(t).geometry.barycentric(x);
        let c = &self.projections[t];
        c[0] * l[0] + c[1] * l[1] + c[2] * l[2]
    }

    /// `h_K² ‖f − f_h‖_K`
    pub fn oscillation(&self, t: usize) -> f64 {
        let s = &self.samples.elements[t];
        let sq: f64 = (0..s.len())
            .map(|q| {
                let d = (self.f)(s.points[q]) - self.f_h(t, s.points[q]);
                s.weights[q] * d * d
            })
            .sum();
        let h = self.space.element(t).geometry.diameter;
        h * h * sq.sqrt()
    }

    /// Edge integrand on side `i` of triangle `t` at the edge point `x`: (Δu, ∇Δu).
    fn edge_sample(&self, field: &Field, t: usize, i: usize, x: Point) -> (f64, [f64; 2]) {
        let jet = self.space.eval_in_piece(field, t, i, x);
        (jet.laplacian(), jet.grad_laplacian())
    }

    /// Edge contribution `(term ii, term iii)` of one interior edge, already weighted.
    fn edge_terms(&self, field: &Field, e: usize) -> Option<(f64, f64)> {
        let mesh = self.space.mesh();
        let edge = &mesh.edges()[e];
        let (t0, t1) = (edge.triangles[0]?, edge.triangles[1]?);
        let side = |t: usize| mesh.triangle_edges(t).iter().position(|&x| x == e).unwrap();
        let (i0, i1) = (side(t0), side(t1));
        let [a, b] = edge.vertices.map(|v| mesh.vertices()[v]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let n = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
        let rule = edge_rule(EDGE_DEGREE).expect("stocked edge rule");
        let (mut avg_sq, mut jump_sq, mut djump_sq) = (0.0, 0.0, 0.0);
        for (x, w) in rule.mapped(a, b) {
            let (l0, g0) = self.edge_sample(field, t0, i0, x);
            let (l1, g1) = self.edge_sample(field, t1, i1, x);
            let avg = 0.5 * (l0 + l1);
            let dj = (g0[0] - g1[0]) * n[0] + (g0[1] - g1[1]) * n[1];
            avg_sq += w * avg * avg;
            jump_sq += w * (l0 - l1) * (l0 - l1);
            djump_sq += w * dj * dj;
        }
        let second = match self.variant {
            EstimatorVariant::Average => avg_sq.sqrt(),
            EstimatorVariant::Jump => len.sqrt() * jump_sq.sqrt(),
        };
        Some((second, 0.5 * len.powf(1.5) * djump_sq.sqrt()))
    }

    fn residual_term(&self, t: usize, u_prev: &Field) -> f64 {
        let s = &self.samples.elements[t];
        let (vals, _) = self.samples.field_at(self.space, u_prev, t);
        let sq: f64 = (0..s.len())
            .map(|q| {
                let u = vals[q];
                let r = self.f_h(t, s.points[q]) - self.lambda * u.abs().powf(2.0 * self.p) * u;
                s.weights[q] * r * r
            })
            .sum();
        let h = self.space.element(t).geometry.diameter;
        h * h * sq.sqrt()
    }

    /// `λ h_K² ‖Δ(u_prev − u_next)‖_K`
    pub fn eta_l(&self, t: usize, u_next: &Field, u_prev: &Field) -> f64 {
        let s = &self.samples.elements[t];
        let (_, l1) = self.samples.field_at(self.space, u_next, t);
        let (_, l0) = self.samples.field_at(self.space, u_prev, t);
        let sq: f64 = (0..s.len()).map(|q| s.weights[q] * (l0[q] - l1[q]).powi(2)).sum();
        let h = self.space.element(t).geometry.diameter;
        self.lambda * h * h * sq.sqrt()
    }

    pub fn eta_d(&self, t: usize, u_next: &Field, u_prev: &Field) -> f64 {
        let mut eta = self.residual_term(t, u_prev);
        for e in self.space.mesh().triangle_edges(t) {
            if let Some((a, b)) = self.edge_terms(u_next, e) {
                eta += a + b;
            }
        }
        eta
    }

    /// All local indicators; each interior edge is evaluated once.
    pub fn compute(&self, u_next: &Field, u_prev: &Field) -> Indicators {
        let mesh = self.space.mesh();
        let edge_terms: Vec<Option<(f64, f64)>> = (0..mesh.n_edges())
            .into_par_iter()
            .map(|e| self.edge_terms(u_next, e))
            .collect();
        let elements = (0..mesh.n_triangles())
            .into_par_iter()
            .map(|t| {
                let mut eta_d = self.residual_term(t, u_prev);
                for e in mesh.triangle_edges(t) {
                    if let Some((a, b)) = edge_terms[e] {
                        eta_d += a + b;
                    }
                }
                ElementIndicator {
                    h: self.space.element(t).geometry.diameter,
                    eta_d,
                    eta_l: self.eta_l(t, u_next, u_prev),
                    oscillation: self.oscillation(t),
                }
            })
            .collect();
        Indicators::from_elements(elements)
    }
}

/// Convenience wrapper computing all indicators from scratch.
pub fn estimate(
    space: &Space,
    u_next: &Field,
    u_prev: &Field,
    f: &Source<'_>,
    lambda: f64,
    p: f64,
    variant: EstimatorVariant,
) -> Indicators {
    let samples = QuadCache::new(space, MASS_DEGREE);
    Estimator::new(space, &samples, f, lambda, p, variant).compute(u_next, u_prev)
}

/// `h_K² ‖f − f_h‖_{L²(K)}` for one triangle.
pub fn data_oscillation(space: &Space, f: &Source<'_>, t: usize) -> f64 {
    let rule = triangle_rule(MASS_DEGREE).expect("stocked rule");
    let g = &space.element(t).geometry;
    let c = p1_projection(g.vertices, f);
    let sq = rule.integrate(g.vertices, |x| {
        let l = g.barycentric(x);
        let d = f(x) - (c[0] * l[0] + c[1] * l[1] + c[2] * l[2]);
        d * d
    });
    g.diameter * g.diameter * sq.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{ElementKind, FnSmooth};
    use crate::mesh::{unit_square, Mesh};

    #[test]
    fn aggregation() {
        assert_eq!(aggregate([3.0, 4.0]), 5.0);
        assert_eq!(aggregate([0.0, 0.0]), 0.0);
        assert_eq!(aggregate([2.5]), 2.5);
        let ind = Indicators::from_elements(vec![
            ElementIndicator { h: 1.0, eta_d: 3.0, eta_l: 0.0, oscillation: 0.0 },
            ElementIndicator { h: 1.0, eta_d: 4.0, eta_l: 0.0, oscillation: 0.0 },
        ]);
        assert_eq!(ind.eta_d, 5.0);
        assert_eq!(effectivity(5.0, &ind).unwrap(), 1.0);
        assert!(effectivity(0.0, &ind).is_err());
    }

    #[test]
    fn zero_data_gives_zero_indicators() {
        let space = Space::new(&unit_square(2), ElementKind::HctComplete).unwrap();
        let z = space.zeros();
        let ind = estimate(&space, &z, &z, &|_| 0.0, 1.0, 1.0, EstimatorVariant::Average);
        assert_eq!(ind.eta_d, 0.0);
        assert_eq!(ind.eta_l, 0.0);
    }

    #[test]
    fn eta_l_is_linear_in_lambda() {
        let space = Space::new(&unit_square(2), ElementKind::HctComplete).unwrap();
        let u = space
            .interpolate(&FnSmooth::new(|p: Point| p[0] * p[0] * p[1], |p: Point| [2.0 * p[0] * p[1], p[0] * p[0]]))
            .unwrap();
        let z = space.zeros();
        let a = estimate(&space, &u, &z, &|_| 1.0, 2.0, 1.0, EstimatorVariant::Average);
        let b = estimate(&space, &u, &z, &|_| 1.0, 4.0, 1.0, EstimatorVariant::Average);
        assert!(a.eta_l > 0.0);
        assert!((b.eta_l - 2.0 * a.eta_l).abs() < 1e-12 * b.eta_l);
        let same = estimate(&space, &u, &u, &|_| 1.0, 2.0, 1.0, EstimatorVariant::Average);
        assert_eq!(same.eta_l, 0.0);
    }

    #[test]
    fn oscillation_of_linear_and_quadratic_data() {
        let mesh = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        let space = Space::new(&mesh, ElementKind::HctReduced).unwrap();
        assert!(data_oscillation(&space, &|p| 2.0 * p[0] - p[1] + 3.0, 0) < 1e-14);
        // ‖x² − P1 projection‖² on the unit right triangle is 1/600
        let osc = data_oscillation(&space, &|p| p[0] * p[0], 0);
        let h2 = 2.0;
        assert!((osc - h2 * (1.0f64 / 600.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn oscillation_decays_under_refinement() {
        let f = |p: Point| (3.0 * p[0]).sin() * (2.0 * p[1]).cos();
        let mut prev: Option<f64> = None;
        for n in [2, 4, 8] {
            let space = Space::new(&unit_square(n), ElementKind::HctReduced).unwrap();
            let osc = aggregate((0..space.mesh().n_triangles()).map(|t| data_oscillation(&space, &f, t)));
            if let Some(p) = prev {
                let rate = (p / osc).log2();
                assert!(rate >= 2.0, "rate {rate}");
            }
            prev = Some(osc);
        }
    }

    #[test]
    fn smooth_field_jumps_shrink() {
        let v = FnSmooth::new(
            |p: Point| (p[0] * 2.0).sin() * (p[1] * 3.0).cos(),
            |p: Point| [2.0 * (p[0] * 2.0).cos() * (p[1] * 3.0).cos(), -3.0 * (p[0] * 2.0).sin() * (p[1] * 3.0).sin()],
        );
        let mut prev: Option<f64> = None;
        for n in [2, 4, 8] {
            let space = Space::new(&unit_square(n), ElementKind::HctComplete).unwrap();
            let u = space.interpolate(&v).unwrap();
            let samples = QuadCache::new(&space, MASS_DEGREE);
            let est = Estimator::new(&space, &samples, &|_| 0.0, 1.0, 1.0, EstimatorVariant::Average);
            let jump = aggregate((0..space.mesh().n_edges()).filter_map(|e| est.edge_terms(&u, e)).map(|x| x.1));
            if let Some(p) = prev {
                assert!((p / jump).log2() > 0.5);
            }
            prev = Some(jump);
        }
    }
}
