//! Assembly of the linearized plate system: stiffness, weighted mass, load and
//! clamped boundary conditions.
//!
//! All integrals run over the HCT subtriangles. Element contributions are
//! computed in parallel and scattered sequentially, so results do not depend
//! on thread scheduling.

use rayon::prelude::*;

use crate::elements::{DofMap, ElementKind, Field, Space};
use crate::error::{ElementError, SolveError};
use crate::mesh::Point;
use crate::quadrature::triangle_rule;
use crate::sparse::CsrMatrix;

/// Exactness degree for `∫ Δφ Δψ` (products of linear Laplacians, with margin).
pub const STIFFNESS_DEGREE: usize = 4;
/// Exactness degree for mass, load and error integrals.
pub const MASS_DEGREE: usize = 8;

/// Basis values and Laplacians at the quadrature nodes of one triangle.
#[derive(Debug, Clone)]
pub struct ElementSamples {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub pieces: Vec<usize>,
    /// `values[q * n + k]` for node `q`, local basis `k`.
    pub values: Vec<f64>,
    pub laplacians: Vec<f64>,
    pub n_basis: usize,
}

impl ElementSamples {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn value_row(&self, q: usize) -> &[f64] {
        &self.values[q * self.n_basis..(q + 1) * self.n_basis]
    }

    pub fn laplacian_row(&self, q: usize) -> &[f64] {
        &self.laplacians[q * self.n_basis..(q + 1) * self.n_basis]
    }
}

/// Quadrature samples of the global basis on every triangle.
#[derive(Debug, Clone)]
pub struct QuadCache {
    pub degree: usize,
    pub elements: Vec<ElementSamples>,
}

impl QuadCache {
    pub fn new(space: &Space, degree: usize) -> Self {
        let rule = triangle_rule(degree).expect("stocked quadrature degree");
        let elements = space
            .elements()
            .par_iter()
            .map(|el| {
                let nodes = el.quadrature(&rule);
                let n_basis = el.pieces[0].len();
                let mut s = ElementSamples {
                    points: Vec::with_capacity(nodes.len()),
                    weights: Vec::with_capacity(nodes.len()),
                    pieces: Vec::with_capacity(nodes.len()),
                    values: Vec::with_capacity(nodes.len() * n_basis),
                    laplacians: Vec::with_capacity(nodes.len() * n_basis),
                    n_basis,
                };
                for (piece, p, w) in nodes {
                    s.points.push(p);
                    s.weights.push(w);
                    s.pieces.push(piece);
                    for j in el.jets_in_piece(piece, p) {
                        s.values.push(j.value);
                        s.laplacians.push(j.laplacian());
                    }
                }
                s
            })
            .collect();
        QuadCache { degree, elements }
    }

    /// Field values and Laplacians at the nodes of triangle `t`.
    pub fn field_at(&self, space: &Space, field: &Field, t: usize) -> (Vec<f64>, Vec<f64>) {
        let s = &self.elements[t];
        let coeffs: Vec<f64> = space.element_dofs(t).iter().map(|&g| field.coeffs[g]).collect();
        let combine = |rows: &[f64]| -> Vec<f64> {
            rows.chunks(s.n_basis)
                .map(|r| r.iter().zip(&coeffs).map(|(a, c)| a * c).sum())
                .collect()
        };
        (combine(&s.values), combine(&s.laplacians))
    }
}

/// Sparsity pattern of the global system plus the storage slots of every element block.
#[derive(Debug, Clone)]
pub struct SystemPattern {
    pub template: CsrMatrix,
    /// `slots[t][a * n + b]` is the storage index of `(dofs[a], dofs[b])`.
    pub slots: Vec<Vec<usize>>,
}

impl SystemPattern {
    pub fn new(space: &Space) -> Self {
        let n = space.n_dofs();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for dofs in &space.dofs().element_dofs {
            for &i in dofs {
                rows[i].extend_from_slice(dofs);
            }
        }
        let template = CsrMatrix::from_pattern(n, rows);
        let slots = space
            .dofs()
            .element_dofs
            .iter()
            .map(|dofs| {
                dofs.iter()
                    .flat_map(|&i| dofs.iter().map(move |&j| (i, j)))
                    .map(|(i, j)| template.slot(i, j).expect("element pair in pattern"))
                    .collect()
            })
            .collect();
        SystemPattern { template, slots }
    }

    /// Scatters dense element blocks (row-major, element DOF order) in element order.
    pub fn scatter(&self, blocks: &[Vec<f64>]) -> CsrMatrix {
        let mut m = self.template.clone();
        let vals = m.values_mut();
        for (slots, block) in self.slots.iter().zip(blocks) {
            for (&s, &v) in slots.iter().zip(block) {
                vals[s] += v;
            }
        }
        m
    }
}

/// Reusable assembly context for one space.
#[derive(Debug, Clone)]
pub struct Assembler<'a> {
    space: &'a Space,
    pattern: SystemPattern,
    stiffness_samples: QuadCache,
    mass_samples: QuadCache,
}

fn check_kind(space: &Space) -> Result<(), SolveError> {
    if space.kind() == ElementKind::Bell {
        return Err(ElementError::UnsupportedKind("bell (reference element only)".into()).into());
    }
    Ok(())
}

impl<'a> Assembler<'a> {
    pub fn new(space: &'a Space) -> Result<Self, SolveError> {
        check_kind(space)?;
        Ok(Assembler {
            space,
            pattern: SystemPattern::new(space),
            stiffness_samples: QuadCache::new(space, STIFFNESS_DEGREE),
            mass_samples: QuadCache::new(space, MASS_DEGREE),
        })
    }

    pub fn space(&self) -> &'a Space {
        self.space
    }

    pub fn pattern(&self) -> &SystemPattern {
        &self.pattern
    }

    pub fn mass_samples(&self) -> &QuadCache {
        &self.mass_samples
    }

    /// Element blocks of `∫ Δφ_a Δφ_b`.
    pub fn stiffness_blocks(&self) -> Vec<Vec<f64>> {
        self.stiffness_samples
            .elements
            .par_iter()
            .map(|s| {
                let n = s.n_basis;
                let mut block = vec![0.0; n * n];
                for q in 0..s.len() {
                    let lap = s.laplacian_row(q);
                    let w = s.weights[q];
                    for a in 0..n {
                        let wa = w * lap[a];
                        for b in 0..n {
                            block[a * n + b] += wa * lap[b];
                        }
                    }
                }
                block
            })
            .collect()
    }

    pub fn stiffness(&self) -> CsrMatrix {
        self.pattern.scatter(&self.stiffness_blocks())
    }

    /// `∫ c(t, q) φ_a φ_b` with a coefficient given per triangle and node.
    pub fn mass_with(&self, coef: impl Fn(usize, usize) -> f64 + Sync) -> CsrMatrix {
        let blocks: Vec<Vec<f64>> = self
            .mass_samples
            .elements
            .par_iter()
            .enumerate()
            .map(|(t, s)| {
                let n = s.n_basis;
                let mut block = vec![0.0; n * n];
                for q in 0..s.len() {
                    let c = coef(t, q) * s.weights[q];
                    if c == 0.0 {
                        continue;
                    }
                    let v = s.value_row(q);
                    for a in 0..n {
                        let ca = c * v[a];
                        for b in 0..n {
                            block[a * n + b] += ca * v[b];
                        }
                    }
                }
                block
            })
            .collect();
        self.pattern.scatter(&blocks)
    }

    pub fn mass(&self) -> CsrMatrix {
        self.mass_with(|_, _| 1.0)
    }

    /// `λ ∫ |w|^{2p} φ_a φ_b`.
    pub fn weighted_mass(&self, w: &Field, lambda: f64, p: f64) -> Result<CsrMatrix, SolveError> {
        validate_parameters(lambda, p)?;
        self.space.check(w)?;
        let weights: Vec<Vec<f64>> = (0..self.space.mesh().n_triangles())
            .into_par_iter()
            .map(|t| {
                let (vals, _) = self.mass_samples.field_at(self.space, w, t);
                vals.into_iter().map(|u| lambda * u.abs().powf(2.0 * p)).collect()
            })
            .collect();
        Ok(self.mass_with(|t, q| weights[t][q]))
    }

    pub fn load(&self, f: &(dyn Fn(Point) -> f64 + Sync)) -> Vec<f64> {
        let blocks: Vec<Vec<f64>> = self
            .mass_samples
            .elements
            .par_iter()
            .map(|s| {
                let n = s.n_basis;
                let mut b = vec![0.0; n];
                for q in 0..s.len() {
                    let c = s.weights[q] * f(s.points[q]);
                    for (bk, v) in b.iter_mut().zip(s.value_row(q)) {
                        *bk += c * v;
                    }
                }
                b
            })
            .collect();
        let mut rhs = vec![0.0; self.space.n_dofs()];
        for (t, b) in blocks.iter().enumerate() {
            for (&g, v) in self.space.element_dofs(t).iter().zip(b) {
                rhs[g] += v;
            }
        }
        rhs
    }
}

pub fn validate_parameters(lambda: f64, p: f64) -> Result<(), SolveError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(SolveError::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(SolveError::InvalidParameter(format!("p must be positive, got {p}")));
    }
    Ok(())
}

pub fn assemble_stiffness(space: &Space) -> Result<CsrMatrix, SolveError> {
    Ok(Assembler::new(space)?.stiffness())
}

pub fn assemble_weighted_mass(space: &Space, w: &Field, lambda: f64, p: f64) -> Result<CsrMatrix, SolveError> {
    validate_parameters(lambda, p)?;
    Assembler::new(space)?.weighted_mass(w, lambda, p)
}

pub fn assemble_load(space: &Space, f: &(dyn Fn(Point) -> f64 + Sync)) -> Result<Vec<f64>, SolveError> {
    Ok(Assembler::new(space)?.load(f))
}

/// Eliminates the clamped DOFs symmetrically: zero rows and columns, unit
/// diagonal, zero right-hand side. Returns the constrained DOF ids.
pub fn apply_clamped_bc(matrix: &mut CsrMatrix, rhs: &mut [f64], dofs: &DofMap) -> Vec<usize> {
    let fixed = &dofs.constrained;
    let constrained: Vec<usize> = (0..dofs.n_dofs).filter(|&i| fixed[i]).collect();
    if constrained.is_empty() {
        return constrained;
    }
    for i in 0..matrix.dim() {
        let (cols, _) = matrix.row(i);
        let cols = cols.to_vec();
        let row_fixed = fixed[i];
        for j in cols {
            if row_fixed || fixed[j] {
                let k = matrix.slot(i, j).unwrap();
                matrix.values_mut()[k] = if i == j { 1.0 } else { 0.0 };
            }
        }
    }
    for &i in &constrained {
        rhs[i] = 0.0;
    }
    constrained
}
