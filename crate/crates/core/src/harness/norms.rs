//! Error norms against an exact solution.

use rayon::prelude::*;

use crate::assembly::MASS_DEGREE;
use crate::elements::{Field, Space};
use crate::error::ElementError;
use crate::quadrature::triangle_rule;

use super::cases::ManufacturedCase;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    /// `‖Δ(u_e − u_h)‖_{L²}`
    pub h2: f64,
}

/// L² and Laplacian-seminorm errors, integrated per HCT subtriangle.
pub fn error_norms(space: &Space, field: &Field, case: &ManufacturedCase) -> Result<ErrorNorms, ElementError> {
    space.check(field)?;
    let rule = triangle_rule(MASS_DEGREE).expect("degree 8 rule exists");
    let (l2, h2) = (0..space.mesh().n_triangles())
        .into_par_iter()
        .map(|t| {
            let el = space.element(t);
            let mut acc = (0.0, 0.0);
            for (piece, p, w) in el.quadrature(&rule) {
                let j = space.eval_in_piece(field, t, piece, p);
                let dv = case.u(p) - j.value;
                let dl = case.laplacian(p) - j.laplacian();
                acc.0 += w * dv * dv;
                acc.1 += w * dl * dl;
            }
            acc
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(ErrorNorms {
        l2: l2.sqrt(),
        h2: h2.sqrt(),
    })
}
