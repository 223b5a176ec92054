//! Hsieh-Clough-Tocher basis tables, complete (12 DOFs) and reduced (9 DOFs).
//!
//! On the subtriangle `K_i` every basis function is a cubic in the barycentric
//! coordinates of the macro triangle, written with the cyclic shorthand
//! `li = λ_i`, `l1 = λ_{i+1}`, `l2 = λ_{i+2}` and the eccentricities
//! `ei = E_i`, `e1 = E_{i+1}`, `e2 = E_{i+2}`.
//!
//! Local DOF order: values at `a_0..a_2`; then for each vertex `a_j` the
//! derivatives along `a_{j+1} - a_j` and `a_{j+2} - a_j`; then (complete only)
//! the three midside derivatives `∇p(b_j)·(a_j - c_j)`, with `b_j` the midpoint
//! of side `j` and `c_j` the foot of the altitude from `a_j`.

use super::poly::Poly;
use crate::mesh::TriangleGeometry;

/// Basis functions of one subtriangle, indexed relative to `i`.
pub(crate) struct RelativeTable {
    /// `r0[r]` is the value function of vertex `i + r`.
    pub r0: [Poly; 3],
    /// `r1[r][s]` is the derivative function of vertex `i + r` along `a_{i+s} - a_{i+r}`.
    pub r1: [[Poly; 3]; 3],
    /// Midside functions, complete element only.
    pub mid: Option<[Poly; 3]>,
}

fn value_functions(li: Poly, l1: Poly, l2: Poly, ei: f64, e1: f64, e2: f64) -> [Poly; 3] {
    let r_ii = -0.5 * (e1 - e2) * li.powi(3)
        + 1.5 * (3.0 + e1) * li * li * l2
        + 1.5 * (3.0 - e2) * li * li * l1;
    let r_i1 = 0.5 * (1.0 - 2.0 * ei - e2) * li.powi(3) + l1.powi(3)
        - 1.5 * (1.0 - ei) * li * li * l2
        + 1.5 * (ei + e2) * li * li * l1
        + 3.0 * l1 * l1 * li
        + 3.0 * l1 * l1 * l2
        + 3.0 * (1.0 - ei) * li * l1 * l2;
    let r_i2 = 0.5 * (1.0 + 2.0 * ei + e1) * li.powi(3) + l2.powi(3)
        - 1.5 * (ei + e1) * li * li * l2
        - 1.5 * (1.0 + ei) * li * li * l1
        + 3.0 * l2 * l2 * l1
        + 3.0 * l2 * l2 * li
        + 3.0 * (1.0 + ei) * li * l1 * l2;
    [r_ii, r_i1, r_i2]
}

fn complete(li: Poly, l1: Poly, l2: Poly, ei: f64, e1: f64, e2: f64) -> RelativeTable {
    let l3 = li.powi(3);
    let z = Poly::zero();
    let r_i_i2 = -(1.0 + e1) / 12.0 * l3 + 0.25 * (7.0 + e1) * li * li * l2 - 0.5 * li * li * l1;
    let r_i_i1 = -(1.0 - e2) / 12.0 * l3 - 0.5 * li * li * l2 + 0.25 * (7.0 - e2) * li * li * l1;
    let r_i1_i = -(7.0 + e2) / 12.0 * l3 + 0.5 * li * li * l2 + 0.25 * (5.0 + e2) * li * li * l1
        + l1 * l1 * li
        - li * l1 * l2;
    let r_i1_i2 = (4.0 - ei) / 6.0 * l3
        - 0.25 * (3.0 - ei) * li * li * l2
        - 0.25 * (5.0 - ei) * li * li * l1
        + l1 * l1 * l2
        + 0.5 * (3.0 - ei) * li * l1 * l2;
    let r_i2_i1 = (4.0 + ei) / 6.0 * l3
        - 0.25 * (5.0 + ei) * li * li * l2
        - 0.25 * (3.0 + ei) * li * li * l1
        + l2 * l2 * l1
        + 0.5 * (3.0 + ei) * li * l1 * l2;
    let r_i2_i = -(7.0 - e1) / 12.0 * l3 + 0.25 * (5.0 - e1) * li * li * l2 + 0.5 * li * li * l1
        + l2 * l2 * li
        - li * l1 * l2;
    let p_i = 4.0 / 3.0 * l3 - 2.0 * li * li * l2 - 2.0 * li * li * l1 + 4.0 * li * l1 * l2;
    let p_i1 = -2.0 / 3.0 * l3 + 2.0 * li * li * l2;
    let p_i2 = -2.0 / 3.0 * l3 + 2.0 * li * li * l1;
    RelativeTable {
        r0: value_functions(li, l1, l2, ei, e1, e2),
        r1: [[z, r_i_i1, r_i_i2], [r_i1_i, z, r_i1_i2], [r_i2_i, r_i2_i1, z]],
        mid: Some([p_i, p_i1, p_i2]),
    }
}

fn reduced(li: Poly, l1: Poly, l2: Poly, ei: f64, e1: f64, e2: f64) -> RelativeTable {
    let l3 = li.powi(3);
    let z = Poly::zero();
    let r_i_i2 = -0.25 * (1.0 + e1) * l3 + 0.25 * (5.0 + 3.0 * e1) * li * li * l2 + 0.5 * li * li * l1;
    let r_i_i1 = -0.25 * (1.0 - e2) * l3 + 0.5 * li * li * l2 + 0.25 * (5.0 - 3.0 * e2) * li * li * l1;
    let r_i1_i = 0.25 * (1.0 - e2) * l3 - 0.5 * li * li * l2 - 0.25 * (1.0 - 3.0 * e2) * li * li * l1
        + l1 * l1 * li
        + li * l1 * l2;
    let r_i1_i2 = -0.5 * ei * l3 - 0.25 * (1.0 - 3.0 * ei) * li * li * l2
        + 0.25 * (1.0 + 3.0 * ei) * li * li * l1
        + l1 * l1 * l2
        + 0.5 * (1.0 - 3.0 * ei) * li * l1 * l2;
    let r_i2_i1 = 0.5 * ei * l3 + 0.25 * (1.0 - 3.0 * ei) * li * li * l2
        - 0.25 * (1.0 + 3.0 * ei) * li * li * l1
        + l2 * l2 * l1
        + 0.5 * (1.0 + 3.0 * ei) * li * l1 * l2;
    let r_i2_i = 0.25 * (1.0 + e1) * l3 - 0.25 * (1.0 + 3.0 * e1) * li * li * l2 - 0.5 * li * li * l1
        + l2 * l2 * li
        + li * l1 * l2;
    RelativeTable {
        r0: value_functions(li, l1, l2, ei, e1, e2),
        r1: [[z, r_i_i1, r_i_i2], [r_i1_i, z, r_i1_i2], [r_i2_i, r_i2_i1, z]],
        mid: None,
    }
}

/// Barycentric coordinates of the macro triangle as polynomials in `p - barycenter`.
pub(crate) fn lambda_polys(geom: &TriangleGeometry) -> [Poly; 3] {
    std::array::from_fn(|k| Poly::affine(1.0 / 3.0, geom.grad_lambda[k][0], geom.grad_lambda[k][1]))
}

/// Local basis on each of the three subtriangles, in the local DOF order.
/// Polynomials are in the variable `p - barycenter`.
pub(crate) fn local_basis(geom: &TriangleGeometry, complete_element: bool) -> [Vec<Poly>; 3] {
    let lam = lambda_polys(geom);
    let e = geom.eccentricity;
    std::array::from_fn(|i| {
        let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
        let args = (lam[i], lam[i1], lam[i2], e[i], e[i1], e[i2]);
        let table = if complete_element {
            complete(args.0, args.1, args.2, args.3, args.4, args.5)
        } else {
            reduced(args.0, args.1, args.2, args.3, args.4, args.5)
        };
        let rel = |j: usize| (j + 3 - i) % 3;
        let mut out = Vec::with_capacity(12);
        for j in 0..3 {
            out.push(table.r0[rel(j)]);
        }
        for j in 0..3 {
            out.push(table.r1[rel(j)][rel(j + 1)]);
            out.push(table.r1[rel(j)][rel(j + 2)]);
        }
        if let Some(mid) = table.mid {
            for j in 0..3 {
                out.push(mid[rel(j)]);
            }
        }
        out
    })
}
