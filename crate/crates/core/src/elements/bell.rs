//! Bell triangle basis on the reference triangle `(0,0), (1,0), (0,1)`.
//!
//! DOF order: for each vertex, value, `∂x`, `∂y`, `∂xx`, `∂xy`, `∂yy`.
//! The table as commonly printed contains typos; [`BellTable::Literal`] keeps
//! it verbatim, [`BellTable::Corrected`] fixes the entries listed in
//! [`CORRECTIONS`].

use super::poly::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BellTable {
    Literal,
    #[default]
    Corrected,
}

/// Basis functions (1-based `φ_{vertex,dof}`) changed by [`BellTable::Corrected`].
pub const CORRECTIONS: &[(&str, &str)] = &[
    ("φ_{2,1}", "coefficient of x̂³ inside the bracket is 6, not 1"),
    ("φ_{2,2}", "printed φ_{2,2} and φ_{2,3} are swapped"),
    ("φ_{2,3}", "printed φ_{2,2} and φ_{2,3} are swapped"),
    ("φ_{2,4}", "leading factor is 1/4, not 1/2"),
    ("φ_{3,2}", "constant inside the bracket is +6, not -6"),
];

/// The 18 basis functions as polynomials in `p - (1/3, 1/3)`.
pub fn basis(table: BellTable) -> Vec<Poly> {
    let x = Poly::affine(1.0 / 3.0, 1.0, 0.0);
    let y = Poly::affine(1.0 / 3.0, 0.0, 1.0);
    let l = 1.0 - x - y;
    let (x2, y2, l2) = (x * x, y * y, l * l);

    let v1 = [
        l2 * (10.0 * l - 15.0 * l2 + 6.0 * l2 * l + 30.0 * x * y * (x + y)),
        x * l2 * (3.0 - 2.0 * l - 3.0 * x2 + 6.0 * x * y),
        y * l2 * (3.0 - 2.0 * l - 3.0 * y2 + 6.0 * x * y),
        0.5 * l2 * x2 * (1.0 - x + 2.0 * y),
        x * y * l2,
        0.5 * l2 * y2 * (1.0 - y + 2.0 * x),
    ];
    let dx2 = 0.5 * x2 * (-8.0 * x + 14.0 * x2 - 6.0 * x2 * x - 15.0 * y2 * l);
    let dy2 = 0.5 * x2 * y * (6.0 - 4.0 * x - 3.0 * y - 3.0 * y2 + 3.0 * y * x);
    let v2 = match table {
        BellTable::Literal => [
            x2 * (10.0 * x - 15.0 * x2 + x2 * x + 15.0 * y2 * l),
            dy2,
            dx2,
            0.5 * x2 * (2.0 * x * (1.0 - x) * (1.0 - x) + 5.0 * y2 * l),
            0.5 * x2 * y * (-2.0 + 2.0 * x + y + y2 - y * x),
            0.25 * x2 * y2 * l + 0.5 * x2 * x * y2,
        ],
        BellTable::Corrected => [
            x2 * (10.0 * x - 15.0 * x2 + 6.0 * x2 * x + 15.0 * y2 * l),
            dx2,
            dy2,
            0.25 * x2 * (2.0 * x * (1.0 - x) * (1.0 - x) + 5.0 * y2 * l),
            0.5 * x2 * y * (-2.0 + 2.0 * x + y + y2 - y * x),
            0.25 * x2 * y2 * l + 0.5 * x2 * x * y2,
        ],
    };
    let c32 = match table {
        BellTable::Literal => -6.0,
        BellTable::Corrected => 6.0,
    };
    let v3 = [
        y2 * (10.0 * y - 15.0 * y2 + 6.0 * y2 * y + 15.0 * x2 * l),
        0.5 * x * y2 * (c32 - 3.0 * x - 4.0 * y - 3.0 * x2 + 3.0 * y * x),
        0.5 * y2 * (-8.0 * y + 14.0 * y2 - 6.0 * y2 * y - 15.0 * x2 * l),
        0.25 * x2 * y2 * l + 0.5 * x2 * y2 * y,
        0.5 * x * y2 * (-2.0 + x + 2.0 * y + x2 - y * x),
        0.25 * y2 * (2.0 * y * (1.0 - y) * (1.0 - y) + 5.0 * x2 * l),
    ];
    v1.into_iter().chain(v2).chain(v3).collect()
}
