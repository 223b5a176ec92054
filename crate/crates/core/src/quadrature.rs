//! Symmetric quadrature on triangles (barycentric points) and Gauss-Legendre on segments.

use std::f64::consts::PI;

use crate::error::QuadratureError;
use crate::mesh::Point;

pub const MAX_TRIANGLE_DEGREE: usize = 12;
pub const MAX_EDGE_DEGREE: usize = 31;

/// Quadrature rule on a triangle. Weights are relative to the area and sum to 1.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Gauss-Legendre rule on `[0, 1]`; weights sum to 1.
#[derive(Debug, Clone)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Physical points and absolute weights on the triangle `v`.
    pub fn mapped(&self, v: [Point; 3]) -> impl Iterator<Item = (Point, f64)> + '_ {
        let area = super::mesh::signed_area(v[0], v[1], v[2]).abs();
        self.points.iter().zip(&self.weights).map(move |(l, &w)| {
            let p = [
                l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
                l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
            ];
            (p, w * area)
        })
    }

    /// Integral of `f` over the triangle `v`.
    pub fn integrate(&self, v: [Point; 3], mut f: impl FnMut(Point) -> f64) -> f64 {
        self.mapped(v).map(|(p, w)| w * f(p)).sum()
    }
}

impl EdgeRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Physical points and absolute weights on the segment `a`-`b`; weights sum to its length.
    pub fn mapped(&self, a: Point, b: Point) -> impl Iterator<Item = (Point, f64)> + '_ {
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        self.points.iter().zip(&self.weights).map(move |(&t, &w)| {
            ([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], w * len)
        })
    }
}

// orbit generators: (multiplicity class, coordinates, weight)
enum Orbit {
    Center(f64),
    /// (a, a, 1 - 2a)
    Two(f64, f64),
    /// all permutations of (a, b, 1 - a - b)
    Six(f64, f64, f64),
}

fn expand(orbits: &[Orbit], degree: usize) -> TriangleRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for o in orbits {
        match *o {
            Orbit::Center(w) => {
                points.push([1.0 / 3.0; 3]);
                weights.push(w);
            }
            Orbit::Two(a, w) => {
                let c = 1.0 - 2.0 * a;
                for p in [[a, a, c], [a, c, a], [c, a, a]] {
                    points.push(p);
                    weights.push(w);
                }
            }
            Orbit::Six(a, b, w) => {
                let c = 1.0 - a - b;
                for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
                    points.push(p);
                    weights.push(w);
                }
            }
        }
    }
    TriangleRule {
        points,
        weights,
        degree,
    }
}

fn dunavant(degree: usize) -> Option<TriangleRule> {
    use Orbit::*;
    let orbits: Vec<Orbit> = match degree {
        1 => vec![Center(1.0)],
        2 => vec![Two(1.0 / 6.0, 1.0 / 3.0)],
        4 => vec![
            Two(0.445948490915965, 0.223381589678011),
            Two(0.091576213509771, 0.109951743655322),
        ],
        5 => vec![
            Center(0.225),
            Two(0.470142064105115, 0.132394152788506),
            Two(0.101286507323456, 0.125939180544827),
        ],
        6 => vec![
            Two(0.249286745170910, 0.116786275726379),
            Two(0.063089014491502, 0.050844906370207),
            Six(0.053145049844817, 0.310352451033784, 0.082851075618374),
        ],
        8 => vec![
            Center(0.144315607677787),
            Two(0.459292588292723, 0.095091634267285),
            Two(0.170569307751760, 0.103217370534718),
            Two(0.050547228317031, 0.032458497623198),
            Six(0.008394777409958, 0.263112829634638, 0.027230314174435),
        ],
        _ => return None,
    };
    Some(expand(&orbits, degree))
}

/// Collapsed Gauss-Legendre product rule, symmetrized over the six vertex permutations.
fn conical(degree: usize) -> TriangleRule {
    let n = (degree + 2).div_ceil(2);
    let (t, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(6 * n * n);
    let mut weights = Vec::with_capacity(6 * n * n);
    for i in 0..n {
        for j in 0..n {
            let u = t[i];
            let v = t[j] * (1.0 - u);
            // reference area is 1/2; weights relative to it
            let wt = 2.0 * w[i] * w[j] * (1.0 - u) / 6.0;
            let l = [1.0 - u - v, u, v];
            for p in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                points.push([l[p[0]], l[p[1]], l[p[2]]]);
                weights.push(wt);
            }
        }
    }
    TriangleRule {
        points,
        weights,
        degree,
    }
}

/// Smallest stocked symmetric rule exact for polynomials of total degree `degree`.
pub fn triangle_rule(degree: usize) -> Result<TriangleRule, QuadratureError> {
    if !(1..=MAX_TRIANGLE_DEGREE).contains(&degree) {
        return Err(QuadratureError::DegreeOutOfRange {
            degree,
            min: 1,
            max: MAX_TRIANGLE_DEGREE,
        });
    }
    let stocked = match degree {
        3 => 4,
        7 => 8,
        d => d,
    };
    Ok(dunavant(stocked).unwrap_or_else(|| conical(degree)))
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

pub fn edge_rule(degree: usize) -> Result<EdgeRule, QuadratureError> {
    if !(1..=MAX_EDGE_DEGREE).contains(&degree) {
        return Err(QuadratureError::DegreeOutOfRange {
            degree,
            min: 1,
            max: MAX_EDGE_DEGREE,
        });
    }
    let (points, weights) = gauss_legendre((degree + 1).div_ceil(2));
    Ok(EdgeRule {
        points,
        weights,
        degree,
    })
}
