//! Manufactured solutions on the unit square.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::elements::Smooth;
use crate::mesh::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    /// `x²(1−x)²y²(1−y)²`, clamped on the whole boundary.
    Polynomial,
    /// `sin(πx)sin(πy)`; vanishes on the boundary but its normal derivative does not.
    Sine,
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseKind::Polynomial => "poly",
            CaseKind::Sine => "sine",
        })
    }
}

impl FromStr for CaseKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "poly" | "polynomial" => Ok(CaseKind::Polynomial),
            "sine" | "sin" => Ok(CaseKind::Sine),
            _ => Err(format!("unknown case '{s}' (expected poly or sine)")),
        }
    }
}

/// Exact solution together with the source it induces for given `(λ, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedCase {
    pub kind: CaseKind,
    pub lambda: f64,
    pub p: f64,
}

fn g(t: f64) -> f64 {
    t * t * (1.0 - t) * (1.0 - t)
}

fn g1(t: f64) -> f64 {
    2.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
}

fn g2(t: f64) -> f64 {
    2.0 - 12.0 * t + 12.0 * t * t
}

fn g3(t: f64) -> f64 {
    24.0 * t - 12.0
}

impl ManufacturedCase {
    pub fn new(kind: CaseKind, lambda: f64, p: f64) -> Self {
        ManufacturedCase { kind, lambda, p }
    }

    pub fn polynomial(lambda: f64, p: f64) -> Self {
        Self::new(CaseKind::Polynomial, lambda, p)
    }

    pub fn sine(lambda: f64, p: f64) -> Self {
        Self::new(CaseKind::Sine, lambda, p)
    }

    pub fn name(&self) -> String {
        self.kind.to_string()
    }

    pub fn u(&self, p: Point) -> f64 {
        let (x, y) = (p[0], p[1]);
        match self.kind {
            CaseKind::Polynomial => g(x) * g(y),
            CaseKind::Sine => (PI * x).sin() * (PI * y).sin(),
        }
    }

    pub fn grad(&self, p: Point) -> [f64; 2] {
        let (x, y) = (p[0], p[1]);
        match self.kind {
            CaseKind::Polynomial => [g1(x) * g(y), g(x) * g1(y)],
            CaseKind::Sine => [
                PI * (PI * x).cos() * (PI * y).sin(),
                PI * (PI * x).sin() * (PI * y).cos(),
            ],
        }
    }

    pub fn laplacian(&self, p: Point) -> f64 {
        let (x, y) = (p[0], p[1]);
        match self.kind {
            CaseKind::Polynomial => g2(x) * g(y) + g(x) * g2(y),
            CaseKind::Sine => -2.0 * PI * PI * self.u(p),
        }
    }

    pub fn grad_laplacian(&self, p: Point) -> [f64; 2] {
        let (x, y) = (p[0], p[1]);
        match self.kind {
            CaseKind::Polynomial => [g3(x) * g(y) + g1(x) * g2(y), g2(x) * g1(y) + g(x) * g3(y)],
            CaseKind::Sine => {
                let d = self.grad(p);
                [-2.0 * PI * PI * d[0], -2.0 * PI * PI * d[1]]
            }
        }
    }

    pub fn bilaplacian(&self, p: Point) -> f64 {
        let (x, y) = (p[0], p[1]);
        match self.kind {
            CaseKind::Polynomial => 24.0 * g(y) + 2.0 * g2(x) * g2(y) + 24.0 * g(x),
            CaseKind::Sine => 4.0 * PI.powi(4) * self.u(p),
        }
    }

    /// `f = Δ²u + λ|u|^{2p}u`
    pub fn source(&self, p: Point) -> f64 {
        let u = self.u(p);
        self.bilaplacian(p) + self.lambda * u.abs().powf(2.0 * self.p) * u
    }

    /// Maximum of `|u|` on the square; both cases peak at the centre.
    pub fn max_abs(&self) -> f64 {
        self.u([0.5, 0.5]).abs()
    }

    /// Largest relative mismatch between the closed-form bilaplacian and a
    /// 13-point finite-difference stencil with step `h`, over `points`.
    pub fn bilaplacian_fd_defect(&self, points: &[Point], h: f64) -> f64 {
        let u = |dx: f64, dy: f64, p: Point| self.u([p[0] + dx * h, p[1] + dy * h]);
        points
            .iter()
            .map(|&p| {
                let fd = (20.0 * u(0., 0., p)
                    - 8.0 * (u(1., 0., p) + u(-1., 0., p) + u(0., 1., p) + u(0., -1., p))
                    + 2.0 * (u(1., 1., p) + u(1., -1., p) + u(-1., 1., p) + u(-1., -1., p))
                    + u(2., 0., p)
                    + u(-2., 0., p)
                    + u(0., 2., p)
                    + u(0., -2., p))
                    / h.powi(4);
                let exact = self.bilaplacian(p);
                (fd - exact).abs() / exact.abs().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

impl Smooth for ManufacturedCase {
    fn value(&self, p: Point) -> f64 {
        self.u(p)
    }
    fn gradient(&self, p: Point) -> [f64; 2] {
        self.grad(p)
    }
}
