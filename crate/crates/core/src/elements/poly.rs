//! Dense bivariate polynomials of total degree at most 5.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

pub const MAX_DEGREE: usize = 5;
const N: usize = (MAX_DEGREE + 1) * (MAX_DEGREE + 2) / 2;

/// Index of the monomial `x^i y^j`.
const fn idx(i: usize, j: usize) -> usize {
    let n = i + j;
    n * (n + 1) / 2 + j
}

/// Value and derivatives up to third order at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 2],
    /// `[xx, xy, yy]`
    pub hess: [f64; 3],
    /// `[xxx, xxy, xyy, yyy]`
    pub third: [f64; 4],
}

impl Jet {
    pub fn laplacian(&self) -> f64 {
        self.hess[0] + self.hess[2]
    }

    pub fn grad_laplacian(&self) -> [f64; 2] {
        [self.third[0] + self.third[2], self.third[1] + self.third[3]]
    }

    pub fn axpy(&mut self, a: f64, x: &Jet) {
        self.value += a * x.value;
        for k in 0..2 {
            self.grad[k] += a * x.grad[k];
        }
        for k in 0..3 {
            self.hess[k] += a * x.hess[k];
        }
        for k in 0..4 {
            self.third[k] += a * x.third[k];
        }
    }
}

/// Polynomial in `(x, y)`; callers choose the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poly {
    c: [f64; N],
    deg: usize,
}

impl Default for Poly {
    fn default() -> Self {
        Poly::zero()
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly { c: [0.0; N], deg: 0 }
    }

    pub fn constant(a: f64) -> Self {
        let mut p = Poly::zero();
        p.c[0] = a;
        p
    }

    /// `a + bx x + by y`
    pub fn affine(a: f64, bx: f64, by: f64) -> Self {
        let mut p = Poly::constant(a);
        p.c[idx(1, 0)] = bx;
        p.c[idx(0, 1)] = by;
        p.deg = 1;
        p
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > MAX_DEGREE {
            0.0
        } else {
            self.c[idx(i, j)]
        }
    }

    pub fn powi(self, k: u32) -> Poly {
        (0..k).fold(Poly::constant(1.0), |acc, _| acc * self)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.jet(x, y).value
    }

    pub fn jet(&self, x: f64, y: f64) -> Jet {
        let d = self.deg;
        let mut px = [1.0; MAX_DEGREE + 1];
        let mut py = [1.0; MAX_DEGREE + 1];
        for k in 1..=d {
            px[k] = px[k - 1] * x;
            py[k] = py[k - 1] * y;
        }
        // p(i) = x^(i-k) scaled by the falling factorial, zero when i < k
        let fall = |i: usize, k: usize| -> f64 { ((i + 1 - k)..=i).map(|m| m as f64).product() };
        let pw = |arr: &[f64; MAX_DEGREE + 1], i: usize, k: usize| -> f64 {
            if i < k {
                0.0
            } else {
                fall(i, k) * arr[i - k]
            }
        };
        let mut jet = Jet::default();
        for n in 0..=d {
            for j in 0..=n {
                let i = n - j;
                let c = self.c[idx(i, j)];
                if c == 0.0 {
                    continue;
                }
                jet.value += c * px[i] * py[j];
                jet.grad[0] += c * pw(&px, i, 1) * py[j];
                jet.grad[1] += c * px[i] * pw(&py, j, 1);
                jet.hess[0] += c * pw(&px, i, 2) * py[j];
                jet.hess[1] += c * pw(&px, i, 1) * pw(&py, j, 1);
                jet.hess[2] += c * px[i] * pw(&py, j, 2);
                jet.third[0] += c * pw(&px, i, 3) * py[j];
                jet.third[1] += c * pw(&px, i, 2) * pw(&py, j, 1);
                jet.third[2] += c * pw(&px, i, 1) * pw(&py, j, 2);
                jet.third[3] += c * px[i] * pw(&py, j, 3);
            }
        }
        jet
    }

    /// True when every coefficient of degree `>= k` vanishes (up to `tol`).
    pub fn vanishes_from_degree(&self, k: usize, tol: f64) -> bool {
        (k..=MAX_DEGREE).all(|n| (0..=n).all(|j| self.c[idx(n - j, j)].abs() <= tol))
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, o: Poly) -> Poly {
        self += o;
        self
    }
}

impl AddAssign for Poly {
    fn add_assign(&mut self, o: Poly) {
        for k in 0..N {
            self.c[k] += o.c[k];
        }
        self.deg = self.deg.max(o.deg);
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, o: Poly) -> Poly {
        self + (-o)
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(mut self) -> Poly {
        self.c.iter_mut().for_each(|c| *c = -*c);
        self
    }
}

impl Mul<f64> for Poly {
    type Output = Poly;
    fn mul(mut self, a: f64) -> Poly {
        self.c.iter_mut().for_each(|c| *c *= a);
        self
    }
}

impl Mul<Poly> for f64 {
    type Output = Poly;
    fn mul(self, p: Poly) -> Poly {
        p * self
    }
}

impl Add<f64> for Poly {
    type Output = Poly;
    fn add(mut self, a: f64) -> Poly {
        self.c[0] += a;
        self
    }
}

impl Sub<f64> for Poly {
    type Output = Poly;
    fn sub(self, a: f64) -> Poly {
        self + (-a)
    }
}

impl Add<Poly> for f64 {
    type Output = Poly;
    fn add(self, p: Poly) -> Poly {
        p + self
    }
}

impl Sub<Poly> for f64 {
    type Output = Poly;
    fn sub(self, p: Poly) -> Poly {
        -p + self
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, o: Poly) -> Poly {
        let deg = self.deg + o.deg;
        assert!(deg <= MAX_DEGREE, "polynomial degree {deg} exceeds {MAX_DEGREE}");
        let mut out = Poly::zero();
        out.deg = deg;
        for n1 in 0..=self.deg {
            for j1 in 0..=n1 {
                let a = self.c[idx(n1 - j1, j1)];
                if a == 0.0 {
                    continue;
                }
                for n2 in 0..=o.deg {
                    for j2 in 0..=n2 {
                        let b = o.c[idx(n2 - j2, j2)];
                        out.c[idx(n1 - j1 + n2 - j2, j1 + j2)] += a * b;
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_jet() {
        let x = Poly::affine(0.0, 1.0, 0.0);
        let y = Poly::affine(0.0, 0.0, 1.0);
        // p = x^3 y + 2 y^2 - 1
        let p = x.powi(3) * y + 2.0 * y * y - 1.0;
        let j = p.jet(2.0, 3.0);
        assert_eq!(j.value, 8.0 * 3.0 + 18.0 - 1.0);
        assert_eq!(j.grad, [3.0 * 4.0 * 3.0, 8.0 + 12.0]);
        assert_eq!(j.hess, [6.0 * 2.0 * 3.0, 3.0 * 4.0, 4.0]);
        assert_eq!(j.third, [18.0, 12.0, 0.0, 0.0]);
        assert_eq!(j.laplacian(), 40.0);
        assert!(p.vanishes_from_degree(5, 0.0));
        assert!(!p.vanishes_from_degree(4, 0.0));
    }

    #[test]
    fn product_matches_pointwise() {
        let a = Poly::affine(0.3, -1.2, 0.7);
        let b = Poly::affine(-0.5, 0.4, 2.0).powi(2);
        let (x, y) = (0.37, -0.81);
        assert!(((a * b).eval(x, y) - a.eval(x, y) * b.eval(x, y)).abs() < 1e-14);
        assert_eq!((a * b).degree(), 3);
    }
}
