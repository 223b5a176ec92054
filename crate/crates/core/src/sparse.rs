//! Compressed sparse row matrices and a Jacobi-preconditioned conjugate gradient.

use rayon::prelude::*;

use crate::error::SolveError;

const PAR_ROWS: usize = 2048;

/// Square CSR matrix with sorted column indices. Symmetric by construction
/// in this crate; storage keeps the full pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given row patterns (duplicates allowed).
    pub fn from_pattern(n: usize, mut rows: Vec<Vec<usize>>) -> Self {
        assert_eq!(rows.len(), n);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::from_pattern(n, (0..n).map(|i| vec![i]).collect());
        m.values.iter_mut().for_each(|v| *v = 1.0);
        m
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::identity(d.len());
        m.values.copy_from_slice(d);
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Storage slot of entry `(i, j)` if it is in the pattern.
    pub fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[s..e].binary_search(&j).ok().map(|k| s + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to entry `(i, j)`; panics when `(i, j)` is outside the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j).expect("entry outside sparsity pattern");
        self.values[k] += v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[s..e], &self.values[s..e])
    }

    pub fn same_pattern(&self, other: &CsrMatrix) -> bool {
        self.n == other.n && self.row_ptr == other.row_ptr && self.col_idx == other.col_idx
    }

    /// `self += a * other`; both must share the pattern.
    pub fn add_scaled(&mut self, a: f64, other: &CsrMatrix) {
        assert!(self.same_pattern(other), "patterns differ");
        self.values.iter_mut().zip(&other.values).for_each(|(x, y)| *x += a * y);
    }

    pub fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|x| *x *= a);
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A - Aᵀ| / max |A|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        let m = self.max_abs();
        if m == 0.0 {
            0.0
        } else {
            worst / m
        }
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        let row = |i: usize| -> f64 {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
            self.col_idx[s..e].iter().zip(&self.values[s..e]).map(|(&j, &v)| v * x[j]).sum()
        };
        if self.n >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = row(i));
        } else {
            y.iter_mut().enumerate().for_each(|(i, yi)| *yi = row(i));
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// `xᵀ A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        d
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    if a.len() >= PAR_ROWS {
        a.par_iter().zip(b).map(|(x, y)| x * y).sum()
    } else {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    /// Final relative residual `|b - Ax| / |b|`.
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradient for SPD `a`, started from zero.
///
/// Stops when the relative residual drops to `tol`. Returns the best iterate
/// inside the error if `max_iter` is exhausted.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, CgReport), SolveError> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((
            x,
            CgReport {
                iterations: 0,
                residual: 0.0,
            },
        ));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut best = (f64::INFINITY, x.clone());
    for it in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        x.iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
        r.iter_mut().zip(&ap).for_each(|(r, ap)| *r -= alpha * ap);
        let res = norm(&r) / bnorm;
        if res <= tol {
            return Ok((
                x,
                CgReport {
                    iterations: it,
                    residual: res,
                },
            ));
        }
        if res < best.0 {
            best = (res, x.clone());
        }
        z.iter_mut().zip(&r).zip(&inv_diag).for_each(|((z, r), d)| *z = r * d);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
    }
    Err(SolveError::CgNotConverged {
        iterations: max_iter,
        residual: best.0,
        best: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solves_in_one_step() {
        let a = CsrMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 0.0];
        let (x, rep) = solve_spd(&a, &b, 1e-12, 10).unwrap();
        assert_eq!(x, b);
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn diagonal_system() {
        let d: Vec<f64> = (1..=50).map(|i| i as f64).collect();
        let a = CsrMatrix::from_diagonal(&d);
        let (x, _) = solve_spd(&a, &vec![1.0; 50], 1e-12, 100).unwrap();
        for (i, xi) in x.iter().enumerate() {
            assert!((xi - 1.0 / (i + 1) as f64).abs() < 1e-12);
        }
    }

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let rows = (0..n)
            .map(|i| (i.saturating_sub(1)..(i + 2).min(n)).collect())
            .collect();
        let mut a = CsrMatrix::from_pattern(n, rows);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
                a.add(i - 1, i, -1.0);
            }
        }
        a
    }

    #[test]
    fn tridiagonal_system_and_symmetry() {
        let a = laplacian_1d(40);
        assert_eq!(a.symmetry_defect(), 0.0);
        let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let (x, rep) = solve_spd(&a, &b, 1e-12, 200).unwrap();
        let r: Vec<f64> = a.matvec(&x).iter().zip(&b).map(|(ax, b)| ax - b).collect();
        assert!(norm(&r) <= 1e-11 * norm(&b));
        assert!(rep.iterations <= 40);
    }

    #[test]
    fn iteration_cap_returns_best_iterate() {
        let a = laplacian_1d(100);
        let b = vec![1.0; 100];
        match solve_spd(&a, &b, 1e-14, 3) {
            Err(SolveError::CgNotConverged { iterations, residual, best }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-14 && residual.is_finite());
                assert_eq!(best.len(), 100);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn pattern_queries() {
        let mut a = CsrMatrix::from_pattern(3, vec![vec![2, 0, 0], vec![1], vec![0, 2]]);
        assert_eq!(a.nnz(), 5);
        a.add(0, 2, 4.0);
        assert_eq!(a.get(0, 2), 4.0);
        assert_eq!(a.get(1, 0), 0.0);
        assert!(a.slot(1, 2).is_none());
        assert!(a.symmetry_defect() > 0.0);
    }
}
