//! Parameter sweeps: the (λ, p) error grid and the estimator-versus-error table.

use rayon::prelude::*;

use crate::elements::Space;
use crate::error::SolveError;
use crate::estimators::effectivity;
use crate::mesh::{unit_square, Mesh};
use crate::solver::{FixedPointSolver, SolverConfig, StopCause};

use super::cases::{CaseKind, ManufacturedCase};
use super::norms::error_norms;

pub const TAB2_LAMBDAS: [f64; 10] = [1e-1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10];
pub const TAB2_PS: [f64; 4] = [1.0, 2.0, 3.0, 10.0];
pub const TAB5_H: [f64; 4] = [0.25, 0.1875, 0.125, 0.0625];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tab2Cell {
    pub iterations: usize,
    pub cause: StopCause,
    /// `None` unless the run converged.
    pub err_h2: Option<f64>,
    /// Last contraction ratio.
    pub q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tab2 {
    pub lambdas: Vec<f64>,
    pub ps: Vec<f64>,
    /// `cells[i][j]` is `(lambdas[i], ps[j])`.
    pub cells: Vec<Vec<Tab2Cell>>,
}

impl Tab2 {
    pub fn cell(&self, lambda: f64, p: f64) -> Option<&Tab2Cell> {
        let i = self.lambdas.iter().position(|&l| l == lambda)?;
        let j = self.ps.iter().position(|&q| q == p)?;
        Some(&self.cells[i][j])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda");
        for p in &self.ps {
            s.push_str(&format!(",p={p}"));
        }
        s.push('\n');
        for (l, row) in self.lambdas.iter().zip(&self.cells) {
            s.push_str(&format!("{l:e}"));
            for c in row {
                match c.err_h2 {
                    Some(e) => s.push_str(&format!(",{e:.15e}")),
                    None => s.push_str(",div"),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Polynomial case on `mesh` for every `(λ, p)` pair. Cells run in parallel;
/// the layout of the result does not depend on scheduling.
pub fn run_tab2(mesh: &Mesh, lambdas: &[f64], ps: &[f64], base: &SolverConfig) -> Result<Tab2, SolveError> {
    let space = Space::new(mesh, base.kind)?;
    let jobs: Vec<(usize, usize)> = (0..lambdas.len()).flat_map(|i| (0..ps.len()).map(move |j| (i, j))).collect();
    let results: Vec<Tab2Cell> = jobs
        .par_iter()
        .map(|&(i, j)| -> Result<Tab2Cell, SolveError> {
            let case = ManufacturedCase::polynomial(lambdas[i], ps[j]);
            let cfg = SolverConfig {
                lambda: lambdas[i],
                p: ps[j],
                ..base.clone()
            };
            let f = |x| case.source(x);
            let (u, rep) = FixedPointSolver::new(&space, cfg, &f)?.solve()?;
            let err_h2 = if rep.converged() {
                Some(error_norms(&space, &u, &case)?.h2)
            } else {
                None
            };
            Ok(Tab2Cell {
                iterations: rep.iterations(),
                cause: rep.cause,
                err_h2,
                q: rep.history.last().and_then(|r| r.q),
            })
        })
        .collect::<Result<_, _>>()?;
    let cells = results.chunks(ps.len()).map(|c| c.to_vec()).collect();
    Ok(Tab2 {
        lambdas: lambdas.to_vec(),
        ps: ps.to_vec(),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tab5Row {
    pub h: f64,
    /// Subdivisions per side of the unit square.
    pub n: usize,
    pub n_cells: usize,
    pub dofs: usize,
    pub iterations: usize,
    pub cause: StopCause,
    pub err_h2: f64,
    pub eta_d: f64,
    pub eta_l: f64,
    pub effectivity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tab5 {
    pub rows: Vec<Tab5Row>,
}

impl Tab5 {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,n,cells,dofs,iterations,status,err_H2,eta_D,eta_L,effectivity\n");
        for r in &self.rows {
            let tail = if r.cause == StopCause::Converged {
                format!(
                    "{:e},{:e},{:e},{}",
                    r.err_h2,
                    r.eta_d,
                    r.eta_l,
                    r.effectivity.map_or("n/a".into(), |e| format!("{e:e}"))
                )
            } else {
                "div,div,div,div".into()
            };
            s.push_str(&format!("{},{},{},{},{},{},{}\n", r.h, r.n, r.n_cells, r.dofs, r.iterations, r.cause, tail));
        }
        s
    }
}

/// Grid size for a nominal spacing: `round(1/h)` subdivisions per side.
pub fn grid_for_spacing(h: f64) -> usize {
    ((1.0 / h).round() as usize).max(1)
}

/// Sine case on uniform grids with nominal spacing `hs`.
pub fn run_tab5(hs: &[f64], base: &SolverConfig) -> Result<Tab5, SolveError> {
    let case = ManufacturedCase::new(CaseKind::Sine, base.lambda, base.p);
    let cfg = SolverConfig {
        always_estimate: true,
        ..base.clone()
    };
    let f = |x| case.source(x);
    let rows = hs
        .iter()
        .map(|&h| -> Result<Tab5Row, SolveError> {
            let n = grid_for_spacing(h);
            let mesh = unit_square(n);
            let space = Space::new(&mesh, cfg.kind)?;
            let (u, rep) = FixedPointSolver::new(&space, cfg.clone(), &f)?.solve()?;
            let err_h2 = error_norms(&space, &u, &case)?.h2;
            let ind = rep.indicators.clone().expect("estimated");
            Ok(Tab5Row {
                h,
                n,
                n_cells: mesh.n_cells(),
                dofs: space.n_dofs(),
                iterations: rep.iterations(),
                cause: rep.cause,
                err_h2,
                eta_d: ind.eta_d,
                eta_l: ind.eta_l,
                effectivity: effectivity(err_h2, &ind).ok(),
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(Tab5 { rows })
}
