//! Mesh-sequence convergence studies.

use crate::elements::Space;
use crate::error::SolveError;
use crate::mesh::Mesh;
use crate::solver::{FixedPointSolver, SolverConfig};

use super::cases::ManufacturedCase;
use super::norms::error_norms;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    /// Largest triangle diameter.
    pub h: f64,
    pub n_triangles: usize,
    pub n_cells: usize,
    pub dofs: usize,
    pub iterations: usize,
    /// `None` when the fixed point diverged.
    pub result: Option<RowValues>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowValues {
    pub err_l2: f64,
    pub err_h2: f64,
    pub eta_d: f64,
    pub eta_l: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub case: String,
    pub rows: Vec<ConvergenceRow>,
    pub slope_l2: Option<f64>,
    pub slope_h2: Option<f64>,
    pub slope_eta_d: Option<f64>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,n_t,cells,dofs,iterations,err_L2,err_H2,eta_D,eta_L\n");
        for r in &self.rows {
            let tail = match r.result {
                Some(v) => format!("{:e},{:e},{:e},{:e}", v.err_l2, v.err_h2, v.eta_d, v.eta_l),
                None => "div,div,div,div".to_string(),
            };
            s.push_str(&format!("{},{},{},{},{},{}\n", r.h, r.n_triangles, r.n_cells, r.dofs, r.iterations, tail));
        }
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        s.push_str(&format!(
            "# slopes: L2 {}, H2 {}, eta_D {}\n",
            opt(self.slope_l2),
            opt(self.slope_h2),
            opt(self.slope_eta_d)
        ));
        s
    }
}

/// Least-squares slope of `log y` against `log x`; needs two or more positive points.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Solves on every mesh (coarse to fine) and fits error rates. Diverged rows
/// are kept in the report and left out of the fit.
pub fn convergence_study(
    case: &ManufacturedCase,
    meshes: &[Mesh],
    config: &SolverConfig,
) -> Result<ConvergenceReport, SolveError> {
    if meshes.len() < 3 {
        return Err(SolveError::InvalidParameter(format!(
            "a convergence study needs at least 3 meshes, got {}",
            meshes.len()
        )));
    }
    if meshes.windows(2).any(|w| w[1].max_diameter() >= w[0].max_diameter()) {
        return Err(SolveError::InvalidParameter("meshes must be ordered by strictly decreasing h".into()));
    }
    let cfg = SolverConfig {
        lambda: case.lambda,
        p: case.p,
        always_estimate: true,
        ..config.clone()
    };
    let f = |x| case.source(x);
    let mut rows = Vec::new();
    for mesh in meshes {
        let space = Space::new(mesh, cfg.kind)?;
        let solver = FixedPointSolver::new(&space, cfg.clone(), &f)?;
        let (u, rep) = solver.solve()?;
        let result = if rep.converged() {
            let e = error_norms(&space, &u, case)?;
            let ind = rep.indicators.as_ref().expect("estimated");
            Some(RowValues {
                err_l2: e.l2,
                err_h2: e.h2,
                eta_d: ind.eta_d,
                eta_l: ind.eta_l,
            })
        } else {
            None
        };
        log::info!("h = {:.4}: {} dofs, {}", mesh.max_diameter(), space.n_dofs(), rep.cause);
        rows.push(ConvergenceRow {
            h: mesh.max_diameter(),
            n_triangles: mesh.n_triangles(),
            n_cells: mesh.n_cells(),
            dofs: space.n_dofs(),
            iterations: rep.iterations(),
            result,
        });
    }
    let fit = |pick: fn(&RowValues) -> f64| {
        loglog_slope(&rows.iter().filter_map(|r| r.result.as_ref().map(|v| (r.h, pick(v)))).collect::<Vec<_>>())
    };
    Ok(ConvergenceReport {
        case: case.name(),
        slope_l2: fit(|v| v.err_l2),
        slope_h2: fit(|v| v.err_h2),
        slope_eta_d: fit(|v| v.eta_d),
        rows,
    })
}
