//! Solve, estimate, mark, adapt, repeat.

use std::collections::BTreeSet;
use std::fmt;

use crate::elements::{Field, Space};
use crate::error::SolveError;
use crate::estimators::{Indicators, Source};
use crate::mesh::{coarsen_with_map, refine, Mesh};
use crate::solver::{FixedPointSolver, SolveReport, SolverConfig, StopMode};

/// Mean-based marking: refine where `η^D_K > alpha·mean`, coarsen where `η^D_K < beta·mean`.
pub fn mark(eta_d: &[f64], alpha: f64, beta: f64) -> (BTreeSet<usize>, BTreeSet<usize>) {
    if eta_d.is_empty() {
        return (BTreeSet::new(), BTreeSet::new());
    }
    let mean = eta_d.iter().sum::<f64>() / eta_d.len() as f64;
    let refine = (0..eta_d.len()).filter(|&k| eta_d[k] > alpha * mean).collect();
    let coarsen = (0..eta_d.len()).filter(|&k| eta_d[k] < beta * mean).collect();
    (refine, coarsen)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptConfig {
    /// Stop once the global `η^D` drops to this value.
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Number of solves, the first on the initial mesh.
    pub max_rounds: usize,
    pub solver: SolverConfig,
    /// Start each round from the previous solution instead of the initial guess.
    pub transfer: bool,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig {
            epsilon: 1e-3,
            alpha: 1.5,
            beta: 0.1,
            max_rounds: 4,
            solver: SolverConfig {
                stop: StopMode::Indicator,
                ..SolverConfig::default()
            },
            transfer: true,
        }
    }
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.epsilon > 0.0) {
            return Err(SolveError::InvalidParameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(0.0 < self.beta && self.beta < 1.0 && 1.0 < self.alpha) {
            return Err(SolveError::InvalidParameter(format!(
                "need 0 < beta < 1 < alpha, got beta = {}, alpha = {}",
                self.beta, self.alpha
            )));
        }
        if self.max_rounds == 0 {
            return Err(SolveError::InvalidParameter("max_rounds must be at least 1".into()));
        }
        self.solver.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptStop {
    Tolerance,
    MaxRounds,
    /// Nothing was marked, so another round would repeat the last one.
    NoMarks,
    Diverged,
}

impl fmt::Display for AdaptStop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdaptStop::Tolerance => "tolerance",
            AdaptStop::MaxRounds => "max_rounds",
            AdaptStop::NoMarks => "no_marks",
            AdaptStop::Diverged => "diverged",
        })
    }
}

#[derive(Debug, Clone)]
pub struct RoundReport {
    /// 1-based.
    pub round: usize,
    pub mesh: Mesh,
    pub field: Field,
    pub n_dofs: usize,
    pub solve: SolveReport,
    pub indicators: Indicators,
    pub refined: usize,
    pub coarsened: usize,
}

impl RoundReport {
    pub fn n_triangles(&self) -> usize {
        self.mesh.n_triangles()
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }
}

#[derive(Debug, Clone)]
pub struct AdaptResult {
    pub rounds: Vec<RoundReport>,
    pub stop: AdaptStop,
}

impl AdaptResult {
    pub fn final_round(&self) -> &RoundReport {
        self.rounds.last().expect("at least one round")
    }

    pub fn meshes(&self) -> impl Iterator<Item = &Mesh> {
        self.rounds.iter().map(|r| &r.mesh)
    }
}

/// Runs the adaptive loop from `mesh`. An inner divergence ends the loop with
/// [`AdaptStop::Diverged`] and keeps the diverged round in the report.
pub fn adaptive_solve(mesh: &Mesh, config: &AdaptConfig, f: &Source<'_>) -> Result<AdaptResult, SolveError> {
    config.validate()?;
    let solver_cfg = SolverConfig {
        always_estimate: true,
        ..config.solver.clone()
    };
    let mut mesh = mesh.clone();
    let mut carried: Option<(Space, Field)> = None;
    let mut rounds = Vec::new();
    let mut stop = AdaptStop::MaxRounds;
    for round in 1..=config.max_rounds {
        let space = Space::new(&mesh, solver_cfg.kind)?;
        let solver = FixedPointSolver::new(&space, solver_cfg.clone(), f)?;
        let u0 = match &carried {
            Some((old, u)) if config.transfer => space.transfer(old, u)?,
            _ => solver.initial_guess(),
        };
        let (u, report) = solver.solve_from(u0)?;
        let indicators = report.indicators.clone().expect("indicators are always computed");
        log::info!(
            "round {round}: {} triangles, {} dofs, eta_D = {:e}, eta_L = {:e}, {}",
            mesh.n_triangles(),
            space.n_dofs(),
            indicators.eta_d,
            indicators.eta_l,
            report.cause
        );
        let diverged = !report.converged();
        let mut record = RoundReport {
            round,
            mesh: mesh.clone(),
            field: u.clone(),
            n_dofs: space.n_dofs(),
            solve: report,
            indicators,
            refined: 0,
            coarsened: 0,
        };
        if diverged {
            rounds.push(record);
            stop = AdaptStop::Diverged;
            break;
        }
        if record.indicators.eta_d <= config.epsilon {
            rounds.push(record);
            stop = AdaptStop::Tolerance;
            break;
        }
        if round == config.max_rounds {
            rounds.push(record);
            break;
        }
        let (to_refine, to_coarsen) = mark(&record.indicators.eta_d_values(), config.alpha, config.beta);
        if to_refine.is_empty() && to_coarsen.is_empty() {
            rounds.push(record);
            stop = AdaptStop::NoMarks;
            break;
        }
        let (coarse, map) = coarsen_with_map(&mesh, &to_coarsen);
        let remapped: BTreeSet<usize> = to_refine.iter().filter_map(|&t| map[t]).collect();
        let next = refine(&coarse, &remapped);
        record.refined = to_refine.len();
        record.coarsened = map.iter().filter(|m| m.is_none()).count();
        rounds.push(record);
        carried = Some((space, u));
        mesh = next;
    }
    Ok(AdaptResult { rounds, stop })
}
