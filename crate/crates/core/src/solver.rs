//! Fixed-point iteration for `Δ²u + λ|u|^{2p}u = f` with clamped boundary.
//!
//! Each step freezes the nonlinear coefficient at the previous iterate and
//! solves the SPD system `(A + M(u^n)) u^{n+1} = b`.

use std::fmt;
use std::str::FromStr;

use crate::assembly::{apply_clamped_bc, validate_parameters, Assembler};
use crate::elements::{ElementKind, Field, Space};
use crate::error::SolveError;
use crate::estimators::{Estimator, EstimatorVariant, Indicators, Source};
use crate::sparse::{solve_spd, CgReport, CsrMatrix};

pub const DEFAULT_U0: f64 = 0.0069;
/// An increment above this H² size counts as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e6;
/// Consecutive increases of `err_L` that count as divergence.
pub const DIVERGENCE_STREAK: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopMode {
    /// `err_L <= tol`
    #[default]
    Classic,
    /// `eta_L <= gamma * eta_D`
    Indicator,
    /// `eta_L <= tol_abs`
    Absolute,
}

impl fmt::Display for StopMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopMode::Classic => "classic",
            StopMode::Indicator => "indicator",
            StopMode::Absolute => "absolute",
        })
    }
}

impl FromStr for StopMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "classic" => Ok(StopMode::Classic),
            "indicator" => Ok(StopMode::Indicator),
            "absolute" => Ok(StopMode::Absolute),
            _ => Err(format!("unknown stop mode '{s}' (expected classic, indicator or absolute)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialGuess {
    Zero,
    /// Interpolant of a constant, boundary DOFs included.
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub lambda: f64,
    pub p: f64,
    pub kind: ElementKind,
    pub initial: InitialGuess,
    pub stop: StopMode,
    /// Classic tolerance on `err_L`.
    pub tol: f64,
    pub gamma: f64,
    pub tol_abs: f64,
    pub max_iter: usize,
    pub cg_tol: f64,
    /// 0 selects `20 * n_dofs`.
    pub cg_max_iter: usize,
    pub variant: EstimatorVariant,
    /// Compute indicators every iteration even when the stop mode does not need them.
    pub always_estimate: bool,
    /// `u^{n+1} = ω T(u^n) + (1 − ω) u^n`; 1 is the plain fixed point.
    pub relaxation: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: 1e4,
            p: 1.0,
            kind: ElementKind::HctComplete,
            initial: InitialGuess::Constant(DEFAULT_U0),
            stop: StopMode::Classic,
            tol: 1e-7,
            gamma: 1e-6,
            tol_abs: 1e-5,
            max_iter: 100,
            cg_tol: 1e-12,
            cg_max_iter: 0,
            variant: EstimatorVariant::Average,
            always_estimate: false,
            relaxation: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        validate_parameters(self.lambda, self.p)?;
        let positive = [("tol", self.tol), ("gamma", self.gamma), ("tol_abs", self.tol_abs), ("cg_tol", self.cg_tol)];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(SolveError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(SolveError::InvalidParameter(format!(
                "relaxation must lie in (0, 1], got {}",
                self.relaxation
            )));
        }
        if self.max_iter == 0 {
            return Err(SolveError::InvalidParameter("max_iter must be at least 1".into()));
        }
        if self.kind == ElementKind::Bell {
            return Err(SolveError::InvalidParameter("bell is not available for global solves".into()));
        }
        Ok(())
    }

    fn needs_indicators(&self) -> bool {
        self.always_estimate || self.stop != StopMode::Classic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopCause {
    Converged,
    Diverged,
    MaxIter,
}

impl fmt::Display for StopCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopCause::Converged => "converged",
            StopCause::Diverged => "diverged",
            StopCause::MaxIter => "max_iter",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based: record `n` describes the step from `u^{n-1}` to `u^n`.
    pub iter: usize,
    pub err_l: f64,
    /// `err_L(n) / err_L(n-1)`
    pub q: Option<f64>,
    pub eta_d: Option<f64>,
    pub eta_l: Option<f64>,
    pub cg: CgReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub history: Vec<IterationRecord>,
    pub cause: StopCause,
    /// Indicators at the last iteration when they were computed.
    pub indicators: Option<Indicators>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.cause == StopCause::Converged
    }

    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,err_L,q_n,eta_D,eta_L\n");
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:e}"));
        for r in &self.history {
            s.push_str(&format!("{},{:e},{},{},{}\n", r.iter, r.err_l, opt(r.q), opt(r.eta_d), opt(r.eta_l)));
        }
        s
    }
}

/// Fixed-point solver bound to one space and source term.
pub struct FixedPointSolver<'a> {
    space: &'a Space,
    config: SolverConfig,
    f: &'a Source<'a>,
    assembler: Assembler<'a>,
    stiffness: CsrMatrix,
    load: Vec<f64>,
}

impl<'a> FixedPointSolver<'a> {
    pub fn new(space: &'a Space, config: SolverConfig, f: &'a Source<'a>) -> Result<Self, SolveError> {
        config.validate()?;
        if space.kind() != config.kind {
            return Err(SolveError::InvalidParameter(format!(
                "space uses {} but the configuration asks for {}",
                space.kind(),
                config.kind
            )));
        }
        let assembler = Assembler::new(space)?;
        let stiffness = assembler.stiffness();
        let load = assembler.load(f);
        Ok(FixedPointSolver {
            space,
            config,
            f,
            assembler,
            stiffness,
            load,
        })
    }

    pub fn space(&self) -> &'a Space {
        self.space
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn assembler(&self) -> &Assembler<'a> {
        &self.assembler
    }

    /// Unconstrained stiffness matrix, `uᵀAu = ‖Δu‖²`.
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn initial_guess(&self) -> Field {
        match self.config.initial {
            InitialGuess::Zero => self.space.zeros(),
            InitialGuess::Constant(c) => self.space.constant(c),
        }
    }

    /// `‖Δu‖_{L²(Ω)}`
    pub fn laplacian_norm(&self, u: &[f64]) -> f64 {
        self.stiffness.bilinear(u, u).max(0.0).sqrt()
    }

    /// One linearized solve.
    pub fn step_with_report(&self, u_n: &Field) -> Result<(Field, CgReport), SolveError> {
        self.space.check(u_n)?;
        let mut a = self.stiffness.clone();
        a.add_scaled(1.0, &self.assembler.weighted_mass(u_n, self.config.lambda, self.config.p)?);
        let mut b = self.load.clone();
        apply_clamped_bc(&mut a, &mut b, self.space.dofs());
        let cap = if self.config.cg_max_iter == 0 {
            20 * self.space.n_dofs().max(10)
        } else {
            self.config.cg_max_iter
        };
        let (x, rep) = solve_spd(&a, &b, self.config.cg_tol, cap)?;
        Ok((
            Field {
                kind: self.space.kind(),
                coeffs: x,
            },
            rep,
        ))
    }

    pub fn step(&self, u_n: &Field) -> Result<Field, SolveError> {
        Ok(self.step_with_report(u_n)?.0)
    }

    pub fn estimator(&self) -> Estimator<'_> {
        Estimator::new(
            self.space,
            self.assembler.mass_samples(),
            self.f,
            self.config.lambda,
            self.config.p,
            self.config.variant,
        )
    }

    pub fn solve(&self) -> Result<(Field, SolveReport), SolveError> {
        self.solve_from(self.initial_guess())
    }

    /// Iterates from `u0` until the configured criterion fires. Divergence is
    /// reported in the returned report, not as an error.
    pub fn solve_from(&self, u0: Field) -> Result<(Field, SolveReport), SolveError> {
        let cfg = &self.config;
        let estimator = cfg.needs_indicators().then(|| self.estimator());
        let mut u = u0;
        let mut history: Vec<IterationRecord> = Vec::new();
        let mut indicators = None;
        let mut streak = 0;
        let mut cause = StopCause::MaxIter;
        for iter in 1..=cfg.max_iter {
            let (mut next, cg) = self.step_with_report(&u)?;
            if cfg.relaxation != 1.0 {
                let w = cfg.relaxation;
                next.coeffs.iter_mut().zip(&u.coeffs).for_each(|(n, o)| *n = w * *n + (1.0 - w) * o);
            }
            let diff: Vec<f64> = next.coeffs.iter().zip(&u.coeffs).map(|(a, b)| a - b).collect();
            let err_l = self.laplacian_norm(&diff);
            let prev_err = history.last().map(|r| r.err_l);
            let q = prev_err.map(|p| err_l / p);
            let (eta_d, eta_l) = match &estimator {
                Some(est) => {
                    let ind = est.compute(&next, &u);
                    let pair = (Some(ind.eta_d), Some(ind.eta_l));
                    indicators = Some(ind);
                    pair
                }
                None => (None, None),
            };
            log::debug!("iter {iter}: err_L = {err_l:e}, q = {q:?}, eta_D = {eta_d:?}, eta_L = {eta_l:?}");
            history.push(IterationRecord {
                iter,
                err_l,
                q,
                eta_d,
                eta_l,
                cg,
            });
            u = next;

            if !err_l.is_finite() || err_l > DIVERGENCE_LIMIT {
                cause = StopCause::Diverged;
                break;
            }
            streak = match prev_err {
                Some(p) if err_l > p => streak + 1,
                _ => 0,
            };
            if streak >= DIVERGENCE_STREAK {
                cause = StopCause::Diverged;
                break;
            }
            let done = match cfg.stop {
                StopMode::Classic => err_l <= cfg.tol,
                StopMode::Indicator => eta_l.unwrap() <= cfg.gamma * eta_d.unwrap(),
                StopMode::Absolute => eta_l.unwrap() <= cfg.tol_abs,
            };
            if done {
                cause = StopCause::Converged;
                break;
            }
        }
        Ok((
            u,
            SolveReport {
                history,
                cause,
                indicators,
            },
        ))
    }

    /// `J(u) = ½∫|Δu|² + λ/(2p+2) ∫|u|^{2p}u² − ∫ f u`
    pub fn energy(&self, u: &Field) -> Result<f64, SolveError> {
        energy(self.space, u, self.config.lambda, self.config.p, self.f)
    }
}

pub fn fixed_point_step(space: &Space, config: &SolverConfig, u_n: &Field, f: &Source<'_>) -> Result<Field, SolveError> {
    FixedPointSolver::new(space, config.clone(), f)?.step(u_n)
}

pub fn fixed_point_solve(space: &Space, config: &SolverConfig, f: &Source<'_>) -> Result<(Field, SolveReport), SolveError> {
    FixedPointSolver::new(space, config.clone(), f)?.solve()
}

pub fn energy(space: &Space, u: &Field, lambda: f64, p: f64, f: &Source<'_>) -> Result<f64, SolveError> {
    space.check(u)?;
    let samples = crate::assembly::QuadCache::new(space, crate::assembly::MASS_DEGREE);
    let mut j = 0.0;
    for (t, s) in samples.elements.iter().enumerate() {
        let (vals, laps) = samples.field_at(space, u, t);
        for q in 0..s.len() {
            let v = vals[q];
            j += s.weights[q]
                * (0.5 * laps[q] * laps[q] + lambda / (2.0 * p + 2.0) * v.abs().powf(2.0 * p) * v * v
                    - f(s.points[q]) * v);
        }
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::unit_square;

    fn plate_source(p: crate::mesh::Point) -> f64 {
        let g = |t: f64| t * t * (1.0 - t) * (1.0 - t);
        let g2 = |t: f64| 2.0 - 12.0 * t + 12.0 * t * t;
        let (x, y) = (p[0], p[1]);
        24.0 * g(y) + 2.0 * g2(x) * g2(y) + 24.0 * g(x)
    }

    #[test]
    fn tiny_lambda_decouples() {
        let space = Space::new(&unit_square(3), ElementKind::HctComplete).unwrap();
        let cfg = SolverConfig {
            lambda: 1e-30,
            ..Default::default()
        };
        let solver = FixedPointSolver::new(&space, cfg, &plate_source).unwrap();
        let u1 = solver.step(&solver.initial_guess()).unwrap();
        let u2 = solver.step(&u1).unwrap();
        let d: Vec<f64> = u1.coeffs.iter().zip(&u2.coeffs).map(|(a, b)| a - b).collect();
        assert!(solver.laplacian_norm(&d) <= 1e-10);
    }

    #[test]
    fn fixed_point_is_stationary_and_energy_decreases() {
        let space = Space::new(&unit_square(4), ElementKind::HctComplete).unwrap();
        let f = |p: crate::mesh::Point| plate_source(p) + 1e4 * {
            let g = |t: f64| t * t * (1.0 - t) * (1.0 - t);
            (g(p[0]) * g(p[1])).powi(3)
        };
        let cfg = SolverConfig {
            tol: 1e-11,
            ..Default::default()
        };
        let solver = FixedPointSolver::new(&space, cfg, &f).unwrap();
        let (u, rep) = solver.solve().unwrap();
        assert!(rep.converged(), "{:?}", rep.cause);
        let again = solver.step(&u).unwrap();
        let d: Vec<f64> = u.coeffs.iter().zip(&again.coeffs).map(|(a, b)| a - b).collect();
        assert!(solver.laplacian_norm(&d) < 1e-9);
        // the constant start is not clamped, so compare against the zero field
        let j0 = solver.energy(&space.zeros()).unwrap();
        let j1 = solver.energy(&u).unwrap();
        assert!(j1 < j0);
        // boundary DOFs are exactly zero
        for (i, &c) in space.dofs().constrained.iter().enumerate() {
            if c {
                assert_eq!(u.coeffs[i], 0.0);
            }
        }
        // geometric tail
        let qs: Vec<f64> = rep.history.iter().filter_map(|r| r.q).collect();
        assert!(qs.iter().rev().take(3).all(|&q| q < 1.0));
    }

    #[test]
    fn energy_signs() {
        let space = Space::new(&unit_square(2), ElementKind::HctReduced).unwrap();
        assert_eq!(energy(&space, &space.zeros(), 1.0, 1.0, &|p| p[0]).unwrap(), 0.0);
        let bump = space
            .interpolate(&crate::elements::FnSmooth::new(
                |p: crate::mesh::Point| (p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1])).powi(2),
                |_| [0.0, 0.0],
            ))
            .unwrap();
        assert!(energy(&space, &bump, 1.0, 1.0, &|_| 0.0).unwrap() > 0.0);
    }

    #[test]
    fn invalid_configuration() {
        let space = Space::new(&unit_square(1), ElementKind::HctComplete).unwrap();
        for cfg in [
            SolverConfig { lambda: 0.0, ..Default::default() },
            SolverConfig { p: -1.0, ..Default::default() },
            SolverConfig { max_iter: 0, ..Default::default() },
            SolverConfig { relaxation: 1.5, ..Default::default() },
            SolverConfig { kind: ElementKind::HctReduced, ..Default::default() },
        ] {
            assert!(FixedPointSolver::new(&space, cfg, &|_| 1.0).is_err());
        }
    }

    #[test]
    fn parse_stop_modes() {
        assert_eq!("indicator".parse::<StopMode>().unwrap(), StopMode::Indicator);
        assert!("newton".parse::<StopMode>().is_err());
    }
}
