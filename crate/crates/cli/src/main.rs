//! `hctplate`: solve, estimate, adapt and replicate experiments for the clamped
//! nonlinear plate `Δ²u + λ|u|^{2p}u = f` on C¹ HCT elements.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hct_plate::adaptivity::{adaptive_solve, AdaptConfig};
use hct_plate::elements::{ElementKind, Field, Space};
use hct_plate::estimators::{EstimatorVariant, Indicators};
use hct_plate::harness::checks::{check_conformity, check_duality, check_reproduction};
use hct_plate::harness::tables::{run_tab2, run_tab5, TAB2_LAMBDAS, TAB2_PS, TAB5_H};
use hct_plate::harness::{
    convergence_study, error_norms, export_field, write_coefficients, CaseKind, ManufacturedCase,
};
use hct_plate::mesh::{read_mesh, refine, unit_square, write_mesh, Mesh};
use hct_plate::solver::{FixedPointSolver, InitialGuess, SolveReport, SolverConfig, StopMode};

#[derive(Parser)]
#[command(name = "hctplate", version, about = "C1 HCT finite elements for the clamped nonlinear plate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed-point solve on one mesh.
    Solve(SolveArgs),
    /// Solve, then write per-triangle indicators.
    Estimate(SolveArgs),
    /// Adaptive loop: solve, estimate, mark, refine/coarsen.
    Adapt(AdaptArgs),
    /// Convergence study on uniform grids.
    Converge(ConvergeArgs),
    /// Parameter sweeps.
    Table(TableArgs),
    /// Duality, C¹ continuity and polynomial reproduction checks.
    CheckElements(CheckArgs),
    /// Mesh utilities.
    #[command(subcommand)]
    Mesh(MeshCommand),
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// Mesh file; defaults to a uniform grid of the unit square.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Subdivisions per side when no mesh file is given.
    #[arg(long, default_value_t = 8)]
    grid: usize,
    #[arg(long, default_value = "hct-c")]
    element: ElementKind,
    /// Manufactured solution that defines the source term.
    #[arg(long, default_value = "poly")]
    case: CaseKind,
    #[arg(long, default_value_t = 1e4)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
}

impl ProblemArgs {
    fn mesh(&self) -> Result<Mesh> {
        match &self.mesh {
            Some(path) => read_mesh(path).with_context(|| format!("reading {}", path.display())),
            None => Ok(unit_square(self.grid)),
        }
    }

    fn case(&self) -> ManufacturedCase {
        ManufacturedCase::new(self.case, self.lambda, self.p)
    }
}

#[derive(Args, Clone)]
struct IterationArgs {
    /// Constant initial guess.
    #[arg(long, default_value_t = 0.0069)]
    u0: f64,
    #[arg(long, default_value = "classic")]
    stop: StopMode,
    /// Classic tolerance on the H² size of the increment.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    gamma: f64,
    /// Absolute tolerance on the linearization indicator.
    #[arg(long, default_value_t = 1e-5)]
    tol_abs: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Relaxation factor in (0, 1]; 1 is the plain fixed point.
    #[arg(long, default_value_t = 1.0)]
    relax: f64,
    #[arg(long, default_value = "average")]
    estimator_variant: EstimatorVariant,
}

impl IterationArgs {
    fn config(&self, problem: &ProblemArgs) -> SolverConfig {
        SolverConfig {
            lambda: problem.lambda,
            p: problem.p,
            kind: problem.element,
            initial: InitialGuess::Constant(self.u0),
            stop: self.stop,
            tol: self.tol,
            gamma: self.gamma,
            tol_abs: self.tol_abs,
            max_iter: self.max_iter,
            relaxation: self.relax,
            variant: self.estimator_variant,
            ..SolverConfig::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    iteration: IterationArgs,
    /// Output prefix; nothing is written without it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Display subdivisions per subtriangle in the VTK/CSV samples.
    #[arg(long, default_value_t = 4)]
    samples: usize,
}

#[derive(Args)]
struct AdaptArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    iteration: IterationArgs,
    /// Stop once the global discretization indicator is below this.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    /// Number of solves including the one on the initial mesh.
    #[arg(long, default_value_t = 4)]
    max_rounds: usize,
    /// Restart every round from the initial guess instead of the previous solution.
    #[arg(long)]
    restart: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long, default_value = "poly")]
    case: CaseKind,
    #[arg(long, default_value = "hct-c")]
    element: ElementKind,
    #[arg(long, default_value_t = 1e4)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Grid sizes, coarse to fine.
    #[arg(long, value_delimiter = ',', default_value = "8,12,16")]
    grids: Vec<usize>,
    #[command(flatten)]
    iteration: IterationArgs,
    /// CSV path; printed to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Tab2,
    Tab5,
}

#[derive(Args)]
struct TableArgs {
    which: Which,
    #[arg(long, default_value = "hct-c")]
    element: ElementKind,
    /// Grid for the (λ, p) sweep.
    #[arg(long, default_value_t = 8)]
    grid: usize,
    /// λ for the estimator table.
    #[arg(long, default_value_t = 1e6)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Stop mode for the estimator table.
    #[arg(long, default_value = "indicator")]
    stop: StopMode,
    #[arg(long, default_value_t = 1e-6)]
    gamma: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long, default_value_t = 1.0)]
    relax: f64,
    #[arg(long, default_value = "average")]
    estimator_variant: EstimatorVariant,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 100)]
    triangles: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

#[derive(Subcommand)]
enum MeshCommand {
    /// Uniform N×N grid of the unit square, two triangles per cell.
    MakeSquare {
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Red-green refinement of the listed triangles (all when none are given).
    Refine {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, value_delimiter = ',')]
        triangles: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Counts, DOFs per element kind and shape regularity.
    Info {
        #[arg(long)]
        mesh: PathBuf,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Solve(a) => solve(a, false),
        Command::Estimate(a) => solve(a, true),
        Command::Adapt(a) => adapt(a),
        Command::Converge(a) => converge(a),
        Command::Table(a) => table(a),
        Command::CheckElements(a) => check_elements(a),
        Command::Mesh(m) => mesh_command(m),
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_field(path: &Path, field: &Field) -> Result<()> {
    let mut buf = Vec::new();
    write_coefficients(field, &mut buf)?;
    write_text(path, std::str::from_utf8(&buf)?)
}

fn indicator_csv(ind: &Indicators) -> String {
    let mut s = String::from("triangle_id,h_K,eta_D,eta_L,oscillation\n");
    for (t, e) in ind.elements.iter().enumerate() {
        s.push_str(&format!("{t},{:e},{:e},{:e},{:e}\n", e.h, e.eta_d, e.eta_l, e.oscillation));
    }
    s
}

fn print_summary(rep: &SolveReport) {
    println!("stop: {} after {} iterations", rep.cause, rep.iterations());
    if let Some(last) = rep.history.last() {
        println!("err_L = {:e}, q = {}", last.err_l, last.q.map_or("n/a".into(), |q| format!("{q:.4}")));
    }
}

fn solve(a: SolveArgs, estimate: bool) -> Result<()> {
    let mesh = a.problem.mesh()?;
    let case = a.problem.case();
    let mut cfg = a.iteration.config(&a.problem);
    cfg.always_estimate = estimate;
    let space = Space::new(&mesh, cfg.kind)?;
    let f = |x| case.source(x);
    let solver = FixedPointSolver::new(&space, cfg, &f)?;
    let (u, rep) = solver.solve()?;
    println!("{} triangles, {} cells, {} dofs ({})", mesh.n_triangles(), mesh.n_cells(), space.n_dofs(), space.kind());
    print_summary(&rep);
    let e = error_norms(&space, &u, &case)?;
    println!("error vs {}: L2 = {:e}, H2 = {:e}", case.name(), e.l2, e.h2);
    if let Some(ind) = &rep.indicators {
        println!("eta_D = {:e}, eta_L = {:e}", ind.eta_d, ind.eta_l);
    }
    if let Some(out) = &a.out {
        write_field(&with_suffix(out, ".field"), &u)?;
        write_text(&with_suffix(out, "_report.csv"), &rep.to_csv())?;
        export_field(&space, &u, &with_suffix(out, "_u"), a.samples)?;
        if let Some(ind) = &rep.indicators {
            write_text(&with_suffix(out, "_indicators.csv"), &indicator_csv(ind))?;
        }
    } else if estimate {
        print!("{}", indicator_csv(rep.indicators.as_ref().expect("estimated")));
    }
    Ok(())
}

fn adapt(a: AdaptArgs) -> Result<()> {
    let mesh = a.problem.mesh()?;
    let case = a.problem.case();
    let mut solver = a.iteration.config(&a.problem);
    if solver.stop == StopMode::Classic {
        solver.stop = StopMode::Indicator;
    }
    let cfg = AdaptConfig {
        epsilon: a.epsilon,
        alpha: a.alpha,
        beta: a.beta,
        max_rounds: a.max_rounds,
        solver,
        transfer: !a.restart,
    };
    let f = |x| case.source(x);
    let res = adaptive_solve(&mesh, &cfg, &f)?;
    println!("round,n_t,cells,dofs,iterations,status,eta_D,eta_L,err_H2");
    let mut summary = String::from("round,n_t,cells,dofs,iterations,status,eta_D,eta_L,err_H2\n");
    for r in &res.rounds {
        let space = Space::new(&r.mesh, cfg.solver.kind)?;
        let err = error_norms(&space, &r.field, &case)?.h2;
        let line = format!(
            "{},{},{},{},{},{},{:e},{:e},{:e}",
            r.round,
            r.n_triangles(),
            r.n_cells(),
            r.n_dofs,
            r.solve.iterations(),
            r.solve.cause,
            r.indicators.eta_d,
            r.indicators.eta_l,
            err
        );
        println!("{line}");
        summary.push_str(&line);
        summary.push('\n');
        if let Some(out) = &a.out {
            let stem = with_suffix(out, &format!("_round{}", r.round));
            write_mesh(&r.mesh, with_suffix(&stem, ".mesh"))?;
            write_field(&with_suffix(&stem, ".field"), &r.field)?;
            write_text(&with_suffix(&stem, "_indicators.csv"), &indicator_csv(&r.indicators))?;
        }
    }
    println!("stop: {}", res.stop);
    if let Some(out) = &a.out {
        write_text(&with_suffix(out, "_summary.csv"), &summary)?;
    }
    Ok(())
}

fn converge(a: ConvergeArgs) -> Result<()> {
    let case = ManufacturedCase::new(a.case, a.lambda, a.p);
    let meshes: Vec<Mesh> = a.grids.iter().map(|&n| unit_square(n)).collect();
    let problem = ProblemArgs {
        mesh: None,
        grid: 0,
        element: a.element,
        case: a.case,
        lambda: a.lambda,
        p: a.p,
    };
    let rep = convergence_study(&case, &meshes, &a.iteration.config(&problem))?;
    emit(a.out.as_deref(), &rep.to_csv())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn table(a: TableArgs) -> Result<()> {
    let base = SolverConfig {
        kind: a.element,
        max_iter: a.max_iter,
        relaxation: a.relax,
        variant: a.estimator_variant,
        gamma: a.gamma,
        ..SolverConfig::default()
    };
    let csv = match a.which {
        Which::Tab2 => run_tab2(&unit_square(a.grid), &TAB2_LAMBDAS, &TAB2_PS, &base)?.to_csv(),
        Which::Tab5 => {
            let cfg = SolverConfig {
                lambda: a.lambda,
                p: a.p,
                stop: a.stop,
                ..base
            };
            run_tab5(&TAB5_H, &cfg)?.to_csv()
        }
    };
    emit(a.out.as_deref(), &csv)
}

fn check_elements(a: CheckArgs) -> Result<()> {
    let d = check_duality(a.triangles, a.seed, 1e-9)?;
    println!("duality over {} random triangles (max |M - I|):", d.triangles);
    println!("  hct-c  {:.3e}", d.hct_complete);
    println!("  hct-r  {:.3e}", d.hct_reduced);
    println!("  bell   {:.3e} (corrected table)", d.bell_corrected);
    println!("  bell   {:.3e} (table as printed)", d.bell_literal);
    for (col, dev) in &d.bell_literal_failures {
        println!("    printed table: basis function {col} fails duality by {dev:.3e}");
    }
    let c = check_conformity(20, 10, a.seed)?;
    println!(
        "continuity: edge value {:.3e}, edge gradient {:.3e}, barycenter {:.3e}",
        c.edge_value, c.edge_gradient, c.barycenter
    );
    let r = check_reproduction(a.seed)?;
    println!(
        "reproduction: hct-c cubics {:.3e}, hct-r quadratics {:.3e}",
        r.hct_complete_cubic, r.hct_reduced_quadratic
    );
    Ok(())
}

fn mesh_command(m: MeshCommand) -> Result<()> {
    match m {
        MeshCommand::MakeSquare { n, out } => {
            if n == 0 {
                bail!("grid size must be at least 1");
            }
            let mesh = unit_square(n);
            write_mesh(&mesh, &out)?;
            println!("wrote {} ({} triangles, {} cells)", out.display(), mesh.n_triangles(), mesh.n_cells());
        }
        MeshCommand::Refine { mesh, triangles, out } => {
            let m = read_mesh(&mesh).with_context(|| format!("reading {}", mesh.display()))?;
            let marked: BTreeSet<usize> = if triangles.is_empty() {
                (0..m.n_triangles()).collect()
            } else {
                triangles.into_iter().collect()
            };
            if let Some(&bad) = marked.iter().find(|&&t| t >= m.n_triangles()) {
                bail!("triangle {bad} out of range (mesh has {})", m.n_triangles());
            }
            let r = refine(&m, &marked);
            write_mesh(&r, &out)?;
            println!("{} -> {} triangles", m.n_triangles(), r.n_triangles());
        }
        MeshCommand::Info { mesh } => {
            let m = read_mesh(&mesh).with_context(|| format!("reading {}", mesh.display()))?;
            println!("vertices {}", m.n_vertices());
            println!("triangles {}", m.n_triangles());
            println!("hct cells {}", m.n_cells());
            println!("edges {} ({} boundary)", m.n_edges(), m.n_boundary_edges());
            for kind in [ElementKind::HctComplete, ElementKind::HctReduced] {
                let s = Space::new(&m, kind)?;
                println!("dofs {kind} {} ({} free)", s.n_dofs(), s.dofs().n_free());
            }
            println!("max h/rho {:.3}", m.shape_regularity());
        }
    }
    Ok(())
}
