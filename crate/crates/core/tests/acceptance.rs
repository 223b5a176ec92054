//! Acceptance checks 1-8. Prints one PASS/FAIL line per check and exits
//! non-zero when any check fails.

use std::collections::{BTreeSet, HashSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hct_plate::adaptivity::{adaptive_solve, AdaptConfig};
use hct_plate::assembly::{apply_clamped_bc, Assembler};
use hct_plate::elements::{ElementKind, Space};
use hct_plate::estimators::{aggregate, EstimatorVariant};
use hct_plate::harness::checks::{check_conformity, check_duality, check_reproduction};
use hct_plate::harness::tables::{run_tab2, run_tab5, TAB2_LAMBDAS, TAB2_PS};
use hct_plate::harness::{convergence_study, ManufacturedCase};
use hct_plate::mesh::{coarsen, refine, unit_square, GroupKind, Mesh, Origin};
use hct_plate::quadrature::triangle_rule;
use hct_plate::solver::{SolverConfig, StopCause, StopMode};

const SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let mut o = f();
    let el = t.elapsed();
    if el > budget {
        o.pass = false;
    }
    o.detail = format!("{} [{:.2}s, budget {}s]", o.detail, el.as_secs_f64(), budget.as_secs());
    o
}

fn criterion_1() -> Outcome {
    timed(Duration::from_secs(10), || {
        let d = check_duality(100, SEED, 1e-9).expect("duality check runs");
        for (col, dev) in &d.bell_literal_failures {
            println!("    note: bell table as printed, basis function {col} off identity by {dev:.3e} (corrected table used)");
        }
        let pass = d.hct_complete <= 1e-9 && d.hct_reduced <= 1e-9 && d.bell_corrected <= 1e-9;
        outcome(
            pass,
            format!(
                "max |M - I|: hct-c {:.2e}, hct-r {:.2e}, bell {:.2e} (tol 1e-9)",
                d.hct_complete, d.hct_reduced, d.bell_corrected
            ),
        )
    })
}

fn criterion_2() -> Outcome {
    let c = check_conformity(50, 10, SEED).expect("conformity check runs");
    outcome(
        c.edge_value <= 1e-9 && c.edge_gradient <= 1e-9 && c.barycenter <= 1e-10,
        format!(
            "edge value {:.2e}, edge gradient {:.2e} (tol 1e-9), barycenter {:.2e} (tol 1e-10)",
            c.edge_value, c.edge_gradient, c.barycenter
        ),
    )
}

fn criterion_3() -> Outcome {
    let r = check_reproduction(SEED).expect("reproduction check runs");
    outcome(
        r.hct_complete_cubic <= 1e-9 && r.hct_reduced_quadratic <= 1e-9,
        format!(
            "hct-c cubics {:.2e}, hct-r quadratics {:.2e} (tol 1e-9)",
            r.hct_complete_cubic, r.hct_reduced_quadratic
        ),
    )
}

const L2_TARGET: f64 = 1.0911603e-4;

fn criterion_4() -> Outcome {
    timed(Duration::from_secs(300), || {
        let case = ManufacturedCase::polynomial(1e4, 1.0);
        let meshes: Vec<Mesh> = [8, 12, 16].iter().map(|&n| unit_square(n)).collect();
        let rep = convergence_study(&case, &meshes, &SolverConfig::default()).expect("study runs");
        let slope = rep.slope_h2.unwrap_or(f64::NAN);
        let first = &rep.rows[0];
        let l2 = first.result.map_or(f64::NAN, |v| v.err_l2);
        let ratio = l2 / L2_TARGET;
        let slope_ok = (1.7..=2.4).contains(&slope);
        let l2_ok = (0.5..=2.0).contains(&ratio);
        outcome(
            slope_ok && l2_ok,
            format!(
                "H2 slope {slope:.3} over {:?} cells (want [1.7, 2.4]: {}); L2 on {} cells {l2:.4e}, ratio to {L2_TARGET:e} = {ratio:.3} (want [0.5, 2]: {})",
                rep.rows.iter().map(|r| r.n_cells).collect::<Vec<_>>(),
                if slope_ok { "ok" } else { "no" },
                first.n_cells,
                if l2_ok { "ok" } else { "no" }
            ),
        )
    })
}

fn criterion_5() -> Outcome {
    let t = run_tab2(&unit_square(8), &TAB2_LAMBDAS, &TAB2_PS, &SolverConfig::default()).expect("sweep runs");
    let mut problems = Vec::new();
    for &l in &TAB2_LAMBDAS {
        let c = t.cell(l, 1.0).unwrap();
        let want_div = l >= 1e9;
        let is_div = c.cause != StopCause::Converged;
        if want_div != is_div {
            problems.push(format!("p=1 lambda={l:e}: {}", c.cause));
        }
    }
    let p10: Vec<Option<f64>> = TAB2_LAMBDAS.iter().map(|&l| t.cell(l, 10.0).unwrap().err_h2).collect();
    if p10.iter().any(|e| e.is_none()) {
        problems.push("p=10 has non-converged cells".into());
    }
    let digits: BTreeSet<String> = p10.iter().flatten().map(|e| format!("{e:.3e}")).collect();
    if digits.len() != 1 {
        problems.push(format!("p=10 err_H2 differs at 4 digits: {digits:?}"));
    }
    let pattern: Vec<String> = TAB2_LAMBDAS
        .iter()
        .map(|&l| match t.cell(l, 1.0).unwrap().err_h2 {
            Some(_) => "ok".to_string(),
            None => "div".to_string(),
        })
        .collect();
    outcome(
        problems.is_empty(),
        format!(
            "p=1 over lambda 1e-1..1e10: {}; p=10 err_H2 {}{}",
            pattern.join(" "),
            digits.iter().next().cloned().unwrap_or_default(),
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn sine_config(relaxation: f64) -> SolverConfig {
    SolverConfig {
        lambda: 1e6,
        p: 1.0,
        stop: StopMode::Indicator,
        relaxation,
        max_iter: if relaxation < 1.0 { 400 } else { 100 },
        variant: EstimatorVariant::Average,
        ..SolverConfig::default()
    }
}

fn tab5_summary(relaxation: f64) -> (bool, String) {
    let t = run_tab5(&[0.25, 0.125, 0.0625], &sine_config(relaxation)).expect("table runs");
    let mut ok = true;
    let mut parts = Vec::new();
    for r in &t.rows {
        let eff = r.effectivity.unwrap_or(f64::NAN);
        let row_ok = r.cause == StopCause::Converged
            && eff.is_finite()
            && eff > 0.0
            && (0.05..=20.0).contains(&eff)
            && r.eta_l <= 1e-5 * r.eta_d;
        ok &= row_ok;
        parts.push(format!(
            "h={} {} after {} it, eff {:.3e}, eta_L/eta_D {:.1e}",
            r.h,
            r.cause,
            r.iterations,
            eff,
            r.eta_l / r.eta_d
        ));
    }
    (ok, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let (pass, detail) = tab5_summary(1.0);
    let (_, relaxed) = tab5_summary(0.5);
    println!("    info: same runs with relaxation 0.5: {relaxed}");
    outcome(pass, format!("sine, lambda=1e6, p=1, plain fixed point: {detail}"))
}

fn new_triangle_localization(meshes: &[&Mesh], case: &ManufacturedCase) -> (usize, usize) {
    let (mut inside, mut total) = (0, 0);
    for w in meshes.windows(2) {
        let old: HashSet<_> = w[0].canonical_triangles().into_iter().collect();
        for k in w[1].canonical_triangles() {
            if !old.contains(&k) {
                total += 1;
                let mean = |i: usize| k.iter().map(|p| f64::from_bits(p[i])).sum::<f64>() / 3.0;
                let c = [mean(0), mean(1)];
                if case.u(c).abs() > 0.5 * case.max_abs() {
                    inside += 1;
                }
            }
        }
    }
    (inside, total)
}

fn adapt_summary(relaxation: f64) -> (bool, String) {
    let case = ManufacturedCase::sine(1e6, 1.0);
    let f = move |p| case.source(p);
    let cfg = AdaptConfig {
        epsilon: 1e-12,
        max_rounds: 4,
        solver: sine_config(relaxation),
        ..AdaptConfig::default()
    };
    let res = adaptive_solve(&unit_square(4), &cfg, &f).expect("adaptive loop runs");
    let cells: Vec<usize> = res.rounds.iter().map(|r| r.n_cells()).collect();
    let meshes: Vec<&Mesh> = res.meshes().collect();
    let (inside, total) = new_triangle_localization(&meshes, &case);
    let frac = if total > 0 { inside as f64 / total as f64 } else { 0.0 };
    let growing = cells.len() == 4 && cells.windows(2).all(|w| w[1] > w[0]);
    (
        growing && frac >= 0.6,
        format!(
            "cells {cells:?} ({}), stop {}, new triangles in |u| > max/2: {inside}/{total} = {:.0}% (want >= 60%)",
            if growing { "strictly increasing" } else { "not 4 strictly growing rounds" },
            res.stop,
            100.0 * frac
        ),
    )
}

fn criterion_7() -> Outcome {
    let (pass, detail) = adapt_summary(1.0);
    let (_, relaxed) = adapt_summary(0.5);
    println!("    info: same loop with relaxation 0.5: {relaxed}");
    outcome(pass, format!("plain fixed point: {detail}"))
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn criterion_8() -> Outcome {
    timed(Duration::from_secs(60), || {
        let mut notes = Vec::new();
        let mut pass = true;

        // quadrature: every stocked rule integrates monomials up to its degree on the unit triangle
        let unit = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let mut quad = 0.0f64;
        for d in 1..=12 {
            let rule = triangle_rule(d).unwrap();
            for n in 0..=d as u32 {
                for j in 0..=n {
                    let i = n - j;
                    let exact = factorial(i) * factorial(j) / factorial(i + j + 2);
                    let got = rule.integrate(unit, |p| p[0].powi(i as i32) * p[1].powi(j as i32));
                    quad = quad.max((got - exact).abs() / exact);
                }
            }
        }
        pass &= quad <= 1e-13;
        notes.push(format!("quadrature {quad:.1e}"));

        // refine all, then coarsen all red children
        let m = unit_square(4);
        let r = refine(&m, &(0..m.n_triangles()).collect::<BTreeSet<_>>());
        let red: BTreeSet<usize> = (0..r.n_triangles()).filter(|&t| matches!(r.origins()[t], Origin::Child(g) if r.groups()[g].kind == GroupKind::Red))
            .collect();
        let c = coarsen(&r, &red);
        let identity = c.canonical_triangles() == m.canonical_triangles();
        pass &= identity;
        notes.push(format!("refine/coarsen identity {identity}"));

        // assembled operator after boundary elimination: symmetric and positive definite
        let space = Space::new(&unit_square(3), ElementKind::HctComplete).unwrap();
        let asm = Assembler::new(&space).unwrap();
        let mut a = asm.stiffness();
        let w = space.constant(0.3);
        a.add_scaled(1.0, &asm.weighted_mass(&w, 1e3, 1.0).unwrap());
        let mut b = vec![0.0; space.n_dofs()];
        apply_clamped_bc(&mut a, &mut b, space.dofs());
        let sym = a.symmetry_defect();
        let spd = cholesky_ok(&a.to_dense());
        pass &= sym <= 1e-12 && spd;
        notes.push(format!("symmetry {sym:.1e}, cholesky {}", if spd { "ok" } else { "failed" }));

        // root-sum-square aggregation
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut agg = 0.0f64;
        for _ in 0..100 {
            let v: Vec<f64> = (0..rng.gen_range(1..200)).map(|_| rng.gen_range(0.0..1e3)).collect();
            let sq: f64 = v.iter().map(|x| x * x).sum();
            agg = agg.max((aggregate(v.iter().copied()).powi(2) - sq).abs() / sq.max(f64::MIN_POSITIVE));
        }
        pass &= agg <= 1e-12 && aggregate([3.0, 4.0]) == 5.0;
        notes.push(format!("aggregation {agg:.1e}"));

        outcome(pass, notes.join(", "))
    })
}

fn cholesky_ok(a: &[Vec<f64>]) -> bool {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 0.0 {
                    return false;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    true
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 8] = [
        ("element duality", criterion_1),
        ("C1 conformity", criterion_2),
        ("polynomial reproduction", criterion_3),
        ("a priori rate", criterion_4),
        ("fixed-point (lambda, p) pattern", criterion_5),
        ("estimator effectivity", criterion_6),
        ("adaptive localization", criterion_7),
        ("property suites", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, check)) in checks.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} {}: {} - {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, name, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
