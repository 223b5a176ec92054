use std::collections::BTreeSet;

use proptest::prelude::*;

use hct_plate::adaptivity::mark;
use hct_plate::elements::{ElementKind, FnSmooth, Space};
use hct_plate::estimators::aggregate;
use hct_plate::mesh::{coarsen, refine, unit_square, GroupKind, Origin};

fn marks(n: usize) -> impl Strategy<Value = BTreeSet<usize>> {
    proptest::collection::btree_set(0..n, 1..n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn refinement_stays_conforming(sel in marks(32), again in marks(64)) {
        let m = unit_square(4);
        let r = refine(&m, &sel);
        prop_assert!(r.find_hanging_vertex().is_none());
        prop_assert!((r.area() - 1.0).abs() < 1e-12);
        prop_assert!(r.n_triangles() >= m.n_triangles() + 3 * sel.len());
        let keep: BTreeSet<usize> = again.into_iter().filter(|&t| t < r.n_triangles()).collect();
        let rr = refine(&r, &keep);
        prop_assert!(rr.find_hanging_vertex().is_none());
    }

    #[test]
    fn coarsening_red_children_undoes_refinement(sel in marks(32)) {
        let m = unit_square(4);
        let r = refine(&m, &sel);
        let red: BTreeSet<usize> = (0..r.n_triangles())
            .filter(|&t| matches!(r.origins()[t], Origin::Child(g) if r.groups()[g].kind == GroupKind::Red))
            .collect();
        let c = coarsen(&r, &red);
        prop_assert_eq!(c.canonical_triangles(), m.canonical_triangles());
    }

    #[test]
    fn marking_sets_are_disjoint(eta in proptest::collection::vec(0.0f64..10.0, 1..80), alpha in 1.01f64..4.0, beta in 0.01f64..0.99) {
        let (refine_set, coarsen_set) = mark(&eta, alpha, beta);
        prop_assert!(refine_set.is_disjoint(&coarsen_set));
        let mean = eta.iter().sum::<f64>() / eta.len() as f64;
        for &t in &refine_set {
            prop_assert!(eta[t] > alpha * mean);
        }
        for &t in &coarsen_set {
            prop_assert!(eta[t] < beta * mean);
        }
    }

    #[test]
    fn aggregation_is_root_sum_square(v in proptest::collection::vec(0.0f64..1e3, 0..60), split in 0usize..60) {
        let k = split.min(v.len());
        let whole = aggregate(v.iter().copied());
        let parts = aggregate([aggregate(v[..k].iter().copied()), aggregate(v[k..].iter().copied())]);
        prop_assert!((whole - parts).abs() <= 1e-12 * whole.max(1.0));
    }

    #[test]
    fn transfer_to_refined_mesh_keeps_cubics(sel in marks(18), c in proptest::array::uniform4(-1.0f64..1.0)) {
        let coarse = Space::new(&unit_square(3), ElementKind::HctComplete).unwrap();
        let fine = Space::new(&refine(coarse.mesh(), &sel), ElementKind::HctComplete).unwrap();
        let u = |x: f64, y: f64| c[0] + c[1] * x * y + c[2] * x * x * x + c[3] * x * y * y;
        let grad = |x: f64, y: f64| [c[1] * y + 3.0 * c[2] * x * x + c[3] * y * y, c[1] * x + 2.0 * c[3] * x * y];
        let field = coarse.interpolate(&FnSmooth::new(|p: [f64; 2]| u(p[0], p[1]), |p: [f64; 2]| grad(p[0], p[1]))).unwrap();
        let moved = fine.transfer(&coarse, &field).unwrap();
        for p in [[0.3, 0.4], [0.71, 0.12], [0.5, 0.5]] {
            let j = fine.eval(&moved, p).unwrap();
            prop_assert!((j.value - u(p[0], p[1])).abs() < 1e-10);
        }
    }
}
