use std::sync::OnceLock;

use adjcone_core::geometry::{weighted_minkowski, Polytope};
use adjcone_core::gqvi::{minimax_value, sion_check, ConstraintMap, MovingPolytope, PolytopeOperator};
use adjcone_core::instances;
use adjcone_core::linalg::{box_grid, dist, dot, norm, sub};
use adjcone_core::normal_op::{
    adjusted_normal_cone, build_atlas_excluding_argmin, strict_normal_cone, Atlas,
};
use adjcone_core::quasiconvex::StepLevelFunction;
use proptest::prelude::*;

fn sq2d_atlas() -> &'static (StepLevelFunction, Atlas) {
    static CELL: OnceLock<(StepLevelFunction, Atlas)> = OnceLock::new();
    CELL.get_or_init(|| {
        let f = instances::sq2d();
        let atlas = build_atlas_excluding_argmin(&f, &Polytope::cube(2, 2.0).unwrap(), 0.25).unwrap();
        (f, atlas)
    })
}

fn point2() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 2)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn projection_is_optimal(lo in prop::collection::vec(-1.0..0.0f64, 2),
                             w in prop::collection::vec(0.1..2.0f64, 2),
                             x in prop::collection::vec(-4.0..4.0f64, 2)) {
        let hi: Vec<f64> = lo.iter().zip(&w).map(|(l, w)| l + w).collect();
        let p = Polytope::from_box(&lo, &hi).unwrap();
        let pr = p.project(&x).unwrap();
        prop_assert!(p.contains(&pr.point, 1e-9).unwrap());
        prop_assert!((pr.distance - dist(&x, &pr.point)).abs() < 1e-9);
        for v in p.vertices().unwrap() {
            prop_assert!(dot(&sub(&x, &pr.point), &sub(v, &pr.point)) <= 1e-9);
        }
        let again = p.project(&pr.point).unwrap();
        prop_assert!(again.distance < 1e-9);
    }

    #[test]
    fn minkowski_contains_weighted_vertices(t in 0.0..1.0f64, a in point2(), b in point2()) {
        let p = Polytope::from_box(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let q = Polytope::from_vertices(&[a.clone(), b.clone()]).unwrap();
        let s = weighted_minkowski(&[(t, &p), (1.0 - t, &q)]).unwrap();
        for v in p.vertices().unwrap() {
            for w in q.vertices().unwrap() {
                let m: Vec<f64> = v.iter().zip(w).map(|(v, w)| t * v + (1.0 - t) * w).collect();
                prop_assert!(s.contains(&m, 1e-9).unwrap());
            }
        }
    }

    #[test]
    fn sandwich_holds_pointwise(x in point2(), y in point2()) {
        let f = instances::sq2d();
        let fx = f.evaluate(&x).unwrap();
        let fy = f.evaluate(&y).unwrap();
        let inside = f.adjusted_contains(&x, &y).unwrap();
        if fy < fx {
            prop_assert!(inside);
        }
        if inside {
            prop_assert!(fy <= fx);
        }
    }

    #[test]
    fn adjusted_cone_inside_strict_cone(x in point2()) {
        let f = instances::sq2d();
        prop_assume!(!f.in_argmin(&x).unwrap());
        let a = adjusted_normal_cone(&f, &x).unwrap();
        let s = strict_normal_cone(&f, &x).unwrap();
        for g in a.generators() {
            prop_assert!(s.contains(g, 1e-6).unwrap());
        }
    }

    #[test]
    fn partition_of_unity(x in point2()) {
        let (_, atlas) = sq2d_atlas();
        prop_assume!(atlas.in_domain(&x).unwrap());
        let w = atlas.weights(&x);
        prop_assert!(!w.is_empty());
        let sum: f64 = w.iter().map(|w| w.1).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        for (i, wi) in w {
            prop_assert!(wi > 0.0);
            prop_assert!(atlas.charts()[i].in_ball(&x, 0.0));
        }
    }

    #[test]
    fn chart_estimate(ci in 0usize..1000, u in point2()) {
        let (f, atlas) = sq2d_atlas();
        let ch = &atlas.charts()[ci % atlas.charts().len()];
        let x: Vec<f64> = ch.z.iter().zip(&u).map(|(z, u)| z + ch.eps * u / 2.0 / 2f64.sqrt()).collect();
        prop_assume!(f.level_index(&x).unwrap().is_some());
        for g in strict_normal_cone(f, &x).unwrap().generators() {
            prop_assert!(dot(g, &ch.c) >= ch.eps * norm(g) - 1e-9);
        }
    }

    #[test]
    fn fixed_points_are_exact(x in prop::collection::vec(-1.0..1.0f64, 2),
                              d in prop::collection::vec(-0.8..0.8f64, 4)) {
        let k = MovingPolytope::new(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            vec![0.3, 0.3, 0.3, 0.3],
            vec![vec![d[0], 0.0], vec![0.0, d[1]], vec![d[2], d[3]], vec![0.0, 0.5]],
            Polytope::cube(2, 1.0).unwrap(),
        ).unwrap();
        let in_fix = match k.fixed_point_set() {
            Ok(fix) => fix.contains(&x, 1e-9).unwrap(),
            Err(_) => false,
        };
        let in_kx = match k.at(&x) {
            Ok(kx) => kx.contains(&x, 1e-9).unwrap(),
            Err(_) => false,
        };
        prop_assert_eq!(in_fix, in_kx);
    }

    #[test]
    fn verdict_is_scale_invariant(x in prop::collection::vec(-1.0..1.0f64, 2),
                                  a in point2(), b in point2()) {
        let k = MovingPolytope::moving_window(Polytope::cube(2, 1.0).unwrap(), 0.5);
        let op = PolytopeOperator::constant(Polytope::from_vertices(&[a, b]).unwrap());
        let doubled = op.scaled(2.0).unwrap();
        let kx = k.at(&x).unwrap();
        let v1 = minimax_value(&op.eval(&x).unwrap(), &kx, &x).unwrap().value;
        let v2 = minimax_value(&doubled.eval(&x).unwrap(), &kx, &x).unwrap().value;
        prop_assert!((v2 - 2.0 * v1).abs() <= 1e-9);
        if v1.abs() > 1e-9 {
            prop_assert_eq!(v1 >= 0.0, v2 >= 0.0);
        }
    }

    #[test]
    fn sion_gap_vanishes(x in prop::collection::vec(-1.0..1.0f64, 2), a in point2(), b in point2(), c in point2()) {
        let k = MovingPolytope::moving_window(Polytope::cube(2, 1.0).unwrap(), 0.5);
        let t = Polytope::from_vertices(&[a, b, c]).unwrap();
        let s = sion_check(&t, &k.at(&x).unwrap(), &x).unwrap();
        prop_assert!(s.gap <= 1e-8);
        prop_assert!(s.vertex_maxmin <= s.maxmin + 1e-9);
    }

    #[test]
    fn residual_matches_grid(x in prop_oneof![Just(-2.0), Just(2.0), -1.99..2.0f64]) {
        let inst = instances::moving_interval();
        let x = [x];
        let kx = inst.k.at(&x).unwrap();
        let tx = inst.t.eval(&x).unwrap();
        let value = minimax_value(&tx, &kx, &x).unwrap().value;
        let h = 1e-3;
        let (lo, hi) = kx.bounding_box().unwrap();
        let grid_value = tx.vertices().unwrap().iter().map(|v| {
            box_grid(&lo, &hi, h).iter().map(|y| dot(v, &sub(y, &x))).fold(f64::INFINITY, f64::min)
        }).fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(value >= -1e-9, grid_value >= -h);
    }

    #[test]
    fn argmin_points_solve_quasiopt(x in -1.0..0.0f64) {
        let inst = instances::quasiopt_step1d_window();
        let kx = inst.k.at(&[x]).unwrap();
        let (lo, hi) = kx.bounding_box().unwrap();
        let fx = inst.f.evaluate(&[x]).unwrap();
        for y in box_grid(&lo, &hi, 0.01) {
            prop_assert!(fx <= inst.f.evaluate(&y).unwrap() + 1e-6);
        }
    }
}
