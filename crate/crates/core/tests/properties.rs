use abscvx::envelopes::{is_discretely_convex, tol_grid};
use abscvx::minimax::{
    intersection_property, ip_to_zs, minimax_certificate, saddle_values, sublevel_region, zs_check,
    zs_to_ip, CertificateMode, IntersectionResult, SaddleGrid, SearchSpec, Verdict, ZsInstance,
};
use abscvx::paraconvex::{
    check_gamma_paraconvex, check_strong_gamma_paraconvex, paraconvex_subgradient,
    paraconvexity_constant, Constant, GammaSampleSpec,
};
use abscvx::subdiff::{
    check_eps_subgradient, check_proximal, find_eps_subgradient, find_local_subgradient, globalize,
    phi_to_proximal, proximal_to_phi, GlobalMinorantBound,
};
use abscvx::{
    convex_hull_grid, is_support, moreau_envelope, phi_hull, CurvatureSchedule, FunctionExpr, Grid,
    GridFunction, QuadraticMinorant, Tolerance,
};
use proptest::prelude::*;

fn line() -> Grid {
    Grid::line(-1.0, 1.0, 0.125).unwrap()
}

fn arb_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n)
}

fn arb_fn() -> impl Strategy<Value = GridFunction> {
    arb_values(17).prop_map(|v| GridFunction::new(line(), v).unwrap())
}

/// Convex hull of random values minus `a x²`.
fn arb_paraconvex() -> impl Strategy<Value = GridFunction> {
    (arb_values(17), 0.0..3.0f64).prop_map(|(v, a)| {
        let hull = convex_hull_grid(&GridFunction::new(line(), v).unwrap()).unwrap();
        let shifted = hull.plus_quadratic(-a);
        hull.with_values(shifted).unwrap()
    })
}

fn arb_minorant(dim: usize) -> impl Strategy<Value = QuadraticMinorant> {
    (
        prop_oneof![Just(0.0), 0.0..3.0f64],
        -3.0..3.0f64,
        -3.0..3.0f64,
        -3.0..3.0f64,
    )
        .prop_map(move |(a, v0, v1, c)| {
            let v = if dim == 1 { vec![v0] } else { vec![v0, v1] };
            QuadraticMinorant::new(a, &v, c).unwrap()
        })
}

/// `φ` lowered until it is a support of `f` on the grid.
fn lowered(phi: &QuadraticMinorant, f: &GridFunction) -> QuadraticMinorant {
    let over = f
        .grid()
        .nodes()
        .zip(f.values())
        .map(|(x, &fx)| phi.eval(&x) - fx)
        .fold(f64::NEG_INFINITY, f64::max);
    QuadraticMinorant::new(
        phi.a(),
        &phi.v()[..phi.dim()],
        phi.c() - over.max(0.0) - 1e-9,
    )
    .unwrap()
}

fn combine(p: &QuadraticMinorant, q: &QuadraticMinorant, l: f64) -> QuadraticMinorant {
    let v: Vec<f64> = (0..p.dim())
        .map(|k| l * p.v()[k] + (1.0 - l) * q.v()[k])
        .collect();
    QuadraticMinorant::new(
        l * p.a() + (1.0 - l) * q.a(),
        &v,
        l * p.c() + (1.0 - l) * q.c(),
    )
    .unwrap()
}

fn max_abs_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn support_is_monotone_and_convex(f in arb_fn(), bump in arb_values(17), p in arb_minorant(1), q in arb_minorant(1), l in 0.0..=1.0f64) {
        let (p, q) = (lowered(&p, &f), lowered(&q, &f));
        prop_assert!(is_support(&p, &f, 0.0).unwrap());
        let g = f.with_values(f.values().iter().zip(&bump).map(|(a, b)| a + b.abs()).collect()).unwrap();
        prop_assert!(is_support(&p, &g, 0.0).unwrap());
        prop_assert!(is_support(&combine(&p, &q, l), &f, 1e-12).unwrap());
    }

    #[test]
    fn sampling_is_deterministic(c in -3.0..3.0f64, k in 1u32..4) {
        let text = format!("max(abs(x)-{c}, pow(x,{k})) + exp(-x*x)");
        let e = FunctionExpr::parse(&text, 1).unwrap();
        let a = GridFunction::sample(e.clone(), line()).unwrap();
        let b = GridFunction::sample(e, line()).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn hull_invariants(f in arb_fn()) {
        let small = CurvatureSchedule::up_to(4.0);
        let big = CurvatureSchedule::up_to(16.0);
        let h = phi_hull(&f, &small).unwrap();
        let tol = tol_grid(&f);
        for i in 0..f.grid().len() {
            prop_assert!(h.value(i) <= f.value(i) + 1e-12);
        }
        prop_assert!(max_abs_diff(&phi_hull(&h, &small).unwrap(), &h) <= tol);
        let hb = phi_hull(&f, &big).unwrap();
        for i in 0..f.grid().len() {
            prop_assert!(hb.value(i) >= h.value(i) - 1e-9);
        }
    }

    #[test]
    fn convex_hull_is_fixed_point(f in arb_fn()) {
        let c = convex_hull_grid(&f).unwrap();
        prop_assert!(is_discretely_convex(c.grid(), c.values(), 1e-9));
        let zero = CurvatureSchedule::new(vec![0.0]).unwrap();
        prop_assert!(max_abs_diff(&phi_hull(&c, &zero).unwrap(), &c) <= tol_grid(&c));
        prop_assert!(max_abs_diff(&convex_hull_grid(&c).unwrap(), &c) <= 1e-9);
    }

    #[test]
    fn envelopes_are_ordered(f in arb_fn(), l1 in 0.05..1.0f64, dl in 0.0..2.0f64) {
        let e1 = moreau_envelope(&f, l1).unwrap();
        let e2 = moreau_envelope(&f, l1 + dl).unwrap();
        for i in 0..f.grid().len() {
            prop_assert!(e2.value(i) <= e1.value(i) + 1e-12);
            prop_assert!(e1.value(i) <= f.value(i) + 1e-12);
        }
    }

    #[test]
    fn witness_sets_are_convex_and_eps_monotone(f in arb_paraconvex(), node in 1usize..16, l in 0.0..=1.0f64, e2 in 0.0..1.0f64) {
        let tol = Tolerance::default();
        let sched = CurvatureSchedule::up_to(64.0);
        let w = find_eps_subgradient(&f, node, 0.0, &sched, tol).unwrap().expect("paraconvex input has a witness");
        // Raising the curvature to a' keeps a witness once v moves by 2(a' − a)x̄.
        let (a2, xb) = (w.a * 2.0 + 1.0, w.point[0]);
        let v2 = w.v[0] + 2.0 * (a2 - w.a) * xb;
        prop_assert!(check_eps_subgradient(&f, node, a2, &[v2], 0.0, tol).unwrap().is_verified());
        let (a, v) = (l * w.a + (1.0 - l) * a2, l * w.v[0] + (1.0 - l) * v2);
        prop_assert!(check_eps_subgradient(&f, node, a, &[v], 0.0, tol).unwrap().is_verified());
        prop_assert!(check_eps_subgradient(&f, node, w.a, &w.v[..1], e2, tol).unwrap().is_verified());
    }

    #[test]
    fn reduction_and_translation(f in arb_paraconvex(), node in 0usize..17, s in -2.0..2.0f64) {
        let tol = Tolerance::default();
        let Some(w) = find_eps_subgradient(&f, node, 0.0, &CurvatureSchedule::up_to(64.0), tol).unwrap() else {
            return Ok(());
        };
        let shifted = f.with_values(f.plus_quadratic(w.a)).unwrap();
        prop_assert!(check_eps_subgradient(&shifted, node, 0.0, &w.v[..1], 0.0, tol).unwrap().is_verified());
        let tilted = f.with_values(f.grid().nodes().zip(f.values()).map(|(x, v)| v + s * x[0]).collect()).unwrap();
        prop_assert!(check_eps_subgradient(&tilted, node, w.a, &[w.v[0] + s], 0.0, tol).unwrap().is_verified());
    }

    #[test]
    fn globalization_and_conversion_soundness(f in arb_paraconvex(), node in 2usize..15) {
        let tol = Tolerance::default();
        let Some(w) = find_local_subgradient(&f, node, 0.3, &CurvatureSchedule::up_to(64.0), tol).unwrap() else {
            return Ok(());
        };
        let g = globalize(&f, node, w.a, &w.v[..1], 0.3, &GlobalMinorantBound::from_grid(&f), tol).unwrap();
        prop_assert!(check_eps_subgradient(&f, node, g.a, &g.v[..1], 0.0, tol).unwrap().is_verified());
        let pw = phi_to_proximal(&g);
        prop_assert!(check_proximal(&f, node, &pw, tol).unwrap().holds());
        let back = proximal_to_phi(&f, node, &pw, &GlobalMinorantBound::from_grid(&f), tol).unwrap();
        prop_assert!(back.is_verified());
    }

    #[test]
    fn gamma_monotone_in_constant(f in arb_paraconvex(), c in 0.1..4.0f64, dc in 0.0..4.0f64) {
        let spec = GammaSampleSpec::default();
        if check_gamma_paraconvex(&f, 2.0, c, &spec).unwrap().holds {
            prop_assert!(check_gamma_paraconvex(&f, 2.0, c + dc, &spec).unwrap().holds);
        }
        if check_strong_gamma_paraconvex(&f, 2.0, c, &spec).unwrap().holds {
            prop_assert!(check_gamma_paraconvex(&f, 2.0, c, &spec).unwrap().holds);
        }
    }

    #[test]
    fn paraconvexity_constant_loop(f in arb_paraconvex(), lo in -1.0..-0.25f64, hi in 0.25..1.0f64) {
        let tol = Tolerance::default();
        let whole = paraconvexity_constant(&f, &[-1.0], &[1.0], 1e-6).unwrap();
        let part = paraconvexity_constant(&f, &[lo], &[hi], 1e-6).unwrap();
        let (Constant::Finite(cw), Constant::Finite(cp)) = (whole.constant, part.constant) else {
            return Err(TestCaseError::fail("grid data without an expression has a finite constant"));
        };
        prop_assert!(cp <= cw + 1e-12);
        for node in 1..f.grid().len() - 1 {
            prop_assert!(paraconvex_subgradient(&f, cw, node, tol).unwrap().is_verified());
        }
    }

    #[test]
    fn intersection_is_symmetric_and_sound(dim in 1usize..=2, p in arb_minorant(2), q in arb_minorant(2), alpha in -3.0..3.0f64) {
        let cut = |m: &QuadraticMinorant| {
            let v: Vec<f64> = m.v()[..dim].to_vec();
            QuadraticMinorant::new(m.a(), &v, m.c()).unwrap()
        };
        let (p, q) = (cut(&p), cut(&q));
        let r1 = intersection_property(&p, &q, alpha).unwrap();
        let r2 = intersection_property(&q, &p, alpha).unwrap();
        prop_assert_eq!(r1.is_empty(), r2.is_empty());
        match r1 {
            IntersectionResult::Witness(x) => prop_assert!(p.eval(&x) < alpha && q.eval(&x) < alpha),
            IntersectionResult::Empty => {
                let (s1, s2) = (sublevel_region(&p, alpha), sublevel_region(&q, alpha));
                for i in -40..=40 {
                    for j in -40..=40 {
                        let x = [i as f64 * 0.25, if dim == 2 { j as f64 * 0.25 } else { 0.0 }];
                        prop_assert!(!(s1.contains(&x) && s2.contains(&x)));
                        prop_assert!(!(p.eval(&x) < alpha - 1e-9 && q.eval(&x) < alpha - 1e-9));
                    }
                }
            }
        }
    }

    #[test]
    fn zero_subgradient_yields_disjoint_supports(f in arb_paraconvex(), g in arb_paraconvex(), node in 0usize..17, eps in 0.0..0.5f64) {
        let tol = Tolerance::default();
        let inst = ZsInstance::new(&f, &g, node, node, eps, tol).unwrap();
        if !zs_check(&inst).holds() {
            return Ok(());
        }
        let alpha = f.value(node).min(g.value(node));
        let (p1, p2) = zs_to_ip(&f, &g, node, eps, alpha, tol).unwrap();
        prop_assert!(intersection_property(&p1, &p2, alpha - eps).unwrap().is_empty());
    }

    #[test]
    fn disjoint_supports_yield_zero_subgradient(f in arb_paraconvex(), g in arb_paraconvex(), p in arb_minorant(1), q in arb_minorant(1), alpha in -4.0..1.0f64, eps in 1e-3..0.5f64) {
        let tol = Tolerance::default();
        let (p, q) = (lowered(&p, &f), lowered(&q, &g));
        if !intersection_property(&p, &q, alpha).unwrap().is_empty() {
            return Ok(());
        }
        let (_, out) = ip_to_zs(&f, &g, &p, &q, eps, alpha, tol).unwrap();
        prop_assert!(out.holds(), "{:?}", out);
    }

    #[test]
    fn weak_duality_and_certificate_soundness(coef in prop::collection::vec(-1.0..1.0f64, 4), k in 0.0..1.0f64) {
        // a(x, y) = x² + c₀xy + c₁x + c₂y − k y² + c₃ sin(x): Φ_lsc-convex in x, concave in y.
        let xg = Grid::line(-1.0, 1.0, 0.125).unwrap();
        let yg = Grid::line(-1.0, 1.0, 0.25).unwrap();
        let a = SaddleGrid::from_fn(xg, yg, |x, y| {
            let x = x[0];
            x * x + coef[0] * x * y + coef[1] * x + coef[2] * y - k * y * y + coef[3] * x.sin()
        })
        .unwrap();
        let v = saddle_values(&a);
        prop_assert!(v.gap >= -1e-12);
        let c = minimax_certificate(&a, &CertificateMode::Exact, &SearchSpec::default()).unwrap();
        prop_assert!(c.verdict != Verdict::Refuted);
        if c.is_certified() {
            prop_assert!(c.gap <= c.tol_cert);
        }
    }
}
