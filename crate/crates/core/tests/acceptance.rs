//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout.

use std::time::{Duration, Instant};

use abscvx::envelopes::{hull_gap, tol_grid};
use abscvx::minimax::{
    intersection_property, ip_to_zs, minimax_certificate, saddle_values, zs_check, CertificateMode,
    IntersectionResult, SaddleGrid, SearchSpec, Verdict, ZsInstance,
};
use abscvx::paraconvex::{paraconvexity_constant, Constant};
use abscvx::subdiff::{
    check_eps_subgradient, check_proximal, clarke_derivative, dini_interval_1d,
    find_eps_subgradient, find_local_subgradient, globalize, phi_to_proximal, proximal_to_phi,
    DiniInterval, DiniSchedule, GlobalMinorantBound,
};
use abscvx::{
    convex_hull_grid, expr, moreau_envelope, phi_hull, CurvatureSchedule, FunctionExpr, Grid,
    GridFunction, QuadraticMinorant, Tolerance,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn sample(text: &str, lo: f64, hi: f64, h: f64) -> GridFunction {
    GridFunction::sample(
        FunctionExpr::parse(text, 1).unwrap(),
        Grid::line(lo, hi, h).unwrap(),
    )
    .unwrap()
}

fn catalog_fn(name: &str, h: f64) -> GridFunction {
    let e = expr::catalog(name).unwrap();
    sample(e.expr, e.lo, e.hi, h)
}

fn at(f: &GridFunction, x: f64) -> usize {
    f.grid().node_at(&[x, 0.0]).unwrap()
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    if t <= limit {
        Ok(())
    } else {
        Err(format!("took {t:?}, limit {limit:?}"))
    }
}

fn ac1() -> Outcome {
    let sched = CurvatureSchedule::up_to(1024.0);
    let mut notes = Vec::new();
    for name in ["paper.pow32", "paper.negabs", "paper.kink"] {
        let start = Instant::now();
        let f = catalog_fn(name, 1.0 / 128.0);
        let r = find_eps_subgradient(&f, at(&f, 0.0), 0.0, &sched, Tolerance::default())
            .map_err(|e| e.to_string())?;
        if let Some(w) = r {
            return Err(format!(
                "{name}: found (a = {}, v = {:?})",
                w.a,
                w.v_slice()
            ));
        }
        within(Duration::from_secs(5), start).map_err(|e| format!("{name}: {e}"))?;
        notes.push(format!("{name} {:?}", start.elapsed()));
    }
    Ok(notes.join(", "))
}

fn ac2() -> Outcome {
    let start = Instant::now();
    let f = catalog_fn("paper.kink", 1.0 / 128.0);
    let s = DiniSchedule::default_for(&f);
    let x0 = at(&f, 0.0);
    let up = clarke_derivative(&f, x0, &[1.0], &s)
        .map_err(|e| e.to_string())?
        .value;
    let down = clarke_derivative(&f, x0, &[-1.0], &s)
        .map_err(|e| e.to_string())?
        .value;
    let (lo, hi) = (-down, up);
    if (lo + 1.0).abs() > 1e-3 || (hi - 1.0).abs() > 1e-3 {
        return Err(format!("Clarke interval [{lo}, {hi}]"));
    }
    let d = dini_interval_1d(&f, x0, &s).map_err(|e| e.to_string())?;
    if !d.is_empty() {
        return Err(format!("Dini interval {d:?} is not empty"));
    }
    within(Duration::from_secs(5), start)?;
    Ok(format!("Clarke [{lo:.6}, {hi:.6}], Dini empty"))
}

fn ac3() -> Outcome {
    let start = Instant::now();
    let tol = Tolerance::default();
    let f = catalog_fn("paper.example1.f", 1.0 / 16.0);
    let g = catalog_fn("paper.example1.g", 1.0 / 16.0);
    let phi1 = QuadraticMinorant::constant(1, 0.0).unwrap();
    let phi2 = QuadraticMinorant::new(1.0, &[0.0], 0.0).unwrap();
    if !intersection_property(&phi1, &phi2, 0.0).unwrap().is_empty() {
        return Err("intersection not empty at level 0".into());
    }
    // 8 × 8 interior base points.
    let n = f.grid().len();
    let picks: Vec<usize> = (0..8).map(|k| 1 + k * (n - 3) / 7).collect();
    for &x1 in &picks {
        for &x2 in &picks {
            let inst = ZsInstance::new(&f, &g, x1, x2, 0.0, tol).map_err(|e| e.to_string())?;
            if zs_check(&inst).holds() {
                return Err(format!(
                    "zero-subgradient condition held at ({x1}, {x2}) with eps = 0"
                ));
            }
        }
    }
    for eps in [1e-1, 1e-2] {
        let (_, out) = ip_to_zs(&f, &g, &phi1, &phi2, eps, 0.0, tol).map_err(|e| e.to_string())?;
        if !out.holds() {
            return Err(format!("ip_to_zs failed at eps = {eps}: {out:?}"));
        }
    }
    within(Duration::from_secs(10), start)?;
    Ok(format!(
        "Empty, 64/64 fail at eps = 0, holds at 1e-1 and 1e-2 ({:?})",
        start.elapsed()
    ))
}

/// Convex hull of random node values, minus `a‖x‖²`.
fn random_paraconvex(rng: &mut ChaCha8Rng, dim: usize) -> GridFunction {
    let grid = if dim == 1 {
        Grid::line(-2.0, 2.0, 1.0 / 16.0)
    } else {
        Grid::square(-1.0, 1.0, 1.0 / 8.0)
    }
    .unwrap();
    let vals: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(0.0..2.0)).collect();
    let hull = convex_hull_grid(&GridFunction::new(grid, vals).unwrap()).unwrap();
    let a = rng.gen_range(0.0..4.0);
    let shifted = hull.plus_quadratic(-a);
    hull.with_values(shifted).unwrap()
}

struct SoundnessTally {
    witnesses: usize,
    glob_fail: usize,
    prox_fail: usize,
    round_fail: usize,
}

fn soundness_suite() -> SoundnessTally {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let tol = Tolerance::default();
    let strict = Tolerance::relative(1e-9);
    let exact = Tolerance::relative(1e-12);
    let sched = CurvatureSchedule::up_to(64.0);
    let mut t = SoundnessTally {
        witnesses: 0,
        glob_fail: 0,
        prox_fail: 0,
        round_fail: 0,
    };
    for dim in [1, 2] {
        for _ in 0..200 {
            let f = random_paraconvex(&mut rng, dim);
            let xbar = rng.gen_range(0..f.grid().len());
            let delta = rng.gen_range(0.2..1.0);
            let Ok(Some(w)) = find_local_subgradient(&f, xbar, delta, &sched, tol) else {
                continue;
            };
            t.witnesses += 1;
            let bound = GlobalMinorantBound::from_grid(&f);
            let Ok(gw) = globalize(&f, xbar, w.a, w.v_slice(), delta, &bound, tol) else {
                t.glob_fail += 1;
                continue;
            };
            let re = check_eps_subgradient(&f, xbar, gw.a, gw.v_slice(), 0.0, strict).unwrap();
            if !re.is_verified() {
                t.glob_fail += 1;
            }
            let pw = phi_to_proximal(&gw);
            if !check_proximal(&f, xbar, &pw, exact).unwrap().holds() {
                t.prox_fail += 1;
            }
            match proximal_to_phi(&f, xbar, &pw, &bound, tol) {
                Ok(back) if back.is_verified() => {}
                _ => t.round_fail += 1,
            }
        }
    }
    t
}

fn ac4(t: &SoundnessTally, elapsed: Duration) -> Outcome {
    if t.witnesses == 0 {
        return Err("no local witnesses found".into());
    }
    if t.glob_fail > 0 {
        return Err(format!(
            "{} of {} witnesses failed to globalize",
            t.glob_fail, t.witnesses
        ));
    }
    if elapsed > Duration::from_secs(60) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "{} local witnesses globalized ({elapsed:?})",
        t.witnesses
    ))
}

fn ac5(t: &SoundnessTally) -> Outcome {
    if t.prox_fail + t.round_fail > 0 {
        return Err(format!(
            "{} proximal failures, {} round-trip failures",
            t.prox_fail, t.round_fail
        ));
    }
    Ok(format!("{} conversions checked", t.witnesses))
}

fn ac6() -> Outcome {
    let f = sample("-x*x", -2.0, 2.0, 1.0 / 64.0);
    let r = paraconvexity_constant(&f, &[-2.0], &[2.0], 1e-6).map_err(|e| e.to_string())?;
    match r.constant {
        Constant::Finite(c) if (c - 1.0).abs() <= 1e-3 => {}
        c => return Err(format!("-x^2 gave {c:?}")),
    }
    let f = sample("exp(x)", -2.0, 2.0, 1.0 / 64.0);
    let r = paraconvexity_constant(&f, &[-2.0], &[2.0], 1e-6).map_err(|e| e.to_string())?;
    if r.constant != Constant::Finite(0.0) {
        return Err(format!("exp gave {:?}", r.constant));
    }
    let f = catalog_fn("paper.pow32", 1.0 / 128.0);
    let r = paraconvexity_constant(&f, &[-2.0], &[2.0], 1e-6).map_err(|e| e.to_string())?;
    let q = &r.required;
    let ratios = (q[1] / q[0], q[2] / q[1]);
    if r.constant != Constant::NoFiniteConstant || ratios.0 < 1.3 || ratios.1 < 1.3 {
        return Err(format!("pow32 gave {:?} with required {q:?}", r.constant));
    }
    Ok(format!(
        "1, 0, divergent with ratios {:.3}, {:.3}",
        ratios.0, ratios.1
    ))
}

fn random_minorant(rng: &mut ChaCha8Rng, dim: usize) -> QuadraticMinorant {
    let a = if rng.gen_bool(0.5) {
        0.0
    } else {
        rng.gen_range(0.0..2.0)
    };
    let mut v = [0.0; 2];
    if !rng.gen_bool(0.15) {
        for x in v.iter_mut().take(dim) {
            *x = rng.gen_range(-3.0..3.0);
        }
    }
    QuadraticMinorant::new(a, &v[..dim], rng.gen_range(-2.0..2.0)).unwrap()
}

/// Brute force: a fine box scan plus circles of radius up to 10⁶.
fn oracle_finds(
    p1: &QuadraticMinorant,
    p2: &QuadraticMinorant,
    alpha: f64,
    dim: usize,
) -> Option<[f64; 2]> {
    let hit = |x: [f64; 2]| p1.eval(&x) < alpha && p2.eval(&x) < alpha;
    let n = if dim == 1 { 4001 } else { 161 };
    let axis = |k: usize| -20.0 + 40.0 * k as f64 / (n - 1) as f64;
    for i in 0..n {
        if dim == 1 {
            if hit([axis(i), 0.0]) {
                return Some([axis(i), 0.0]);
            }
        } else {
            for j in 0..n {
                if hit([axis(i), axis(j)]) {
                    return Some([axis(i), axis(j)]);
                }
            }
        }
    }
    let mut r = 20.0;
    while r <= 1e6 {
        let m = if dim == 1 { 2 } else { 720 };
        for k in 0..m {
            let t = std::f64::consts::TAU * k as f64 / m as f64;
            let x = if dim == 1 {
                [if k == 0 { r } else { -r }, 0.0]
            } else {
                [r * t.cos(), r * t.sin()]
            };
            if hit(x) {
                return Some(x);
            }
        }
        r *= 2.0;
    }
    None
}

fn ac7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let mut counts = [0usize; 2];
    for dim in [1, 2] {
        for k in 0..1000 {
            let p1 = random_minorant(&mut rng, dim);
            let mut p2 = random_minorant(&mut rng, dim);
            if k % 4 == 0 {
                // Antiparallel affine pairs, the only non-trivial empty case.
                let kappa = rng.gen_range(0.2..5.0);
                let v = p1.v();
                p2 = QuadraticMinorant::new(0.0, &[-kappa * v[0], -kappa * v[1]][..dim], p2.c())
                    .unwrap();
            }
            let alpha = rng.gen_range(-3.0..3.0);
            let res = intersection_property(&p1, &p2, alpha).unwrap();
            let swapped = intersection_property(&p2, &p1, alpha).unwrap();
            if res.is_empty() != swapped.is_empty() {
                return Err(format!("asymmetric decision for {p1:?}, {p2:?}, {alpha}"));
            }
            match res {
                IntersectionResult::Witness(x) => {
                    if !(p1.eval(&x) < alpha && p2.eval(&x) < alpha) {
                        return Err(format!("witness {x:?} fails for {p1:?}, {p2:?}, {alpha}"));
                    }
                }
                IntersectionResult::Empty => {
                    if let Some(x) = oracle_finds(&p1, &p2, alpha, dim) {
                        return Err(format!(
                            "oracle point {x:?} for claimed-empty {p1:?}, {p2:?}, {alpha}"
                        ));
                    }
                    counts[dim - 1] += 1;
                }
            }
        }
    }
    Ok(format!(
        "0 disagreements; empty cases n=1: {}, n=2: {}",
        counts[0], counts[1]
    ))
}

fn brute_gap(a: &SaddleGrid) -> f64 {
    let supinf = (0..a.ny())
        .map(|j| {
            (0..a.nx())
                .map(|i| a.value(i, j))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let infsup = (0..a.nx())
        .map(|i| {
            (0..a.ny())
                .map(|j| a.value(i, j))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    infsup - supinf
}

fn ac8() -> Outcome {
    let h = 1.0 / 64.0;
    let g = Grid::line(-2.0, 2.0, h).unwrap();
    for text in ["x*y", "x*x + x*y - y*y"] {
        let a = SaddleGrid::from_expr(text, g.clone(), g.clone()).unwrap();
        let c = minimax_certificate(&a, &CertificateMode::Exact, &SearchSpec::default())
            .map_err(|e| e.to_string())?;
        if c.verdict != Verdict::Certified || brute_gap(&a).abs() > 2.0 * h {
            return Err(format!("{text}: {:?} with gap {}", c.verdict, c.gap));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let xg = Grid::line(-2.0, 2.0, 0.125).unwrap();
    let yg = Grid::line(-2.0, 2.0, 0.25).unwrap();
    let (mut certified, mut rejected, mut worst_gap) = (0, 0, f64::INFINITY);
    for _ in 0..1000 {
        let c: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let kink = rng.gen_range(-1.5..1.5);
        let a = SaddleGrid::from_fn(xg.clone(), yg.clone(), |x, y| {
            let x = x[0];
            c[0] * x * x
                + c[1] * x
                + c[2] * x * y
                + c[3].abs() * (x - kink).abs()
                + c[4] * x * x * y
                - (c[5].abs() + 0.1) * y * y
                + c[6] * y
                + c[7]
        })
        .unwrap();
        let gap = brute_gap(&a);
        worst_gap = worst_gap.min(gap);
        if saddle_values(&a).gap < -1e-12 || gap < -1e-12 {
            return Err(format!("weak duality violated: gap {gap}"));
        }
        match minimax_certificate(&a, &CertificateMode::Exact, &SearchSpec::default()) {
            Ok(cert) => {
                if cert.verdict == Verdict::Refuted {
                    return Err(format!("refuted certificate with gap {}", cert.gap));
                }
                if cert.verdict == Verdict::Certified {
                    certified += 1;
                    if gap > cert.tol_cert {
                        return Err(format!("certified with gap {gap} > {}", cert.tol_cert));
                    }
                }
            }
            Err(_) => rejected += 1,
        }
    }
    Ok(format!("catalog certified; random: {certified} certified, {rejected} rejected, min gap {worst_gap:e}"))
}

fn random_1d(rng: &mut ChaCha8Rng) -> GridFunction {
    let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let grid = Grid::line(-2.0, 2.0, 1.0 / 16.0).unwrap();
    GridFunction::from_fn(grid, |p| {
        let x = p[0];
        c[0] * x * x + c[1] * (3.0 * x).sin() + c[2] * x.abs() + c[3] * (x - c[4]).abs()
    })
    .unwrap()
}

fn ac9() -> Outcome {
    let mut fns: Vec<(String, GridFunction)> = expr::CATALOG
        .iter()
        .map(|e| (e.name.to_string(), sample(e.expr, e.lo, e.hi, 1.0 / 32.0)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    for k in 0..100 {
        fns.push((format!("random#{k}"), random_1d(&mut rng)));
    }
    for (name, f) in &fns {
        let sched = CurvatureSchedule::default_for(f);
        let tol = tol_grid(f);
        let h = phi_hull(f, &sched).unwrap();
        let hh = phi_hull(&h, &sched).unwrap();
        for i in 0..f.grid().len() {
            if h.value(i) > f.value(i) + tol {
                return Err(format!("{name}: hull above f at node {i}"));
            }
            if (hh.value(i) - h.value(i)).abs() > tol {
                return Err(format!("{name}: hull not idempotent at node {i}"));
            }
        }
        let short =
            CurvatureSchedule::new(sched.values()[..sched.len().div_ceil(2)].to_vec()).unwrap();
        let gs = hull_gap(f, &short).unwrap();
        let gl = hull_gap(f, &sched).unwrap();
        if let Some(i) = (0..gs.len()).find(|&i| gl[i] > gs[i] + tol) {
            return Err(format!(
                "{name}: larger schedule gave a larger gap at node {i}"
            ));
        }
    }
    let h = 1.0 / 64.0;
    let f = sample("abs(x)", -3.0, 3.0, h);
    let m = moreau_envelope(&f, 1.0).unwrap();
    for (i, x) in f.grid().nodes().enumerate() {
        let huber = if x[0].abs() <= 1.0 {
            0.5 * x[0] * x[0]
        } else {
            x[0].abs() - 0.5
        };
        if (m.value(i) - huber).abs() > h * h / 2.0 + h {
            return Err(format!("Moreau envelope off at x = {}", x[0]));
        }
    }
    Ok(format!("{} functions, Huber match", fns.len()))
}

fn ac10() -> Outcome {
    let tol = Tolerance::default();
    let (mut checked, mut violations) = (0, Vec::new());
    for e in expr::CATALOG {
        let f = sample(e.expr, e.lo, e.hi, 1.0 / 32.0);
        let sched = CurvatureSchedule::up_to(1024.0);
        let ds = DiniSchedule::default_for(&f);
        for i in 0..f.grid().len() {
            if find_eps_subgradient(&f, i, 0.0, &sched, tol)
                .unwrap()
                .is_none()
            {
                continue;
            }
            checked += 1;
            if let DiniInterval::Empty { lo, hi } = dini_interval_1d(&f, i, &ds).unwrap() {
                violations.push(format!(
                    "{} at x = {}: [{lo}, {hi}]",
                    e.name,
                    f.grid().node(i)[0]
                ));
            }
        }
    }
    if violations.is_empty() {
        Ok(format!("{checked} nodes with witnesses, 0 violations"))
    } else {
        Err(format!(
            "{} violations, first {}",
            violations.len(),
            violations[0]
        ))
    }
}

fn main() {
    let mut failed = 0;
    let mut report = |id: &str, title: &str, r: Outcome| match r {
        Ok(msg) => println!("PASS AC{id} {title}: {msg}"),
        Err(msg) => {
            failed += 1;
            println!("FAIL AC{id} {title}: {msg}");
        }
    };
    report("1", "counterexamples have no subgradient", ac1());
    report("2", "Clarke and Dini intervals of the kink", ac2());
    report("3", "Example 1 end to end", ac3());
    let start = Instant::now();
    let tally = soundness_suite();
    let elapsed = start.elapsed();
    report("4", "globalization soundness", ac4(&tally, elapsed));
    report("5", "proximal conversion soundness", ac5(&tally));
    report("6", "paraconvexity constants", ac6());
    report("7", "intersection decision vs oracle", ac7());
    report("8", "minimax certificates", ac8());
    report("9", "hull properties and Moreau envelope", ac9());
    report("10", "subgradient implies nonempty Dini interval", ac10());
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
