//! Seeded randomized checks of the core guarantees.

use abscvx::expr::catalog;
use abscvx::minimax::{
    intersection_property, minimax_certificate, saddle_values, CertificateMode, IntersectionResult,
    SaddleGrid, SearchSpec, Verdict,
};
use abscvx::report::Report;
use abscvx::subdiff::{
    check_eps_subgradient, find_eps_subgradient, find_local_subgradient, globalize,
    GlobalMinorantBound,
};
use abscvx::{
    convex_hull_grid, CurvatureSchedule, FunctionExpr, Grid, GridFunction, QuadraticMinorant,
    Tolerance,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::Outcome;
use crate::error::{code, CliError};
use crate::spec::Resolved;

fn random_paraconvex(rng: &mut ChaCha8Rng) -> GridFunction {
    let grid = Grid::line(-2.0, 2.0, 1.0 / 16.0).unwrap();
    let vals: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(0.0..2.0)).collect();
    let hull = convex_hull_grid(&GridFunction::new(grid, vals).unwrap()).unwrap();
    let shifted = hull.plus_quadratic(-rng.gen_range(0.0..4.0));
    hull.with_values(shifted).unwrap()
}

fn random_minorant(rng: &mut ChaCha8Rng) -> QuadraticMinorant {
    let a = if rng.gen_bool(0.3) {
        0.0
    } else {
        rng.gen_range(0.0..2.0)
    };
    QuadraticMinorant::new(
        a,
        &[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
        rng.gen_range(-2.0..2.0),
    )
    .unwrap()
}

/// True when some point of a coarse scan lies strictly in both sublevel sets.
fn scan_finds_overlap(p: &QuadraticMinorant, q: &QuadraticMinorant, alpha: f64) -> bool {
    let n = 80;
    (-n..=n).any(|i| {
        (-n..=n).any(|j| {
            let x = [i as f64 * 0.25, j as f64 * 0.25];
            p.eval(&x) < alpha - 1e-9 && q.eval(&x) < alpha - 1e-9
        })
    })
}

pub fn run(cfg: &mut Resolved) -> Result<Outcome, CliError> {
    let count = cfg.selftest.as_ref().unwrap().count;
    let tol = Tolerance::new(cfg.tol_abs, cfg.tol_rel);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut r = Report::new();

    let sched = CurvatureSchedule::up_to(1024.0);
    let mut catalog_fail = 0;
    for name in ["paper.pow32", "paper.negabs", "paper.kink"] {
        let e = catalog(name).unwrap();
        let f = GridFunction::sample(
            FunctionExpr::parse(e.expr, 1).map_err(abscvx::Error::from)?,
            Grid::line(e.lo, e.hi, 1.0 / 128.0)?,
        )?;
        let x0 = f.grid().node_at(&[0.0, 0.0]).unwrap();
        if find_eps_subgradient(&f, x0, 0.0, &sched, tol)?.is_some() {
            catalog_fail += 1;
        }
    }
    r.section("catalog")
        .text("nonsubdifferentiable_at_origin", 3 - catalog_fail)
        .text("failures", catalog_fail);

    let (mut found, mut glob_fail) = (0, 0);
    for _ in 0..count {
        let f = random_paraconvex(&mut rng);
        let node = rng.gen_range(1..f.grid().len() - 1);
        let delta = rng.gen_range(0.2..1.0);
        let Some(w) =
            find_local_subgradient(&f, node, delta, &CurvatureSchedule::up_to(64.0), tol)?
        else {
            continue;
        };
        found += 1;
        let ok = match globalize(
            &f,
            node,
            w.a,
            w.v_slice(),
            delta,
            &GlobalMinorantBound::from_grid(&f),
            tol,
        ) {
            Ok(g) => check_eps_subgradient(&f, node, g.a, g.v_slice(), 0.0, tol)?.is_verified(),
            Err(_) => false,
        };
        glob_fail += !ok as usize;
    }
    r.section("globalize")
        .text("instances", count)
        .text("local_witnesses", found)
        .text("failures", glob_fail);

    let (mut empty, mut disagree) = (0, 0);
    for k in 0..count {
        let p = random_minorant(&mut rng);
        // Every third pair is affine and antiparallel, where emptiness is common.
        let q = if k % 3 == 0 {
            let s = -rng.gen_range(0.2..3.0);
            let v = p.v();
            QuadraticMinorant::new(0.0, &[s * v[0], s * v[1]], rng.gen_range(-2.0..2.0)).unwrap()
        } else {
            random_minorant(&mut rng)
        };
        let p = if k % 3 == 0 {
            QuadraticMinorant::new(0.0, &p.v(), p.c()).unwrap()
        } else {
            p
        };
        let alpha = rng.gen_range(-2.0..2.0);
        match intersection_property(&p, &q, alpha)? {
            IntersectionResult::Witness(x) => {
                disagree += !(p.eval(&x) < alpha && q.eval(&x) < alpha) as usize
            }
            IntersectionResult::Empty => {
                empty += 1;
                disagree += scan_finds_overlap(&p, &q, alpha) as usize;
            }
        }
    }
    r.section("intersect")
        .text("instances", count)
        .text("empty", empty)
        .text("disagreements", disagree);

    let (mut certified, mut duality, mut bad_cert) = (0, 0, 0);
    for _ in 0..count {
        let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let k = rng.gen_range(0.0..1.0);
        let a = SaddleGrid::from_fn(
            Grid::line(-1.0, 1.0, 0.125)?,
            Grid::line(-1.0, 1.0, 0.25)?,
            |x, y| {
                let x = x[0];
                x * x + c[0] * x * y + c[1] * x + c[2] * y - k * y * y + c[3] * x.sin()
            },
        )?;
        duality += (saddle_values(&a).gap < -1e-12) as usize;
        let cert = minimax_certificate(&a, &CertificateMode::Exact, &SearchSpec::default())?;
        certified += cert.is_certified() as usize;
        bad_cert += (cert.verdict == Verdict::Refuted
            || (cert.is_certified() && cert.gap > cert.tol_cert)) as usize;
    }
    r.section("minimax")
        .text("instances", count)
        .text("certified", certified)
        .text("weak_duality_violations", duality)
        .text("inconsistent_certificates", bad_cert);

    let status = if disagree + duality + bad_cert > 0 {
        code::INCONSISTENT
    } else if catalog_fail + glob_fail > 0 {
        code::VERIFICATION
    } else {
        code::OK
    };
    r.section("summary")
        .text("status", if status == code::OK { "pass" } else { "fail" });
    Ok(Outcome {
        report: r,
        csv: None,
        code: status,
    })
}
