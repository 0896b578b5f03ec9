use abscvx::envelopes::{hull_gap, tol_grid};
use abscvx::minimax::{
    intersection_property, ip_search, ip_to_zs, minimax_certificate, saddle_values,
    sublevel_region, zs_check, CertificateMode, Hypothesis, IntersectionResult, Region, SaddleGrid,
    SearchSpec, Verdict, ZsInstance, ZsOutcome,
};
use abscvx::paraconvex::{
    check_gamma_paraconvex, check_strong_gamma_paraconvex, paraconvex_subgradient,
    paraconvexity_constant, Constant, GammaSampleSpec,
};
use abscvx::report::{fmt_f64, fmt_point, Report};
use abscvx::subdiff::{
    check_eps_subgradient, check_local_subgradient, check_proximal, dini_interval_1d,
    find_eps_subgradient, find_local_subgradient, globalize, phi_to_proximal, DiniInterval,
    DiniSchedule, GlobalMinorantBound, Radius,
};
use abscvx::{
    moreau_envelope, phi_hull, CurvatureSchedule, Grid, GridFunction, SubgradientWitness, Tolerance,
};

use crate::error::{code, CliError};
use crate::spec::{point, ProblemCfg, Resolved};

pub struct Outcome {
    pub report: Report,
    pub csv: Option<String>,
    pub code: i32,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Outcome {
            report,
            csv: None,
            code: code::OK,
        }
    }
}

type Res = Result<Outcome, CliError>;

fn tol(cfg: &Resolved) -> Tolerance {
    Tolerance::new(cfg.tol_abs, cfg.tol_rel)
}

fn schedule(list: &[f64], f: &GridFunction, key: &str) -> Result<CurvatureSchedule, CliError> {
    if list.is_empty() {
        Ok(CurvatureSchedule::default_for(f))
    } else {
        CurvatureSchedule::new(list.to_vec()).map_err(|e| CliError::Spec(format!("{key}: {e}")))
    }
}

fn node_coords(g: &Grid, i: usize) -> Vec<f64> {
    g.node(i)[..g.dim()].to_vec()
}

fn csv_header(dim: usize, cols: &[String]) -> String {
    let mut h = if dim == 1 {
        vec!["x".to_string()]
    } else {
        vec!["x".to_string(), "y".to_string()]
    };
    h.extend(cols.iter().cloned());
    h.join(",") + "\n"
}

fn csv_rows(g: &Grid, cols: &[&[f64]]) -> String {
    let mut out = String::new();
    for i in 0..g.len() {
        let mut row: Vec<String> = node_coords(g, i).into_iter().map(fmt_f64).collect();
        row.extend(cols.iter().map(|c| fmt_f64(c[i])));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn problem(cfg: &Resolved) -> &ProblemCfg {
    cfg.problem
        .as_ref()
        .expect("resolved command has a problem")
}

pub fn hull(cfg: &mut Resolved) -> Res {
    let f = problem(cfg).f()?;
    let hc = cfg.hull.as_mut().unwrap();
    let sched = schedule(&hc.schedule, &f, "hull.schedule")?;
    hc.schedule = sched.values().to_vec();
    if hc.tol < 0.0 {
        hc.tol = tol_grid(&f);
    }
    let (lambda, t) = (hc.lambda, hc.tol);
    let h = phi_hull(&f, &sched)?;
    let gap = hull_gap(&f, &sched)?;
    let env = moreau_envelope(&f, lambda)?;
    let g = f.grid();
    let (mut worst, mut at) = (f64::NEG_INFINITY, 0);
    for (i, &d) in gap.iter().enumerate() {
        if d > worst {
            (worst, at) = (d, i);
        }
    }
    let boundary = (0..g.len())
        .filter(|&i| !g.is_interior(i) && gap[i] > t)
        .count();
    let mut r = Report::new();
    r.section("hull")
        .num("schedule_max", sched.max())
        .num("tol", t)
        .text("is_phi_convex", worst <= t)
        .num("max_gap", worst)
        .point("max_gap_at", &node_coords(g, at))
        .text("boundary_nodes_with_gap", boundary);
    if boundary > 0 {
        r.text(
            "warning",
            "hull falls below f at the box boundary; contact points outside the box are not seen",
        );
    }
    let cols = [
        "f".to_string(),
        "hull".into(),
        "envelope".into(),
        "gap".into(),
    ];
    let csv =
        csv_header(g.dim(), &cols) + &csv_rows(g, &[f.values(), h.values(), env.values(), &gap]);
    Ok(Outcome {
        report: r,
        csv: Some(csv),
        code: code::OK,
    })
}

pub fn envelope(cfg: &mut Resolved) -> Res {
    let f = problem(cfg).f()?;
    let mut lambdas = cfg.envelope.as_ref().unwrap().lambdas.clone();
    if lambdas.is_empty() {
        return Err(CliError::Spec("envelope.lambdas must not be empty".into()));
    }
    lambdas.sort_by(f64::total_cmp);
    let envs = lambdas
        .iter()
        .map(|&l| moreau_envelope(&f, l))
        .collect::<Result<Vec<_>, _>>()?;
    let hull = phi_hull(&f, &CurvatureSchedule::default_for(&f))?;
    let mut r = Report::new();
    r.section("envelope");
    let mut ordered = true;
    for (k, (l, e)) in lambdas.iter().zip(&envs).enumerate() {
        let below = e.values().iter().zip(f.values()).all(|(a, b)| a <= b);
        let after = k == 0
            || e.values()
                .iter()
                .zip(envs[k - 1].values())
                .all(|(a, b)| a <= b);
        ordered &= below && after;
        let drop = e
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max);
        r.text(
            &format!("lambda_{}", fmt_f64(*l)),
            format!("max_drop = {}", fmt_f64(drop)),
        );
    }
    r.text("ordered", ordered);
    let mut cols = vec!["f".to_string(), "hull".to_string()];
    if lambdas.len() == 1 {
        cols.push("envelope".into());
    } else {
        cols.extend(lambdas.iter().map(|l| format!("envelope_{}", fmt_f64(*l))));
    }
    let mut data: Vec<&[f64]> = vec![f.values(), hull.values()];
    data.extend(envs.iter().map(|e| e.values()));
    let csv = csv_header(f.dim(), &cols) + &csv_rows(f.grid(), &data);
    let code = if ordered {
        code::OK
    } else {
        code::INCONSISTENT
    };
    Ok(Outcome {
        report: r,
        csv: Some(csv),
        code,
    })
}

fn proximal_section(
    r: &mut Report,
    f: &GridFunction,
    w: &SubgradientWitness,
    t: Tolerance,
) -> Result<(), CliError> {
    let pw = phi_to_proximal(w);
    let check = check_proximal(f, w.node, &pw, t)?;
    r.section("proximal")
        .point("v", &pw.v[..w.dim])
        .num("rho", pw.rho)
        .text(
            "delta",
            match pw.delta {
                Radius::Unbounded => "unbounded".to_string(),
                Radius::Finite(d) => fmt_f64(d),
            },
        )
        .text("holds", check.holds());
    Ok(())
}

fn dini_section(r: &mut Report, f: &GridFunction, node: usize) {
    if f.dim() != 1 {
        return;
    }
    let s = DiniSchedule::default_for(f);
    r.section("dini");
    match dini_interval_1d(f, node, &s) {
        Ok(DiniInterval::Interval { lo, hi }) => {
            r.text("interval", format!("[{}, {}]", fmt_f64(lo), fmt_f64(hi)))
        }
        Ok(DiniInterval::Empty { lo, hi }) => r.text(
            "interval",
            format!("empty ({} > {})", fmt_f64(lo), fmt_f64(hi)),
        ),
        Err(e) => r.text("interval", format!("unavailable: {e}")),
    };
}

fn witness_code(w: &SubgradientWitness) -> i32 {
    if w.is_verified() {
        code::OK
    } else {
        code::VERIFICATION
    }
}

pub fn subgrad(cfg: &mut Resolved) -> Res {
    let p = problem(cfg).clone();
    let f = p.f()?;
    let t = tol(cfg);
    let sc = cfg.subgrad.as_mut().unwrap();
    let node = p.node("subgrad.point", &sc.point)?;
    let sched = schedule(&sc.schedule, &f, "subgrad.schedule")?;
    sc.schedule = sched.values().to_vec();
    let sc = sc.clone();
    let mut r = Report::new();
    r.section("subgrad")
        .point("node", &node_coords(f.grid(), node));
    if let (Some(a), Some(v)) = (sc.a, sc.v.as_ref()) {
        point("subgrad.v", v, p.dim)?;
        let w = if sc.delta > 0.0 {
            check_local_subgradient(&f, node, a, v, sc.delta, t)?
        } else {
            check_eps_subgradient(&f, node, a, v, sc.eps, t)?
        };
        r.text("mode", "check").witness("witness.", &w);
        return Ok(Outcome {
            code: witness_code(&w),
            report: r,
            csv: None,
        });
    }
    if sc.delta > 0.0 {
        r.text("mode", "local_then_global");
        let Some(local) = find_local_subgradient(&f, node, sc.delta, &sched, t)? else {
            r.text("result", "not_found");
            return Ok(Outcome::ok(r));
        };
        r.witness("local.", &local);
        let g = globalize(
            &f,
            node,
            local.a,
            local.v_slice(),
            sc.delta,
            &GlobalMinorantBound::from_grid(&f),
            t,
        )?;
        r.text("result", "found").witness("global.", &g);
        proximal_section(&mut r, &f, &g, t)?;
        dini_section(&mut r, &f, node);
        return Ok(Outcome {
            code: witness_code(&g),
            report: r,
            csv: None,
        });
    }
    r.text("mode", "search");
    match find_eps_subgradient(&f, node, sc.eps, &sched, t)? {
        None => {
            r.text("result", "not_found");
        }
        Some(w) => {
            r.text("result", "found").witness("witness.", &w);
            if sc.eps == 0.0 {
                proximal_section(&mut r, &f, &w, t)?;
            }
        }
    }
    dini_section(&mut r, &f, node);
    Ok(Outcome::ok(r))
}

pub fn globalize_cmd(cfg: &mut Resolved) -> Res {
    let p = problem(cfg).clone();
    let f = p.f()?;
    let t = tol(cfg);
    let gc = cfg.globalize.clone().unwrap();
    let node = p.node("globalize.point", &gc.point)?;
    point("globalize.v", &gc.v, p.dim)?;
    let local = check_local_subgradient(&f, node, gc.a, &gc.v, gc.delta, t)?;
    let mut r = Report::new();
    r.section("globalize").witness("local.", &local);
    if !local.is_verified() {
        r.text("result", "local_witness_refuted");
        return Ok(Outcome {
            report: r,
            csv: None,
            code: code::VERIFICATION,
        });
    }
    let bound = GlobalMinorantBound::from_grid(&f);
    r.num("bound.a0", bound.a0).num("bound.c0", bound.c0);
    let g = globalize(&f, node, gc.a, &gc.v, gc.delta, &bound, t)?;
    r.text("result", "globalized").witness("global.", &g);
    proximal_section(&mut r, &f, &g, t)?;
    Ok(Outcome {
        code: witness_code(&g),
        report: r,
        csv: None,
    })
}

pub fn paraconvex(cfg: &mut Resolved) -> Res {
    let p = problem(cfg).clone();
    let f = p.f()?;
    let t = tol(cfg);
    let pc = cfg.paraconvex.clone().unwrap();
    let rep = paraconvexity_constant(&f, &pc.lo, &pc.hi, 1e-6)?;
    let mut r = Report::new();
    r.section("paraconvex");
    match rep.constant {
        Constant::Finite(c) => r.num("constant", c),
        Constant::NoFiniteConstant => r.text("constant", "no_finite_constant"),
    };
    let req: Vec<String> = rep.required.iter().map(|&c| fmt_f64(c)).collect();
    r.text("required", format!("[{}]", req.join(", ")));
    if let Some(e) = rep.evidence {
        r.text(
            "evidence",
            format!(
                "x = {}, y = {}, t = {}",
                fmt_point(&e.x[..p.dim]),
                fmt_point(&e.y[..p.dim]),
                fmt_f64(e.t)
            ),
        );
    }
    let mut status = code::OK;
    if let Some(c) = pc.c {
        let spec = GammaSampleSpec {
            tol: t,
            ..GammaSampleSpec::default()
        };
        let g = if pc.strong {
            check_strong_gamma_paraconvex(&f, pc.gamma, c, &spec)?
        } else {
            check_gamma_paraconvex(&f, pc.gamma, c, &spec)?
        };
        r.section("gamma")
            .num("gamma", pc.gamma)
            .num("c", c)
            .text("strong", pc.strong)
            .text("holds", g.holds)
            .text("pairs_checked", g.pairs_checked);
        if let Some(w) = g.worst {
            r.text(
                "worst",
                format!(
                    "x = {}, y = {}, t = {}, amount = {}",
                    fmt_point(&w.triple.x[..p.dim]),
                    fmt_point(&w.triple.y[..p.dim]),
                    fmt_f64(w.triple.t),
                    fmt_f64(w.amount)
                ),
            );
        }
    }
    if let (Some(x), Constant::Finite(c)) = (pc.point.as_ref(), rep.constant) {
        let node = p.node("paraconvex.point", x)?;
        let w = paraconvex_subgradient(&f, c, node, t)?;
        r.section("subgradient").witness("", &w);
        if !w.is_verified() {
            status = code::VERIFICATION;
        }
    }
    Ok(Outcome {
        report: r,
        csv: None,
        code: status,
    })
}

fn region_text(reg: &Region, dim: usize) -> String {
    match *reg {
        Region::Empty => "empty".into(),
        Region::WholeSpace => "whole_space".into(),
        Region::OpenHalfspace { normal, bound } => {
            format!(
                "halfspace <{}, x> < {}",
                fmt_point(&normal[..dim]),
                fmt_f64(bound)
            )
        }
        Region::BallExterior { center, radius } => {
            format!(
                "ball_exterior |x - {}| > {}",
                fmt_point(&center[..dim]),
                fmt_f64(radius)
            )
        }
    }
}

pub fn intersect(cfg: &mut Resolved) -> Res {
    let ic = cfg.intersect.clone().unwrap();
    let (p1, p2) = (
        ic.phi1.build("intersect.phi1")?,
        ic.phi2.build("intersect.phi2")?,
    );
    let res = intersection_property(&p1, &p2, ic.alpha)?;
    let dim = p1.dim();
    let mut r = Report::new();
    r.section("intersect")
        .text("region1", region_text(&sublevel_region(&p1, ic.alpha), dim))
        .text("region2", region_text(&sublevel_region(&p2, ic.alpha), dim));
    match res {
        IntersectionResult::Empty => {
            r.text("result", "empty");
        }
        IntersectionResult::Witness(x) => {
            r.text("result", "witness")
                .point("point", &x[..dim])
                .num("phi1", p1.eval(&x))
                .num("phi2", p2.eval(&x));
        }
    }
    Ok(Outcome::ok(r))
}

fn outcome_text(o: &ZsOutcome) -> String {
    match o {
        ZsOutcome::Holds { lambda, mu, .. } => {
            format!("holds lambda = {}, mu = {}", fmt_f64(*lambda), fmt_f64(*mu))
        }
        ZsOutcome::FailsOnSample { reason } => format!("fails_on_sample ({reason})"),
    }
}

pub fn zs(cfg: &mut Resolved) -> Res {
    let p = problem(cfg).clone();
    let (f, g) = (p.f()?, p.g()?);
    let t = tol(cfg);
    let zc = cfg.zs.clone().unwrap();
    let mut r = Report::new();
    r.section("zs")
        .num("eps", zc.eps)
        .text("pairs", zc.pairs.len());
    let mut holds = 0;
    let mut lines = Vec::new();
    for (x1, x2) in &zc.pairs {
        let (n1, n2) = (p.node("zs.x1", x1)?, p.node("zs.x2", x2)?);
        let inst = ZsInstance::new(&f, &g, n1, n2, zc.eps, t)?;
        let out = zs_check(&inst);
        holds += out.holds() as usize;
        lines.push(format!(
            "x1 = {}, x2 = {}: {}",
            fmt_point(&node_coords(f.grid(), n1)),
            fmt_point(&node_coords(g.grid(), n2)),
            outcome_text(&out)
        ));
    }
    r.text("holds", holds)
        .text("fails_on_sample", zc.pairs.len() - holds);
    for (k, l) in lines.iter().enumerate() {
        r.text(&format!("pair.{k}"), l);
    }
    if let (Some(p1), Some(p2), Some(alpha)) = (zc.phi1.as_ref(), zc.phi2.as_ref(), zc.alpha) {
        let (q1, q2) = (p1.build("zs.phi1")?, p2.build("zs.phi2")?);
        let res = intersection_property(&q1, &q2, alpha)?;
        r.section("ip_to_zs").num("alpha", alpha).text(
            "intersection",
            if res.is_empty() { "empty" } else { "nonempty" },
        );
        if res.is_empty() {
            for e in &zc.ip_eps {
                let (inst, out) = ip_to_zs(&f, &g, &q1, &q2, *e, alpha, t)?;
                r.text(
                    &format!("eps_{}", fmt_f64(*e)),
                    format!(
                        "x1 = {}, x2 = {}: {}",
                        fmt_point(&node_coords(f.grid(), inst.x1)),
                        fmt_point(&node_coords(g.grid(), inst.x2)),
                        outcome_text(&out)
                    ),
                );
            }
        }
    }
    Ok(Outcome::ok(r))
}

pub fn minimax(cfg: &mut Resolved) -> Res {
    let mc = cfg.minimax.clone().unwrap();
    let t = tol(cfg);
    let dim = mc.x_lo.len();
    let xg = Grid::new(&mc.x_lo, &mc.x_hi, &vec![mc.hx; dim])
        .map_err(|e| CliError::Spec(format!("minimax: {e}")))?;
    let yg =
        Grid::line(mc.y_lo, mc.y_hi, mc.hy).map_err(|e| CliError::Spec(format!("minimax: {e}")))?;
    let a = SaddleGrid::from_expr(&mc.a, xg, yg).map_err(|e| match e {
        abscvx::Error::Parse(p) => CliError::Parse(format!("minimax.a: {p}")),
        other => CliError::Core(other),
    })?;
    let sv = saddle_values(&a);
    let mut r = Report::new();
    r.section("saddle")
        .num("supinf", sv.supinf)
        .num("infsup", sv.infsup)
        .num("gap", sv.gap)
        .num("y_star", a.y(sv.y_star))
        .point("x_star", &node_coords(a.xgrid(), sv.x_star))
        .text("concave_in_y", sv.concave_in_y)
        .num("grid_tolerance", a.grid_tolerance());
    let mode = if mc.mode == "sweep" {
        CertificateMode::EpsSweep(mc.eps.clone())
    } else {
        CertificateMode::Exact
    };
    let spec = SearchSpec {
        hypothesis: if mc.hypothesis == "paraconvex" {
            Hypothesis::Paraconvex
        } else {
            Hypothesis::PhiConvex
        },
        interior_only: mc.interior_only,
        tol: t,
        ..SearchSpec::default()
    };
    let c = minimax_certificate(&a, &mode, &spec)?;
    let verdict = match c.verdict {
        Verdict::Certified => "certified",
        Verdict::NotFound => "not_found",
        Verdict::Refuted => "refuted",
    };
    r.section("certificate").text("verdict", verdict);
    for h in &c.hypothesis_checks {
        r.text(
            &format!("hypothesis.{}", h.name),
            format!(
                "{} ({})",
                if h.passed { "passed" } else { "failed" },
                h.detail
            ),
        );
    }
    let opt = |x: Option<f64>| x.map_or("none".to_string(), fmt_f64);
    r.text("y1", opt(c.y1)).text("y2", opt(c.y2));
    r.text(
        "xbar",
        c.xbar.map_or("none".to_string(), |x| fmt_point(&x[..dim])),
    );
    r.num("eps", c.eps)
        .num("beta", c.beta)
        .text("lambda", opt(c.lambda))
        .text("mu", opt(c.mu));
    for (k, w) in c.witnesses.iter().enumerate() {
        r.witness(&format!("witness{}.", k + 1), w);
    }
    r.num("gap", c.gap).num("tol_cert", c.tol_cert);
    let hits = c.levels.iter().filter(|l| l.hit.is_some()).count();
    r.text("levels", c.levels.len())
        .text("levels_with_hit", hits);
    for (k, l) in c.levels.iter().enumerate() {
        let hit = match &l.hit {
            None => "none".to_string(),
            Some(h) => format!(
                "y1 = {}, y2 = {}, xbar = {}, lambda = {}",
                fmt_f64(a.y(h.j1)),
                fmt_f64(a.y(h.j2)),
                fmt_point(&node_coords(a.xgrid(), h.xbar)),
                fmt_f64(h.lambda)
            ),
        };
        r.text(
            &format!("level.{k}"),
            format!(
                "beta = {}, eps = {}: {hit}",
                fmt_f64(l.beta),
                fmt_f64(l.eps)
            ),
        );
    }
    let inconsistent = c.verdict == Verdict::Refuted || (c.is_certified() && c.gap > c.tol_cert);
    if let Some(alpha) = mc.alpha {
        r.section("ip_search").num("alpha", alpha);
        if alpha >= sv.infsup {
            r.text("result", "skipped (alpha must be below infsup)");
        } else {
            match ip_search(&a, alpha, t)? {
                None => {
                    r.text("result", "not_found");
                }
                Some(h) => {
                    let m = |q: &abscvx::QuadraticMinorant| {
                        format!(
                            "a = {}, v = {}, c = {}",
                            fmt_f64(q.a()),
                            fmt_point(&q.v()[..dim]),
                            fmt_f64(q.c())
                        )
                    };
                    r.text("result", "found")
                        .num("y1", h.y1)
                        .num("y2", h.y2)
                        .text("phi1", m(&h.phi1))
                        .text("phi2", m(&h.phi2));
                }
            }
        }
    }
    Ok(Outcome {
        report: r,
        csv: None,
        code: if inconsistent {
            code::INCONSISTENT
        } else {
            code::OK
        },
    })
}
