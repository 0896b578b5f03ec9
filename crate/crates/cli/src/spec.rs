//! Problem files: TOML with one `[problem]` table and one table per command.
//!
//! Every optional field is filled in by [`resolve`] so the report can echo
//! the complete configuration.

use abscvx::expr::{catalog, saddle_catalog};
use abscvx::{FunctionExpr, Grid, GridFunction, Point, QuadraticMinorant};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[serde(default)]
    pub problem: ProblemIn,
    pub hull: Option<HullIn>,
    pub envelope: Option<EnvelopeIn>,
    pub subgrad: Option<SubgradIn>,
    pub globalize: Option<GlobalizeIn>,
    pub paraconvex: Option<ParaconvexIn>,
    pub intersect: Option<IntersectIn>,
    pub zs: Option<ZsIn>,
    pub minimax: Option<MinimaxIn>,
    pub selftest: Option<SelftestIn>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemIn {
    pub catalog: Option<String>,
    pub f: Option<String>,
    pub g: Option<String>,
    pub dim: Option<usize>,
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
    pub h: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HullIn {
    pub schedule: Option<Vec<f64>>,
    pub lambda: Option<f64>,
    pub tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeIn {
    pub lambdas: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubgradIn {
    pub point: Option<Vec<f64>>,
    pub eps: Option<f64>,
    pub schedule: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub a: Option<f64>,
    pub v: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalizeIn {
    pub point: Option<Vec<f64>>,
    pub a: Option<f64>,
    pub v: Option<Vec<f64>>,
    pub delta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParaconvexIn {
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
    pub gamma: Option<f64>,
    pub c: Option<f64>,
    pub strong: Option<bool>,
    pub point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MinorantIn {
    pub a: f64,
    pub v: Vec<f64>,
    pub c: f64,
}

impl MinorantIn {
    pub fn build(&self, key: &str) -> Result<QuadraticMinorant, CliError> {
        QuadraticMinorant::new(self.a, &self.v, self.c)
            .map_err(|e| CliError::Spec(format!("{key}: {e}")))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntersectIn {
    pub alpha: Option<f64>,
    pub phi1: Option<MinorantIn>,
    pub phi2: Option<MinorantIn>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZsIn {
    pub eps: Option<f64>,
    pub x1: Option<Vec<f64>>,
    pub x2: Option<Vec<f64>>,
    pub sweep: Option<usize>,
    pub alpha: Option<f64>,
    pub phi1: Option<MinorantIn>,
    pub phi2: Option<MinorantIn>,
    pub ip_eps: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimaxIn {
    pub catalog: Option<String>,
    pub a: Option<String>,
    pub x_lo: Option<Vec<f64>>,
    pub x_hi: Option<Vec<f64>>,
    pub hx: Option<f64>,
    pub y_lo: Option<f64>,
    pub y_hi: Option<f64>,
    pub hy: Option<f64>,
    pub mode: Option<String>,
    pub eps: Option<Vec<f64>>,
    pub interior_only: Option<bool>,
    pub hypothesis: Option<String>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestIn {
    pub count: Option<usize>,
}

/// Fully resolved settings; serialized into the report's `config` sections.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub command: String,
    pub seed: u64,
    pub tol_abs: f64,
    pub tol_rel: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hull: Option<HullCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<EnvelopeCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subgrad: Option<SubgradCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub globalize: Option<GlobalizeCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paraconvex: Option<ParaconvexCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intersect: Option<IntersectCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zs: Option<ZsCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimax: Option<MinimaxCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selftest: Option<SelftestCfg>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProblemCfg {
    pub f: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    pub dim: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub h: f64,
}

impl ProblemCfg {
    pub fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(&self.lo, &self.hi, &vec![self.h; self.dim])
            .map_err(|e| CliError::Spec(format!("problem: {e}")))
    }

    pub fn sample(&self, key: &str, text: &str) -> Result<GridFunction, CliError> {
        let expr = FunctionExpr::parse(text, self.dim)
            .map_err(|e| CliError::Parse(format!("problem.{key}: {e}")))?;
        GridFunction::sample(expr, self.grid()?)
            .map_err(|e| CliError::Spec(format!("problem.{key}: {e}")))
    }

    pub fn f(&self) -> Result<GridFunction, CliError> {
        self.sample("f", &self.f)
    }

    pub fn g(&self) -> Result<GridFunction, CliError> {
        match &self.g {
            Some(g) => self.sample("g", g),
            None => Err(CliError::Spec(
                "problem.g is required for this command".into(),
            )),
        }
    }

    /// Node at `p`, which must lie in the box; off-grid points snap to the
    /// nearest node.
    pub fn node(&self, key: &str, p: &[f64]) -> Result<usize, CliError> {
        let grid = self.grid()?;
        let x = point(key, p, self.dim)?;
        if !grid.contains(&x) {
            return Err(CliError::Spec(format!(
                "{key}: point {p:?} lies outside the box"
            )));
        }
        Ok(grid.nearest(&x))
    }
}

pub fn point(key: &str, p: &[f64], dim: usize) -> Result<Point, CliError> {
    if p.len() != dim {
        return Err(CliError::Spec(format!(
            "{key}: expected {dim} coordinates, found {}",
            p.len()
        )));
    }
    Ok([p[0], if dim == 2 { p[1] } else { 0.0 }])
}

#[derive(Debug, Clone, Serialize)]
pub struct HullCfg {
    /// Empty until filled with the default schedule for the sampled function.
    pub schedule: Vec<f64>,
    pub lambda: f64,
    /// Negative until filled with `tol_grid(f)`.
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeCfg {
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubgradCfg {
    pub point: Vec<f64>,
    pub eps: f64,
    /// Empty until filled with the default schedule.
    pub schedule: Vec<f64>,
    /// Zero means a global search.
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GlobalizeCfg {
    pub point: Vec<f64>,
    pub a: f64,
    pub v: Vec<f64>,
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParaconvexCfg {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub strong: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntersectCfg {
    pub alpha: f64,
    pub phi1: MinorantIn,
    pub phi2: MinorantIn,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZsCfg {
    pub eps: f64,
    pub pairs: Vec<PointPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi1: Option<MinorantIn>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi2: Option<MinorantIn>,
    pub ip_eps: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimaxCfg {
    pub a: String,
    pub x_lo: Vec<f64>,
    pub x_hi: Vec<f64>,
    pub hx: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub hy: f64,
    pub mode: String,
    pub eps: Vec<f64>,
    pub interior_only: bool,
    pub hypothesis: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestCfg {
    pub count: usize,
}

pub fn parse(text: &str) -> Result<SpecFile, CliError> {
    toml::from_str(text).map_err(|e| CliError::Parse(e.to_string().trim_end().to_string()))
}

fn default_h(dim: usize) -> f64 {
    if dim == 1 {
        1.0 / 128.0
    } else {
        1.0 / 16.0
    }
}

fn resolve_problem(p: &ProblemIn) -> Result<ProblemCfg, CliError> {
    let (mut f, mut g, mut lo, mut hi) = (p.f.clone(), p.g.clone(), None, None);
    if let Some(name) = &p.catalog {
        if f.is_some() {
            return Err(CliError::Spec(
                "problem: give either catalog or f, not both".into(),
            ));
        }
        // A pair entry `name.f` / `name.g` supplies both functions.
        let (ef, eg) = match catalog(name) {
            Some(e) => (e, None),
            None => match (catalog(&format!("{name}.f")), catalog(&format!("{name}.g"))) {
                (Some(a), Some(b)) => (a, Some(b)),
                _ => {
                    return Err(CliError::Spec(format!(
                        "problem.catalog: unknown entry '{name}'"
                    )))
                }
            },
        };
        f = Some(ef.expr.to_string());
        if let Some(eg) = eg {
            if g.is_none() {
                g = Some(eg.expr.to_string());
            }
        }
        lo = Some(vec![ef.lo]);
        hi = Some(vec![ef.hi]);
    }
    let f = f.ok_or_else(|| CliError::Spec("problem: one of catalog or f is required".into()))?;
    let dim = p.dim.unwrap_or(1);
    if !(dim == 1 || dim == 2) {
        return Err(CliError::Spec(format!(
            "problem.dim: must be 1 or 2, found {dim}"
        )));
    }
    if p.catalog.is_some() && dim != 1 {
        return Err(CliError::Spec(
            "problem.catalog: catalog entries are one-dimensional".into(),
        ));
    }
    let lo = p.lo.clone().or(lo).unwrap_or_else(|| vec![-2.0; dim]);
    let hi = p.hi.clone().or(hi).unwrap_or_else(|| vec![2.0; dim]);
    for (k, v) in [("lo", &lo), ("hi", &hi)] {
        if v.len() != dim {
            return Err(CliError::Spec(format!(
                "problem.{k}: expected {dim} coordinates, found {}",
                v.len()
            )));
        }
    }
    let cfg = ProblemCfg {
        f,
        g,
        dim,
        lo,
        hi,
        h: p.h.unwrap_or_else(|| default_h(dim)),
    };
    cfg.grid()?;
    Ok(cfg)
}

fn origin(dim: usize) -> Vec<f64> {
    vec![0.0; dim]
}

/// Fills every default for `command`.
pub fn resolve(
    file: &SpecFile,
    command: &str,
    seed: u64,
    tol: Option<f64>,
) -> Result<Resolved, CliError> {
    let base = abscvx::Tolerance::default();
    let mut r = Resolved {
        command: command.to_string(),
        seed,
        tol_abs: tol.unwrap_or(base.abs),
        tol_rel: base.rel,
        problem: None,
        hull: None,
        envelope: None,
        subgrad: None,
        globalize: None,
        paraconvex: None,
        intersect: None,
        zs: None,
        minimax: None,
        selftest: None,
    };
    if !(r.tol_abs >= 0.0 && r.tol_abs.is_finite()) {
        return Err(CliError::Spec(format!(
            "--tol must be a nonnegative number, got {}",
            r.tol_abs
        )));
    }
    let needs_problem = !matches!(command, "intersect" | "minimax" | "selftest");
    if needs_problem {
        r.problem = Some(resolve_problem(&file.problem)?);
    }
    let dim = r.problem.as_ref().map_or(1, |p| p.dim);
    match command {
        "hull" => {
            let s = file.hull.as_ref();
            r.hull = Some(HullCfg {
                schedule: s.and_then(|s| s.schedule.clone()).unwrap_or_default(),
                lambda: s.and_then(|s| s.lambda).unwrap_or(1.0),
                tol: s.and_then(|s| s.tol).unwrap_or(-1.0),
            });
        }
        "envelope" => {
            let l = file
                .envelope
                .as_ref()
                .and_then(|s| s.lambdas.clone())
                .unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
            r.envelope = Some(EnvelopeCfg { lambdas: l });
        }
        "subgrad" => {
            let s = file.subgrad.as_ref();
            let get = |f: fn(&SubgradIn) -> Option<f64>| s.and_then(f);
            if get(|s| s.a).is_some() != s.and_then(|s| s.v.as_ref()).is_some() {
                return Err(CliError::Spec(
                    "subgrad: a and v must be given together".into(),
                ));
            }
            r.subgrad = Some(SubgradCfg {
                point: s
                    .and_then(|s| s.point.clone())
                    .unwrap_or_else(|| origin(dim)),
                eps: get(|s| s.eps).unwrap_or(0.0),
                schedule: s.and_then(|s| s.schedule.clone()).unwrap_or_default(),
                delta: get(|s| s.delta).unwrap_or(0.0),
                a: get(|s| s.a),
                v: s.and_then(|s| s.v.clone()),
            });
        }
        "globalize" => {
            let s = file
                .globalize
                .as_ref()
                .ok_or_else(|| CliError::Spec("[globalize] table is required".into()))?;
            r.globalize = Some(GlobalizeCfg {
                point: s.point.clone().unwrap_or_else(|| origin(dim)),
                a: s.a.unwrap_or(0.0),
                v: s.v.clone().unwrap_or_else(|| origin(dim)),
                delta: s
                    .delta
                    .ok_or_else(|| CliError::Spec("globalize.delta is required".into()))?,
            });
        }
        "paraconvex" => {
            let p = r.problem.as_ref().unwrap();
            let s = file.paraconvex.as_ref();
            r.paraconvex = Some(ParaconvexCfg {
                lo: s.and_then(|s| s.lo.clone()).unwrap_or_else(|| p.lo.clone()),
                hi: s.and_then(|s| s.hi.clone()).unwrap_or_else(|| p.hi.clone()),
                gamma: s.and_then(|s| s.gamma).unwrap_or(2.0),
                c: s.and_then(|s| s.c),
                strong: s.and_then(|s| s.strong).unwrap_or(false),
                point: s.and_then(|s| s.point.clone()),
            });
        }
        "intersect" => {
            let s = file
                .intersect
                .as_ref()
                .ok_or_else(|| CliError::Spec("[intersect] table is required".into()))?;
            let need = |m: &Option<MinorantIn>, k: &str| {
                m.clone()
                    .ok_or_else(|| CliError::Spec(format!("intersect.{k} is required")))
            };
            r.intersect = Some(IntersectCfg {
                alpha: s.alpha.unwrap_or(0.0),
                phi1: need(&s.phi1, "phi1")?,
                phi2: need(&s.phi2, "phi2")?,
            });
        }
        "zs" => {
            let p = r.problem.as_ref().unwrap();
            if p.g.is_none() {
                return Err(CliError::Spec("zs: problem.g is required".into()));
            }
            let s = file.zs.as_ref();
            let mut pairs = Vec::new();
            match (s.and_then(|s| s.x1.clone()), s.and_then(|s| s.x2.clone())) {
                (Some(a), Some(b)) => pairs.push((a, b)),
                (None, None) => {
                    let n = s.and_then(|s| s.sweep).unwrap_or(8);
                    pairs = sweep_pairs(p, n)?;
                }
                _ => {
                    return Err(CliError::Spec(
                        "zs: x1 and x2 must be given together".into(),
                    ))
                }
            }
            let (phi1, phi2) = (
                s.and_then(|s| s.phi1.clone()),
                s.and_then(|s| s.phi2.clone()),
            );
            if phi1.is_some() != phi2.is_some() {
                return Err(CliError::Spec(
                    "zs: phi1 and phi2 must be given together".into(),
                ));
            }
            let ip = phi1.is_some();
            r.zs = Some(ZsCfg {
                eps: s.and_then(|s| s.eps).unwrap_or(0.0),
                pairs,
                alpha: if ip {
                    Some(s.and_then(|s| s.alpha).unwrap_or(0.0))
                } else {
                    None
                },
                phi1,
                phi2,
                ip_eps: if ip {
                    s.and_then(|s| s.ip_eps.clone())
                        .unwrap_or_else(|| vec![1e-1, 1e-2])
                } else {
                    Vec::new()
                },
            });
        }
        "minimax" => r.minimax = Some(resolve_minimax(file.minimax.as_ref())?),
        "selftest" => {
            r.selftest = Some(SelftestCfg {
                count: file.selftest.as_ref().and_then(|s| s.count).unwrap_or(25),
            });
        }
        other => return Err(CliError::Spec(format!("unknown command '{other}'"))),
    }
    Ok(r)
}

/// `n × n` interior node pairs, evenly spread; one-dimensional problems only.
type PointPair = (Vec<f64>, Vec<f64>);

fn sweep_pairs(p: &ProblemCfg, n: usize) -> Result<Vec<PointPair>, CliError> {
    if p.dim != 1 {
        return Err(CliError::Spec(
            "zs.sweep needs a one-dimensional problem; give x1 and x2".into(),
        ));
    }
    let grid = p.grid()?;
    let len = grid.len();
    if n < 1 || len < 3 {
        return Err(CliError::Spec(
            "zs.sweep needs n >= 1 and at least one interior node".into(),
        ));
    }
    let picks: Vec<f64> = (0..n)
        .map(|k| {
            let i = if n == 1 {
                len / 2
            } else {
                1 + k * (len - 3) / (n - 1)
            };
            grid.node(i)[0]
        })
        .collect();
    let mut out = Vec::new();
    for &a in &picks {
        for &b in &picks {
            out.push((vec![a], vec![b]));
        }
    }
    Ok(out)
}

fn resolve_minimax(s: Option<&MinimaxIn>) -> Result<MinimaxCfg, CliError> {
    let s = s.ok_or_else(|| CliError::Spec("[minimax] table is required".into()))?;
    let (text, xb, yb) = match (&s.catalog, &s.a) {
        (Some(_), Some(_)) => {
            return Err(CliError::Spec(
                "minimax: give either catalog or a, not both".into(),
            ))
        }
        (Some(name), None) => {
            let e = saddle_catalog(name).ok_or_else(|| {
                CliError::Spec(format!("minimax.catalog: unknown entry '{name}'"))
            })?;
            (e.expr.to_string(), Some(e.x), Some(e.y))
        }
        (None, Some(a)) => (a.clone(), None, None),
        (None, None) => {
            return Err(CliError::Spec(
                "minimax: one of catalog or a is required".into(),
            ))
        }
    };
    let x_lo = s
        .x_lo
        .clone()
        .unwrap_or_else(|| vec![xb.map_or(-2.0, |b| b.0)]);
    let x_hi = s
        .x_hi
        .clone()
        .unwrap_or_else(|| vec![xb.map_or(2.0, |b| b.1)]);
    if x_lo.len() != x_hi.len() || !(1..=2).contains(&x_lo.len()) {
        return Err(CliError::Spec(
            "minimax: x_lo and x_hi must both have 1 or 2 coordinates".into(),
        ));
    }
    let mode = s.mode.clone().unwrap_or_else(|| "exact".into());
    if mode != "exact" && mode != "sweep" {
        return Err(CliError::Spec(format!(
            "minimax.mode: expected 'exact' or 'sweep', found '{mode}'"
        )));
    }
    let hypothesis = s.hypothesis.clone().unwrap_or_else(|| "phi_convex".into());
    if hypothesis != "phi_convex" && hypothesis != "paraconvex" {
        return Err(CliError::Spec(format!(
            "minimax.hypothesis: expected 'phi_convex' or 'paraconvex', found '{hypothesis}'"
        )));
    }
    let eps = if mode == "sweep" {
        s.eps.clone().unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3])
    } else {
        vec![0.0]
    };
    Ok(MinimaxCfg {
        a: text,
        x_lo,
        x_hi,
        hx: s.hx.unwrap_or(1.0 / 16.0),
        y_lo: s.y_lo.unwrap_or(yb.map_or(-2.0, |b| b.0)),
        y_hi: s.y_hi.unwrap_or(yb.map_or(2.0, |b| b.1)),
        hy: s.hy.unwrap_or(1.0 / 16.0),
        mode,
        eps,
        interior_only: s.interior_only.unwrap_or(false),
        hypothesis,
        alpha: s.alpha,
    })
}
