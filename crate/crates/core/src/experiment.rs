//! Reproducible experiments: each one maps a resolved parameter set to a
//! [`Report`] holding scalar estimates, pass/fail checks and long-format CSV
//! tables. The same functions back the command-line runner and the
//! acceptance suite.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::{covariance_matrix, covariance_r, FbmCholesky, HurstParam, WienerGrid};
use crate::grid::{delta1, delta2, holder_norm1, Grid, PairSet, SamplePath};
use crate::io::{write_area, write_jumps, write_matrix, write_path, write_rows};
use crate::kac_stroock::{sample_poisson, Epsilon, FastXEps, XEps};
use crate::levy_area::{
    area_closed_form, area_smooth_quadrature, chen_check, random_triples, AreaField, AreaMethod, AreaTable, ChenReport,
    FbmArea, FnPath,
};
use crate::quadrature::{Power, Tolerance};
use crate::rng::replicate_seed;
use crate::rough_sde::{
    solve_ode_smooth, solve_rough, LinearField, OdeOptions, RoughDriver, RoughOptions, TrigField, VectorField,
};
use crate::sewing::{lambda_error_budget, sew, SewOptions};
use crate::stats::{mean_se, ols, variance_se};
use crate::weak::{
    binomial_stderr_floor, bound_report, even_moment_bound, fdd_distance, increasing_trend, linspace, moment_check,
    moment_slope, odd_moment_bound, product_grid, tail_from_norms, telegraph_integrals, Functionals,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    FbmVariance,
    KsMoments,
    CfBound,
    LevyAreaIdentity,
    ChenCheck,
    RoughSolve,
    OdeVsRough,
    FddConverge,
    MomentSlope,
    HolderTail,
    SewingDemo,
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Experiment::FbmVariance,
        Experiment::KsMoments,
        Experiment::CfBound,
        Experiment::LevyAreaIdentity,
        Experiment::ChenCheck,
        Experiment::RoughSolve,
        Experiment::OdeVsRough,
        Experiment::FddConverge,
        Experiment::MomentSlope,
        Experiment::HolderTail,
        Experiment::SewingDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::FbmVariance => "fbm-variance",
            Experiment::KsMoments => "ks-moments",
            Experiment::CfBound => "cf-bound",
            Experiment::LevyAreaIdentity => "levy-area-identity",
            Experiment::ChenCheck => "chen-check",
            Experiment::RoughSolve => "rough-solve",
            Experiment::OdeVsRough => "ode-vs-rough",
            Experiment::FddConverge => "fdd-converge",
            Experiment::MomentSlope => "moment-slope",
            Experiment::HolderTail => "holder-tail",
            Experiment::SewingDemo => "sewing-demo",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown experiment {s:?}")))
    }
}

/// User-facing configuration; every field is optional and falls back to a
/// per-experiment default, except `seed`, which must be given.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub hurst: Option<f64>,
    pub eps: Option<Vec<f64>>,
    pub horizon: Option<f64>,
    pub cells: Option<usize>,
    pub replicates: Option<usize>,
    pub reference_replicates: Option<usize>,
    pub seed: Option<u64>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub u_grid: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub exponents: Option<Vec<f64>>,
    pub lags: Option<Vec<u32>>,
    pub thresholds: Option<Vec<f64>>,
    pub field_scale: Option<f64>,
    pub initial: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
}

/// Fully resolved parameters, echoed into every summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Params {
    pub hurst: f64,
    /// Sorted in decreasing order.
    pub eps: Vec<f64>,
    pub horizon: f64,
    pub cells: usize,
    pub replicates: usize,
    pub reference_replicates: usize,
    pub seed: u64,
    pub gamma: f64,
    pub alpha: f64,
    pub u_grid: Vec<f64>,
    /// Absolute/relative tolerance for deterministic checks, number of
    /// standard errors for statistical ones.
    pub tol: f64,
    pub exponents: Vec<f64>,
    /// Lags are `2^{-k}` for `k` in this list.
    pub lags: Vec<u32>,
    /// Empty means data-driven thresholds.
    pub thresholds: Vec<f64>,
    pub field_scale: f64,
    pub initial: Vec<f64>,
}

impl ExperimentConfig {
    pub fn resolve(&self, exp: Experiment) -> Result<Params> {
        use Experiment::*;
        let eps_default = match exp {
            KsMoments => vec![0.2, 0.1],
            LevyAreaIdentity => vec![0.1],
            ChenCheck => vec![0.2],
            _ => vec![0.2, 0.1, 0.05],
        };
        let cells_default = match exp {
            FbmVariance => 64,
            ChenCheck => 256,
            MomentSlope | RoughSolve | OdeVsRough | FddConverge | HolderTail => 4096,
            _ => 16,
        };
        let replicates_default = match exp {
            FbmVariance | MomentSlope => 10_000,
            KsMoments | CfBound => 100_000,
            LevyAreaIdentity => 100,
            ChenCheck => 1000,
            OdeVsRough | FddConverge | HolderTail => 10_000,
            RoughSolve | SewingDemo => 1,
        };
        let tol_default = match exp {
            LevyAreaIdentity | ChenCheck => 1e-6,
            SewingDemo => 1e-10,
            RoughSolve => 1e-4,
            MomentSlope => 0.05,
            _ => 3.0,
        };
        let u_default = match exp {
            CfBound => linspace(-2.0, 2.0, 16),
            _ => linspace(-1.0, 1.0, 4),
        };
        let mut eps = self.eps.clone().unwrap_or(eps_default);
        eps.sort_by(|a, b| b.total_cmp(a));
        let p = Params {
            hurst: self.hurst.unwrap_or(0.4),
            eps,
            horizon: self.horizon.unwrap_or(1.0),
            cells: self.cells.unwrap_or(cells_default),
            replicates: self.replicates.unwrap_or(replicates_default),
            reference_replicates: self.reference_replicates.unwrap_or(10_000),
            seed: self.seed.unwrap_or(0),
            gamma: self.gamma.unwrap_or(0.35),
            alpha: self.alpha.unwrap_or(0.9),
            u_grid: self.u_grid.clone().unwrap_or(u_default),
            tol: self.tol.unwrap_or(tol_default),
            exponents: self.exponents.clone().unwrap_or_else(|| vec![0.0, 1.0, 0.3]),
            lags: self.lags.clone().unwrap_or_else(|| (1..=6).collect()),
            thresholds: self.thresholds.clone().unwrap_or_default(),
            field_scale: self.field_scale.unwrap_or(1.0),
            initial: self.initial.clone().unwrap_or_else(|| vec![0.5, -0.5]),
        };
        let mut problems = Vec::new();
        if self.seed.is_none() {
            problems.push("seed: required".to_string());
        }
        if !(p.hurst > 1.0 / 3.0 && p.hurst < 0.5) {
            problems.push(format!("hurst: must lie in (1/3, 1/2), got {}", p.hurst));
        }
        if p.eps.is_empty() || p.eps.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            problems.push(format!("eps: values must lie in (0, 1], got {:?}", p.eps));
        }
        if p.eps.windows(2).any(|w| w[0] == w[1]) {
            problems.push("eps: values must be distinct".into());
        }
        if !(p.horizon > 0.0 && p.horizon.is_finite()) {
            problems.push(format!("horizon: must be positive, got {}", p.horizon));
        }
        if p.cells == 0 {
            problems.push("cells: must be >= 1".into());
        }
        if p.replicates == 0 || p.reference_replicates == 0 {
            problems.push("replicates: must be >= 1".into());
        }
        if !(p.gamma > 0.0 && p.gamma < 1.0) {
            problems.push(format!("gamma: must lie in (0, 1), got {}", p.gamma));
        }
        if !(p.alpha > 0.0 && p.alpha < 1.0) {
            problems.push(format!("alpha: must lie in (0, 1), got {}", p.alpha));
        }
        if p.u_grid.is_empty() {
            problems.push("u_grid: must not be empty".into());
        }
        if !(p.tol > 0.0) {
            problems.push(format!("tol: must be positive, got {}", p.tol));
        }
        if p.exponents.is_empty() || p.exponents.iter().any(|&e| !(e >= 0.0)) {
            problems.push("exponents: need at least one non-negative exponent".into());
        }
        if p.lags.len() < 3 || p.lags.iter().any(|&k| k == 0 || k > 30) {
            problems.push("lags: need >= 3 exponents in 1..=30".into());
        }
        if p.initial.len() != 2 {
            problems.push("initial: need two entries".into());
        }
        if problems.is_empty() {
            Ok(p)
        } else {
            Err(Error::Parameter(problems.join("; ")))
        }
    }
}

/// A named CSV table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub csv: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub experiment: Experiment,
    pub version: &'static str,
    pub parameters: Params,
    pub estimates: BTreeMap<String, f64>,
    pub stderrs: BTreeMap<String, f64>,
    pub bound: BTreeMap<String, f64>,
    pub checks: BTreeMap<String, bool>,
    pub pass: bool,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl Report {
    fn new(experiment: Experiment, parameters: &Params) -> Self {
        Self {
            experiment,
            version: env!("CARGO_PKG_VERSION"),
            parameters: parameters.clone(),
            estimates: BTreeMap::new(),
            stderrs: BTreeMap::new(),
            bound: BTreeMap::new(),
            checks: BTreeMap::new(),
            pass: true,
            tables: Vec::new(),
        }
    }

    fn estimate(&mut self, key: impl Into<String>, value: f64, stderr: Option<f64>) {
        let key = key.into();
        if let Some(se) = stderr {
            self.stderrs.insert(key.clone(), se);
        }
        self.estimates.insert(key, value);
    }

    fn check(&mut self, key: impl Into<String>, ok: bool) {
        self.pass &= ok;
        self.checks.insert(key.into(), ok);
    }

    fn table(&mut self, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut csv = Vec::new();
        fill(&mut csv)?;
        self.tables.push(Table { name: name.to_string(), csv });
        Ok(())
    }

    fn rows<S: Serialize>(&mut self, name: &str, rows: &[S]) -> Result<()> {
        self.table(name, |b| write_rows(b, rows))
    }

    /// Writes `<dir>/<experiment>/<table>.csv` and `summary.json`; returns
    /// the experiment directory.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let out = dir.join(self.experiment.name());
        std::fs::create_dir_all(&out)?;
        for t in &self.tables {
            std::fs::write(out.join(format!("{}.csv", t.name)), &t.csv)?;
        }
        let mut json = serde_json::to_vec_pretty(self)?;
        json.push(b'\n');
        std::fs::write(out.join("summary.json"), json)?;
        Ok(out)
    }
}

pub fn run(exp: Experiment, p: &Params) -> Result<Report> {
    match exp {
        Experiment::FbmVariance => fbm_variance(p),
        Experiment::KsMoments => ks_moments(p),
        Experiment::CfBound => cf_bound(p),
        Experiment::LevyAreaIdentity => levy_area_identity(p),
        Experiment::ChenCheck => chen_experiment(p),
        Experiment::RoughSolve => rough_solve(p),
        Experiment::MomentSlope => moment_slope_experiment(p),
        Experiment::SewingDemo => sewing_demo(p),
        Experiment::OdeVsRough => diffusion(p, Parts { fdd: false, ode: true, tail: false }, exp),
        Experiment::FddConverge => diffusion(p, Parts { fdd: true, ode: false, tail: false }, exp),
        Experiment::HolderTail => diffusion(p, Parts { fdd: false, ode: false, tail: true }, exp),
    }
}

fn hurst(p: &Params) -> Result<HurstParam> {
    HurstParam::new(p.hurst)
}

fn last(path: &SamplePath) -> &[f64] {
    path.point(path.grid().len() - 1)
}

#[derive(Serialize)]
struct VarianceRow {
    t: f64,
    empirical: f64,
    stderr: f64,
    exact: f64,
}

/// `Var(B_t)` from Cholesky draws against `R(t, t) = t^{2H}/(2H)`.
pub fn fbm_variance(p: &Params) -> Result<Report> {
    let h = hurst(p)?;
    let mut rep = Report::new(Experiment::FbmVariance, p);
    let grid = Grid::with_cells(p.horizon, p.cells)?;
    let chol = FbmCholesky::new(&grid, h)?;
    let paths: Vec<SamplePath> = (0..p.replicates as u64)
        .into_par_iter()
        .map(|r| chol.sample(1, replicate_seed(p.seed, r)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for k in 1..grid.len() {
        let xs: Vec<f64> = paths.iter().map(|q| q.value(k, 0)).collect();
        let (v, se) = variance_se(&xs);
        rows.push(VarianceRow {
            t: grid.node(k),
            empirical: v,
            stderr: se,
            exact: covariance_r(grid.node(k), grid.node(k), h)?,
        });
    }
    let end = rows.last().expect("grid has a cell");
    let exact = p.horizon.powf(2.0 * p.hurst) / (2.0 * p.hurst);
    rep.estimate("variance_terminal", end.empirical, Some(end.stderr));
    rep.bound.insert("variance_terminal_exact".into(), exact);
    rep.estimate("cholesky_jitter", chol.jitter(), None);
    let ok = (end.empirical - exact).abs() <= p.tol * end.stderr;
    rep.check("variance_terminal_within_tol_stderr", ok);
    rep.rows("variance", &rows)?;
    rep.table("covariance", |b| write_matrix(b, &covariance_matrix(&grid, h)?))?;
    rep.table("path", |b| write_path(b, &paths[0]))?;
    Ok(rep)
}

#[derive(Serialize)]
struct MomentRow {
    exponent: f64,
    eps: f64,
    order: u32,
    moment: f64,
    stderr: f64,
    bound: f64,
    pass: bool,
}

/// Moments of `∫ t^p θ^ε(t) dt` against the even/odd moment bounds.
pub fn ks_moments(p: &Params) -> Result<Report> {
    let mut rep = Report::new(Experiment::KsMoments, p);
    let mut rows = Vec::new();
    for &e in &p.eps {
        let eps = Epsilon::new(e)?;
        for &q in &p.exponents {
            let f = Power::new(1.0, q);
            let fun = Functionals::new(&f, p.alpha, e, p.horizon)?;
            let samples = telegraph_integrals(&f, eps, p.horizon, p.replicates, p.seed)?;
            let checks = [
                (2, even_moment_bound(1, fun.l2_norm)),
                (4, even_moment_bound(2, fun.l2_norm)),
                (1, odd_moment_bound(0, fun.l2_norm, fun.varphi)),
                (3, odd_moment_bound(1, fun.l2_norm, fun.varphi)),
            ];
            for (order, bound) in checks {
                let mut c = moment_check(&samples, order, bound);
                let lhs = if order % 2 == 1 { c.moment.abs() } else { c.moment };
                c.pass = lhs <= bound + p.tol * c.stderr;
                let key = format!("moment{order}_p{q}_eps{e}");
                rep.estimate(key.clone(), c.moment, Some(c.stderr));
                rep.bound.insert(key.clone(), bound);
                rep.check(key, c.pass);
                rows.push(MomentRow {
                    exponent: q,
                    eps: e,
                    order,
                    moment: c.moment,
                    stderr: c.stderr,
                    bound,
                    pass: c.pass,
                });
            }
        }
    }
    rep.rows("moments", &rows)?;
    let smallest = *p.eps.last().expect("validated");
    let pr = sample_poisson(1, p.horizon, Epsilon::new(smallest)?, replicate_seed(p.seed, 0))?;
    rep.table("jumps", |b| write_jumps(b, &pr))?;
    Ok(rep)
}

#[derive(Serialize)]
struct CfRow {
    eps: f64,
    u: f64,
    distance: f64,
    stderr: f64,
    bound: f64,
    pass: bool,
}

/// Characteristic-function distance of `∫ t^p θ^ε` (first exponent) to its
/// Gaussian limit, against the explicit bound.
pub fn cf_bound(p: &Params) -> Result<Report> {
    let mut rep = Report::new(Experiment::CfBound, p);
    let f = Power::new(1.0, p.exponents[0]);
    let mut rows = Vec::new();
    let mut maxima = Vec::new();
    for &e in &p.eps {
        let fun = Functionals::new(&f, p.alpha, e, p.horizon)?;
        let samples = telegraph_integrals(&f, Epsilon::new(e)?, p.horizon, p.replicates, p.seed)?;
        let br = bound_report(fun, &samples, &p.u_grid)?;
        let mut all = true;
        for r in &br.rows {
            let pass = r.distance <= r.bound + p.tol * r.stderr;
            all &= pass;
            rows.push(CfRow { eps: e, u: r.u, distance: r.distance, stderr: r.stderr, bound: r.bound, pass });
        }
        let worst_u = br.rows.iter().max_by(|a, b| a.distance.total_cmp(&b.distance)).expect("u-grid not empty");
        rep.estimate(format!("max_distance_eps{e}"), br.max_distance, Some(worst_u.stderr));
        rep.bound.insert(format!("max_bound_eps{e}"), br.rows.iter().map(|r| r.bound).fold(0.0, f64::max));
        rep.estimate(format!("phi_eps{e}"), fun.phi, None);
        rep.estimate(format!("psi_eps{e}"), fun.psi, None);
        rep.estimate(format!("varphi_eps{e}"), fun.varphi, None);
        rep.check(format!("within_bound_eps{e}"), all);
        maxima.push(br.max_distance);
    }
    rep.check("distance_strictly_decreasing", maxima.windows(2).all(|w| w[1] < w[0]));
    rep.rows("cf_distance", &rows)?;
    Ok(rep)
}

fn entry_scale(a: &[f64], dx: &[f64]) -> f64 {
    let d = dx.len();
    let mut s: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            s = s.max(a[i * d + j].abs()).max((dx[i] * dx[j]).abs());
        }
    }
    s
}

#[derive(Serialize)]
struct AreaRow {
    replicate: u64,
    s: f64,
    t: f64,
    i: usize,
    j: usize,
    closed_form: f64,
    quadrature: f64,
    abs_diff: f64,
    scale: f64,
}

/// The closed-form area of `X^ε` against direct quadrature of
/// `∫ (X^j − X^j_s) Ẋ^i`, over many Poisson seeds.
pub fn levy_area_identity(p: &Params) -> Result<Report> {
    let h = hurst(p)?;
    let mut rep = Report::new(Experiment::LevyAreaIdentity, p);
    let d = 2;
    let windows = [(0.0, p.horizon), (p.horizon / 3.0, 2.0 * p.horizon / 3.0)];
    let mut rows = Vec::new();
    for &e in &p.eps {
        let eps = Epsilon::new(e)?;
        let per_rep: Vec<Vec<AreaRow>> = (0..p.replicates as u64)
            .into_par_iter()
            .map(|r| {
                let pr = sample_poisson(d, p.horizon, eps, replicate_seed(p.seed, r))?;
                let x = XEps::new(&pr, h);
                let mut out = Vec::new();
                for &(s, t) in &windows {
                    let lm = area_closed_form(&pr, h, s, t, 1e-11)?;
                    let q = area_smooth_quadrature(&x, s, t, Tolerance::new(1e-14, 1e-11))?;
                    let dx: Vec<f64> = (0..d).map(|i| Ok(x.value(i, t)? - x.value(i, s)?)).collect::<Result<_>>()?;
                    let scale = entry_scale(&q, &dx);
                    for i in 0..d {
                        for j in 0..d {
                            let k = i * d + j;
                            out.push(AreaRow {
                                replicate: r,
                                s,
                                t,
                                i,
                                j,
                                closed_form: lm[k],
                                quadrature: q[k],
                                abs_diff: (lm[k] - q[k]).abs(),
                                scale,
                            });
                        }
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let flat: Vec<AreaRow> = per_rep.into_iter().flatten().collect();
        let worst = flat.iter().map(|r| r.abs_diff / r.scale).fold(0.0, f64::max);
        rep.estimate(format!("max_relative_gap_eps{e}"), worst, None);
        rep.bound.insert(format!("max_relative_gap_eps{e}"), p.tol);
        rep.check(format!("closed_form_matches_quadrature_eps{e}"), worst < p.tol);
        rows.extend(flat);
    }
    rep.rows("areas", &rows)?;
    let pr = sample_poisson(d, p.horizon, Epsilon::new(p.eps[0])?, replicate_seed(p.seed, 0))?;
    rep.table("jumps", |b| write_jumps(b, &pr))?;
    Ok(rep)
}

#[derive(Serialize)]
struct ChenRow {
    source: &'static str,
    triples: usize,
    max_defect: f64,
    scale: f64,
    tolerance: f64,
    pass: bool,
}

fn chen_row(source: &'static str, r: &ChenReport) -> ChenRow {
    ChenRow {
        source,
        triples: r.triples,
        max_defect: r.max_defect,
        scale: r.scale,
        tolerance: r.tolerance,
        pass: r.pass,
    }
}

/// `δδ = 0`, exactness of Chen reconstruction from anchors, and Chen's
/// relation for independently computed quadrature areas.
pub fn chen_experiment(p: &Params) -> Result<Report> {
    let h = hurst(p)?;
    let mut rep = Report::new(Experiment::ChenCheck, p);
    let grid = Grid::with_cells(p.horizon, p.cells)?;
    let w = WienerGrid::sample(&grid, 2, p.seed)?;
    let triples = random_triples(grid.len(), p.replicates, replicate_seed(p.seed, 1));

    // δδ on a Brownian path
    let bm = w.path()?;
    let inc = delta1(&bm);
    let mut dd: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &(s, u, t) in &triples {
        for v in delta2(&inc, s, u, t)? {
            dd = dd.max(v.abs());
        }
        for i in 0..2 {
            scale = scale.max(inc.value(s, t, i).abs());
        }
    }
    let dd_tol = 8.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    rep.estimate("delta_delta_max", dd, None);
    rep.bound.insert("delta_delta_max".into(), dd_tol);
    rep.check("delta_delta_vanishes", dd <= dd_tol);
    let mut rows = vec![ChenRow {
        source: "delta-delta",
        triples: triples.len(),
        max_defect: dd,
        scale,
        tolerance: dd_tol,
        pass: dd <= dd_tol,
    }];

    // anchored fields: defect must sit at rounding level
    let fbm = FbmArea::new(&grid, h).field(&w)?;
    let pl = AreaField::piecewise_linear(bm.clone());
    for (name, field) in [("fbm-anchored", &fbm), ("piecewise-linear-anchored", &pl)] {
        let r = chen_check(field, &triples, 1e-12)?;
        rep.estimate(format!("chen_defect_{name}"), r.max_defect, None);
        rep.check(format!("chen_exact_{name}"), r.pass);
        rows.push(chen_row(name, &r));
    }
    rep.table("area", |b| write_area(b, &fbm))?;

    // independently computed quadrature areas
    let coarse = Grid::with_cells(p.horizon, 16)?;
    let small = random_triples(coarse.len(), p.replicates, replicate_seed(p.seed, 2));
    let tol = Tolerance::new(1e-14, 1e-11);
    let smooth = FnPath::new(
        2,
        |i: usize, t: f64| if i == 0 { (3.0 * t).sin() } else { t * t - (2.0 * t).cos() },
        |i: usize, t: f64| if i == 0 { 3.0 * (3.0 * t).cos() } else { 2.0 * t + 2.0 * (2.0 * t).sin() },
    );
    let sp = SamplePath::from_fn(coarse, 2, |t, i| crate::levy_area::SmoothPath::value(&smooth, i, t))?;
    let table = AreaTable::build(sp, |s, t| area_smooth_quadrature(&smooth, s, t, tol))?;
    let r = chen_check(&table, &small, p.tol)?;
    rep.estimate("chen_defect_quadrature_smooth", r.max_defect, None);
    rep.check("chen_quadrature_smooth", r.pass);
    rows.push(chen_row("quadrature-smooth", &r));

    let pr = sample_poisson(2, p.horizon, Epsilon::new(p.eps[0])?, replicate_seed(p.seed, 3))?;
    let x = XEps::new(&pr, h);
    let xp = SamplePath::from_fn(coarse, 2, |t, i| x.value(i, t).unwrap_or(f64::NAN))?;
    let table = AreaTable::build(xp, |s, t| area_smooth_quadrature(&x, s, t, tol))?;
    let r = chen_check(&table, &small, p.tol)?;
    rep.estimate("chen_defect_quadrature_xeps", r.max_defect, None);
    rep.check("chen_quadrature_xeps", r.pass);
    rows.push(chen_row("quadrature-xeps", &r));
    rep.rows("chen", &rows)?;
    Ok(rep)
}

#[derive(Serialize)]
struct ConvergenceRow {
    cells: usize,
    step: f64,
    terminal: f64,
    exact: f64,
    abs_error: f64,
}

/// Linear equation `dy = y dx` on a smooth driver, whose solution is
/// `a·e^{x_t − x_0}`, under grid refinement; plus the drift-only reduction
/// to explicit Euler.
pub fn rough_solve(p: &Params) -> Result<Report> {
    let mut rep = Report::new(Experiment::RoughSolve, p);
    let finest = p.cells.max(8);
    let x = |t: f64| 0.5 * (2.0 * std::f64::consts::PI * t).sin() + t;
    let a = p.initial[0];
    let exact = a * (x(p.horizon) - x(0.0)).exp();
    let lin = LinearField::scalar(1.0, 0.0);
    let mut rows = Vec::new();
    let solution;
    let mut cells = 64.min(finest);
    loop {
        let g = Grid::with_cells(p.horizon, cells)?;
        let path = SamplePath::from_fn(g, 1, |t, _| x(t))?;
        let anchors = (0..g.len()).map(|k| 0.5 * (path.value(k, 0) - path.value(0, 0)).powi(2)).collect();
        let driver = RoughDriver::new(AreaField::new(path, anchors, AreaMethod::DiagonalClosedForm)?, 0.5)?;
        let y = solve_rough(&driver, &lin, &[a], RoughOptions::default())?;
        let terminal = last(&y)[0];
        rows.push(ConvergenceRow { cells, step: g.step(), terminal, exact, abs_error: (terminal - exact).abs() });
        if cells >= finest {
            solution = Some(y);
            break;
        }
        cells = (cells * 2).min(finest);
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.step.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.abs_error.ln()).collect();
    let fine_err = rows.last().expect("at least one level").abs_error;
    if rows.len() >= 3 {
        let fit = ols(&xs, &ys)?;
        rep.estimate("convergence_order", fit.slope, Some(fit.slope_se));
        rep.bound.insert("convergence_order_min".into(), 1.0);
        rep.check("order_at_least_one", fit.slope >= 1.0);
    }
    rep.estimate("terminal_error_finest", fine_err, None);
    rep.bound.insert("terminal_error_finest".into(), p.tol);
    rep.check("terminal_error_within_tol", fine_err < p.tol);

    // σ = 0 leaves the explicit Euler scheme for the drift
    let drift_only = LinearField::new(1, vec![vec![0.0]], vec![-2.0])?;
    let g = Grid::with_cells(p.horizon, finest)?;
    let path = SamplePath::from_fn(g, 1, |t, _| x(t))?;
    let driver = RoughDriver::new(AreaField::piecewise_linear(path), 0.5)?;
    let y = solve_rough(&driver, &drift_only, &[a], RoughOptions::default())?;
    let mut euler = a;
    let mut gap: f64 = 0.0;
    let mut b = [0.0];
    for k in 0..g.cells() {
        drift_only.drift(&[euler], &mut b);
        euler += b[0] * g.step();
        gap = gap.max((y.value(k + 1, 0) - euler).abs());
    }
    rep.estimate("drift_only_gap_to_euler", gap, None);
    rep.check("drift_only_is_euler", gap == 0.0);
    rep.rows("convergence", &rows)?;
    let sol = solution.expect("loop sets the finest solution");
    rep.table("solution", |b| write_path(b, &sol))?;
    Ok(rep)
}

#[derive(Serialize)]
struct SlopeRow {
    quantity: &'static str,
    lag: f64,
    moment: f64,
    stderr: f64,
    exact: Option<f64>,
}

/// Log-log slopes of `E|B_T − B_{T−ℓ}|²` and `E|B²_{0ℓ}(1,2)|²` over dyadic
/// lags.
pub fn moment_slope_experiment(p: &Params) -> Result<Report> {
    let h = hurst(p)?;
    let mut rep = Report::new(Experiment::MomentSlope, p);
    let grid = Grid::with_cells(p.horizon, p.cells)?;
    let lags: Vec<f64> = p.lags.iter().map(|&k| p.horizon * 0.5f64.powi(k as i32)).collect();
    let idx: Vec<usize> = lags
        .iter()
        .map(|&l| {
            grid.index_of(l).ok_or_else(|| Error::Parameter(format!("lag {l} is not a grid node; refine `cells`")))
        })
        .collect::<Result<_>>()?;
    let n = grid.cells();
    let fa = FbmArea::new(&grid, h);
    // per replicate: increments ending at T, then areas from 0
    let samples: Vec<(Vec<f64>, Vec<f64>)> = (0..p.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let w = WienerGrid::sample(&grid, 2, replicate_seed(p.seed, r))?;
            let f = fa.field(&w)?;
            let inc = idx.iter().map(|&k| f.path().value(n, 0) - f.path().value(n - k, 0)).collect();
            let area = idx.iter().map(|&k| f.anchor_entry(k, 0, 1)).collect();
            Ok((inc, area))
        })
        .collect::<Result<_>>()?;
    let per_lag = |which: usize| -> Vec<Vec<f64>> {
        (0..lags.len()).map(|l| samples.iter().map(|s| if which == 0 { s.0[l] } else { s.1[l] }).collect()).collect()
    };
    let inc = moment_slope(&lags, &per_lag(0))?;
    let area = moment_slope(&lags, &per_lag(1))?;
    let t = p.horizon;
    let exact_inc: Vec<f64> = lags
        .iter()
        .map(|&l| Ok(covariance_r(t, t, h)? + covariance_r(t - l, t - l, h)? - 2.0 * covariance_r(t, t - l, h)?))
        .collect::<Result<_>>()?;
    let exact_fit = crate::weak::log_log_slope(&lags, &exact_inc)?;
    rep.estimate("increment_slope", inc.fit.slope, Some(inc.fit.slope_se));
    rep.estimate("increment_slope_exact", exact_fit.slope, None);
    rep.estimate("area_slope", area.fit.slope, Some(area.fit.slope_se));
    rep.bound.insert("increment_slope_target".into(), 2.0 * p.hurst);
    rep.bound.insert("area_slope_target".into(), 4.0 * p.hurst);
    rep.check("increment_slope_near_2h", (inc.fit.slope - 2.0 * p.hurst).abs() <= p.tol);
    rep.check("area_slope_near_4h", (area.fit.slope - 4.0 * p.hurst).abs() <= 2.0 * p.tol);
    let mut rows = Vec::new();
    for (l, &lag) in lags.iter().enumerate() {
        rows.push(SlopeRow {
            quantity: "increment",
            lag,
            moment: inc.moments[l],
            stderr: inc.moment_stderr[l],
            exact: Some(exact_inc[l]),
        });
    }
    for (l, &lag) in lags.iter().enumerate() {
        rows.push(SlopeRow {
            quantity: "area",
            lag,
            moment: area.moments[l],
            stderr: area.moment_stderr[l],
            exact: None,
        });
    }
    rep.rows("moments", &rows)?;
    Ok(rep)
}

#[derive(Serialize)]
struct SewRow {
    germ: &'static str,
    mu: f64,
    level: usize,
    sum: f64,
    ratio: Option<f64>,
}

/// Sewing of `s(t − s)` (regularity 2) and `(t² − s²)/2 + (t − s)^{3/2}`
/// (regularity 3/2), both integrating to `∫_0^1 t dt`.
pub fn sewing_demo(p: &Params) -> Result<Report> {
    let mut rep = Report::new(Experiment::SewingDemo, p);
    let opts = SewOptions { extrapolate: false, ..SewOptions::default() };
    let mut rows = Vec::new();
    let germs: [(&'static str, f64, Box<dyn Fn(f64, f64) -> f64>); 2] = [
        ("left-riemann", 2.0, Box::new(|s: f64, t: f64| s * (t - s))),
        ("power-perturbed", 1.5, Box::new(|s: f64, t: f64| 0.5 * (t * t - s * s) + (t - s).powf(1.5))),
    ];
    for (name, mu, g) in &germs {
        // raw dyadic sums for the decay ratio, extrapolated run for the value
        let raw = sew(g, 0.0, 1.0, SewOptions { max_levels: 16, tol: 0.0, ..opts })?;
        let value = sew(g, 0.0, 1.0, SewOptions::default())?;
        let target = 2f64.powf(1.0 - mu);
        let ratios_ok = !raw.ratios.is_empty() && raw.ratios.iter().all(|r| (r / target - 1.0).abs() <= 0.1);
        let err = (value.value[0] - 0.5).abs();
        rep.estimate(format!("value_{name}"), value.value[0], None);
        rep.estimate(format!("error_{name}"), err, None);
        rep.estimate(format!("final_ratio_{name}"), *raw.ratios.last().unwrap_or(&f64::NAN), None);
        rep.estimate(format!("lambda_budget_{name}"), lambda_error_budget(*mu)?, None);
        rep.bound.insert(format!("ratio_target_{name}"), target);
        rep.check(format!("value_within_tol_{name}"), err <= p.tol);
        rep.check(format!("ratio_within_10pct_{name}"), ratios_ok);
        for (level, sum) in raw.sums.iter().enumerate() {
            let ratio = if level >= 2 { raw.ratios.get(level - 2).copied() } else { None };
            rows.push(SewRow { germ: name, mu: *mu, level, sum: *sum, ratio });
        }
    }
    rep.rows("sewing", &rows)?;
    Ok(rep)
}

#[derive(Clone, Copy)]
struct Parts {
    fdd: bool,
    ode: bool,
    tail: bool,
}

/// One replicate: `(X_T, area_{0T}(1,2))`, `y(T)` and the Hölder norm.
struct Draw {
    driver: [f64; 3],
    solution: [f64; 2],
    holder: f64,
}

#[derive(Serialize)]
struct FddRow {
    quantity: &'static str,
    eps: f64,
    distance: f64,
}

#[derive(Serialize)]
struct TailRow {
    source: &'static str,
    eps: f64,
    threshold: f64,
    probability: f64,
    stderr: f64,
}

fn fbm_draws(p: &Params, h: HurstParam, grid: &Grid, parts: Parts, vf: &TrigField) -> Result<Vec<Draw>> {
    let fa = FbmArea::new(grid, h);
    let base = replicate_seed(p.seed, u64::MAX);
    (0..p.reference_replicates as u64)
        .into_par_iter()
        .map(|r| {
            let w = WienerGrid::sample(grid, 2, replicate_seed(base, r))?;
            let field = fa.field(&w)?;
            let end = field.path().point(grid.cells()).to_vec();
            let driver = [end[0], end[1], field.anchor_entry(grid.cells(), 0, 1)];
            let holder = if parts.tail { holder_norm1(field.path(), p.gamma, PairSet::Dyadic)? } else { 0.0 };
            let solution = if parts.ode {
                let y = solve_rough(&RoughDriver::new(field, p.gamma)?, vf, &p.initial, RoughOptions::default())?;
                [last(&y)[0], last(&y)[1]]
            } else {
                [0.0; 2]
            };
            Ok(Draw { driver, solution, holder })
        })
        .collect()
}

fn eps_draws(p: &Params, h: HurstParam, grid: &Grid, eps: Epsilon, parts: Parts, vf: &TrigField) -> Result<Vec<Draw>> {
    let fast = FastXEps::new(h, eps, *grid);
    (0..p.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let pr = sample_poisson(2, p.horizon, eps, replicate_seed(p.seed, r))?;
            let path = fast.path(&pr)?;
            let holder = if parts.tail { holder_norm1(&path, p.gamma, PairSet::Dyadic)? } else { 0.0 };
            let field = AreaField::piecewise_linear(path);
            let end = field.path().point(grid.cells()).to_vec();
            let driver = [end[0], end[1], field.anchor_entry(grid.cells(), 0, 1)];
            let solution = if parts.ode {
                let y = solve_ode_smooth(&pr, h, vf, &p.initial, grid, OdeOptions::default())?;
                [last(&y)[0], last(&y)[1]]
            } else {
                [0.0; 2]
            };
            Ok(Draw { driver, solution, holder })
        })
        .collect()
}

/// Diffusion-approximation study over the `ε` list: finite-dimensional
/// distances of the driver and of the solution to their fBm counterparts,
/// and Hölder-norm tail probabilities.
fn diffusion(p: &Params, parts: Parts, exp: Experiment) -> Result<Report> {
    let mut rep = Report::new(exp, p);
    study(p, parts, &mut rep)?;
    Ok(rep)
}

/// All three diffusion-approximation checks sharing one set of draws.
pub fn diffusion_study(p: &Params) -> Result<Report> {
    diffusion(p, Parts { fdd: true, ode: true, tail: true }, Experiment::FddConverge)
}

fn study(p: &Params, parts: Parts, rep: &mut Report) -> Result<()> {
    let h = hurst(p)?;
    let grid = Grid::with_cells(p.horizon, p.cells)?;
    let vf = TrigField { scale: p.field_scale };
    let reference = fbm_draws(p, h, &grid, parts, &vf)?;
    let driver_ref: Vec<Vec<f64>> = reference.iter().map(|d| d.driver.to_vec()).collect();
    let sol_ref: Vec<Vec<f64>> = reference.iter().map(|d| d.solution.to_vec()).collect();
    let u3 = product_grid(&p.u_grid, 3);
    let u2 = product_grid(&p.u_grid, 2);
    let thresholds = if p.thresholds.is_empty() {
        let mut norms: Vec<f64> = reference.iter().map(|d| d.holder).collect();
        norms.sort_by(f64::total_cmp);
        let q = |a: f64| norms[((norms.len() - 1) as f64 * a).round() as usize];
        // large A: where the limit law leaves 1% and 0.1% of its mass
        vec![q(0.99), q(0.999)]
    } else {
        p.thresholds.clone()
    };
    let mut fdd_rows = Vec::new();
    let mut tail_rows = Vec::new();
    if parts.tail {
        let norms: Vec<f64> = reference.iter().map(|d| d.holder).collect();
        for t in tail_from_norms(&norms, &thresholds) {
            rep.estimate(format!("tail_a{}_fbm", t.threshold), t.probability, Some(t.stderr));
            tail_rows.push(TailRow {
                source: "fbm",
                eps: 0.0,
                threshold: t.threshold,
                probability: t.probability,
                stderr: t.stderr,
            });
        }
    }
    let (mut dist_x, mut dist_y) = (Vec::new(), Vec::new());
    let mut tails: Vec<Vec<(f64, f64)>> = vec![Vec::new(); thresholds.len()];
    for &e in &p.eps {
        let draws = eps_draws(p, h, &grid, Epsilon::new(e)?, parts, &vf)?;
        if parts.fdd {
            let xs: Vec<Vec<f64>> = draws.iter().map(|d| d.driver.to_vec()).collect();
            let dx = fdd_distance(&xs, &driver_ref, &u3)?;
            rep.estimate(format!("driver_fdd_distance_eps{e}"), dx, None);
            let (m, se) = mean_se(&draws.iter().map(|d| d.driver[0] * d.driver[0]).collect::<Vec<_>>());
            rep.estimate(format!("driver_second_moment_eps{e}"), m, Some(se));
            fdd_rows.push(FddRow { quantity: "driver", eps: e, distance: dx });
            dist_x.push(dx);
        }
        if parts.ode {
            let ys: Vec<Vec<f64>> = draws.iter().map(|d| d.solution.to_vec()).collect();
            let dy = fdd_distance(&ys, &sol_ref, &u2)?;
            rep.estimate(format!("solution_fdd_distance_eps{e}"), dy, None);
            fdd_rows.push(FddRow { quantity: "solution", eps: e, distance: dy });
            dist_y.push(dy);
        }
        if parts.tail {
            let norms: Vec<f64> = draws.iter().map(|d| d.holder).collect();
            for (k, t) in tail_from_norms(&norms, &thresholds).into_iter().enumerate() {
                rep.estimate(format!("tail_a{}_eps{e}", t.threshold), t.probability, Some(t.stderr));
                tails[k].push((t.probability, binomial_stderr_floor(t.probability, norms.len())));
                tail_rows.push(TailRow {
                    source: "x-eps",
                    eps: e,
                    threshold: t.threshold,
                    probability: t.probability,
                    stderr: t.stderr,
                });
            }
        }
    }
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    if parts.fdd {
        rep.check("driver_distance_decreasing", decreasing(&dist_x));
    }
    if parts.ode {
        rep.check("solution_distance_decreasing", decreasing(&dist_y));
    }
    if parts.tail {
        let xs: Vec<f64> = p.eps.iter().map(|e| (1.0 / e).ln()).collect();
        for (k, a) in thresholds.iter().enumerate() {
            let ps: Vec<f64> = tails[k].iter().map(|t| t.0).collect();
            let ses: Vec<f64> = tails[k].iter().map(|t| t.1).collect();
            let ok = if xs.len() >= 2 {
                let trend = increasing_trend(&xs, &ps, &ses, 0.01)?;
                rep.estimate(format!("tail_trend_z_a{a}"), trend.z, None);
                !trend.increasing
            } else {
                true
            };
            rep.bound.insert(format!("tail_threshold_{k}"), *a);
            rep.check(format!("no_upward_tail_trend_a{a}"), ok);
        }
        rep.rows("tails", &tail_rows)?;
    }
    if parts.fdd || parts.ode {
        rep.rows("fdd_distance", &fdd_rows)?;
    }
    let seed0 = replicate_seed(p.seed, 0);
    let pr = sample_poisson(2, p.horizon, Epsilon::new(*p.eps.last().expect("validated"))?, seed0)?;
    let path = FastXEps::new(h, pr.eps(), grid).path(&pr)?;
    rep.table("path", |b| write_path(b, &path))?;
    Ok(())
}
