//! Statistical harness for the weak-convergence statements: empirical
//! characteristic functions, the bound functionals for the telegraph
//! integral, moment-scaling regressions, finite-dimensional distances and
//! Hölder-norm tail probabilities.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{holder_norm1, Grid, PairSet, SamplePath};
use crate::kac_stroock::{integrate_f_theta, sample_poisson, Epsilon};
use crate::quadrature::{integrate, ScalarFn, Tolerance};
use crate::rng::replicate_seed;
use crate::stats::{ols, wls_slope, LinearFit};

/// Default u-grid: `[−3, 3]` in steps of `0.25`.
pub fn default_u_grid() -> Vec<f64> {
    (-12..=12).map(|k| k as f64 * 0.25).collect()
}

/// `[lo, hi]` in `steps` equal steps.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| lo + (hi - lo) * k as f64 / steps as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharFnEstimate {
    pub u: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// Standard error of the complex estimate, `sqrt((1 − |φ̂|²)/M)`.
    pub stderr: Vec<f64>,
    pub m: usize,
}

impl CharFnEstimate {
    pub fn value(&self, k: usize) -> Complex64 {
        Complex64::new(self.re[k], self.im[k])
    }
}

/// `(1/M) Σ e^{i u s_m}` for every `u` in `u_grid`.
pub fn ecf(samples: &[f64], u_grid: &[f64]) -> Result<CharFnEstimate> {
    if samples.is_empty() {
        return Err(Error::Data("empirical characteristic function of an empty sample".into()));
    }
    let m = samples.len();
    let mut est = CharFnEstimate { u: u_grid.to_vec(), re: Vec::new(), im: Vec::new(), stderr: Vec::new(), m };
    for &u in u_grid {
        let (mut c, mut s) = (0.0, 0.0);
        for &x in samples {
            let (sn, cs) = (u * x).sin_cos();
            c += cs;
            s += sn;
        }
        let z = Complex64::new(c / m as f64, s / m as f64);
        est.re.push(z.re);
        est.im.push(z.im);
        est.stderr.push(((1.0 - z.norm_sqr()).max(0.0) / m as f64).sqrt());
    }
    Ok(est)
}

/// Joint empirical characteristic function at the vector `u`.
pub fn ecf_joint(samples: &[Vec<f64>], u: &[f64]) -> Complex64 {
    let (mut c, mut s) = (0.0, 0.0);
    for x in samples {
        let arg: f64 = x.iter().zip(u).map(|(a, b)| a * b).sum();
        let (sn, cs) = arg.sin_cos();
        c += cs;
        s += sn;
    }
    Complex64::new(c, s) / samples.len() as f64
}

/// All vectors with entries from `axis`, `dim` entries each.
pub fn product_grid(axis: &[f64], dim: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out.into_iter().flat_map(|v| axis.iter().map(move |&a| [v.clone(), vec![a]].concat())).collect();
    }
    out
}

/// `max_u |φ̂_A(u) − φ̂_B(u)|` over the vectors in `u_grid`.
pub fn fdd_distance(a: &[Vec<f64>], b: &[Vec<f64>], u_grid: &[Vec<f64>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Data("empty sample set".into()));
    }
    let dim = a[0].len();
    if a.iter().chain(b).any(|x| x.len() != dim) || u_grid.iter().any(|u| u.len() != dim) {
        return Err(Error::Data(format!("all samples and u-vectors must have dimension {dim}")));
    }
    Ok(u_grid
        .par_iter()
        .map(|u| (ecf_joint(a, u) - ecf_joint(b, u)).norm())
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max))
}

fn tight() -> Tolerance {
    Tolerance::new(1e-15, 1e-11)
}

/// `‖f‖²_{L²[0,T]}`.
pub fn l2_norm_sq(f: &dyn ScalarFn, horizon: f64) -> Result<f64> {
    Ok(integrate(|x| f.value(x).powi(2), 0.0, horizon, tight())?.value)
}

/// `φ_f(ε) = ∫_0^T f²(x) e^{−2x/ε²} dx`.
pub fn phi_func(f: &dyn ScalarFn, eps: f64, horizon: f64) -> Result<f64> {
    let e2 = eps * eps;
    let cut = (20.0 * e2).min(horizon);
    let head = integrate(|x| f.value(x).powi(2) * (-2.0 * x / e2).exp(), 0.0, cut, tight())?.value;
    let tail = integrate(|x| f.value(x).powi(2) * (-2.0 * x / e2).exp(), cut, horizon, tight())?.value;
    Ok(head + tail)
}

/// `ψ_f(ε) = ∫_0^T dx ∫_0^x dy f²(x) f²(y) e^{−2(x−y)/ε²}`.
pub fn psi_func(f: &dyn ScalarFn, eps: f64, horizon: f64) -> Result<f64> {
    let e2 = eps * eps;
    let mut failure = None;
    let inner = |x: f64| -> f64 {
        let fx = f.value(x).powi(2);
        if fx == 0.0 {
            return 0.0;
        }
        let lo = (x - 20.0 * e2).max(0.0);
        let kernel = |y: f64| f.value(y).powi(2) * (-2.0 * (x - y) / e2).exp();
        let near = integrate(kernel, lo, x, tight());
        let far = integrate(kernel, 0.0, lo, tight());
        match (near, far) {
            (Ok(a), Ok(b)) => fx * (a.value + b.value),
            (Err(e), _) | (_, Err(e)) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let outer = integrate(inner, 0.0, horizon, Tolerance::new(1e-14, 1e-10))?.value;
    match failure {
        Some(e) => Err(e),
        None => Ok(outer),
    }
}

/// `varphi_f(ε) = ε‖f‖_{L²} + (∫_0^ε f²)^{1/2}`; needs `ε <= T`.
pub fn varphi_func(f: &dyn ScalarFn, eps: f64, horizon: f64) -> Result<f64> {
    if eps > horizon {
        return Err(Error::Domain(format!("ε = {eps} exceeds the horizon {horizon}")));
    }
    let head = integrate(|x| f.value(x).powi(2), 0.0, eps, tight())?.value;
    Ok(eps * l2_norm_sq(f, horizon)?.sqrt() + head.sqrt())
}

/// `c_α = ∫_0^∞ x^α e^{−2x} dx = Γ(α+1)/2^{α+1}`.
pub fn c_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("α must lie in (0, 1), got {alpha}")));
    }
    Ok(gamma(alpha + 1.0) / 2f64.powf(alpha + 1.0))
}

/// Grid estimate of `‖f‖_α`: the supremum over a `2^12`-cell grid, inflated
/// by 5% since a finite grid can only underestimate it.
pub fn holder_norm_fn(f: &dyn ScalarFn, alpha: f64, horizon: f64) -> Result<f64> {
    let g = Grid::with_cells(horizon, 1 << 12)?;
    let path = SamplePath::from_fn(g, 1, |t, _| f.value(t))?;
    Ok(1.05
        * holder_norm1(&path, alpha, PairSet::Dyadic)?.max(holder_norm1(&path.subsample(16)?, alpha, PairSet::All)?))
}

/// The bound on `|E e^{iu∫fθ^ε} − E e^{iu∫f dW}|`, term by term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundTerms {
    pub holder: f64,
    pub phi: f64,
    pub psi: f64,
    pub varphi: f64,
    pub growth: f64,
    pub total: f64,
}

/// Precomputed functionals of `f` at one `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Functionals {
    pub eps: f64,
    pub alpha: f64,
    pub horizon: f64,
    pub phi: f64,
    pub psi: f64,
    pub varphi: f64,
    pub c_alpha: f64,
    pub holder_norm: f64,
    pub l2_norm: f64,
}

impl Functionals {
    pub fn new(f: &dyn ScalarFn, alpha: f64, eps: f64, horizon: f64) -> Result<Self> {
        Ok(Self {
            eps,
            alpha,
            horizon,
            phi: phi_func(f, eps, horizon)?,
            psi: psi_func(f, eps, horizon)?,
            varphi: varphi_func(f, eps, horizon)?,
            c_alpha: c_alpha(alpha)?,
            holder_norm: holder_norm_fn(f, alpha, horizon)?,
            l2_norm: l2_norm_sq(f, horizon)?.sqrt(),
        })
    }

    /// `[ε^{2α} c_α ‖f‖_α ‖f‖ u² + φ u²/2 + ψ u⁴/8 + varphi |u|/2] e^{u²‖f‖²/2}`.
    pub fn bound(&self, u: f64) -> BoundTerms {
        let u2 = u * u;
        let holder = self.eps.powf(2.0 * self.alpha) * self.c_alpha * self.holder_norm * self.l2_norm * u2;
        let phi = self.phi * u2 / 2.0;
        let psi = self.psi * u2 * u2 / 8.0;
        let varphi = self.varphi * u.abs() / 2.0;
        let growth = (u2 * self.l2_norm * self.l2_norm / 2.0).exp();
        BoundTerms { holder, phi, psi, varphi, growth, total: (holder + phi + psi + varphi) * growth }
    }
}

pub fn cf_distance_bound(f: &dyn ScalarFn, alpha: f64, eps: f64, horizon: f64, u: f64) -> Result<f64> {
    Ok(Functionals::new(f, alpha, eps, horizon)?.bound(u).total)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub u: f64,
    pub distance: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub functionals: Functionals,
    pub m: usize,
    pub rows: Vec<BoundRow>,
    pub max_distance: f64,
    pub pass: bool,
}

/// `M` replicate values of `∫_0^T f θ^ε`, replicate `r` seeded by
/// `replicate_seed(seed, r)`.
pub fn telegraph_integrals(f: &dyn ScalarFn, eps: Epsilon, horizon: f64, m: usize, seed: u64) -> Result<Vec<f64>> {
    (0..m as u64)
        .into_par_iter()
        .map(|r| {
            let pr = sample_poisson(1, horizon, eps, replicate_seed(seed, r))?;
            integrate_f_theta(&pr, 0, f, Tolerance::default())
        })
        .collect()
}

/// Compares the empirical characteristic function of `∫ f θ^ε` with the
/// Gaussian limit `e^{−u²‖f‖²/2}` against the bound, per `u`.
pub fn cf_distance_check(
    f: &dyn ScalarFn,
    alpha: f64,
    eps: Epsilon,
    horizon: f64,
    u_grid: &[f64],
    m: usize,
    seed: u64,
) -> Result<BoundReport> {
    let fun = Functionals::new(f, alpha, eps.get(), horizon)?;
    let samples = telegraph_integrals(f, eps, horizon, m, seed)?;
    Ok(bound_report(fun, &samples, u_grid)?)
}

/// [`cf_distance_check`] on given samples.
pub fn bound_report(fun: Functionals, samples: &[f64], u_grid: &[f64]) -> Result<BoundReport> {
    let est = ecf(samples, u_grid)?;
    let var = fun.l2_norm * fun.l2_norm;
    let rows: Vec<BoundRow> = u_grid
        .iter()
        .enumerate()
        .map(|(k, &u)| {
            let target = Complex64::new((-u * u * var / 2.0).exp(), 0.0);
            let distance = (est.value(k) - target).norm();
            let bound = fun.bound(u).total;
            let stderr = est.stderr[k];
            BoundRow { u, distance, stderr, bound, pass: distance <= bound + 3.0 * stderr }
        })
        .collect();
    let max_distance = rows.iter().map(|r| r.distance).fold(0.0, f64::max);
    let pass = rows.iter().all(|r| r.pass);
    Ok(BoundReport { functionals: fun, m: samples.len(), rows, max_distance, pass })
}

/// `(2m)!/(2^m m!)·‖f‖^{2m}`, the bound on `E[(∫fθ^ε)^{2m}]`.
pub fn even_moment_bound(m: u32, l2_norm: f64) -> f64 {
    double_factorial_odd(2 * m) * l2_norm.powi(2 * m as i32)
}

/// `varphi_f(ε)·(2m+1)!/(2^{m+1} m!)·‖f‖^{2m}`, the bound on
/// `|E[(∫fθ^ε)^{2m+1}]|`.
pub fn odd_moment_bound(m: u32, l2_norm: f64, varphi: f64) -> f64 {
    // (2m+1)!/(2^{m+1} m!) = (2m+1)!! / 2
    varphi * double_factorial_odd(2 * m + 1) / 2.0 * l2_norm.powi(2 * m as i32)
}

/// `(2m)!/(2^m m!)` for even argument `2m`, i.e. `(2m − 1)!!`; for odd
/// argument `2m + 1` returns `(2m + 1)!!`.
fn double_factorial_odd(k: u32) -> f64 {
    let top = if k % 2 == 0 { k.saturating_sub(1) } else { k };
    (1..=top).step_by(2).map(f64::from).product()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentCheck {
    pub order: u32,
    pub moment: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Empirical `E[X^order]` with its standard error, compared with `bound`
/// (absolute value for odd orders).
pub fn moment_check(samples: &[f64], order: u32, bound: f64) -> MomentCheck {
    let powers: Vec<f64> = samples.iter().map(|x| x.powi(order as i32)).collect();
    let (moment, stderr) = crate::stats::mean_se(&powers);
    let lhs = if order % 2 == 1 { moment.abs() } else { moment };
    MomentCheck { order, moment, stderr, bound, pass: lhs <= bound + 3.0 * stderr }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeEstimate {
    pub lags: Vec<f64>,
    pub moments: Vec<f64>,
    pub moment_stderr: Vec<f64>,
    pub fit: LinearFit,
}

/// OLS of `log m(ℓ)` on `log ℓ`.
pub fn log_log_slope(lags: &[f64], moments: &[f64]) -> Result<LinearFit> {
    if lags.len() < 3 || lags.len() != moments.len() {
        return Err(Error::Data(format!(
            "need >= 3 lags with one moment each, got {} and {}",
            lags.len(),
            moments.len()
        )));
    }
    if lags.iter().chain(moments).any(|&v| !(v > 0.0)) {
        return Err(Error::Data("lags and moments must be positive".into()));
    }
    let xs: Vec<f64> = lags.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = moments.iter().map(|m| m.ln()).collect();
    ols(&xs, &ys)
}

/// Second moments of the increment samples at each lag and their log-log
/// regression slope.
pub fn moment_slope(lags: &[f64], samples: &[Vec<f64>]) -> Result<SlopeEstimate> {
    if samples.len() != lags.len() {
        return Err(Error::Data("one sample set per lag is required".into()));
    }
    let mut moments = Vec::new();
    let mut moment_stderr = Vec::new();
    for s in samples {
        if s.is_empty() {
            return Err(Error::Data("empty sample set".into()));
        }
        let sq: Vec<f64> = s.iter().map(|x| x * x).collect();
        let (m, se) = crate::stats::mean_se(&sq);
        moments.push(m);
        moment_stderr.push(se);
    }
    let fit = log_log_slope(lags, &moments)?;
    Ok(SlopeEstimate { lags: lags.to_vec(), moments, moment_stderr, fit })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailEstimate {
    pub threshold: f64,
    pub probability: f64,
    pub stderr: f64,
}

/// Empirical `P[‖x‖_γ > A]` per threshold, with binomial standard errors.
pub fn holder_tail(paths: &[SamplePath], gamma: f64, thresholds: &[f64], pairs: PairSet) -> Result<Vec<TailEstimate>> {
    if paths.len() < 100 {
        return Err(Error::InsufficientData(format!("tail probabilities need >= 100 paths, got {}", paths.len())));
    }
    let norms: Vec<f64> = paths.par_iter().map(|p| holder_norm1(p, gamma, pairs)).collect::<Result<_>>()?;
    Ok(tail_from_norms(&norms, thresholds))
}

/// Tail probabilities from precomputed norms.
pub fn tail_from_norms(norms: &[f64], thresholds: &[f64]) -> Vec<TailEstimate> {
    let m = norms.len() as f64;
    thresholds
        .iter()
        .map(|&a| {
            let p = norms.iter().filter(|&&n| n > a).count() as f64 / m;
            TailEstimate { threshold: a, probability: p, stderr: (p * (1.0 - p) / m).sqrt() }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrendTest {
    pub slope: f64,
    pub stderr: f64,
    pub z: f64,
    /// One-sided rejection of "no increase" at the requested level.
    pub increasing: bool,
}

/// Weighted least-squares test for `y` increasing in `x`, with `z` compared
/// to the one-sided normal quantile at `level` (e.g. 0.01).
pub fn increasing_trend(xs: &[f64], ys: &[f64], stderrs: &[f64], level: f64) -> Result<TrendTest> {
    use statrs::distribution::{ContinuousCDF, Normal};
    let (slope, stderr) = wls_slope(xs, ys, stderrs)?;
    let z = if stderr > 0.0 {
        slope / stderr
    } else if slope > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let crit = Normal::standard().inverse_cdf(1.0 - level);
    Ok(TrendTest { slope, stderr, z, increasing: z > crit })
}

/// Binomial standard error with a half-count floor, so that empirical
/// probabilities of exactly 0 or 1 still carry a usable weight.
pub fn binomial_stderr_floor(p: f64, m: usize) -> f64 {
    let m = m as f64;
    let q = ((p * m + 0.5) / (m + 1.0)).clamp(0.0, 1.0);
    (q * (1.0 - q) / m).sqrt()
}
