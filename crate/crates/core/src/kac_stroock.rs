//! Telegraph (Kac–Stroock) noise `θ^ε(r) = (1/ε)(−1)^{N(r/ε²)}` and the
//! smooth fractional path it drives,
//!
//! ```text
//! X^ε(t) = ∫_0^t (t + ε − r)^{H−½} θ^ε(r) dr.
//! ```
//!
//! A [`PoissonRealization`] stores jump times on the internal clock; the sign
//! of `θ^ε` flips at the real times `ε²·τ_k`. Since `θ^ε` is piecewise
//! constant, every integral against it is a signed sum over sign pieces, and
//! for the power kernel above each piece integrates in closed form.

use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::conv::CausalConvolver;
use crate::error::{Error, Result};
use crate::fbm::HurstParam;
use crate::grid::{Grid, SamplePath};
use crate::quadrature::{integrate, ScalarFn, Tolerance};
use crate::rng::substream;

/// Smallest admissible `ε² / T`; keeps the expected jump count below 1e8.
pub const EPS_SQ_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(eps: f64) -> Result<Self> {
        if eps > 0.0 && eps <= 1.0 {
            Ok(Self(eps))
        } else {
            Err(Error::Parameter(format!("ε must lie in (0, 1], got {eps}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoissonRealization {
    horizon: f64,
    eps: Epsilon,
    seed: Option<u64>,
    // internal-clock jump times per component
    jumps: Vec<Vec<f64>>,
    // real switch times ε²·τ per component
    switches: Vec<Vec<f64>>,
}

fn check_horizon(horizon: f64, eps: Epsilon) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Parameter(format!("horizon must be positive, got {horizon}")));
    }
    if eps.0 * eps.0 < EPS_SQ_FLOOR * horizon {
        return Err(Error::Parameter(format!(
            "ε = {} is below the floor ε² >= {EPS_SQ_FLOOR:e}·T for T = {horizon}",
            eps.0
        )));
    }
    Ok(())
}

impl PoissonRealization {
    /// Realization with given internal jump times (strictly increasing, within
    /// `[0, T/ε²]`).
    pub fn from_jumps(horizon: f64, eps: Epsilon, jumps: Vec<Vec<f64>>) -> Result<Self> {
        check_horizon(horizon, eps)?;
        if jumps.is_empty() {
            return Err(Error::Parameter("need at least one component".into()));
        }
        let internal = horizon / (eps.0 * eps.0);
        for (i, js) in jumps.iter().enumerate() {
            if js.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Data(format!("jump times of component {i} are not strictly increasing")));
            }
            if js.first().is_some_and(|&x| x < 0.0) || js.last().is_some_and(|&x| x > internal) {
                return Err(Error::Data(format!("jump times of component {i} leave [0, {internal}]")));
            }
        }
        let e2 = eps.0 * eps.0;
        let switches = jumps.iter().map(|js| js.iter().map(|&x| x * e2).collect()).collect();
        Ok(Self { horizon, eps, seed: None, jumps, switches })
    }

    pub fn dim(&self) -> usize {
        self.jumps.len()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn eps(&self) -> Epsilon {
        self.eps
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Horizon on the internal clock, `T/ε²`.
    pub fn internal_horizon(&self) -> f64 {
        self.horizon / (self.eps.0 * self.eps.0)
    }

    /// Internal-clock jump times of component `i`.
    pub fn jumps(&self, i: usize) -> &[f64] {
        &self.jumps[i]
    }

    /// Real times at which `θ^{ε,i}` changes sign.
    pub fn switch_times(&self, i: usize) -> &[f64] {
        &self.switches[i]
    }

    /// Number of sign changes of component `i` in `[0, r]`.
    pub fn count_until(&self, i: usize, r: f64) -> usize {
        self.switches[i].partition_point(|&x| x <= r)
    }

    fn check_time(&self, r: f64) -> Result<()> {
        if (0.0..=self.horizon).contains(&r) {
            Ok(())
        } else {
            Err(Error::Domain(format!("time {r} outside [0, {}]", self.horizon)))
        }
    }

    fn check_component(&self, i: usize) -> Result<()> {
        if i < self.dim() {
            Ok(())
        } else {
            Err(Error::Domain(format!("component {i} of a {}-dimensional realization", self.dim())))
        }
    }

    /// `θ^{ε,i}(r)`, right-continuous.
    pub fn theta(&self, i: usize, r: f64) -> Result<f64> {
        self.check_component(i)?;
        self.check_time(r)?;
        Ok(sign(self.count_until(i, r)) / self.eps.0)
    }

    /// Sign pieces of component `i` over `[0, t]` as `(start, end, sign)`.
    pub fn pieces(&self, i: usize, t: f64) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let sw = &self.switches[i][..self.count_until(i, t)];
        let starts = std::iter::once(0.0).chain(sw.iter().copied());
        let ends = sw.iter().copied().chain(std::iter::once(t));
        starts.zip(ends).enumerate().map(|(k, (a, b))| (a, b, sign(k)))
    }
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Jump times of `d` independent unit-rate Poisson processes on
/// `[0, T/ε²]`, component `i` drawn from substream `i` of `seed`.
pub fn sample_poisson(d: usize, horizon: f64, eps: Epsilon, seed: u64) -> Result<PoissonRealization> {
    if d == 0 {
        return Err(Error::Parameter("need at least one component".into()));
    }
    check_horizon(horizon, eps)?;
    let internal = horizon / (eps.0 * eps.0);
    let jumps = (0..d)
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let mut out = Vec::with_capacity(internal as usize + 16);
            let mut t = 0.0;
            loop {
                let e: f64 = Exp1.sample(&mut rng);
                t += e;
                if t > internal {
                    break;
                }
                out.push(t);
            }
            out
        })
        .collect();
    let mut pr = PoissonRealization::from_jumps(horizon, eps, jumps)?;
    pr.seed = Some(seed);
    Ok(pr)
}

/// `∫_0^T f(r) θ^{ε,i}(r) dr`, integrated piece by piece between sign
/// changes.
pub fn integrate_f_theta(pr: &PoissonRealization, i: usize, f: &dyn ScalarFn, tol: Tolerance) -> Result<f64> {
    pr.check_component(i)?;
    let mut sum = 0.0;
    for (a, b, s) in pr.pieces(i, pr.horizon) {
        if a == b {
            continue;
        }
        let v = match f.integral(a, b) {
            Some(v) => v,
            None => integrate(|x| f.value(x), a, b, tol)?.value,
        };
        sum += s * v;
    }
    Ok(sum / pr.eps.0)
}

/// Evaluator of `X^ε` and its time derivative for one realization.
///
/// With `G(x) = x^{H+½}/(H+½)` and sign changes `τ_1 < τ_2 < …` up to `t`,
/// integrating the kernel exactly on each sign piece telescopes to
///
/// ```text
/// X(t) = (1/ε)[G(t+ε) + 2 Σ_k (−1)^k G(t+ε−τ_k) − (−1)^K G(ε)]
/// Ẋ(u) = (1/ε)[(u+ε)^{H−½} + 2 Σ_{τ_k ≤ u} (−1)^k (u+ε−τ_k)^{H−½}]
/// ```
#[derive(Clone, Copy, Debug)]
pub struct XEps<'a> {
    pr: &'a PoissonRealization,
    hurst: HurstParam,
}

impl<'a> XEps<'a> {
    pub fn new(pr: &'a PoissonRealization, hurst: HurstParam) -> Self {
        Self { pr, hurst }
    }

    pub fn realization(&self) -> &'a PoissonRealization {
        self.pr
    }

    pub fn hurst(&self) -> HurstParam {
        self.hurst
    }

    pub fn eps(&self) -> f64 {
        self.pr.eps.0
    }

    fn g(&self, x: f64) -> f64 {
        let a = self.hurst.get() + 0.5;
        x.powf(a) / a
    }

    /// `X^{ε,i}(t)` counting only the first `count` sign changes; this is the
    /// value whenever exactly `count` changes lie in `[0, t]`, and the
    /// continuous extension of that branch otherwise.
    pub fn value_with_count(&self, i: usize, t: f64, count: usize) -> f64 {
        let eps = self.eps();
        let sw = &self.pr.switches[i][..count];
        let mut acc = 0.0;
        for (k, &tau) in sw.iter().enumerate() {
            acc += sign(k + 1) * self.g(t + eps - tau);
        }
        (self.g(t + eps) + 2.0 * acc - sign(count) * self.g(eps)) / eps
    }

    /// `Ẋ^{ε,i}(u)` counting only the first `count` sign changes.
    pub fn derivative_with_count(&self, i: usize, u: f64, count: usize) -> f64 {
        let eps = self.eps();
        let p = self.hurst.get() - 0.5;
        let sw = &self.pr.switches[i][..count];
        let mut acc = 0.0;
        for (k, &tau) in sw.iter().enumerate() {
            acc += sign(k + 1) * (u + eps - tau).powf(p);
        }
        ((u + eps).powf(p) + 2.0 * acc) / eps
    }

    pub fn value(&self, i: usize, t: f64) -> Result<f64> {
        self.pr.check_component(i)?;
        self.pr.check_time(t)?;
        Ok(self.value_with_count(i, t, self.pr.count_until(i, t)))
    }

    /// Right derivative `Ẋ^{ε,i}(u)`.
    pub fn derivative(&self, i: usize, u: f64) -> Result<f64> {
        self.pr.check_component(i)?;
        self.pr.check_time(u)?;
        Ok(self.derivative_with_count(i, u, self.pr.count_until(i, u)))
    }

    /// All components at `t`.
    pub fn point(&self, t: f64) -> Result<Vec<f64>> {
        (0..self.pr.dim()).map(|i| self.value(i, t)).collect()
    }
}

/// `X^ε` sampled on `grid`, each node evaluated exactly.
pub fn build_x_eps(pr: &PoissonRealization, hurst: HurstParam, grid: &Grid) -> Result<SamplePath> {
    if grid.horizon() > pr.horizon * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "grid horizon {} exceeds realization horizon {}",
            grid.horizon(),
            pr.horizon
        )));
    }
    let x = XEps::new(pr, hurst);
    let d = pr.dim();
    let mut values = Vec::with_capacity(grid.len() * d);
    for k in 0..grid.len() {
        let t = grid.node(k).min(pr.horizon);
        for i in 0..d {
            values.push(if k == 0 { 0.0 } else { x.value_with_count(i, t, pr.count_until(i, t)) });
        }
    }
    SamplePath::new(*grid, d, values)
}

/// `Ẋ^{ε,i}(u)`.
pub fn xeps_derivative(pr: &PoissonRealization, i: usize, u: f64, hurst: HurstParam) -> Result<f64> {
    XEps::new(pr, hurst).derivative(i, u)
}

/// `x^p ≈ x Σ_j c_j e^{−λ_j x}` on `x >= x_min` for `p < 0`, from the
/// trapezoid rule in `y = ln s` applied to
///
/// ```text
/// x^{p−1} = (1/Γ(1−p)) ∫ e^{(1−p)y} exp(−e^y x) dy.
/// ```
///
/// The integrand is analytic in the strip `|Im y| < π/2` and decays at both
/// ends, so the rule with step `0.3` is accurate to about `e^{−π²/0.3}`.
#[derive(Clone, Debug)]
pub struct PowerSoe {
    pub lambda: Vec<f64>,
    pub coef: Vec<f64>,
}

impl PowerSoe {
    pub fn new(p: f64, x_min: f64) -> Self {
        let step = 0.3;
        let lo = -37.0 / (1.0 - p);
        let hi = (40.0 / x_min).ln();
        let scale = step / statrs::function::gamma::gamma(1.0 - p);
        let n = ((hi - lo) / step).ceil() as usize + 1;
        let (lambda, coef) =
            (0..n).map(|k| lo + k as f64 * step).map(|y| (y.exp(), scale * ((1.0 - p) * y).exp())).unzip();
        Self { lambda, coef }
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        x * self.lambda.iter().zip(&self.coef).map(|(l, c)| c * (-l * x).exp()).sum::<f64>()
    }
}

/// Incremental evaluation of `Ẋ^ε` along increasing times in O(nodes) per
/// call, independent of the number of past sign changes.
///
/// For each component it keeps, per exponential node `λ_j`,
/// `H_j = Σ_k (−1)^k e^{−λ_j(u−τ_k)}` and
/// `F_j = Σ_k (−1)^k (u+ε−τ_k) e^{−λ_j(u−τ_k)}` over the switch times
/// `τ_k <= u`, so that `Σ_k (−1)^k (u+ε−τ_k)^{H−½} ≈ Σ_j c_j e^{−λ_j ε} F_j`.
#[derive(Clone, Debug)]
pub struct DerivativeTracker<'a> {
    pr: &'a PoissonRealization,
    p: f64,
    eps: f64,
    lambda: Vec<f64>,
    // c_j e^{−λ_j ε}
    weight: Vec<f64>,
    time: f64,
    absorbed: Vec<usize>,
    h: Vec<Vec<f64>>,
    f: Vec<Vec<f64>>,
    // e^{−λ_j dt} for the last shift
    shift_dt: f64,
    shift_decay: Vec<f64>,
}

impl<'a> DerivativeTracker<'a> {
    pub fn new(pr: &'a PoissonRealization, hurst: HurstParam) -> Self {
        let eps = pr.eps.get();
        let p = hurst.get() - 0.5;
        let soe = PowerSoe::new(p, eps);
        let weight = soe.lambda.iter().zip(&soe.coef).map(|(l, c)| c * (-l * eps).exp()).collect();
        let n = soe.len();
        let d = pr.dim();
        Self {
            pr,
            p,
            eps,
            lambda: soe.lambda,
            weight,
            time: 0.0,
            absorbed: vec![0; d],
            h: vec![vec![0.0; n]; d],
            f: vec![vec![0.0; n]; d],
            shift_dt: f64::NAN,
            shift_decay: Vec::new(),
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `e^{−λ_j dt}` for every node, for use with [`Self::peek`].
    pub fn decay(&self, dt: f64, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.lambda.iter().map(|l| (-l * dt).exp()));
    }

    fn shift(&mut self, dt: f64) {
        if dt <= 0.0 {
            return;
        }
        if dt != self.shift_dt {
            self.shift_decay.clear();
            self.shift_decay.extend(self.lambda.iter().map(|l| (-l * dt).exp()));
            self.shift_dt = dt;
        }
        for (h, f) in self.h.iter_mut().zip(self.f.iter_mut()) {
            for ((hj, fj), e) in h.iter_mut().zip(f.iter_mut()).zip(&self.shift_decay) {
                *fj = e * (*fj + dt * *hj);
                *hj *= e;
            }
        }
        self.time += dt;
    }

    /// Moves to time `u >= time()`, absorbing every switch in `[0, u]`.
    pub fn advance(&mut self, u: f64) {
        loop {
            // earliest pending switch at or before u
            let next = (0..self.pr.dim())
                .filter_map(|i| self.pr.switches[i].get(self.absorbed[i]).map(|&t| (t, i)))
                .filter(|&(t, _)| t <= u)
                .min_by(|a, b| a.0.total_cmp(&b.0));
            match next {
                Some((tau, i)) => {
                    self.shift(tau - self.time);
                    self.absorbed[i] += 1;
                    let s = sign(self.absorbed[i]);
                    let eps = self.eps;
                    self.h[i].iter_mut().for_each(|v| *v += s);
                    self.f[i].iter_mut().for_each(|v| *v += s * eps);
                }
                None => break,
            }
        }
        self.shift(u - self.time);
    }

    /// `Ẋ^{ε,i}(time() + dt)` assuming no switch in `(time(), time() + dt]`;
    /// `decay` must come from [`Self::decay`] with the same `dt`.
    pub fn peek(&self, i: usize, dt: f64, decay: &[f64]) -> f64 {
        let (h, f) = (&self.h[i], &self.f[i]);
        let mut acc = 0.0;
        for j in 0..self.weight.len() {
            acc += self.weight[j] * decay[j] * (f[j] + dt * h[j]);
        }
        ((self.time + dt + self.eps).powf(self.p) + 2.0 * acc) / self.eps
    }
}

/// Builds `X^ε` on a fine uniform grid by FFT convolution, for Monte Carlo
/// runs where exact evaluation at every node (cost O(jumps) each) is too slow.
///
/// Per cell the kernel is expanded to first order around the cell midpoint
/// (cell-averaged value plus slope) against the exact zeroth and first
/// moments of `θ^ε` over the cell, so sign changes inside a cell are
/// accounted for exactly. The error is `O(h²ε^{H−5/2})` per unit time.
pub struct FastXEps {
    grid: Grid,
    eps: f64,
    hurst: HurstParam,
    average: CausalConvolver,
    slope: CausalConvolver,
}

impl FastXEps {
    pub fn new(hurst: HurstParam, eps: Epsilon, grid: Grid) -> Self {
        let e = eps.get();
        let h = grid.step();
        let a = hurst.get() + 0.5;
        let g = |x: f64| x.powf(a) / a;
        let n = grid.cells();
        let average: Vec<f64> = (1..=n).map(|m| (g(m as f64 * h + e) - g((m - 1) as f64 * h + e)) / h).collect();
        let p = hurst.get() - 0.5;
        let slope: Vec<f64> = (1..=n).map(|m| p * ((m as f64 - 0.5) * h + e).powf(p - 1.0)).collect();
        Self { grid, eps: e, hurst, average: CausalConvolver::new(&average), slope: CausalConvolver::new(&slope) }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn hurst(&self) -> HurstParam {
        self.hurst
    }

    /// Zeroth and first (about the midpoint) moments of `θ^{ε,i}` per cell.
    fn cell_moments(&self, pr: &PoissonRealization, i: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.cells();
        let h = self.grid.step();
        let mut m0 = vec![0.0; n];
        let mut m1 = vec![0.0; n];
        let sw = pr.switch_times(i);
        let mut next = 0;
        let mut s = 1.0;
        for m in 0..n {
            let lo = self.grid.node(m);
            let hi = self.grid.node(m + 1);
            let c = lo + 0.5 * h;
            let mut a = lo;
            while next < sw.len() && sw[next] < hi {
                let b = sw[next];
                m0[m] += s * (b - a);
                m1[m] += s * 0.5 * ((b - c).powi(2) - (a - c).powi(2));
                a = b;
                s = -s;
                next += 1;
            }
            m0[m] += s * (hi - a);
            m1[m] += s * 0.5 * ((hi - c).powi(2) - (a - c).powi(2));
        }
        let inv = 1.0 / self.eps;
        m0.iter_mut().chain(m1.iter_mut()).for_each(|v| *v *= inv);
        (m0, m1)
    }

    pub fn path(&self, pr: &PoissonRealization) -> Result<SamplePath> {
        if (pr.eps.get() - self.eps).abs() > 0.0 {
            return Err(Error::Parameter("realization ε differs from the builder's".into()));
        }
        if self.grid.horizon() > pr.horizon * (1.0 + 1e-12) {
            return Err(Error::Domain("grid extends past the realization horizon".into()));
        }
        let d = pr.dim();
        let mut comps: Vec<Vec<f64>> = Vec::with_capacity(d);
        let mut i = 0;
        while i < d {
            if i + 1 < d {
                let (a0, a1) = self.cell_moments(pr, i);
                let (b0, b1) = self.cell_moments(pr, i + 1);
                let (xa, xb) = self.average.apply_pair(&a0, &b0);
                let (ya, yb) = self.slope.apply_pair(&a1, &b1);
                comps.push(xa.iter().zip(&ya).map(|(x, y)| x - y).collect());
                comps.push(xb.iter().zip(&yb).map(|(x, y)| x - y).collect());
                i += 2;
            } else {
                let (a0, a1) = self.cell_moments(pr, i);
                let x = self.average.apply(&a0);
                let y = self.slope.apply(&a1);
                comps.push(x.iter().zip(&y).map(|(x, y)| x - y).collect());
                i += 1;
            }
        }
        SamplePath::from_components(self.grid, &comps)
    }
}
