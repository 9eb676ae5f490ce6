//! Solvers for `dy = σ(y) dx + b(y) dt`: a second-order (Davie-type) step
//! scheme driven by a path and its Lévy area, and a classical RK4 solver for
//! the same equation driven by the differentiable path `X^ε`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fbm::HurstParam;
use crate::grid::{holder_norm1, Grid, PairSet, SamplePath};
use crate::kac_stroock::{DerivativeTracker, PoissonRealization};
use crate::levy_area::{chen_reconstruct, AreaField};
use crate::rng::substream;

/// Coefficients `σ: ℝⁿ → ℝ^{n×d}` and `b: ℝⁿ → ℝⁿ`.
///
/// Layouts: `sigma[k * d + i] = σ^k_i`, `dsigma[(k * d + i) * n + l] = ∂_l σ^k_i`.
pub trait VectorField: Sync {
    fn state_dim(&self) -> usize;
    fn noise_dim(&self) -> usize;
    fn sigma(&self, y: &[f64], out: &mut [f64]);
    fn dsigma(&self, y: &[f64], out: &mut [f64]);
    fn drift(&self, y: &[f64], out: &mut [f64]);
    /// Sup-norm bounds of `(σ, Dσ, b)`, if known.
    fn bounds(&self) -> Option<[f64; 3]> {
        None
    }
}

/// Largest relative gap between `dsigma` and central differences of `sigma`
/// over `probes` random points in `[−radius, radius]ⁿ`.
pub fn derivative_defect(vf: &dyn VectorField, probes: usize, radius: f64, seed: u64) -> f64 {
    let (n, d) = (vf.state_dim(), vf.noise_dim());
    let mut rng = substream(seed, 0);
    let mut worst: f64 = 0.0;
    let mut ds = vec![0.0; n * d * n];
    let (mut sp, mut sm) = (vec![0.0; n * d], vec![0.0; n * d]);
    for _ in 0..probes {
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-radius..radius)).collect();
        vf.dsigma(&y, &mut ds);
        for l in 0..n {
            let h = 1e-6 * (1.0 + y[l].abs());
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[l] += h;
            ym[l] -= h;
            vf.sigma(&yp, &mut sp);
            vf.sigma(&ym, &mut sm);
            for ki in 0..n * d {
                let fd = (sp[ki] - sm[ki]) / (2.0 * h);
                let an = ds[ki * n + l];
                worst = worst.max((fd - an).abs() / an.abs().max(1.0));
            }
        }
    }
    worst
}

/// `σ^k_i(y) = Σ_l A_i[k][l] y_l`, `b(y) = B y`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearField {
    n: usize,
    d: usize,
    // a[i][k * n + l]
    a: Vec<Vec<f64>>,
    // b[k * n + l]
    b: Vec<f64>,
}

impl LinearField {
    pub fn new(n: usize, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        if a.iter().any(|m| m.len() != n * n) || b.len() != n * n || a.is_empty() {
            return Err(Error::Parameter("matrix shapes do not match the state dimension".into()));
        }
        Ok(Self { n, d: a.len(), a, b })
    }

    /// `dy = λ_σ y dx + λ_b y dt` in one dimension.
    pub fn scalar(sigma: f64, drift: f64) -> Self {
        Self { n: 1, d: 1, a: vec![vec![sigma]], b: vec![drift] }
    }
}

impl VectorField for LinearField {
    fn state_dim(&self) -> usize {
        self.n
    }

    fn noise_dim(&self) -> usize {
        self.d
    }

    fn sigma(&self, y: &[f64], out: &mut [f64]) {
        for k in 0..self.n {
            for i in 0..self.d {
                out[k * self.d + i] = (0..self.n).map(|l| self.a[i][k * self.n + l] * y[l]).sum();
            }
        }
    }

    fn dsigma(&self, _y: &[f64], out: &mut [f64]) {
        for k in 0..self.n {
            for i in 0..self.d {
                for l in 0..self.n {
                    out[(k * self.d + i) * self.n + l] = self.a[i][k * self.n + l];
                }
            }
        }
    }

    fn drift(&self, y: &[f64], out: &mut [f64]) {
        for k in 0..self.n {
            out[k] = (0..self.n).map(|l| self.b[k * self.n + l] * y[l]).sum();
        }
    }
}

/// Bounded smooth coefficients on `ℝ²` with two driving components whose
/// columns do not commute:
///
/// ```text
/// σ(y) = [[cos y₂, ½ sin y₁], [½ sin y₂, cos y₁]] · scale,   b(y) = −½ sin(y)
/// ```
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrigField {
    pub scale: f64,
}

impl VectorField for TrigField {
    fn state_dim(&self) -> usize {
        2
    }

    fn noise_dim(&self) -> usize {
        2
    }

    fn sigma(&self, y: &[f64], out: &mut [f64]) {
        let c = self.scale;
        out[0] = c * y[1].cos();
        out[1] = 0.5 * c * y[0].sin();
        out[2] = 0.5 * c * y[1].sin();
        out[3] = c * y[0].cos();
    }

    fn dsigma(&self, y: &[f64], out: &mut [f64]) {
        let c = self.scale;
        // (k, i, l) → (k * 2 + i) * 2 + l
        out.iter_mut().for_each(|v| *v = 0.0);
        out[1] = -c * y[1].sin();
        out[2] = 0.5 * c * y[0].cos();
        out[5] = 0.5 * c * y[1].cos();
        out[6] = -c * y[0].sin();
    }

    fn drift(&self, y: &[f64], out: &mut [f64]) {
        out[0] = -0.5 * y[0].sin();
        out[1] = -0.5 * y[1].sin();
    }

    fn bounds(&self) -> Option<[f64; 3]> {
        Some([self.scale, self.scale, 0.5])
    }
}

fn check_shapes(vf: &dyn VectorField, y: &[f64], d: usize) -> Result<()> {
    if y.len() != vf.state_dim() || d != vf.noise_dim() {
        return Err(Error::Parameter(format!(
            "shape mismatch: state {} vs field {}, noise {} vs field {}",
            y.len(),
            vf.state_dim(),
            d,
            vf.noise_dim()
        )));
    }
    Ok(())
}

/// One step `y^k + σ^k_i δx^i + ∂_l σ^k_i σ^l_j x²(i,j) + b^k h` (sums over
/// repeated indices; `x2` row-major in the outer-integrator-first
/// convention of [`crate::levy_area`]).
pub fn rough_step(y: &[f64], vf: &dyn VectorField, dx: &[f64], x2: &[f64], h: f64) -> Result<Vec<f64>> {
    let (n, d) = (y.len(), dx.len());
    check_shapes(vf, y, d)?;
    if x2.len() != d * d {
        return Err(Error::Parameter(format!("area must be {d}×{d}")));
    }
    let mut sig = vec![0.0; n * d];
    let mut ds = vec![0.0; n * d * n];
    let mut b = vec![0.0; n];
    vf.sigma(y, &mut sig);
    vf.dsigma(y, &mut ds);
    vf.drift(y, &mut b);
    let mut out = y.to_vec();
    for k in 0..n {
        let mut acc = b[k] * h;
        for i in 0..d {
            acc += sig[k * d + i] * dx[i];
            for j in 0..d {
                let a = x2[i * d + j];
                if a == 0.0 {
                    continue;
                }
                let mut second = 0.0;
                for l in 0..n {
                    second += ds[(k * d + i) * n + l] * sig[l * d + j];
                }
                acc += second * a;
            }
        }
        out[k] += acc;
    }
    Ok(out)
}

/// A driving path with its area and claimed Hölder exponent.
#[derive(Clone, Debug)]
pub struct RoughDriver {
    area: AreaField,
    gamma: f64,
}

impl RoughDriver {
    pub fn new(area: AreaField, gamma: f64) -> Result<Self> {
        if !(gamma > 1.0 / 3.0 && gamma < 0.5 + 1e-12) {
            return Err(Error::Parameter(format!("γ must lie in (1/3, 1/2], got {gamma}")));
        }
        let hn = holder_norm1(area.path(), gamma, PairSet::Dyadic)?;
        if !hn.is_finite() {
            return Err(Error::Data("driver path has a non-finite Hölder norm".into()));
        }
        Ok(Self { area, gamma })
    }

    pub fn area(&self) -> &AreaField {
        &self.area
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn grid(&self) -> &Grid {
        self.area.grid()
    }
}

fn solve_on_stride(driver: &RoughDriver, vf: &dyn VectorField, a: &[f64], stride: usize) -> Result<SamplePath> {
    let grid = driver.grid().coarsen(stride)?;
    let path = driver.area.path();
    let d = path.dim();
    let h = grid.step();
    let mut values = Vec::with_capacity(grid.len() * a.len());
    values.extend_from_slice(a);
    let mut y = a.to_vec();
    for k in 0..grid.cells() {
        let (s, t) = (k * stride, (k + 1) * stride);
        let dx: Vec<f64> = (0..d).map(|i| path.value(t, i) - path.value(s, i)).collect();
        let x2 = chen_reconstruct(&driver.area, s, t)?;
        y = rough_step(&y, vf, &dx, &x2, h)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow { step: k });
        }
        values.extend_from_slice(&y);
    }
    SamplePath::new(grid, a.len(), values)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RoughOptions {
    /// Also solve on the 2× and 4× coarser grids and warn when the observed
    /// self-convergence order of `y(T)` is below 1.
    pub check_order: bool,
}

/// Iterates [`rough_step`] over consecutive grid nodes, `y(0) = a`.
pub fn solve_rough(driver: &RoughDriver, vf: &dyn VectorField, a: &[f64], opts: RoughOptions) -> Result<SamplePath> {
    check_shapes(vf, a, driver.area.path().dim())?;
    let y = solve_on_stride(driver, vf, a, 1)?;
    if opts.check_order {
        match self_convergence_order(driver, vf, a)? {
            Some(order) if order < 1.0 => log::warn!("observed self-convergence order {order:.3} is below 1"),
            _ => {}
        }
    }
    Ok(y)
}

/// `log₂(|y_{N/4}(T) − y_{N/2}(T)| / |y_{N/2}(T) − y_N(T)|)`; `None` when the
/// grid is too coarse or the differences vanish.
pub fn self_convergence_order(driver: &RoughDriver, vf: &dyn VectorField, a: &[f64]) -> Result<Option<f64>> {
    let cells = driver.grid().cells();
    if cells % 4 != 0 || cells < 8 {
        return Ok(None);
    }
    let last = |p: &SamplePath| p.point(p.grid().len() - 1).to_vec();
    let y1 = last(&solve_on_stride(driver, vf, a, 1)?);
    let y2 = last(&solve_on_stride(driver, vf, a, 2)?);
    let y4 = last(&solve_on_stride(driver, vf, a, 4)?);
    let dist = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let (fine, coarse) = (dist(&y1, &y2), dist(&y2, &y4));
    if fine == 0.0 || coarse == 0.0 {
        return Ok(None);
    }
    Ok(Some((coarse / fine).log2()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct OdeOptions {
    /// Accept grids coarser than `ε²/4`.
    pub allow_under_resolved: bool,
}

/// Classical RK4 for `ẏ = σ(y) Ẋ^ε(t) + b(y)`, restarting at every sign
/// change of `θ^ε` inside a cell (where `Ẋ^ε` jumps). `Ẋ^ε` comes from a
/// [`DerivativeTracker`], so a step costs the same however many sign changes
/// lie behind it. Returns `y` on `grid`.
pub fn solve_ode_smooth(
    pr: &PoissonRealization,
    hurst: HurstParam,
    vf: &dyn VectorField,
    a: &[f64],
    grid: &Grid,
    opts: OdeOptions,
) -> Result<SamplePath> {
    let d = pr.dim();
    check_shapes(vf, a, d)?;
    let eps = pr.eps().get();
    let required = eps * eps / 4.0;
    if grid.step() > required && !opts.allow_under_resolved {
        return Err(Error::Resolution { step: grid.step(), required });
    }
    if grid.horizon() > pr.horizon() * (1.0 + 1e-12) {
        return Err(Error::Domain("grid extends past the realization horizon".into()));
    }
    let mut tracker = DerivativeTracker::new(pr, hurst);
    let n = a.len();
    let mut sig = vec![0.0; n * d];
    let mut b = vec![0.0; n];
    let rhs = |y: &[f64], xd: &[f64], sig: &mut [f64], b: &mut [f64], out: &mut [f64]| {
        vf.sigma(y, sig);
        vf.drift(y, b);
        for k in 0..n {
            out[k] = b[k] + (0..d).map(|i| sig[k * d + i] * xd[i]).sum::<f64>();
        }
    };
    let mut values = Vec::with_capacity(grid.len() * n);
    values.extend_from_slice(a);
    let mut y = a.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut cuts = Vec::new();
    let mut ones = Vec::new();
    tracker.decay(0.0, &mut ones);
    let (mut half, mut full) = (Vec::new(), Vec::new());
    let mut cached_h = f64::NAN;
    let (mut x0, mut xm, mut x1) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    for k in 0..grid.cells() {
        let (lo, hi) = (grid.node(k), grid.node(k + 1));
        cuts.clear();
        cuts.push(lo);
        for i in 0..d {
            let sw = pr.switch_times(i);
            let start = sw.partition_point(|&s| s <= lo);
            cuts.extend(sw[start..].iter().copied().take_while(|&s| s < hi));
        }
        cuts.sort_by(f64::total_cmp);
        cuts.push(hi);
        for w in cuts.windows(2) {
            let (s, t) = (w[0], w[1]);
            let h = t - s;
            if h <= 0.0 {
                continue;
            }
            // Ẋ is smooth on (s, t); switches at s are absorbed first
            tracker.advance(s);
            if h != cached_h {
                tracker.decay(0.5 * h, &mut half);
                full.clear();
                full.extend(half.iter().map(|v| v * v));
                cached_h = h;
            }
            for i in 0..d {
                x0[i] = tracker.peek(i, 0.0, &ones);
                xm[i] = tracker.peek(i, 0.5 * h, &half);
                x1[i] = tracker.peek(i, h, &full);
            }
            rhs(&y, &x0, &mut sig, &mut b, &mut k1);
            for c in 0..n {
                tmp[c] = y[c] + 0.5 * h * k1[c];
            }
            rhs(&tmp, &xm, &mut sig, &mut b, &mut k2);
            for c in 0..n {
                tmp[c] = y[c] + 0.5 * h * k2[c];
            }
            rhs(&tmp, &xm, &mut sig, &mut b, &mut k3);
            for c in 0..n {
                tmp[c] = y[c] + h * k3[c];
            }
            rhs(&tmp, &x1, &mut sig, &mut b, &mut k4);
            for c in 0..n {
                y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow { step: k });
        }
        values.extend_from_slice(&y);
    }
    SamplePath::new(*grid, n, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kac_stroock::{build_x_eps, sample_poisson, Epsilon, XEps};
    use crate::levy_area::{area_field_quadrature, AreaMethod};

    fn smooth_driver(cells: usize, f: impl Fn(f64) -> f64) -> RoughDriver {
        let g = Grid::with_cells(1.0, cells).unwrap();
        let path = SamplePath::from_fn(g, 1, |t, _| f(t)).unwrap();
        let anchors = (0..g.len()).map(|k| 0.5 * (path.value(k, 0) - path.value(0, 0)).powi(2)).collect();
        RoughDriver::new(AreaField::new(path, anchors, AreaMethod::DiagonalClosedForm).unwrap(), 0.45).unwrap()
    }

    #[test]
    fn step_examples() {
        let zero_sigma = LinearField::new(1, vec![vec![0.0]], vec![-2.0]).unwrap();
        let y = rough_step(&[1.5], &zero_sigma, &[0.3], &[0.045], 0.1).unwrap();
        assert_eq!(y, vec![1.5 - 2.0 * 1.5 * 0.1]);

        let lin = LinearField::scalar(1.0, 0.0);
        let e = 0.2;
        let y = rough_step(&[2.0], &lin, &[e], &[e * e / 2.0], 0.01).unwrap();
        assert!((y[0] - 2.0 * (1.0 + e + e * e / 2.0)).abs() < 1e-15);

        // constant σ: no second-order term
        struct Constant;
        impl VectorField for Constant {
            fn state_dim(&self) -> usize {
                1
            }
            fn noise_dim(&self) -> usize {
                2
            }
            fn sigma(&self, _: &[f64], out: &mut [f64]) {
                out.copy_from_slice(&[1.0, -3.0]);
            }
            fn dsigma(&self, _: &[f64], out: &mut [f64]) {
                out.iter_mut().for_each(|v| *v = 0.0);
            }
            fn drift(&self, _: &[f64], out: &mut [f64]) {
                out[0] = 0.5;
            }
        }
        let y = rough_step(&[0.0], &Constant, &[0.1, 0.2], &[9.0, 9.0, 9.0, 9.0], 0.1).unwrap();
        assert!((y[0] - (0.1 - 0.6 + 0.05)).abs() < 1e-15);
        assert!(matches!(rough_step(&[0.0, 1.0], &Constant, &[0.1, 0.2], &[0.0; 4], 0.1), Err(Error::Parameter(_))));
    }

    #[test]
    fn trig_field_derivative_is_consistent() {
        assert!(derivative_defect(&TrigField { scale: 0.8 }, 50, 3.0, 1) < 1e-4);
        let lin =
            LinearField::new(2, vec![vec![0.1, 0.2, -0.3, 0.4], vec![1.0, 0.0, 0.5, -1.0]], vec![0.0; 4]).unwrap();
        assert!(derivative_defect(&lin, 20, 2.0, 2) < 1e-4);
    }

    #[test]
    fn exponential_equation() {
        let f = |t: f64| (3.0 * t).sin() + t;
        let exact = (f(1.0) - f(0.0)).exp();
        let err = |cells| {
            let y =
                solve_rough(&smooth_driver(cells, f), &LinearField::scalar(1.0, 0.0), &[1.0], RoughOptions::default())
                    .unwrap();
            (y.value(cells, 0) - exact).abs()
        };
        let (e1, e2) = (err(256), err(512));
        assert!((e1 / e2).log2() >= 1.0, "{e1} {e2}");
        assert!(err(4096) < 1e-4 * exact);
    }

    #[test]
    fn drift_only_is_euler() {
        let vf = LinearField::scalar(0.0, 0.7);
        let d = smooth_driver(64, |t| t.cos());
        let y = solve_rough(&d, &vf, &[2.0], RoughOptions::default()).unwrap();
        let mut e = 2.0;
        let h = 1.0 / 64.0;
        for k in 0..64 {
            assert_eq!(y.value(k, 0), e);
            e += 0.7 * e * h;
        }
        assert_eq!(y.value(64, 0), e);
        let exact = 2.0 * 0.7f64.exp();
        assert!((y.value(64, 0) - exact).abs() < 0.02);
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let y =
            solve_rough(&smooth_driver(32, |t| t * t), &LinearField::scalar(1.0, 3.0), &[0.0], RoughOptions::default())
                .unwrap();
        assert!(y.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn order_check_sees_second_order() {
        let d = smooth_driver(256, |t| (2.0 * t).sin());
        let order = self_convergence_order(&d, &LinearField::scalar(1.0, 0.0), &[1.0]).unwrap().unwrap();
        assert!(order > 1.5, "{order}");
    }

    #[test]
    fn ode_jump_free_closed_form() {
        let h = HurstParam::new(0.4).unwrap();
        let eps = Epsilon::new(0.2).unwrap();
        let pr = PoissonRealization::from_jumps(1.0, eps, vec![vec![]]).unwrap();
        let g = Grid::with_cells(1.0, 400).unwrap();
        let y = solve_ode_smooth(&pr, h, &LinearField::scalar(1.0, 0.0), &[1.5], &g, OdeOptions::default()).unwrap();
        let x1 = XEps::new(&pr, h).value(0, 1.0).unwrap();
        assert!((y.value(400, 0) / (1.5 * x1.exp()) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ode_linear_closed_form_with_switches() {
        // dy = y dX^ε solves to y = a·e^{X^ε}
        let h = HurstParam::new(0.4).unwrap();
        for (eps, seed) in [(0.1, 3), (0.05, 4)] {
            let pr = sample_poisson(1, 1.0, Epsilon::new(eps).unwrap(), seed).unwrap();
            let g = Grid::with_cells(1.0, 2048).unwrap();
            let y =
                solve_ode_smooth(&pr, h, &LinearField::scalar(1.0, 0.0), &[0.7], &g, OdeOptions::default()).unwrap();
            let x = XEps::new(&pr, h);
            for k in [512, 1024, 2048] {
                let want = 0.7 * x.value(0, g.node(k)).unwrap().exp();
                assert!((y.value(k, 0) / want - 1.0).abs() < 1e-8, "ε = {eps}, k = {k}");
            }
        }
    }

    #[test]
    fn ode_refuses_coarse_grids() {
        let pr = sample_poisson(1, 1.0, Epsilon::new(0.1).unwrap(), 1).unwrap();
        let h = HurstParam::new(0.4).unwrap();
        let g = Grid::with_cells(1.0, 100).unwrap();
        let r = solve_ode_smooth(&pr, h, &LinearField::scalar(1.0, 0.0), &[1.0], &g, OdeOptions::default());
        assert!(matches!(r, Err(Error::Resolution { .. })));
        let r = solve_ode_smooth(
            &pr,
            h,
            &LinearField::scalar(1.0, 0.0),
            &[1.0],
            &g,
            OdeOptions { allow_under_resolved: true },
        );
        assert!(r.is_ok());
    }

    #[test]
    fn ode_drift_only_matches_exponential() {
        let pr = sample_poisson(1, 1.0, Epsilon::new(0.3).unwrap(), 3).unwrap();
        let g = Grid::with_cells(1.0, 50).unwrap();
        let y = solve_ode_smooth(
            &pr,
            HurstParam::new(0.4).unwrap(),
            &LinearField::scalar(0.0, -1.2),
            &[1.0],
            &g,
            OdeOptions::default(),
        )
        .unwrap();
        assert!((y.value(50, 0) - (-1.2f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn ode_and_rough_solvers_agree_on_smooth_drivers() {
        let h = HurstParam::new(0.4).unwrap();
        let eps = Epsilon::new(0.3).unwrap();
        let vf = TrigField { scale: 0.8 };
        let fine = Grid::with_cells(1.0, 512).unwrap();
        let coarse = Grid::with_cells(1.0, 256).unwrap();
        let tol = crate::quadrature::Tolerance::new(1e-13, 1e-10);
        for seed in 0..20 {
            let pr = sample_poisson(2, 1.0, eps, seed).unwrap();
            let ode = solve_ode_smooth(&pr, h, &vf, &[0.3, -0.2], &fine, OdeOptions::default()).unwrap();
            let x = XEps::new(&pr, h);
            let field = area_field_quadrature(&x, &coarse, tol).unwrap();
            assert_eq!(field.path(), &build_x_eps(&pr, h, &coarse).unwrap());
            let rough =
                solve_rough(&RoughDriver::new(field, 0.45).unwrap(), &vf, &[0.3, -0.2], RoughOptions::default())
                    .unwrap();
            for c in 0..2 {
                let (a, b) = (ode.value(512, c), rough.value(256, c));
                assert!((a - b).abs() < 2e-3, "seed {seed}: {a} vs {b}");
            }
        }
    }
}
