//! Liouville fractional Brownian motion `B_t = ∫_0^t (t − r)^{H−½} dW_r`:
//! covariance, exact Gaussian sampling on a grid, and the Volterra
//! construction from an explicit Wiener path.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::conv::CausalConvolver;
use crate::error::{Error, Result};
use crate::grid::{Grid, SamplePath};
use crate::quadrature::{integrate, Tolerance};
use crate::rng::substream;

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct HurstParam(f64);

impl HurstParam {
    /// Accepts `1/3 < h < 1/2`.
    pub fn new(h: f64) -> Result<Self> {
        if h > 1.0 / 3.0 && h < 0.5 {
            Ok(Self(h))
        } else {
            Err(Error::Parameter(format!("Hurst parameter must lie in (1/3, 1/2), got {h}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `R(t, s) = E[B_t B_s] = ∫_0^{t∧s} (t − r)^{H−½}(s − r)^{H−½} dr`.
///
/// With `s ≤ t` and `w = (s − r)^{H+½}` the integrand loses its endpoint
/// singularity: `R = (1/(H+½)) ∫_0^{s^{H+½}} (t − s + w^{1/(H+½)})^{H−½} dw`.
pub fn covariance_r(t: f64, s: f64, hurst: HurstParam) -> Result<f64> {
    if !(t >= 0.0 && s >= 0.0) {
        return Err(Error::Domain(format!("times must be non-negative, got ({t}, {s})")));
    }
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    let h = hurst.get();
    if lo == 0.0 {
        return Ok(0.0);
    }
    if lo == hi {
        return Ok(lo.powf(2.0 * h) / (2.0 * h));
    }
    let a = h + 0.5;
    let gap = hi - lo;
    let q = integrate(|w| (gap + w.powf(1.0 / a)).powf(h - 0.5), 0.0, lo.powf(a), Tolerance::new(1e-15, 1e-12))?;
    Ok(q.value / a)
}

/// `E|B_t − B_s|²`.
pub fn increment_variance(t: f64, s: f64, hurst: HurstParam) -> Result<f64> {
    Ok(covariance_r(t, t, hurst)? + covariance_r(s, s, hurst)? - 2.0 * covariance_r(t, s, hurst)?)
}

/// Covariance matrix `[R(t_i, t_j)]` over the nodes `t_1..t_n` (the node at
/// zero is left out; `B_0 = 0`).
pub fn covariance_matrix(grid: &Grid, hurst: HurstParam) -> Result<DMatrix<f64>> {
    let n = grid.cells();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let r = covariance_r(grid.node(i + 1), grid.node(j + 1), hurst)?;
            m[(i, j)] = r;
            m[(j, i)] = r;
        }
    }
    Ok(m)
}

/// Lower Cholesky factor of the grid covariance, reusable across draws.
#[derive(Clone, Debug)]
pub struct FbmCholesky {
    grid: Grid,
    factor: DMatrix<f64>,
    jitter: f64,
}

impl FbmCholesky {
    pub fn new(grid: &Grid, hurst: HurstParam) -> Result<Self> {
        let cov = covariance_matrix(grid, hurst)?;
        let max_diag = cov.diagonal().max();
        let mut jitter = 0.0;
        loop {
            let mut m = cov.clone();
            for k in 0..m.nrows() {
                m[(k, k)] += jitter;
            }
            if let Some(ch) = m.cholesky() {
                if jitter > 0.0 {
                    log::warn!("covariance factorized with diagonal jitter {jitter:e}");
                }
                return Ok(Self { grid: *grid, factor: ch.unpack(), jitter });
            }
            jitter = if jitter == 0.0 { 1e-16 * max_diag } else { jitter * 10.0 };
            if jitter > 1e-10 * max_diag {
                return Err(Error::Numerical(format!(
                    "covariance not positive definite even with jitter {:e}",
                    1e-10 * max_diag
                )));
            }
        }
    }

    /// Diagonal jitter that was needed for the factorization (usually 0).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `d` independent components, component `i` from substream `i` of `seed`.
    pub fn sample(&self, d: usize, seed: u64) -> Result<SamplePath> {
        let n = self.grid.cells();
        let comps: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                let mut rng = substream(seed, i as u64);
                let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let mut out = vec![0.0; n + 1];
                for r in 0..n {
                    let row = self.factor.row(r);
                    let mut acc = 0.0;
                    for c in 0..=r {
                        acc += row[c] * z[c];
                    }
                    out[r + 1] = acc;
                }
                out
            })
            .collect();
        SamplePath::from_components(self.grid, &comps)
    }
}

/// One exact-in-law draw of `d`-dimensional Liouville fBm on `grid`.
pub fn simulate_fbm_cholesky(grid: &Grid, d: usize, hurst: HurstParam, seed: u64) -> Result<SamplePath> {
    FbmCholesky::new(grid, hurst)?.sample(d, seed)
}

/// Increments of a `d`-dimensional Wiener process on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerGrid {
    grid: Grid,
    seed: Option<u64>,
    // per component, one increment per cell
    increments: Vec<Vec<f64>>,
}

impl WienerGrid {
    pub fn sample(grid: &Grid, d: usize, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Parameter("need at least one component".into()));
        }
        let sd = grid.step().sqrt();
        let increments = (0..d)
            .map(|i| {
                let mut rng = substream(seed, i as u64);
                (0..grid.cells())
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        sd * z
                    })
                    .collect()
            })
            .collect();
        Ok(Self { grid: *grid, seed: Some(seed), increments })
    }

    pub fn from_increments(grid: &Grid, increments: Vec<Vec<f64>>) -> Result<Self> {
        if increments.is_empty() || increments.iter().any(|c| c.len() != grid.cells()) {
            return Err(Error::Data(format!("need one increment per cell ({}) per component", grid.cells())));
        }
        Ok(Self { grid: *grid, seed: None, increments })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.increments.len()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn increments(&self, i: usize) -> &[f64] {
        &self.increments[i]
    }

    /// The Wiener path itself.
    pub fn path(&self) -> Result<SamplePath> {
        let comps: Vec<Vec<f64>> = self
            .increments
            .iter()
            .map(|inc| {
                let mut out = Vec::with_capacity(inc.len() + 1);
                let mut acc = 0.0;
                out.push(0.0);
                for &x in inc {
                    acc += x;
                    out.push(acc);
                }
                out
            })
            .collect();
        SamplePath::from_components(self.grid, &comps)
    }
}

/// Cell-averaged Volterra kernel: entry `n − 1` is
/// `(1/h) ∫_{(n−1)h}^{nh} x^{H−½} dx`, the weight of the Wiener increment `n`
/// cells back.
pub fn volterra_weights(grid: &Grid, hurst: HurstParam) -> Vec<f64> {
    let a = hurst.get() + 0.5;
    let h = grid.step();
    (1..=grid.cells()).map(|n| ((n as f64 * h).powf(a) - ((n - 1) as f64 * h).powf(a)) / (a * h)).collect()
}

/// Volterra fBm builder with the kernel spectrum cached across draws.
pub struct VolterraFbm {
    grid: Grid,
    hurst: HurstParam,
    conv: CausalConvolver,
}

impl VolterraFbm {
    pub fn new(grid: &Grid, hurst: HurstParam) -> Self {
        Self { grid: *grid, hurst, conv: CausalConvolver::new(&volterra_weights(grid, hurst)) }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn hurst(&self) -> HurstParam {
        self.hurst
    }

    pub fn convolver(&self) -> &CausalConvolver {
        &self.conv
    }

    /// `B(t_k) = Σ_{m<k} K̄_{k−m} ΔW_m`.
    pub fn path(&self, w: &WienerGrid) -> Result<SamplePath> {
        if w.grid != self.grid {
            return Err(Error::Data("Wiener grid differs from the builder's grid".into()));
        }
        let mut comps = Vec::with_capacity(w.dim());
        let mut i = 0;
        while i < w.dim() {
            if i + 1 < w.dim() {
                let (a, b) = self.conv.apply_pair(w.increments(i), w.increments(i + 1));
                comps.push(a);
                comps.push(b);
                i += 2;
            } else {
                comps.push(self.conv.apply(w.increments(i)));
                i += 1;
            }
        }
        SamplePath::from_components(self.grid, &comps)
    }
}

pub fn simulate_fbm_volterra(w: &WienerGrid, hurst: HurstParam) -> Result<SamplePath> {
    VolterraFbm::new(w.grid(), hurst).path(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{correlation, mean_se, variance_se};

    fn h4() -> HurstParam {
        HurstParam::new(0.4).unwrap()
    }

    /// Product-integration oracle: exact integral of `x^{H−½}` over each
    /// cell times the midpoint value of the smooth factor.
    fn brute_force_r(t: f64, s: f64, h: f64, cells: usize) -> f64 {
        let a = h + 0.5;
        let dx = s / cells as f64;
        let gap = t - s;
        (0..cells)
            .map(|k| {
                let (lo, hi) = (k as f64 * dx, (k + 1) as f64 * dx);
                let sing = (hi.powf(a) - lo.powf(a)) / a;
                sing * (gap + 0.5 * (lo + hi)).powf(h - 0.5)
            })
            .sum()
    }

    #[test]
    fn hurst_range() {
        assert!(HurstParam::new(0.3).is_err());
        assert!(HurstParam::new(0.5).is_err());
        assert!(HurstParam::new(0.45).is_ok());
    }

    #[test]
    fn covariance_examples() {
        assert!((covariance_r(1.0, 1.0, h4()).unwrap() - 1.25).abs() < 1e-14);
        assert_eq!(covariance_r(0.7, 0.0, h4()).unwrap(), 0.0);
        let r = covariance_r(1.0, 0.5, h4()).unwrap();
        let oracle = brute_force_r(1.0, 0.5, 0.4, 1_000_000);
        assert!((r / oracle - 1.0).abs() < 1e-6, "{r} vs {oracle}");
        assert_eq!(r, covariance_r(0.5, 1.0, h4()).unwrap());
    }

    #[test]
    fn covariance_near_diagonal_is_continuous() {
        let d = covariance_r(0.8, 0.8, h4()).unwrap();
        let near = covariance_r(0.8 + 1e-9, 0.8, h4()).unwrap();
        assert!((d - near).abs() < 1e-6);
    }

    #[test]
    fn covariance_matrix_is_positive_definite() {
        let g = Grid::with_cells(1.0, 32).unwrap();
        let m = covariance_matrix(&g, h4()).unwrap();
        assert_eq!(m, m.transpose());
        assert!(m.symmetric_eigenvalues().iter().all(|&l| l > 0.0));
    }

    #[test]
    fn cholesky_variance_at_one() {
        let g = Grid::with_cells(1.0, 8).unwrap();
        let f = FbmCholesky::new(&g, h4()).unwrap();
        let xs: Vec<f64> = (0..10_000).map(|s| f.sample(1, s).unwrap().value(8, 0)).collect();
        let (v, se) = variance_se(&xs);
        assert!((v - 1.25).abs() < 3.0 * se, "{v} ± {se}");
        assert!(f.sample(2, 0).unwrap().point(0).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn components_are_uncorrelated() {
        let g = Grid::with_cells(1.0, 4).unwrap();
        let f = FbmCholesky::new(&g, h4()).unwrap();
        let draws: Vec<SamplePath> = (0..5_000).map(|s| f.sample(2, s).unwrap()).collect();
        let a: Vec<f64> = draws.iter().map(|p| p.value(4, 0)).collect();
        let b: Vec<f64> = draws.iter().map(|p| p.value(2, 1)).collect();
        let rho = correlation(&a, &b);
        assert!(rho.abs() < 3.0 / (5_000f64).sqrt(), "{rho}");
    }

    #[test]
    fn volterra_examples() {
        let g = Grid::with_cells(1.0, 16).unwrap();
        let zero = WienerGrid::from_increments(&g, vec![vec![0.0; 16]]).unwrap();
        let b = simulate_fbm_volterra(&zero, h4()).unwrap();
        assert!(b.values().iter().all(|&x| x == 0.0));
        let mut inc = vec![0.0; 16];
        inc[0] = 1.0;
        let w = WienerGrid::from_increments(&g, vec![inc]).unwrap();
        let b = simulate_fbm_volterra(&w, h4()).unwrap();
        let h = g.step();
        for k in 1..=16 {
            let t = g.node(k);
            let want = (t.powf(0.9) - (t - h).powf(0.9)) / (h * 0.9);
            assert!((b.value(k, 0) - want).abs() < 1e-12, "{k}");
        }
    }

    #[test]
    fn volterra_variance_bias_shrinks_with_step() {
        // Var B_1 of the discrete scheme is Σ K̄_n² h exactly.
        let exact = 1.25;
        let bias = |cells: usize| {
            let g = Grid::with_cells(1.0, cells).unwrap();
            let h = g.step();
            let v: f64 = volterra_weights(&g, h4()).iter().map(|k| k * k * h).sum();
            (v - exact).abs()
        };
        let (b1, b2) = (bias(256), bias(512));
        assert!(b2 < b1 && b1 < 0.05, "{b1} {b2}");

        let g = Grid::with_cells(1.0, 256).unwrap();
        let vf = VolterraFbm::new(&g, h4());
        let xs: Vec<f64> =
            (0..10_000).map(|s| vf.path(&WienerGrid::sample(&g, 1, s).unwrap()).unwrap().value(256, 0)).collect();
        let (v, se) = variance_se(&xs);
        assert!((v - exact).abs() < 3.0 * se + bias(256), "{v} ± {se}");
    }

    #[test]
    fn wiener_increments_have_step_variance() {
        let g = Grid::with_cells(2.0, 1000).unwrap();
        let w = WienerGrid::sample(&g, 1, 3).unwrap();
        let (m, se) = mean_se(w.increments(0));
        assert!(m.abs() < 3.0 * se);
        let (v, vse) = variance_se(w.increments(0));
        assert!((v - g.step()).abs() < 3.0 * vse);
        assert_eq!(w.path().unwrap().value(0, 0), 0.0);
    }
}
