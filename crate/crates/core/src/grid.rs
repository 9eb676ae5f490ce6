//! Uniform grids, sampled paths, two-parameter increments and the grid
//! estimators of Hölder, Sobolev and Garsia-type norms.
//!
//! Two-parameter increments are indexed by grid node indices `(s, t)` with
//! `s <= t`; the value at `(t, t)` is always zero.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    horizon: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(horizon: f64, n_points: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Parameter(format!("grid horizon must be positive, got {horizon}")));
        }
        if n_points < 2 {
            return Err(Error::InsufficientData(format!("grid needs >= 2 points, got {n_points}")));
        }
        Ok(Self { horizon, n_points })
    }

    /// Grid on `[0, horizon]` with `cells` equal cells.
    pub fn with_cells(horizon: f64, cells: usize) -> Result<Self> {
        Self::new(horizon, cells + 1)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cells(&self) -> usize {
        self.n_points - 1
    }

    pub fn step(&self) -> f64 {
        self.horizon / (self.n_points - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.n_points - 1 {
            self.horizon
        } else {
            k as f64 * self.horizon / (self.n_points - 1) as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.node(k)).collect()
    }

    /// Index of the node equal to `t` up to rounding.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = t / self.step();
        let k = x.round();
        if k < 0.0 || k as usize >= self.n_points || (x - k).abs() > 1e-9 {
            None
        } else {
            Some(k as usize)
        }
    }

    /// Every `stride`-th node of this grid.
    pub fn coarsen(&self, stride: usize) -> Result<Self> {
        if stride == 0 || self.cells() % stride != 0 {
            return Err(Error::Parameter(format!("stride {stride} does not divide {} cells", self.cells())));
        }
        Self::with_cells(self.horizon, self.cells() / stride)
    }
}

/// A `dim`-component path with one value per grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePath {
    grid: Grid,
    dim: usize,
    // node-major: values[k * dim + i]
    values: Vec<f64>,
}

impl SamplePath {
    pub fn new(grid: Grid, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("path dimension must be >= 1".into()));
        }
        if values.len() != grid.len() * dim {
            return Err(Error::Data(format!(
                "expected {} values ({} nodes x {dim}), got {}",
                grid.len() * dim,
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, dim, values })
    }

    pub fn from_fn(grid: Grid, dim: usize, mut f: impl FnMut(f64, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * dim);
        for k in 0..grid.len() {
            let t = grid.node(k);
            for i in 0..dim {
                values.push(f(t, i));
            }
        }
        Self::new(grid, dim, values)
    }

    /// Path assembled from per-component series.
    pub fn from_components(grid: Grid, comps: &[Vec<f64>]) -> Result<Self> {
        let dim = comps.len();
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Data("component length does not match the grid".into()));
        }
        let mut values = Vec::with_capacity(grid.len() * dim);
        for k in 0..grid.len() {
            for c in comps {
                values.push(c[k]);
            }
        }
        Self::new(grid, dim, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, k: usize, i: usize) -> f64 {
        self.values[k * self.dim + i]
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        (0..self.grid.len()).map(|k| self.value(k, i)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The path restricted to every `stride`-th node.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        let grid = self.grid.coarsen(stride)?;
        let mut values = Vec::with_capacity(grid.len() * self.dim);
        for k in 0..grid.len() {
            values.extend_from_slice(self.point(k * stride));
        }
        Self::new(grid, self.dim, values)
    }
}

type LazyFn = Arc<dyn Fn(usize, usize, usize) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Dense(Vec<f64>),
    Lazy(LazyFn),
}

/// A `dim`-vector valued two-parameter increment `h_{st}` on grid pairs.
#[derive(Clone)]
pub struct Increment2 {
    grid: Grid,
    dim: usize,
    repr: Repr,
}

impl std::fmt::Debug for Increment2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.repr {
            Repr::Dense(_) => "dense",
            Repr::Lazy(_) => "lazy",
        };
        f.debug_struct("Increment2").field("grid", &self.grid).field("dim", &self.dim).field("repr", &kind).finish()
    }
}

impl Increment2 {
    /// Increment evaluated on demand by `f(s, t, component)`. `f` is only
    /// called with `s < t`.
    pub fn from_fn(grid: Grid, dim: usize, f: impl Fn(usize, usize, usize) -> f64 + Send + Sync + 'static) -> Self {
        Self { grid, dim, repr: Repr::Lazy(Arc::new(f)) }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, s: usize, t: usize, i: usize) -> f64 {
        if s == t {
            return 0.0;
        }
        match &self.repr {
            Repr::Dense(v) => v[(s * self.grid.len() + t) * self.dim + i],
            Repr::Lazy(f) => f(s, t, i),
        }
    }

    /// Euclidean norm of `h_{st}`.
    pub fn norm(&self, s: usize, t: usize) -> f64 {
        (0..self.dim).map(|i| self.value(s, t, i).powi(2)).sum::<f64>().sqrt()
    }

    /// Dense copy holding every ordered pair `s <= t`.
    pub fn materialize(&self) -> Self {
        let n = self.grid.len();
        let mut v = vec![0.0; n * n * self.dim];
        for s in 0..n {
            for t in s + 1..n {
                for i in 0..self.dim {
                    v[(s * n + t) * self.dim + i] = self.value(s, t, i);
                }
            }
        }
        Self { grid: self.grid, dim: self.dim, repr: Repr::Dense(v) }
    }
}

/// `(δg)_{st} = g_t − g_s`.
pub fn delta1(g: &SamplePath) -> Increment2 {
    let path = Arc::new(g.clone());
    Increment2::from_fn(g.grid, g.dim, move |s, t, i| path.value(t, i) - path.value(s, i))
}

/// `(δh)_{sut} = h_{st} − h_{su} − h_{ut}`.
pub fn delta2(h: &Increment2, s: usize, u: usize, t: usize) -> Result<Vec<f64>> {
    if !(s <= u && u <= t) || t >= h.grid.len() {
        return Err(Error::Ordering { s, u, t });
    }
    Ok((0..h.dim).map(|i| h.value(s, t, i) - h.value(s, u, i) - h.value(u, t, i)).collect())
}

/// Which grid pairs a supremum runs over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PairSet {
    /// Every pair of distinct nodes.
    #[default]
    All,
    /// Only dyadic neighbours `(k 2^j, (k+1) 2^j)`.
    Dyadic,
}

fn for_each_pair(n: usize, pairs: PairSet, mut f: impl FnMut(usize, usize)) {
    match pairs {
        PairSet::All => {
            for s in 0..n {
                for t in s + 1..n {
                    f(s, t);
                }
            }
        }
        PairSet::Dyadic => {
            let mut stride = 1;
            while stride < n {
                let mut k = 0;
                while (k + 1) * stride < n {
                    f(k * stride, (k + 1) * stride);
                    k += 1;
                }
                stride *= 2;
            }
        }
    }
}

fn lag_powers(grid: &Grid, exponent: f64) -> Vec<f64> {
    let h = grid.step();
    (0..grid.len()).map(|l| (l as f64 * h).powf(exponent)).collect()
}

/// Grid estimate of the μ-Hölder semi-norm `sup |g_t − g_s| / |t − s|^μ`.
pub fn holder_norm1(g: &SamplePath, mu: f64, pairs: PairSet) -> Result<f64> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::Domain(format!("Hölder exponent must lie in (0, 1], got {mu}")));
    }
    let pow = lag_powers(&g.grid, mu);
    let mut sup: f64 = 0.0;
    for_each_pair(g.grid.len(), pairs, |s, t| {
        let d: f64 = (0..g.dim).map(|i| (g.value(t, i) - g.value(s, i)).powi(2)).sum::<f64>().sqrt();
        sup = sup.max(d / pow[t - s]);
    });
    Ok(sup)
}

/// Grid estimate of `sup_{s<t} |h_{st}| / (t − s)^μ`.
pub fn holder_norm2(h: &Increment2, mu: f64, pairs: PairSet) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("exponent must be positive, got {mu}")));
    }
    let pow = lag_powers(&h.grid, mu);
    let mut sup: f64 = 0.0;
    for_each_pair(h.grid.len(), pairs, |s, t| sup = sup.max(h.norm(s, t) / pow[t - s]));
    Ok(sup)
}

fn trapezoid_weights(grid: &Grid) -> Vec<f64> {
    let h = grid.step();
    let mut w = vec![h; grid.len()];
    w[0] = 0.5 * h;
    *w.last_mut().expect("grid is non-empty") = 0.5 * h;
    w
}

/// Trapezoid approximation of `∫∫_{[0,T]²} φ(s,t) ds dt` for a symmetric
/// integrand, with the diagonal excluded.
fn off_diagonal_double_sum(grid: &Grid, mut phi: impl FnMut(usize, usize) -> f64) -> f64 {
    let w = trapezoid_weights(grid);
    let n = grid.len();
    let mut sum = 0.0;
    for s in 0..n {
        for t in s + 1..n {
            sum += w[s] * w[t] * phi(s, t);
        }
    }
    2.0 * sum
}

/// `(∫∫ |g_t − g_s|^p / |t − s|^{1+αp} ds dt)^{1/p}` over `[0,T]²`.
pub fn sobolev_norm(g: &SamplePath, alpha: f64, p: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("α must lie in (0, 1), got {alpha}")));
    }
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("p must be >= 1, got {p}")));
    }
    let pow = lag_powers(&g.grid, 1.0 + alpha * p);
    let total = off_diagonal_double_sum(&g.grid, |s, t| {
        let d: f64 = (0..g.dim).map(|i| (g.value(t, i) - g.value(s, i)).powi(2)).sum::<f64>().sqrt();
        d.powf(p) / pow[t - s]
    });
    Ok(total.powf(1.0 / p))
}

/// `U_{γ;p}(h) = (∫∫ |h_{st}|^p / |t − s|^{γp} ds dt)^{1/p}` over `[0,T]²`.
pub fn garsia_u(h: &Increment2, gamma: f64, p: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("γ must be positive, got {gamma}")));
    }
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("p must be >= 1, got {p}")));
    }
    let pow = lag_powers(&h.grid, gamma * p);
    let total = off_diagonal_double_sum(&h.grid, |s, t| h.norm(s, t).powf(p) / pow[t - s]);
    Ok(total.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path(horizon: f64, n: usize, f: impl Fn(f64) -> f64) -> SamplePath {
        SamplePath::from_fn(Grid::new(horizon, n).unwrap(), 1, |t, _| f(t)).unwrap()
    }

    #[test]
    fn grid_nodes() {
        let g = Grid::new(2.0, 5).unwrap();
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(4), 2.0);
        assert_eq!(g.index_of(1.5), Some(3));
        assert_eq!(g.index_of(1.25), None);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(Grid::new(1.0, 1), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn delta1_examples() {
        let c = delta1(&path(1.0, 5, |_| 3.0));
        assert!((0..5).all(|s| (s..5).all(|t| c.value(s, t, 0) == 0.0)));
        assert_eq!(delta1(&path(1.0, 3, |t| t)).value(0, 2, 0), 1.0);
        assert_eq!(delta1(&path(2.0, 3, |t| t * t)).value(1, 2, 0), 3.0);
    }

    #[test]
    fn delta2_examples() {
        let g = Grid::new(2.0, 3).unwrap();
        let sq = Increment2::from_fn(g, 1, move |s, t, _| (g.node(t) - g.node(s)).powi(2));
        assert_eq!(delta2(&sq, 0, 1, 2).unwrap(), vec![2.0]);
        let mixed = Increment2::from_fn(g, 1, move |s, t, _| g.node(s) * (g.node(t) - g.node(s)));
        assert_eq!(delta2(&mixed, 0, 1, 2).unwrap(), vec![-1.0]);
        assert!(matches!(delta2(&sq, 1, 0, 2), Err(Error::Ordering { .. })));
    }

    #[test]
    fn holder1_examples() {
        assert_eq!(holder_norm1(&path(1.0, 9, |_| 1.0), 0.5, PairSet::All).unwrap(), 0.0);
        assert!((holder_norm1(&path(1.0, 9, |t| t), 1.0, PairSet::All).unwrap() - 1.0).abs() < 1e-12);
        // nodes {0, 0.25, ...}: restrict to {0, 0.25, 1} by a dense path on 5 points
        let g =
            SamplePath::new(Grid::new(1.0, 5).unwrap(), 1, vec![0.0, 0.5, 0.5f64.sqrt(), 0.75f64.sqrt(), 1.0]).unwrap();
        assert!((holder_norm1(&g, 0.5, PairSet::All).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(holder_norm1(&g, 0.0, PairSet::All), Err(Error::Domain(_))));
    }

    #[test]
    fn holder2_examples() {
        let g = Grid::new(1.0, 17).unwrap();
        let zero = Increment2::from_fn(g, 1, |_, _, _| 0.0);
        assert_eq!(holder_norm2(&zero, 0.7, PairSet::All).unwrap(), 0.0);
        let gamma = 0.4;
        let pw = Increment2::from_fn(g, 1, move |s, t, _| (g.node(t) - g.node(s)).powf(2.0 * gamma));
        assert!((holder_norm2(&pw, 2.0 * gamma, PairSet::All).unwrap() - 1.0).abs() < 1e-12);
        // (1,2) entry of the area of x = (t, 2t): (t − s)^2 · 1 · 2 / 2
        let area = Increment2::from_fn(g, 1, move |s, t, _| (g.node(t) - g.node(s)).powi(2));
        assert!((holder_norm2(&area, 2.0, PairSet::All).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sobolev_examples() {
        assert_eq!(sobolev_norm(&path(1.0, 64, |_| 2.0), 0.3, 2.0).unwrap(), 0.0);
        let lin = path(1.0, 512, |t| t);
        let v = sobolev_norm(&lin, 0.25, 2.0).unwrap();
        assert!((v / (8.0f64 / 15.0).sqrt() - 1.0).abs() < 0.01, "{v}");
        let v = sobolev_norm(&lin, 0.5, 2.0).unwrap();
        assert!((v - 1.0).abs() < 0.01, "{v}");
    }

    #[test]
    fn sobolev_converges_under_refinement() {
        let exact = (8.0f64 / 15.0).sqrt();
        let errs: Vec<f64> = [64, 128, 256, 512]
            .iter()
            .map(|&n| (sobolev_norm(&path(1.0, n, |t| t), 0.25, 2.0).unwrap() - exact).abs())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }

    #[test]
    fn garsia_examples() {
        let g = Grid::new(1.0, 512).unwrap();
        let zero = Increment2::from_fn(g, 1, |_, _, _| 0.0);
        assert_eq!(garsia_u(&zero, 0.5, 2.0).unwrap(), 0.0);
        let lin = Increment2::from_fn(g, 1, move |s, t, _| g.node(t) - g.node(s));
        let v = garsia_u(&lin, 0.5, 2.0).unwrap();
        assert!((v / (1.0f64 / 3.0).sqrt() - 1.0).abs() < 0.01, "{v}");
        let gamma = 0.35;
        let ones = Increment2::from_fn(g, 1, move |s, t, _| (g.node(t) - g.node(s)).powf(gamma));
        for p in [1.0, 2.0, 4.0] {
            let v = garsia_u(&ones, gamma, p).unwrap();
            assert!((v - 1.0).abs() < 0.01, "p = {p}: {v}");
        }
    }

    #[test]
    fn dyadic_pairs_are_a_subset() {
        let g = path(1.0, 33, |t| (7.0 * t).sin() + t * t);
        let all = holder_norm1(&g, 0.5, PairSet::All).unwrap();
        let dy = holder_norm1(&g, 0.5, PairSet::Dyadic).unwrap();
        assert!(dy <= all && dy > 0.0);
    }

    #[test]
    fn materialized_matches_lazy() {
        let g = path(1.0, 7, |t| t.sin());
        let lazy = delta1(&g);
        let dense = lazy.materialize();
        for s in 0..7 {
            for t in s..7 {
                assert_eq!(lazy.value(s, t, 0), dense.value(s, t, 0));
            }
        }
    }

    proptest! {
        #[test]
        fn delta_delta_vanishes(vals in prop::collection::vec(-1e3f64..1e3, 4..40)) {
            let n = vals.len();
            let g = SamplePath::new(Grid::new(1.0, n).unwrap(), 1, vals).unwrap();
            let h = delta1(&g);
            for s in 0..n {
                for u in s..n {
                    for t in u..n {
                        let d = delta2(&h, s, u, t).unwrap()[0];
                        prop_assert!(d.abs() <= 1e-12);
                    }
                }
            }
        }

        #[test]
        fn holder_sup_on_subgrid_is_smaller(vals in prop::collection::vec(-10f64..10.0, 9), mu in 0.1f64..1.0) {
            let g = SamplePath::new(Grid::new(1.0, 9).unwrap(), 1, vals).unwrap();
            let sub = g.subsample(2).unwrap();
            let full = holder_norm1(&g, mu, PairSet::All).unwrap();
            prop_assert!(holder_norm1(&sub, mu, PairSet::All).unwrap() <= full + 1e-12);
            prop_assert!(full >= 0.0);
        }
    }
}
