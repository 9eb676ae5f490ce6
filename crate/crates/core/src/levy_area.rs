//! Second-order rough-path data (Lévy areas).
//!
//! Index convention, used everywhere in the crate:
//!
//! ```text
//! x²_{st}(i, j) = ∫_s^t (x^j_u − x^j_s) dx^i_u
//! ```
//!
//! so the first index is the outer integrator. Matrices are stored row-major,
//! entry `(i, j)` at `i * d + j`. With this convention Chen's relation reads
//!
//! ```text
//! x²_{st}(i,j) = x²_{0t}(i,j) − x²_{0s}(i,j) − (x^j_s − x^j_0)(x^i_t − x^i_s)
//! δx²_{sut}(i,j) = (x^j_u − x^j_s)(x^i_t − x^i_u)
//! ```

use rand::Rng;
use serde::Serialize;

use crate::conv::CausalConvolver;
use crate::error::{Error, Result};
use crate::fbm::{volterra_weights, HurstParam, WienerGrid};
use crate::grid::{Grid, SamplePath};
use crate::kac_stroock::{PoissonRealization, XEps};
use crate::quadrature::{gk15, gk15_rule, integrate_vec_pieces, Tolerance};
use crate::rng::substream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AreaMethod {
    Quadrature,
    ClosedForm,
    WienerSums,
    DiagonalClosedForm,
    PiecewiseLinear,
}

impl std::fmt::Display for AreaMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Quadrature => "quadrature",
            Self::ClosedForm => "closed-form",
            Self::WienerSums => "wiener-sums",
            Self::DiagonalClosedForm => "diagonal-closed-form",
            Self::PiecewiseLinear => "piecewise-linear",
        };
        f.write_str(s)
    }
}

/// Anything that can report path increments and areas on grid pairs.
pub trait AreaSource {
    fn dim(&self) -> usize;
    fn n_points(&self) -> usize;
    /// `x^i_t − x^i_s`.
    fn increment(&self, s: usize, t: usize, i: usize) -> f64;
    /// `x²_{st}` as a row-major `d × d` matrix.
    fn area(&self, s: usize, t: usize) -> Vec<f64>;
}

/// A path together with its areas anchored at zero, `a_k = x²_{0 t_k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AreaField {
    path: SamplePath,
    // node-major, a[k * d * d + i * d + j]
    anchors: Vec<f64>,
    method: AreaMethod,
}

impl AreaField {
    pub fn new(path: SamplePath, anchors: Vec<f64>, method: AreaMethod) -> Result<Self> {
        let d = path.dim();
        if anchors.len() != path.grid().len() * d * d {
            return Err(Error::Data(format!(
                "expected {} anchored values, got {}",
                path.grid().len() * d * d,
                anchors.len()
            )));
        }
        if anchors[..d * d].iter().any(|&v| v != 0.0) {
            return Err(Error::Data("area anchored at 0 must vanish at t = 0".into()));
        }
        Ok(Self { path, anchors, method })
    }

    /// Area of the piecewise-linear interpolation of `path`.
    pub fn piecewise_linear(path: SamplePath) -> Self {
        let d = path.dim();
        let n = path.grid().len();
        let mut anchors = vec![0.0; n * d * d];
        let x0 = path.point(0).to_vec();
        for k in 0..n - 1 {
            let (p, q) = (path.point(k), path.point(k + 1));
            for i in 0..d {
                let dxi = q[i] - p[i];
                for j in 0..d {
                    let mid = 0.5 * (p[j] + q[j]) - x0[j];
                    anchors[(k + 1) * d * d + i * d + j] = anchors[k * d * d + i * d + j] + mid * dxi;
                }
            }
        }
        Self { path, anchors, method: AreaMethod::PiecewiseLinear }
    }

    pub fn path(&self) -> &SamplePath {
        &self.path
    }

    pub fn grid(&self) -> &Grid {
        self.path.grid()
    }

    pub fn method(&self) -> AreaMethod {
        self.method
    }

    /// `x²_{0 t_k}`.
    pub fn anchor(&self, k: usize) -> &[f64] {
        let dd = self.path.dim() * self.path.dim();
        &self.anchors[k * dd..(k + 1) * dd]
    }

    pub fn anchor_entry(&self, k: usize, i: usize, j: usize) -> f64 {
        self.anchor(k)[i * self.path.dim() + j]
    }

    /// Same field with anchor `k` entry `(i, j)` shifted by `delta`.
    pub fn perturbed(&self, k: usize, i: usize, j: usize, delta: f64) -> Self {
        let mut out = self.clone();
        let d = self.path.dim();
        out.anchors[k * d * d + i * d + j] += delta;
        out
    }

    /// Replaces the diagonal by `½(x^i_t − x^i_0)²`.
    pub fn with_closed_form_diagonal(mut self) -> Self {
        let d = self.path.dim();
        for k in 0..self.path.grid().len() {
            for i in 0..d {
                let dx = self.path.value(k, i) - self.path.value(0, i);
                self.anchors[k * d * d + i * d + i] = 0.5 * dx * dx;
            }
        }
        self
    }
}

/// `x²_{st}` from the anchored values by Chen's relation.
pub fn chen_reconstruct(af: &AreaField, s: usize, t: usize) -> Result<Vec<f64>> {
    let n = af.grid().len();
    if s > t || t >= n {
        return Err(Error::Ordering { s, u: s, t });
    }
    let d = af.path.dim();
    if s == t {
        return Ok(vec![0.0; d * d]);
    }
    let (at, as_) = (af.anchor(t), af.anchor(s));
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        let dxi = af.path.value(t, i) - af.path.value(s, i);
        for j in 0..d {
            let xj = af.path.value(s, j) - af.path.value(0, j);
            out[i * d + j] = at[i * d + j] - as_[i * d + j] - xj * dxi;
        }
    }
    Ok(out)
}

impl AreaSource for AreaField {
    fn dim(&self) -> usize {
        self.path.dim()
    }

    fn n_points(&self) -> usize {
        self.path.grid().len()
    }

    fn increment(&self, s: usize, t: usize, i: usize) -> f64 {
        self.path.value(t, i) - self.path.value(s, i)
    }

    fn area(&self, s: usize, t: usize) -> Vec<f64> {
        chen_reconstruct(self, s, t).expect("grid indices are in range")
    }
}

/// Areas computed independently for every grid pair.
#[derive(Clone, Debug)]
pub struct AreaTable {
    path: SamplePath,
    // (s * n + t) * d * d
    areas: Vec<f64>,
}

impl AreaTable {
    /// Fills every pair `s < t` with `area(t_s, t_t)`.
    pub fn build(path: SamplePath, mut area: impl FnMut(f64, f64) -> Result<Vec<f64>>) -> Result<Self> {
        let n = path.grid().len();
        let dd = path.dim() * path.dim();
        let mut areas = vec![0.0; n * n * dd];
        for s in 0..n {
            for t in s + 1..n {
                let a = area(path.grid().node(s), path.grid().node(t))?;
                if a.len() != dd {
                    return Err(Error::Data("area callback returned the wrong size".into()));
                }
                areas[(s * n + t) * dd..(s * n + t + 1) * dd].copy_from_slice(&a);
            }
        }
        Ok(Self { path, areas })
    }

    pub fn path(&self) -> &SamplePath {
        &self.path
    }

    /// Field anchored at zero taken from the table's first row.
    pub fn anchored(&self, method: AreaMethod) -> AreaField {
        let n = self.path.grid().len();
        let anchors = (0..n).flat_map(|t| self.area(0, t)).collect();
        AreaField { path: self.path.clone(), anchors, method }
    }

    /// Shifts the stored `x²_{st}(i, j)` by `delta`.
    pub fn perturb(&mut self, s: usize, t: usize, i: usize, j: usize, delta: f64) {
        let n = self.path.grid().len();
        let d = self.path.dim();
        self.areas[(s * n + t) * d * d + i * d + j] += delta;
    }
}

impl AreaSource for AreaTable {
    fn dim(&self) -> usize {
        self.path.dim()
    }

    fn n_points(&self) -> usize {
        self.path.grid().len()
    }

    fn increment(&self, s: usize, t: usize, i: usize) -> f64 {
        self.path.value(t, i) - self.path.value(s, i)
    }

    fn area(&self, s: usize, t: usize) -> Vec<f64> {
        let n = self.path.grid().len();
        let dd = self.path.dim() * self.path.dim();
        self.areas[(s * n + t) * dd..(s * n + t + 1) * dd].to_vec()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChenReport {
    pub triples: usize,
    pub max_defect: f64,
    /// Largest `|x²|` entry seen.
    pub scale: f64,
    pub worst: Option<(usize, usize, usize)>,
    pub tolerance: f64,
    pub pass: bool,
}

/// `count` uniformly drawn node triples `s <= u <= t`.
pub fn random_triples(n_points: usize, count: usize, seed: u64) -> Vec<(usize, usize, usize)> {
    let mut rng = substream(seed, 0);
    (0..count)
        .map(|_| {
            let mut v = [rng.random_range(0..n_points), rng.random_range(0..n_points), rng.random_range(0..n_points)];
            v.sort_unstable();
            (v[0], v[1], v[2])
        })
        .collect()
}

/// Maximal Chen defect `|x²_{st} − x²_{su} − x²_{ut} − δx²_{sut}|` over the
/// given triples. Passes iff the defect is at most `rel_tol` times the
/// largest area entry seen.
pub fn chen_check(src: &impl AreaSource, triples: &[(usize, usize, usize)], rel_tol: f64) -> Result<ChenReport> {
    let d = src.dim();
    let mut max_defect: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut worst = None;
    for &(s, u, t) in triples {
        if !(s <= u && u <= t && t < src.n_points()) {
            return Err(Error::Ordering { s, u, t });
        }
        let (st, su, ut) = (src.area(s, t), src.area(s, u), src.area(u, t));
        for i in 0..d {
            for j in 0..d {
                let k = i * d + j;
                let expected = src.increment(s, u, j) * src.increment(u, t, i);
                let defect = (st[k] - su[k] - ut[k] - expected).abs();
                scale = scale.max(st[k].abs()).max(su[k].abs()).max(ut[k].abs());
                if defect > max_defect || worst.is_none() {
                    max_defect = max_defect.max(defect);
                    worst = Some((s, u, t));
                }
            }
        }
    }
    let tolerance = rel_tol * scale;
    Ok(ChenReport { triples: triples.len(), max_defect, scale, worst, tolerance, pass: max_defect <= tolerance })
}

/// A path with a derivative, for areas in the Lebesgue–Stieltjes sense.
pub trait SmoothPath {
    fn dim(&self) -> usize;
    fn value(&self, i: usize, t: f64) -> f64;
    fn derivative(&self, i: usize, t: f64) -> f64;
    /// Points in `(s, t)` where the derivative may jump.
    fn kinks(&self, _s: f64, _t: f64) -> Vec<f64> {
        Vec::new()
    }
}

impl SmoothPath for XEps<'_> {
    fn dim(&self) -> usize {
        self.realization().dim()
    }

    fn value(&self, i: usize, t: f64) -> f64 {
        self.value_with_count(i, t, self.realization().count_until(i, t))
    }

    fn derivative(&self, i: usize, t: f64) -> f64 {
        self.derivative_with_count(i, t, self.realization().count_until(i, t))
    }

    fn kinks(&self, s: f64, t: f64) -> Vec<f64> {
        let pr = self.realization();
        let mut out: Vec<f64> =
            (0..pr.dim()).flat_map(|i| pr.switch_times(i).iter().copied().filter(|&x| x > s && x < t)).collect();
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Smooth path given by closures, mostly for tests and demos.
pub struct FnPath<F, G> {
    dim: usize,
    value: F,
    derivative: G,
}

impl<F: Fn(usize, f64) -> f64, G: Fn(usize, f64) -> f64> FnPath<F, G> {
    pub fn new(dim: usize, value: F, derivative: G) -> Self {
        Self { dim, value, derivative }
    }
}

impl<F: Fn(usize, f64) -> f64, G: Fn(usize, f64) -> f64> SmoothPath for FnPath<F, G> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, i: usize, t: f64) -> f64 {
        (self.value)(i, t)
    }

    fn derivative(&self, i: usize, t: f64) -> f64 {
        (self.derivative)(i, t)
    }
}

/// `x²_{st}(i,j) = ∫_s^t (x^j_u − x^j_s) ẋ^i_u du` by adaptive quadrature,
/// split at the path's kinks.
pub fn area_smooth_quadrature(path: &impl SmoothPath, s: f64, t: f64, tol: Tolerance) -> Result<Vec<f64>> {
    if s > t {
        return Err(Error::Domain(format!("need s <= t, got ({s}, {t})")));
    }
    let d = path.dim();
    if s == t {
        return Ok(vec![0.0; d * d]);
    }
    let mut breaks = vec![s];
    breaks.extend(path.kinks(s, t));
    breaks.push(t);
    let xs: Vec<f64> = (0..d).map(|j| path.value(j, s)).collect();
    let mut xv = vec![0.0; d];
    let mut dv = vec![0.0; d];
    let (v, _) = integrate_vec_pieces(
        |u, out: &mut [f64]| {
            for j in 0..d {
                xv[j] = path.value(j, u) - xs[j];
                dv[j] = path.derivative(j, u);
            }
            for i in 0..d {
                for j in 0..d {
                    out[i * d + j] = xv[j] * dv[i];
                }
            }
        },
        &breaks,
        d * d,
        tol,
    )?;
    Ok(v)
}

/// Field of quadrature areas on `grid`, accumulated cell by cell through
/// Chen's relation.
pub fn area_field_quadrature(path: &impl SmoothPath, grid: &Grid, tol: Tolerance) -> Result<AreaField> {
    let d = path.dim();
    let sp = SamplePath::from_fn(*grid, d, |t, i| path.value(i, t))?;
    let n = grid.len();
    let mut anchors = vec![0.0; n * d * d];
    for k in 0..n - 1 {
        let cell = area_smooth_quadrature(path, grid.node(k), grid.node(k + 1), tol)?;
        for i in 0..d {
            let dxi = sp.value(k + 1, i) - sp.value(k, i);
            for j in 0..d {
                let idx = i * d + j;
                let xj = sp.value(k, j) - sp.value(0, j);
                anchors[(k + 1) * d * d + idx] = anchors[k * d * d + idx] + cell[idx] + xj * dxi;
            }
        }
    }
    AreaField::new(sp, anchors, AreaMethod::Quadrature)
}

/// `X^{2,ε}_{st}` from the alternative three-term form
///
/// ```text
/// ∫_0^t (X^j_u − X^j_s)(t+ε−u)^{H−½} θ^i(u) du − ∫_0^s (X^j_u − X^j_s)(s+ε−u)^{H−½} θ^i(u) du
///   − α_H ∫_0^t θ^i(v) ∫_{s∨v}^t (X^j_u − X^j_v)(u+ε−v)^{H−3/2} du dv,   α_H = ½ − H,
/// ```
///
/// which never touches `Ẋ^ε`. Both levels use Gauss–Kronrod rules on panels
/// bounded by the sign changes of every component, so all integrands are
/// analytic on each panel; panels are halved until the Gauss/Kronrod gap of
/// the outer sums is below `rel_tol` of the largest entry.
pub fn area_closed_form(pr: &PoissonRealization, hurst: HurstParam, s: f64, t: f64, rel_tol: f64) -> Result<Vec<f64>> {
    if !(0.0 <= s && s <= t && t <= pr.horizon()) {
        return Err(Error::Domain(format!("need 0 <= s <= t <= T, got ({s}, {t})")));
    }
    let d = pr.dim();
    if s == t {
        return Ok(vec![0.0; d * d]);
    }
    let eps = pr.eps().get();
    let mut max_panel = 0.25 * eps;
    for _ in 0..6 {
        let (v, err) = closed_form_on_panels(pr, hurst, s, t, max_panel);
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        if err <= rel_tol * scale {
            return Ok(v);
        }
        max_panel *= 0.5;
    }
    Err(Error::Tolerance {
        what: "closed-form area",
        residual: closed_form_on_panels(pr, hurst, s, t, max_panel).1,
        tol: rel_tol,
    })
}

struct Panel {
    a: f64,
    b: f64,
    counts: Vec<usize>,
}

fn panels(pr: &PoissonRealization, lo: f64, hi: f64, extra: &[f64], max_len: f64) -> Vec<Panel> {
    let mut cuts: Vec<f64> = vec![lo, hi];
    cuts.extend(extra.iter().copied().filter(|&x| x > lo && x < hi));
    for i in 0..pr.dim() {
        cuts.extend(pr.switch_times(i).iter().copied().filter(|&x| x > lo && x < hi));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let pieces = ((w[1] - w[0]) / max_len).ceil().max(1.0) as usize;
        for p in 0..pieces {
            let a = w[0] + (w[1] - w[0]) * p as f64 / pieces as f64;
            let b = if p + 1 == pieces { w[1] } else { w[0] + (w[1] - w[0]) * (p + 1) as f64 / pieces as f64 };
            let counts = (0..pr.dim()).map(|i| pr.count_until(i, a)).collect();
            out.push(Panel { a, b, counts });
        }
    }
    out
}

fn closed_form_on_panels(pr: &PoissonRealization, hurst: HurstParam, s: f64, t: f64, max_len: f64) -> (Vec<f64>, f64) {
    let d = pr.dim();
    let eps = pr.eps().get();
    let h = hurst.get();
    let alpha = 0.5 - h;
    let x = XEps::new(pr, hurst);
    let ps = panels(pr, 0.0, t, &[s], max_len);
    let first_inner = ps.iter().position(|p| p.a >= s).unwrap_or(ps.len());

    // Outer and inner nodes share the panel set; X^j cached at every node.
    struct Node {
        v: f64,
        wk: f64,
        wg: f64,
        panel: usize,
    }
    let mut nodes = Vec::with_capacity(ps.len() * 15);
    for (pi, p) in ps.iter().enumerate() {
        for (v, wk, wg) in gk15_rule(p.a, p.b) {
            nodes.push(Node { v, wk, wg, panel: pi });
        }
    }
    let xval: Vec<Vec<f64>> =
        (0..d).map(|j| nodes.iter().map(|n| x.value_with_count(j, n.v, ps[n.panel].counts[j])).collect()).collect();
    let xs: Vec<f64> = (0..d).map(|j| x.value_with_count(j, s, pr.count_until(j, s))).collect();
    let first_inner_node = first_inner * 15;

    let mut k_sum = vec![0.0; d * d];
    let mut g_sum = vec![0.0; d * d];
    let mut inner = vec![0.0; d];
    for (q, node) in nodes.iter().enumerate() {
        let v = node.v;
        let p = &ps[node.panel];
        // G^j(v) = ∫_{s∨v}^t (X^j_u − X^j_v)(u+ε−v)^{H−3/2} du
        inner.iter_mut().for_each(|g| *g = 0.0);
        let start = if v < s {
            first_inner_node
        } else {
            // partial panel [v, b], then all later panels
            for (u, wk, _) in gk15_rule(v, p.b) {
                let ker = (u + eps - v).powf(h - 1.5);
                for (j, g) in inner.iter_mut().enumerate() {
                    *g += wk * (x.value_with_count(j, u, p.counts[j]) - xval[j][q]) * ker;
                }
            }
            (node.panel + 1) * 15
        };
        for (r, other) in nodes.iter().enumerate().skip(start) {
            let ker = (other.v + eps - v).powf(h - 1.5);
            for (j, g) in inner.iter_mut().enumerate() {
                *g += other.wk * (xval[j][r] - xval[j][q]) * ker;
            }
        }
        let mut boundary = (t + eps - v).powf(h - 0.5);
        if v < s {
            boundary -= (s + eps - v).powf(h - 0.5);
        }
        for i in 0..d {
            let theta = if p.counts[i] % 2 == 0 { 1.0 } else { -1.0 } / eps;
            for j in 0..d {
                let f = theta * ((xval[j][q] - xs[j]) * boundary - alpha * inner[j]);
                k_sum[i * d + j] += node.wk * f;
                g_sum[i * d + j] += node.wg * f;
            }
        }
    }
    let err = k_sum.iter().zip(&g_sum).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    (k_sum, err)
}

/// Product-integration weights for `∫ (B_u − B_v)(u − v)^{H−3/2} du` with
/// `B` linear on each cell: cell `n` after `v` contributes
/// `a_n B_{left} + b_n B_{right} − (a_n + b_n) B_v`.
fn singular_weights(grid: &Grid, hurst: HurstParam) -> (Vec<f64>, Vec<f64>) {
    let h = grid.step();
    let p = hurst.get() - 1.5;
    let n = grid.cells();
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    // First cell: only the slope term survives, ∫_0^h x^{p+1}/h dx.
    b[0] = h.powf(p + 1.0) / (p + 2.0);
    for m in 2..=n {
        let lo = (m - 1) as f64 * h;
        let hi = m as f64 * h;
        a[m - 1] = gk15(|x| x.powf(p) * (hi - x) / h, lo, hi).0;
        b[m - 1] = gk15(|x| x.powf(p) * (x - lo) / h, lo, hi).0;
    }
    (a, b)
}

/// Discrete fractional Lévy area built from the same Wiener increments as a
/// Volterra fBm path. Off-diagonal entries use adapted left-point sums of
///
/// ```text
/// B²_{st}(i,j) = ∫_s^t (B^j_u − B^j_s)(t−u)^{H−½} dW^i_u
///   + ∫_0^s (B^j_u − B^j_s)[(t−u)^{H−½} − (s−u)^{H−½}] dW^i_u
///   − α_H ∫_0^t dW^i_v ∫_{v∨s}^t (B^j_u − B^j_v)(u−v)^{H−3/2} du,
/// ```
///
/// the kernels being cell-averaged as in the Volterra path and the inner
/// integral taken against `B` interpolated linearly. The diagonal is
/// `½(δB^i)²`. The discrete sums satisfy Chen's relation exactly, so anchors
/// at zero determine every pair.
pub struct FbmArea {
    grid: Grid,
    hurst: HurstParam,
    kbar: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    kbar_conv: CausalConvolver,
    a_conv: CausalConvolver,
    b_conv: CausalConvolver,
    ab_conv: CausalConvolver,
}

impl FbmArea {
    pub fn new(grid: &Grid, hurst: HurstParam) -> Self {
        let kbar = volterra_weights(grid, hurst);
        let (a, b) = singular_weights(grid, hurst);
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        Self {
            grid: *grid,
            hurst,
            kbar_conv: CausalConvolver::new(&kbar),
            a_conv: CausalConvolver::new(&a),
            b_conv: CausalConvolver::new(&b),
            ab_conv: CausalConvolver::new(&ab),
            kbar,
            a,
            b,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn check(&self, w: &WienerGrid, path: &SamplePath) -> Result<()> {
        if w.grid() != &self.grid || path.grid() != &self.grid || path.dim() != w.dim() {
            return Err(Error::Data("Wiener grid, fBm path and area builder disagree".into()));
        }
        Ok(())
    }

    /// The fBm path `B` and its anchored area field.
    pub fn field(&self, w: &WienerGrid) -> Result<AreaField> {
        let kbar = &self.kbar_conv;
        let d = w.dim();
        let comps: Vec<Vec<f64>> = (0..d).map(|i| kbar.apply(w.increments(i))).collect();
        let path = SamplePath::from_components(self.grid, &comps)?;
        self.field_for(w, path)
    }

    /// Anchored field for a path already built from `w`.
    pub fn field_for(&self, w: &WienerGrid, path: SamplePath) -> Result<AreaField> {
        self.check(w, &path)?;
        let d = w.dim();
        let n = self.grid.len();
        let cells = self.grid.cells();
        let alpha = 0.5 - self.hurst.get();
        let comps: Vec<Vec<f64>> = (0..d).map(|j| path.component(j)).collect();
        let mut anchors = vec![0.0; n * d * d];
        for i in 0..d {
            let dw = w.increments(i);
            let (aw, bw) = (self.a_conv.apply(dw), self.b_conv.apply(dw));
            for j in 0..d {
                if i == j {
                    for k in 0..n {
                        anchors[k * d * d + i * d + i] = 0.5 * comps[i][k] * comps[i][k];
                    }
                    continue;
                }
                let bj = &comps[j];
                let prod: Vec<f64> = (0..cells).map(|m| bj[m] * dw[m]).collect();
                let (first, ab) = (self.kbar_conv.apply(&prod), self.ab_conv.apply(&prod));
                let mut third = 0.0;
                for k in 1..n {
                    third += bj[k - 1] * aw[k] + bj[k] * bw[k] - ab[k];
                    anchors[k * d * d + i * d + j] = first[k] - alpha * third;
                }
            }
        }
        AreaField::new(path, anchors, AreaMethod::WienerSums)
    }

    /// Direct evaluation of `B²_{st}` for node indices `s <= t`, O(N²);
    /// used to cross-check the anchored construction.
    pub fn area_direct(&self, w: &WienerGrid, path: &SamplePath, s: usize, t: usize) -> Result<Vec<f64>> {
        self.check(w, path)?;
        if s > t || t >= self.grid.len() {
            return Err(Error::Ordering { s, u: s, t });
        }
        let d = w.dim();
        let alpha = 0.5 - self.hurst.get();
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            let dw = w.increments(i);
            for j in 0..d {
                if i == j {
                    let db = path.value(t, i) - path.value(s, i);
                    out[i * d + i] = 0.5 * db * db;
                    continue;
                }
                let bj = path.component(j);
                let mut first = 0.0;
                for m in 0..t {
                    let k = if m < s { self.kbar[t - m - 1] - self.kbar[s - m - 1] } else { self.kbar[t - m - 1] };
                    first += (bj[m] - bj[s]) * k * dw[m];
                }
                let mut third = 0.0;
                for m in 0..t {
                    let mut inner = 0.0;
                    for l in (m + 1).max(s + 1)..=t {
                        let n = l - m - 1;
                        inner += bj[l - 1] * self.a[n] + bj[l] * self.b[n] - bj[m] * (self.a[n] + self.b[n]);
                    }
                    third += dw[m] * inner;
                }
                out[i * d + j] = first - alpha * third;
            }
        }
        Ok(out)
    }
}

/// `B²_{st}` for node indices `s <= t` of the Wiener grid.
pub fn area_fbm_wiener_sums(w: &WienerGrid, b: &SamplePath, hurst: HurstParam, s: usize, t: usize) -> Result<Vec<f64>> {
    let fa = FbmArea::new(w.grid(), hurst);
    let field = fa.field_for(w, b.clone())?;
    chen_reconstruct(&field, s, t)
}
