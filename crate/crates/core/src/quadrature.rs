//! Adaptive Gauss–Kronrod (7/15) quadrature and the integrand abstraction used
//! for stochastic integrals against the telegraph signal.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// The 15 Kronrod abscissae mapped onto `[a, b]`, with Kronrod and Gauss
/// weights (Gauss weight zero on Kronrod-only nodes).
pub fn gk15_rule(a: f64, b: f64) -> [(f64, f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0, 0.0); 15];
    for k in 0..7 {
        let wg = if k % 2 == 1 { WG[k / 2] * h } else { 0.0 };
        out[2 * k] = (c - h * XGK[k], WGK[k] * h, wg);
        out[2 * k + 1] = (c + h * XGK[k], WGK[k] * h, wg);
    }
    out[14] = (c, WGK[7] * h, WG[3] * h);
    out
}

/// Single 15-point Kronrod estimate with the |K15 − G7| error estimate.
pub fn gk15<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> (f64, f64) {
    let mut k = 0.0;
    let mut g = 0.0;
    for (x, wk, wg) in gk15_rule(a, b) {
        let v = f(x);
        k += wk * v;
        g += wg * v;
    }
    (k, (k - g).abs())
}

/// Stopping rule of the adaptive integrators: converged once the summed error
/// estimate is below `max(abs, rel * |I|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel, max_subdivisions: 2000 }
    }

    pub fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-13, 1e-10)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integration of `f` over `[a, b]`: the segment with the
/// largest error estimate is bisected until the summed estimate meets `tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Quad> {
    if a == b {
        return Ok(Quad { value: 0.0, error: 0.0 });
    }
    let (value, error) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut splits = 0;
    while total_err > tol.target(total) {
        if splits >= tol.max_subdivisions {
            return Err(Error::Tolerance { what: "adaptive quadrature", residual: total_err, tol: tol.target(total) });
        }
        let seg = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Segment cannot be split further in floating point.
            return Err(Error::Tolerance { what: "adaptive quadrature", residual: total_err, tol: tol.target(total) });
        }
        let (v1, e1) = gk15(&mut f, seg.a, mid);
        let (v2, e2) = gk15(&mut f, mid, seg.b);
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        splits += 1;
        // Re-sum periodically to stop drift in the running totals.
        if splits % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Ok(Quad { value, error })
}

/// Integrates `f` over consecutive breakpoints, adaptively on each piece.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: Tolerance) -> Result<Quad> {
    let mut out = Quad { value: 0.0, error: 0.0 };
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    let piece_tol = Tolerance { abs: tol.abs / pieces, ..tol };
    for w in breaks.windows(2) {
        let q = integrate(&mut f, w[0], w[1], piece_tol)?;
        out.value += q.value;
        out.error += q.error;
    }
    Ok(out)
}

/// Vector-valued version of [`integrate`]; the error of a segment is the max
/// over components.
pub fn integrate_vec<F: FnMut(f64, &mut [f64])>(
    f: F,
    a: f64,
    b: f64,
    dim: usize,
    tol: Tolerance,
) -> Result<(Vec<f64>, f64)> {
    integrate_vec_pieces(f, &[a, b], dim, tol)
}

/// [`integrate_vec`] over consecutive breakpoints, refining globally: the
/// segment with the largest error anywhere is bisected next.
pub fn integrate_vec_pieces<F: FnMut(f64, &mut [f64])>(
    mut f: F,
    breaks: &[f64],
    dim: usize,
    tol: Tolerance,
) -> Result<(Vec<f64>, f64)> {
    let mut buf = vec![0.0; dim];
    let mut rule = |f: &mut F, lo: f64, hi: f64| -> (Vec<f64>, f64) {
        let mut k = vec![0.0; dim];
        let mut g = vec![0.0; dim];
        for (x, wk, wg) in gk15_rule(lo, hi) {
            f(x, &mut buf);
            for c in 0..dim {
                k[c] += wk * buf[c];
                g[c] += wg * buf[c];
            }
        }
        let err = k.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        (k, err)
    };
    let mut segs: Vec<_> =
        breaks.windows(2).filter(|w| w[0] < w[1]).map(|w| (w[0], w[1], rule(&mut f, w[0], w[1]))).collect();
    if segs.is_empty() {
        return Ok((vec![0.0; dim], 0.0));
    }
    let budget = segs.len() + tol.max_subdivisions;
    let scale = |segs: &[(f64, f64, (Vec<f64>, f64))]| -> (f64, f64) {
        let mut err = 0.0;
        let mut mag = 0.0f64;
        let mut sum = vec![0.0; dim];
        for s in segs {
            err += s.2 .1;
            for c in 0..dim {
                sum[c] += s.2 .0[c];
            }
        }
        for v in sum {
            mag = mag.max(v.abs());
        }
        (err, mag)
    };
    loop {
        let (err, mag) = scale(&segs);
        if err <= tol.target(mag) {
            let mut sum = vec![0.0; dim];
            for s in &segs {
                for c in 0..dim {
                    sum[c] += s.2 .0[c];
                }
            }
            return Ok((sum, err));
        }
        if segs.len() > budget {
            return Err(Error::Tolerance { what: "vector quadrature", residual: err, tol: tol.target(mag) });
        }
        let worst =
            segs.iter().enumerate().max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1)).map(|(i, _)| i).expect("non-empty");
        let (lo, hi, _) = segs.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let left = rule(&mut f, lo, mid);
        let right = rule(&mut f, mid, hi);
        segs.push((lo, mid, left));
        segs.push((mid, hi, right));
    }
}

/// A real function of one variable, optionally with a closed-form integral.
///
/// Integrals against the telegraph signal split `[0, T]` into many short
/// pieces; functions that know their antiderivative skip quadrature there.
pub trait ScalarFn: Sync {
    fn value(&self, x: f64) -> f64;

    /// Exact `∫_a^b f`, when available.
    fn integral(&self, _a: f64, _b: f64) -> Option<f64> {
        None
    }
}

impl<F: Fn(f64) -> f64 + Sync> ScalarFn for F {
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

/// `coef * x^exponent` on `x >= 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Power {
    pub coef: f64,
    pub exponent: f64,
}

impl Power {
    pub fn new(coef: f64, exponent: f64) -> Self {
        Self { coef, exponent }
    }

    pub fn constant(c: f64) -> Self {
        Self { coef: c, exponent: 0.0 }
    }

    /// `‖f‖²_{L²[0,T]}`.
    pub fn l2_norm_sq(&self, horizon: f64) -> f64 {
        let e = 2.0 * self.exponent + 1.0;
        self.coef * self.coef * horizon.powf(e) / e
    }
}

impl ScalarFn for Power {
    fn value(&self, x: f64) -> f64 {
        if self.exponent == 0.0 {
            self.coef
        } else {
            self.coef * x.powf(self.exponent)
        }
    }

    fn integral(&self, a: f64, b: f64) -> Option<f64> {
        if self.exponent == 0.0 {
            return Some(self.coef * (b - a));
        }
        let e = self.exponent + 1.0;
        Some(self.coef * (b.powf(e) - a.powf(e)) / e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let (v, _) = gk15(|x| x.powi(20), -1.0, 1.0);
        assert!((v - 2.0 / 21.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let q = integrate(|x: f64| x.powf(-0.3), 0.0, 1.0, Tolerance::new(1e-12, 1e-11)).unwrap();
        assert!((q.value - 1.0 / 0.7).abs() < 1e-9, "{}", q.value);
    }

    #[test]
    fn reports_nonconvergence() {
        let tol = Tolerance { abs: 0.0, rel: 1e-15, max_subdivisions: 3 };
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, tol).unwrap_err();
        assert!(matches!(err, Error::Tolerance { .. }));
    }

    #[test]
    fn vector_matches_scalar() {
        let (v, _) = integrate_vec(
            |x, out| {
                out[0] = x.exp();
                out[1] = x.sqrt();
            },
            0.0,
            2.0,
            2,
            Tolerance::new(1e-13, 1e-12),
        )
        .unwrap();
        assert!((v[0] - (2f64.exp() - 1.0)).abs() < 1e-11);
        assert!((v[1] - 2f64.powf(1.5) / 1.5).abs() < 1e-10);
    }

    #[test]
    fn power_integral() {
        let f = Power::new(2.0, 0.3);
        let exact = f.integral(0.2, 0.9).unwrap();
        let q = integrate(|x| f.value(x), 0.2, 0.9, Tolerance::default()).unwrap();
        assert!((exact - q.value).abs() < 1e-12);
        assert!((Power::new(1.0, 1.0).l2_norm_sq(1.0) - 1.0 / 3.0).abs() < 1e-15);
    }
}
