//! Causal convolution on a uniform grid, `y_k = Σ_{m<k} c_{k−m} x_m`, the
//! shape shared by Volterra kernels and the discretized area integrals.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Convolution with a fixed kernel `c_1..c_n`, spectrum cached for reuse.
pub struct CausalConvolver {
    n: usize,
    size: usize,
    spectrum: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl CausalConvolver {
    /// `kernel[k]` is `c_{k+1}`; inputs to [`apply`](Self::apply) have length
    /// `kernel.len()`.
    pub fn new(kernel: &[f64]) -> Self {
        let n = kernel.len();
        let size = (2 * n + 2).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut spectrum = vec![Complex64::new(0.0, 0.0); size];
        for (k, &c) in kernel.iter().enumerate() {
            spectrum[k + 1] = Complex64::new(c, 0.0);
        }
        forward.process(&mut spectrum);
        Self { n, size, spectrum, forward, inverse }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Returns `y_0..=y_n` (so `y_0 = 0`) for `x_0..x_{n−1}`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "input length must match the kernel");
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for (b, &v) in buf.iter_mut().zip(x) {
            b.re = v;
        }
        self.forward.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        let mut y: Vec<f64> = buf[..=self.n].iter().map(|c| c.re * scale).collect();
        y[0] = 0.0;
        y
    }

    /// Two real inputs packed into one complex transform.
    pub fn apply_pair(&self, x1: &[f64], x2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(x1.len(), self.n);
        assert_eq!(x2.len(), self.n);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for k in 0..self.n {
            buf[k] = Complex64::new(x1[k], x2[k]);
        }
        self.forward.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        let mut y1: Vec<f64> = buf[..=self.n].iter().map(|c| c.re * scale).collect();
        let mut y2: Vec<f64> = buf[..=self.n].iter().map(|c| c.im * scale).collect();
        y1[0] = 0.0;
        y2[0] = 0.0;
        (y1, y2)
    }
}

/// Direct O(n²) evaluation, used for checking and for tiny grids.
pub fn causal_convolve_direct(kernel: &[f64], x: &[f64]) -> Vec<f64> {
    let n = kernel.len();
    let mut y = vec![0.0; n + 1];
    for k in 1..=n {
        let mut acc = 0.0;
        for m in 0..k {
            acc += kernel[k - m - 1] * x[m];
        }
        y[k] = acc;
    }
    y
}
