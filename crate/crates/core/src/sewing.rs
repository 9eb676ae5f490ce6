//! Sewing: turning an almost-additive germ `g_{st}` into the increment of a
//! genuine integral by compensated Riemann sums over dyadic partitions.
//!
//! If `δg` is μ-regular with μ > 1, the dyadic sums
//! `S_n = Σ_k g_{t_k t_{k+1}}` converge and successive differences shrink by
//! the factor `2^{1−μ}` per level. The geometric tail of that sequence is
//! summed in closed form when the observed ratio is stable, which is what
//! lets slowly converging germs reach tight tolerances in a few levels.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SewOptions {
    /// Stop once the change between levels is below this (max-norm).
    pub tol: f64,
    pub max_levels: u32,
    /// Sum the geometric tail of the level differences.
    pub extrapolate: bool,
}

impl Default for SewOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_levels: 22, extrapolate: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SewResult {
    pub value: Vec<f64>,
    /// Last inter-level change of the returned estimate.
    pub error: f64,
    pub levels: u32,
    pub converged: bool,
    /// Raw dyadic sums `S_0, S_1, …` (first component).
    pub sums: Vec<f64>,
    /// Observed ratios `|S_{n+1} − S_n| / |S_n − S_{n−1}|` (max-norm).
    pub ratios: Vec<f64>,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dyadic_sum(germ: &impl Fn(f64, f64, &mut [f64]), s: f64, t: f64, level: u32, dim: usize) -> Vec<f64> {
    let n = 1usize << level;
    let h = (t - s) / n as f64;
    let mut acc = vec![0.0; dim];
    let mut buf = vec![0.0; dim];
    for k in 0..n {
        let a = s + k as f64 * h;
        let b = if k + 1 == n { t } else { s + (k + 1) as f64 * h };
        germ(a, b, &mut buf);
        for (x, y) in acc.iter_mut().zip(&buf) {
            *x += y;
        }
    }
    acc
}

/// Limit estimate of a sequence whose tail is a sum of geometric terms, by
/// Wynn's ε-algorithm on the most recent terms (exact for up to three
/// geometric components).
fn wynn_limit(seq: &[f64]) -> f64 {
    let tail = &seq[seq.len().saturating_sub(7)..];
    let mut prev = vec![0.0; tail.len() + 1];
    let mut cur = tail.to_vec();
    let mut best = *tail.last().expect("sequence is non-empty");
    let mut column = 0;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for k in 0..cur.len() - 1 {
            let diff = cur[k + 1] - cur[k];
            if diff == 0.0 {
                return if column % 2 == 0 { cur[k + 1] } else { best };
            }
            next.push(prev[k + 1] + 1.0 / diff);
        }
        column += 1;
        if column % 2 == 0 {
            let v = *next.last().expect("non-empty");
            if !v.is_finite() {
                break;
            }
            best = v;
        }
        prev = cur;
        cur = next;
    }
    best
}

/// Sews a `dim`-vector valued germ over `[s, t]`.
pub fn sew_vec(germ: impl Fn(f64, f64, &mut [f64]), dim: usize, s: f64, t: f64, opts: SewOptions) -> Result<SewResult> {
    if !(s <= t) {
        return Err(Error::Domain(format!("need s <= t, got ({s}, {t})")));
    }
    let mut sums = vec![dyadic_sum(&germ, s, t, 0, dim)];
    let mut diffs: Vec<Vec<f64>> = Vec::new();
    let mut ratios = Vec::new();
    let mut estimates: Vec<Vec<f64>> = vec![sums[0].clone()];
    let mut above_one = 0;
    let mut error = f64::INFINITY;
    for level in 1..=opts.max_levels {
        let next = dyadic_sum(&germ, s, t, level, dim);
        let d: Vec<f64> = next.iter().zip(sums.last().expect("non-empty")).map(|(a, b)| a - b).collect();
        let dn = max_abs(&d);
        // Differences at rounding level carry no rate information.
        let noise = 64.0 * f64::EPSILON * max_abs(&next).max(1e-300) * (1u64 << level.min(52)) as f64;
        if let Some(prev) = diffs.last() {
            let dp = max_abs(prev);
            if dp > 0.0 && dn > noise {
                let r = dn / dp;
                ratios.push(r);
                above_one = if r >= 1.0 { above_one + 1 } else { 0 };
                if above_one >= 3 {
                    return Err(Error::Regularity { ratio: r });
                }
            }
        }
        sums.push(next);
        let estimate = if opts.extrapolate && ratios.len() >= 2 && dn > noise {
            (0..dim).map(|c| wynn_limit(&sums.iter().map(|v| v[c]).collect::<Vec<_>>())).collect()
        } else {
            sums.last().expect("non-empty").clone()
        };
        let change = if opts.extrapolate && ratios.len() >= 2 {
            max_abs(&estimate.iter().zip(estimates.last().expect("non-empty")).map(|(a, b)| a - b).collect::<Vec<_>>())
        } else {
            dn
        };
        diffs.push(d);
        estimates.push(estimate);
        error = change;
        if change < opts.tol || dn <= noise {
            return Ok(SewResult {
                value: estimates.pop().expect("non-empty"),
                error: change,
                levels: level,
                converged: true,
                sums: sums.iter().map(|v| v[0]).collect(),
                ratios,
            });
        }
    }
    Ok(SewResult {
        value: estimates.pop().expect("non-empty"),
        error,
        levels: opts.max_levels,
        converged: false,
        sums: sums.iter().map(|v| v[0]).collect(),
        ratios,
    })
}

/// Scalar [`sew_vec`]; returns the result with a one-element value.
pub fn sew(germ: impl Fn(f64, f64) -> f64, s: f64, t: f64, opts: SewOptions) -> Result<SewResult> {
    sew_vec(|a, b, out: &mut [f64]| out[0] = germ(a, b), 1, s, t, opts)
}

/// `1/(2^μ − 2)`, the constant in `‖Λh‖_μ ≤ ‖h‖_μ/(2^μ − 2)`.
pub fn lambda_error_budget(mu: f64) -> Result<f64> {
    if !(mu > 1.0 + 1e-6) {
        return Err(Error::Domain(format!("the sewing constant needs μ > 1 (μ = {mu})")));
    }
    Ok(1.0 / (2f64.powf(mu) - 2.0))
}

/// Largest `|δg_{sut}| / (t − s)^μ` over dyadic midpoint triples of
/// `[s, t]` down to `levels` levels. A computable proxy for `‖δg‖_μ`; it
/// only sees finitely many triples, so it can underestimate the norm.
pub fn germ_defect_norm(germ: impl Fn(f64, f64) -> f64, s: f64, t: f64, mu: f64, levels: u32) -> f64 {
    let mut sup: f64 = 0.0;
    for level in 0..levels {
        let n = 1usize << level;
        let h = (t - s) / n as f64;
        for k in 0..n {
            let a = s + k as f64 * h;
            let b = a + h;
            let m = a + 0.5 * h;
            let dg = germ(a, b) - germ(a, m) - germ(m, b);
            sup = sup.max(dg.abs() / h.powf(mu));
        }
    }
    sup
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn additive_germ_stops_immediately() {
        let r = sew(|s: f64, t: f64| t.exp() - s.exp(), 0.0, 1.0, SewOptions::default()).unwrap();
        assert_eq!(r.levels, 1);
        assert!((r.value[0] - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn young_germ_gives_half() {
        let r = sew(|s, t| s * (t - s), 0.0, 1.0, SewOptions { tol: 1e-12, ..Default::default() }).unwrap();
        assert!(r.converged);
        assert!((r.value[0] - 0.5).abs() < 1e-10, "{}", r.value[0]);
    }

    #[test]
    fn raw_sums_converge_at_the_predicted_rate() {
        let opts = SewOptions { tol: 1e-30, max_levels: 12, extrapolate: false };
        for mu in [1.5, 2.0] {
            let r = sew(|s: f64, t: f64| t.sin() - s.sin() + (t - s).powf(mu), 0.0, 1.0, opts).unwrap();
            let want = 2f64.powf(1.0 - mu);
            let last = *r.ratios.last().unwrap();
            assert!((last / want - 1.0).abs() < 0.1, "μ = {mu}: {last} vs {want}");
        }
        let r = sew(|s: f64, t: f64| s.cos() * (t.sin() - s.sin()), 0.0, 1.0, opts).unwrap();
        assert!((r.ratios.last().unwrap() / 0.5 - 1.0).abs() < 0.1);
    }

    #[test]
    fn controlled_germ_matches_closed_form() {
        // dy = y dx, x = sin, y_0 = 1: ∫_0^t y dx = e^{sin t} − 1.
        let y = |u: f64| u.sin().exp();
        let germ = |s: f64, t: f64| {
            let dx = t.sin() - s.sin();
            y(s) * dx + y(s) * 0.5 * dx * dx
        };
        let r = sew(germ, 0.0, 1.3, SewOptions { tol: 1e-12, ..Default::default() }).unwrap();
        let want = 1.3f64.sin().exp() - 1.0;
        assert!((r.value[0] - want).abs() < 1e-8, "{} vs {want}", r.value[0]);
    }

    #[test]
    fn irregular_germ_is_rejected() {
        // (t − s)^{1/2}: δg has negative regularity, differences grow.
        let r = sew(|s: f64, t: f64| (t - s).sqrt(), 0.0, 1.0, SewOptions::default());
        assert!(matches!(r, Err(Error::Regularity { .. })), "{r:?}");
    }

    #[test]
    fn budget_examples() {
        assert!((lambda_error_budget(2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((lambda_error_budget(1.2).unwrap() - 1.0 / (2f64.powf(1.2) - 2.0)).abs() < 1e-15);
        assert!(lambda_error_budget(1.0 + 1e-7).is_err());
        assert!(lambda_error_budget(0.5).is_err());
        assert!(lambda_error_budget(1.0 + 1e-5).unwrap() > 1e4);
    }

    #[test]
    fn defect_norm_of_a_power_germ() {
        // (t−s)² − (u−s)² − (t−u)² = 2(u−s)(t−u), ½ at the midpoint
        let v = germ_defect_norm(|s: f64, t: f64| (t - s).powi(2), 0.0, 1.0, 2.0, 8);
        assert!((v - 0.5).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn sewing_is_additive(u in 0.05f64..0.95, c in -2.0f64..2.0) {
            let germ = move |s: f64, t: f64| (c * s).cos() * (t.sin() - s.sin()) + (t - s).powf(1.7);
            let opts = SewOptions { tol: 1e-11, ..Default::default() };
            let whole = sew(germ, 0.0, 1.0, opts).unwrap().value[0];
            let parts = sew(germ, 0.0, u, opts).unwrap().value[0] + sew(germ, u, 1.0, opts).unwrap().value[0];
            prop_assert!((whole - parts).abs() < 1e-9, "{} vs {}", whole, parts);
        }
    }
}
