//! Acceptance suite: one line per criterion with its measured quantities,
//! runtime and verdict. Set `ACCEPTANCE_STRICT=1` to exit non-zero on any FAIL.

use std::time::{Duration, Instant};

use rough_kac::experiment::{diffusion_study, run, Experiment, ExperimentConfig, Report};

const SEED: u64 = 20_240_611;

fn report(exp: Experiment, edit: impl FnOnce(&mut ExperimentConfig)) -> Report {
    let mut cfg = ExperimentConfig { seed: Some(SEED), ..Default::default() };
    edit(&mut cfg);
    let p = cfg.resolve(exp).expect("valid parameters");
    run(exp, &p).unwrap_or_else(|e| panic!("{exp}: {e}"))
}

fn est(r: &Report, key: &str) -> f64 {
    *r.estimates.get(key).unwrap_or_else(|| panic!("{}: missing estimate {key}", r.experiment))
}

fn se(r: &Report, key: &str) -> f64 {
    *r.stderrs.get(key).unwrap_or_else(|| panic!("{}: missing stderr {key}", r.experiment))
}

fn failed_checks(r: &Report) -> String {
    let bad: Vec<&str> = r.checks.iter().filter(|(_, ok)| !**ok).map(|(k, _)| k.as_str()).collect();
    if bad.is_empty() {
        String::new()
    } else {
        format!("; failed checks: {}", bad.join(", "))
    }
}

fn exact_algebra() -> (bool, String) {
    let r = report(Experiment::ChenCheck, |_| {});
    let dd = est(&r, "delta_delta_max");
    let anchored = est(&r, "chen_defect_fbm-anchored").max(est(&r, "chen_defect_piecewise-linear-anchored"));
    let quad = est(&r, "chen_defect_quadrature_smooth").max(est(&r, "chen_defect_quadrature_xeps"));
    let ok = r.pass && dd < 1e-13 && anchored < 1e-13;
    (ok, format!("1000 triples: max |δδ| = {dd:.2e}, anchored Chen defect = {anchored:.2e}, quadrature Chen defect = {quad:.2e}{}", failed_checks(&r)))
}

fn levy_identity() -> (bool, String) {
    let r = report(Experiment::LevyAreaIdentity, |c| {
        c.eps = Some(vec![0.1]);
        c.replicates = Some(100);
        c.tol = Some(1e-6);
    });
    let gap = est(&r, "max_relative_gap_eps0.1");
    (
        r.pass && gap < 1e-6,
        format!(
            "100 seeds, d = 2, H = 0.4, ε = 0.1: max |closed form − quadrature|/scale = {gap:.2e}{}",
            failed_checks(&r)
        ),
    )
}

fn fbm_variance() -> (bool, String) {
    let r = report(Experiment::FbmVariance, |c| c.replicates = Some(10_000));
    let (v, s) = (est(&r, "variance_terminal"), se(&r, "variance_terminal"));
    let exact = 1.0 / (2.0 * 0.4);
    let ok = (v - exact).abs() <= 3.0 * s;
    (ok, format!("Var(B₁) = {v:.5} ± {s:.5} vs 1/(2H) = {exact}, |gap|/SE = {:.2}", (v - exact).abs() / s))
}

fn scaling() -> (bool, String) {
    let r = report(Experiment::MomentSlope, |c| c.replicates = Some(10_000));
    let (a, b) = (est(&r, "increment_slope"), est(&r, "area_slope"));
    let ok = (a - 0.8).abs() <= 0.05 && (b - 1.6).abs() <= 0.1;
    (ok, format!("slope E|δB|² = {a:.4} (target 0.8 ± 0.05; exact-law slope {:.4}), slope E|B²(1,2)|² = {b:.4} (target 1.6 ± 0.1)", est(&r, "increment_slope_exact")))
}

fn moment_bounds() -> (bool, String) {
    let r = report(Experiment::KsMoments, |c| {
        c.eps = Some(vec![0.2, 0.1]);
        c.exponents = Some(vec![0.0, 1.0, 0.3]);
        c.replicates = Some(100_000);
    });
    // largest (moment − bound)/SE over all cases
    let worst = r
        .estimates
        .iter()
        .map(|(k, m)| {
            let lhs = if k.starts_with("moment1") || k.starts_with("moment3") { m.abs() } else { *m };
            (lhs - r.bound[k]) / r.stderrs[k]
        })
        .fold(f64::NEG_INFINITY, f64::max);
    (r.pass, format!("{} cases, M = 10⁵: max (moment − bound)/SE = {worst:.2}{}", r.checks.len(), failed_checks(&r)))
}

fn cf_bound() -> (bool, String) {
    let r = report(Experiment::CfBound, |c| {
        c.eps = Some(vec![0.2, 0.1, 0.05]);
        c.replicates = Some(100_000);
    });
    let d: Vec<f64> = ["0.2", "0.1", "0.05"].iter().map(|e| est(&r, &format!("max_distance_eps{e}"))).collect();
    let ok = r.pass && d[1] < d[0] && d[2] < d[1];
    (
        ok,
        format!(
            "u ∈ [−2, 2], M = 10⁵: max distance {:.4} > {:.4} > {:.4} (ε = 0.2, 0.1, 0.05), all under bound + 3·SE{}",
            d[0],
            d[1],
            d[2],
            failed_checks(&r)
        ),
    )
}

fn sewing() -> (bool, String) {
    let r = report(Experiment::SewingDemo, |_| {});
    let v = est(&r, "value_left-riemann");
    let ok = r.pass && (v - 0.5).abs() <= 1e-10;
    let rr = est(&r, "final_ratio_power-perturbed");
    (
        ok,
        format!(
            "∫₀¹ t dt = {v} (|error| {:.1e}); final ratio {:.4} vs 2^(-1/2) = {:.4}{}",
            (v - 0.5).abs(),
            rr,
            2f64.powf(-0.5),
            failed_checks(&r)
        ),
    )
}

fn rough_solver() -> (bool, String) {
    let r = report(Experiment::RoughSolve, |c| c.cells = Some(4096));
    let (order, err, gap) =
        (est(&r, "convergence_order"), est(&r, "terminal_error_finest"), est(&r, "drift_only_gap_to_euler"));
    let ok = order >= 1.0 && err < 1e-4 && gap == 0.0;
    (ok, format!("order {order:.3}, |y(1) − a·e^(δx)| = {err:.2e} at 2¹² steps, drift-only gap to Euler = {gap:e}"))
}

fn diffusion() -> (bool, String) {
    let mut cfg = ExperimentConfig { seed: Some(SEED), ..Default::default() };
    cfg.eps = Some(vec![0.2, 0.1, 0.05]);
    cfg.gamma = Some(0.35);
    let p = cfg.resolve(Experiment::FddConverge).expect("valid parameters");
    let r = diffusion_study(&p).expect("diffusion study");
    let dx: Vec<String> = ["0.2", "0.1", "0.05"]
        .iter()
        .map(|e| format!("{:.4}", est(&r, &format!("driver_fdd_distance_eps{e}"))))
        .collect();
    let dy: Vec<String> = ["0.2", "0.1", "0.05"]
        .iter()
        .map(|e| format!("{:.4}", est(&r, &format!("solution_fdd_distance_eps{e}"))))
        .collect();
    let z: Vec<String> =
        r.estimates.iter().filter(|(k, _)| k.starts_with("tail_trend_z")).map(|(_, v)| format!("{v:.2}")).collect();
    (
        r.pass,
        format!(
            "M = {}: driver fdd {} ; solution fdd {} ; tail trend z = [{}] (1% one-sided critical 2.33){}",
            p.replicates,
            dx.join(" > "),
            dy.join(" > "),
            z.join(", "),
            failed_checks(&r)
        ),
    )
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> (bool, String)); 9] = [
        (1, "exact algebra", 10, exact_algebra),
        (2, "Lévy-area identity", 120, levy_identity),
        (3, "fBm variance", 60, fbm_variance),
        (4, "scaling exponents", 300, scaling),
        (5, "telegraph moment bounds", 300, moment_bounds),
        (6, "characteristic-function bound", 600, cf_bound),
        (7, "sewing", 10, sewing),
        (8, "rough solver", 60, rough_solver),
        (9, "diffusion-approximation trend", 1800, diffusion),
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut passed = 0;
    let mut ran = 0;
    for (n, name, limit, f) in criteria {
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let t = Instant::now();
        let (ok, detail) = f();
        let took = t.elapsed();
        let in_time = took < Duration::from_secs(limit);
        let pass = ok && in_time;
        ran += 1;
        passed += usize::from(pass);
        println!(
            "criterion {n} [{name}]: {} | {detail} | runtime {:.1} s (limit {limit} s){}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            if in_time { "" } else { ", over limit" }
        );
    }
    println!("acceptance: {passed}/{ran} criteria pass");
    // verdicts above are the record; a non-zero exit is opt-in so that a
    // documented failure does not mask the rest of the workspace tests
    if passed < ran && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
