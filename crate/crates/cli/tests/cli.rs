use std::path::Path;
use std::process::{Command, Output};

fn rough_kac(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rough-kac"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path, exp: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join(exp).join("summary.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn fbm_variance_reports_one_over_2h() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rough_kac(&["fbm-variance", "--seed", "7"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(tmp.path(), "fbm-variance");
    assert_eq!(s["experiment"], "fbm-variance");
    assert_eq!(s["pass"], true);
    assert_eq!(s["parameters"]["replicates"], 10_000);
    let v = s["estimates"]["variance_terminal"].as_f64().unwrap();
    let se = s["stderrs"]["variance_terminal"].as_f64().unwrap();
    assert!((v - 1.25).abs() <= 3.0 * se, "{v} ± {se}");
    for f in ["variance.csv", "covariance.csv", "path.csv"] {
        assert!(tmp.path().join("fbm-variance").join(f).exists(), "{f}");
    }
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn outputs_are_bit_identical_across_runs_and_thread_counts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = a.path().join("cfg.toml");
    std::fs::write(&cfg, "seed = 11\nreplicates = 2000\neps = [0.2, 0.1]\nexponents = [1.0]\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let first = rough_kac(&["ks-moments", "--config", cfg, "--threads", "1"], a.path());
    let second = rough_kac(&["ks-moments", "--config", cfg, "--threads", "3"], b.path());
    assert!(first.status.code().is_some() && first.status.code() == second.status.code());
    let (x, y) = (read_dir_sorted(&a.path().join("ks-moments")), read_dir_sorted(&b.path().join("ks-moments")));
    assert_eq!(x.len(), 3);
    assert_eq!(x, y);
}

#[test]
fn levy_area_identity_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.toml");
    std::fs::write(&cfg, "experiment = \"levy-area-identity\"\nseed = 3\nreplicates = 20\n").unwrap();
    let out = rough_kac(&["levy-area-identity", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(tmp.path(), "levy-area-identity");
    assert!(s["estimates"]["max_relative_gap_eps0.1"].as_f64().unwrap() < 1e-6);
}

#[test]
fn configuration_errors_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rough_kac(&["sewing-demo"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));

    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "seed = 1\nhurst = 0.7\n").unwrap();
    let out = rough_kac(&["sewing-demo", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hurst"));

    std::fs::write(&cfg, "seed = 1\nexperiment = \"chen-check\"\n").unwrap();
    let out = rough_kac(&["sewing-demo", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(&cfg, "seed = 1\nunknown_field = 2\n").unwrap();
    let out = rough_kac(&["sewing-demo", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sewing_demo_writes_long_format_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rough_kac(&["sewing-demo", "--seed", "1"], tmp.path());
    assert!(out.status.success());
    let table = std::fs::read_to_string(tmp.path().join("sewing-demo").join("sewing.csv")).unwrap();
    assert!(table.starts_with("germ,mu,level,sum,ratio\n"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("sewing-demo: pass"));
}
