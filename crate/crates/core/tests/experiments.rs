use rough_kac::experiment::{run, Experiment, ExperimentConfig};
use rough_kac::Error;

fn config(seed: u64) -> ExperimentConfig {
    ExperimentConfig { seed: Some(seed), ..Default::default() }
}

#[test]
fn experiment_names_round_trip() {
    for e in Experiment::ALL {
        assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
    }
    assert!("not-an-experiment".parse::<Experiment>().is_err());
}

#[test]
fn every_experiment_resolves_with_only_a_seed() {
    for e in Experiment::ALL {
        let p = config(1).resolve(e).unwrap();
        assert!(p.eps.windows(2).all(|w| w[0] > w[1]), "{e}");
    }
}

#[test]
fn resolve_reports_all_problems_at_once() {
    let cfg = ExperimentConfig { hurst: Some(0.6), gamma: Some(1.5), ..Default::default() };
    match cfg.resolve(Experiment::SewingDemo) {
        Err(Error::Parameter(msg)) => {
            for field in ["seed", "hurst", "gamma"] {
                assert!(msg.contains(field), "{msg}");
            }
        }
        other => panic!("expected a parameter error, got {other:?}"),
    }
}

#[test]
fn reports_are_reproducible_for_a_fixed_seed() {
    let cfg =
        ExperimentConfig { replicates: Some(2000), eps: Some(vec![0.2, 0.1]), exponents: Some(vec![1.0]), ..config(5) };
    let p = cfg.resolve(Experiment::KsMoments).unwrap();
    let a = run(Experiment::KsMoments, &p).unwrap();
    let b = run(Experiment::KsMoments, &p).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let other =
        run(Experiment::KsMoments, &ExperimentConfig { seed: Some(6), ..cfg }.resolve(Experiment::KsMoments).unwrap())
            .unwrap();
    assert_ne!(a.estimates, other.estimates);
}

#[test]
fn report_writes_summary_and_tables() {
    let p = config(9).resolve(Experiment::SewingDemo).unwrap();
    let r = run(Experiment::SewingDemo, &p).unwrap();
    assert!(r.pass);
    let dir = std::env::temp_dir().join(format!("rough-kac-report-{}", std::process::id()));
    let out = r.write(&dir).unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["experiment"], "sewing-demo");
    assert_eq!(summary["parameters"]["seed"], 9);
    let csv = std::fs::read_to_string(out.join("sewing.csv")).unwrap();
    assert!(csv.lines().count() > 10);
    std::fs::remove_dir_all(&dir).unwrap();
}
