use std::process::Command;

use ostat::config::{ExperimentConfig, Manifest};
use ostat::commands::verify_records;
use ostat::runner::ReplicationRecord;
use ostat_core::limits::{limit_params, LimitLaw, NumericOptions};
use ostat_core::models::RunDiagnostics;
use ostat_core::sampling::SeededStream;
use ostat_core::stats::sample_limit_order_stat;

fn ostat(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ostat")).args(args).output().unwrap()
}

#[test]
fn simulate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = ostat(&["simulate", "--t", "50", "--reps", "2", "--seed", "7", "--m", "1,2", "--out", dir.path().to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ca = std::fs::read(a.path().join("simulate.csv")).unwrap();
    let cb = std::fs::read(b.path().join("simulate.csv")).unwrap();
    assert_eq!(ca, cb);
    let text = String::from_utf8(ca).unwrap();
    assert!(text.starts_with("t,replication,input_size,n_values,empty,skipped_degenerate,unconverged,f1,f2,values"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn thread_count_does_not_change_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, th) in [(&a, "1"), (&b, "4")] {
        let o = ostat(&["simulate", "--model", "sphere_polytope", "--d", "3", "--t", "40", "--reps", "12", "--threads", th, "--out", dir.path().to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(a.path().join("simulate.csv")).unwrap(), std::fs::read(b.path().join("simulate.csv")).unwrap());
}

#[test]
fn empty_replications_get_infinite_sentinels() {
    let dir = tempfile::tempdir().unwrap();
    let o = ostat(&["simulate", "--t", "0.5", "--reps", "3", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    let row = text.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[4], "1");
    assert_eq!(cols[7], "inf");
}

#[test]
fn manifest_round_trips_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.toml");
    std::fs::write(&cfg_path, "model = \"gilbert\"\nd = 2\nt = [30.0]\nreps = 4\nseed = 11\nm = [1, 3]\nx_grid = [0.5, 1.0]\nx_max = 1.5\n").unwrap();
    let out = dir.path().join("run");
    let o = ostat(&["simulate", "--config", cfg_path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let mut expected = ExperimentConfig::load(&cfg_path).unwrap();
    expected.out = Some(out.clone());
    assert_eq!(manifest.config, expected);
    assert_eq!(ExperimentConfig::load(&out.join("manifest.json")).unwrap(), expected);
    assert_eq!(manifest.seed, 11);
}

#[test]
fn exit_codes() {
    assert_eq!(ostat(&["verify", "--reps", "1"]).status.code(), Some(2));
    assert_eq!(ostat(&["constants", "--model", "nonsense"]).status.code(), Some(2));
    assert_eq!(ostat(&["constants", "--x-grid", "2,1"]).status.code(), Some(2));
    assert_eq!(ostat(&["constants", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(ostat(&["constants", "--d", "3", "--model", "proximity_flats", "--k", "2"]).status.code(), Some(2));
    let o = ostat(&["constants", "--model", "gilbert", "--d", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("gilbert\t2\t1\t1.5707963267948966\t2\tclosed_form"), "{text}");
}

/// Replications of a Weibull process with intensity `scale · ν`, built from
/// cumulative sums of standard exponentials.
fn weibull_records(law: &LimitLaw, scale: f64, reps: u64, x_max: f64) -> Vec<ReplicationRecord> {
    let unit = LimitLaw::new(1.0, 1.0, 1.0).unwrap();
    let mut rng = SeededStream::new(99, 0).rng();
    (0..reps)
        .map(|i| {
            let mut pts = Vec::new();
            let mut g = 0.0;
            loop {
                g += sample_limit_order_stat(&unit, 1, &mut rng);
                let x = (g / (scale * law.beta)).powf(1.0 / law.tau);
                if x > x_max {
                    break;
                }
                pts.push(x);
            }
            let order_stats = (0..2).map(|m| pts.get(m).copied().unwrap_or(f64::INFINITY)).collect();
            ReplicationRecord { t: 1.0, replication: i, input_size: 0, values: pts, order_stats, diagnostics: RunDiagnostics::default() }
        })
        .collect()
}

#[test]
fn verify_passes_on_draws_from_the_limit_law() {
    let cfg = ExperimentConfig { m: vec![1, 2], reps: 500, calibration_reps: 400, ..Default::default() };
    let spec = cfg.validate().unwrap();
    let law = limit_params(&spec, &NumericOptions::default()).unwrap();
    let report = verify_records(&cfg, &spec, &law, 1.0, 0, &weibull_records(&law, 1.0, 500, cfg.x_max)).unwrap();
    assert!(report.pass, "{report:#?}");
}

#[test]
fn verify_fails_on_a_shifted_law() {
    let cfg = ExperimentConfig { m: vec![1, 2], reps: 500, calibration_reps: 400, ..Default::default() };
    let spec = cfg.validate().unwrap();
    let law = limit_params(&spec, &NumericOptions::default()).unwrap();
    let report = verify_records(&cfg, &spec, &law, 1.0, 0, &weibull_records(&law, 1.5, 500, cfg.x_max)).unwrap();
    assert!(!report.pass);
    assert!(report.order_stats.iter().all(|c| !c.pass));
}

#[test]
fn variance_rows() {
    let o = ostat(&["variance", "--d", "1", "--t", "10", "--s", "0,0.1", "--reps", "200"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "10.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0");
    assert!(lines[2].starts_with("10.0,0.1,9.5,2.0,46.16666666666"));
}

#[test]
fn beta_integrate_reports_json() {
    let o = ostat(&["beta-integrate", "--model", "point_simplices", "--d", "2", "--points", "2048", "--parametrization", "crofton"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["beta"].as_f64().unwrap() - 2.0).abs() < 0.05);
    assert_eq!(v["parametrization"], "crofton");
}
