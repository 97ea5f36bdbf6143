use std::path::Path;
use std::process::Command;

use qfeo_cli::config::{ClassifierEntry, DatasetEntry, RunConfig, SyntheticSpec, RUN_PRESETS};
use qfeo_cli::report::{cmd_report, OVERALL};
use qfeo_cli::run::cmd_run;
use qfeo_cli::ConfigSource;

fn qfeo(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qfeo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn preset(name: &str) -> RunConfig {
    let text = RUN_PRESETS.iter().find(|(n, _)| *n == name).unwrap().1;
    serde_json::from_str(text).unwrap()
}

#[test]
fn smoke_run_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = qfeo(&["run", "--preset", "smoke", "--out", out.to_str().unwrap(), "--workers", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "manifest.json",
        "summary.csv",
        "splits/planted.json",
        "runs/planted__se-1__q4__NFO/result.json",
        "runs/planted__se-1__q4__FS/batches/batch_00.json",
        "runs/planted__se-1__q4__FS/traces/batch_00.csv",
        "runs/planted__se-1__q4__FS/traces/batch_00.json",
        "runs/planted__se-1__q4__FS/importance.csv",
        "runs/planted__se-1__q4__FW/importance.csv",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(summary.starts_with("run_id,dataset,feature_map,n_qubits,manipulation,n_batches,nfo_mean"));
    let trace = std::fs::read_to_string(out.join("runs/planted__se-1__q4__FS/traces/batch_00.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("iteration,value,best_so_far"));
    assert_eq!(trace.lines().count(), 3);

    let o = qfeo(&["report", out.to_str().unwrap()]);
    assert!(o.status.success());
    let table = std::fs::read_to_string(out.join("report/percent_change_planted.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("feature_map,n_qubits,FS_mean_pct,FS_std_pct,FW_mean_pct,FW_std_pct"));
    assert!(table.lines().last().unwrap().starts_with(OVERALL));
    // A single batch has no spread.
    assert!(table.lines().nth(1).unwrap().split(',').nth(3) == Some("0"));
    let imp = std::fs::read_to_string(out.join("report/importance_planted.csv")).unwrap();
    assert_eq!(imp.lines().next(), Some("feature,FS,FS_rank,FW,FW_rank"));
    assert_eq!(imp.lines().count(), 7);
}

#[test]
fn manifest_rerun_is_bitwise_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    cmd_run(&ConfigSource::Preset("smoke".into()), &a, None).unwrap();
    let manifest = ConfigSource::File(a.join("manifest.json"));
    qfeo_core::par::with_workers(3, || cmd_run(&manifest, &b, None)).unwrap();
    for f in ["summary.csv", "runs/planted__se-1__q4__FS/traces/batch_00.csv", "runs/planted__se-1__q4__FW/importance.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(std::fs::read(a.join("manifest.json")).unwrap(), std::fs::read(b.join("manifest.json")).unwrap());
}

#[test]
fn seed_override_changes_the_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cmd_run(&ConfigSource::Preset("smoke".into()), tmp.path(), Some(99)).unwrap();
    assert_eq!(o.manifest.seeds.master, 99);
    assert_eq!(o.manifest.config.seed, 99);
}

#[test]
fn missing_csv_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"datasets":[{"name":"x","csv":"/nonexistent/x.csv"}],"feature_maps":[{"preset":"se-1"}],
            "manipulations":["FS"],"classifier":"svc-desk","bo":{"iterations":2}}"#,
    );
    let o = qfeo(&["run", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("datasets[0].csv"));
}

#[test]
fn config_errors_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"datasets":[{"name":"x","synthetic":{"d":40,"p":4,"k_informative":2}}],
            "feature_maps":[{"preset":"se-1","n_qubits":[4]}],"manipulations":["FS"],
            "classifier":"svc-desk","bo":{"iterations":"many"}}"#,
    );
    let o = qfeo(&["run", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bo.iterations"));
    let o = qfeo(&["run", "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = qfeo(&["run", "--preset", "nope", "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    // 16 balanced training rows cannot feed 10 stratified folds.
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"datasets":[{"name":"x","synthetic":{"d":24,"p":4,"k_informative":2,"seed":3}}],
            "feature_maps":[{"preset":"se-1","n_qubits":[3]}],"manipulations":["NFO"],
            "classifier":"svc-desk","bo":{"iterations":2,"n_init":2},
            "data":{"n_batches":1,"balance":true}}"#,
    );
    let o = qfeo(&["run", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("batch 0"));
    assert!(tmp.path().join("o/manifest.json").is_file());
}

#[test]
fn expressibility_smoke_and_kind_guard() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("e");
    let o = qfeo(&["expressibility", "--preset", "expressibility-smoke", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for k in ["FO", "FS", "FW"] {
        for c in ["reconstruction", "components"] {
            let text = std::fs::read_to_string(out.join(format!("{k}_{c}.csv"))).unwrap();
            assert_eq!(text.lines().next(), Some("kind,x,mean,std"));
        }
    }
    let cfg = write(
        tmp.path(),
        "x.json",
        r#"{"feature_map":{"preset":"hh-1","n_qubits":4},"n_features":8,"kinds":["FWOW"],"repetitions":1}"#,
    );
    let o = qfeo(&["expressibility", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_without_results_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qfeo(&["report", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(cmd_report(tmp.path(), None).is_err());
}

#[test]
fn synth_writes_csv_and_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qfeo(&["synth", "--preset", "planted", "--out", tmp.path().to_str().unwrap(), "--seed", "5"]);
    assert!(o.status.success());
    let ds = qfeo_core::data::load_csv(&tmp.path().join("planted.csv")).unwrap();
    assert_eq!((ds.n_samples(), ds.n_features()), (400, 12));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("planted.json")).unwrap()).unwrap();
    assert_eq!(meta["spec"]["seed"], 5);
    assert_eq!(meta["informative"].as_array().unwrap().len(), 4);
}

#[test]
fn qubit_sweep_gives_one_row_per_count() {
    let mut cfg = preset("smoke");
    cfg.feature_maps[0].n_qubits = (9..=15).collect();
    cfg.datasets[0].synthetic = Some(SyntheticSpec { d: 60, p: 20, k_informative: 3, noise_sd: 0.5, seed: 0 });
    let plan = cfg.plan(Path::new(".")).unwrap();
    for kind in ["NFO", "FS", "FW"] {
        let n: Vec<usize> = plan.jobs.iter().filter(|j| j.manipulation.to_string() == kind).map(|j| j.n_qubits).collect();
        assert_eq!(n, (9..=15).collect::<Vec<_>>());
    }
    assert!(matches!(plan.config.classifier, ClassifierEntry::Grid(_)));
    assert_eq!(plan.config.datasets[0].fs_r, Some(10));
}

#[test]
fn paper_scale_config_validates_on_stand_in_data() {
    let mut cfg = preset("paper-scale");
    for (entry, p) in cfg.datasets.iter_mut().zip([97, 47, 24, 67]) {
        *entry = DatasetEntry {
            csv: None,
            synthetic: Some(SyntheticSpec { d: 60, p, k_informative: 4, noise_sd: 0.5, seed: 0 }),
            ..entry.clone()
        };
    }
    let plan = cfg.plan(Path::new(".")).unwrap();
    assert_eq!(plan.jobs.len(), 4 * 6 * 7 * 7);
    assert!(plan.jobs.iter().all(|j| j.experiment.bo.iterations == 100));
}

#[test]
fn capacity_violations_are_config_errors() {
    let mut cfg = preset("smoke");
    // Repeated Pauli with 16 blocks on 2 qubits holds 32 features.
    cfg.feature_maps[0].preset = Some("rp-0".into());
    cfg.feature_maps[0].n_qubits = vec![2];
    cfg.datasets[0].synthetic = Some(SyntheticSpec { d: 60, p: 40, k_informative: 3, noise_sd: 0.5, seed: 0 });
    let e = cfg.plan(Path::new(".")).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    assert!(e.to_string().contains("capacity"), "{e}");
}
