use std::process::Command;

fn inls(args: &[&str], out: &std::path::Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_inls")).args(args).arg("--out").arg(out).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stdout).into_owned() + &String::from_utf8_lossy(&o.stderr))
}

#[test]
fn ground_state_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = inls(&["ground-state", "--d", "3", "--b", "0.3", "--check"], dir.path());
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("pohozhaev_residual"));
    for f in ["w.csv", "report.json", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "ground-state");
    assert_eq!(m["config"]["grid"]["n_cells"], 2048);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = inls(&["ground-state", "--set", "grid.cells=3"], dir.path());
    assert_eq!(code, 2);
    assert!(text.contains("grid.cells"), "{text}");
    let (code, text) = inls(&["ground-state", "--set", "model.b=7"], dir.path());
    assert_eq!(code, 2);
    assert!(text.contains("model.b"), "{text}");

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[evolve]\ndt = \"fast\"\n").unwrap();
    let (code, text) = inls(&["evolve", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code, 2);
    assert!(text.contains("evolve.dt"), "{text}");
    let (code, _) = inls(&["ground-state", "--config", "/nonexistent/inls.toml"], dir.path());
    assert_eq!(code, 2);
}

#[test]
fn failed_checks_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    // far too coarse for the identity tolerances
    let (code, text) = inls(&["ground-state", "--n-cells", "16", "--check"], dir.path());
    assert_eq!(code, 4, "{text}");
    assert!(text.contains("[FAIL]"));
    let (code, _) = inls(&["ground-state", "--n-cells", "16"], dir.path());
    assert_eq!(code, 0);
}
