use std::process::{Command, Output};

fn gvlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gvlab"))
        .args(args)
        .env("GVLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn usage_errors_exit_with_1() {
    for args in [
        &["gv", "--scenario", "nope"][..],
        &["gv", "--checks", "nope", "--scenario", "foliation", "--grid", "8,8,8"],
        &["gv", "--grid", "4,4,4"],
        &["gv", "--grid", "8,8"],
        &["frobnicate"],
        &["gv", "--tol-scale", "-1"],
        &["variation", "--scenario", "contact-chart", "--grid", "8,8,8"],
        &["sweep", "--axis", "grid", "--values", "16,32", "--quantity", "dd"],
        &["sweep", "--axis", "time", "--values", "1,2,3", "--quantity", "dd"],
    ] {
        let o = gvlab(args);
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = Command::new(env!("CARGO_BIN_EXE_gvlab"))
        .args(["gv", "--scenario", "foliation", "--grid", "8,8,8"])
        .env("GVLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn gv_report_is_json_with_full_precision() {
    let o = gvlab(&["gv", "--scenario", "contact", "--grid", "16,16,16", "--no-timestamp"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verb"], "gv");
    assert_eq!(v["grid"], serde_json::json!([16, 16, 16]));
    assert!(v["gv_direct"].as_f64().unwrap().abs() < 1e-8);
    assert!(v["timestamp"].is_null());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("e"), "scientific notation");
    for key in ["scenario", "gv_rw", "residuals", "values", "variations", "checks"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn timestamp_present_unless_suppressed() {
    let o = gvlab(&["gv", "--scenario", "foliation", "--grid", "8,8,8"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["timestamp"].as_u64().unwrap() > 1_600_000_000);
}

#[test]
fn failed_check_exits_with_2() {
    // a huge tol-scale divisor turns the saddle margins into impossible lower bounds
    let o = gvlab(&["gv", "--scenario", "foliation", "--grid", "8,8,8", "--checks", "saddle", "--tol-scale", "1e-9"]);
    assert_eq!(code(&o), 2);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["checks"][0]["name"], "saddle");
    assert_eq!(v["checks"][0]["passed"], false);
    assert!(String::from_utf8_lossy(&o.stderr).contains("criterion  9 saddle          FAIL"));
}

#[test]
fn passing_check_exits_with_0_and_appears_once() {
    let o = gvlab(&["frenet", "--scenario", "tilted", "--grid", "16,16,16", "--checks", "saddle,saddle", "--no-timestamp"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 1);
    assert!(v["residuals"]["tau"]["max"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = std::env::temp_dir().join(format!("gvlab-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    let out = dir.join("report.json");
    std::fs::write(
        &cfg,
        format!("# test\nscenario = contact\ngrid = 8,8,8\nno_timestamp = true\nout = {}\n", out.display()),
    )
    .unwrap();
    let o = gvlab(&["gv", "--config", cfg.to_str().unwrap(), "--scenario", "foliation"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["scenario"], "foliation");
    assert_eq!(v["grid"], serde_json::json!([8, 8, 8]));
    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(code(&gvlab(&["gv", "--config", cfg.to_str().unwrap()])), 1);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_writes_csv_with_orders() {
    let o = gvlab(&["sweep", "--scenario", "tilted", "--axis", "grid", "--values", "16,32,64", "--quantity", "d-error"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "value,error,order");
    assert_eq!(lines.len(), 4);
    let order: f64 = lines[3].split(',').nth(2).unwrap().parse().unwrap();
    assert!(order > 3.5, "{text}");
}

#[test]
fn other_verbs_run() {
    for args in [
        &["critical", "--scenario", "quadratic-chart", "--grid", "16,16,16", "--no-timestamp"][..],
        &["variation", "--scenario", "tilted", "--grid", "12,12,12", "--no-timestamp"],
        &["jacobi", "--grid", "16,16,16", "--no-timestamp"],
    ] {
        let o = gvlab(args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap();
    }
    let o = gvlab(&["list-scenarios"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("twisted-factorizable") && text.contains("ground truth"));
}
