use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mixrate::bounds::beta;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mixrate-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixrate"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env_remove(mixrate::cli::OUT_DIR_ENV)
        .output()
        .unwrap()
}

fn config(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

#[test]
fn validate_powerlaw_config() {
    let out = scratch("validate");
    let o = run(&["validate", "--config", &config("cp_powerlaw.json")], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("\"valid\": true"));
}

#[test]
fn rate_table_column_is_beta_rate() {
    let out = scratch("rate");
    let o = run(
        &["rate-table", "--config", &config("cp_powerlaw.json"), "--n-max", "100"],
        &out,
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("cp_powerlaw_rate-table.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), mixrate::cli::CSV_HEADER);
    let b = beta(0.25, 0.5).unwrap();
    let mut count = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let n: f64 = cols[0].parse().unwrap();
        let v: f64 = cols[6].parse().unwrap();
        let want = 8.0 * b * n.powf(-0.5);
        assert!(((v - want) / want).abs() < 1e-12, "n={n}: {v} vs {want}");
        count += 1;
    }
    assert_eq!(count, 100);
}

#[test]
fn resonant_identity_is_not_mixing() {
    let out = scratch("verdict");
    let o = run(
        &["mixing-verdict", "--config", &config("cp_identity_resonant.json")],
        &out,
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("cp_identity_resonant_mixing-verdict.json")).unwrap()).unwrap();
    assert_eq!(v["verdict"], "NotMixing");
    assert_eq!(v["witness"]["a"].as_f64(), Some(0.5));
    assert_eq!(v["witness"]["value"][0].as_f64(), Some(4.0));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = scratch("det-a");
    let b = scratch("det-b");
    for out in [&a, &b] {
        for cmd in ["bound", "codiff"] {
            let o = run(&[cmd, "--config", &config("stable_forward_shift.json")], out);
            assert_eq!(o.status.code(), Some(0));
        }
        let o = run(&["mc", "--config", &config("cp_powerlaw.json"), "--n-max", "4"], out);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 9);
    for name in names {
        assert_eq!(
            std::fs::read(a.join(&name)).unwrap(),
            std::fs::read(b.join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn bound_rows_hold_for_every_config() {
    let out = scratch("bounds");
    for name in [
        "cp_identity_resonant.json",
        "cp_powerlaw.json",
        "stable_forward_shift.json",
        "tempered_backward.json",
    ] {
        let o = run(&["bound", "--config", &config(name)], &out);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let svg = std::fs::read_to_string(out.join("tempered_backward_bound.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn exit_codes() {
    let out = scratch("exit");
    let bad_json = out.join("bad.json");
    std::fs::write(&bad_json, "{\n  \"name\": \"x\",\n  \"measure\": [\n}").unwrap();
    let o = run(&["validate", "--config", bad_json.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line "));

    let text = std::fs::read_to_string(configs().join("cp_powerlaw.json")).unwrap();
    let invalid = out.join("invalid.json");
    std::fs::write(&invalid, text.replace("\"lambda0\": 1.0", "\"lambda0\": -1.0")).unwrap();
    let o = run(&["validate", "--config", invalid.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(1));

    let o = run(
        &["validate", "--config", out.join("missing.json").to_str().unwrap()],
        &out,
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn out_dir_from_environment() {
    let out = scratch("env");
    let o = Command::new(env!("CARGO_BIN_EXE_mixrate"))
        .args(["mixing-verdict", "--config", &config("cp_identity_resonant.json")])
        .env(mixrate::cli::OUT_DIR_ENV, &out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("cp_identity_resonant_mixing-verdict.json").exists());
}
