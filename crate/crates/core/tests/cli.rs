use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cgo-lab")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn scratch(name: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("cgo-lab-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (scratch("a"), scratch("b"));
    for d in [&a, &b] {
        let (code, out) = run(&["appendix-checks", "--out", d.to_str().unwrap(), "--seed", "7"]);
        assert_eq!(code, 0, "{out}");
    }
    for f in ["appendix_lattice.csv", "appendix_scaling.csv", "config.toml", "plot.py"] {
        let x = std::fs::read(a.join("appendix-checks").join(f)).unwrap();
        let y = std::fs::read(b.join("appendix-checks").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("appendix-checks/verdict.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["verdicts"].as_array().unwrap().len(), 2);
}

fn write_config(dir: &Path, from: &str, to: &str) -> String {
    let (_, text) = run(&["print-config"]);
    assert!(text.contains(from), "{from}");
    std::fs::create_dir_all(dir).unwrap();
    let p = dir.join("cfg.toml");
    std::fs::write(&p, text.replace(from, to)).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn failing_check_exits_nonzero() {
    let d = scratch("fail");
    let cfg = write_config(&d, "rel_tol = 0.001", "rel_tol = 0.0");
    let (code, out) = run(&["appendix-checks", "--config", &cfg, "--out", d.to_str().unwrap()]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("FAIL [1]"));
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.join("appendix-checks/verdict.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn config_errors_are_reported() {
    let d = scratch("bad");
    let cfg = write_config(&d, "p_values = [3.0, 4.0]", "p_values = [1.5]");
    let (code, _) = run(&["appendix-checks", "--config", &cfg, "--out", d.to_str().unwrap()]);
    assert_eq!(code, 2);
    let cfg = write_config(&d, "single_taus = [8.0, 16.0, 32.0, 64.0]", "single_taus = []");
    let (code, _) = run(&["all", "--config", &cfg, "--out", d.to_str().unwrap()]);
    assert_eq!(code, 2);
}
