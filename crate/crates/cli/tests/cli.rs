use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"{
    "potential": {"even": [[2, 3.0]], "odd": [[1, 2.0], [3, 2.0], [5, 2.0]], "delta": 1.0},
    "delta_list": [1.0, 2.0],
    "points": [0, 1],
    "k_samples": 33
}"#;

fn edgeband(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_edgeband"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("EDGEBAND_THREADS", t),
        None => cmd.env_remove("EDGEBAND_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn run_in(dir: &Path, command: &str, config: &Path, threads: Option<&str>) -> Output {
    let out =
        edgeband(&[command, "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--plots"], threads);
    assert!(out.status.success(), "{command}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path
}

const ARTIFACTS: [(&str, &str); 5] = [
    ("bands", "bands.csv"),
    ("dirac-point", "dirac_point.json"),
    ("zero-mode", "zero_mode.csv"),
    ("e2", "e2.json"),
    ("edge-state", "edge_state_0.csv"),
];

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), CONFIG);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (command, _) in ARTIFACTS {
        run_in(&a, command, &config, None);
        run_in(&b, command, &config, Some("1"));
    }
    run_in(&a, "bifurcation", &config, None);
    run_in(&b, "bifurcation", &config, Some("3"));
    for file in
        ARTIFACTS.iter().map(|a| a.1).chain(["bifurcation.csv", "edge_states.json", "bands.svg", "bifurcation.svg"])
    {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file} differs");
    }
}

#[test]
fn resolved_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), CONFIG);
    let first = tmp.path().join("first");
    run_in(&first, "e2", &config, None);
    run_in(&first, "dirac-point", &config, None);
    let resolved = first.join("resolved_config.json");
    let text = fs::read_to_string(&resolved).unwrap();
    for key in ["m_max", "k_samples", "tolerances", "zero_mode", "grid", "wall", "delta_list"] {
        assert!(text.contains(&format!("\"{key}\"")), "resolved config lacks {key}");
    }

    let second = tmp.path().join("second");
    let out = edgeband(&["dirac-point", "--config", resolved.to_str().unwrap()], None);
    assert!(out.status.success());
    let moved = tmp.path().join("moved.json");
    fs::write(&moved, text.replace(first.to_str().unwrap(), second.to_str().unwrap())).unwrap();
    run_in(&second, "e2", &moved, None);
    run_in(&second, "dirac-point", &moved, None);
    for file in ["e2.json", "dirac_point.json"] {
        assert_eq!(fs::read(first.join(file)).unwrap(), fs::read(second.join(file)).unwrap(), "{file} differs");
    }
    let r1: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut r2: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(second.join("resolved_config.json")).unwrap()).unwrap();
    r2["output_dir"] = r1["output_dir"].clone();
    assert_eq!(r1, r2);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("o");
    let out = out_dir.to_str().unwrap();

    assert_eq!(edgeband(&["bands"], None).status.code(), Some(1));
    let bad = write_config(tmp.path(), r#"{"m_maks": 4}"#);
    assert_eq!(edgeband(&["bands", "--config", bad.to_str().unwrap(), "--out", out], None).status.code(), Some(1));
    let good = write_config(tmp.path(), CONFIG);
    assert_eq!(
        edgeband(&["bands", "--config", good.to_str().unwrap(), "--out", out], Some("0")).status.code(),
        Some(1)
    );

    // theta_sharp vanishes at the third point and the bands still overlap at delta = 0.5
    let gapless = tmp.path().join("gapless.json");
    fs::write(&gapless, r#"{"potential": {"odd": [[1, 2.0]], "delta": 0.5}, "n": 2}"#).unwrap();
    let o = edgeband(&["edge-state", "--config", gapless.to_str().unwrap(), "--out", out], None);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    let odd_v = tmp.path().join("odd_v.json");
    fs::write(&odd_v, r#"{"potential": {"even": [[1, 2.0]]}}"#).unwrap();
    assert_eq!(
        edgeband(&["dirac-point", "--config", odd_v.to_str().unwrap(), "--out", out], None).status.code(),
        Some(1)
    );
}

#[test]
fn plots_only_on_request() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), CONFIG);
    let dir = tmp.path().join("plain");
    let out = edgeband(&["bands", "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()], None);
    assert!(out.status.success());
    assert!(dir.join("bands.csv").exists() && !dir.join("bands.svg").exists());
    let csv = fs::read_to_string(dir.join("bands.csv")).unwrap();
    let first = csv.lines().nth(1).unwrap();
    // 17 significant digits per value
    assert!(first.split(',').all(|v| v.split('e').next().unwrap().trim_start_matches('-').len() == 18));
}
