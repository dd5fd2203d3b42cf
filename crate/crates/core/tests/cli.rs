use std::path::{Path, PathBuf};
use std::process::Command;

use phomog::cli::{parse_config, parse_config_str, EXIT_ASSUMPTION};
use phomog::error::Error;

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn phomog(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_phomog")).args(args).output().expect("binary runs")
}

const SHORT_1D: &str = r#"
p = 3.0
[coefficient]
dim = 1
lambda = 14.0
periodic = { kind = "cosine", base = 2.0, amplitude = 1.0 }
defect = { kind = "exponential", amplitude = 10.0, rate = 1.0 }
[problem]
eps = [0.1, 0.05]
[solver]
seed = 3
"#;

#[test]
fn shipped_configs_parse() {
    let c = parse_config(repo_config("benchmark_1d.toml")).unwrap();
    assert_eq!(c.p, 3.0);
    assert_eq!(c.problem.eps, vec![0.1, 0.05, 0.01, 0.005, 0.001, 0.0005]);
    parse_config(repo_config("laminate_2d.toml")).unwrap();
    parse_config(repo_config("violating.toml")).unwrap();
}

#[test]
fn missing_coefficient_block_is_reported() {
    let Err(Error::Config(errs)) = parse_config_str("p = 3.0\n") else { panic!() };
    assert!(errs.iter().any(|e| e.field == "coefficient"));
}

#[test]
fn oned_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, SHORT_1D).unwrap();
    let mut csv = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = phomog(&["oned", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        csv.push(std::fs::read_to_string(out.join("oned.csv")).unwrap());
    }
    assert_eq!(csv[0], csv[1]);
    let lines: Vec<&str> = csv[0].lines().collect();
    assert_eq!(lines[0], "eps,R_per_Linf,R_Linf,R_per_L2,R_L2,C_eps,C_star");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1.00000e-1,1.55803e-1,1.08839e-1,"), "{}", lines[1]);

    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/oned.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 3);
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["config_hash"].as_str().unwrap(), phomog::cli::config_hash(SHORT_1D.as_bytes()));
}

#[test]
fn validate_flags_assumption_violation() {
    let dir = tempfile::tempdir().unwrap();
    let o = phomog(&["validate", repo_config("violating.toml").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_ASSUMPTION));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("validate.manifest.json")).unwrap()).unwrap();
    assert!(m["error"].as_str().unwrap().contains("ellipticity"));
}

#[test]
fn laminate_cell_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = phomog(&[
        "cell",
        repo_config("laminate_2d.toml").to_str().unwrap(),
        "--xi",
        "0,1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("cell.json")).unwrap()).unwrap();
    assert_eq!(v[0]["c_est"].as_f64(), Some(1.0));
    assert_eq!(v[0]["xi"], serde_json::json!([0.0, 1.0]));
}

#[test]
fn invalid_config_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, SHORT_1D.replace("p = 3.0", "p = 1.5")).unwrap();
    let o = phomog(&["oned", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p: requires p ≥ 2"));
}

#[test]
fn non_convergence_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    let text = SHORT_1D.replace("seed = 3", "seed = 3\nmax_iter = 1\ntol = 1e-14\nradius = 4.5");
    std::fs::write(&cfg, text).unwrap();
    let o = phomog(&["defect", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
