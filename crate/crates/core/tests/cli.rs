use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use grushin::config::RunConfig;
use grushin::io::{encode_grid_function, load_grid_function};
use grushin::lab::{make_test_function, stability_flag};
use serde_json::Value;

const BASE: &str = r#"
K = 8
operator = ["rational"]

[grid]
n = 1
nx = 64
x_extent = 8.0
nt = 32
t_extent = 6.283185307179586

[test_function]
kind = "hermite-random"
k_max = 4
m_max = 4
seed = 1
"#;

const RBOUND: &str = r#"
[probe]
kind = "rbound"
p = 4.0
trials = 16
seed = 3
lambda_count = 6
"#;

fn grushin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grushin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn run(cmd: &str, config: &Path, out: &Path) -> Output {
    grushin(&[cmd, "--config", config.to_str().unwrap(), "--output", out.to_str().unwrap()])
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn identity_apply_reproduces_input() {
    let dir = tempfile::tempdir().unwrap();
    let text = BASE.replace(r#"["rational"]"#, r#"["one"]"#);
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let o = run("apply", &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let parsed = RunConfig::parse(&text).unwrap();
    let input = make_test_function(parsed.grid, &parsed.test_function).unwrap();
    let output = load_grid_function(&out.join("apply.grid")).unwrap();
    assert!(output.max_abs_diff(&input) < 1e-8);
    let report = read_json(&out.join("apply.json"));
    assert_eq!(report["operator"], "one");
}

#[test]
fn apply_from_grid_file() {
    let dir = tempfile::tempdir().unwrap();
    let parsed = RunConfig::parse(BASE).unwrap();
    let input = make_test_function(parsed.grid, &parsed.test_function).unwrap();
    let grid_path = dir.path().join("in.grid");
    std::fs::write(&grid_path, encode_grid_function(&input)).unwrap();
    let text = format!("{}\n[input]\npath = {:?}\n", BASE.replace(r#"["rational"]"#, r#"["zero"]"#), grid_path);
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    assert_eq!(run("apply", &cfg, &out).status.code(), Some(0));
    assert!(load_grid_function(&out.join("apply.grid")).unwrap().max_abs() < 1e-12);
}

#[test]
fn bad_config_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for text in [
        BASE.replace("nx = 64", "nx = 63"),
        BASE.replace("K = 8", "K = 8\nwhatever = 1"),
        format!("{BASE}{}", RBOUND.replace("p = 4.0", "p = 1.0")),
        BASE.replace("rational", "riesz:9"),
    ] {
        let cfg = write_config(dir.path(), &text);
        for cmd in ["apply", "probe", "transform"] {
            let o = run(cmd, &cfg, &out);
            assert_eq!(o.status.code(), Some(2), "{cmd}: {text}");
            assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
        }
    }
    assert!(!out.exists());
    let o = grushin(&["apply", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{BASE}{}", RBOUND.replace("seed = 3", "seed = 3\nsed = 4")));
    let o = run("probe", &cfg, dir.path());
    assert!(String::from_utf8_lossy(&o.stderr).contains("probe.sed"));
}

#[test]
fn corrupt_grid_files_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let parsed = RunConfig::parse(BASE).unwrap();
    let good = encode_grid_function(&make_test_function(parsed.grid, &parsed.test_function).unwrap());
    let mut bad_magic = good.clone();
    bad_magic[0] = b'X';
    let truncated = good[..good.len() - 5].to_vec();
    for (name, bytes) in [("magic.grid", bad_magic), ("short.grid", truncated)] {
        let p = dir.path().join(name);
        std::fs::write(&p, bytes).unwrap();
        let cfg = write_config(dir.path(), &format!("{BASE}\n[input]\npath = {p:?}\n"));
        let o = run("apply", &cfg, &dir.path().join("out"));
        assert_eq!(o.status.code(), Some(3), "{name}");
    }
}

#[test]
fn rbound_report_is_consistent_and_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{BASE}{RBOUND}"));
    let out = dir.path().join("out");
    let o = run("probe", &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out.join("probe-rbound.json"));
    let trials = r["trials"].as_u64().unwrap();
    let skipped = r["skipped"].as_u64().unwrap();
    assert_eq!(r["ratios"].as_array().unwrap().len() as u64, trials - skipped);
    let refinement: Vec<f64> = r["refinement"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(r["stable"].as_bool().unwrap(), stability_flag(&refinement));
    assert!(r["stable"].as_bool().unwrap());
    let csv = std::fs::read_to_string(out.join("probe-rbound.csv")).unwrap();
    assert_eq!(csv.lines().count() as u64, trials - skipped + 1);
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{BASE}{RBOUND}"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run("probe", &cfg, &a).status.code(), Some(0));
    assert_eq!(run("probe", &cfg, &b).status.code(), Some(0));
    for f in ["probe-rbound.json", "probe-rbound.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn hormander_and_transform_reports() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{BASE}\n[probe]\nkind = \"hormander\"\nsymbol = \"rational\"\norder = 2\n");
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    assert_eq!(run("probe", &cfg, &out).status.code(), Some(0));
    let h = read_json(&out.join("probe-hormander.json"));
    assert_eq!(h["bounded"], true);
    assert_eq!(run("transform", &cfg, &out).status.code(), Some(0));
    let t = read_json(&out.join("transform.json"));
    let energy = t["energy"].as_f64().unwrap();
    assert!((energy - 1.0).abs() < 1e-8, "{energy}");
}

#[test]
fn g_function_apply_matches_constant() {
    let dir = tempfile::tempdir().unwrap();
    let text = BASE.replace(r#"operator = ["rational"]"#, "") + "\n[gfunc]\nk = 2\n";
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let o = run("apply", &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out.join("apply.json"));
    let expected = r["expected"].as_f64().unwrap();
    assert!((expected - 0.375f64.sqrt()).abs() < 1e-15);
    for s in r["slices"].as_array().unwrap() {
        let ratio = s["ratio"].as_f64().unwrap();
        assert!((ratio - expected).abs() < 1e-6 * expected, "{ratio}");
    }
}
