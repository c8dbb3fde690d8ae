use std::process::Command;

use aniso_hardy_cli::report::read_summary;
use aniso_hardy_cli::{run, CliError, ExperimentConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aniso-hardy"))
}

#[test]
fn empty_suite_list_gives_an_empty_passing_bundle() {
    let cfg = ExperimentConfig::from_json(r#"{"suites": []}"#).unwrap();
    let b = run(&cfg).unwrap();
    assert!(b.suites.is_empty());
    let s = b.summary(cfg.seed);
    assert!(s.passed && s.criteria.is_empty());
}

#[test]
fn unknown_suite_is_a_config_error() {
    let mut cfg = ExperimentConfig::default();
    cfg.suites = vec!["bogus".into()];
    match run(&cfg) {
        Err(CliError::ConfigInvalid { pointer, .. }) => assert_eq!(pointer, "/suites/0"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn schema_errors_carry_json_pointers() {
    for (text, pointer) in [
        (r#"{"grid": {"half_widths": [8, 8], "samples": [256, "x"]}}"#, "/grid/samples/1"),
        (r#"{"triplet": {"p": 2, "q": 2, "s": "auto"}}"#, "/triplet/p"),
        (r#"{"triplet": {"p": 1, "q": 2, "s": "some"}}"#, "/triplet/s"),
        (r#"{"dilations": [{"matrix": [[0.5]]}, {"matrix": [[2]]}]}"#, "/dilations/0"),
        (r#"{"colour": 1}"#, "/colour"),
    ] {
        match ExperimentConfig::from_json(text) {
            Err(CliError::ConfigInvalid { pointer: p, .. }) => assert_eq!(p, pointer, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
}

#[test]
fn geometry_suite_reports_dilation_constants() {
    let cfg = ExperimentConfig::from_json(r#"{"suites": ["geometry"], "geometry_dilations": [{"matrix": [[2]]}, {"matrix": [[3]]}]}"#).unwrap();
    let b = run(&cfg).unwrap();
    let t = b.suites[0].tables.iter().find(|t| t.name == "axioms").unwrap();
    let col = |name: &str| t.columns.iter().position(|c| c == name).unwrap();
    for (row, base) in t.rows.iter().zip([2.0, 3.0]) {
        assert_eq!(row[col("b")].as_f64().unwrap(), base);
        assert_eq!(row[col("sigma")].as_u64().unwrap(), 1);
        assert!((row[col("zeta_minus")].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!((row[col("zeta_plus")].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
    assert!(b.suites[0].passed(), "{:?}", b.suites[0].criteria);
}

#[test]
fn binary_writes_a_bundle_and_reports_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"suites": []}"#).unwrap();
    let out = dir.path().join("out");
    let st = bin().args(["verify", "--config"]).arg(&cfg).arg("--output").arg(&out).args(["--seed", "7"]).status().unwrap();
    assert!(st.success());
    let s = read_summary(&out).unwrap();
    assert_eq!(s.seed, 7);
    assert!(out.join("metadata.json").exists() && out.join("config.json").exists());
    let rep = bin().args(["report", "--config"]).arg(&cfg).arg("--dir").arg(&out).output().unwrap();
    assert!(rep.status.success());
    assert!(String::from_utf8(rep.stdout).unwrap().contains("seed 7 overall PASS"));
}

#[test]
fn binary_rejects_bad_configs_with_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"suites": ["nope"]}"#).unwrap();
    let o = bin().args(["info", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("/suites/0"));
}

#[test]
fn info_prints_the_resolved_config() {
    let o = bin().args(["info", "--seed", "11"]).output().unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 11);
    assert_eq!(v["dilations"][0]["b"], 2.0);
}

#[test]
fn decompose_reads_a_saved_field() {
    use aniso_hardy_cli::suites::decompose::{setup, Bump};
    use rand::SeedableRng;
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"grid": {"half_widths": [8, 8], "samples": [128, 128]}}"#;
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(&cfg_path, text).unwrap();
    let cfg = ExperimentConfig::from_json(text).unwrap();
    let st = setup(&cfg, cfg.grid.samples, None).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let f = Bump::random(&mut rng, cfg.grid.half_widths).field(&st.system);
    let input = dir.path().join("f.field");
    aniso_hardy::field::save_field(&input, &f).unwrap();
    let o = bin().args(["decompose", "--config"]).arg(&cfg_path).arg("--input").arg(&input).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["reconstruction_error"].as_f64().unwrap() < 1e-6);
    let atoms = v["atoms"].as_array().unwrap();
    assert!(!atoms.is_empty() && atoms.iter().all(|a| a["valid"] == true));
}

#[test]
fn build_frames_prints_certificates() {
    let o = bin().arg("build-frames").output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["certificates"]["support_exact"], true);
    assert!(v["certificates"]["pairing_error"].as_f64().unwrap() < 1e-10);
}
