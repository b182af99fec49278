use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn flad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flad")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str = r#"
[data]
attacks = ["WebDDoS", "LDAP", "Syn"]
base_count = 20
max_per_class = 80
[model]
hidden_units = 8
[federation]
patience = 2
max_rounds = 6
"#;

#[test]
fn generate_writes_datasets_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = flad(&["generate", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "3", "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stderr.is_empty());
    assert!(out.join("datasets/manifest.json").is_file());
    let flnd = fs::read_dir(out.join("datasets")).unwrap().filter(|e| {
        e.as_ref().unwrap().path().extension().is_some_and(|x| x == "flnd")
    });
    assert_eq!(flnd.count(), 3);
}

#[test]
fn train_writes_summary_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = flad(&["train", "--config", &cfg, "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["train/summary.json", "train/summary.csv", "train/tpr.csv", "effective_config.toml"] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn config_problems_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    let o = flad(&["train", "--config", missing.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());

    let cfg = write_config(dir.path(), "[federation]\nunknown_key = 1\n");
    assert_eq!(flad(&["train", "--config", &cfg, "--quiet"]).status.code(), Some(2));

    let cfg = write_config(dir.path(), "[scalability]\nsizes = [500]\n");
    let o = flad(&["scalability", "--config", &cfg, "--out", dir.path().to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corrupt_dataset_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.flnd");
    fs::write(&bad, b"FLND garbage").unwrap();
    let other = dir.path().join("other.flnd");
    fs::write(&other, b"not a dataset").unwrap();
    let cfg = write_config(dir.path(), "[analyze]\ndatasets = [\"bad.flnd\", \"other.flnd\"]\n");
    let o = flad(&["analyze", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = flad(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}
