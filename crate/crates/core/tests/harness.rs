use std::fs;
use std::path::Path;

use flad_core::analysis::parse_jsd_matrix_csv;
use flad_core::datagen::{load_dataset, FEATURE_NAMES, FLOW_LENGTH_FEATURE};
use flad_core::harness::*;
use flad_core::Error;

const ATTACKS: &str = r#"attacks = ["WebDDoS", "LDAP", "Syn", "DNS", "NTP"]"#;

fn quiet(_: &str) {}

fn config(extra: &str) -> ExperimentConfig {
    let text = format!(
        r#"
seed = 11
[data]
{ATTACKS}
base_count = 20
max_per_class = 160
[model]
hidden_units = 8
[federation]
patience = 3
max_rounds = 12
{extra}
"#
    );
    let cfg = ExperimentConfig::parse(&text).unwrap();
    cfg.validate().unwrap();
    cfg
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_is_deterministic_and_hashes_its_files() {
    let cfg = config("");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = cmd_generate(&cfg, a.path(), &quiet).unwrap();
    let mb = cmd_generate(&cfg, b.path(), &quiet).unwrap();
    assert_eq!(ma, mb);
    assert_eq!(ma.datasets.len(), 5);
    for e in &ma.datasets {
        let path = a.path().join("datasets").join(&e.file);
        let bytes = fs::read(&path).unwrap();
        assert_eq!(sha256_hex(&bytes), e.sha256);
        assert_eq!(bytes, fs::read(b.path().join("datasets").join(&e.file)).unwrap());
        let split = load_dataset(&path).unwrap();
        assert_eq!(split.attack_tag(), e.attack);
        assert_eq!((split.train.len(), split.validation.len(), split.test.len()), (e.train, e.validation, e.test));
    }
    let on_disk: Manifest = read_json(&a.path().join("datasets/manifest.json"));
    assert_eq!(on_disk, ma);
}

#[test]
fn missing_library_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.toml");
    fs::write(&path, "[data]\nlibrary = \"nope.toml\"\n").unwrap();
    let err = ExperimentConfig::load(&path).unwrap_err();
    assert!(matches!(err, Error::Config(ref m) if m.contains("nope.toml")), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn unknown_strategy_and_keys_are_rejected() {
    assert!(matches!(ExperimentConfig::parse("bogus = 1"), Err(Error::Config(_))));
    let cfg = ExperimentConfig::parse("[[strategy]]\nname = \"fedprox\"\n").unwrap();
    assert!(matches!(cfg.validate(), Err(Error::Config(m)) if m.contains("fedprox")));
}

#[test]
fn train_summary_matches_round_logs_and_repeats_exactly() {
    let cfg = config("[[strategy]]\nname = \"flad\"\n[[strategy]]\nname = \"fedavg\"\nepochs = 1\nbatch_size = 50\n");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let sa = cmd_train(&cfg, a.path(), &quiet).unwrap();
    let sb = cmd_train(&cfg, b.path(), &quiet).unwrap();
    assert_eq!(sa, sb);
    assert_eq!(
        fs::read(a.path().join("train/summary.csv")).unwrap(),
        fs::read(b.path().join("train/summary.csv")).unwrap()
    );
    let flad = &sa.strategies[0];
    let fedavg = &sa.strategies[1];
    let reference_rounds = flad.runs[0].summary.rounds;
    assert_eq!(fedavg.runs[0].summary.rounds, reference_rounds);
    for result in &sa.strategies {
        let run = &result.runs[0];
        let log = fs::read_to_string(a.path().join(format!("train/rep00/{}.jsonl", result.label))).unwrap();
        assert!(log.ends_with('\n') && !log.contains('\r'));
        let reports: Vec<serde_json::Value> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(reports.len() as u32, run.summary.rounds);
        let total: f64 = reports.iter().map(|r| r["round_seconds"].as_f64().unwrap()).sum();
        assert!((total - run.summary.total_simulated_seconds).abs() <= 1e-6);
        let best = reports.iter().map(|r| r["mean_accuracy"].as_f64().unwrap()).fold(0.0, f64::max);
        assert!((best - run.summary.best_mean_f1).abs() <= 1e-12);
        assert!(a.path().join(format!("train/rep00/{}.flmp", result.label)).is_file());
    }
    assert!(a.path().join("effective_config.toml").is_file());
    let reparsed = ExperimentConfig::parse(&fs::read_to_string(a.path().join("effective_config.toml")).unwrap()).unwrap();
    assert_eq!(reparsed.strategy, cfg.strategy);
}

#[test]
fn retraining_chains_models_between_stages() {
    let cfg = config("");
    let dir = tempfile::tempdir().unwrap();
    let s = cmd_retrain(&cfg, dir.path(), &quiet).unwrap();
    assert_eq!(s.stages.len(), 4);
    assert_eq!(s.stages.iter().map(|st| st.clients).collect::<Vec<_>>(), vec![2, 3, 4, 5]);
    for pair in s.records.windows(2) {
        assert_eq!(pair[1].initial_model_sha256, pair[0].best_model_sha256);
        assert_eq!(pair[1].clients.len(), pair[0].clients.len() + 1);
        assert_eq!(pair[1].clients[..pair[0].clients.len()], pair[0].clients[..]);
        assert_eq!(pair[1].clients.last().unwrap(), &pair[1].added);
    }
    for r in &s.records {
        assert!(dir.path().join(format!("retrain/rep00/stage{:02}.jsonl", r.stage)).is_file());
    }
    let on_disk: RetrainSummary = read_json(&dir.path().join("retrain/summary.json"));
    assert_eq!(on_disk, s);
}

#[test]
fn scalability_reports_every_size_and_rejects_oversized_federations() {
    let mut cfg = config("[scalability]\nsizes = [5, 8]\n");
    let dir = tempfile::tempdir().unwrap();
    let rows = cmd_scalability(&cfg, dir.path(), &quiet).unwrap();
    assert_eq!(rows.iter().map(|r| r.clients).collect::<Vec<_>>(), vec![5, 8]);
    for r in &rows {
        assert!(r.rounds.mean >= 4.0);
        assert!(dir.path().join(format!("scalability/size{:03}/rep00.jsonl", r.clients)).is_file());
    }
    let csv = fs::read_to_string(dir.path().join("scalability/scalability.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    cfg.scalability.sizes = vec![16];
    let err = cmd_scalability(&cfg, dir.path(), &quiet).unwrap_err();
    assert!(matches!(err, Error::Capacity(_) | Error::Config(_)), "{err}");
}

fn brute_jsd(p: &[f64], q: &[f64]) -> f64 {
    let kl = |a: &[f64], m: &[f64]| -> f64 {
        a.iter().zip(m).filter(|(x, _)| **x > 0.0).map(|(x, y)| x * (x / y).log2()).sum()
    };
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    (0.5 * kl(p, &m) + 0.5 * kl(q, &m)).max(0.0).sqrt()
}

fn brute_hist(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    for &v in values {
        let i = (((v - lo) / (hi - lo)) * bins as f64).floor();
        h[(i.max(0.0) as usize).min(bins - 1)] += 1.0;
    }
    let n = values.len() as f64;
    h.iter_mut().for_each(|x| *x /= n);
    h
}

#[test]
fn analyze_matrix_matches_a_brute_force_recomputation() {
    let cfg = config("[analyze]\nfeatures = [\"Flow Length\", \"Packet Length\"]\nbins = 20\n");
    let dir = tempfile::tempdir().unwrap();
    let summary = cmd_analyze(&cfg, dir.path(), &quiet).unwrap();
    let from_csv = parse_jsd_matrix_csv(&fs::read_to_string(dir.path().join("analyze/jsd_matrix.csv")).unwrap()).unwrap();
    assert_eq!(from_csv.attacks, summary.matrix.attacks);

    let lib = load_library(&cfg).unwrap();
    let sets: Vec<Vec<flad_core::datagen::FlowSample>> = attack_datasets(&cfg, &lib.library)
        .unwrap()
        .into_iter()
        .map(|s| s.samples().filter(|x| x.label() == 1).cloned().collect())
        .collect();
    let pl = FEATURE_NAMES.iter().position(|f| *f == "Packet Length").unwrap();
    let values = |set: &[flad_core::datagen::FlowSample], feature: &str| -> Vec<f64> {
        if feature == FLOW_LENGTH_FEATURE {
            set.iter().map(|s| s.flow_length() as f64).collect()
        } else {
            set.iter().flat_map(|s| (0..s.flow_length()).map(move |r| f64::from(s.packet(r)[pl]))).collect()
        }
    };
    for (j, feature) in ["Flow Length", "Packet Length"].iter().enumerate() {
        let all: Vec<Vec<f64>> = sets.iter().map(|s| values(s, feature)).collect();
        let lo = all.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let mut hi = all.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            hi = lo + 1.0;
        }
        let hists: Vec<Vec<f64>> = all.iter().map(|v| brute_hist(v, lo, hi, 20)).collect();
        for i in 0..hists.len() {
            let mean = (0..hists.len()).filter(|&k| k != i).map(|k| brute_jsd(&hists[i], &hists[k])).sum::<f64>()
                / (hists.len() - 1) as f64;
            let got = summary.matrix.values[i][j];
            assert!((got - mean).abs() <= 1e-6, "{feature} {i}: {got} vs {mean}");
            assert!((from_csv.values[i][j] - got).abs() <= 1e-9);
        }
    }
}
