use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::data::{attack_datasets, data_seed, load_library};
use super::io::{sha256_hex, slug, write_file, write_json};
use super::run::Progress;
use crate::datagen::encode_dataset;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub attack: String,
    pub sha256: String,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub benign: usize,
    pub ddos: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub library_sha256: String,
    pub library_version: u32,
    pub seed: u64,
    pub base_count: u64,
    pub max_per_class: u64,
    pub datasets: Vec<ManifestEntry>,
}

/// One FLND file per attack under `out/datasets/`, plus `manifest.json`.
pub fn cmd_generate(cfg: &ExperimentConfig, out: &Path, progress: Progress) -> Result<Manifest> {
    cfg.validate()?;
    let lib = load_library(cfg)?;
    let dir = out.join("datasets");
    let mut entries = Vec::new();
    for (k, split) in attack_datasets(cfg, &lib.library)?.iter().enumerate() {
        let attack = split.attack_tag();
        let file = format!("{k:02}-{}.flnd", slug(&attack));
        let bytes = encode_dataset(split);
        write_file(&dir.join(&file), &bytes)?;
        let [benign, ddos] = split.class_counts();
        progress(&format!("{file}: {} samples", split.len()));
        entries.push(ManifestEntry {
            file,
            attack,
            sha256: sha256_hex(&bytes),
            train: split.train.len(),
            validation: split.validation.len(),
            test: split.test.len(),
            benign,
            ddos,
        });
    }
    let manifest = Manifest {
        library_sha256: lib.sha256,
        library_version: lib.library.version,
        seed: data_seed(cfg),
        base_count: cfg.data.base_count,
        max_per_class: cfg.data.max_per_class,
        datasets: entries,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}
