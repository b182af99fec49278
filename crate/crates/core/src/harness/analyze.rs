use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::data::{attack_datasets, load_library};
use super::io::{slug, write_file, write_json};
use super::run::Progress;
use crate::analysis::{
    feature_values, histogram, histogram_csv, jsd_matrix_csv, jsd_matrix_with_ranges, shared_ranges, JsdMatrix,
};
use crate::datagen::{feature_index, load_dataset, DatasetSplit, FlowSample, FLOW_LENGTH_FEATURE};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeSummary {
    pub datasets: Vec<String>,
    pub features: Vec<String>,
    pub bins: usize,
    /// `(dataset, feature)` pairs without any value, replaced by a uniform
    /// density.
    pub empty_histograms: Vec<(String, String)>,
    pub matrix: JsdMatrix,
}

/// DDoS samples of a dataset, or every sample when it holds no attack.
fn attack_samples(split: &DatasetSplit) -> Vec<FlowSample> {
    let attacks: Vec<FlowSample> = split.samples().filter(|s| s.label() == 1).cloned().collect();
    if attacks.is_empty() {
        split.samples().cloned().collect()
    } else {
        attacks
    }
}

/// JSD matrix and per-feature histograms of the configured datasets, written
/// to `out/analyze/`.
pub fn cmd_analyze(cfg: &ExperimentConfig, out: &Path, progress: Progress) -> Result<AnalyzeSummary> {
    cfg.validate()?;
    let datasets: Vec<(String, Vec<FlowSample>)> = if cfg.analyze.datasets.is_empty() {
        let lib = load_library(cfg)?;
        attack_datasets(cfg, &lib.library)?
            .into_iter()
            .map(|s| (s.attack_tag(), attack_samples(&s)))
            .collect()
    } else {
        cfg.analyze
            .datasets
            .iter()
            .map(|p| {
                let s = load_dataset(p)?;
                let tag = match s.attack_tag() {
                    t if t.is_empty() => p.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                    t => t,
                };
                Ok((tag, attack_samples(&s)))
            })
            .collect::<Result<_>>()?
    };
    if datasets.len() < 2 {
        return Err(Error::Config(format!("analysis needs at least 2 datasets, got {}", datasets.len())));
    }
    let features = cfg.analyze.feature_list();
    if let Some(f) = features.iter().find(|f| *f != FLOW_LENGTH_FEATURE && feature_index(f).is_none()) {
        return Err(Error::Config(format!("unknown feature {f:?}")));
    }
    let names: Vec<&str> = features.iter().map(String::as_str).collect();
    let bins = cfg.analyze.bins;
    let ranges = shared_ranges(&datasets, &names)?;
    let matrix = jsd_matrix_with_ranges(&datasets, &names, bins, &ranges)?;
    let dir = out.join("analyze");
    write_file(&dir.join("jsd_matrix.csv"), jsd_matrix_csv(&matrix)?.as_bytes())?;

    let mut empty = Vec::new();
    for (i, (tag, samples)) in datasets.iter().enumerate() {
        for (f, &range) in names.iter().zip(&ranges) {
            let h = histogram(f, &feature_values(samples, f)?, bins, range)?;
            if h.empty_input {
                empty.push((tag.clone(), f.to_string()));
            }
            let path = dir.join("histograms").join(format!("{i:02}-{}", slug(tag))).join(format!("{}.csv", slug(f)));
            write_file(&path, histogram_csv(&h)?.as_bytes())?;
        }
    }
    progress(&format!("{} datasets x {} features analysed", datasets.len(), names.len()));
    let summary = AnalyzeSummary {
        datasets: datasets.iter().map(|(t, _)| t.clone()).collect(),
        features,
        bins,
        empty_histograms: empty,
        matrix,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}
