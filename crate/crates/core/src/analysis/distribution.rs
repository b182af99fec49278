use serde::{Deserialize, Serialize};

use crate::datagen::{feature_index, FlowSample, FLOW_LENGTH_FEATURE};
use crate::{Error, Result};

pub const DEFAULT_BINS: usize = 100;

/// Empirical probability mass over fixed-width bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureHistogram {
    pub feature_name: String,
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    /// Set when the input was empty and a uniform density was substituted.
    pub empty_input: bool,
}

/// Fixed-width histogram over `[lo, hi]`; out-of-range values land in the
/// edge bins. Densities sum to one.
pub fn histogram(
    feature_name: &str,
    values: &[f64],
    bins: usize,
    range: (f64, f64),
) -> Result<FeatureHistogram> {
    let (lo, hi) = range;
    if bins == 0 {
        return Err(Error::InvalidInput("histogram needs at least one bin".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidInput(format!("invalid histogram range ({lo}, {hi})")));
    }
    let width = (hi - lo) / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 })
        .collect();
    if values.is_empty() {
        return Ok(FeatureHistogram {
            feature_name: feature_name.to_string(),
            bin_edges,
            densities: vec![1.0 / bins as f64; bins],
            empty_input: true,
        });
    }
    let mut counts = vec![0u64; bins];
    for &v in values {
        let idx = ((v - lo) / width).floor();
        let idx = if idx.is_nan() || idx < 0.0 {
            0
        } else {
            (idx as usize).min(bins - 1)
        };
        counts[idx] += 1;
    }
    let total = values.len() as f64;
    Ok(FeatureHistogram {
        feature_name: feature_name.to_string(),
        bin_edges,
        densities: counts.iter().map(|&c| c as f64 / total).collect(),
        empty_input: false,
    })
}

/// Jensen-Shannon distance with base-2 logarithms, in `[0, 1]`.
pub fn jsd(p: &FeatureHistogram, q: &FeatureHistogram) -> Result<f64> {
    if p.bin_edges != q.bin_edges {
        return Err(Error::InvalidInput(format!(
            "histograms of {:?} and {:?} use different bin edges",
            p.feature_name, q.feature_name
        )));
    }
    let term = |a: f64, m: f64| if a > 0.0 { a * (a / m).log2() } else { 0.0 };
    let mut div = 0.0;
    for (&a, &b) in p.densities.iter().zip(&q.densities) {
        let m = 0.5 * (a + b);
        div += 0.5 * term(a, m) + 0.5 * term(b, m);
    }
    Ok(div.max(0.0).sqrt().min(1.0))
}

/// Values of one attribute across samples. Packet attributes are taken from
/// real (non-padding) rows only; `Flow Length` yields one value per sample.
pub fn feature_values<'a>(
    samples: impl IntoIterator<Item = &'a FlowSample>,
    feature: &str,
) -> Result<Vec<f64>> {
    if feature == FLOW_LENGTH_FEATURE {
        return Ok(samples.into_iter().map(|s| s.flow_length() as f64).collect());
    }
    let j = feature_index(feature)
        .ok_or_else(|| Error::InvalidInput(format!("unknown feature {feature:?}")))?;
    let mut out = Vec::new();
    for s in samples {
        for r in 0..s.flow_length() {
            out.push(s.packet(r)[j] as f64);
        }
    }
    Ok(out)
}

/// Row `i`, column `j`: mean distance between dataset `i` and every other
/// dataset on feature `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsdMatrix {
    pub attacks: Vec<String>,
    pub features: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

/// Global `[min, max]` of every feature across all datasets, widened when
/// degenerate.
pub fn shared_ranges(datasets: &[(String, Vec<FlowSample>)], features: &[&str]) -> Result<Vec<(f64, f64)>> {
    features
        .iter()
        .map(|f| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (_, samples) in datasets {
                for v in feature_values(samples, f)? {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            if !lo.is_finite() {
                return Ok((0.0, 1.0));
            }
            if hi <= lo {
                hi = lo + 1.0;
            }
            Ok((lo, hi))
        })
        .collect()
}

pub fn jsd_matrix(datasets: &[(String, Vec<FlowSample>)], features: &[&str], bins: usize) -> Result<JsdMatrix> {
    let ranges = shared_ranges(datasets, features)?;
    jsd_matrix_with_ranges(datasets, features, bins, &ranges)
}

pub fn jsd_matrix_with_ranges(
    datasets: &[(String, Vec<FlowSample>)],
    features: &[&str],
    bins: usize,
    ranges: &[(f64, f64)],
) -> Result<JsdMatrix> {
    if datasets.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least two datasets, got {}",
            datasets.len()
        )));
    }
    if ranges.len() != features.len() {
        return Err(Error::InvalidInput("one range per feature is required".into()));
    }
    let mut hists: Vec<Vec<FeatureHistogram>> = Vec::with_capacity(datasets.len());
    for (_, samples) in datasets {
        let row = features
            .iter()
            .zip(ranges)
            .map(|(f, &r)| histogram(f, &feature_values(samples, f)?, bins, r))
            .collect::<Result<Vec<_>>>()?;
        hists.push(row);
    }
    let n = datasets.len();
    let mut values = vec![vec![0.0; features.len()]; n];
    for j in 0..features.len() {
        let mut pair = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in a + 1..n {
                let d = jsd(&hists[a][j], &hists[b][j])?;
                pair[a][b] = d;
                pair[b][a] = d;
            }
        }
        for i in 0..n {
            let sum: f64 = (0..n).filter(|&k| k != i).map(|k| pair[i][k]).sum();
            values[i][j] = sum / (n - 1) as f64;
        }
    }
    Ok(JsdMatrix {
        attacks: datasets.iter().map(|(t, _)| t.clone()).collect(),
        features: features.iter().map(|f| f.to_string()).collect(),
        values,
    })
}
