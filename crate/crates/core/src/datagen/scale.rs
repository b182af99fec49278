use serde::{Deserialize, Serialize};

use super::sample::{DatasetSplit, FlowSample, FEATURES};

/// Per-attribute min-max scaling to `[0, 1]`.
///
/// The range always includes zero so that padding rows stay exactly zero and
/// real packets never collapse into padding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: [f32; FEATURES],
    pub max: [f32; FEATURES],
}

impl MinMaxScaler {
    pub fn fit<'a>(samples: impl IntoIterator<Item = &'a FlowSample>) -> Self {
        let mut min = [0.0f32; FEATURES];
        let mut max = [0.0f32; FEATURES];
        for s in samples {
            for row in 0..s.flow_length() {
                for (j, &v) in s.packet(row).iter().enumerate() {
                    min[j] = min[j].min(v);
                    max[j] = max[j].max(v);
                }
            }
        }
        Self { min, max }
    }

    /// Fit on the training partitions only.
    pub fn fit_training<'a>(splits: impl IntoIterator<Item = &'a DatasetSplit>) -> Self {
        Self::fit(splits.into_iter().flat_map(|s| s.train.iter()))
    }

    pub fn transform(&self, sample: &FlowSample) -> FlowSample {
        sample.map_features(|j, v| {
            let span = self.max[j] - self.min[j];
            if span > 0.0 {
                (v - self.min[j]) / span
            } else {
                0.0
            }
        })
    }

    pub fn transform_split(&self, split: &DatasetSplit) -> DatasetSplit {
        let t = |v: &[FlowSample]| v.iter().map(|s| self.transform(s)).collect();
        DatasetSplit {
            train: t(&split.train),
            validation: t(&split.validation),
            test: t(&split.test),
        }
    }
}
