use std::sync::Arc;

use crate::nn::Matrix;
use crate::{Error, Result};

/// Packets per flow sample (rows).
pub const PACKETS: usize = 10;
/// Attributes per packet (columns).
pub const FEATURES: usize = 11;
/// Length of a flattened sample.
pub const FLOW_WIDTH: usize = PACKETS * FEATURES;

pub const FEATURE_NAMES: [&str; FEATURES] = [
    "Time",
    "Packet Length",
    "Highest Protocol",
    "IP Flags",
    "Protocols",
    "TCP Length",
    "TCP Ack",
    "TCP Flags",
    "TCP Window Size",
    "UDP Length",
    "ICMP Type",
];

/// Derived per-sample feature: number of non-padding rows.
pub const FLOW_LENGTH_FEATURE: &str = "Flow Length";

pub const BENIGN_TAG: &str = "benign";

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|f| *f == name)
}

/// One traffic-flow fragment: `PACKETS x FEATURES` values, zero-padded below
/// the last real packet, plus its label (0 benign, 1 DDoS).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSample {
    features: Vec<f32>,
    label: u8,
    attack_tag: Arc<str>,
}

/// Index of the first row that breaks padding contiguity, if any.
pub(crate) fn padding_violation(features: &[f32]) -> Option<usize> {
    let mut seen_padding = false;
    for (i, row) in features.chunks_exact(FEATURES).enumerate() {
        let zero = row.iter().all(|&v| v == 0.0);
        if seen_padding && !zero {
            return Some(i);
        }
        seen_padding |= zero;
    }
    None
}

impl FlowSample {
    pub fn new(features: Vec<f32>, label: u8, attack_tag: impl Into<Arc<str>>) -> Result<Self> {
        if features.len() != FLOW_WIDTH {
            return Err(Error::Shape(format!(
                "flow sample needs {FLOW_WIDTH} values, got {}",
                features.len()
            )));
        }
        if label > 1 {
            return Err(Error::InvalidInput(format!("label {label} is not binary")));
        }
        if let Some(row) = padding_violation(&features) {
            return Err(Error::InvalidInput(format!(
                "packet row {row} follows a zero padding row"
            )));
        }
        Ok(Self {
            features,
            label,
            attack_tag: attack_tag.into(),
        })
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn new_unchecked(features: Vec<f32>, label: u8, attack_tag: Arc<str>) -> Self {
        Self {
            features,
            label,
            attack_tag,
        }
    }

    /// Row-major flattened values, packets in chronological order.
    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn label(&self) -> u8 {
        self.label
    }

    pub fn attack_tag(&self) -> &str {
        &self.attack_tag
    }

    pub(crate) fn tag_arc(&self) -> &Arc<str> {
        &self.attack_tag
    }

    pub fn packet(&self, row: usize) -> &[f32] {
        &self.features[row * FEATURES..(row + 1) * FEATURES]
    }

    /// Number of real (non-padding) packets.
    pub fn flow_length(&self) -> usize {
        self.features
            .chunks_exact(FEATURES)
            .take_while(|row| row.iter().any(|&v| v != 0.0))
            .count()
    }

    /// Applies `f(feature, value)` to every real packet row; padding rows stay zero.
    pub fn map_features(&self, f: impl Fn(usize, f32) -> f32) -> FlowSample {
        let len = self.flow_length();
        let mut out = self.features.clone();
        for (i, v) in out[..len * FEATURES].iter_mut().enumerate() {
            *v = f(i % FEATURES, *v);
        }
        FlowSample::new_unchecked(out, self.label, self.attack_tag.clone())
    }
}

/// Which partition of a [`DatasetSplit`] a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partition {
    Train = 0,
    Validation = 1,
    Test = 2,
}

/// Train/validation/test partitions of one local dataset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<FlowSample>,
    pub validation: Vec<FlowSample>,
    pub test: Vec<FlowSample>,
}

impl DatasetSplit {
    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn partitions(&self) -> [(Partition, &[FlowSample]); 3] {
        [
            (Partition::Train, &self.train),
            (Partition::Validation, &self.validation),
            (Partition::Test, &self.test),
        ]
    }

    pub fn samples(&self) -> impl Iterator<Item = &FlowSample> {
        self.train.iter().chain(&self.validation).chain(&self.test)
    }

    /// Distinct non-benign tags in order of first appearance, joined by `+`.
    pub fn attack_tag(&self) -> String {
        let mut tags: Vec<&str> = Vec::new();
        for s in self.samples() {
            let t = s.attack_tag();
            if t != BENIGN_TAG && !tags.contains(&t) {
                tags.push(t);
            }
        }
        tags.join("+")
    }

    /// `[benign, ddos]` sample counts over all partitions.
    pub fn class_counts(&self) -> [usize; 2] {
        let mut c = [0, 0];
        for s in self.samples() {
            c[s.label() as usize] += 1;
        }
        c
    }

    /// Partition-wise concatenation.
    pub fn union(parts: &[&DatasetSplit]) -> DatasetSplit {
        let mut out = DatasetSplit::default();
        for p in parts {
            out.train.extend(p.train.iter().cloned());
            out.validation.extend(p.validation.iter().cloned());
            out.test.extend(p.test.iter().cloned());
        }
        out
    }
}

/// Flatten samples into a model input matrix and a label vector.
pub fn to_matrix(samples: &[FlowSample]) -> (Matrix, Vec<u8>) {
    let mut data = Vec::with_capacity(samples.len() * FLOW_WIDTH);
    for s in samples {
        data.extend_from_slice(&s.features);
    }
    let labels = samples.iter().map(|s| s.label).collect();
    (
        Matrix::new(samples.len(), FLOW_WIDTH, data).expect("flow width is fixed"),
        labels,
    )
}
