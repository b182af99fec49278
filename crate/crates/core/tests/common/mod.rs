#![allow(dead_code)]

use flad_core::datagen::{DatasetSplit, FlowSample, FEATURES, FLOW_WIDTH, PACKETS};
use flad_core::nn::ModelParams;
use proptest::prelude::*;

const TAGS: [&str; 4] = ["benign", "Syn", "DNS", "WebDDoS"];

pub fn sample() -> impl Strategy<Value = FlowSample> {
    (0..=PACKETS, proptest::collection::vec(-1e6f32..1e6, FLOW_WIDTH), 0usize..TAGS.len())
        .prop_map(|(rows, mut values, tag)| {
            for (i, row) in values.chunks_exact_mut(FEATURES).enumerate() {
                if i < rows {
                    // A real packet always has a length.
                    row[1] = row[1].abs().max(1.0);
                } else {
                    row.fill(0.0);
                }
            }
            FlowSample::new(values, u8::from(tag != 0), TAGS[tag]).unwrap()
        })
}

pub fn split() -> impl Strategy<Value = DatasetSplit> {
    let part = || proptest::collection::vec(sample(), 0..4);
    (part(), part(), part()).prop_map(|(train, validation, test)| DatasetSplit { train, validation, test })
}

pub fn model() -> impl Strategy<Value = ModelParams> {
    (1usize..8, 1usize..6, 1usize..6, any::<u64>()).prop_flat_map(|(i, h1, h2, _)| {
        let dims = vec![i, h1, h2, 1];
        let n = i * h1 + h1 + h1 * h2 + h2 + h2 + 1;
        proptest::collection::vec(any::<f32>().prop_filter("finite", |v| v.is_finite()), n).prop_map(move |flat| {
            let mut m = ModelParams::zeros(&dims).unwrap();
            let mut it = flat.into_iter();
            for t in m.tensors_mut() {
                for v in t.iter_mut() {
                    *v = it.next().unwrap();
                }
            }
            m
        })
    })
}

pub fn bits(s: &DatasetSplit) -> Vec<(u8, Vec<u32>, String, u8)> {
    s.partitions()
        .iter()
        .flat_map(|(p, samples)| {
            samples.iter().map(move |x| {
                (
                    *p as u8,
                    x.features().iter().map(|v| v.to_bits()).collect(),
                    x.attack_tag().to_string(),
                    x.label(),
                )
            })
        })
        .collect()
}
