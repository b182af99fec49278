use rand::seq::SliceRandom;

use super::sample::{DatasetSplit, FlowSample};
use crate::{seed, Error, Result};

/// Share of all samples held out for testing.
pub const TEST_FRACTION: f64 = 0.10;
/// Share of the remaining training portion reserved for validation.
pub const VALIDATION_FRACTION: f64 = 0.10;

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Stratified train/validation/test split.
///
/// The test partition takes `round(0.1 * n)` samples, validation takes
/// `round(0.1 * (n - test))`; each partition's quota is shared between the two
/// classes in proportion to their sizes. Partitions are shuffled.
pub fn split_dataset(samples: &[FlowSample], seed: u64) -> Result<DatasetSplit> {
    if samples.len() < 10 {
        return Err(Error::Stratification(format!(
            "need at least 10 samples, got {}",
            samples.len()
        )));
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, s) in samples.iter().enumerate() {
        by_class[s.label() as usize].push(i);
    }
    if by_class.iter().any(Vec::is_empty) {
        return Err(Error::Stratification(
            "both benign and DDoS samples are required".into(),
        ));
    }
    let mut rng = seed::rng(seed);
    for idx in by_class.iter_mut() {
        idx.shuffle(&mut rng);
    }

    let n = samples.len();
    let n_pos = by_class[1].len();
    let test_total = round_half_up(TEST_FRACTION * n as f64);
    let val_total = round_half_up(VALIDATION_FRACTION * (n - test_total) as f64);
    let share = |total: usize, pos_avail: usize, neg_avail: usize| {
        let pos = round_half_up(total as f64 * n_pos as f64 / n as f64)
            .min(pos_avail)
            .max(total.saturating_sub(neg_avail));
        (total - pos, pos)
    };
    let (test_neg, test_pos) = share(test_total, by_class[1].len(), by_class[0].len());
    let (val_neg, val_pos) = share(
        val_total,
        by_class[1].len() - test_pos,
        by_class[0].len() - test_neg,
    );

    let take = |class: usize, from: usize, count: usize| -> Vec<usize> {
        by_class[class][from..from + count].to_vec()
    };
    let mut test_idx = take(0, 0, test_neg);
    test_idx.extend(take(1, 0, test_pos));
    let mut val_idx = take(0, test_neg, val_neg);
    val_idx.extend(take(1, test_pos, val_pos));
    let mut train_idx: Vec<usize> = by_class[0][test_neg + val_neg..].to_vec();
    train_idx.extend_from_slice(&by_class[1][test_pos + val_pos..]);

    let mut collect = |mut idx: Vec<usize>| -> Vec<FlowSample> {
        idx.shuffle(&mut rng);
        idx.into_iter().map(|i| samples[i].clone()).collect()
    };
    Ok(DatasetSplit {
        train: collect(train_idx),
        validation: collect(val_idx),
        test: collect(test_idx),
    })
}
