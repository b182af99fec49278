use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Probabilities at or above this value are classified as DDoS.
pub const DEFAULT_THRESHOLD: f32 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Tally predictions; `p >= threshold` counts as a positive prediction.
pub fn confusion(probs: &[f32], labels: &[u8], threshold: f32) -> Result<ConfusionCounts> {
    if probs.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} probabilities but {} labels",
            probs.len(),
            labels.len()
        )));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidInput(format!(
            "threshold must lie in (0,1), got {threshold}"
        )));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &y) in probs.iter().zip(labels) {
        match (p >= threshold, y == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Recall of the DDoS class. Zero when there are no positives.
pub fn tpr(c: &ConfusionCounts) -> f64 {
    ratio(c.tp, c.tp + c.fn_)
}

/// Zero when nothing was predicted positive.
pub fn precision(c: &ConfusionCounts) -> f64 {
    ratio(c.tp, c.tp + c.fp)
}

/// Harmonic mean of precision and TPR; zero when both are zero.
pub fn f1_score(c: &ConfusionCounts) -> f64 {
    let (p, r) = (precision(c), tpr(c));
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn confusion_examples() {
        let c = confusion(&[0.9, 0.1], &[1, 0], 0.5).unwrap();
        assert_eq!(c, ConfusionCounts { tp: 1, fp: 0, tn: 1, fn_: 0 });
        let c = confusion(&[0.5; 4], &[1, 0, 0, 1], 0.5).unwrap();
        assert_eq!((c.tp, c.fp, c.tn, c.fn_), (2, 2, 0, 0));
        assert!(confusion(&[0.5], &[1, 0], 0.5).is_err());
        assert!(confusion(&[0.5], &[1], 1.0).is_err());
    }

    #[test]
    fn metric_examples() {
        let c = ConfusionCounts { tp: 8, fp: 2, tn: 0, fn_: 2 };
        assert!((precision(&c) - 0.8).abs() < 1e-12);
        assert!((tpr(&c) - 0.8).abs() < 1e-12);
        assert!((f1_score(&c) - 0.8).abs() < 1e-12);
        assert_eq!(f1_score(&ConfusionCounts { tp: 5, fp: 0, tn: 3, fn_: 0 }), 1.0);
        assert_eq!(f1_score(&ConfusionCounts { tp: 0, fp: 0, tn: 3, fn_: 4 }), 0.0);
        assert_eq!(f1_score(&ConfusionCounts::default()), 0.0);
    }

    #[test]
    fn tally_matches_brute_force() {
        let mut rng = crate::seed::rng(50);
        use rand::Rng;
        let probs: Vec<f32> = (0..50).map(|_| rng.gen()).collect();
        let labels: Vec<u8> = (0..50).map(|_| rng.gen_range(0..2)).collect();
        let c = confusion(&probs, &labels, 0.5).unwrap();
        let mut tp = 0;
        let mut fp = 0;
        let mut tn = 0;
        let mut fn_ = 0;
        for i in 0..50 {
            let pred = probs[i] >= 0.5;
            let pos = labels[i] == 1;
            if pred && pos {
                tp += 1
            } else if pred {
                fp += 1
            } else if pos {
                fn_ += 1
            } else {
                tn += 1
            }
        }
        assert_eq!(c, ConfusionCounts { tp, fp, tn, fn_ });
        assert_eq!(c.total(), 50);
    }

    proptest! {
        #[test]
        fn f1_is_harmonic_mean(tp in 0u64..500, fp in 0u64..500, fn_ in 0u64..500) {
            let c = ConfusionCounts { tp, fp, tn: 0, fn_ };
            let f1 = f1_score(&c);
            prop_assert!((0.0..=1.0).contains(&f1));
            let (p, r) = (precision(&c), tpr(&c));
            if p > 0.0 && r > 0.0 {
                prop_assert!((f1 - 2.0 / (1.0 / p + 1.0 / r)).abs() <= 1e-12);
            }
        }

        #[test]
        fn raising_threshold_is_monotone(
            data in proptest::collection::vec((0.0f32..1.0, 0u8..2), 1..60),
            t1 in 0.01f32..0.99,
            t2 in 0.01f32..0.99,
        ) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let (probs, labels): (Vec<f32>, Vec<u8>) = data.into_iter().unzip();
            let a = confusion(&probs, &labels, lo).unwrap();
            let b = confusion(&probs, &labels, hi).unwrap();
            prop_assert!(b.tp <= a.tp);
            prop_assert!(b.tn >= a.tn);
        }
    }
}
