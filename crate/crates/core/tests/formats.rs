mod common;

use common::{bits, model, split};
use flad_core::datagen::{decode_dataset, encode_dataset};
use flad_core::nn::{decode_params, encode_params};
use flad_core::Error;
use proptest::prelude::*;


proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dataset_round_trip_is_bitwise(s in split()) {
        let decoded = decode_dataset(&encode_dataset(&s)).unwrap();
        prop_assert_eq!(bits(&decoded), bits(&s));
    }

    #[test]
    fn model_round_trip_is_bitwise(m in model()) {
        let decoded = decode_params(&encode_params(&m)).unwrap();
        prop_assert_eq!(decoded.layer_dims(), m.layer_dims());
        let a: Vec<u32> = decoded.to_flat().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u32> = m.to_flat().iter().map(|v| v.to_bits()).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn damaged_datasets_are_format_errors(s in split(), pos in any::<prop::sample::Index>(), flip in 1u8..=255, cut in any::<prop::sample::Index>()) {
        let bytes = encode_dataset(&s);
        let mut bad = bytes.clone();
        let i = pos.index(bad.len());
        bad[i] ^= flip;
        let flipped = decode_dataset(&bad);
        prop_assert!(matches!(flipped, Err(Error::Format { .. })), "flip at {}", i);
        let n = cut.index(bytes.len());
        let truncated = decode_dataset(&bytes[..n]);
        prop_assert!(matches!(truncated, Err(Error::Format { .. })), "cut at {}", n);
    }

    #[test]
    fn damaged_models_are_format_errors(m in model(), pos in any::<prop::sample::Index>(), flip in 1u8..=255, cut in any::<prop::sample::Index>()) {
        let bytes = encode_params(&m);
        let mut bad = bytes.clone();
        let i = pos.index(bad.len());
        bad[i] ^= flip;
        prop_assert!(matches!(decode_params(&bad), Err(Error::Format { .. })), "flip at {}", i);
        let n = cut.index(bytes.len());
        prop_assert!(matches!(decode_params(&bytes[..n]), Err(Error::Format { .. })), "cut at {}", n);
    }
}
