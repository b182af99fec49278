//! Flow samples, synthetic non-IID dataset generation, splitting and the
//! on-disk dataset format.

mod csv_io;
mod format;
mod generate;
mod library;
mod sample;
mod scale;
mod split;

pub use csv_io::{csv_column_names, ingest_csv, write_csv};
pub(crate) use format::write_atomic;
pub use format::{decode_dataset, encode_dataset, load_dataset, save_dataset, DATASET_MAGIC, DATASET_VERSION};
pub use generate::{
    assemble_clients, federation_capacity, generate_attack_datasets, generate_federation_data,
    generate_samples, GenerationParams, DEFAULT_MAX_PER_CLASS,
};
pub use library::{AttackLibrary, Component, Distribution, SyntheticAttackSpec, Transport, BUILTIN_LIBRARY};
pub use sample::{
    feature_index, to_matrix, DatasetSplit, FlowSample, Partition, BENIGN_TAG, FEATURES, FEATURE_NAMES,
    FLOW_LENGTH_FEATURE, FLOW_WIDTH, PACKETS,
};
pub use scale::MinMaxScaler;
pub use split::{split_dataset, TEST_FRACTION, VALIDATION_FRACTION};
