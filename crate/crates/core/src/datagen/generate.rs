use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::library::{AttackLibrary, SyntheticAttackSpec, Transport};
use super::sample::{DatasetSplit, FlowSample, BENIGN_TAG, FEATURES, FLOW_WIDTH, PACKETS};
use super::split::split_dataset;
use crate::{derive_seed, seed, Error, Result};

/// Upper bound on generated samples per class.
pub const DEFAULT_MAX_PER_CLASS: u64 = 65536;

/// Length of the capture window a flow fragment is cut from, in seconds.
const WINDOW_SECONDS: f64 = 10.0;
const IP_HEADER: f64 = 20.0;
const IP_TCP_HEADERS: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    /// Attack samples for the first (smallest) class; doubled for each
    /// subsequent class.
    pub base_count: u64,
    pub max_per_class: u64,
    pub clients: usize,
    pub attacks_per_client: usize,
    pub seed: u64,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            base_count: 202,
            max_per_class: DEFAULT_MAX_PER_CLASS,
            clients: 13,
            attacks_per_client: 1,
            seed: 0,
        }
    }
}

fn one_sample<R: Rng + ?Sized>(spec: &SyntheticAttackSpec, label: u8, tag: &Arc<str>, rng: &mut R) -> FlowSample {
    let flow_len = (spec.flow_length.sample(rng).round() as usize).clamp(1, PACKETS);
    let mut features = vec![0.0f32; FLOW_WIDTH];
    let mut time = 0.0f64;
    for row in features.chunks_exact_mut(FEATURES).take(flow_len).enumerate() {
        let (i, row) = row;
        if i > 0 {
            time = (time + spec.inter_arrival.sample(rng)).min(WINDOW_SECONDS);
        }
        let len = spec.packet_length.sample(rng).round().max(1.0);
        row[0] = time as f32;
        row[1] = len as f32;
        row[2] = spec.highest_protocol.sample(rng).round() as f32;
        row[3] = spec.ip_flags.sample(rng).round() as f32;
        row[4] = spec.protocols.sample(rng).round() as f32;
        match spec.protocol {
            Transport::Tcp => {
                row[5] = (len - IP_TCP_HEADERS).max(0.0) as f32;
                row[6] = spec.tcp_ack.sample(rng).round() as f32;
                row[7] = spec.tcp_flags.sample(rng).round() as f32;
                row[8] = spec.tcp_window.sample(rng).round() as f32;
            }
            Transport::Udp => {
                row[9] = (len - IP_HEADER).max(8.0) as f32;
            }
        }
        row[10] = spec.icmp_type.sample(rng).round() as f32;
    }
    FlowSample::new_unchecked(features, label, tag.clone())
}

/// Draw `count` samples of one traffic class.
pub fn generate_samples<R: Rng + ?Sized>(
    spec: &SyntheticAttackSpec,
    label: u8,
    count: usize,
    rng: &mut R,
) -> Vec<FlowSample> {
    let tag: Arc<str> = if label == 0 {
        Arc::from(BENIGN_TAG)
    } else {
        Arc::from(spec.name.as_str())
    };
    (0..count).map(|_| one_sample(spec, label, &tag, rng)).collect()
}

fn benign_samples<R: Rng + ?Sized>(profiles: &[SyntheticAttackSpec], count: usize, rng: &mut R) -> Vec<FlowSample> {
    let tag: Arc<str> = Arc::from(BENIGN_TAG);
    let total: f64 = profiles.iter().map(|p| p.share).sum();
    (0..count)
        .map(|_| {
            let mut u = rng.gen::<f64>() * total;
            let mut chosen = profiles.last().unwrap();
            for p in profiles {
                if u < p.share {
                    chosen = p;
                    break;
                }
                u -= p.share;
            }
            one_sample(chosen, 0, &tag, rng)
        })
        .collect()
}

fn class_size(base_count: u64, index: usize, max_per_class: u64) -> u64 {
    let doubled = if index >= 63 {
        u64::MAX
    } else {
        base_count.saturating_mul(1u64 << index)
    };
    doubled.min(max_per_class)
}

/// One balanced, split dataset per attack in the library: attack `k` gets
/// `base_count * 2^k` samples (capped at `max_per_class`) plus as many benign
/// samples.
pub fn generate_attack_datasets(
    library: &AttackLibrary,
    base_count: u64,
    max_per_class: u64,
    seed: u64,
) -> Result<Vec<DatasetSplit>> {
    library.validate()?;
    if base_count < 20 {
        return Err(Error::InvalidInput(format!(
            "base_count must be at least 20, got {base_count}"
        )));
    }
    if max_per_class < 5 {
        return Err(Error::InvalidInput(format!(
            "max_per_class must be at least 5, got {max_per_class}"
        )));
    }
    library
        .attack
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            let count = spec
                .sample_count
                .unwrap_or_else(|| class_size(base_count, k, max_per_class)) as usize;
            let mut rng = seed::rng(derive_seed!(seed, "attack", spec.name.as_str()));
            let mut samples = generate_samples(spec, 1, count, &mut rng);
            let mut rng = seed::rng(derive_seed!(seed, "benign", spec.name.as_str()));
            samples.extend(benign_samples(&library.benign, count, &mut rng));
            split_dataset(&samples, derive_seed!(seed, "split", spec.name.as_str()))
        })
        .collect()
}

/// Number of distinct local datasets that can be built from `attacks`
/// classes: singles, plus unordered pairs when two attacks per client are
/// allowed.
pub fn federation_capacity(attacks: usize, attacks_per_client: usize) -> usize {
    match attacks_per_client {
        1 => attacks,
        _ => attacks + attacks * attacks.saturating_sub(1) / 2,
    }
}

/// Build client datasets from per-attack datasets.
///
/// With one attack per client, client `i` holds attack `i`. With two, the
/// first clients hold one attack each and the remainder hold distinct pairs
/// drawn at random.
pub fn assemble_clients(
    per_attack: &[DatasetSplit],
    clients: usize,
    attacks_per_client: usize,
    seed: u64,
) -> Result<Vec<DatasetSplit>> {
    if !(1..=2).contains(&attacks_per_client) {
        return Err(Error::InvalidInput(format!(
            "attacks_per_client must be 1 or 2, got {attacks_per_client}"
        )));
    }
    if clients == 0 {
        return Err(Error::InvalidInput("need at least one client".into()));
    }
    let n = per_attack.len();
    let cap = federation_capacity(n, attacks_per_client);
    if clients > cap {
        return Err(Error::Capacity(if attacks_per_client == 1 {
            format!("{clients} clients requested but {n} attacks allow at most {cap} one-attack clients")
        } else {
            format!(
                "{clients} clients requested but {n} attacks allow at most {cap} ({n} singles + {} pairs)",
                cap - n
            )
        }));
    }
    let mut out: Vec<DatasetSplit> = per_attack.iter().take(clients).cloned().collect();
    if clients > n {
        let mut pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        pairs.shuffle(&mut seed::rng(derive_seed!(seed, "pairs")));
        for &(i, j) in pairs.iter().take(clients - n) {
            out.push(DatasetSplit::union(&[&per_attack[i], &per_attack[j]]));
        }
    }
    Ok(out)
}

pub fn generate_federation_data(
    library: &AttackLibrary,
    params: &GenerationParams,
) -> Result<Vec<DatasetSplit>> {
    if !(1..=2).contains(&params.attacks_per_client) {
        return Err(Error::InvalidInput(format!(
            "attacks_per_client must be 1 or 2, got {}",
            params.attacks_per_client
        )));
    }
    let cap = federation_capacity(library.attack.len(), params.attacks_per_client);
    if params.clients > cap {
        return Err(Error::Capacity(format!(
            "{} clients requested, at most {cap} distinct local datasets available",
            params.clients
        )));
    }
    let per_attack =
        generate_attack_datasets(library, params.base_count, params.max_per_class, params.seed)?;
    assemble_clients(&per_attack, params.clients, params.attacks_per_client, params.seed)
}
