//! `FLND` dataset file.
//!
//! ```text
//! "FLND" | version u16 | n u16 | f u16 | count u32
//!        | partition u8 * count          (0 train, 1 validation, 2 test)
//!        | tag count u16 | (len u16, utf-8 bytes) * tag count
//!        | per sample: tag index u16, label u8, f32 * (n*f)
//!        | crc32 u32
//! ```
//! Little-endian throughout; the CRC covers every preceding byte. Samples are
//! stored train first, then validation, then test.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use super::sample::{padding_violation, DatasetSplit, FlowSample, Partition, FEATURES, FLOW_WIDTH, PACKETS};
use crate::nn::codec::{check_envelope, Reader};
use crate::{Error, Result};

pub const DATASET_MAGIC: &[u8; 4] = b"FLND";
pub const DATASET_VERSION: u16 = 1;

pub fn encode_dataset(split: &DatasetSplit) -> Vec<u8> {
    let count = split.len();
    let mut tags: Vec<&str> = Vec::new();
    let mut tag_index: HashMap<&str, u16> = HashMap::new();
    for s in split.samples() {
        let t = s.attack_tag();
        if !tag_index.contains_key(t) {
            tag_index.insert(t, tags.len() as u16);
            tags.push(t);
        }
    }
    let mut out = Vec::with_capacity(20 + count * (3 + 4 * FLOW_WIDTH));
    out.extend_from_slice(DATASET_MAGIC);
    out.extend_from_slice(&DATASET_VERSION.to_le_bytes());
    out.extend_from_slice(&(PACKETS as u16).to_le_bytes());
    out.extend_from_slice(&(FEATURES as u16).to_le_bytes());
    out.extend_from_slice(&(count as u32).to_le_bytes());
    for (part, samples) in split.partitions() {
        out.extend(std::iter::repeat_n(part as u8, samples.len()));
    }
    out.extend_from_slice(&(tags.len() as u16).to_le_bytes());
    for t in &tags {
        out.extend_from_slice(&(t.len() as u16).to_le_bytes());
        out.extend_from_slice(t.as_bytes());
    }
    for s in split.samples() {
        out.extend_from_slice(&tag_index[s.attack_tag()].to_le_bytes());
        out.push(s.label());
        for v in s.features() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn decode_dataset(buf: &[u8]) -> Result<DatasetSplit> {
    let payload = check_envelope(buf, DATASET_MAGIC)?;
    let mut r = Reader::new(payload);
    r.take(4, "magic")?;
    let version = r.u16("version")?;
    if version != DATASET_VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let n = r.u16("n")? as usize;
    let f = r.u16("f")? as usize;
    if (n, f) != (PACKETS, FEATURES) {
        return Err(Error::format(
            6,
            format!("sample shape {n}x{f}, expected {PACKETS}x{FEATURES}"),
        ));
    }
    let count = r.u32("sample count")? as usize;
    let membership = r.take(count, "partition table")?.to_vec();
    let tag_count = r.u16("tag count")? as usize;
    let mut tags: Vec<Arc<str>> = Vec::with_capacity(tag_count);
    for _ in 0..tag_count {
        let len = r.u16("tag length")? as usize;
        let at = r.pos();
        let bytes = r.take(len, "tag")?;
        let s = std::str::from_utf8(bytes).map_err(|_| Error::format(at, "tag is not utf-8"))?;
        tags.push(Arc::from(s));
    }
    let mut split = DatasetSplit::default();
    let mut last = 0u8;
    for (i, &part) in membership.iter().enumerate() {
        let at = r.pos();
        let tag = r.u16("tag index")? as usize;
        let label = r.u8("label")?;
        let features = r.f32s(FLOW_WIDTH, "features")?;
        let tag = tags
            .get(tag)
            .ok_or_else(|| Error::format(at, format!("sample {i}: tag index {tag} out of range")))?;
        if label > 1 {
            return Err(Error::format(at + 2, format!("sample {i}: label {label} is not binary")));
        }
        if padding_violation(&features).is_some() {
            return Err(Error::format(at + 3, format!("sample {i}: non-contiguous padding")));
        }
        if part < last {
            return Err(Error::format(
                14 + i,
                format!("sample {i}: partitions must be stored train, validation, test"),
            ));
        }
        last = part;
        let sample = FlowSample::new_unchecked(features, label, tag.clone());
        match part {
            p if p == Partition::Train as u8 => split.train.push(sample),
            p if p == Partition::Validation as u8 => split.validation.push(sample),
            p if p == Partition::Test as u8 => split.test.push(sample),
            p => return Err(Error::format(14 + i, format!("sample {i}: bad partition {p}"))),
        }
    }
    if r.pos() != payload.len() {
        return Err(Error::format(r.pos(), format!("{} trailing bytes", payload.len() - r.pos())));
    }
    Ok(split)
}

/// Write atomically: a temporary sibling file is renamed into place.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn save_dataset(split: &DatasetSplit, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &encode_dataset(split))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<DatasetSplit> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_dataset(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> DatasetSplit {
        let mk = |v: f32, label: u8, tag: &str| {
            let mut f = vec![0.0; FLOW_WIDTH];
            f[1] = v;
            FlowSample::new(f, label, tag).unwrap()
        };
        DatasetSplit {
            train: vec![mk(40.0, 1, "Syn")],
            validation: vec![mk(66.0, 0, "benign")],
            test: vec![mk(1.5, 1, "Syn")],
        }
    }

    #[test]
    fn three_sample_round_trip() {
        let d = tiny();
        let bytes = encode_dataset(&d);
        assert_eq!(&bytes[..4], b"FLND");
        assert_eq!(decode_dataset(&bytes).unwrap(), d);
    }

    #[test]
    fn truncation_and_corruption_are_format_errors() {
        let bytes = encode_dataset(&tiny());
        for cut in 0..bytes.len() {
            assert!(matches!(decode_dataset(&bytes[..cut]), Err(Error::Format { .. })), "cut {cut}");
        }
        let mut bad = bytes.clone();
        bad[30] ^= 0x80;
        assert!(matches!(decode_dataset(&bad), Err(Error::Format { .. })));
    }

    #[test]
    fn empty_split_is_valid() {
        let bytes = encode_dataset(&DatasetSplit::default());
        let d = decode_dataset(&bytes).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.flnd");
        save_dataset(&tiny(), &p).unwrap();
        assert_eq!(load_dataset(&p).unwrap(), tiny());
    }
}
