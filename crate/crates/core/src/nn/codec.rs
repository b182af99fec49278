//! `FLMP` binary record for [`ModelParams`].
//!
//! ```text
//! "FLMP" | version u16 | dim count u16 | dims u32 * count
//!        | per layer: weights f32 (row-major), biases f32 | crc32 u32
//! ```
//! All integers and floats are little-endian; the CRC covers every preceding
//! byte.

use super::ModelParams;
use crate::{Error, Result};

pub const MODEL_MAGIC: &[u8; 4] = b"FLMP";
pub const MODEL_VERSION: u16 = 1;

pub fn encode_params(params: &ModelParams) -> Vec<u8> {
    let dims = params.layer_dims();
    let mut out = Vec::with_capacity(12 + 4 * dims.len() + 4 * params.num_params());
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    out.extend_from_slice(&(dims.len() as u16).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for t in params.tensors() {
        for v in t {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub(crate) fn pos(&self) -> usize {
        self.pos
    }

    pub(crate) fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::format(
                self.pos,
                format!(
                    "truncated while reading {what}: need {n} bytes, {} left",
                    self.buf.len() - self.pos
                ),
            ));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub(crate) fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    pub(crate) fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    pub(crate) fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    pub(crate) fn f32s(&mut self, n: usize, what: &str) -> Result<Vec<f32>> {
        let bytes = self.take(n.checked_mul(4).ok_or_else(|| Error::format(self.pos, "length overflow"))?, what)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

/// Verify the trailing CRC and magic, returning the payload without the CRC.
pub(crate) fn check_envelope<'a>(buf: &'a [u8], magic: &[u8; 4]) -> Result<&'a [u8]> {
    if buf.len() < 4 || &buf[..4] != magic {
        return Err(Error::format(
            0,
            format!("bad magic, expected {:?}", std::str::from_utf8(magic).unwrap()),
        ));
    }
    if buf.len() < 8 {
        return Err(Error::format(buf.len(), "truncated before checksum"));
    }
    let (payload, crc) = buf.split_at(buf.len() - 4);
    let stored = u32::from_le_bytes(crc.try_into().unwrap());
    let actual = crc32fast::hash(payload);
    if stored != actual {
        return Err(Error::format(
            payload.len(),
            format!("checksum mismatch: stored {stored:08x}, computed {actual:08x}"),
        ));
    }
    Ok(payload)
}

pub fn decode_params(buf: &[u8]) -> Result<ModelParams> {
    let payload = check_envelope(buf, MODEL_MAGIC)?;
    let mut r = Reader::new(payload);
    r.take(4, "magic")?;
    let version = r.u16("version")?;
    if version != MODEL_VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let count = r.u16("dim count")? as usize;
    let mut dims = Vec::with_capacity(count);
    for _ in 0..count {
        dims.push(r.u32("layer dim")? as usize);
    }
    if count < 2 {
        return Err(Error::format(6, format!("need at least two dims, got {count}")));
    }
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for pair in dims.windows(2) {
        let n = pair[0]
            .checked_mul(pair[1])
            .ok_or_else(|| Error::format(r.pos(), "layer size overflow"))?;
        weights.push(r.f32s(n, "weights")?);
        biases.push(r.f32s(pair[1], "biases")?);
    }
    if r.pos() != payload.len() {
        return Err(Error::format(
            r.pos(),
            format!("{} trailing bytes", payload.len() - r.pos()),
        ));
    }
    ModelParams::from_parts(dims, weights, biases).map_err(|e| Error::format(6, e.to_string()))
}
