//! The AMCD container.
//!
//! Little-endian layout:
//!
//! ```text
//! "AMCD" | version: u16 | header_len: u32 | header: UTF-8 JSON
//! payload: n_examples × ( class: u16 | snr_db: f32 | ratio: f32 | 2·L × f32 )
//! crc32(payload): u32
//! ```
//!
//! The sample block of each example is the in-phase row followed by the
//! quadrature row.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::dataset::{Dataset, Example, Header};
use crate::error::{FormatError, Result};

pub const MAGIC: [u8; 4] = *b"AMCD";
pub const FORMAT_VERSION: u16 = 1;

const PREAMBLE_LEN: usize = 4 + 2 + 4;

fn record_len(seq_len: usize) -> usize {
    2 + 4 + 4 + 8 * seq_len
}

pub fn to_bytes(dataset: &Dataset) -> Result<Vec<u8>> {
    dataset.validate()?;
    let header = serde_json::to_vec(&dataset.header).expect("header serializes");
    let header_len = u32::try_from(header.len()).map_err(|_| FormatError::Header("header exceeds 4 GiB".into()))?;
    let payload_len = dataset.examples.len() * record_len(dataset.header.seq_len);

    let mut out = Vec::with_capacity(PREAMBLE_LEN + header.len() + payload_len + 4);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&header_len.to_le_bytes());
    out.extend_from_slice(&header);
    let payload_start = out.len();
    for e in &dataset.examples {
        out.extend_from_slice(&e.class.to_le_bytes());
        out.extend_from_slice(&e.snr_db.to_le_bytes());
        out.extend_from_slice(&e.ratio.to_le_bytes());
        for v in &e.iq {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out[payload_start..]);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], FormatError> {
        let available = self.buf.len() - self.pos;
        if n > available {
            return Err(FormatError::Truncated { needed: self.pos + n, available: self.buf.len() });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> std::result::Result<[u8; N], FormatError> {
        Ok(self.take(N)?.try_into().unwrap())
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<Dataset> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic: [u8; 4] = r.array()?;
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic).into());
    }
    let version = u16::from_le_bytes(r.array()?);
    if version != FORMAT_VERSION {
        return Err(FormatError::VersionMismatch { found: version, expected: FORMAT_VERSION }.into());
    }
    let header_len = u32::from_le_bytes(r.array()?) as usize;
    let header: Header =
        serde_json::from_slice(r.take(header_len)?).map_err(|e| FormatError::Header(e.to_string()))?;

    let rec = record_len(header.seq_len);
    let payload_len = header
        .n_examples
        .checked_mul(rec)
        .ok_or_else(|| FormatError::Header("example count overflows".into()))?;
    let payload = r.take(payload_len)?;
    let stored = u32::from_le_bytes(r.array()?);
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(FormatError::Checksum { stored, computed }.into());
    }
    if r.pos != bytes.len() {
        return Err(FormatError::TrailingBytes(bytes.len() - r.pos).into());
    }

    let examples = payload
        .chunks_exact(rec)
        .map(|chunk| {
            let f = |i: usize| f32::from_le_bytes(chunk[i..i + 4].try_into().unwrap());
            Example {
                class: u16::from_le_bytes([chunk[0], chunk[1]]),
                snr_db: f(2),
                ratio: f(6),
                iq: (0..2 * header.seq_len).map(|k| f(10 + 4 * k)).collect(),
            }
        })
        .collect();
    let dataset = Dataset { header, examples };
    dataset.validate().map_err(|e| FormatError::Header(e.to_string()))?;
    Ok(dataset)
}

pub fn save(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_bytes(dataset)?)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Dataset> {
    from_bytes(&fs::read(path)?)
}

/// Hex SHA-256 of a byte buffer, used in provenance summaries.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
