//! Versioned binary container shared by model and prompt checkpoints.
//!
//! Layout (little endian):
//! `magic[4] | version u32 | ndims u32 | dims u64 × ndims | len u64 |
//! payload f64 × len | sha256(all preceding bytes)[32]`.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

pub(crate) fn encode(magic: &[u8; 4], dims: &[usize], payload: &[f64]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(24 + 8 * (dims.len() + payload.len()) + DIGEST_LEN);
    buf.extend_from_slice(magic);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        buf.extend_from_slice(&(d as u64).to_le_bytes());
    }
    buf.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    for v in payload {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);
    buf
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::CorruptCheckpoint("file is truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Decodes a container, returning `(dims, payload)`.
pub(crate) fn decode(magic: &[u8; 4], buf: &[u8]) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4)? != magic {
        return Err(Error::CorruptCheckpoint(format!(
            "bad magic, expected {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    if buf.len() < DIGEST_LEN {
        return Err(Error::CorruptCheckpoint("file is truncated".into()));
    }
    let (body, digest) = buf.split_at(buf.len() - DIGEST_LEN);
    if Sha256::digest(body).as_slice() != digest {
        return Err(Error::CorruptCheckpoint("checksum mismatch".into()));
    }
    let r = &mut Reader { buf: body, pos: r.pos };
    let ndims = r.u32()? as usize;
    let dims = (0..ndims)
        .map(|_| r.u64().map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    let len = r.u64()? as usize;
    if body.len() - r.pos != len.saturating_mul(8) {
        return Err(Error::CorruptCheckpoint("payload length mismatch".into()));
    }
    let payload = r
        .take(len * 8)?
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((dims, payload))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_corruption() {
        let bytes = encode(b"TEST", &[2, 3], &[1.0, -0.0, f64::MIN_POSITIVE]);
        let (dims, payload) = decode(b"TEST", &bytes).unwrap();
        assert_eq!(dims, vec![2, 3]);
        assert_eq!(payload[1].to_bits(), (-0.0f64).to_bits());

        assert!(matches!(decode(b"TEST", &bytes[..bytes.len() - 5]), Err(Error::CorruptCheckpoint(_))));
        assert!(matches!(decode(b"TEST", &bytes[..6]), Err(Error::CorruptCheckpoint(_))));
        assert!(matches!(decode(b"NOPE", &bytes), Err(Error::CorruptCheckpoint(_))));

        let mut flipped = bytes.clone();
        flipped[30] ^= 1;
        assert!(matches!(decode(b"TEST", &flipped), Err(Error::CorruptCheckpoint(_))));

        let mut bumped = bytes.clone();
        bumped[4] = 2;
        assert!(matches!(
            decode(b"TEST", &bumped),
            Err(Error::UnsupportedVersion { found: 2, expected: 1 })
        ));
    }
}
