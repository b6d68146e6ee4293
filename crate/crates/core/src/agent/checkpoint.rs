//! Versioned binary parameter checkpoints.
//!
//! Layout (all integers and reals little-endian):
//!
//! ```text
//! 0   8  magic  b"CBETCKPT"
//! 8   4  format version (u32)
//! 12  1  stream role (0 intrinsic, 1 extrinsic)
//! 13  3  reserved, zero
//! 16  4  input_dim (u32)
//! 20  4  width (u32)
//! 24  4  n_actions (u32)
//! 28  8  parameter count (u64)
//! 36  .. parameters as f64, in the stream's flat order
//! ```

use std::path::Path;

use super::stream::{AgentStream, StreamRole, StreamShape};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"CBETCKPT";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 36;

pub fn to_bytes(stream: &AgentStream) -> Vec<u8> {
    let shape = stream.shape();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * stream.params().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&[stream.role().code(), 0, 0, 0]);
    out.extend_from_slice(&(shape.input_dim as u32).to_le_bytes());
    out.extend_from_slice(&(shape.width as u32).to_le_bytes());
    out.extend_from_slice(&(shape.n_actions as u32).to_le_bytes());
    out.extend_from_slice(&(stream.params().len() as u64).to_le_bytes());
    for p in stream.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

pub fn from_bytes(bytes: &[u8]) -> Result<AgentStream> {
    let err = |m: String| Err(Error::Checkpoint(m));
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return err("not a checkpoint (bad magic)".into());
    }
    let version = u32_at(bytes, 8);
    if version != FORMAT_VERSION {
        return err(format!("version mismatch: file has {version}, expected {FORMAT_VERSION}"));
    }
    let Some(role) = StreamRole::from_code(bytes[12]) else {
        return err(format!("unknown stream role code {}", bytes[12]));
    };
    let shape = StreamShape {
        input_dim: u32_at(bytes, 16) as usize,
        width: u32_at(bytes, 20) as usize,
        n_actions: u32_at(bytes, 24) as usize,
    };
    let count = u64::from_le_bytes(bytes[28..36].try_into().expect("8 bytes")) as usize;
    if count != shape.param_count() {
        return err(format!(
            "parameter count {count} inconsistent with shape {shape:?} ({} expected)",
            shape.param_count()
        ));
    }
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * count {
        return err(format!("truncated body: {} bytes for {count} parameters", body.len()));
    }
    let params = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(AgentStream::from_params(role, shape, params).expect("count checked"))
}

pub fn save(stream: &AgentStream, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(stream)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<AgentStream> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    fn sample() -> AgentStream {
        AgentStream::init(StreamRole::Intrinsic, StreamShape::new(4), &mut stream(3, Stream::AgentInit, 0))
    }

    #[test]
    fn round_trip_is_exact() {
        let s = sample();
        assert_eq!(from_bytes(&to_bytes(&s)).unwrap(), s);
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let mut bytes = to_bytes(&sample());
        bytes[8] = 2;
        let e = from_bytes(&bytes).unwrap_err();
        assert!(e.to_string().contains("version mismatch"), "{e}");
    }

    #[test]
    fn corrupt_headers_are_rejected() {
        let good = to_bytes(&sample());
        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(from_bytes(&bad_magic).is_err());
        assert!(from_bytes(&good[..good.len() - 1]).is_err());
        let mut bad_width = good;
        bad_width[20] = 5;
        assert!(from_bytes(&bad_width).is_err());
    }
}
