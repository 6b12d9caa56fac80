//! Packed execution traces.
//!
//! A trace is a flat array of `(u64 identity hash, u32 stack depth)` pairs,
//! one per step, recorded before the step executes. On the wire and on disk
//! each pair is 12 bytes, little-endian. Trace files prefix the packed array
//! with the magic `ECHOTRC1`.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TRACE_MAGIC: &[u8; 8] = b"ECHOTRC1";
pub const ENTRY_BYTES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceEntry {
    pub identity_hash: u64,
    pub stack_depth: u32,
}

impl TraceEntry {
    pub fn new(identity_hash: u64, stack_depth: u32) -> Self {
        TraceEntry {
            identity_hash,
            stack_depth,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
    /// The step budget ran out before the execution ended.
    pub truncated: bool,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum TraceFormatError {
    #[error("packed trace length {0} is not a multiple of 12")]
    Misaligned(usize),
    #[error("missing ECHOTRC1 header")]
    BadMagic,
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn pack_entries(entries: &[TraceEntry]) -> Vec<u8> {
    let mut out = Vec::with_capacity(entries.len() * ENTRY_BYTES);
    for e in entries {
        out.extend_from_slice(&e.identity_hash.to_le_bytes());
        out.extend_from_slice(&e.stack_depth.to_le_bytes());
    }
    out
}

pub fn unpack_entries(bytes: &[u8]) -> Result<Vec<TraceEntry>, TraceFormatError> {
    if !bytes.len().is_multiple_of(ENTRY_BYTES) {
        return Err(TraceFormatError::Misaligned(bytes.len()));
    }
    Ok(bytes
        .chunks_exact(ENTRY_BYTES)
        .map(|c| TraceEntry {
            identity_hash: u64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
            stack_depth: u32::from_le_bytes(c[8..].try_into().expect("4 bytes")),
        })
        .collect())
}

pub fn write_trace_file<W: Write>(mut w: W, entries: &[TraceEntry]) -> io::Result<()> {
    w.write_all(TRACE_MAGIC)?;
    w.write_all(&pack_entries(entries))?;
    w.flush()
}

pub fn read_trace_file<R: Read>(mut r: R) -> Result<Vec<TraceEntry>, TraceFormatError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let body = bytes
        .strip_prefix(TRACE_MAGIC.as_slice())
        .ok_or(TraceFormatError::BadMagic)?;
    unpack_entries(body)
}
