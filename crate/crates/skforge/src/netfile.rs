//! Binary net files.
//!
//! Little-endian layout: magic `SKNET1`, 32-byte gate-set hash, `u32` max
//! word length, `f64` dedupe radius, `u32` entry count, then per entry a
//! `u32` word length, `u16` letter codes and four `f64` coordinates. A
//! trailing SHA-256 covers everything before it.

use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};
use skforge_core::basenet::{GateSet, Net, NetEntry, NetParams};
use skforge_core::su2::Quat;
use skforge_core::words::{Letter, Word};
use thiserror::Error;

pub const MAGIC: &[u8; 6] = b"SKNET1";

#[derive(Debug, Error)]
pub enum NetFileError {
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("not a version-1 net file")]
    VersionMismatch,
    #[error("corrupt net file: {0}")]
    CorruptFile(String),
    #[error("net was built for gate set {found}, expected {expected}")]
    GateSetMismatch { expected: String, found: String },
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn encode(net: &Net, gate_hash: &[u8; 32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + net.entries().len() * 48);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(gate_hash);
    out.extend_from_slice(&(net.params().max_len as u32).to_le_bytes());
    out.extend_from_slice(&net.params().delta_d.to_le_bytes());
    out.extend_from_slice(&(net.entries().len() as u32).to_le_bytes());
    for e in net.entries() {
        out.extend_from_slice(&(e.word.len() as u32).to_le_bytes());
        for l in e.word.letters() {
            out.extend_from_slice(&l.code().to_le_bytes());
        }
        for x in e.quat.0 {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    let sum = Sha256::digest(&out);
    out.extend_from_slice(&sum);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NetFileError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| NetFileError::CorruptFile("unexpected end of data".into()))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, NetFileError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u16(&mut self) -> Result<u16, NetFileError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, NetFileError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8], gates: &GateSet, gate_hash: &[u8; 32]) -> Result<Net, NetFileError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(NetFileError::VersionMismatch);
    }
    if bytes.len() < MAGIC.len() + 32 + 32 {
        return Err(NetFileError::CorruptFile("file too short".into()));
    }
    let (body, sum) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != sum {
        return Err(NetFileError::CorruptFile("checksum mismatch".into()));
    }
    let mut r = Reader { bytes: body, at: MAGIC.len() };
    let found = r.take(32)?;
    if found != gate_hash {
        return Err(NetFileError::GateSetMismatch { expected: hex(gate_hash), found: hex(found) });
    }
    let max_len = r.u32()? as usize;
    let delta_d = r.f64()?;
    let count = r.u32()? as usize;
    let letters = 2 * gates.generator_count() as u16;
    let mut entries = Vec::with_capacity(count.min(body.len() / 36));
    for _ in 0..count {
        let len = r.u32()? as usize;
        let mut word = Vec::with_capacity(len.min(max_len));
        for _ in 0..len {
            let code = r.u16()?;
            if code >= letters {
                return Err(NetFileError::CorruptFile(format!("letter code {code} out of range")));
            }
            word.push(Letter::from_code(code));
        }
        let quat = Quat([r.f64()?, r.f64()?, r.f64()?, r.f64()?]);
        entries.push(NetEntry { word: Word::reduce(word), quat });
    }
    if r.at != body.len() {
        return Err(NetFileError::CorruptFile("trailing bytes".into()));
    }
    // Spot-check one entry in a hundred against its word.
    for e in entries.iter().step_by(100) {
        if gates.evaluate_f64(&e.word).projective_chord(&e.quat) > 1e-9 {
            return Err(NetFileError::CorruptFile("entry does not match its word".into()));
        }
    }
    Ok(Net::from_entries(entries, NetParams { max_len, delta_d }))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn save(net: &Net, gate_hash: &[u8; 32], path: &Path) -> Result<(), NetFileError> {
    let io = |source| NetFileError::Io { path: path.display().to_string(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(&encode(net, gate_hash)).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn load(path: &Path, gates: &GateSet, gate_hash: &[u8; 32]) -> Result<Net, NetFileError> {
    let bytes = std::fs::read(path).map_err(|source| NetFileError::Io { path: path.display().to_string(), source })?;
    decode(&bytes, gates, gate_hash)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateset;

    fn small() -> (gateset::LoadedGateSet, Net) {
        let gs = gateset::parse(gateset::CLIFFORD_T).unwrap();
        let net = Net::build(&gs.gates, NetParams { max_len: 6, delta_d: 1e-4 });
        (gs, net)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (gs, net) = small();
        let back = decode(&encode(&net, &gs.hash), &gs.gates, &gs.hash).unwrap();
        assert_eq!(back.entries().len(), net.entries().len());
        for (a, b) in back.entries().iter().zip(net.entries()) {
            assert_eq!(a.word, b.word);
            assert_eq!(a.quat.0.map(f64::to_bits), b.quat.0.map(f64::to_bits));
        }
        assert_eq!(back.params(), net.params());
    }

    #[test]
    fn damaged_files_are_rejected() {
        let (gs, net) = small();
        let bytes = encode(&net, &gs.hash);
        let truncated = &bytes[..bytes.len() / 2];
        assert!(matches!(decode(truncated, &gs.gates, &gs.hash), Err(NetFileError::CorruptFile(_))));
        let mut flipped = bytes.clone();
        flipped[100] ^= 1;
        assert!(matches!(decode(&flipped, &gs.gates, &gs.hash), Err(NetFileError::CorruptFile(_))));
        let mut magic = bytes.clone();
        magic[5] = b'2';
        assert!(matches!(decode(&magic, &gs.gates, &gs.hash), Err(NetFileError::VersionMismatch)));
        let other = [7u8; 32];
        assert!(matches!(decode(&bytes, &gs.gates, &other), Err(NetFileError::GateSetMismatch { .. })));
    }
}
