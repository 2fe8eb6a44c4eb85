//! Gate-set JSON files.
//!
//! A file is an array of `{ "name", "matrix", "inverse_of"? }` where `matrix`
//! is a 2x2 complex matrix given either as `[[[re, im], [re, im]], [[re, im],
//! [re, im]]]` or as four row-major `[re, im]` pairs.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use skforge_core::basenet::{GateSet, GateSpec, Matrix, NetError};
use thiserror::Error;

/// The bundled Clifford+T set.
pub const CLIFFORD_T: &str = include_str!("../data/clifford_t.json");

#[derive(Debug, Error)]
pub enum GateFileError {
    #[error("cannot read gate set {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed gate set: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] NetError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixJson {
    Nested([[[f64; 2]; 2]; 2]),
    Flat([[f64; 2]; 4]),
}

impl MatrixJson {
    fn to_matrix(&self) -> Matrix {
        let e = |v: [f64; 2]| (v[0], v[1]);
        match *self {
            MatrixJson::Nested(m) => [[e(m[0][0]), e(m[0][1])], [e(m[1][0]), e(m[1][1])]],
            MatrixJson::Flat(m) => [[e(m[0]), e(m[1])], [e(m[2]), e(m[3])]],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GateJson {
    name: String,
    matrix: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inverse_of: Option<String>,
}

/// A validated gate set plus the SHA-256 of its canonical JSON form.
#[derive(Debug, Clone)]
pub struct LoadedGateSet {
    pub gates: GateSet,
    pub hash: [u8; 32],
}

impl LoadedGateSet {
    pub fn hash_hex(&self) -> String {
        self.hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn parse(text: &str) -> Result<LoadedGateSet, GateFileError> {
    let raw: Vec<GateJson> = serde_json::from_str(text)?;
    // Hash a canonical rendering so whitespace and matrix layout do not matter.
    let canonical: Vec<GateJson> = raw
        .iter()
        .map(|g| {
            let m = g.matrix.to_matrix();
            let flat = [m[0][0], m[0][1], m[1][0], m[1][1]].map(|(re, im)| [re, im]);
            GateJson { name: g.name.clone(), matrix: MatrixJson::Flat(flat), inverse_of: g.inverse_of.clone() }
        })
        .collect();
    let hash: [u8; 32] = Sha256::digest(serde_json::to_vec(&canonical)?).into();
    let specs = raw
        .into_iter()
        .map(|g| GateSpec { matrix: g.matrix.to_matrix(), name: g.name, inverse_of: g.inverse_of })
        .collect();
    Ok(LoadedGateSet { gates: GateSet::new(specs)?, hash })
}

pub fn load(path: &Path) -> Result<LoadedGateSet, GateFileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| GateFileError::Io { path: path.display().to_string(), source })?;
    parse(&text)
}

/// `path`, or the bundled Clifford+T set when absent.
pub fn load_or_default(path: Option<&Path>) -> Result<LoadedGateSet, GateFileError> {
    match path {
        Some(p) => load(p),
        None => parse(CLIFFORD_T),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_set_loads() {
        let gs = parse(CLIFFORD_T).unwrap();
        assert_eq!(gs.gates.generator_count(), 2);
        assert_eq!(gs.hash_hex().len(), 64);
    }

    #[test]
    fn layout_does_not_change_hash() {
        let nested = r#"[{"name":"X","matrix":[[[0,0],[1,0]],[[1,0],[0,0]]]}]"#;
        let flat = r#"[ {"name": "X", "matrix": [[0,0],[1,0],[1,0],[0,0]]} ]"#;
        assert_eq!(parse(nested).unwrap().hash, parse(flat).unwrap().hash);
    }

    #[test]
    fn missing_inverse_is_rejected() {
        let t = r#"[{"name":"T","matrix":[[[0.9238795325112867,0.3826834323650898],[0,0]],[[0,0],[0.9238795325112867,-0.3826834323650898]]]}]"#;
        assert!(matches!(parse(t), Err(GateFileError::Invalid(NetError::NonSymmetricGateSet(_)))));
    }
}
