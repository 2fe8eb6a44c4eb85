//! Run manifests: every parameter a bench run depends on.

use serde::Serialize;
use sha2::{Digest, Sha256};
use skforge_core::basenet::Net;
use skforge_core::steps::StepParams;
use skforge_core::zigzag::SynthParams;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct NetInfo {
    pub max_len: usize,
    pub delta_d: f64,
    pub entries: usize,
    pub covering_estimate: f64,
}

impl NetInfo {
    pub fn of(net: &Net) -> Self {
        let p = net.params();
        NetInfo { max_len: p.max_len, delta_d: p.delta_d, entries: net.entries().len(), covering_estimate: net.covering() }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StepInfo {
    pub window: usize,
    pub conj_len: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SynthInfo {
    pub b: f64,
    pub alpha: f64,
    pub m_mult: f64,
    pub cutoff: usize,
    pub c_k: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunManifest {
    pub tool_version: String,
    pub gate_set_hash: String,
    pub net: NetInfo,
    pub steps: StepInfo,
    pub synth: SynthInfo,
    pub templates: Vec<String>,
    pub precision_bits: usize,
    pub seed: u64,
    pub n_min: usize,
    pub n_max: usize,
    pub targets: usize,
    /// Wall times are written as 0 when false, which makes the CSV a pure
    /// function of the manifest.
    pub timing: bool,
}

impl RunManifest {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        gate_set_hash: String,
        net: &Net,
        steps: &StepParams,
        synth: &SynthParams,
        templates: Vec<String>,
        precision_bits: usize,
        seed: u64,
        (n_min, n_max): (usize, usize),
        targets: usize,
        timing: bool,
    ) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            gate_set_hash,
            net: NetInfo::of(net),
            steps: StepInfo { window: steps.window, conj_len: steps.conj_len },
            synth: SynthInfo { b: synth.b, alpha: synth.alpha, m_mult: synth.m_mult, cutoff: synth.cutoff, c_k: synth.c_k },
            templates,
            precision_bits,
            seed,
            n_min,
            n_max,
            targets,
            timing,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    /// First 16 hex digits of the SHA-256 of the JSON form.
    pub fn id(&self) -> String {
        Sha256::digest(self.to_json()).iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
