//! Shared report plumbing: deterministic number formatting and run manifests.

use serde::Serialize;

/// Fixed 17-significant-digit scientific format; reruns with identical
/// inputs produce identical bytes.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0.0000000000000000e0".into();
    }
    format!("{:.16e}", x)
}

/// Manifest describing one CLI run; every output file references it.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub params: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    /// Wall time is informational only; it does not participate in the
    /// reproducibility contract.
    pub wall_time_ms: u128,
}

pub const TOOL_NAME: &str = "bdforge";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            subcommand: subcommand.to_string(),
            params: Vec::new(),
            seed: None,
            outputs: Vec::new(),
            wall_time_ms: 0,
        }
    }

    pub fn param(mut self, k: &str, v: impl ToString) -> Self {
        self.params.push((k.to_string(), v.to_string()));
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialization");
        s.push('\n');
        s
    }
}
