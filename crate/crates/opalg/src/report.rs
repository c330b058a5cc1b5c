//! Deterministic command reports: a content digest of the inputs, results
//! formatted with fixed precision, and assertion outcomes. Two runs of the
//! same command on the same inputs serialize to identical bytes, in both the
//! text and the JSON format.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Output format of [`Report::emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

/// A finished command report. Results and assertions are kept in sorted
/// maps with pre-formatted values so serialization is canonical.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub results: BTreeMap<String, String>,
    pub assertions: BTreeMap<String, String>,
}

/// Format a float with twelve digits after the decimal point, switching to
/// scientific notation outside `[1e-6, 1e15)` and normalizing negative
/// zero, so that equal values always print identically.
pub fn fmt_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    let a = x.abs();
    if a != 0.0 && !(1e-6..1e15).contains(&a) {
        format!("{x:.12e}")
    } else {
        format!("{x:.12}")
    }
}

/// Format a complex value as `re+imi` with the same conventions.
pub fn fmt_c64(z: num_complex::Complex64) -> String {
    format!("{}{}{}i", fmt_f64(z.re), if z.im < 0.0 { "" } else { "+" }, fmt_f64(z.im))
}

/// Accumulates the bytes that identify a command invocation and hashes
/// them into the report digest.
pub struct InputDigest {
    hasher: Sha256,
}

impl InputDigest {
    pub fn new(command: &str) -> InputDigest {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        hasher.update([0]);
        InputDigest { hasher }
    }

    /// Feed a named input (flag value, file contents, ...).
    pub fn input(&mut self, key: &str, value: &str) -> &mut Self {
        self.hasher.update(key.as_bytes());
        self.hasher.update([b'=']);
        self.hasher.update(value.as_bytes());
        self.hasher.update([0]);
        self
    }

    pub fn finish(self) -> String {
        let out = self.hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl Report {
    pub fn new(command: &str, inputs_digest: String) -> Report {
        Report {
            command: command.to_string(),
            inputs_digest,
            results: BTreeMap::new(),
            assertions: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.results.insert(key.to_string(), value.into());
        self
    }

    pub fn set_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.set(key, fmt_f64(value))
    }

    pub fn set_usize(&mut self, key: &str, value: usize) -> &mut Self {
        self.set(key, value.to_string())
    }

    pub fn set_bool(&mut self, key: &str, value: bool) -> &mut Self {
        self.set(key, if value { "true" } else { "false" })
    }

    /// Record a named pass/fail outcome.
    pub fn check(&mut self, key: &str, ok: bool) -> &mut Self {
        self.assertions
            .insert(key.to_string(), if ok { "pass" } else { "fail" }.to_string());
        self
    }

    pub fn all_passed(&self) -> bool {
        self.assertions.values().all(|v| v == "pass")
    }

    /// Canonical serialization: sorted keys, fixed precision, LF endings.
    pub fn emit(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serialization");
                s.push('\n');
                s
            }
            Format::Text => {
                let mut s = String::new();
                s.push_str(&format!("command: {}\n", self.command));
                s.push_str(&format!("inputs-digest: {}\n", self.inputs_digest));
                for (k, v) in &self.results {
                    s.push_str(&format!("result {k} = {v}\n"));
                }
                for (k, v) in &self.assertions {
                    s.push_str(&format!("assert {k}: {v}\n"));
                }
                s
            }
        }
    }
}
