use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use qfim_core::CMatrix;

/// Row-major matrix of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_json(m: &CMatrix) -> MatrixJson {
    m.to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub inputs: serde_json::Value,
    pub matrices: BTreeMap<String, MatrixJson>,
    pub scalars: BTreeMap<String, f64>,
    pub checks: Vec<CheckResult>,
    pub diagnostics: Vec<String>,
}

impl Report {
    pub fn new(command: &str, inputs: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            inputs,
            matrices: BTreeMap::new(),
            scalars: BTreeMap::new(),
            checks: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn matrix(&mut self, name: &str, m: &CMatrix) {
        self.matrices.insert(name.to_string(), matrix_json(m));
    }

    pub fn scalar(&mut self, name: &str, x: f64) {
        self.scalars.insert(name.to_string(), x);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.diagnostics.push(text.into());
    }

    /// Records `value ≤ tolerance`.
    pub fn check(&mut self, name: &str, value: f64, tolerance: f64) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            value,
            tolerance,
            pass: value <= tolerance,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are finite");
        s.push('\n');
        s
    }
}
