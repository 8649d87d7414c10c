use std::collections::BTreeMap;

use serde::Serialize;

pub const REPORT_VERSION: u32 = 1;

/// Acceptance region for a check's headline value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    AtMost { value: f64 },
    AtLeast { value: f64 },
    Within { center: f64, half_width: f64 },
}

impl Bound {
    pub fn admits(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        match *self {
            Bound::AtMost { value } => x <= value,
            Bound::AtLeast { value } => x >= value,
            Bound::Within { center, half_width } => (x - center).abs() <= half_width,
        }
    }

    /// Same shape with a new threshold; for `Within` the half-width is replaced.
    pub fn with_tolerance(self, tol: f64) -> Bound {
        match self {
            Bound::AtMost { .. } => Bound::AtMost { value: tol },
            Bound::AtLeast { .. } => Bound::AtLeast { value: tol },
            Bound::Within { center, .. } => Bound::Within { center, half_width: tol },
        }
    }
}

/// What a check measured: one headline value plus supporting numbers.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Measured {
    pub value: f64,
    pub details: BTreeMap<String, f64>,
}

impl Measured {
    pub fn new(value: f64) -> Self {
        Measured { value, details: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.details.insert(key.to_string(), v);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub measured: Measured,
    pub bound: Bound,
    pub pass: bool,
    /// Wall time in seconds; only recorded on request since it breaks byte-reproducibility.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime: Option<f64>,
}

impl CheckReport {
    pub fn new(name: &str, measured: Measured, bound: Bound) -> Self {
        let pass = bound.admits(measured.value);
        CheckReport { name: name.to_string(), measured, bound, pass, runtime: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub version: u32,
    pub seed: u64,
    pub checks: Vec<CheckReport>,
}

impl Report {
    pub fn new(seed: u64, checks: Vec<CheckReport>) -> Self {
        Report { version: REPORT_VERSION, seed, checks }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckReport> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields serialize")
    }
}
