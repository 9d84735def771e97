//! JSON reports and their schema.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Bumped on any breaking change of the report layout.
pub const SCHEMA_VERSION: &str = "1.0.0";

pub fn report_schema_version() -> &'static str {
    SCHEMA_VERSION
}

/// One checked bound or invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    /// Measured quantity, when the check compares one number to a limit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<f64>,
    /// Witness or explanation, filled on failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Assertion {
    /// `value ≤ limit`.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        let passed = value <= limit;
        Self {
            name: name.into(),
            passed,
            value: Some(value),
            limit: Some(limit),
            detail: (!passed).then(|| format!("{value:e} exceeds {limit:e}")),
        }
    }

    /// `value ≥ limit`.
    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        let passed = value >= limit;
        Self {
            name: name.into(),
            passed,
            value: Some(value),
            limit: Some(limit),
            detail: (!passed).then(|| format!("{value:e} is below {limit:e}")),
        }
    }

    pub fn holds(name: impl Into<String>, passed: bool, detail: impl FnOnce() -> String) -> Self {
        Self {
            name: name.into(),
            passed,
            value: None,
            limit: None,
            detail: (!passed).then(detail),
        }
    }
}

/// Settings that may differ between runs with identical results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Runtime {
    pub workers: usize,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub experiment: String,
    pub seed: u64,
    pub config: Value,
    pub results: Value,
    pub assertions: Vec<Assertion>,
    pub warnings: Vec<String>,
    pub passed: bool,
    pub runtime: Runtime,
}

impl Report {
    /// The report without `runtime`: identical across worker counts.
    pub fn content(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("runtime");
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }
}

/// JSON Schema (draft 2020-12) of every report.
pub fn schema() -> Value {
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "hypoco experiment report",
        "type": "object",
        "required": ["schema_version", "experiment", "seed", "config", "results", "assertions", "warnings", "passed", "runtime"],
        "additionalProperties": false,
        "properties": {
            "schema_version": { "const": SCHEMA_VERSION },
            "experiment": { "enum": crate::config::KINDS },
            "seed": { "type": "integer", "minimum": 0 },
            "config": {
                "type": "object",
                "required": ["seed", "process", "experiment"],
                "properties": {
                    "experiment": {
                        "type": "object",
                        "required": ["kind"],
                        "properties": { "kind": { "enum": crate::config::KINDS } }
                    }
                }
            },
            "results": { "type": "object" },
            "assertions": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["name", "passed"],
                    "additionalProperties": false,
                    "properties": {
                        "name": { "type": "string" },
                        "passed": { "type": "boolean" },
                        "value": { "type": ["number", "null"] },
                        "limit": { "type": ["number", "null"] },
                        "detail": { "type": "string" }
                    }
                }
            },
            "warnings": { "type": "array", "items": { "type": "string" } },
            "passed": { "type": "boolean" },
            "runtime": {
                "type": "object",
                "required": ["workers", "tool_version"],
                "additionalProperties": false,
                "properties": {
                    "workers": { "type": "integer", "minimum": 1 },
                    "tool_version": { "type": "string" }
                }
            }
        }
    })
}
