//! Versioned JSON report shared by the command line and the bindings.

use serde::{Deserialize, Serialize};

pub const REPORT_VERSION: &str = "1.0";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `residual <= tolerance`.
    pub fn within(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check { name: name.into(), residual, tolerance, pass: residual <= tolerance }
    }

    /// Passes when `value > threshold`; the residual is the value itself.
    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), residual: value, tolerance: threshold, pass: value > threshold }
    }

    /// Boolean verdict, residual 0 or 1 against tolerance 0.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), residual: if ok { 0.0 } else { 1.0 }, tolerance: 0.0, pass: ok }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub scenario: String,
    pub checks: Vec<Check>,
    pub pass: bool,
    /// Command-specific payload (matrices, diagnostics).
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
}

impl Report {
    pub fn new(scenario: impl Into<String>) -> Self {
        Report { version: REPORT_VERSION.into(), scenario: scenario.into(), checks: Vec::new(), pass: true, data: serde_json::Value::Null }
    }

    pub fn push(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = Check>) {
        for c in cs {
            self.push(c);
        }
    }

    pub fn set(&mut self, key: &str, value: serde_json::Value) {
        if !self.data.is_object() {
            self.data = serde_json::Value::Object(Default::default());
        }
        self.data.as_object_mut().expect("object").insert(key.into(), value);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_is_conjunction() {
        let mut r = Report::new("x");
        r.push(Check::within("a", 1e-13, 1e-12));
        assert!(r.pass);
        r.push(Check::above("b", 1e-7, 1e-6));
        assert!(!r.pass);
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn schema_keys() {
        let mut r = Report::new("s");
        r.push(Check::flag("f", true));
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        assert_eq!(keys, vec!["checks", "pass", "scenario", "version"]);
        assert_eq!(v["checks"][0].as_object().unwrap().len(), 4);
    }
}
