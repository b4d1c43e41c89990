//! Versioned JSON envelope for machine-readable reports.

use serde::Serialize;

pub const SCHEMA: &str = "conekernel/1";

#[derive(Debug, Clone, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub schema: &'static str,
    pub kind: &'a str,
    /// Set when the report is the outcome of a check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    pub result: &'a T,
}

impl<'a, T: Serialize> Report<'a, T> {
    pub fn new(kind: &'a str, result: &'a T) -> Self {
        Report {
            schema: SCHEMA,
            kind,
            passed: None,
            result,
        }
    }

    pub fn with_outcome(mut self, passed: bool) -> Self {
        self.passed = Some(passed);
        self
    }

    /// Pretty JSON; field order follows declaration order, so equal inputs
    /// give byte-identical output.
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self).map(|mut s| {
            s.push('\n');
            s
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_carries_schema() {
        let body = serde_json::json!({"value": 1.5, "stderr": 0.1});
        let v: serde_json::Value = serde_json::from_str(&Report::new("green", &body).with_outcome(true).to_json().unwrap()).unwrap();
        assert_eq!(v["schema"], "conekernel/1");
        assert_eq!(v["kind"], "green");
        assert_eq!(v["passed"], true);
        assert_eq!(v["result"]["stderr"], 0.1);
        let v: serde_json::Value = serde_json::from_str(&Report::new("x", &body).to_json().unwrap()).unwrap();
        assert!(v.get("passed").is_none());
    }
}
