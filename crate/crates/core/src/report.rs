//! Machine-readable verification reports.

use crate::series::Witness;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub id: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
}

impl InstanceResult {
    pub fn pass(id: &str) -> Self {
        InstanceResult { id: id.into(), status: Status::Pass, witness: None, witness_depth: None, lhs: None, rhs: None }
    }

    pub fn fail(id: &str, w: Witness) -> Self {
        InstanceResult {
            id: id.into(),
            status: Status::Fail,
            witness: Some(w.basis),
            witness_depth: Some(w.depth),
            lhs: Some(w.lhs),
            rhs: Some(w.rhs),
        }
    }

    /// A failure with a message and no witness state.
    pub fn fail_msg(id: &str, msg: impl Into<String>) -> Self {
        InstanceResult {
            id: id.into(),
            status: Status::Fail,
            witness: Some(msg.into()),
            witness_depth: None,
            lhs: None,
            rhs: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub params: serde_json::Value,
    pub instances: Vec<InstanceResult>,
    pub wall_time: f64,
}

impl Report {
    pub fn new(suite: &str, params: serde_json::Value) -> Self {
        Report { suite: suite.into(), params, instances: Vec::new(), wall_time: 0.0 }
    }

    pub fn all_pass(&self) -> bool {
        self.instances.iter().all(|r| r.passed())
    }

    pub fn failures(&self) -> impl Iterator<Item = &InstanceResult> {
        self.instances.iter().filter(|r| !r.passed())
    }

    pub fn extend(&mut self, prefix: &str, rs: Vec<InstanceResult>) {
        for mut r in rs {
            if !prefix.is_empty() {
                r.id = format!("{prefix}/{}", r.id);
            }
            self.instances.push(r);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_failure() {
        let mut r = Report::new("x", serde_json::json!({"depth": 2}));
        assert!(r.all_pass());
        assert!(r.to_json().contains("\"instances\": []"));
        r.instances.push(InstanceResult::fail_msg("a", "boom"));
        assert!(!r.all_pass());
        assert!(r.to_json().contains("\"status\": \"fail\""));
    }
}
