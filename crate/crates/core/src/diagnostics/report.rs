use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
}

/// One line of a check ledger: a measured value against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub inputs: serde_json::Value,
    pub value: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
}

impl CheckRecord {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, inputs: serde_json::Value, value: f64, tolerance: f64) -> Self {
        let status = if value <= tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            name: name.into(),
            inputs,
            value,
            tolerance,
            status,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}
