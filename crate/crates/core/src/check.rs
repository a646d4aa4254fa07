use serde::{Deserialize, Serialize};

/// Outcome of one named verification step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Set when the check only inspected rational points.
    pub partial: bool,
    pub evidence: String,
}

impl CheckOutcome {
    pub fn pass(name: &str, partial: bool, evidence: impl Into<String>) -> CheckOutcome {
        CheckOutcome {
            name: name.to_string(),
            passed: true,
            partial,
            evidence: evidence.into(),
        }
    }

    pub fn fail(name: &str, partial: bool, evidence: impl Into<String>) -> CheckOutcome {
        CheckOutcome {
            name: name.to_string(),
            passed: false,
            partial,
            evidence: evidence.into(),
        }
    }
}
