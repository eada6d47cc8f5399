use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four collection interfaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interface {
    Zoommaps,
    Codecharts,
    Importannots,
    Bubbleview,
}

impl Interface {
    pub const ALL: [Interface; 4] = [
        Interface::Zoommaps,
        Interface::Codecharts,
        Interface::Importannots,
        Interface::Bubbleview,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Interface::Zoommaps => "zoommaps",
            Interface::Codecharts => "codecharts",
            Interface::Importannots => "importannots",
            Interface::Bubbleview => "bubbleview",
        }
    }

    pub fn provenance(self) -> crate::Provenance {
        match self {
            Interface::Zoommaps => crate::Provenance::Zoommaps,
            Interface::Codecharts => crate::Provenance::Codecharts,
            Interface::Importannots => crate::Provenance::Importannots,
            Interface::Bubbleview => crate::Provenance::Bubbleview,
        }
    }
}

impl std::fmt::Display for Interface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Interface {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Interface::ALL
            .into_iter()
            .find(|i| i.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown interface `{s}`")))
    }
}

/// Direction of a threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// observed ≥ threshold passes
    AtLeast,
    /// observed ≤ threshold passes
    AtMost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub rule_id: String,
    pub observed: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
    pub mandatory: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl RuleOutcome {
    pub fn at_least(rule_id: impl Into<String>, observed: f64, threshold: f64) -> Self {
        RuleOutcome {
            rule_id: rule_id.into(),
            observed,
            threshold,
            comparison: Comparison::AtLeast,
            passed: observed >= threshold,
            mandatory: true,
            note: None,
        }
    }

    pub fn at_most(rule_id: impl Into<String>, observed: f64, threshold: f64) -> Self {
        RuleOutcome {
            rule_id: rule_id.into(),
            observed,
            threshold,
            comparison: Comparison::AtMost,
            passed: observed <= threshold,
            mandatory: true,
            note: None,
        }
    }

    /// Recorded for the audit trail but never fails the participant.
    pub fn informational(mut self) -> Self {
        self.mandatory = false;
        self
    }

    pub fn skipped(rule_id: impl Into<String>, observed: f64, threshold: f64, note: impl Into<String>) -> Self {
        RuleOutcome {
            rule_id: rule_id.into(),
            observed,
            threshold,
            comparison: Comparison::AtLeast,
            passed: true,
            mandatory: false,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityVerdict {
    pub participant_id: String,
    pub interface: Interface,
    pub passed: bool,
    pub reasons: Vec<RuleOutcome>,
}

impl QualityVerdict {
    pub fn from_rules(participant_id: impl Into<String>, interface: Interface, reasons: Vec<RuleOutcome>) -> Self {
        let passed = reasons.iter().all(|r| r.passed || !r.mandatory);
        QualityVerdict {
            participant_id: participant_id.into(),
            interface,
            passed,
            reasons,
        }
    }

    pub fn rule(&self, rule_id: &str) -> Option<&RuleOutcome> {
        self.reasons.iter().find(|r| r.rule_id == rule_id)
    }

    /// Ids of the mandatory rules that failed.
    pub fn failed_rules(&self) -> Vec<&str> {
        self.reasons
            .iter()
            .filter(|r| r.mandatory && !r.passed)
            .map(|r| r.rule_id.as_str())
            .collect()
    }

    /// Merges two verdicts for the same participant.
    pub fn combine(mut self, other: QualityVerdict) -> Self {
        self.reasons.extend(other.reasons);
        self.passed = self.passed && other.passed;
        self
    }
}
