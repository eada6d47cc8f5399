use serde::{Deserialize, Serialize};

use crate::geometry::Point;

use super::chart::CodeChart;

/// What a typed code means on the chart it was typed for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Resolution {
    Valid { center: Point },
    Nonexistent,
    ValidationCorrect { center: Point },
    ValidationIncorrect { center: Point },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    Valid,
    Nonexistent,
    ValidationCorrect,
    ValidationIncorrect,
}

impl Resolution {
    /// Window-space center of the reported triplet, if it exists.
    pub fn center(&self) -> Option<Point> {
        match *self {
            Resolution::Valid { center }
            | Resolution::ValidationCorrect { center }
            | Resolution::ValidationIncorrect { center } => Some(center),
            Resolution::Nonexistent => None,
        }
    }

    pub fn status(&self) -> ReportStatus {
        match self {
            Resolution::Valid { .. } => ReportStatus::Valid,
            Resolution::Nonexistent => ReportStatus::Nonexistent,
            Resolution::ValidationCorrect { .. } => ReportStatus::ValidationCorrect,
            Resolution::ValidationIncorrect { .. } => ReportStatus::ValidationIncorrect,
        }
    }
}

/// Canonical form of typed input: trimmed and uppercased.
pub fn normalize_code(typed: &str) -> String {
    typed.trim().to_uppercase()
}

/// Looks a typed code up on its chart.
pub fn resolve_report(chart: &CodeChart, typed: &str) -> Resolution {
    let code = normalize_code(typed);
    let Some(placement) = chart.placement(&code) else {
        return Resolution::Nonexistent;
    };
    let center = placement.center;
    match &chart.validation {
        None => Resolution::Valid { center },
        Some(v) if v.correct_codes.iter().any(|c| *c == code) => Resolution::ValidationCorrect { center },
        Some(_) => Resolution::ValidationIncorrect { center },
    }
}
