use serde::{Deserialize, Serialize};

use super::config::CodeChartsRules;
use super::verdict::{Interface, QualityVerdict, RuleOutcome};
use crate::codecharts::{ReportStatus, Resolution};
use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialRole {
    Normal,
    Validation,
}

/// A resolved report together with the role of its trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedTrial {
    pub role: TrialRole,
    pub resolution: Resolution,
}

impl ResolvedTrial {
    pub fn new(role: TrialRole, resolution: Resolution) -> Self {
        ResolvedTrial { role, resolution }
    }

    fn nonexistent(&self) -> bool {
        self.resolution.status() == ReportStatus::Nonexistent
    }

    fn validation_hit(&self) -> bool {
        self.resolution.status() == ReportStatus::ValidationCorrect
    }
}

/// Screening block: every validation code correct and at most
/// `max_screening_nonexistent` made-up codes.
pub fn validate_codecharts_screening(
    participant_id: &str,
    screening: &[ResolvedTrial],
    rules: &CodeChartsRules,
) -> Result<QualityVerdict> {
    let validation = screening.iter().filter(|t| t.role == TrialRole::Validation).count();
    let normal = screening.len() - validation;
    if normal != rules.screening_normal_trials || validation != rules.screening_validation_trials {
        return Err(Error::param(format!(
            "screening needs {} normal and {} validation trials, got {normal} and {validation}",
            rules.screening_normal_trials, rules.screening_validation_trials
        )));
    }
    let correct = screening
        .iter()
        .filter(|t| t.role == TrialRole::Validation && t.validation_hit())
        .count();
    let nonexistent = screening.iter().filter(|t| t.nonexistent()).count();
    let reasons = vec![
        RuleOutcome::at_least("screening_validation", correct as f64, validation as f64),
        RuleOutcome::at_most(
            "screening_nonexistent",
            nonexistent as f64,
            rules.max_screening_nonexistent as f64,
        ),
    ];
    Ok(QualityVerdict::from_rules(participant_id, Interface::Codecharts, reasons))
}

/// Whole-session rules: validation miss rate and the same-spot detector.
pub fn validate_codecharts_full(
    participant_id: &str,
    trials: &[ResolvedTrial],
    rules: &CodeChartsRules,
) -> Result<QualityVerdict> {
    let validation: Vec<_> = trials.iter().filter(|t| t.role == TrialRole::Validation).collect();
    if validation.is_empty() {
        return Err(Error::param("no validation trials to score"));
    }
    let misses = validation.iter().filter(|t| !t.validation_hit()).count();
    let miss_rate = misses as f64 / validation.len() as f64;
    let centers: Vec<Option<Point>> = trials.iter().map(|t| t.resolution.center()).collect();
    let run = longest_same_spot_run(&centers, rules.same_spot_radius_px);
    let reasons = vec![
        RuleOutcome::at_most("validation_miss_rate", miss_rate, rules.max_validation_miss_rate)
            .with_note(format!("{misses} of {} validation codes missed", validation.len())),
        RuleOutcome::at_most("same_spot", run as f64, (rules.same_spot_run - 1) as f64)
            .with_note(format!("longest run within {} px of its centroid", rules.same_spot_radius_px)),
    ];
    Ok(QualityVerdict::from_rules(participant_id, Interface::Codecharts, reasons))
}

/// Screening on the leading block followed by the full-session rules.
pub fn validate_codecharts(participant_id: &str, trials: &[ResolvedTrial], rules: &CodeChartsRules) -> Result<QualityVerdict> {
    let block = rules.screening_normal_trials + rules.screening_validation_trials;
    if trials.len() < block {
        return Err(Error::param(format!(
            "{} trials is shorter than the {block}-trial screening block",
            trials.len()
        )));
    }
    let screening = validate_codecharts_screening(participant_id, &trials[..block], rules)?;
    let full = validate_codecharts_full(participant_id, trials, rules)?;
    Ok(screening.combine(full))
}

/// Length of the longest stretch of consecutive located reports whose
/// centers all lie within `radius` of the stretch's centroid. A report
/// without a location breaks the stretch.
pub fn longest_same_spot_run(centers: &[Option<Point>], radius: f64) -> usize {
    let mut best = 0;
    for start in 0..centers.len() {
        let mut end = start;
        while end < centers.len() && centers[end].is_some() {
            let window: Vec<Point> = centers[start..=end].iter().flatten().copied().collect();
            if !within_radius(&window, radius) {
                break;
            }
            end += 1;
        }
        best = best.max(end - start);
    }
    best
}

fn within_radius(points: &[Point], radius: f64) -> bool {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.y).sum::<f64>() / n;
    let c = Point::new(cx, cy);
    points.iter().all(|p| p.distance(c) <= radius)
}
