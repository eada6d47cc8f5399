use std::collections::BTreeMap;

use super::config::BubbleViewRules;
use super::verdict::{Interface, QualityVerdict, RuleOutcome};
use crate::error::{Error, Result};
use crate::heatmaps::{BubbleTask, ClickSession};

/// First and third quartiles with linear interpolation between order
/// statistics. `None` for an empty sample.
pub fn quartiles(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let at = |q: f64| {
        let pos = q * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    };
    Some((at(0.25), at(0.75)))
}

/// Checks a whole cohort, since the click-count outlier rule compares each
/// participant with everyone else. Verdicts come back ordered by participant id.
pub fn validate_bubbleview(sessions: &[ClickSession], rules: &BubbleViewRules) -> Result<Vec<QualityVerdict>> {
    if sessions.is_empty() {
        return Err(Error::empty("no bubble sessions to validate"));
    }
    let mut by_participant: BTreeMap<&str, Vec<&ClickSession>> = BTreeMap::new();
    for s in sessions {
        by_participant.entry(&s.participant_id).or_default().push(s);
    }

    let click_rates: Vec<f64> = by_participant.values().map(|s| mean_clicks(s)).collect();
    let fences = if by_participant.len() >= rules.min_cohort_for_iqr {
        quartiles(&click_rates).map(|(q1, q3)| {
            let spread = rules.iqr_multiplier * (q3 - q1);
            (q1 - spread, q3 + spread)
        })
    } else {
        None
    };

    let verdicts = by_participant
        .iter()
        .zip(&click_rates)
        .map(|((&participant, own), &rate)| {
            let mut reasons = Vec::new();
            let described: Vec<_> = own.iter().filter(|s| s.task == BubbleTask::Description).copied().collect();
            let free: Vec<_> = own.iter().filter(|s| s.task == BubbleTask::FreeView).copied().collect();
            if !described.is_empty() {
                let shortest = described
                    .iter()
                    .map(|s| s.description.as_deref().map_or(0, |d| d.trim().chars().count()))
                    .min()
                    .unwrap_or(0);
                reasons.push(RuleOutcome::at_least(
                    "description_length",
                    shortest as f64,
                    rules.min_description_chars as f64,
                ));
                reasons.push(RuleOutcome::at_least(
                    "clicks_per_image_description",
                    mean_clicks(&described),
                    rules.min_clicks_per_image_description,
                ));
            }
            if !free.is_empty() {
                reasons.push(RuleOutcome::at_least(
                    "clicks_per_image_free_view",
                    mean_clicks(&free),
                    rules.min_clicks_per_image_free_view,
                ));
            }
            match fences {
                Some((lo, hi)) => {
                    reasons.push(RuleOutcome::at_least("click_count_iqr_low", rate, lo));
                    reasons.push(RuleOutcome::at_most("click_count_iqr_high", rate, hi));
                }
                None => reasons.push(RuleOutcome::skipped(
                    "click_count_iqr",
                    by_participant.len() as f64,
                    rules.min_cohort_for_iqr as f64,
                    format!(
                        "cohort of {} is below the minimum of {}",
                        by_participant.len(),
                        rules.min_cohort_for_iqr
                    ),
                )),
            }
            QualityVerdict::from_rules(participant, Interface::Bubbleview, reasons)
        })
        .collect();
    Ok(verdicts)
}

fn mean_clicks(sessions: &[&ClickSession]) -> f64 {
    sessions.iter().map(|s| s.clicks.len()).sum::<usize>() as f64 / sessions.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heatmaps::Click;
    use proptest::prelude::*;

    fn session(pid: &str, image: usize, clicks: usize, task: BubbleTask, chars: usize) -> ClickSession {
        ClickSession {
            participant_id: pid.into(),
            stimulus_id: format!("img{image}"),
            clicks: (0..clicks).map(|i| Click { t_ms: i as f64, x: 1.0, y: 1.0 }).collect(),
            description: (task == BubbleTask::Description).then(|| "x".repeat(chars)),
            task,
        }
    }

    #[test]
    fn quartile_interpolation() {
        assert_eq!(quartiles(&[10.0, 11.0, 12.0, 13.0, 90.0]), Some((11.0, 13.0)));
        assert_eq!(quartiles(&[1.0, 2.0, 3.0, 4.0]), Some((1.75, 3.25)));
        assert_eq!(quartiles(&[5.0]), Some((5.0, 5.0)));
        assert_eq!(quartiles(&[]), None);
    }

    #[test]
    fn description_length_boundary() {
        let rules = BubbleViewRules::default();
        let short = validate_bubbleview(&[session("p", 0, 12, BubbleTask::Description, 149)], &rules).unwrap();
        assert_eq!(short[0].failed_rules(), ["description_length"]);
        let ok = validate_bubbleview(&[session("p", 0, 12, BubbleTask::Description, 150)], &rules).unwrap();
        assert!(ok[0].passed);
    }

    #[test]
    fn free_view_two_clicks_pass() {
        let rules = BubbleViewRules::default();
        let v = validate_bubbleview(&[session("p", 0, 2, BubbleTask::FreeView, 0)], &rules).unwrap();
        assert!(v[0].rule("clicks_per_image_free_view").unwrap().passed);
        let v = validate_bubbleview(&[session("p", 0, 1, BubbleTask::FreeView, 0)], &rules).unwrap();
        assert_eq!(v[0].failed_rules(), ["clicks_per_image_free_view"]);
    }

    #[test]
    fn empty_session_fails_click_rule() {
        let v = validate_bubbleview(&[session("p", 0, 0, BubbleTask::FreeView, 0)], &BubbleViewRules::default()).unwrap();
        assert!(!v[0].passed);
    }

    #[test]
    fn outlier_flagged_by_iqr() {
        let cohort: Vec<_> = [("a", 10), ("b", 11), ("c", 12), ("d", 13), ("e", 90)]
            .iter()
            .map(|&(p, n)| session(p, 0, n, BubbleTask::FreeView, 0))
            .collect();
        let v = validate_bubbleview(&cohort, &BubbleViewRules::default()).unwrap();
        let failed: Vec<_> = v.iter().filter(|v| !v.passed).map(|v| v.participant_id.as_str()).collect();
        assert_eq!(failed, ["e"]);
        let r = v[4].rule("click_count_iqr_high").unwrap();
        assert_eq!((r.observed, r.threshold), (90.0, 16.0));
    }

    #[test]
    fn small_cohort_skips_iqr_with_reason() {
        let cohort: Vec<_> = [("a", 2), ("b", 3), ("c", 90)]
            .iter()
            .map(|&(p, n)| session(p, 0, n, BubbleTask::FreeView, 0))
            .collect();
        let v = validate_bubbleview(&cohort, &BubbleViewRules::default()).unwrap();
        assert!(v.iter().all(|v| v.passed));
        let r = v[0].rule("click_count_iqr").unwrap();
        assert!(!r.mandatory && r.note.is_some());
    }

    #[test]
    fn rates_average_over_images() {
        let s = [
            session("p", 0, 8, BubbleTask::Description, 200),
            session("p", 1, 12, BubbleTask::Description, 300),
        ];
        let v = validate_bubbleview(&s, &BubbleViewRules::default()).unwrap();
        assert!(v[0].passed);
        assert_eq!(v[0].rule("clicks_per_image_description").unwrap().observed, 10.0);
        assert_eq!(v[0].rule("description_length").unwrap().observed, 200.0);
    }

    proptest! {
        #[test]
        fn relaxing_thresholds_never_fails_a_pass(
            counts in proptest::collection::vec(0usize..30, 1..8),
            chars in proptest::collection::vec(100usize..200, 8),
            relax in 0.0f64..2.0,
        ) {
            let cohort: Vec<_> = counts
                .iter()
                .enumerate()
                .map(|(i, &n)| session(&format!("p{i}"), 0, n, BubbleTask::Description, chars[i]))
                .collect();
            let strict = BubbleViewRules::default();
            let loose = BubbleViewRules {
                min_description_chars: strict.min_description_chars - 10,
                min_clicks_per_image_description: strict.min_clicks_per_image_description - relax,
                iqr_multiplier: strict.iqr_multiplier + relax,
                ..strict.clone()
            };
            let a = validate_bubbleview(&cohort, &strict).unwrap();
            let b = validate_bubbleview(&cohort, &loose).unwrap();
            for (a, b) in a.iter().zip(&b) {
                prop_assert!(!a.passed || b.passed);
            }
        }
    }
}
