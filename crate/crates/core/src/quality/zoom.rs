use std::collections::BTreeMap;

use super::config::ZoomRules;
use super::verdict::{Interface, QualityVerdict, RuleOutcome};
use crate::error::{Error, Result};
use crate::heatmaps::{zoom_level, ZoomSession};
use crate::stimulus::StimulusLookup;

const ZOOM_EPS: f64 = 1e-9;

/// Checks one participant's zoom sessions.
///
/// Several sessions on the same image add up. An image counts as zoomed if
/// any viewport in any of its sessions is smaller than the whole image.
pub fn validate_zoom<L: StimulusLookup + ?Sized>(
    sessions: &[ZoomSession],
    stimuli: &L,
    rules: &ZoomRules,
) -> Result<QualityVerdict> {
    let first = sessions
        .first()
        .ok_or_else(|| Error::empty("no zoom sessions to validate"))?;
    let participant = first.participant_id.as_str();
    if let Some(other) = sessions.iter().find(|s| s.participant_id != participant) {
        return Err(Error::param(format!(
            "sessions mix participants `{participant}` and `{}`",
            other.participant_id
        )));
    }

    let mut per_image: BTreeMap<&str, (f64, bool)> = BTreeMap::new();
    for session in sessions {
        let stimulus = stimuli.require(&session.stimulus_id)?;
        session.validate(stimulus)?;
        let mut zoomed = false;
        for event in &session.events {
            if zoom_level(&event.viewport, stimulus)? > 1.0 + ZOOM_EPS {
                zoomed = true;
            }
        }
        let entry = per_image.entry(session.stimulus_id.as_str()).or_default();
        entry.0 += session.duration_ms();
        entry.1 |= zoomed;
    }

    let images = per_image.len() as f64;
    let viewed = per_image
        .values()
        .filter(|(t, _)| *t >= rules.min_image_time_ms)
        .count() as f64;
    let zoomed = per_image.values().filter(|(_, z)| *z).count() as f64;
    let total: f64 = per_image.values().map(|(t, _)| t).sum();

    let reasons = vec![
        RuleOutcome::at_least("image_time_pct", viewed / images, rules.min_viewed_image_frac)
            .with_note(format!("images viewed for at least {} ms", rules.min_image_time_ms)),
        RuleOutcome::at_least("total_time", total, rules.min_total_time_ms),
        RuleOutcome::at_least("zoom_pct", zoomed / images, rules.min_zoomed_image_frac),
    ];
    Ok(QualityVerdict::from_rules(participant, Interface::Zoommaps, reasons))
}
