use std::collections::{BTreeMap, HashMap};

use attnlab_core::codecharts::{resolve_report, CodeChart};
use attnlab_core::heatmaps::{
    bubbleview_heatmap, codecharts_heatmap, importannots_heatmap, report_locations, zoom_heatmap, ClickSession,
    CodeReport, ZoomSession,
};
use attnlab_core::quality::{
    validate_bubbleview, validate_codecharts, validate_importannots, validate_zoom, Interface, QualityVerdict,
    ResolvedTrial, RuleOutcome, TrialRole, ValidationAnnotation,
};
use attnlab_core::{AttentionHeatmap, BinaryMask, Stimulus, StimulusKind};
use serde::{Deserialize, Serialize};

use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::store::{LogEnvelope, Store};
use crate::wire::Payload;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultsSummary {
    pub stimulus_id: String,
    pub interface: Interface,
    /// Participants with data on this stimulus.
    pub submitted: usize,
    /// Of those, participants whose verdict passed.
    pub passed: usize,
    /// Of those, participants whose data reached the heatmap.
    pub used: usize,
    pub config_hash: String,
    pub verdicts: Vec<QualityVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultsReport {
    pub summary: ResultsSummary,
    pub heatmap: AttentionHeatmap,
}

/// Per-participant data for one interface, decoded from the log.
enum Decoded {
    Zoom(Vec<ZoomSession>),
    Codecharts(Vec<CodeReport>),
    Annotations(Vec<attnlab_core::heatmaps::AnnotationMask>),
    Bubble(Vec<ClickSession>),
}

struct Snapshot {
    stimuli: BTreeMap<String, Stimulus>,
    charts: HashMap<String, CodeChart>,
    by_participant: BTreeMap<String, Decoded>,
}

fn snapshot(store: &Store, interface: Interface) -> Result<Snapshot, ServiceError> {
    let stimuli: BTreeMap<String, Stimulus> = store.stimuli().into_iter().map(|s| (s.id.clone(), s)).collect();
    let charts = store.charts();
    let logs = store.logs(interface)?;
    let mut by_participant: BTreeMap<String, Decoded> = BTreeMap::new();
    for LogEnvelope { participant_id, payload, .. } in logs {
        let entry = by_participant.entry(participant_id).or_insert_with(|| match interface {
            Interface::Zoommaps => Decoded::Zoom(Vec::new()),
            Interface::Codecharts => Decoded::Codecharts(Vec::new()),
            Interface::Importannots => Decoded::Annotations(Vec::new()),
            Interface::Bubbleview => Decoded::Bubble(Vec::new()),
        });
        match (entry, payload) {
            (Decoded::Zoom(v), Payload::Zoommaps(p)) => v.push(p.to_session()),
            (Decoded::Codecharts(v), Payload::Codecharts(p)) => v.extend(p.to_reports()),
            (Decoded::Annotations(v), Payload::Importannots(p)) => {
                let s = stimuli
                    .get(&p.stimulus_id)
                    .ok_or_else(|| ServiceError::not_found("stimulus", &p.stimulus_id))?;
                v.push(p.to_mask(s)?);
            }
            (Decoded::Bubble(v), Payload::Bubbleview(p)) => v.push(p.to_session()),
            _ => return Err(ServiceError::Config(format!("{interface} log holds a foreign payload"))),
        }
    }
    Ok(Snapshot {
        stimuli,
        charts,
        by_participant,
    })
}

/// A participant whose logs cannot be checked at all fails outright.
fn unusable(participant: &str, interface: Interface, err: impl std::fmt::Display) -> QualityVerdict {
    QualityVerdict::from_rules(
        participant,
        interface,
        vec![RuleOutcome::at_least("checkable", 0.0, 1.0).with_note(err.to_string())],
    )
}

fn verdicts_for(snap: &Snapshot, interface: Interface, cfg: &ServiceConfig) -> Result<BTreeMap<String, QualityVerdict>, ServiceError> {
    let rules = &cfg.validation;
    let mut out = BTreeMap::new();
    if interface == Interface::Bubbleview {
        let sessions: Vec<ClickSession> = snap
            .by_participant
            .values()
            .flat_map(|d| match d {
                Decoded::Bubble(v) => v.clone(),
                _ => Vec::new(),
            })
            .collect();
        if !sessions.is_empty() {
            for v in validate_bubbleview(&sessions, &rules.bubbleview)? {
                out.insert(v.participant_id.clone(), v);
            }
        }
        return Ok(out);
    }
    for (participant, data) in &snap.by_participant {
        let verdict = match data {
            Decoded::Zoom(sessions) => validate_zoom(sessions, &snap.stimuli, &rules.zoom),
            Decoded::Codecharts(reports) => resolve_trials(reports, &snap.charts)
                .and_then(|trials| validate_codecharts(participant, &trials, &rules.codecharts)),
            Decoded::Annotations(masks) => {
                let mut regular: Vec<BinaryMask> = Vec::new();
                let mut validation = Vec::new();
                for m in masks {
                    match snap.stimuli.get(&m.stimulus_id) {
                        Some(s) if s.kind == StimulusKind::Validation => validation.push(ValidationAnnotation {
                            stimulus_id: s.id.clone(),
                            mask: m.mask.clone(),
                            truth: s.element_mask(),
                        }),
                        _ => regular.push(m.mask.clone()),
                    }
                }
                validate_importannots(participant, &regular, &validation, &rules.importannots)
            }
            Decoded::Bubble(_) => unreachable!("handled above"),
        };
        let verdict = verdict.unwrap_or_else(|e| unusable(participant, interface, e));
        out.insert(participant.clone(), verdict);
    }
    Ok(out)
}

fn resolve_trials(reports: &[CodeReport], charts: &HashMap<String, CodeChart>) -> attnlab_core::Result<Vec<ResolvedTrial>> {
    reports
        .iter()
        .map(|r| {
            let chart = charts
                .get(&r.chart_id)
                .ok_or_else(|| attnlab_core::Error::ReferentialIntegrity(r.chart_id.clone()))?;
            let role = if chart.is_validation() { TrialRole::Validation } else { TrialRole::Normal };
            Ok(ResolvedTrial::new(role, resolve_report(chart, &r.typed_code)))
        })
        .collect()
}

/// One interface's logs decoded and judged, ready to build heatmaps from
/// any subset of participants.
pub struct Cohort {
    interface: Interface,
    snap: Snapshot,
    verdicts: BTreeMap<String, QualityVerdict>,
}

impl Cohort {
    pub fn load(store: &Store, interface: Interface, cfg: &ServiceConfig) -> Result<Self, ServiceError> {
        let snap = snapshot(store, interface)?;
        let verdicts = verdicts_for(&snap, interface, cfg)?;
        Ok(Cohort { interface, snap, verdicts })
    }

    /// Verdicts for every participant, ordered by participant id.
    pub fn verdicts(&self) -> impl Iterator<Item = &QualityVerdict> {
        self.verdicts.values()
    }

    pub fn stimulus(&self, id: &str) -> Result<&Stimulus, ServiceError> {
        self.snap.stimuli.get(id).ok_or_else(|| ServiceError::not_found("stimulus", id))
    }

    /// Participants with any data on the stimulus.
    pub fn submitted(&self, stimulus_id: &str) -> Vec<&str> {
        self.snap
            .by_participant
            .iter()
            .filter(|(_, data)| match data {
                Decoded::Zoom(v) => v.iter().any(|s| s.stimulus_id == stimulus_id),
                Decoded::Codecharts(v) => v.iter().any(|r| r.stimulus_id == stimulus_id),
                Decoded::Annotations(v) => v.iter().any(|m| m.stimulus_id == stimulus_id),
                Decoded::Bubble(v) => v.iter().any(|s| s.stimulus_id == stimulus_id),
            })
            .map(|(p, _)| p.as_str())
            .collect()
    }

    pub fn passed(&self, participant: &str) -> bool {
        self.verdicts.get(participant).is_some_and(|v| v.passed)
    }

    /// Passing participants whose data on the stimulus can enter a heatmap.
    pub fn usable(&self, stimulus_id: &str, cfg: &ServiceConfig) -> Result<Vec<&str>, ServiceError> {
        let stimulus = self.stimulus(stimulus_id)?;
        let mut out = Vec::new();
        for p in self.submitted(stimulus_id) {
            if !self.passed(p) {
                continue;
            }
            let usable = match &self.snap.by_participant[p] {
                Decoded::Codecharts(v) => {
                    let mine: Vec<CodeReport> = v.iter().filter(|r| r.stimulus_id == stimulus_id).cloned().collect();
                    let mapping = stimulus.fit_to_window(cfg.chart.window_w, cfg.chart.window_h)?;
                    report_locations(&mine, &self.snap.charts, &mapping)?.iter().any(Option::is_some)
                }
                Decoded::Bubble(v) => v.iter().any(|s| s.stimulus_id == stimulus_id && !s.clicks.is_empty()),
                _ => true,
            };
            if usable {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// Heatmap from exactly the given participants' data on one stimulus.
    /// Verdicts are not consulted here.
    pub fn heatmap(&self, stimulus_id: &str, participants: &[&str], cfg: &ServiceConfig) -> Result<AttentionHeatmap, ServiceError> {
        let stimulus = self.stimulus(stimulus_id)?;
        let mut zoom = Vec::new();
        let mut reports = Vec::new();
        let mut masks = Vec::new();
        let mut clicks = Vec::new();
        for p in participants {
            let data = self
                .snap
                .by_participant
                .get(*p)
                .ok_or_else(|| ServiceError::not_found("participant", *p))?;
            match data {
                Decoded::Zoom(v) => zoom.extend(v.iter().filter(|s| s.stimulus_id == stimulus_id).cloned()),
                Decoded::Codecharts(v) => reports.extend(v.iter().filter(|r| r.stimulus_id == stimulus_id).cloned()),
                Decoded::Annotations(v) => masks.extend(v.iter().filter(|m| m.stimulus_id == stimulus_id).cloned()),
                Decoded::Bubble(v) => clicks.extend(v.iter().filter(|s| s.stimulus_id == stimulus_id).cloned()),
            }
        }
        let sigmas = &cfg.heatmap;
        Ok(match self.interface {
            Interface::Zoommaps => zoom_heatmap(&zoom, stimulus)?,
            Interface::Codecharts => {
                let mapping = stimulus.fit_to_window(cfg.chart.window_w, cfg.chart.window_h)?;
                codecharts_heatmap(&reports, &self.snap.charts, stimulus, &mapping, sigmas.codecharts_sigma)?
            }
            Interface::Importannots => importannots_heatmap(&masks)?,
            Interface::Bubbleview => bubbleview_heatmap(&clicks, stimulus, sigmas.bubbleview_sigma)?,
        })
    }
}

/// Quality verdicts for every participant who submitted to `interface`,
/// ordered by participant id.
pub fn compute_verdicts(store: &Store, interface: Interface, cfg: &ServiceConfig) -> Result<Vec<QualityVerdict>, ServiceError> {
    let cohort = Cohort::load(store, interface, cfg)?;
    Ok(cohort.verdicts().cloned().collect())
}

/// Filters participants by their verdicts, then builds the heatmap for one
/// stimulus from the passing participants only.
pub fn compute_results(
    store: &Store,
    stimulus_id: &str,
    interface: Interface,
    cfg: &ServiceConfig,
) -> Result<ResultsReport, ServiceError> {
    let cohort = Cohort::load(store, interface, cfg)?;
    cohort.stimulus(stimulus_id)?;
    let submitted = cohort.submitted(stimulus_id);
    let used = cohort.usable(stimulus_id, cfg)?;
    if used.is_empty() {
        return Err(ServiceError::NoQualifyingData {
            stimulus_id: stimulus_id.to_owned(),
            interface: interface.to_string(),
        });
    }
    let heatmap = cohort.heatmap(stimulus_id, &used, cfg)?;
    let verdicts: Vec<QualityVerdict> = submitted.iter().filter_map(|p| cohort.verdicts.get(*p).cloned()).collect();
    Ok(ResultsReport {
        summary: ResultsSummary {
            stimulus_id: stimulus_id.to_owned(),
            interface,
            submitted: submitted.len(),
            passed: verdicts.iter().filter(|v| v.passed).count(),
            used: used.len(),
            config_hash: cfg.hash(),
            verdicts,
        },
        heatmap,
    })
}
