//! Wire formats posted by the collection interfaces.

use attnlab_core::codecharts::{normalize_code, CodeChart, CODE_LEN};
use attnlab_core::heatmaps::{
    AnnotationMask, AnnotationTool, BubbleTask, Click, ClickSession, CodeReport, ZoomEvent, ZoomSession,
};
use attnlab_core::quality::Interface;
use attnlab_core::{BinaryMask, Rect, Run, Stimulus};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewportEvent {
    pub t_ms: f64,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoomPayload {
    pub assignment_id: String,
    pub participant_id: String,
    pub submission_id: String,
    pub stimulus_id: String,
    pub events: Vec<ViewportEvent>,
    #[serde(default)]
    pub session_end_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeTrial {
    pub stimulus_id: String,
    pub chart_id: String,
    pub typed_code: String,
    pub response_t_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeChartsPayload {
    pub assignment_id: String,
    pub participant_id: String,
    pub submission_id: String,
    pub trials: Vec<CodeTrial>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportAnnotsPayload {
    pub assignment_id: String,
    pub participant_id: String,
    pub submission_id: String,
    pub stimulus_id: String,
    pub mask_rle: Vec<Run>,
    pub tool: AnnotationTool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClickEvent {
    pub t_ms: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleViewPayload {
    pub assignment_id: String,
    pub participant_id: String,
    pub submission_id: String,
    pub stimulus_id: String,
    pub clicks: Vec<ClickEvent>,
    #[serde(default)]
    pub description: Option<String>,
    pub task: BubbleTask,
}

/// Any of the four payloads, tagged by an `interface` field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "interface", rename_all = "lowercase")]
pub enum Payload {
    Zoommaps(ZoomPayload),
    Codecharts(CodeChartsPayload),
    Importannots(ImportAnnotsPayload),
    Bubbleview(BubbleViewPayload),
}

impl Payload {
    pub fn interface(&self) -> Interface {
        match self {
            Payload::Zoommaps(_) => Interface::Zoommaps,
            Payload::Codecharts(_) => Interface::Codecharts,
            Payload::Importannots(_) => Interface::Importannots,
            Payload::Bubbleview(_) => Interface::Bubbleview,
        }
    }

    fn ids(&self) -> (&str, &str, &str) {
        match self {
            Payload::Zoommaps(p) => (&p.assignment_id, &p.participant_id, &p.submission_id),
            Payload::Codecharts(p) => (&p.assignment_id, &p.participant_id, &p.submission_id),
            Payload::Importannots(p) => (&p.assignment_id, &p.participant_id, &p.submission_id),
            Payload::Bubbleview(p) => (&p.assignment_id, &p.participant_id, &p.submission_id),
        }
    }

    pub fn assignment_id(&self) -> &str {
        self.ids().0
    }

    pub fn participant_id(&self) -> &str {
        self.ids().1
    }

    pub fn submission_id(&self) -> &str {
        self.ids().2
    }

    /// Stimuli the payload refers to, in order of appearance.
    pub fn stimulus_ids(&self) -> Vec<&str> {
        match self {
            Payload::Zoommaps(p) => vec![&p.stimulus_id],
            Payload::Codecharts(p) => p.trials.iter().map(|t| t.stimulus_id.as_str()).collect(),
            Payload::Importannots(p) => vec![&p.stimulus_id],
            Payload::Bubbleview(p) => vec![&p.stimulus_id],
        }
    }
}

/// Parses a posted payload. Schema errors carry the path of the offending
/// field, e.g. `clicks[1].y`.
pub fn parse_payload(body: &[u8]) -> Result<Payload, ServiceError> {
    let value: serde_json::Value =
        serde_json::from_slice(body).map_err(|e| ServiceError::invalid("$", e.to_string()))?;
    let tag = value
        .get("interface")
        .and_then(|t| t.as_str())
        .ok_or_else(|| ServiceError::invalid("interface", "missing or not a string"))?;
    let interface: Interface = tag
        .parse()
        .map_err(|_| ServiceError::invalid("interface", format!("unknown interface `{tag}`")))?;
    Ok(match interface {
        Interface::Zoommaps => Payload::Zoommaps(typed(value)?),
        Interface::Codecharts => Payload::Codecharts(typed(value)?),
        Interface::Importannots => Payload::Importannots(typed(value)?),
        Interface::Bubbleview => Payload::Bubbleview(typed(value)?),
    })
}

fn typed<T: serde::de::DeserializeOwned>(value: serde_json::Value) -> Result<T, ServiceError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "$".to_owned() } else { path };
        ServiceError::invalid(path, e.into_inner().to_string())
    })
}

/// Checks a payload against the stimuli and charts it names. Errors carry
/// the path of the first offending field, e.g. `clicks[3].x`.
pub fn validate_payload<'a>(
    payload: &Payload,
    stimulus: impl Fn(&str) -> Option<&'a Stimulus>,
    chart: impl Fn(&str) -> Option<&'a CodeChart>,
) -> Result<(), ServiceError> {
    let (_, participant, submission) = payload.ids();
    if participant.trim().is_empty() {
        return Err(ServiceError::invalid("participant_id", "must not be empty"));
    }
    if submission.trim().is_empty() {
        return Err(ServiceError::invalid("submission_id", "must not be empty"));
    }
    let require_stimulus = |path: &str, id: &str| {
        stimulus(id).ok_or_else(|| ServiceError::invalid(path, format!("unknown stimulus `{id}`")))
    };
    match payload {
        Payload::Zoommaps(p) => {
            let s = require_stimulus("stimulus_id", &p.stimulus_id)?;
            if p.events.is_empty() {
                return Err(ServiceError::invalid("events", "at least the initial viewport is required"));
            }
            let bounds = s.bounds();
            for (i, e) in p.events.iter().enumerate() {
                for (field, v) in [("t_ms", e.t_ms), ("x", e.x), ("y", e.y), ("w", e.w), ("h", e.h)] {
                    if !v.is_finite() {
                        return Err(ServiceError::invalid(format!("events[{i}].{field}"), "must be finite"));
                    }
                }
                if e.w <= 0.0 {
                    return Err(ServiceError::invalid(format!("events[{i}].w"), "must be positive"));
                }
                if e.h <= 0.0 {
                    return Err(ServiceError::invalid(format!("events[{i}].h"), "must be positive"));
                }
                if bounds.intersection(&Rect::new(e.x, e.y, e.w, e.h)).is_none() {
                    return Err(ServiceError::invalid(format!("events[{i}]"), "viewport does not overlap the image"));
                }
                if i > 0 && e.t_ms <= p.events[i - 1].t_ms {
                    return Err(ServiceError::invalid(format!("events[{i}].t_ms"), "timestamps must increase"));
                }
            }
            if let Some(end) = p.session_end_ms {
                let last = p.events.last().expect("non-empty").t_ms;
                if !(end >= last) {
                    return Err(ServiceError::invalid("session_end_ms", "must not precede the last event"));
                }
            }
        }
        Payload::Codecharts(p) => {
            if p.trials.is_empty() {
                return Err(ServiceError::invalid("trials", "must not be empty"));
            }
            for (i, t) in p.trials.iter().enumerate() {
                require_stimulus(&format!("trials[{i}].stimulus_id"), &t.stimulus_id)?;
                chart(&t.chart_id).ok_or_else(|| {
                    ServiceError::invalid(format!("trials[{i}].chart_id"), format!("unknown chart `{}`", t.chart_id))
                })?;
                let code = normalize_code(&t.typed_code);
                if code.chars().count() != CODE_LEN || !code.chars().all(|ch| ch.is_ascii_alphanumeric()) {
                    return Err(ServiceError::invalid(
                        format!("trials[{i}].typed_code"),
                        format!("expected {CODE_LEN} letters or digits"),
                    ));
                }
                if !(t.response_t_ms.is_finite() && t.response_t_ms >= 0.0) {
                    return Err(ServiceError::invalid(format!("trials[{i}].response_t_ms"), "must be >= 0"));
                }
            }
        }
        Payload::Importannots(p) => {
            let s = require_stimulus("stimulus_id", &p.stimulus_id)?;
            let (w, h) = s.dims();
            BinaryMask::from_rle(w, h, &p.mask_rle)
                .map_err(|e| ServiceError::invalid(format!("mask_rle[{}]", e.run), e.reason))?;
        }
        Payload::Bubbleview(p) => {
            let s = require_stimulus("stimulus_id", &p.stimulus_id)?;
            let (w, h) = (s.width_px as f64, s.height_px as f64);
            for (i, c) in p.clicks.iter().enumerate() {
                if !(c.x >= 0.0 && c.x < w) {
                    return Err(ServiceError::invalid(format!("clicks[{i}].x"), format!("outside [0, {w})")));
                }
                if !(c.y >= 0.0 && c.y < h) {
                    return Err(ServiceError::invalid(format!("clicks[{i}].y"), format!("outside [0, {h})")));
                }
                if !c.t_ms.is_finite() || (i > 0 && c.t_ms < p.clicks[i - 1].t_ms) {
                    return Err(ServiceError::invalid(format!("clicks[{i}].t_ms"), "timestamps must not decrease"));
                }
            }
            if p.task == BubbleTask::Description && p.description.is_none() {
                return Err(ServiceError::invalid("description", "required for description tasks"));
            }
        }
    }
    Ok(())
}

impl ZoomPayload {
    pub fn to_session(&self) -> ZoomSession {
        ZoomSession {
            participant_id: self.participant_id.clone(),
            stimulus_id: self.stimulus_id.clone(),
            events: self
                .events
                .iter()
                .map(|e| ZoomEvent::new(e.t_ms, Rect::new(e.x, e.y, e.w, e.h)))
                .collect(),
            session_end_ms: self.session_end_ms,
        }
    }

    pub fn from_session(session: &ZoomSession, assignment_id: &str, submission_id: &str) -> Self {
        ZoomPayload {
            assignment_id: assignment_id.into(),
            participant_id: session.participant_id.clone(),
            submission_id: submission_id.into(),
            stimulus_id: session.stimulus_id.clone(),
            events: session
                .events
                .iter()
                .map(|e| ViewportEvent {
                    t_ms: e.t_ms,
                    x: e.viewport.x,
                    y: e.viewport.y,
                    w: e.viewport.w,
                    h: e.viewport.h,
                })
                .collect(),
            session_end_ms: session.session_end_ms,
        }
    }
}

impl CodeChartsPayload {
    pub fn to_reports(&self) -> Vec<CodeReport> {
        self.trials
            .iter()
            .map(|t| CodeReport {
                participant_id: self.participant_id.clone(),
                stimulus_id: t.stimulus_id.clone(),
                chart_id: t.chart_id.clone(),
                typed_code: t.typed_code.clone(),
                response_t_ms: t.response_t_ms,
            })
            .collect()
    }
}

impl ImportAnnotsPayload {
    pub fn to_mask(&self, stimulus: &Stimulus) -> Result<AnnotationMask, ServiceError> {
        let (w, h) = stimulus.dims();
        let mask = BinaryMask::from_rle(w, h, &self.mask_rle)
            .map_err(|e| ServiceError::invalid(format!("mask_rle[{}]", e.run), e.reason))?;
        Ok(AnnotationMask {
            participant_id: self.participant_id.clone(),
            stimulus_id: self.stimulus_id.clone(),
            tool: self.tool,
            mask,
        })
    }
}

impl BubbleViewPayload {
    pub fn to_session(&self) -> ClickSession {
        ClickSession {
            participant_id: self.participant_id.clone(),
            stimulus_id: self.stimulus_id.clone(),
            clicks: self.clicks.iter().map(|c| Click { t_ms: c.t_ms, x: c.x, y: c.y }).collect(),
            description: self.description.clone(),
            task: self.task,
        }
    }

    pub fn from_session(session: &ClickSession, assignment_id: &str, submission_id: &str) -> Self {
        BubbleViewPayload {
            assignment_id: assignment_id.into(),
            participant_id: session.participant_id.clone(),
            submission_id: submission_id.into(),
            stimulus_id: session.stimulus_id.clone(),
            clicks: session.clicks.iter().map(|c| ClickEvent { t_ms: c.t_ms, x: c.x, y: c.y }).collect(),
            description: session.description.clone(),
            task: session.task,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use attnlab_core::StimulusKind;
    use serde_json::json;

    fn stimulus() -> Stimulus {
        Stimulus::new("s", 10, 5, StimulusKind::Natural)
    }

    #[test]
    fn field_names_are_stable() {
        let p = Payload::Zoommaps(ZoomPayload {
            assignment_id: "a".into(),
            participant_id: "p".into(),
            submission_id: "x".into(),
            stimulus_id: "s".into(),
            events: vec![ViewportEvent { t_ms: 0.0, x: 0.0, y: 0.0, w: 10.0, h: 5.0 }],
            session_end_ms: Some(900.0),
        });
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(
            v,
            json!({"interface": "zoommaps", "assignment_id": "a", "participant_id": "p", "submission_id": "x",
                   "stimulus_id": "s", "events": [{"t_ms": 0.0, "x": 0.0, "y": 0.0, "w": 10.0, "h": 5.0}],
                   "session_end_ms": 900.0})
        );
        assert_eq!(parse_payload(v.to_string().as_bytes()).unwrap(), p);
    }

    #[test]
    fn unknown_tag_and_bad_json_are_invalid() {
        let err = parse_payload(br#"{"interface": "eyes"}"#).unwrap_err();
        assert!(matches!(err, ServiceError::Invalid { ref path, .. } if path == "interface"));
        let err = parse_payload(b"{").unwrap_err();
        assert!(matches!(err, ServiceError::Invalid { ref path, .. } if path == "$"));
    }

    #[test]
    fn typed_codes_are_checked_after_normalizing() {
        let chart = attnlab_core::codecharts::generate_codechart("c", &Default::default(), 1).unwrap();
        let s = stimulus();
        let payload = |code: &str| {
            Payload::Codecharts(CodeChartsPayload {
                assignment_id: "a".into(),
                participant_id: "p".into(),
                submission_id: "x".into(),
                trials: vec![CodeTrial {
                    stimulus_id: "s".into(),
                    chart_id: "c".into(),
                    typed_code: code.into(),
                    response_t_ms: 1.0,
                }],
            })
        };
        let check = |code: &str| validate_payload(&payload(code), |_| Some(&s), |_| Some(&chart));
        assert!(check(" k2x ").is_ok());
        let err = check("K2").unwrap_err();
        assert!(matches!(err, ServiceError::Invalid { ref path, .. } if path == "trials[0].typed_code"));
    }

    #[test]
    fn mask_runs_report_their_index() {
        let s = stimulus();
        let p = Payload::Importannots(ImportAnnotsPayload {
            assignment_id: "a".into(),
            participant_id: "p".into(),
            submission_id: "x".into(),
            stimulus_id: "s".into(),
            mask_rle: vec![[0, 5], [48, 5]],
            tool: AnnotationTool::StrokeFill,
        });
        let err = validate_payload(&p, |_| Some(&s), |_| None).unwrap_err();
        assert!(matches!(err, ServiceError::Invalid { ref path, .. } if path == "mask_rle[1]"));
    }

    #[test]
    fn description_task_needs_text() {
        let s = stimulus();
        let p = Payload::Bubbleview(BubbleViewPayload {
            assignment_id: "a".into(),
            participant_id: "p".into(),
            submission_id: "x".into(),
            stimulus_id: "s".into(),
            clicks: vec![ClickEvent { t_ms: 0.0, x: 9.5, y: 4.5 }],
            description: None,
            task: BubbleTask::Description,
        });
        let err = validate_payload(&p, |_| Some(&s), |_| None).unwrap_err();
        assert!(matches!(err, ServiceError::Invalid { ref path, .. } if path == "description"));
    }
}
