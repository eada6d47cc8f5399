//! In-memory interaction logs, one family per collection interface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use crate::mask::BinaryMask;
use crate::stimulus::Stimulus;

/// Grace period credited to the last viewport when a session has no
/// explicit end (image switch) timestamp.
pub const SESSION_END_GRACE_MS: f64 = 1000.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoomEvent {
    pub t_ms: f64,
    pub viewport: Rect,
}

impl ZoomEvent {
    pub fn new(t_ms: f64, viewport: Rect) -> Self {
        ZoomEvent { t_ms, viewport }
    }
}

/// Viewport history of one participant on one image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoomSession {
    pub participant_id: String,
    pub stimulus_id: String,
    pub events: Vec<ZoomEvent>,
    #[serde(default)]
    pub session_end_ms: Option<f64>,
}

impl ZoomSession {
    pub fn start_ms(&self) -> f64 {
        self.events.first().map_or(0.0, |e| e.t_ms)
    }

    /// Explicit image-switch time, else last event plus the grace period.
    pub fn end_ms(&self) -> f64 {
        match self.session_end_ms {
            Some(end) => end,
            None => self.events.last().map_or(0.0, |e| e.t_ms + SESSION_END_GRACE_MS),
        }
    }

    pub fn duration_ms(&self) -> f64 {
        self.end_ms() - self.start_ms()
    }

    /// Intervals `(event, duration_ms)` covering `[first event, end]`.
    pub fn intervals(&self) -> impl Iterator<Item = (&ZoomEvent, f64)> + '_ {
        let end = self.end_ms();
        self.events.iter().enumerate().map(move |(i, e)| {
            let next = self.events.get(i + 1).map_or(end, |n| n.t_ms);
            (e, next - e.t_ms)
        })
    }

    pub fn validate(&self, stimulus: &Stimulus) -> Result<()> {
        if self.events.is_empty() {
            return Err(Error::param(format!(
                "zoom session of {} on {} has no events",
                self.participant_id, self.stimulus_id
            )));
        }
        for pair in self.events.windows(2) {
            if !(pair[1].t_ms > pair[0].t_ms) {
                return Err(Error::param("zoom event timestamps must strictly increase"));
            }
        }
        for e in &self.events {
            let v = e.viewport;
            if !(v.w > 0.0 && v.h > 0.0) || stimulus.bounds().intersection(&v).is_none() {
                return Err(Error::param(format!("viewport {v:?} has no area inside the image")));
            }
        }
        if let (Some(end), Some(last)) = (self.session_end_ms, self.events.last()) {
            if end < last.t_ms {
                return Err(Error::param("session end precedes the last event"));
            }
        }
        Ok(())
    }
}

/// One typed codechart report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeReport {
    pub participant_id: String,
    pub stimulus_id: String,
    pub chart_id: String,
    pub typed_code: String,
    pub response_t_ms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationTool {
    StrokeFill,
    PolygonFill,
    RegularStroke,
}

/// One participant's importance selection on one image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationMask {
    pub participant_id: String,
    pub stimulus_id: String,
    pub tool: AnnotationTool,
    pub mask: BinaryMask,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BubbleTask {
    FreeView,
    Description,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Click {
    pub t_ms: f64,
    pub x: f64,
    pub y: f64,
}

impl Click {
    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClickSession {
    pub participant_id: String,
    pub stimulus_id: String,
    pub clicks: Vec<Click>,
    #[serde(default)]
    pub description: Option<String>,
    pub task: BubbleTask,
}

impl ClickSession {
    pub fn validate(&self, stimulus: &Stimulus) -> Result<()> {
        for (i, c) in self.clicks.iter().enumerate() {
            if !stimulus.contains(c.point()) {
                return Err(Error::param(format!("click {i} outside the image")));
            }
        }
        if self.clicks.windows(2).any(|p| p[1].t_ms < p[0].t_ms) {
            return Err(Error::param("click timestamps must not decrease"));
        }
        Ok(())
    }
}
