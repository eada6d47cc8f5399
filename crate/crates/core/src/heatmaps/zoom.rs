use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::grid::Grid;
use crate::heatmap::{AttentionHeatmap, Provenance};
use crate::stimulus::Stimulus;

use super::ZoomSession;

/// Full image area divided by the visible part of the viewport.
pub fn zoom_level(viewport: &Rect, stimulus: &Stimulus) -> Result<f64> {
    let visible = stimulus
        .bounds()
        .intersection(viewport)
        .ok_or_else(|| Error::param(format!("viewport {viewport:?} has no area inside the image")))?;
    let full = stimulus.bounds().area();
    // clipping can leave a sliver that rounds to the full image
    Ok((full / visible.area()).max(1.0))
}

/// Time-averaged zoom level per pixel, averaged over participants.
///
/// Each participant's map covers `[first event, session end]`; pixels outside
/// the current viewport accrue zoom 0 for that interval. Several sessions of
/// the same participant on the stimulus are pooled by time.
pub fn zoom_heatmap(sessions: &[ZoomSession], stimulus: &Stimulus) -> Result<AttentionHeatmap> {
    if sessions.is_empty() {
        return Err(Error::empty("no zoom sessions"));
    }
    let (w, h) = stimulus.dims();

    let mut by_participant: BTreeMap<&str, Vec<&ZoomSession>> = BTreeMap::new();
    for s in sessions {
        if s.stimulus_id != stimulus.id {
            return Err(Error::param(format!(
                "session for {} passed with stimulus {}",
                s.stimulus_id, stimulus.id
            )));
        }
        s.validate(stimulus)?;
        by_participant.entry(&s.participant_id).or_default().push(s);
    }

    let mut total = Grid::zeros(w, h);
    for group in by_participant.values_mut() {
        // canonical order so the result does not depend on input order
        group.sort_by(|a, b| a.start_ms().total_cmp(&b.start_ms()));
        let mut acc = Grid::zeros(w, h);
        let mut elapsed = 0.0;
        for session in group.iter() {
            if session.duration_ms() <= 0.0 {
                continue;
            }
            for (event, dt) in session.intervals() {
                if dt <= 0.0 {
                    continue;
                }
                paint(&mut acc, &event.viewport, dt * zoom_level(&event.viewport, stimulus)?);
                elapsed += dt;
            }
        }
        if elapsed <= 0.0 {
            // every session was instantaneous: the last viewport stands for the whole view
            let last = group
                .last()
                .and_then(|s| s.events.last())
                .expect("validated sessions have events");
            paint(&mut acc, &last.viewport, zoom_level(&last.viewport, stimulus)?);
            elapsed = 1.0;
        }
        for (t, a) in total.as_mut_slice().iter_mut().zip(acc.as_slice()) {
            *t += a / elapsed;
        }
    }
    let n = by_participant.len() as f64;
    total.as_mut_slice().iter_mut().for_each(|v| *v /= n);
    AttentionHeatmap::new(&stimulus.id, Provenance::Zoommaps, total)
}

fn paint(grid: &mut Grid, viewport: &Rect, value: f64) {
    let (xs, ys) = viewport.pixel_span(grid.width(), grid.height());
    let w = grid.width();
    for y in ys {
        for v in &mut grid.as_mut_slice()[y * w + xs.start..y * w + xs.end] {
            *v += value;
        }
    }
}
