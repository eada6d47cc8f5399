use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::density::GroundTruthDensity;
use super::participant::{stream_rng, SyntheticParticipant};
use crate::codecharts::CodeChart;
use crate::error::{Error, Result};
use crate::geometry::{Point, Rect, WindowMapping};
use crate::heatmaps::{AnnotationMask, AnnotationTool, BubbleTask, Click, ClickSession, CodeReport, ZoomEvent, ZoomSession};
use crate::mask::BinaryMask;
use crate::stimulus::{ElementRegion, Fixation, FixationSet, Stimulus};

/// Share of a zoom session spent on the initial full view.
const OVERVIEW_SHARE: f64 = 0.2;

const FILLER: &str = "the layout draws the eye to the headline first and then down to the picture ";

/// `n` independent draws from the density, placed at pixel centers.
pub fn sample_fixations(gt: &GroundTruthDensity, participant_id: &str, n: usize, seed: u64) -> FixationSet {
    let mut rng = stream_rng(seed, &gt.stimulus_id, "fixations");
    let entries = (0..n)
        .map(|_| {
            let (x, y) = gt.sample_pixel(&mut rng);
            Fixation::new(participant_id, x as f64 + 0.5, y as f64 + 0.5)
        })
        .collect();
    FixationSet::new(entries)
}

/// One self-report on one chart. On a validation chart the participant
/// looks at the cue instead of sampling the density.
pub fn sim_codecharts(
    gt: &GroundTruthDensity,
    chart: &CodeChart,
    mapping: &WindowMapping,
    participant: &SyntheticParticipant,
) -> Result<CodeReport> {
    participant.validate()?;
    if (mapping.window_w, mapping.window_h) != (chart.window_w, chart.window_h) {
        return Err(Error::param("mapping and chart disagree on the window size"));
    }
    if (mapping.image_w as usize, mapping.image_h as usize) != gt.dims() {
        return Err(Error::param("mapping and density disagree on the image size"));
    }
    let mut rng = stream_rng(participant.seed, &chart.chart_id, "codecharts");
    let misses = rng.random_bool(participant.miss_rate);
    let (px, py) = gt.sample_pixel(&mut rng);
    let noise = jitter(&mut rng, participant.report_noise_px);
    let response_t_ms = rng.random_range(1_500.0..4_000.0);

    let typed_code = if misses {
        absent_code(chart, &mut rng)
    } else {
        let looked_at = match &chart.validation {
            Some(v) => v.cue_center,
            None => mapping.to_window(Point::new(px as f64 + 0.5, py as f64 + 0.5)),
        };
        let seen = Point::new(looked_at.x + noise.0, looked_at.y + noise.1);
        chart
            .nearest(seen)
            .ok_or_else(|| Error::empty("chart has no triplets"))?
            .code
            .clone()
    };
    Ok(CodeReport {
        participant_id: participant.id.clone(),
        stimulus_id: gt.stimulus_id.clone(),
        chart_id: chart.chart_id.clone(),
        typed_code,
        response_t_ms,
    })
}

fn absent_code(chart: &CodeChart, rng: &mut impl Rng) -> String {
    let alphabet = &chart.params.alphabet;
    loop {
        let code = alphabet.code(rng.random_range(0..alphabet.capacity()));
        if chart.placement(&code).is_none() {
            return code;
        }
    }
}

/// Starts on the full image, then zooms in nested steps toward the
/// strongest density peaks. Stronger peaks get deeper zoom and longer dwell.
pub fn sim_zoom(gt: &GroundTruthDensity, stimulus: &Stimulus, participant: &SyntheticParticipant) -> Result<ZoomSession> {
    participant.validate()?;
    check_dims(gt, stimulus)?;
    let mut rng = stream_rng(participant.seed, &stimulus.id, "zoom");
    let (w, h) = (stimulus.width_px as f64, stimulus.height_px as f64);
    let total = participant.zoom_session_ms;
    let mut events = vec![ZoomEvent::new(0.0, stimulus.bounds())];

    let peaks = gt.peaks(participant.zoom_affinity, w.min(h) / 6.0);
    let mut t = if peaks.is_empty() { 0.0 } else { total * OVERVIEW_SHARE };
    let mass: f64 = peaks.iter().map(|p| p.mass).sum();
    let top = peaks.first().map_or(1.0, |p| p.density);
    for peak in &peaks {
        let budget = total * (1.0 - OVERVIEW_SHARE) * peak.mass / mass;
        let levels = ((participant.zoom_depth as f64 * peak.density / top).round() as u32).max(1);
        let (nx, ny) = jitter(&mut rng, participant.report_noise_px);
        let target = Point::new(peak.center().x + nx, peak.center().y + ny);
        for level in 1..=levels {
            let scale = 0.5f64.powi(level as i32);
            events.push(ZoomEvent::new(t, centered_viewport(target, w * scale, h * scale, w, h)));
            t += (budget / levels as f64).max(1.0);
        }
    }
    let session_end_ms = if peaks.is_empty() { total } else { t };
    Ok(ZoomSession {
        participant_id: participant.id.clone(),
        stimulus_id: stimulus.id.clone(),
        events,
        session_end_ms: Some(session_end_ms),
    })
}

fn centered_viewport(c: Point, vw: f64, vh: f64, w: f64, h: f64) -> Rect {
    let x = (c.x - vw / 2.0).clamp(0.0, w - vw);
    let y = (c.y - vh / 2.0).clamp(0.0, h - vh);
    Rect::new(x, y, vw, vh)
}

/// Clicks drawn from the density with report noise, kept inside the image.
pub fn sim_bubble(gt: &GroundTruthDensity, stimulus: &Stimulus, participant: &SyntheticParticipant) -> Result<ClickSession> {
    participant.validate()?;
    check_dims(gt, stimulus)?;
    let mut rng = stream_rng(participant.seed, &stimulus.id, "bubble");
    let (w, h) = (stimulus.width_px as f64, stimulus.height_px as f64);
    let mut t = 0.0;
    let clicks = (0..participant.clicks_per_image)
        .map(|_| {
            let (px, py) = gt.sample_pixel(&mut rng);
            let (nx, ny) = jitter(&mut rng, participant.report_noise_px);
            t += rng.random_range(500.0..2_500.0);
            Click {
                t_ms: t,
                x: (px as f64 + 0.5 + nx).clamp(0.5, w - 0.5),
                y: (py as f64 + 0.5 + ny).clamp(0.5, h - 0.5),
            }
        })
        .collect();
    let description = (participant.bubble_task == BubbleTask::Description)
        .then(|| FILLER.chars().cycle().take(participant.description_len).collect());
    Ok(ClickSession {
        participant_id: participant.id.clone(),
        stimulus_id: stimulus.id.clone(),
        clicks,
        description,
        task: participant.bubble_task,
    })
}

/// Selects each element with probability equal to its weight (capped at 1)
/// and paints the union, then erodes or dilates by up to `mask_noise_px`.
pub fn sim_annotation(
    elements: &[(ElementRegion, f64)],
    stimulus: &Stimulus,
    participant: &SyntheticParticipant,
) -> Result<AnnotationMask> {
    participant.validate()?;
    let (w, h) = stimulus.dims();
    let mut rng = stream_rng(participant.seed, &stimulus.id, "annotation");
    let mut mask = BinaryMask::empty(w, h);
    for (element, weight) in elements {
        if !(*weight >= 0.0) {
            return Err(Error::param(format!("element `{}` has a negative weight", element.id)));
        }
        if rng.random::<f64>() < weight.min(1.0) {
            mask.union_with(&element.shape.rasterize(w, h))?;
        }
    }
    if participant.mask_noise_px > 0 {
        let n = participant.mask_noise_px as i32;
        mask = mask.morph(rng.random_range(-n..=n));
    }
    Ok(AnnotationMask {
        participant_id: participant.id.clone(),
        stimulus_id: stimulus.id.clone(),
        tool: AnnotationTool::PolygonFill,
        mask,
    })
}

fn jitter(rng: &mut impl Rng, sd: f64) -> (f64, f64) {
    if sd == 0.0 {
        return (0.0, 0.0);
    }
    let normal = Normal::new(0.0, sd).expect("validated noise");
    (normal.sample(rng), normal.sample(rng))
}

fn check_dims(gt: &GroundTruthDensity, stimulus: &Stimulus) -> Result<()> {
    if gt.dims() != stimulus.dims() {
        return Err(Error::DimensionMismatch {
            expected: stimulus.dims(),
            found: gt.dims(),
        });
    }
    Ok(())
}
