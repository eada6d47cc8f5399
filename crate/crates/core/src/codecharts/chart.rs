use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect, DEFAULT_WINDOW_H, DEFAULT_WINDOW_W};

use super::alphabet::{Alphabet, CODE_LEN};
use super::render::{GLYPH_ADVANCE, GLYPH_HEIGHT};

/// How placement jitter is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JitterMode {
    /// One offset per grid column and one per grid row; suppresses the
    /// gridlike artifacts per-cell jitter leaves in aggregated heatmaps.
    #[default]
    Axis,
    /// Independent offsets for every cell.
    PerCell,
}

/// Chart geometry parameters. Stored in every chart so it can be regenerated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChartParams {
    pub window_w: u32,
    pub window_h: u32,
    /// Nominal distance between neighbouring triplet centers.
    pub spacing: f64,
    /// Maximum jitter per axis, as a fraction of `spacing`.
    pub jitter_frac: f64,
    pub jitter_mode: JitterMode,
    pub alphabet: Alphabet,
    /// Horizontal advance of one glyph (font size ~16 px).
    pub glyph_w: f64,
    pub glyph_h: f64,
}

impl Default for ChartParams {
    fn default() -> Self {
        ChartParams {
            window_w: DEFAULT_WINDOW_W,
            window_h: DEFAULT_WINDOW_H,
            spacing: 100.0,
            jitter_frac: 0.25,
            jitter_mode: JitterMode::Axis,
            alphabet: Alphabet::default(),
            glyph_w: GLYPH_ADVANCE as f64,
            glyph_h: GLYPH_HEIGHT as f64,
        }
    }
}

impl ChartParams {
    pub fn triplet_size(&self) -> (f64, f64) {
        (self.glyph_w * CODE_LEN as f64, self.glyph_h)
    }

    pub fn jitter_bound(&self) -> f64 {
        self.jitter_frac * self.spacing
    }

    pub fn check(&self) -> Result<()> {
        if self.window_w == 0 || self.window_h == 0 {
            return Err(Error::param("window dimensions must be >= 1"));
        }
        if !(self.spacing >= 3.0 * self.glyph_w) {
            return Err(Error::param(format!(
                "spacing {} is below three glyph widths ({})",
                self.spacing,
                3.0 * self.glyph_w
            )));
        }
        if !(0.0..0.5).contains(&self.jitter_frac) {
            return Err(Error::param(format!(
                "jitter_frac {} outside [0, 0.5)",
                self.jitter_frac
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripletPlacement {
    pub code: String,
    pub center: Point,
    pub bbox: Rect,
    /// Column and row of the nominal grid cell this triplet occupies.
    pub cell: (u32, u32),
}

/// Target region of a validation chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationTarget {
    pub cue_center: Point,
    pub capture_radius: f64,
    pub correct_codes: Vec<String>,
}

/// A jittered grid of unique triplet codes, in display-window coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeChart {
    pub chart_id: String,
    pub seed: u64,
    pub window_w: u32,
    pub window_h: u32,
    pub params: ChartParams,
    pub placements: Vec<TripletPlacement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationTarget>,
}

impl CodeChart {
    pub fn placement(&self, code: &str) -> Option<&TripletPlacement> {
        self.placements.iter().find(|p| p.code == code)
    }

    pub fn is_validation(&self) -> bool {
        self.validation.is_some()
    }

    /// Nominal (pre-jitter) center of a grid cell.
    pub fn nominal_center(&self, cell: (u32, u32)) -> Point {
        let (cols, rows) = grid_shape(&self.params);
        Point::new(
            nominal(self.params.window_w, cols, cell.0, self.params.spacing),
            nominal(self.params.window_h, rows, cell.1, self.params.spacing),
        )
    }

    pub fn nearest(&self, p: Point) -> Option<&TripletPlacement> {
        self.placements
            .iter()
            .min_by(|a, b| a.center.distance(p).total_cmp(&b.center.distance(p)))
    }
}

fn grid_shape(params: &ChartParams) -> (u32, u32) {
    let cols = (params.window_w as f64 / params.spacing).ceil().max(1.0) as u32;
    let rows = (params.window_h as f64 / params.spacing).ceil().max(1.0) as u32;
    (cols, rows)
}

fn nominal(extent: u32, count: u32, i: u32, spacing: f64) -> f64 {
    extent as f64 / 2.0 + (i as f64 - (count as f64 - 1.0) / 2.0) * spacing
}

/// Draws an offset within `±bound` that keeps `center` inside `[lo, hi]`.
fn draw_offset(rng: &mut impl Rng, center: f64, bound: f64, lo: f64, hi: f64) -> Result<f64> {
    let min = (-bound).max(lo - center);
    let max = bound.min(hi - center);
    if min > max {
        return Err(Error::param("window too small to fit a triplet at this spacing"));
    }
    if min == max {
        return Ok(min);
    }
    Ok(rng.random_range(min..=max))
}

/// Generates a chart covering the whole window with unique codes.
pub fn generate_codechart(chart_id: impl Into<String>, params: &ChartParams, seed: u64) -> Result<CodeChart> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (cols, rows) = grid_shape(params);
    let count = (cols * rows) as usize;
    let capacity = params.alphabet.capacity();
    if count > capacity {
        return Err(Error::Capacity {
            needed: count,
            available: capacity,
        });
    }

    let (tw, th) = params.triplet_size();
    let bound = params.jitter_bound();
    let (x_lo, x_hi) = (tw / 2.0, params.window_w as f64 - tw / 2.0);
    let (y_lo, y_hi) = (th / 2.0, params.window_h as f64 - th / 2.0);
    let xs: Vec<f64> = (0..cols).map(|i| nominal(params.window_w, cols, i, params.spacing)).collect();
    let ys: Vec<f64> = (0..rows).map(|j| nominal(params.window_h, rows, j, params.spacing)).collect();

    let mut centers = Vec::with_capacity(count);
    match params.jitter_mode {
        JitterMode::Axis => {
            let dx = xs
                .iter()
                .map(|&x| draw_offset(&mut rng, x, bound, x_lo, x_hi))
                .collect::<Result<Vec<_>>>()?;
            let dy = ys
                .iter()
                .map(|&y| draw_offset(&mut rng, y, bound, y_lo, y_hi))
                .collect::<Result<Vec<_>>>()?;
            for (j, &y) in ys.iter().enumerate() {
                for (i, &x) in xs.iter().enumerate() {
                    centers.push(((i as u32, j as u32), Point::new(x + dx[i], y + dy[j])));
                }
            }
        }
        JitterMode::PerCell => {
            for (j, &y) in ys.iter().enumerate() {
                for (i, &x) in xs.iter().enumerate() {
                    let dx = draw_offset(&mut rng, x, bound, x_lo, x_hi)?;
                    let dy = draw_offset(&mut rng, y, bound, y_lo, y_hi)?;
                    centers.push(((i as u32, j as u32), Point::new(x + dx, y + dy)));
                }
            }
        }
    }

    let codes = index::sample(&mut rng, capacity, count);
    let placements = centers
        .into_iter()
        .zip(codes.iter())
        .map(|((cell, center), code)| TripletPlacement {
            code: params.alphabet.code(code),
            center,
            bbox: Rect::new(center.x - tw / 2.0, center.y - th / 2.0, tw, th),
            cell,
        })
        .collect();

    Ok(CodeChart {
        chart_id: chart_id.into(),
        seed,
        window_w: params.window_w,
        window_h: params.window_h,
        params: params.clone(),
        placements,
        validation: None,
    })
}

/// Generates a chart whose correct codes are the triplets near a cue.
///
/// `capture_radius` defaults to the grid spacing and must be at least half of
/// it. When no center falls inside the radius the nearest triplet is
/// accepted, so the correct set is never empty.
pub fn generate_validation_chart(
    chart_id: impl Into<String>,
    cue_center: Point,
    params: &ChartParams,
    capture_radius: Option<f64>,
    seed: u64,
) -> Result<CodeChart> {
    let radius = capture_radius.unwrap_or(params.spacing);
    if !(radius >= params.spacing / 2.0) {
        return Err(Error::param(format!(
            "capture radius {radius} is below half the spacing ({})",
            params.spacing / 2.0
        )));
    }
    let window = Rect::new(0.0, 0.0, params.window_w as f64, params.window_h as f64);
    if !window.contains(cue_center) {
        return Err(Error::param("validation cue lies outside the window"));
    }
    let mut chart = generate_codechart(chart_id, params, seed)?;
    let mut correct: Vec<String> = chart
        .placements
        .iter()
        .filter(|p| p.center.distance(cue_center) <= radius)
        .map(|p| p.code.clone())
        .collect();
    if correct.is_empty() {
        let nearest = chart.nearest(cue_center).expect("charts are never empty");
        correct.push(nearest.code.clone());
    }
    correct.sort();
    chart.validation = Some(ValidationTarget {
        cue_center,
        capture_radius: radius,
        correct_codes: correct,
    });
    Ok(chart)
}
