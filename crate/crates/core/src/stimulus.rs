use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect, WindowMapping};
use crate::mask::BinaryMask;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StimulusKind {
    Natural,
    GraphicDesign,
    Resume,
    Infographic,
    Visualization,
    Validation,
}

/// An image shown to participants. Only its geometry is needed here; the
/// pixels live at `image_path` and are never decoded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stimulus {
    pub id: String,
    pub width_px: u32,
    pub height_px: u32,
    pub kind: StimulusKind,
    #[serde(default)]
    pub image_path: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub elements: Vec<ElementRegion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixations: Option<FixationSet>,
    /// Location of the single cue on a validation stimulus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cue: Option<Point>,
}

impl Stimulus {
    pub fn new(id: impl Into<String>, width_px: u32, height_px: u32, kind: StimulusKind) -> Self {
        Stimulus {
            id: id.into(),
            width_px,
            height_px,
            kind,
            image_path: None,
            elements: Vec::new(),
            fixations: None,
            cue: None,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width_px as usize, self.height_px as usize)
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0.0, 0.0, self.width_px as f64, self.height_px as f64)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.bounds().contains(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::param(format!("stimulus {}: dimensions must be >= 1", self.id)));
        }
        let bounds = self.bounds();
        for el in &self.elements {
            let bb = el.shape.bounding_box();
            if bb.x < 0.0 || bb.y < 0.0 || bb.right() > bounds.w || bb.bottom() > bounds.h {
                return Err(Error::param(format!(
                    "stimulus {}: element {} leaves the image",
                    self.id, el.id
                )));
            }
            if !(el.shape.area() > 0.0) {
                return Err(Error::param(format!(
                    "stimulus {}: element {} has no area",
                    self.id, el.id
                )));
            }
        }
        if self.kind == StimulusKind::Validation && self.cue.is_none() {
            return Err(Error::param(format!(
                "validation stimulus {} needs a cue location",
                self.id
            )));
        }
        if let Some(cue) = self.cue {
            if !self.contains(cue) {
                return Err(Error::param(format!("stimulus {}: cue outside image", self.id)));
            }
        }
        if let Some(fix) = &self.fixations {
            fix.check_bounds(self.width_px, self.height_px)?;
        }
        Ok(())
    }

    /// Places the stimulus in a display window without upscaling.
    pub fn fit_to_window(&self, window_w: u32, window_h: u32) -> Result<WindowMapping> {
        WindowMapping::fit(self.width_px, self.height_px, window_w, window_h)
    }

    /// Union of the element rasterizations; the ground truth for validation designs.
    pub fn element_mask(&self) -> BinaryMask {
        let (w, h) = self.dims();
        let mut mask = BinaryMask::empty(w, h);
        for el in &self.elements {
            mask.union_with(&el.shape.rasterize(w, h))
                .expect("rasterize matches stimulus dims");
        }
        mask
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Rect(Rect),
    Polygon { points: Vec<Point> },
}

impl Shape {
    pub fn bounding_box(&self) -> Rect {
        match self {
            Shape::Rect(r) => *r,
            Shape::Polygon { points } => {
                let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
                let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                for p in points {
                    x0 = x0.min(p.x);
                    y0 = y0.min(p.y);
                    x1 = x1.max(p.x);
                    y1 = y1.max(p.y);
                }
                Rect::new(x0, y0, x1 - x0, y1 - y0)
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Shape::Rect(r) => r.area(),
            Shape::Polygon { points } => {
                let n = points.len();
                let twice: f64 = (0..n)
                    .map(|i| {
                        let (a, b) = (points[i], points[(i + 1) % n]);
                        a.x * b.y - b.x * a.y
                    })
                    .sum();
                twice.abs() / 2.0
            }
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            Shape::Rect(r) => r.contains(p),
            Shape::Polygon { points } => {
                // even-odd crossing test
                let mut inside = false;
                let n = points.len();
                let mut j = n.wrapping_sub(1);
                for i in 0..n {
                    let (a, b) = (points[i], points[j]);
                    if (a.y > p.y) != (b.y > p.y) {
                        let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                        if p.x < x {
                            inside = !inside;
                        }
                    }
                    j = i;
                }
                inside
            }
        }
    }

    /// Selects every pixel whose center lies inside the shape.
    pub fn rasterize(&self, width: usize, height: usize) -> BinaryMask {
        let mut mask = BinaryMask::empty(width, height);
        let (xs, ys) = self.bounding_box().pixel_span(width, height);
        for y in ys {
            for x in xs.clone() {
                if self.contains(Point::new(x as f64 + 0.5, y as f64 + 0.5)) {
                    mask.set(x, y, true);
                }
            }
        }
        mask
    }
}

/// A labelled design element (title, logo, photo, ...).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementRegion {
    pub id: String,
    pub shape: Shape,
    #[serde(default)]
    pub label: String,
}

impl ElementRegion {
    pub fn rect(id: impl Into<String>, rect: Rect) -> Self {
        ElementRegion {
            id: id.into(),
            shape: Shape::Rect(rect),
            label: String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixation {
    pub participant_id: String,
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_ms: Option<f64>,
}

impl Fixation {
    pub fn new(participant_id: impl Into<String>, x: f64, y: f64) -> Self {
        Fixation {
            participant_id: participant_id.into(),
            x,
            y,
            t_ms: None,
        }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Ground-truth gaze points, possibly from several participants.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FixationSet {
    pub entries: Vec<Fixation>,
}

impl FixationSet {
    pub fn new(entries: Vec<Fixation>) -> Self {
        FixationSet { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.entries.iter().map(Fixation::point)
    }

    pub fn check_bounds(&self, width: u32, height: u32) -> Result<()> {
        for (i, f) in self.entries.iter().enumerate() {
            let ok = f.x >= 0.0 && f.y >= 0.0 && f.x < width as f64 && f.y < height as f64;
            if !ok {
                return Err(Error::param(format!(
                    "fixation {i} at ({}, {}) outside {width}x{height}",
                    f.x, f.y
                )));
            }
        }
        Ok(())
    }

    /// Splits the set per participant, ordered by participant id.
    pub fn by_participant(&self) -> Vec<(String, FixationSet)> {
        let mut groups: std::collections::BTreeMap<&str, Vec<Fixation>> = Default::default();
        for f in &self.entries {
            groups.entry(&f.participant_id).or_default().push(f.clone());
        }
        groups
            .into_iter()
            .map(|(id, entries)| (id.to_owned(), FixationSet { entries }))
            .collect()
    }

    pub fn merged<'a>(sets: impl IntoIterator<Item = &'a FixationSet>) -> FixationSet {
        FixationSet {
            entries: sets.into_iter().flat_map(|s| s.entries.iter().cloned()).collect(),
        }
    }
}

/// Resolves stimuli by id.
pub trait StimulusLookup {
    fn stimulus(&self, id: &str) -> Option<&Stimulus>;

    fn require(&self, id: &str) -> Result<&Stimulus> {
        self.stimulus(id).ok_or_else(|| Error::ReferentialIntegrity(id.to_owned()))
    }
}

impl StimulusLookup for [Stimulus] {
    fn stimulus(&self, id: &str) -> Option<&Stimulus> {
        self.iter().find(|s| s.id == id)
    }
}

impl StimulusLookup for Vec<Stimulus> {
    fn stimulus(&self, id: &str) -> Option<&Stimulus> {
        self.as_slice().stimulus(id)
    }
}

impl StimulusLookup for std::collections::HashMap<String, Stimulus> {
    fn stimulus(&self, id: &str) -> Option<&Stimulus> {
        self.get(id)
    }
}

impl StimulusLookup for std::collections::BTreeMap<String, Stimulus> {
    fn stimulus(&self, id: &str) -> Option<&Stimulus> {
        self.get(id)
    }
}
