//! Image-space geometry and the mapping between a stimulus and the fixed
//! display window it is shown in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width of the desktop display window stimuli and codecharts share.
pub const DEFAULT_WINDOW_W: u32 = 1000;
/// Height of the desktop display window stimuli and codecharts share.
pub const DEFAULT_WINDOW_H: u32 = 700;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// The pixel containing this point, clamped to a `width × height` grid.
    pub fn pixel(self, width: usize, height: usize) -> (usize, usize) {
        let clamp = |v: f64, n: usize| (v.floor().max(0.0) as usize).min(n.saturating_sub(1));
        (clamp(self.x, width), clamp(self.y, height))
    }
}

/// Axis-aligned rectangle; `(x, y)` is the top-left corner.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn center(&self) -> Point {
        Point::new(self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    /// Half-open containment: left/top edges inside, right/bottom outside.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x && p.x < self.right() && p.y >= self.y && p.y < self.bottom()
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        (x1 > x0 && y1 > y0).then(|| Rect::new(x0, y0, x1 - x0, y1 - y0))
    }

    /// Range of pixel columns and rows whose centers fall inside the rectangle.
    pub fn pixel_span(&self, width: usize, height: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let span = |lo: f64, hi: f64, n: usize| {
            // pixel i is covered when lo <= i + 0.5 < hi
            let start = (lo - 0.5).ceil().max(0.0) as usize;
            let end = ((hi - 0.5).ceil().max(0.0) as usize).min(n);
            start.min(end)..end
        };
        (
            span(self.x, self.right(), width),
            span(self.y, self.bottom(), height),
        )
    }
}

/// Uniform scale plus padding that places an image inside the display window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowMapping {
    pub scale: f64,
    pub pad_left: f64,
    pub pad_top: f64,
    pub window_w: u32,
    pub window_h: u32,
    pub image_w: u32,
    pub image_h: u32,
}

impl WindowMapping {
    /// Fits an image into the window without upscaling, centered.
    pub fn fit(image_w: u32, image_h: u32, window_w: u32, window_h: u32) -> Result<Self> {
        Self::fit_with_max_scale(image_w, image_h, window_w, window_h, 1.0)
    }

    pub fn fit_with_max_scale(
        image_w: u32,
        image_h: u32,
        window_w: u32,
        window_h: u32,
        max_scale: f64,
    ) -> Result<Self> {
        if image_w == 0 || image_h == 0 || window_w == 0 || window_h == 0 {
            return Err(Error::param("image and window dimensions must be >= 1"));
        }
        if !(max_scale > 0.0) {
            return Err(Error::param("max_scale must be positive"));
        }
        let scale = (window_w as f64 / image_w as f64)
            .min(window_h as f64 / image_h as f64)
            .min(max_scale);
        let pad_left = (window_w as f64 - image_w as f64 * scale) / 2.0;
        let pad_top = (window_h as f64 - image_h as f64 * scale) / 2.0;
        Ok(WindowMapping {
            scale,
            pad_left,
            pad_top,
            window_w,
            window_h,
            image_w,
            image_h,
        })
    }

    /// The identity mapping for an image exactly the size of the window.
    pub fn identity(window_w: u32, window_h: u32) -> Self {
        WindowMapping {
            scale: 1.0,
            pad_left: 0.0,
            pad_top: 0.0,
            window_w,
            window_h,
            image_w: window_w,
            image_h: window_h,
        }
    }

    pub fn to_window(&self, p: Point) -> Point {
        Point::new(
            p.x * self.scale + self.pad_left,
            p.y * self.scale + self.pad_top,
        )
    }

    /// Inverse mapping; `None` when the window point lies in the padding.
    pub fn to_image(&self, p: Point) -> Option<Point> {
        let q = Point::new(
            (p.x - self.pad_left) / self.scale,
            (p.y - self.pad_top) / self.scale,
        );
        let inside = q.x >= 0.0
            && q.y >= 0.0
            && q.x < self.image_w as f64
            && q.y < self.image_h as f64;
        inside.then_some(q)
    }

    /// The image region inside the window, in window coordinates.
    pub fn image_rect(&self) -> Rect {
        Rect::new(
            self.pad_left,
            self.pad_top,
            self.image_w as f64 * self.scale,
            self.image_h as f64 * self.scale,
        )
    }
}
