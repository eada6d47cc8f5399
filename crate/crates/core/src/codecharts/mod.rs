//! Codechart generation and lookup of self-reported codes.

mod alphabet;
mod chart;
mod render;
mod resolve;

pub use alphabet::{Alphabet, CODE_LEN, DEFAULT_ALPHABET};
pub use chart::{
    generate_codechart, generate_validation_chart, ChartParams, CodeChart, JitterMode,
    TripletPlacement, ValidationTarget,
};
pub use render::{render_pixels, render_png, GLYPH_ADVANCE, GLYPH_HEIGHT};
pub use resolve::{normalize_code, resolve_report, ReportStatus, Resolution};
