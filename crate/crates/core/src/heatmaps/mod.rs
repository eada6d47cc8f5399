//! Per-interface recipes that turn interaction logs into attention heatmaps.

mod logs;
mod points;
mod zoom;

pub use logs::{
    AnnotationMask, AnnotationTool, BubbleTask, Click, ClickSession, CodeReport, ZoomEvent,
    ZoomSession, SESSION_END_GRACE_MS,
};
pub use points::{
    bubbleview_heatmap, codecharts_heatmap, fixation_heatmap, importannots_heatmap,
    report_locations, ChartLookup, DEFAULT_BUBBLE_SIGMA, DEFAULT_CODECHARTS_SIGMA,
    DEFAULT_FIXATION_SIGMA,
};
pub use zoom::{zoom_heatmap, zoom_level};
