//! Attention heatmaps from crowdsourced interaction logs.
//!
//! Four collection methods feed one representation. Zoom sessions on a
//! phone, self-reported codechart triplets, importance masks and
//! deblurring clicks each become an [`AttentionHeatmap`] over the stimulus,
//! and those heatmaps are compared with each other and with eye-tracking
//! fixations using CC and NSS.
//!
//! * [`heatmaps`] builds a heatmap from each interface's logs.
//! * [`codecharts`] generates jittered triplet grids and resolves typed codes.
//! * [`quality`] applies the per-interface participant validation rules.
//! * [`metrics`] holds CC, NSS, inter-observer consistency, element ranking,
//!   participant saturation and cost.
//! * [`simulate`] produces synthetic participants from a known attention
//!   density, so the whole pipeline can be checked without crowd data.
//!
//! ```
//! use attnlab_core::{blur::gaussian_blur, metrics::cc, AttentionHeatmap, Grid, Provenance};
//!
//! let mut grid = Grid::zeros(64, 48);
//! grid.set(20, 20, 1.0);
//! let map = AttentionHeatmap::new("img", Provenance::Synthetic, grid)?;
//! let blurred = gaussian_blur(&map, 4.0)?;
//! assert_eq!(blurred.values.argmax(), (20, 20));
//! assert!((cc(&blurred, &blurred)? - 1.0).abs() < 1e-12);
//! # Ok::<(), attnlab_core::Error>(())
//! ```

pub mod blur;
pub mod codecharts;
mod error;
pub mod geometry;
mod grid;
mod heatmap;
pub mod heatmaps;
pub mod io;
mod mask;
pub mod metrics;
pub mod quality;
pub mod simulate;
mod stimulus;

pub use error::{Error, Result};
pub use geometry::{Point, Rect, WindowMapping};
pub use grid::Grid;
pub use heatmap::{mean_std, z_normalize, AttentionHeatmap, Provenance};
pub use mask::{BinaryMask, RleError, Run};
pub use stimulus::{ElementRegion, Fixation, FixationSet, Shape, Stimulus, StimulusKind, StimulusLookup};
