//! Evaluation metrics for attention heatmaps.

mod comparison;
mod cost;
mod ioc;
mod ranking;
mod saliency;
mod saturation;

pub use comparison::{compare_to_fixations, ComparisonRow, ComparisonTable};
pub use cost::{cost_estimate, CostEstimate, Money};
pub use ioc::{ioc_cc, ioc_nss, IocCc};
pub use ranking::{element_scores, rank_correlation, spearman, ElementScore};
pub use saliency::{cc, cc_grids, nss, nss_grid};
pub use saturation::{saturation, saturation_point, SaturationCurve, SaturationParams};
