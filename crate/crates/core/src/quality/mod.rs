//! Participant validation rules.
//!
//! Every rule is recorded in the verdict with the value observed and the
//! threshold it was held to, whether it passed or not, so a verdict can be
//! audited without re-running the check.

mod bubbleview;
mod codecharts;
mod config;
mod importannots;
mod verdict;
mod zoom;

pub use bubbleview::{quartiles, validate_bubbleview};
pub use codecharts::{
    longest_same_spot_run, validate_codecharts, validate_codecharts_full, validate_codecharts_screening,
    ResolvedTrial, TrialRole,
};
pub use config::{BubbleViewRules, CodeChartsRules, ImportAnnotsRules, ValidationConfig, ZoomRules};
pub use importannots::{iou, validate_importannots, ValidationAnnotation};
pub use verdict::{Comparison, Interface, QualityVerdict, RuleOutcome};
pub use zoom::validate_zoom;
