use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Thresholds for every validation rule. Defaults follow the original
/// study protocol except where noted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationConfig {
    pub zoom: ZoomRules,
    pub codecharts: CodeChartsRules,
    pub importannots: ImportAnnotsRules,
    pub bubbleview: BubbleViewRules,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZoomRules {
    /// Minimum viewing time for an image to count as viewed (1–5 s in practice).
    pub min_image_time_ms: f64,
    pub min_viewed_image_frac: f64,
    pub min_total_time_ms: f64,
    pub min_zoomed_image_frac: f64,
}

impl Default for ZoomRules {
    fn default() -> Self {
        ZoomRules {
            min_image_time_ms: 5_000.0,
            min_viewed_image_frac: 0.85,
            min_total_time_ms: 180_000.0,
            min_zoomed_image_frac: 0.20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CodeChartsRules {
    pub screening_normal_trials: usize,
    pub screening_validation_trials: usize,
    pub max_screening_nonexistent: usize,
    /// A participant fails when strictly more than this share of validation codes is missed.
    pub max_validation_miss_rate: f64,
    /// Consecutive reports within `same_spot_radius_px` of their centroid
    /// that mark a participant as staring at one spot. Not from the protocol.
    pub same_spot_run: usize,
    pub same_spot_radius_px: f64,
}

impl Default for CodeChartsRules {
    fn default() -> Self {
        CodeChartsRules {
            screening_normal_trials: 3,
            screening_validation_trials: 3,
            max_screening_nonexistent: 1,
            max_validation_miss_rate: 0.25,
            same_spot_run: 8,
            same_spot_radius_px: 100.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImportAnnotsRules {
    /// Images allowed to go without any annotation.
    pub max_empty_images: usize,
    pub min_iou: f64,
    pub min_validation_passes: usize,
}

impl Default for ImportAnnotsRules {
    fn default() -> Self {
        ImportAnnotsRules {
            max_empty_images: 1,
            min_iou: 0.55,
            min_validation_passes: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BubbleViewRules {
    pub min_description_chars: usize,
    pub min_clicks_per_image_description: f64,
    pub min_clicks_per_image_free_view: f64,
    pub iqr_multiplier: f64,
    /// Below this cohort size the IQR rule is skipped.
    pub min_cohort_for_iqr: usize,
}

impl Default for BubbleViewRules {
    fn default() -> Self {
        BubbleViewRules {
            min_description_chars: 150,
            min_clicks_per_image_description: 10.0,
            min_clicks_per_image_free_view: 2.0,
            iqr_multiplier: 1.5,
            min_cohort_for_iqr: 4,
        }
    }
}

impl ValidationConfig {
    pub fn validate(&self) -> Result<()> {
        let fracs = [
            ("zoom.min_viewed_image_frac", self.zoom.min_viewed_image_frac),
            ("zoom.min_zoomed_image_frac", self.zoom.min_zoomed_image_frac),
            ("codecharts.max_validation_miss_rate", self.codecharts.max_validation_miss_rate),
            ("importannots.min_iou", self.importannots.min_iou),
        ];
        for (name, v) in fracs {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(format!("{name} = {v} is not in [0, 1]")));
            }
        }
        let non_negative = [
            ("zoom.min_image_time_ms", self.zoom.min_image_time_ms),
            ("zoom.min_total_time_ms", self.zoom.min_total_time_ms),
            ("codecharts.same_spot_radius_px", self.codecharts.same_spot_radius_px),
            ("bubbleview.min_clicks_per_image_description", self.bubbleview.min_clicks_per_image_description),
            ("bubbleview.min_clicks_per_image_free_view", self.bubbleview.min_clicks_per_image_free_view),
            ("bubbleview.iqr_multiplier", self.bubbleview.iqr_multiplier),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) {
                return Err(Error::param(format!("{name} = {v} must be >= 0")));
            }
        }
        if self.codecharts.same_spot_run < 2 {
            return Err(Error::param("codecharts.same_spot_run must be >= 2"));
        }
        Ok(())
    }
}
