use std::path::Path;

use attnlab_core::codecharts::ChartParams;
use attnlab_core::heatmaps::BubbleTask;
use attnlab_core::quality::ValidationConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ServiceError;

/// Everything that influences an assignment, a verdict or a heatmap.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub validation: ValidationConfig,
    pub assignment: AssignmentConfig,
    pub heatmap: HeatmapConfig,
    pub chart: ChartParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AssignmentConfig {
    /// Trials after the CodeCharts screening block; for the other
    /// interfaces the number of regular images. `None` uses every stimulus once.
    pub trials: Option<usize>,
    /// Share of post-screening CodeCharts trials that are validation trials.
    pub validation_rate: f64,
    pub image_exposure_ms: f64,
    pub chart_exposure_ms: f64,
    pub fixation_cross_ms: f64,
    /// Minimum exploration time per image in ZoomMaps.
    pub zoom_min_view_ms: f64,
    /// Validation designs mixed into an ImportAnnots assignment.
    pub importannots_validation_designs: usize,
    pub bubble_task: BubbleTask,
    pub bubble_view_ms: f64,
}

impl Default for AssignmentConfig {
    fn default() -> Self {
        AssignmentConfig {
            trials: None,
            validation_rate: 0.25,
            image_exposure_ms: 3_000.0,
            chart_exposure_ms: 400.0,
            fixation_cross_ms: 1_000.0,
            zoom_min_view_ms: 10_000.0,
            importannots_validation_designs: 3,
            bubble_task: BubbleTask::FreeView,
            bubble_view_ms: 10_000.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeatmapConfig {
    pub codecharts_sigma: f64,
    pub bubbleview_sigma: f64,
    pub fixation_sigma: f64,
}

impl Default for HeatmapConfig {
    fn default() -> Self {
        HeatmapConfig {
            codecharts_sigma: attnlab_core::heatmaps::DEFAULT_CODECHARTS_SIGMA,
            bubbleview_sigma: attnlab_core::heatmaps::DEFAULT_BUBBLE_SIGMA,
            fixation_sigma: attnlab_core::heatmaps::DEFAULT_FIXATION_SIGMA,
        }
    }
}

impl ServiceConfig {
    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ServiceConfig = serde_json::from_str(&text)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), ServiceError> {
        self.validation.validate().map_err(|e| ServiceError::Config(e.to_string()))?;
        self.chart.check().map_err(|e| ServiceError::Config(e.to_string()))?;
        let a = &self.assignment;
        if !(0.0..=1.0).contains(&a.validation_rate) {
            return Err(ServiceError::Config("assignment.validation_rate must be in [0, 1]".into()));
        }
        let times = [
            a.image_exposure_ms,
            a.chart_exposure_ms,
            a.fixation_cross_ms,
            a.zoom_min_view_ms,
            a.bubble_view_ms,
        ];
        if times.iter().any(|t| !(*t >= 0.0)) {
            return Err(ServiceError::Config("assignment times must be >= 0".into()));
        }
        let h = &self.heatmap;
        if [h.codecharts_sigma, h.bubbleview_sigma, h.fixation_sigma].iter().any(|s| !(*s > 0.0)) {
            return Err(ServiceError::Config("heatmap sigmas must be positive".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form. Two configs hash equal
    /// exactly when every threshold and parameter matches.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pass_checks_and_hash_stably() {
        let cfg = ServiceConfig::default();
        cfg.check().unwrap();
        assert_eq!(cfg.hash(), ServiceConfig::default().hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn any_threshold_change_changes_the_hash() {
        let mut cfg = ServiceConfig::default();
        cfg.validation.importannots.min_iou = 0.5;
        assert_ne!(cfg.hash(), ServiceConfig::default().hash());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg: ServiceConfig = serde_json::from_str(r#"{"validation": {"zoom": {"min_image_time_ms": 1000}}}"#).unwrap();
        assert_eq!(cfg.validation.zoom.min_image_time_ms, 1000.0);
        assert_eq!(cfg.validation.zoom.min_total_time_ms, 180_000.0);
        assert_eq!(cfg.assignment.chart_exposure_ms, 400.0);
    }

    #[test]
    fn out_of_range_rejected() {
        let mut cfg = ServiceConfig::default();
        cfg.validation.zoom.min_zoomed_image_frac = 1.2;
        assert!(cfg.check().is_err());
        let mut cfg = ServiceConfig::default();
        cfg.assignment.validation_rate = -0.1;
        assert!(cfg.check().is_err());
    }
}
