use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Which collection method produced a heatmap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Zoommaps,
    Codecharts,
    Importannots,
    Bubbleview,
    Eyetracking,
    Synthetic,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Zoommaps => "zoommaps",
            Provenance::Codecharts => "codecharts",
            Provenance::Importannots => "importannots",
            Provenance::Bubbleview => "bubbleview",
            Provenance::Eyetracking => "eyetracking",
            Provenance::Synthetic => "synthetic",
        }
    }
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "zoommaps" => Provenance::Zoommaps,
            "codecharts" => Provenance::Codecharts,
            "importannots" => Provenance::Importannots,
            "bubbleview" => Provenance::Bubbleview,
            "eyetracking" => Provenance::Eyetracking,
            "synthetic" => Provenance::Synthetic,
            other => return Err(Error::param(format!("unknown provenance `{other}`"))),
        })
    }
}

/// Dense attention grid over one stimulus; larger values mean more attention.
///
/// Raw heatmaps are non-negative. The z-scored form used by the metrics is
/// flagged with `normalized` and may hold negative values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttentionHeatmap {
    pub stimulus_id: String,
    pub provenance: Provenance,
    #[serde(default)]
    pub normalized: bool,
    pub values: Grid,
}

impl AttentionHeatmap {
    pub fn new(stimulus_id: impl Into<String>, provenance: Provenance, values: Grid) -> Result<Self> {
        if !values.all_finite() {
            return Err(Error::param("heatmap values must be finite"));
        }
        if values.as_slice().iter().any(|&v| v < 0.0) {
            return Err(Error::param("raw heatmap values must be non-negative"));
        }
        Ok(AttentionHeatmap {
            stimulus_id: stimulus_id.into(),
            provenance,
            normalized: false,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.values.dims()
    }

    pub fn with_values(&self, values: Grid) -> Self {
        AttentionHeatmap {
            values,
            ..self.clone()
        }
    }

    /// Zero mean, unit population standard deviation.
    pub fn z_normalize(&self) -> Result<AttentionHeatmap> {
        Ok(AttentionHeatmap {
            stimulus_id: self.stimulus_id.clone(),
            provenance: self.provenance,
            normalized: true,
            values: z_normalize(&self.values)?,
        })
    }

    /// Scales values so the maximum is 1; an all-zero map stays all-zero.
    pub fn max_normalized(&self) -> AttentionHeatmap {
        let max = self.values.max();
        if max > 0.0 {
            self.with_values(self.values.map(|v| v / max))
        } else {
            self.clone()
        }
    }
}

/// Mean and population standard deviation, two-pass.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Z-scores a grid: zero mean, unit population standard deviation.
pub fn z_normalize(grid: &Grid) -> Result<Grid> {
    if grid.len() < 2 {
        return Err(Error::param("z-normalization needs more than one pixel"));
    }
    let (mean, std) = mean_std(grid.as_slice());
    let scale = grid.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(std > scale * 1e-12) || !std.is_finite() {
        return Err(Error::ZeroVariance("heatmap"));
    }
    Ok(grid.map(|v| (v - mean) / std))
}
