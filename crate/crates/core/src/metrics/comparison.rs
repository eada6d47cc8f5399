use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::heatmap::AttentionHeatmap;
use crate::heatmaps::fixation_heatmap;
use crate::stimulus::{FixationSet, Stimulus};

use super::{cc, ioc_cc, ioc_nss, nss};

/// One collection method scored against eye-tracking fixations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub cc: f64,
    pub cc_pct_of_ioc: f64,
    pub nss: f64,
    pub nss_pct_of_ioc: f64,
}

/// Heatmaps from several methods against the human consistency ceiling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub ioc: ComparisonRow,
    pub methods: Vec<ComparisonRow>,
}

/// Scores each heatmap against the fixations: CC against the blurred
/// fixation map, NSS at the fixations, both relative to inter-observer
/// consistency.
pub fn compare_to_fixations(
    heatmaps: &[AttentionHeatmap],
    fixations: &FixationSet,
    stimulus: &Stimulus,
    fixation_sigma: f64,
    splits: usize,
    seed: u64,
) -> Result<ComparisonTable> {
    let ioc_cc_value = ioc_cc(fixations, stimulus, fixation_sigma, splits, seed)?.mean;
    let ioc_nss_value = ioc_nss(fixations, stimulus, fixation_sigma)?;
    let ground_truth = fixation_heatmap(fixations, stimulus, fixation_sigma)?;
    let methods = heatmaps
        .iter()
        .map(|h| {
            let c = cc(h, &ground_truth)?;
            let n = nss(h, fixations)?;
            Ok(ComparisonRow {
                method: h.provenance.to_string(),
                cc: c,
                cc_pct_of_ioc: 100.0 * c / ioc_cc_value,
                nss: n,
                nss_pct_of_ioc: 100.0 * n / ioc_nss_value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonTable {
        ioc: ComparisonRow {
            method: "ioc".into(),
            cc: ioc_cc_value,
            cc_pct_of_ioc: 100.0,
            nss: ioc_nss_value,
            nss_pct_of_ioc: 100.0,
        },
        methods,
    })
}
