//! Inter-observer consistency: how well some observers predict the others.
//! This is the human ceiling the collection methods are measured against.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heatmaps::fixation_heatmap;
use crate::stimulus::{FixationSet, Stimulus};

use super::saliency::{cc, nss};

fn split_participants(fixations: &FixationSet) -> Result<Vec<(String, FixationSet)>> {
    let groups = fixations.by_participant();
    if groups.len() < 2 {
        return Err(Error::param(format!(
            "inter-observer consistency needs at least 2 participants, got {}",
            groups.len()
        )));
    }
    Ok(groups)
}

/// Leave-one-out NSS: each participant's fixations scored on the map built
/// from everyone else, averaged over participants.
pub fn ioc_nss(fixations: &FixationSet, stimulus: &Stimulus, sigma: f64) -> Result<f64> {
    let groups = split_participants(fixations)?;
    let mut total = 0.0;
    for (i, (_, held_out)) in groups.iter().enumerate() {
        let rest = FixationSet::merged(groups.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, (_, f))| f));
        let map = fixation_heatmap(&rest, stimulus, sigma)?;
        total += nss(&map, held_out)?;
    }
    Ok(total / groups.len() as f64)
}

/// Split-half CC, with the value of every split kept for resampling stats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IocCc {
    pub mean: f64,
    pub per_split: Vec<f64>,
}

impl IocCc {
    /// Standard error of the mean over splits (sample standard deviation).
    pub fn standard_error(&self) -> f64 {
        let n = self.per_split.len() as f64;
        if n < 2.0 {
            return 0.0;
        }
        let var = self.per_split.iter().map(|v| (v - self.mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    }
}

/// CC between the fixation maps of two random halves of the cohort,
/// averaged over `splits` random partitions.
pub fn ioc_cc(fixations: &FixationSet, stimulus: &Stimulus, sigma: f64, splits: usize, seed: u64) -> Result<IocCc> {
    if splits == 0 {
        return Err(Error::param("ioc_cc needs at least one split"));
    }
    let groups = split_participants(fixations)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..groups.len()).collect();
    let half = groups.len() / 2;
    let mut per_split = Vec::with_capacity(splits);
    for _ in 0..splits {
        order.shuffle(&mut rng);
        let (left, right) = order.split_at(half);
        let pick = |idx: &[usize]| FixationSet::merged(idx.iter().map(|&i| &groups[i].1));
        let a = fixation_heatmap(&pick(left), stimulus, sigma)?;
        let b = fixation_heatmap(&pick(right), stimulus, sigma)?;
        per_split.push(cc(&a, &b)?);
    }
    let mean = per_split.iter().sum::<f64>() / splits as f64;
    Ok(IocCc { mean, per_split })
}
