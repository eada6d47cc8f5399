use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean performance at increasing participant counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationCurve {
    pub metric_id: String,
    pub resamples: usize,
    /// `(participants, performance)`, participants strictly increasing.
    pub points: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaturationParams {
    pub step: usize,
    pub resamples: usize,
    pub seed: u64,
    /// Share of full-cohort performance that counts as saturated.
    pub fraction: f64,
}

impl Default for SaturationParams {
    fn default() -> Self {
        SaturationParams {
            step: 1,
            resamples: 20,
            seed: 0,
            fraction: 0.98,
        }
    }
}

/// Smallest participant count reaching `fraction` of the last point's performance.
pub fn saturation_point(curve: &SaturationCurve, fraction: f64) -> Option<usize> {
    let &(_, full) = curve.points.last()?;
    curve
        .points
        .iter()
        .find(|&&(_, perf)| perf >= fraction * full)
        .map(|&(n, _)| n)
}

/// Evaluates `performance` on random participant subsets of growing size.
///
/// Subsets are drawn without replacement; each count is averaged over
/// `resamples` draws, except the full cohort which is evaluated once. The
/// saturation point is measured against the full-cohort performance.
pub fn saturation<F>(
    metric_id: &str,
    participants: usize,
    params: &SaturationParams,
    mut performance: F,
) -> Result<(SaturationCurve, usize)>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    if participants < 2 {
        return Err(Error::param("saturation needs at least 2 participants"));
    }
    if params.step == 0 || params.resamples == 0 {
        return Err(Error::param("step and resamples must be positive"));
    }
    let mut counts: Vec<usize> = (1..)
        .map(|k| k * params.step)
        .take_while(|&n| n < participants)
        .collect();
    counts.push(participants);

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut points = Vec::with_capacity(counts.len());
    for &n in &counts {
        let perf = if n == participants {
            let all: Vec<usize> = (0..participants).collect();
            performance(&all)?
        } else {
            let mut total = 0.0;
            for _ in 0..params.resamples {
                let mut subset = index::sample(&mut rng, participants, n).into_vec();
                subset.sort_unstable();
                total += performance(&subset)?;
            }
            total / params.resamples as f64
        };
        if !perf.is_finite() {
            return Err(Error::param(format!("performance at n={n} is not finite")));
        }
        points.push((n, perf));
    }
    let curve = SaturationCurve {
        metric_id: metric_id.to_owned(),
        resamples: params.resamples,
        points,
    };
    let n_star = saturation_point(&curve, params.fraction).expect("curve is non-empty");
    Ok((curve, n_star))
}
