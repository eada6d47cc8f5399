use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heatmaps::BubbleTask;

/// Behaviour knobs for one simulated participant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticParticipant {
    pub id: String,
    pub seed: u64,
    /// Standard deviation of the isotropic Gaussian added to every report or click.
    pub report_noise_px: f64,
    /// Probability of typing a code that is not on the chart.
    pub miss_rate: f64,
    /// Number of density peaks visited while zooming.
    pub zoom_affinity: usize,
    /// Nested zoom steps toward the strongest peak; weaker peaks get fewer.
    pub zoom_depth: u32,
    /// Time spent on each image in a zoom session.
    pub zoom_session_ms: f64,
    pub clicks_per_image: usize,
    pub bubble_task: BubbleTask,
    pub description_len: usize,
    /// Largest erosion or dilation applied to annotation masks.
    pub mask_noise_px: u32,
}

impl Default for SyntheticParticipant {
    fn default() -> Self {
        SyntheticParticipant {
            id: "synthetic".into(),
            seed: 0,
            report_noise_px: 30.0,
            miss_rate: 0.05,
            zoom_affinity: 3,
            zoom_depth: 3,
            zoom_session_ms: 30_000.0,
            clicks_per_image: 10,
            bubble_task: BubbleTask::Description,
            description_len: 200,
            mask_noise_px: 0,
        }
    }
}

impl SyntheticParticipant {
    pub fn new(id: impl Into<String>, seed: u64) -> Self {
        SyntheticParticipant {
            id: id.into(),
            seed,
            ..Default::default()
        }
    }

    /// Noise-free and never misses.
    pub fn ideal(id: impl Into<String>, seed: u64) -> Self {
        SyntheticParticipant {
            report_noise_px: 0.0,
            miss_rate: 0.0,
            ..Self::new(id, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.miss_rate) {
            return Err(Error::param(format!("miss_rate {} is not in [0, 1]", self.miss_rate)));
        }
        if !(self.report_noise_px >= 0.0 && self.report_noise_px.is_finite()) {
            return Err(Error::param("report_noise_px must be finite and >= 0"));
        }
        if !(self.zoom_session_ms > 0.0 && self.zoom_session_ms.is_finite()) {
            return Err(Error::param("zoom_session_ms must be positive"));
        }
        if self.zoom_affinity > 0 && self.zoom_depth == 0 {
            return Err(Error::param("zoom_depth must be >= 1 when zoom_affinity > 0"));
        }
        Ok(())
    }
}

/// `n` participants cloned from `template`, with ids `p000`, `p001`, …
/// and distinct seeds derived from `seed`.
pub fn cohort(n: usize, template: &SyntheticParticipant, seed: u64) -> Vec<SyntheticParticipant> {
    let width = n.saturating_sub(1).to_string().len().max(3);
    (0..n)
        .map(|i| SyntheticParticipant {
            id: format!("p{i:0width$}"),
            seed: fnv1a(format!("{seed}/{i}").as_bytes()),
            ..template.clone()
        })
        .collect()
}

/// Independent RNG stream per (participant seed, stimulus or chart, purpose).
pub fn stream_rng(seed: u64, key: &str, purpose: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(fnv1a(format!("{seed}\u{0}{key}\u{0}{purpose}").as_bytes()))
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn cohort_ids_and_seeds() {
        let c = cohort(12, &SyntheticParticipant::default(), 7);
        assert_eq!(c[0].id, "p000");
        assert_eq!(c[11].id, "p011");
        let seeds: std::collections::HashSet<_> = c.iter().map(|p| p.seed).collect();
        assert_eq!(seeds.len(), 12);
        assert_eq!(c, cohort(12, &SyntheticParticipant::default(), 7));
    }

    #[test]
    fn streams_differ_by_key_and_purpose() {
        let a: u64 = stream_rng(1, "img", "zoom").random();
        let b: u64 = stream_rng(1, "img", "bubble").random();
        let c: u64 = stream_rng(1, "img2", "zoom").random();
        assert!(a != b && a != c);
        assert_eq!(a, stream_rng(1, "img", "zoom").random::<u64>());
    }

    #[test]
    fn rejects_out_of_range_rates() {
        let mut p = SyntheticParticipant::default();
        p.miss_rate = 1.5;
        assert!(p.validate().is_err());
        p.miss_rate = 1.0;
        assert!(p.validate().is_ok());
    }
}
