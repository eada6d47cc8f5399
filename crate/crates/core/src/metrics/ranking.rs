use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heatmap::{mean_std, AttentionHeatmap};
use crate::stimulus::ElementRegion;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementScore {
    pub element_id: String,
    pub score: f64,
}

/// Importance of each element: the heatmap maximum over its pixels.
pub fn element_scores(map: &AttentionHeatmap, elements: &[ElementRegion]) -> Result<Vec<ElementScore>> {
    let (w, h) = map.dims();
    elements
        .iter()
        .map(|el| {
            let mask = el.shape.rasterize(w, h);
            let score = mask
                .bits()
                .iter()
                .zip(map.values.as_slice())
                .filter(|(&inside, _)| inside)
                .map(|(_, &v)| v)
                .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
                .ok_or_else(|| Error::param(format!("element {} covers no pixel", el.id)))?;
            Ok(ElementScore {
                element_id: el.id.clone(),
                score,
            })
        })
        .collect()
}

/// 1-based ranks, ties sharing the average of the ranks they span.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's ρ of two paired score lists (Pearson on average ranks).
pub fn rank_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::param("rank correlation needs paired lists"));
    }
    if a.len() < 2 {
        return Err(Error::param("rank correlation needs at least two items"));
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let (ma, sa) = mean_std(&ra);
    let (mb, sb) = mean_std(&rb);
    if sa == 0.0 || sb == 0.0 {
        return Err(Error::ZeroVariance("ranking"));
    }
    let cov = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / ra.len() as f64;
    Ok((cov / (sa * sb)).clamp(-1.0, 1.0))
}

/// Spearman's ρ between two scorings of the same items, matched by id.
pub fn spearman(a: &[ElementScore], b: &[ElementScore]) -> Result<f64> {
    let lookup: HashMap<&str, f64> = b.iter().map(|s| (s.element_id.as_str(), s.score)).collect();
    if lookup.len() != a.len() || b.len() != a.len() {
        return Err(Error::param("rankings cover different item sets"));
    }
    let mut xs = Vec::with_capacity(a.len());
    let mut ys = Vec::with_capacity(a.len());
    for s in a {
        let other = lookup
            .get(s.element_id.as_str())
            .ok_or_else(|| Error::param(format!("item {} missing from second ranking", s.element_id)))?;
        xs.push(s.score);
        ys.push(*other);
    }
    rank_correlation(&xs, &ys)
}
