use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::heatmap::{z_normalize, AttentionHeatmap};
use crate::stimulus::FixationSet;

/// Pearson correlation of two heatmaps over all pixels.
pub fn cc(a: &AttentionHeatmap, b: &AttentionHeatmap) -> Result<f64> {
    cc_grids(&a.values, &b.values)
}

pub fn cc_grids(a: &Grid, b: &Grid) -> Result<f64> {
    a.check_same_dims(b)?;
    let za = z_normalize(a)?;
    let zb = z_normalize(b)?;
    let n = za.len() as f64;
    let r: f64 = za
        .as_slice()
        .iter()
        .zip(zb.as_slice())
        .map(|(x, y)| x * y)
        .sum::<f64>()
        / n;
    Ok(r.clamp(-1.0, 1.0))
}

/// Mean of the z-scored heatmap at the fixated pixels.
pub fn nss(map: &AttentionHeatmap, fixations: &FixationSet) -> Result<f64> {
    nss_grid(&map.values, fixations)
}

pub fn nss_grid(map: &Grid, fixations: &FixationSet) -> Result<f64> {
    if fixations.is_empty() {
        return Err(Error::empty("no fixations"));
    }
    let (w, h) = map.dims();
    fixations.check_bounds(w as u32, h as u32)?;
    let z = z_normalize(map)?;
    let total: f64 = fixations
        .points()
        .map(|p| {
            let (x, y) = p.pixel(w, h);
            z.get(x, y)
        })
        .sum();
    Ok(total / fixations.len() as f64)
}
