//! Separable Gaussian blur with a 3σ-truncated kernel.
//!
//! At the image border the part of the kernel that falls outside is dropped
//! and the remaining weights are rescaled to sum to one, so a uniform map
//! stays uniform. Away from the border a unit impulse keeps unit mass.
//!
//! Both passes scatter from non-zero inputs, which keeps the cost of
//! blurring sparse impulse maps (clicks, codechart reports, fixations)
//! proportional to the number of impulses rather than the image area.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::heatmap::AttentionHeatmap;

/// Sampled, unit-sum Gaussian weights for offsets `-radius..=radius`.
#[derive(Clone, Debug)]
pub struct GaussianKernel {
    radius: usize,
    weights: Vec<f64>,
}

impl GaussianKernel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::param(format!("blur sigma must be positive, got {sigma}")));
        }
        let radius = (3.0 * sigma).ceil() as usize;
        let denom = 2.0 * sigma * sigma;
        let mut weights: Vec<f64> = (0..=2 * radius)
            .map(|i| {
                let k = i as f64 - radius as f64;
                (-k * k / denom).exp()
            })
            .collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(GaussianKernel { radius, weights })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    fn weight(&self, offset: isize) -> f64 {
        self.weights[(offset + self.radius as isize) as usize]
    }

    /// Reciprocal of the in-bounds kernel mass at each position of a line of length `n`.
    fn border_norms(&self, n: usize) -> Vec<f64> {
        let r = self.radius as isize;
        (0..n as isize)
            .map(|x| {
                let lo = (-r).max(-x);
                let hi = r.min(n as isize - 1 - x);
                let mass: f64 = (lo..=hi).map(|k| self.weight(k)).sum();
                1.0 / mass
            })
            .collect()
    }
}

/// Blurs a raw grid. Output dimensions equal input dimensions.
pub fn blur_grid(input: &Grid, sigma: f64) -> Result<Grid> {
    let kernel = GaussianKernel::new(sigma)?;
    let (w, h) = input.dims();
    if w == 0 || h == 0 {
        return Ok(input.clone());
    }
    let r = kernel.radius as isize;

    // horizontal pass: each non-zero input at column j feeds columns j-r..=j+r
    let norm_x = kernel.border_norms(w);
    let mut horiz = Grid::zeros(w, h);
    let mut live_rows = vec![false; h];
    for y in 0..h {
        let src = input.row(y);
        if src.iter().all(|&v| v == 0.0) {
            continue;
        }
        live_rows[y] = true;
        let dst = &mut horiz.as_mut_slice()[y * w..(y + 1) * w];
        for (j, &v) in src.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let j = j as isize;
            let lo = (j - r).max(0);
            let hi = (j + r).min(w as isize - 1);
            for x in lo..=hi {
                // out[x] = sum_k w_k in[x + k], so in[j] reaches out[x] with k = j - x
                dst[x as usize] += kernel.weight(j - x) * v;
            }
        }
        for (d, n) in dst.iter_mut().zip(&norm_x) {
            *d *= n;
        }
    }

    // vertical pass, row at a time
    let norm_y = kernel.border_norms(h);
    let mut out = Grid::zeros(w, h);
    for j in 0..h {
        if !live_rows[j] {
            continue;
        }
        let jj = j as isize;
        let lo = (jj - r).max(0) as usize;
        let hi = (jj + r).min(h as isize - 1) as usize;
        for y in lo..=hi {
            let wk = kernel.weight(jj - y as isize);
            let src = horiz.row(j);
            for (d, s) in out.as_mut_slice()[y * w..(y + 1) * w].iter_mut().zip(src) {
                *d += wk * s;
            }
        }
    }
    for y in 0..h {
        let n = norm_y[y];
        for d in &mut out.as_mut_slice()[y * w..(y + 1) * w] {
            *d *= n;
        }
    }
    Ok(out)
}

/// Blurs a heatmap, keeping its stimulus and provenance.
pub fn gaussian_blur(map: &AttentionHeatmap, sigma: f64) -> Result<AttentionHeatmap> {
    Ok(map.with_values(blur_grid(&map.values, sigma)?))
}
