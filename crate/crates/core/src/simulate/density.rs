use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::Grid;

/// One isotropic Gaussian bump, in image pixels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
    pub weight: f64,
}

/// A probability distribution over the pixels of one stimulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityParts", into = "DensityParts")]
pub struct GroundTruthDensity {
    pub stimulus_id: String,
    values: Grid,
    components: Vec<GaussianComponent>,
    cdf: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DensityParts {
    stimulus_id: String,
    values: Grid,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    components: Vec<GaussianComponent>,
}

impl TryFrom<DensityParts> for GroundTruthDensity {
    type Error = Error;

    fn try_from(parts: DensityParts) -> Result<Self> {
        let mass = parts.values.sum();
        if parts.values.as_slice().iter().any(|v| !v.is_finite() || *v < 0.0) || (mass - 1.0).abs() > 1e-9 {
            return Err(Error::format("density", "values must be non-negative and sum to 1"));
        }
        Ok(Self::build(parts.stimulus_id, parts.values, parts.components))
    }
}

impl From<GroundTruthDensity> for DensityParts {
    fn from(gt: GroundTruthDensity) -> Self {
        DensityParts {
            stimulus_id: gt.stimulus_id,
            values: gt.values,
            components: gt.components,
        }
    }
}

/// A local maximum of the density and the mass around it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub pixel: (usize, usize),
    pub density: f64,
    pub mass: f64,
}

impl Peak {
    pub fn center(&self) -> Point {
        Point::new(self.pixel.0 as f64 + 0.5, self.pixel.1 as f64 + 0.5)
    }
}

impl GroundTruthDensity {
    /// Normalizes any non-negative grid with positive mass.
    pub fn from_grid(stimulus_id: impl Into<String>, grid: Grid) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::empty("density grid"));
        }
        if grid.as_slice().iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::param("density values must be finite and non-negative"));
        }
        let total = grid.sum();
        if total <= 0.0 {
            return Err(Error::param("density has no mass"));
        }
        Ok(Self::build(stimulus_id.into(), grid.map(|v| v / total), Vec::new()))
    }

    /// Evaluates a Gaussian mixture at pixel centers.
    pub fn from_mixture(
        stimulus_id: impl Into<String>,
        width: usize,
        height: usize,
        components: &[GaussianComponent],
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::empty("mixture has no components"));
        }
        for c in components {
            if !(c.sigma > 0.0 && c.sigma.is_finite()) || !(c.weight >= 0.0 && c.weight.is_finite()) {
                return Err(Error::param("components need sigma > 0 and weight >= 0"));
            }
        }
        let mut grid = Grid::zeros(width, height);
        for y in 0..height {
            for x in 0..width {
                let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
                let v: f64 = components
                    .iter()
                    .map(|c| {
                        let d2 = (px - c.x).powi(2) + (py - c.y).powi(2);
                        c.weight / (c.sigma * c.sigma) * (-d2 / (2.0 * c.sigma * c.sigma)).exp()
                    })
                    .sum();
                grid.set(x, y, v);
            }
        }
        let mut gt = Self::from_grid(stimulus_id, grid)?;
        gt.components = components.to_vec();
        Ok(gt)
    }

    pub fn uniform(stimulus_id: impl Into<String>, width: usize, height: usize) -> Result<Self> {
        Self::from_grid(stimulus_id, Grid::filled(width, height, 1.0))
    }

    /// All mass on one pixel.
    pub fn delta(stimulus_id: impl Into<String>, width: usize, height: usize, x: usize, y: usize) -> Result<Self> {
        let mut grid = Grid::zeros(width, height);
        if x >= width || y >= height {
            return Err(Error::param(format!("pixel ({x}, {y}) outside {width}x{height}")));
        }
        grid.set(x, y, 1.0);
        Self::from_grid(stimulus_id, grid)
    }

    fn build(stimulus_id: String, values: Grid, components: Vec<GaussianComponent>) -> Self {
        let mut acc = 0.0;
        let cdf = values
            .as_slice()
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect();
        GroundTruthDensity {
            stimulus_id,
            values,
            components,
            cdf,
        }
    }

    pub fn values(&self) -> &Grid {
        &self.values
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn dims(&self) -> (usize, usize) {
        self.values.dims()
    }

    /// Draws a pixel by inverting the cumulative distribution.
    pub fn sample_pixel(&self, rng: &mut impl Rng) -> (usize, usize) {
        sample_index(&self.cdf, rng, self.values.width())
    }

    /// Up to `k` peaks, strongest first. Pixels within `radius` of an
    /// already chosen peak are excluded, and that disk's mass is the peak's mass.
    pub fn peaks(&self, k: usize, radius: f64) -> Vec<Peak> {
        let (w, h) = self.dims();
        let mut suppressed = vec![false; w * h];
        let mut peaks = Vec::with_capacity(k);
        while peaks.len() < k {
            let best = self
                .values
                .as_slice()
                .iter()
                .enumerate()
                .filter(|(i, v)| !suppressed[*i] && **v > 0.0)
                .fold(None::<(usize, f64)>, |acc, (i, &v)| match acc {
                    Some((_, bv)) if bv >= v => acc,
                    _ => Some((i, v)),
                });
            let Some((idx, density)) = best else { break };
            let (px, py) = (idx % w, idx / w);
            let r = radius.max(0.0);
            let (x0, x1) = (px.saturating_sub(r as usize), (px + r as usize + 1).min(w));
            let (y0, y1) = (py.saturating_sub(r as usize), (py + r as usize + 1).min(h));
            let mut mass = 0.0;
            for y in y0..y1 {
                for x in x0..x1 {
                    let d2 = (x as f64 - px as f64).powi(2) + (y as f64 - py as f64).powi(2);
                    if d2 <= r * r {
                        let i = y * w + x;
                        if !suppressed[i] {
                            mass += self.values.as_slice()[i];
                        }
                        suppressed[i] = true;
                    }
                }
            }
            peaks.push(Peak {
                pixel: (px, py),
                density,
                mass,
            });
        }
        peaks
    }
}

fn sample_index(cdf: &[f64], rng: &mut impl Rng, width: usize) -> (usize, usize) {
    let total = *cdf.last().expect("non-empty density");
    let u = rng.random::<f64>() * total;
    let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
    (idx % width, idx / width)
}
