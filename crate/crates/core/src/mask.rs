use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A binary selection over an image, row-major. Serialized as its
/// dimensions plus run-length encoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EncodedMask", into = "EncodedMask")]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct EncodedMask {
    width: usize,
    height: usize,
    rle: Vec<Run>,
}

impl TryFrom<EncodedMask> for BinaryMask {
    type Error = RleError;

    fn try_from(m: EncodedMask) -> Result<Self, RleError> {
        BinaryMask::from_rle(m.width, m.height, &m.rle)
    }
}

impl From<BinaryMask> for EncodedMask {
    fn from(m: BinaryMask) -> Self {
        EncodedMask {
            rle: m.to_rle(),
            width: m.width,
            height: m.height,
        }
    }
}

/// A foreground run `[start, start + len)` over row-major pixel indices.
pub type Run = [u64; 2];

impl BinaryMask {
    pub fn empty(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![true; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::param(format!(
                "mask of {width}x{height} needs {} cells, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(BinaryMask {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.bits[y * self.width + x] = on;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of selected pixels.
    pub fn area(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn union_with(&mut self, other: &BinaryMask) -> Result<()> {
        self.check_dims(other)?;
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        Ok(())
    }

    pub(crate) fn check_dims(&self, other: &BinaryMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: other.dims(),
            });
        }
        Ok(())
    }

    /// Row-major run-length encoding of the selected pixels.
    pub fn to_rle(&self) -> Vec<Run> {
        let mut runs = Vec::new();
        let mut i = 0;
        while i < self.bits.len() {
            if self.bits[i] {
                let start = i;
                while i < self.bits.len() && self.bits[i] {
                    i += 1;
                }
                runs.push([start as u64, (i - start) as u64]);
            } else {
                i += 1;
            }
        }
        runs
    }

    /// Decodes runs; overlapping or out-of-range runs are rejected with the
    /// index of the offending run.
    pub fn from_rle(width: usize, height: usize, runs: &[Run]) -> Result<Self, RleError> {
        let n = (width * height) as u64;
        let mut bits = vec![false; width * height];
        let mut cursor = 0u64;
        for (i, &[start, len]) in runs.iter().enumerate() {
            if len == 0 {
                return Err(RleError { run: i, reason: "zero-length run" });
            }
            if start < cursor {
                return Err(RleError { run: i, reason: "runs must be ordered and disjoint" });
            }
            let end = start.checked_add(len).filter(|&e| e <= n).ok_or(RleError {
                run: i,
                reason: "run extends past the last pixel",
            })?;
            bits[start as usize..end as usize].fill(true);
            cursor = end;
        }
        Ok(BinaryMask {
            width,
            height,
            bits,
        })
    }

    /// Grows (`radius > 0`) or shrinks (`radius < 0`) the selection by a disk.
    pub fn morph(&self, radius: i32) -> BinaryMask {
        if radius == 0 {
            return self.clone();
        }
        let r = radius.unsigned_abs() as i64;
        let dilate = radius > 0;
        let offsets: Vec<(i64, i64)> = (-r..=r)
            .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
            .filter(|(dx, dy)| dx * dx + dy * dy <= r * r)
            .collect();
        let (w, h) = (self.width as i64, self.height as i64);
        let mut out = BinaryMask::empty(self.width, self.height);
        for y in 0..h {
            for x in 0..w {
                let hit = |&(dx, dy): &(i64, i64)| {
                    let (nx, ny) = (x + dx, y + dy);
                    // outside the image counts as background
                    nx >= 0 && ny >= 0 && nx < w && ny < h && self.get(nx as usize, ny as usize)
                };
                let on = if dilate {
                    offsets.iter().any(hit)
                } else {
                    offsets.iter().all(hit)
                };
                out.set(x as usize, y as usize, on);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("run {run}: {reason}")]
pub struct RleError {
    pub run: usize,
    pub reason: &'static str,
}
