//! Heatmap and fixation file formats.
//!
//! A heatmap is stored as a pair: `<stimulus_id>.<provenance>.csv` holds the
//! exact `f64` grid (one image row per line, shortest round-trip decimal
//! formatting) and `<stimulus_id>.<provenance>.png` a 16-bit grayscale
//! preview scaled so the maximum maps to 65535.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::heatmap::AttentionHeatmap;
use crate::stimulus::{Fixation, FixationSet};

pub fn write_png_gray8<W: Write>(out: W, width: u32, height: u32, pixels: &[u8]) -> Result<()> {
    let mut enc = png::Encoder::new(out, width, height);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc
        .write_header()
        .map_err(|e| Error::format("png", e.to_string()))?;
    writer
        .write_image_data(pixels)
        .map_err(|e| Error::format("png", e.to_string()))?;
    writer.finish().map_err(|e| Error::format("png", e.to_string()))
}

pub fn write_png_gray16<W: Write>(out: W, width: u32, height: u32, pixels: &[u16]) -> Result<()> {
    let bytes: Vec<u8> = pixels.iter().flat_map(|v| v.to_be_bytes()).collect();
    let mut enc = png::Encoder::new(out, width, height);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Sixteen);
    let mut writer = enc
        .write_header()
        .map_err(|e| Error::format("png", e.to_string()))?;
    writer
        .write_image_data(&bytes)
        .map_err(|e| Error::format("png", e.to_string()))?;
    writer.finish().map_err(|e| Error::format("png", e.to_string()))
}

/// Decodes a 16-bit grayscale PNG into `(width, height, samples)`.
pub fn read_png_gray16<R: std::io::BufRead + std::io::Seek>(input: R) -> Result<(u32, u32, Vec<u16>)> {
    let decoder = png::Decoder::new(input);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::format("png", e.to_string()))?;
    let info = reader.info();
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Sixteen {
        return Err(Error::format("png", "expected 16-bit grayscale"));
    }
    let (w, h) = (info.width, info.height);
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
    reader
        .next_frame(&mut buf)
        .map_err(|e| Error::format("png", e.to_string()))?;
    let samples = buf
        .chunks_exact(2)
        .take((w * h) as usize)
        .map(|b| u16::from_be_bytes([b[0], b[1]]))
        .collect();
    Ok((w, h, samples))
}

/// Max-normalized 16-bit samples; an all-zero map renders black.
pub fn heatmap_to_u16(map: &AttentionHeatmap) -> Vec<u16> {
    let (lo, hi) = if map.normalized {
        (map.values.min(), map.values.max())
    } else {
        (0.0, map.values.max())
    };
    let range = hi - lo;
    map.values
        .as_slice()
        .iter()
        .map(|&v| {
            if range > 0.0 {
                ((v - lo) / range * 65535.0).round().clamp(0.0, 65535.0) as u16
            } else {
                0
            }
        })
        .collect()
}

pub fn write_heatmap_png<W: Write>(map: &AttentionHeatmap, out: W) -> Result<()> {
    write_png_gray16(out, map.width() as u32, map.height() as u32, &heatmap_to_u16(map))
}

pub fn write_grid_csv<W: Write>(grid: &Grid, out: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for row in grid.rows() {
        wtr.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| Error::format("csv", e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_grid_csv<R: Read>(input: R) -> Result<Grid> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (y, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::format("csv", e.to_string()))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(x, cell)| {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| Error::format("csv", format!("row {y}, column {x}: `{cell}` is not a number")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::format("csv", format!("row {y}, column {x}: non-finite value")))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::format("csv", "heatmap file has no rows"));
    }
    Grid::from_rows(&rows).map_err(|e| Error::format("csv", e.to_string()))
}

/// `<stimulus_id>.<provenance>`
pub fn heatmap_stem(map: &AttentionHeatmap) -> String {
    format!("{}.{}", map.stimulus_id, map.provenance)
}

/// Writes the CSV/PNG pair into `dir`, returning both paths.
pub fn save_heatmap(map: &AttentionHeatmap, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let stem = heatmap_stem(map);
    let csv_path = dir.join(format!("{stem}.csv"));
    let png_path = dir.join(format!("{stem}.png"));
    let mut csv_out = BufWriter::new(File::create(&csv_path)?);
    write_grid_csv(&map.values, &mut csv_out)?;
    csv_out.flush()?;
    let mut png_out = BufWriter::new(File::create(&png_path)?);
    write_heatmap_png(map, &mut png_out)?;
    png_out.flush()?;
    Ok((csv_path, png_path))
}

/// Reads fixations from CSV with header `participant_id,x,y[,t_ms]`.
pub fn read_fixations_csv<R: Read>(input: R) -> Result<FixationSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let entries = rdr
        .deserialize::<Fixation>()
        .map(|r| r.map_err(|e| Error::format("fixation csv", e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    Ok(FixationSet { entries })
}

pub fn write_fixations_csv<W: Write>(set: &FixationSet, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["participant_id", "x", "y", "t_ms"])
        .map_err(|e| Error::format("fixation csv", e.to_string()))?;
    for f in &set.entries {
        let t = f.t_ms.map(|t| t.to_string()).unwrap_or_default();
        wtr.write_record([f.participant_id.clone(), f.x.to_string(), f.y.to_string(), t])
            .map_err(|e| Error::format("fixation csv", e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}
