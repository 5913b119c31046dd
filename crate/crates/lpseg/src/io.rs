//! Image, mask and parameter file IO.

use std::fs;
use std::io::{BufWriter, Cursor, Write};
use std::path::Path;

use image::{GrayImage, ImageFormat};
use lpseg_core::seeds::{decode_trimap, GroundTruth, SeedMap};
use lpseg_core::{Lambda, PixelGraph, RgbImage};

use crate::error::{Error, Result};

fn open(path: &Path) -> Result<image::DynamicImage> {
    image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|source| Error::Image {
            path: path.to_owned(),
            source,
        })
}

fn to_rgb(img: image::DynamicImage) -> Result<RgbImage> {
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    Ok(RgbImage::from_rgb8(w as usize, h as usize, rgb.as_raw())?)
}

/// Decodes any supported raster (PNG, BMP, JPEG) to RGB in `[0, 1]`.
pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    to_rgb(open(path)?)
}

pub fn decode_rgb(bytes: &[u8]) -> std::result::Result<RgbImage, String> {
    let img = image::load_from_memory(bytes).map_err(|e| e.to_string())?;
    to_rgb(img).map_err(|e| e.to_string())
}

/// Single-channel 8-bit plane. Color files are reduced to luma, which keeps
/// gray pixels at their level.
pub fn load_gray(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let gray = open(path)?.to_luma8();
    let (w, h) = gray.dimensions();
    Ok((w as usize, h as usize, gray.into_raw()))
}

pub fn load_trimap(path: &Path) -> Result<SeedMap> {
    let (w, h, data) = load_gray(path)?;
    Ok(decode_trimap(w, h, &data)?)
}

pub fn load_ground_truth(path: &Path) -> Result<GroundTruth> {
    let (w, h, data) = load_gray(path)?;
    Ok(GroundTruth::from_gray(w, h, &data)?)
}

fn gray_image(width: usize, height: usize, mask: &[u8]) -> Result<GrayImage> {
    GrayImage::from_raw(width as u32, height as u32, mask.to_vec())
        .ok_or_else(|| Error::Invalid(format!("mask size does not match {width}x{height}")))
}

/// Writes an 8-bit mask; the format follows the extension (PNG by default).
pub fn save_mask(path: &Path, width: usize, height: usize, mask: &[u8]) -> Result<()> {
    let img = gray_image(width, height, mask)?;
    let format = ImageFormat::from_path(path).unwrap_or(ImageFormat::Png);
    img.save_with_format(path, format).map_err(|source| Error::Image {
        path: path.to_owned(),
        source,
    })
}

pub fn encode_png(width: usize, height: usize, mask: &[u8]) -> Result<Vec<u8>> {
    let img = gray_image(width, height, mask)?;
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Invalid(format!("PNG encode failed: {e}")))?;
    Ok(out.into_inner())
}

fn parse_values(text: &str, sep: impl Fn(char) -> bool) -> std::result::Result<Vec<f64>, String> {
    text.split(sep)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

/// Plain-text weights: one real per line, 23 lines.
pub fn read_lambda_file(path: &Path) -> Result<Lambda> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let values = parse_values(&text, |c| c == '\n').map_err(|msg| Error::Parse {
        path: path.to_owned(),
        msg,
    })?;
    Ok(Lambda::from_slice(&values)?)
}

/// `--lambda` accepts either 23 comma-separated numbers or a file path.
pub fn parse_lambda_arg(arg: &str) -> Result<Lambda> {
    if arg.contains(',') {
        let values = parse_values(arg, |c| c == ',').map_err(Error::Invalid)?;
        return Ok(Lambda::from_slice(&values)?);
    }
    read_lambda_file(Path::new(arg))
}

pub fn write_lambda_file(path: &Path, lambda: &Lambda) -> Result<()> {
    let mut text = String::new();
    for v in lambda.as_array() {
        text.push_str(&format!("{v}\n"));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Debug dump: one `i j` line per undirected edge, `i < j`.
pub fn write_edge_list(path: &Path, graph: &PixelGraph) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (i, j) in graph.edges() {
        writeln!(w, "{i} {j}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
