//! Word image decoding, Otsu binarization and square normalization.
//!
//! Ink is dark: a pixel at or below the threshold becomes foreground `1`.

use std::path::Path;

use crate::error::{Error, Result};

/// An 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    rows: usize,
    cols: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(rows: usize, cols: usize, pixels: Vec<u8>) -> Result<Self> {
        if rows == 0 || cols == 0 || pixels.len() != rows * cols {
            return Err(Error::InvalidDimensions {
                rows,
                cols,
                len: pixels.len(),
            });
        }
        Ok(Self { rows, cols, pixels })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.pixels[r * self.cols + c]
    }

    /// 256-bin intensity histogram.
    pub fn histogram(&self) -> [u64; 256] {
        let mut hist = [0u64; 256];
        for &p in &self.pixels {
            hist[p as usize] += 1;
        }
        hist
    }
}

/// A binary raster over `{0, 1}` where `1` is ink.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    rows: usize,
    cols: usize,
    pixels: Vec<u8>,
}

impl BinaryImage {
    pub fn new(rows: usize, cols: usize, pixels: Vec<u8>) -> Result<Self> {
        if rows == 0 || cols == 0 || pixels.len() != rows * cols {
            return Err(Error::InvalidDimensions {
                rows,
                cols,
                len: pixels.len(),
            });
        }
        if let Some(&bad) = pixels.iter().find(|&&p| p > 1) {
            return Err(Error::NonBinaryPixel(bad));
        }
        Ok(Self { rows, cols, pixels })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.pixels[r * self.cols + c]
    }

    pub(crate) fn set(&mut self, r: usize, c: usize, ink: bool) {
        self.pixels[r * self.cols + c] = ink as u8;
    }

    pub fn ink_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p == 1).count()
    }

    /// Renders ink as black (0) on a white (255) background.
    pub fn to_gray(&self) -> GrayImage {
        let pixels = self
            .pixels
            .iter()
            .map(|&p| if p == 1 { 0 } else { 255 })
            .collect();
        GrayImage {
            rows: self.rows,
            cols: self.cols,
            pixels,
        }
    }
}

/// A real-valued `n x n` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || values.len() != n * n {
            return Err(Error::InvalidDimensions {
                rows: n,
                cols: n,
                len: values.len(),
            });
        }
        Ok(Self { n, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidDimensions {
                rows: n,
                cols: rows.first().map_or(0, Vec::len),
                len: rows.iter().map(Vec::len).sum(),
            });
        }
        Self::new(n, rows.concat())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![0.0; n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.n + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.n..(r + 1) * self.n]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> SquareMatrix {
        let n = self.n;
        let values = (0..n * n).map(|i| self.get(i % n, i / n)).collect();
        SquareMatrix { n, values }
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }
}

/// Loads a word image as grayscale.
///
/// PGM (`P2`/`P5`) is always supported, as are PPM (`P3`/`P6`) color files.
/// PNG needs the `png` feature. Color is reduced to luma with Rec. 601
/// weights, rounded to the nearest integer.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_gray(&bytes)
}

/// Decodes an in-memory image, sniffing the format from its magic bytes.
pub fn decode_gray(bytes: &[u8]) -> Result<GrayImage> {
    match bytes {
        [b'P', b'2' | b'3' | b'5' | b'6', ..] => decode_pnm(bytes),
        [0x89, b'P', b'N', b'G', ..] => decode_png(bytes),
        [b'P', d, ..] => Err(Error::UnsupportedFormat(format!(
            "netpbm variant P{}",
            *d as char
        ))),
        _ => Err(Error::UnsupportedFormat("unrecognized magic bytes".into())),
    }
}

#[cfg(feature = "png")]
fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::CorruptImage(e.to_string()))?;
    let rgb = img.to_rgb8();
    let (cols, rows) = rgb.dimensions();
    let pixels = rgb.pixels().map(|p| luma601(p[0], p[1], p[2])).collect();
    GrayImage::new(rows as usize, cols as usize, pixels)
}

#[cfg(not(feature = "png"))]
fn decode_png(_bytes: &[u8]) -> Result<GrayImage> {
    Err(Error::UnsupportedFormat(
        "PNG input requires the `png` feature".into(),
    ))
}

fn luma601(r: u8, g: u8, b: u8) -> u8 {
    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64)
        .round()
        .clamp(0.0, 255.0) as u8
}

struct PnmHeader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PnmHeader<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::CorruptImage(format!(
                "expected a number at byte {start}"
            )));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::CorruptImage("number out of range".into()))
    }
}

/// Decodes binary or ASCII PGM/PPM with `maxval <= 255`.
pub fn decode_pnm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::UnsupportedFormat("missing netpbm magic".into()));
    }
    let kind = bytes[1];
    let (ascii, channels) = match kind {
        b'2' => (true, 1),
        b'5' => (false, 1),
        b'3' => (true, 3),
        b'6' => (false, 3),
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "netpbm variant P{}",
                other as char
            )))
        }
    };
    let mut hdr = PnmHeader { bytes, pos: 2 };
    let cols = hdr.number()?;
    let rows = hdr.number()?;
    let maxval = hdr.number()?;
    if maxval == 0 {
        return Err(Error::CorruptImage("maxval is zero".into()));
    }
    if maxval > 255 {
        return Err(Error::UnsupportedFormat(format!(
            "16-bit netpbm (maxval {maxval})"
        )));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::CorruptImage(format!("empty raster {cols}x{rows}")));
    }
    let count = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::CorruptImage("raster too large".into()))?;

    let samples: Vec<u8> = if ascii {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let v = hdr.number()?;
            if v > maxval {
                return Err(Error::CorruptImage(format!(
                    "sample {v} exceeds maxval {maxval}"
                )));
            }
            out.push(v as u8);
        }
        out
    } else {
        // exactly one whitespace byte separates the header from the raster
        let start = hdr.pos + 1;
        let raster = bytes
            .get(start..start + count)
            .ok_or_else(|| Error::CorruptImage("truncated raster".into()))?;
        if let Some(&v) = raster.iter().find(|&&v| v as usize > maxval) {
            return Err(Error::CorruptImage(format!(
                "sample {v} exceeds maxval {maxval}"
            )));
        }
        raster.to_vec()
    };

    let scale = |v: u8| -> u8 {
        if maxval == 255 {
            v
        } else {
            ((v as f64) * 255.0 / maxval as f64).round() as u8
        }
    };
    let pixels = if channels == 1 {
        samples.into_iter().map(scale).collect()
    } else {
        samples
            .chunks_exact(3)
            .map(|p| luma601(scale(p[0]), scale(p[1]), scale(p[2])))
            .collect()
    };
    GrayImage::new(rows, cols, pixels)
}

/// Encodes as binary (`P5`) or ASCII (`P2`) PGM with maxval 255.
pub fn encode_pgm(img: &GrayImage, ascii: bool) -> Vec<u8> {
    let magic = if ascii { "P2" } else { "P5" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.cols, img.rows).into_bytes();
    if ascii {
        for row in img.pixels.chunks(img.cols) {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            out.extend_from_slice(line.join(" ").as_bytes());
            out.push(b'\n');
        }
    } else {
        out.extend_from_slice(&img.pixels);
    }
    out
}

pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_pgm(img, false)).map_err(|e| Error::io(path, e))
}

/// Otsu's global threshold over the 256-bin histogram.
///
/// Class 0 holds intensities `<= t`. Returns the smallest `t` maximizing the
/// between-class variance.
pub fn otsu_threshold(img: &GrayImage) -> Result<u8> {
    let hist = img.histogram();
    let total = img.pixels.len() as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as f64 * c as f64)
        .sum();

    let mut best: Option<(u8, f64)> = None;
    let mut count_lo = 0u64;
    let mut sum_lo = 0.0f64;
    for t in 0..=255usize {
        count_lo += hist[t];
        sum_lo += t as f64 * hist[t] as f64;
        let n0 = count_lo as f64;
        let n1 = total - n0;
        if count_lo == 0 || n1 == 0.0 {
            continue;
        }
        // w0 w1 (mu0 - mu1)^2 scaled by total^2, which does not move the argmax
        let diff = total * sum_lo - n0 * sum_all;
        let between = diff * diff / (n0 * n1);
        if best.is_none_or(|(_, b)| between > b) {
            best = Some((t as u8, between));
        }
    }
    best.map(|(t, _)| t).ok_or(Error::ConstantImage)
}

/// Pixels at or below `t` become ink.
pub fn binarize(img: &GrayImage, t: u8) -> BinaryImage {
    BinaryImage {
        rows: img.rows,
        cols: img.cols,
        pixels: img.pixels.iter().map(|&p| (p <= t) as u8).collect(),
    }
}

/// Otsu threshold followed by [`binarize`].
pub fn binarize_otsu(img: &GrayImage) -> Result<BinaryImage> {
    Ok(binarize(img, otsu_threshold(img)?))
}

/// Rescales `img` so its larger side equals `n`, then zero-pads bottom and
/// right to `n x n`.
///
/// Sampling is nearest-neighbor. If a downscale would drop every ink pixel,
/// each source ink pixel is projected onto its covering target cell instead,
/// so the output is blank exactly when the input is.
pub fn normalize_to_square(img: &BinaryImage, n: usize) -> Result<SquareMatrix> {
    if n < 3 {
        return Err(Error::TargetTooSmall(n));
    }
    let longest = img.rows.max(img.cols);
    let scaled_dim = |d: usize| ((d * n) as f64 / longest as f64).round().clamp(1.0, n as f64) as usize;
    let (rows, cols) = (scaled_dim(img.rows), scaled_dim(img.cols));

    let mut values = vec![0.0; n * n];
    let mut any_ink = false;
    for r in 0..rows {
        let sr = ((2 * r + 1) * img.rows) / (2 * rows);
        for c in 0..cols {
            let sc = ((2 * c + 1) * img.cols) / (2 * cols);
            if img.get(sr, sc) == 1 {
                values[r * n + c] = 1.0;
                any_ink = true;
            }
        }
    }
    if !any_ink && img.ink_count() > 0 {
        for sr in 0..img.rows {
            for sc in 0..img.cols {
                if img.get(sr, sc) == 1 {
                    let r = sr * rows / img.rows;
                    let c = sc * cols / img.cols;
                    values[r * n + c] = 1.0;
                }
            }
        }
    }
    SquareMatrix::new(n, values)
}

/// Mirrors columns left to right.
pub fn flip_horizontal(a: &SquareMatrix) -> SquareMatrix {
    let n = a.n;
    let values = (0..n * n)
        .map(|i| {
            let (r, c) = (i / n, i % n);
            a.get(r, n - 1 - c)
        })
        .collect();
    SquareMatrix { n, values }
}

/// Decode, binarize and normalize a word image file in one go.
pub fn load_word_matrix(path: impl AsRef<Path>, side: usize) -> Result<SquareMatrix> {
    let gray = load_gray(path)?;
    normalize_to_square(&binarize_otsu(&gray)?, side)
}
