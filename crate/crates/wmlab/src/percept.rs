//! Perceptual machinery: grayscale image container with PGM I/O, the 8×8
//! orthonormal block DCT, zigzag coefficient extraction for frequency-
//! domain embedding, a DCT-domain visibility mask (frequency sensitivity,
//! luminance masking, contrast masking), and PSNR.

use crate::error::{Error, Result};
use std::io::{BufRead, Write};

pub const BLOCK: usize = 8;

/// Grayscale image with f64 pixel values (nominally 0..=255).
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config("image dimensions must be positive".into()));
        }
        Ok(Self {
            width,
            height,
            pixels: vec![0.0; width * height],
        })
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != width * height || width == 0 || height == 0 {
            return Err(Error::Config("pixel buffer does not match dimensions".into()));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.pixels[y * self.width + x] = v;
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    /// Read a binary (P5) PGM image with maxval 255.
    pub fn read_pgm<R: BufRead>(mut r: R) -> Result<Self> {
        fn next_token<R: BufRead>(r: &mut R) -> Result<String> {
            let mut tok = String::new();
            let mut in_comment = false;
            loop {
                let mut byte = [0u8; 1];
                if r.read(&mut byte)? == 0 {
                    if tok.is_empty() {
                        return Err(Error::Config("truncated PGM header".into()));
                    }
                    return Ok(tok);
                }
                let ch = byte[0] as char;
                if in_comment {
                    if ch == '\n' {
                        in_comment = false;
                    }
                    continue;
                }
                if ch == '#' {
                    in_comment = true;
                    continue;
                }
                if ch.is_ascii_whitespace() {
                    if tok.is_empty() {
                        continue;
                    }
                    return Ok(tok);
                }
                tok.push(ch);
            }
        }
        let magic = next_token(&mut r)?;
        if magic != "P5" {
            return Err(Error::Config(format!("unsupported PGM magic {magic:?}")));
        }
        let width: usize = next_token(&mut r)?
            .parse()
            .map_err(|_| Error::Config("bad PGM width".into()))?;
        let height: usize = next_token(&mut r)?
            .parse()
            .map_err(|_| Error::Config("bad PGM height".into()))?;
        let maxval: usize = next_token(&mut r)?
            .parse()
            .map_err(|_| Error::Config("bad PGM maxval".into()))?;
        if maxval != 255 {
            return Err(Error::Unsupported("only maxval 255 PGM supported".into()));
        }
        let mut data = vec![0u8; width * height];
        r.read_exact(&mut data)?;
        GrayImage::from_pixels(width, height, data.into_iter().map(f64::from).collect())
    }

    /// Write a binary (P5) PGM image, rounding and clamping to 0..=255.
    pub fn write_pgm<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "P5")?;
        writeln!(w, "{} {}", self.width, self.height)?;
        writeln!(w, "255")?;
        let bytes: Vec<u8> = self
            .pixels
            .iter()
            .map(|&p| p.round().clamp(0.0, 255.0) as u8)
            .collect();
        w.write_all(&bytes)?;
        Ok(())
    }
}

fn dct_basis() -> [[f64; BLOCK]; BLOCK] {
    let mut b = [[0.0; BLOCK]; BLOCK];
    for (k, row) in b.iter_mut().enumerate() {
        let scale = if k == 0 {
            (1.0 / BLOCK as f64).sqrt()
        } else {
            (2.0 / BLOCK as f64).sqrt()
        };
        for (n, v) in row.iter_mut().enumerate() {
            *v = scale
                * (std::f64::consts::PI * (2.0 * n as f64 + 1.0) * k as f64
                    / (2.0 * BLOCK as f64))
                    .cos();
        }
    }
    b
}

/// Orthonormal 8×8 2-D DCT-II of a row-major block.
pub fn block_dct(block: &[f64; BLOCK * BLOCK]) -> [f64; BLOCK * BLOCK] {
    let b = dct_basis();
    let mut tmp = [0.0; BLOCK * BLOCK];
    // Rows
    for y in 0..BLOCK {
        for k in 0..BLOCK {
            let mut acc = 0.0;
            for n in 0..BLOCK {
                acc += b[k][n] * block[y * BLOCK + n];
            }
            tmp[y * BLOCK + k] = acc;
        }
    }
    let mut out = [0.0; BLOCK * BLOCK];
    // Columns
    for x in 0..BLOCK {
        for k in 0..BLOCK {
            let mut acc = 0.0;
            for n in 0..BLOCK {
                acc += b[k][n] * tmp[n * BLOCK + x];
            }
            out[k * BLOCK + x] = acc;
        }
    }
    out
}

/// Inverse of [`block_dct`].
pub fn block_idct(coeffs: &[f64; BLOCK * BLOCK]) -> [f64; BLOCK * BLOCK] {
    let b = dct_basis();
    let mut tmp = [0.0; BLOCK * BLOCK];
    for x in 0..BLOCK {
        for n in 0..BLOCK {
            let mut acc = 0.0;
            for k in 0..BLOCK {
                acc += b[k][n] * coeffs[k * BLOCK + x];
            }
            tmp[n * BLOCK + x] = acc;
        }
    }
    let mut out = [0.0; BLOCK * BLOCK];
    for y in 0..BLOCK {
        for n in 0..BLOCK {
            let mut acc = 0.0;
            for k in 0..BLOCK {
                acc += b[k][n] * tmp[y * BLOCK + k];
            }
            out[y * BLOCK + n] = acc;
        }
    }
    out
}

/// Zigzag scan order of the 8×8 block: index i gives the (row, col) of the
/// i-th coefficient along the diagonal scan.
pub fn zigzag_order() -> [(usize, usize); BLOCK * BLOCK] {
    let mut order = [(0usize, 0usize); BLOCK * BLOCK];
    let mut idx = 0;
    for s in 0..(2 * BLOCK - 1) {
        let coords: Vec<(usize, usize)> = (0..=s.min(BLOCK - 1))
            .filter_map(|i| {
                let j = s - i;
                (j < BLOCK).then_some((i, j))
            })
            .collect();
        if s % 2 == 0 {
            for &(i, j) in coords.iter().rev() {
                order[idx] = (i, j);
                idx += 1;
            }
        } else {
            for &(i, j) in coords.iter() {
                order[idx] = (i, j);
                idx += 1;
            }
        }
    }
    order
}

/// Block-DCT coefficient plane of an image whose dimensions are multiples
/// of 8, kept block-by-block in row-major block order.
#[derive(Debug, Clone)]
pub struct DctPlane {
    pub width: usize,
    pub height: usize,
    /// One 64-entry coefficient block per image block.
    pub blocks: Vec<[f64; BLOCK * BLOCK]>,
}

pub fn image_to_dct(img: &GrayImage) -> Result<DctPlane> {
    if img.width % BLOCK != 0 || img.height % BLOCK != 0 {
        return Err(Error::Config("image dimensions must be multiples of 8".into()));
    }
    let mut blocks = Vec::with_capacity((img.width / BLOCK) * (img.height / BLOCK));
    for by in (0..img.height).step_by(BLOCK) {
        for bx in (0..img.width).step_by(BLOCK) {
            let mut block = [0.0; BLOCK * BLOCK];
            for y in 0..BLOCK {
                for x in 0..BLOCK {
                    block[y * BLOCK + x] = img.get(bx + x, by + y);
                }
            }
            blocks.push(block_dct(&block));
        }
    }
    Ok(DctPlane {
        width: img.width,
        height: img.height,
        blocks,
    })
}

pub fn dct_to_image(plane: &DctPlane) -> Result<GrayImage> {
    let mut img = GrayImage::new(plane.width, plane.height)?;
    let blocks_x = plane.width / BLOCK;
    for (bi, coeffs) in plane.blocks.iter().enumerate() {
        let bx = (bi % blocks_x) * BLOCK;
        let by = (bi / blocks_x) * BLOCK;
        let rec = block_idct(coeffs);
        for y in 0..BLOCK {
            for x in 0..BLOCK {
                img.set(bx + x, by + y, rec[y * BLOCK + x]);
            }
        }
    }
    Ok(img)
}

/// Extract the mid-frequency coefficients (zigzag positions `lo..lo+count`
/// within each block, skipping DC) from every block, concatenated in block
/// order. Returns the host vector used for embedding.
pub fn extract_coeffs(plane: &DctPlane, lo: usize, count: usize) -> Result<Vec<f64>> {
    if lo == 0 {
        return Err(Error::Config("zigzag extraction must skip the DC term".into()));
    }
    if lo + count > BLOCK * BLOCK {
        return Err(Error::Config("zigzag range exceeds the block".into()));
    }
    let order = zigzag_order();
    let mut out = Vec::with_capacity(plane.blocks.len() * count);
    for block in &plane.blocks {
        for &(i, j) in &order[lo..lo + count] {
            out.push(block[i * BLOCK + j]);
        }
    }
    Ok(out)
}

/// Write modified coefficients back into the positions used by
/// [`extract_coeffs`].
pub fn inject_coeffs(plane: &mut DctPlane, lo: usize, count: usize, vals: &[f64]) -> Result<()> {
    if vals.len() != plane.blocks.len() * count {
        return Err(Error::Config("coefficient count mismatch".into()));
    }
    if lo == 0 || lo + count > BLOCK * BLOCK {
        return Err(Error::Config("bad zigzag range".into()));
    }
    let order = zigzag_order();
    for (block, chunk) in plane.blocks.iter_mut().zip(vals.chunks(count)) {
        for (&(i, j), &v) in order[lo..lo + count].iter().zip(chunk) {
            block[i * BLOCK + j] = v;
        }
    }
    Ok(())
}

/// Baseline DCT frequency sensitivity thresholds (row-major 8×8): the
/// smallest coefficient change assumed visible at nominal viewing
/// conditions.
pub const DCT_SENSITIVITY: [f64; 64] = [
    1.40, 1.01, 1.16, 1.66, 2.40, 3.43, 4.79, 6.56, //
    1.01, 1.45, 1.32, 1.52, 2.00, 2.71, 3.67, 4.93, //
    1.16, 1.32, 2.24, 2.59, 2.98, 3.64, 4.60, 5.88, //
    1.66, 1.52, 2.59, 3.77, 4.55, 5.30, 6.28, 7.60, //
    2.40, 2.00, 2.98, 4.55, 6.15, 7.46, 8.71, 10.17, //
    3.43, 2.71, 3.64, 5.30, 7.46, 9.62, 11.58, 13.51, //
    4.79, 3.67, 4.60, 6.28, 8.71, 11.58, 14.50, 17.29, //
    6.56, 4.93, 5.88, 7.60, 10.17, 13.51, 17.29, 21.15,
];

/// Which masking stages to apply on top of the frequency sensitivities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskOptions {
    pub luminance: bool,
    pub contrast: bool,
}

impl Default for MaskOptions {
    fn default() -> Self {
        Self {
            luminance: true,
            contrast: true,
        }
    }
}

/// Per-coefficient just-noticeable-difference mask for the whole DCT
/// plane, in the same block-major layout as `plane.blocks`.
///
/// Stage 1 is the fixed frequency sensitivity. Stage 2 scales by
/// luminance: t' = t·(DC_k / mean DC)^0.649. Stage 3 applies contrast
/// masking: m = max{t', |coeff|^0.7 · t'^0.3}.
pub fn watson_mask(plane: &DctPlane, opts: MaskOptions) -> Result<Vec<[f64; BLOCK * BLOCK]>> {
    if plane.blocks.is_empty() {
        return Err(Error::Config("empty DCT plane".into()));
    }
    let mean_dc = plane.blocks.iter().map(|b| b[0]).sum::<f64>() / plane.blocks.len() as f64;
    if mean_dc <= 0.0 {
        return Err(Error::Domain("mean block DC must be positive".into()));
    }
    let mut out = Vec::with_capacity(plane.blocks.len());
    for block in &plane.blocks {
        let lum = if opts.luminance {
            (block[0] / mean_dc).max(1e-6).powf(0.649)
        } else {
            1.0
        };
        let mut mask = [0.0f64; BLOCK * BLOCK];
        for (k, m) in mask.iter_mut().enumerate() {
            let t = DCT_SENSITIVITY[k] * lum;
            *m = if opts.contrast && k != 0 {
                t.max(block[k].abs().powf(0.7) * t.powf(0.3))
            } else {
                t
            };
        }
        out.push(mask);
    }
    Ok(out)
}

/// Flatten a block-major mask to the coefficient order produced by
/// [`extract_coeffs`] for the same zigzag range.
pub fn mask_for_coeffs(
    masks: &[[f64; BLOCK * BLOCK]],
    lo: usize,
    count: usize,
) -> Result<Vec<f64>> {
    if lo == 0 || lo + count > BLOCK * BLOCK {
        return Err(Error::Config("bad zigzag range".into()));
    }
    let order = zigzag_order();
    let mut out = Vec::with_capacity(masks.len() * count);
    for mask in masks {
        for &(i, j) in &order[lo..lo + count] {
            out.push(mask[i * BLOCK + j]);
        }
    }
    Ok(out)
}

/// Peak signal-to-noise ratio in dB for 8-bit imagery; identical images
/// return +∞.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::Config("image dimensions differ".into()));
    }
    let mse = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.pixels.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}
