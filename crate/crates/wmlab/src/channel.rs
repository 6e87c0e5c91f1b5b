//! Attack channels applied to watermarked signals: additive noise from
//! several noise families and a JPEG-style quantization attack built on
//! an 8×8 block DCT.

use crate::error::{Error, Result};
use crate::models::{self, HostModel};
use crate::percept::{block_dct, block_idct, GrayImage, BLOCK};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;
use serde::{Deserialize, Serialize};

/// Attack description, deserializable from CLI/config JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "attack", rename_all = "snake_case", deny_unknown_fields)]
pub enum AttackSpec {
    /// Additive white Gaussian noise.
    Gaussian { sigma_v: f64 },
    /// Additive generalized-Gaussian noise of the given shape.
    Ggd { sigma_v: f64, shape: f64 },
    /// Rectified Gaussian noise |V|, the additive model for magnitude data.
    AbsGaussian { sigma_v: f64 },
    /// JPEG-style quantization at the given quality factor (1..=100).
    Jpeg { quality: u32 },
}

impl AttackSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AttackSpec::Gaussian { sigma_v } | AttackSpec::AbsGaussian { sigma_v } => {
                if sigma_v < 0.0 {
                    return Err(Error::Config("sigma_v must be nonnegative".into()));
                }
            }
            AttackSpec::Ggd { sigma_v, shape } => {
                if sigma_v < 0.0 || shape <= 0.0 {
                    return Err(Error::Config("need sigma_v >= 0 and shape > 0".into()));
                }
            }
            AttackSpec::Jpeg { quality } => {
                if !(1..=100).contains(&quality) {
                    return Err(Error::Config("quality must lie in 1..=100".into()));
                }
            }
        }
        Ok(())
    }
}

/// Add noise from the configured family: y_i = s_i + v_i (or |v_i|).
pub fn apply_noise<R: Rng + ?Sized>(s: &[f64], spec: &AttackSpec, rng: &mut R) -> Result<Vec<f64>> {
    spec.validate()?;
    let noise_model = |sigma_v: f64, shape: f64| HostModel::Ggd {
        c: shape,
        sigma_x: sigma_v,
    };
    match *spec {
        AttackSpec::Gaussian { sigma_v } => {
            if sigma_v == 0.0 {
                return Ok(s.to_vec());
            }
            let v = models::sample_with(&noise_model(sigma_v, 2.0), s.len(), rng)?;
            Ok(s.iter().zip(v).map(|(x, n)| x + n).collect())
        }
        AttackSpec::Ggd { sigma_v, shape } => {
            if sigma_v == 0.0 {
                return Ok(s.to_vec());
            }
            let v = models::sample_with(&noise_model(sigma_v, shape), s.len(), rng)?;
            Ok(s.iter().zip(v).map(|(x, n)| x + n).collect())
        }
        AttackSpec::AbsGaussian { sigma_v } => {
            if sigma_v == 0.0 {
                return Ok(s.to_vec());
            }
            let v = models::sample_with(&noise_model(sigma_v, 2.0), s.len(), rng)?;
            Ok(s.iter().zip(v).map(|(x, n)| x + n.abs()).collect())
        }
        AttackSpec::Jpeg { .. } => Err(Error::Config(
            "JPEG attacks apply to images; use jpeg_attack".into(),
        )),
    }
}

/// Seeded convenience wrapper around [`apply_noise`].
pub fn apply_noise_seeded(s: &[f64], spec: &AttackSpec, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    apply_noise(s, spec, &mut rng)
}

/// Baseline luminance quantization table (row-major, 8×8).
pub const JPEG_LUMA_Q: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Quantization table scaled to a quality factor with the conventional
/// 5000/QF (QF < 50) / 200 − 2·QF mapping, entries clamped to at least 1.
pub fn jpeg_quant_table(quality: u32) -> Result<[u16; 64]> {
    if !(1..=100).contains(&quality) {
        return Err(Error::Config("quality must lie in 1..=100".into()));
    }
    let scale = if quality < 50 {
        5000.0 / quality as f64
    } else {
        200.0 - 2.0 * quality as f64
    };
    let mut out = [1u16; 64];
    for (o, &q) in out.iter_mut().zip(JPEG_LUMA_Q.iter()) {
        let v = ((q as f64 * scale + 50.0) / 100.0).floor();
        *o = v.clamp(1.0, 32767.0) as u16;
    }
    Ok(out)
}

/// JPEG-style quantization attack: per 8×8 block, level-shift by −128,
/// forward DCT, quantize/dequantize with the quality-scaled table,
/// inverse DCT, shift back, clamp to [0, 255]. Entropy coding is omitted
/// since it is lossless and irrelevant to the attack.
pub fn jpeg_attack(img: &GrayImage, quality: u32) -> Result<GrayImage> {
    let table = jpeg_quant_table(quality)?;
    if img.width % BLOCK != 0 || img.height % BLOCK != 0 {
        return Err(Error::Config(
            "image dimensions must be multiples of 8".into(),
        ));
    }
    // The block DCT here is orthonormal; the JPEG reference FDCT uses the
    // same scaling, so the standard table applies directly.
    let mut out = img.clone();
    for by in (0..img.height).step_by(BLOCK) {
        for bx in (0..img.width).step_by(BLOCK) {
            let mut block = [0.0f64; BLOCK * BLOCK];
            for y in 0..BLOCK {
                for x in 0..BLOCK {
                    block[y * BLOCK + x] = img.get(bx + x, by + y) - 128.0;
                }
            }
            let mut coeffs = block_dct(&block);
            for (c, &q) in coeffs.iter_mut().zip(table.iter()) {
                let q = q as f64;
                *c = (*c / q).round() * q;
            }
            let rec = block_idct(&coeffs);
            for y in 0..BLOCK {
                for x in 0..BLOCK {
                    out.set(bx + x, by + y, (rec[y * BLOCK + x] + 128.0).clamp(0.0, 255.0));
                }
            }
        }
    }
    Ok(out)
}
