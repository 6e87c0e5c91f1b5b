//! Watermark sequence generation, every embedding rule in the catalog,
//! and embedding-distortion bookkeeping.

use crate::detect;
use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Bipolar ±1 sequence of even length with exactly zero sum.
#[derive(Debug, Clone, PartialEq)]
pub struct WatermarkSequence {
    w: Vec<f64>,
}

impl WatermarkSequence {
    /// Wrap an existing ±1 sequence, enforcing the zero-sum/even-length
    /// constraints.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.len() < 2 || w.len() % 2 != 0 {
            return Err(Error::Domain(format!(
                "watermark length must be even and >= 2, got {}",
                w.len()
            )));
        }
        if w.iter().any(|&v| v != 1.0 && v != -1.0) {
            return Err(Error::Domain("watermark entries must be +1 or -1".into()));
        }
        if w.iter().sum::<f64>() != 0.0 {
            return Err(Error::Domain("watermark must sum to zero".into()));
        }
        Ok(Self { w })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }
}

/// Deterministically generate a zero-sum bipolar sequence: n/2 entries of
/// each sign, order shuffled by the seed.
pub fn gen_watermark(seed: u64, n: usize) -> Result<WatermarkSequence> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::Domain(format!(
            "watermark length must be even and >= 2, got {n}"
        )));
    }
    let mut w: Vec<f64> = (0..n).map(|i| if i < n / 2 { 1.0 } else { -1.0 }).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    w.shuffle(&mut rng);
    Ok(WatermarkSequence { w })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Additive: s = x + b·a·w
    Ass,
    /// Multiplicative: s = x·(1 + b·a·w)
    Mss,
    /// Magnitude-scaled additive: s = x + b·a·|x|·w
    Barni,
    /// Exponent-generalized: s = x + b·a·|x|^ξ·w
    GenBarni,
    /// Multiplicative with host-interference rejection
    Emss,
    DsAss,
    DsMss,
    DsBmss,
    DsAssHir,
    Stdm,
    Qim,
    DcQim,
    AssPerceptual,
    DsAssPerceptual,
    DsCauchy,
}

/// Parameters shared by all embedding rules. Unknown JSON fields are
/// rejected so configuration typos surface immediately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    /// Embedding strength.
    #[serde(default = "default_one")]
    pub a: f64,
    /// Message bit (+1/-1); fixed at +1 for verification experiments.
    #[serde(default = "default_bit")]
    pub b: f64,
    /// Host-interference rejecting strength in [0, 1].
    #[serde(default)]
    pub lambda: f64,
    /// Embedding order γ for the interference-rejecting term.
    #[serde(default = "default_one")]
    pub gamma_order: f64,
    /// Projection / magnitude-exponent order ξ (ζ in the generalized
    /// magnitude-scaled rules).
    #[serde(default = "default_one")]
    pub xi_order: f64,
    /// Quantizer step Δ.
    #[serde(default)]
    pub delta_step: f64,
    /// Quantizer dither offset; None selects the symmetric default.
    #[serde(default)]
    pub dither: Option<f64>,
    /// Target projection magnitude l for the host-interference-rejecting
    /// double-sided rule.
    #[serde(default)]
    pub target_l: f64,
    /// Optional per-coefficient perceptual thresholds.
    #[serde(default)]
    pub mask: Option<Vec<f64>>,
    /// Scale of the Cauchy projection used by the double-sided Cauchy rule.
    #[serde(default)]
    pub cauchy_gamma: Option<f64>,
}

fn default_one() -> f64 {
    1.0
}
fn default_bit() -> f64 {
    1.0
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, a: f64) -> Self {
        Self {
            scheme,
            a,
            b: 1.0,
            lambda: 0.0,
            gamma_order: 1.0,
            xi_order: 1.0,
            delta_step: 0.0,
            dither: None,
            target_l: 0.0,
            mask: None,
            cauchy_gamma: None,
        }
    }

    pub fn with_bit(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config(format!(
                "lambda must lie in [0, 1], got {}",
                self.lambda
            )));
        }
        if self.b != 1.0 && self.b != -1.0 {
            return Err(Error::Config(format!("bit b must be +1 or -1, got {}", self.b)));
        }
        let multiplicative = matches!(
            self.scheme,
            Scheme::Mss | Scheme::Emss | Scheme::DsMss | Scheme::DsBmss
        );
        if multiplicative && self.a > 0.5 {
            // The small-strength regime 1 ± a > 0 keeps magnitudes positive
            // and the linearizations honest.
            return Err(Error::Config(format!(
                "multiplicative strength a={} too large; a <= 0.5 required",
                self.a
            )));
        }
        if let Some(mask) = &self.mask {
            if mask.iter().any(|&m| m <= 0.0) {
                return Err(Error::Config("mask entries must be strictly positive".into()));
            }
        }
        Ok(())
    }

    fn mask_at(&self, i: usize) -> f64 {
        self.mask.as_ref().map_or(1.0, |m| m[i])
    }
}

fn check_lengths(x: &[f64], w: &WatermarkSequence, cfg: &SchemeConfig) -> Result<()> {
    if x.len() != w.len() {
        return Err(Error::Config(format!(
            "host length {} != watermark length {}",
            x.len(),
            w.len()
        )));
    }
    if let Some(mask) = &cfg.mask {
        if mask.len() != x.len() {
            return Err(Error::Config(format!(
                "mask length {} != host length {}",
                mask.len(),
                x.len()
            )));
        }
    }
    Ok(())
}

/// Spread-spectrum rules without informed embedding: additive,
/// multiplicative, and magnitude-scaled variants.
pub fn embed_ss(x: &[f64], w: &WatermarkSequence, cfg: &SchemeConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_lengths(x, w, cfg)?;
    let ws = w.as_slice();
    let ab = cfg.a * cfg.b;
    let s = match cfg.scheme {
        Scheme::Ass | Scheme::AssPerceptual => x
            .iter()
            .zip(ws)
            .enumerate()
            .map(|(i, (&xi, &wi))| xi + ab * cfg.mask_at(i) * wi)
            .collect(),
        Scheme::Mss => x
            .iter()
            .zip(ws)
            .map(|(&xi, &wi)| xi * (1.0 + ab * wi))
            .collect(),
        Scheme::Barni => x
            .iter()
            .zip(ws)
            .map(|(&xi, &wi)| xi + ab * xi.abs() * wi)
            .collect(),
        Scheme::GenBarni => x
            .iter()
            .zip(ws)
            .map(|(&xi, &wi)| xi + ab * xi.abs().powf(cfg.xi_order) * wi)
            .collect(),
        other => {
            return Err(Error::Config(format!(
                "embed_ss does not handle scheme {other:?}"
            )))
        }
    };
    Ok(s)
}

/// Distribution factor η = Σ|x|^γ·w / Σ|x|^γ.
pub fn distribution_factor(x: &[f64], w: &WatermarkSequence, gamma_order: f64) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (&xi, &wi) in x.iter().zip(w.as_slice()) {
        let p = xi.abs().powf(gamma_order);
        num += p * wi;
        den += p;
    }
    if den == 0.0 {
        return Err(Error::Domain(
            "degenerate host: all coefficients zero, distribution factor undefined".into(),
        ));
    }
    Ok(num / den)
}

/// Multiplicative rule with a host-interference-cancelling term:
/// s_i = x_i·(1 + b·a·w_i − λ·η·w_i/γ).
pub fn embed_emss(x: &[f64], w: &WatermarkSequence, cfg: &SchemeConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_lengths(x, w, cfg)?;
    if cfg.scheme != Scheme::Emss {
        return Err(Error::Config(format!(
            "embed_emss requires the emss scheme, got {:?}",
            cfg.scheme
        )));
    }
    let eta = distribution_factor(x, w, cfg.gamma_order)?;
    let k = cfg.lambda * eta / cfg.gamma_order;
    Ok(x.iter()
        .zip(w.as_slice())
        .map(|(&xi, &wi)| xi * (1.0 + cfg.a * cfg.b * wi - k * wi))
        .collect())
}

/// Projection that also serves as each double-sided detector's statistic.
fn ds_projection(x: &[f64], w: &WatermarkSequence, cfg: &SchemeConfig) -> Result<f64> {
    match cfg.scheme {
        Scheme::DsAss | Scheme::DsBmss | Scheme::DsAssPerceptual | Scheme::DsAssHir => {
            Ok(detect::correlate(x, w)?)
        }
        Scheme::DsMss => detect::generalized_correlate(x, w, cfg.xi_order),
        Scheme::DsCauchy => {
            let g = cfg.cauchy_gamma.ok_or_else(|| {
                Error::Config("ds_cauchy requires cauchy_gamma to be set".into())
            })?;
            detect::cauchy_statistic(x, w, g)
        }
        other => Err(Error::Config(format!(
            "scheme {other:?} has no double-sided projection"
        ))),
    }
}

/// Double-sided rules: the watermark term is added when the host's
/// projection is positive and subtracted otherwise, so the embedder always
/// pushes the detector's statistic away from zero. Ties at zero take the
/// subtract branch.
pub fn embed_double_sided(x: &[f64], w: &WatermarkSequence, cfg: &SchemeConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_lengths(x, w, cfg)?;
    let xbar = ds_projection(x, w, cfg)?;
    let sign = if xbar > 0.0 { 1.0 } else { -1.0 };
    let ws = w.as_slice();
    let s = match cfg.scheme {
        Scheme::DsAss | Scheme::DsAssPerceptual | Scheme::DsCauchy => x
            .iter()
            .zip(ws)
            .enumerate()
            .map(|(i, (&xi, &wi))| xi + sign * cfg.a * cfg.mask_at(i) * wi)
            .collect(),
        Scheme::DsBmss => x
            .iter()
            .zip(ws)
            .map(|(&xi, &wi)| xi + sign * cfg.a * xi.abs().powf(cfg.xi_order) * wi)
            .collect(),
        Scheme::DsMss => x
            .iter()
            .zip(ws)
            .map(|(&xi, &wi)| xi * (1.0 + sign * cfg.a * wi))
            .collect(),
        other => {
            return Err(Error::Config(format!(
                "embed_double_sided does not handle scheme {other:?}"
            )))
        }
    };
    Ok(s)
}

/// Uniform quantizer to the lattice ΔZ: qΔ(x) = Δ·⌊x/Δ + 1/2⌋.
pub fn quantize(x: f64, delta: f64) -> f64 {
    delta * (x / delta + 0.5).floor()
}

/// Bit-indexed dithered quantizer with the symmetric dithers
/// d[+1] = −d[−1] = Δ/4.
pub fn quantize_bit(x: f64, delta: f64, bit: f64) -> f64 {
    let d = bit * delta / 4.0;
    quantize(x - d, delta) + d
}

/// Quantization-based rules: per-sample index modulation, its
/// distortion-compensated variant, spread-transform dither modulation, and
/// the double-sided rule that forces the projection to exactly ±l.
pub fn embed_quantized(x: &[f64], w: &WatermarkSequence, cfg: &SchemeConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_lengths(x, w, cfg)?;
    let ws = w.as_slice();
    match cfg.scheme {
        Scheme::Qim | Scheme::DcQim => {
            if cfg.delta_step <= 0.0 {
                return Err(Error::Config("delta_step must be positive".into()));
            }
            let lam = if cfg.scheme == Scheme::Qim { 1.0 } else { cfg.lambda };
            Ok(x.iter()
                .map(|&xi| xi + lam * (quantize_bit(xi, cfg.delta_step, cfg.b) - xi))
                .collect())
        }
        Scheme::Stdm => {
            if cfg.delta_step <= 0.0 {
                return Err(Error::Config("delta_step must be positive".into()));
            }
            let xbar = detect::correlate(x, w)?;
            let offset = stdm_centroid(xbar, cfg.delta_step, cfg.dither) - xbar;
            Ok(x.iter().zip(ws).map(|(&xi, &wi)| xi + offset * wi).collect())
        }
        Scheme::DsAssHir => {
            if cfg.target_l <= 0.0 {
                return Err(Error::Config("target_l must be positive".into()));
            }
            let xbar = detect::correlate(x, w)?;
            let target = if xbar > 0.0 { cfg.target_l } else { -cfg.target_l };
            let offset = target - xbar;
            Ok(x.iter().zip(ws).map(|(&xi, &wi)| xi + offset * wi).collect())
        }
        other => Err(Error::Config(format!(
            "embed_quantized does not handle scheme {other:?}"
        ))),
    }
}

/// Nearest centroid of the dithered lattice ΔZ + d (symmetric default
/// d = Δ/2).
pub fn stdm_centroid(x: f64, delta: f64, dither: Option<f64>) -> f64 {
    let d = dither.unwrap_or(delta / 2.0);
    quantize(x - d, delta) + d
}

/// Dispatch to the right family for the configured scheme.
pub fn embed(x: &[f64], w: &WatermarkSequence, cfg: &SchemeConfig) -> Result<Vec<f64>> {
    match cfg.scheme {
        Scheme::Ass | Scheme::Mss | Scheme::Barni | Scheme::GenBarni | Scheme::AssPerceptual => {
            embed_ss(x, w, cfg)
        }
        Scheme::Emss => embed_emss(x, w, cfg),
        Scheme::DsAss | Scheme::DsMss | Scheme::DsBmss | Scheme::DsAssPerceptual
        | Scheme::DsCauchy => embed_double_sided(x, w, cfg),
        Scheme::Qim | Scheme::DcQim | Scheme::Stdm | Scheme::DsAssHir => {
            embed_quantized(x, w, cfg)
        }
    }
}

/// Mean squared embedding distortion (1/N)Σ(s−x)².
pub fn distortion(x: &[f64], s: &[f64]) -> Result<f64> {
    if x.len() != s.len() {
        return Err(Error::Config(format!(
            "length mismatch: {} vs {}",
            x.len(),
            s.len()
        )));
    }
    let n = x.len() as f64;
    Ok(x.iter()
        .zip(s)
        .map(|(&xi, &si)| (si - xi) * (si - xi))
        .sum::<f64>()
        / n)
}

/// Document-to-watermark ratio 10·log10(E(X²)/D_w) in dB.
pub fn dwr_db(e_x2: f64, dw: f64) -> f64 {
    10.0 * (e_x2 / dw).log10()
}

/// Watermark-to-noise ratio 10·log10(D_w/D_a) in dB.
pub fn wnr_db(dw: f64, da: f64) -> f64 {
    10.0 * (dw / da).log10()
}
