//! Decision statistics and decision rules for watermark verification
//! (present / absent) and decoding (which bit).

use crate::embed::{stdm_centroid, WatermarkSequence};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    /// Say "present" when the statistic exceeds ψ.
    Single,
    /// Say "present" when the statistic's magnitude exceeds ψ.
    Double,
    /// Decode the bit from the sign of the statistic (threshold 0).
    Sign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    H0,
    H1,
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionOutcome {
    pub statistic: f64,
    pub psi: f64,
    pub rule: Rule,
    pub verdict: Verdict,
}

/// Apply a decision rule to a computed statistic.
pub fn decide(statistic: f64, psi: f64, rule: Rule) -> DecisionOutcome {
    let verdict = match rule {
        Rule::Single => {
            if statistic > psi {
                Verdict::H1
            } else {
                Verdict::H0
            }
        }
        Rule::Double => {
            if statistic.abs() > psi {
                Verdict::H1
            } else {
                Verdict::H0
            }
        }
        Rule::Sign => {
            if statistic > 0.0 {
                Verdict::Plus
            } else {
                Verdict::Minus
            }
        }
    };
    DecisionOutcome {
        statistic,
        psi,
        rule,
        verdict,
    }
}

fn check_len(s: &[f64], w: &WatermarkSequence) -> Result<()> {
    if s.len() != w.len() {
        return Err(Error::Config(format!(
            "signal length {} != watermark length {}",
            s.len(),
            w.len()
        )));
    }
    Ok(())
}

/// Linear correlator (1/N)Σ s_i·w_i.
pub fn correlate(s: &[f64], w: &WatermarkSequence) -> Result<f64> {
    check_len(s, w)?;
    let n = s.len() as f64;
    Ok(s.iter().zip(w.as_slice()).map(|(&si, &wi)| si * wi).sum::<f64>() / n)
}

/// ξ-order correlator (1/N)Σ |s_i|^ξ·w_i — blind to the embedding
/// strength, near-optimal for multiplicative embedding at ξ equal to the
/// host shape parameter.
pub fn generalized_correlate(s: &[f64], w: &WatermarkSequence, xi: f64) -> Result<f64> {
    check_len(s, w)?;
    if xi < 0.0 {
        return Err(Error::Domain("order xi must be nonnegative".into()));
    }
    let n = s.len() as f64;
    Ok(s.iter()
        .zip(w.as_slice())
        .map(|(&si, &wi)| si.abs().powf(xi) * wi)
        .sum::<f64>()
        / n)
}

/// ξ-order decoding statistic for additive embedding:
/// (1/N)Σ |s_i + a·w_i|^ξ − |s_i − a·w_i|^ξ; decode the bit from its sign.
pub fn optimum_decode_ass(s: &[f64], w: &WatermarkSequence, a: f64, xi: f64) -> Result<f64> {
    check_len(s, w)?;
    if a <= 0.0 {
        return Err(Error::Config("strength a must be positive".into()));
    }
    let n = s.len() as f64;
    Ok(s.iter()
        .zip(w.as_slice())
        .map(|(&si, &wi)| {
            (si + a * wi).abs().powf(xi) - (si - a * wi).abs().powf(xi)
        })
        .sum::<f64>()
        / n)
}

/// ξ-order detection statistic for additive embedding:
/// (1/N)(Σ|s_i|^ξ − Σ|s_i − a·m_i·w_i|^ξ), with optional per-coefficient
/// masks m_i (all-ones when absent).
pub fn optimum_detect_ass(
    s: &[f64],
    w: &WatermarkSequence,
    a: f64,
    xi: f64,
    mask: Option<&[f64]>,
) -> Result<f64> {
    check_len(s, w)?;
    if let Some(m) = mask {
        if m.len() != s.len() {
            return Err(Error::Config("mask length mismatch".into()));
        }
    }
    let n = s.len() as f64;
    Ok(s.iter()
        .zip(w.as_slice())
        .enumerate()
        .map(|(i, (&si, &wi))| {
            let mi = mask.map_or(1.0, |m| m[i]);
            si.abs().powf(xi) - (si - a * mi * wi).abs().powf(xi)
        })
        .sum::<f64>()
        / n)
}

/// Exact likelihood detection statistic for multiplicative embedding:
/// (1/N)Σ |s_i|^shape·[1 − 1/(1 + a·w_i)^shape]. The same expression
/// serves both heavy-tailed symmetric hosts (shape = c) and positive
/// magnitude hosts (shape = δ).
pub fn optimum_detect_mss(s: &[f64], w: &WatermarkSequence, a: f64, shape: f64) -> Result<f64> {
    check_len(s, w)?;
    if !(0.0..1.0).contains(&a) {
        return Err(Error::Config(format!(
            "multiplicative strength must satisfy 0 <= a < 1, got {a}"
        )));
    }
    let n = s.len() as f64;
    let k_plus = 1.0 - (1.0 + a).powf(-shape);
    let k_minus = 1.0 - (1.0 - a).powf(-shape);
    Ok(s.iter()
        .zip(w.as_slice())
        .map(|(&si, &wi)| {
            let k = if wi > 0.0 { k_plus } else { k_minus };
            si.abs().powf(shape) * k
        })
        .sum::<f64>()
        / n)
}

/// Exact likelihood detection statistic for Gaussian hosts under additive
/// Gaussian noise: (1/N)Σ y_i²/(σx²+σv²) − y_i²/[σx²(1+a·w_i)² + σv²].
pub fn optimum_detect_gaussian_attacked(
    y: &[f64],
    w: &WatermarkSequence,
    a: f64,
    sigma_x: f64,
    sigma_v: f64,
) -> Result<f64> {
    check_len(y, w)?;
    if sigma_x <= 0.0 || sigma_v <= 0.0 {
        return Err(Error::Config("sigma_x and sigma_v must be positive".into()));
    }
    let n = y.len() as f64;
    let sx2 = sigma_x * sigma_x;
    let sv2 = sigma_v * sigma_v;
    let d0 = sx2 + sv2;
    let d_plus = sx2 * (1.0 + a) * (1.0 + a) + sv2;
    let d_minus = sx2 * (1.0 - a) * (1.0 - a) + sv2;
    Ok(y.iter()
        .zip(w.as_slice())
        .map(|(&yi, &wi)| {
            let d1 = if wi > 0.0 { d_plus } else { d_minus };
            yi * yi / d0 - yi * yi / d1
        })
        .sum::<f64>()
        / n)
}

/// Heavy-tail-robust statistic (1/N)Σ s_i·w_i/(γ² + s_i²).
pub fn cauchy_statistic(s: &[f64], w: &WatermarkSequence, gamma_c: f64) -> Result<f64> {
    check_len(s, w)?;
    if gamma_c <= 0.0 {
        return Err(Error::Config("cauchy scale must be positive".into()));
    }
    let n = s.len() as f64;
    Ok(s.iter()
        .zip(w.as_slice())
        .map(|(&si, &wi)| si * wi / (gamma_c * gamma_c + si * si))
        .sum::<f64>()
        / n)
}

/// Spread-transform lattice detection: project onto w and accept when the
/// projection lands within ψ of the watermark lattice ΔZ + Δ/2.
pub fn stdm_detect(
    y: &[f64],
    w: &WatermarkSequence,
    delta_step: f64,
    psi: f64,
) -> Result<DecisionOutcome> {
    check_len(y, w)?;
    if delta_step <= 0.0 {
        return Err(Error::Config("delta_step must be positive".into()));
    }
    if !(0.0..=delta_step / 2.0).contains(&psi) {
        return Err(Error::Config(format!(
            "psi must lie in [0, delta/2], got {psi}"
        )));
    }
    let ybar = correlate(y, w)?;
    let dist = (ybar - stdm_centroid(ybar, delta_step, None)).abs();
    let verdict = if dist < psi { Verdict::H1 } else { Verdict::H0 };
    Ok(DecisionOutcome {
        statistic: dist,
        psi,
        rule: Rule::Single,
        verdict,
    })
}
