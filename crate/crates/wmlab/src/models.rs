//! Host-signal statistical models: densities, absolute moments, the
//! mean-variation ratio that governs multiplicative-scheme performance,
//! parameter estimation, seeded sampling, and the Gaussian tail function.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::function::erf;
use statrs::function::gamma::{gamma, ln_gamma};

/// Statistical description of a pool of host coefficients.
///
/// * `Ggd` models mid-frequency block-DCT coefficients: shape `c` (2 =
///   Gaussian, 1 = Laplacian, natural images typically 0.5..1.3) and
///   standard deviation `sigma_x`.
/// * `Weibull` models DFT magnitudes: scale `theta`, shape `delta`.
/// * `Cauchy` is a heavy-tailed alternative for DCT coefficients with
///   scale `gamma` and location fixed at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum HostModel {
    Ggd { c: f64, sigma_x: f64 },
    Weibull { theta: f64, delta: f64 },
    Cauchy { gamma: f64 },
}

/// A batch of coefficients drawn from (or attributed to) a model.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed: u64,
    pub model: Option<HostModel>,
}

impl HostModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            HostModel::Ggd { c, sigma_x } => c > 0.0 && sigma_x > 0.0,
            HostModel::Weibull { theta, delta } => theta > 0.0 && delta > 0.0,
            HostModel::Cauchy { gamma } => gamma > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "model parameters must be strictly positive: {self:?}"
            )))
        }
    }

    /// GGD rate parameter β = (1/σ)·√(Γ(3/c)/Γ(1/c)).
    pub fn ggd_beta(c: f64, sigma_x: f64) -> f64 {
        (gamma(3.0 / c) / gamma(1.0 / c)).sqrt() / sigma_x
    }

    /// GGD normalizing constant A = βc/(2Γ(1/c)).
    pub fn ggd_norm(c: f64, sigma_x: f64) -> f64 {
        let beta = Self::ggd_beta(c, sigma_x);
        beta * c / (2.0 * gamma(1.0 / c))
    }

    /// Variance of the model (second central moment). Undefined for Cauchy.
    pub fn variance(&self) -> Result<f64> {
        match *self {
            HostModel::Ggd { sigma_x, .. } => Ok(sigma_x * sigma_x),
            HostModel::Weibull { theta, delta } => {
                let m1 = gamma(1.0 / delta + 1.0) * theta;
                let m2 = gamma(2.0 / delta + 1.0) * theta * theta;
                Ok(m2 - m1 * m1)
            }
            HostModel::Cauchy { .. } => Err(Error::Unsupported(
                "Cauchy model has no finite variance".into(),
            )),
        }
    }
}

/// Probability density of the model at `x`.
pub fn pdf(model: &HostModel, x: f64) -> Result<f64> {
    model.validate()?;
    match *model {
        HostModel::Ggd { c, sigma_x } => {
            let beta = HostModel::ggd_beta(c, sigma_x);
            let a = HostModel::ggd_norm(c, sigma_x);
            Ok(a * (-(beta * x.abs()).powf(c)).exp())
        }
        HostModel::Weibull { theta, delta } => {
            if x < 0.0 {
                return Err(Error::Domain("Weibull density requires x >= 0".into()));
            }
            if x == 0.0 && delta < 1.0 {
                return Ok(f64::INFINITY);
            }
            let r = x / theta;
            Ok(delta / theta * r.powf(delta - 1.0) * (-r.powf(delta)).exp())
        }
        HostModel::Cauchy { gamma } => {
            Ok(gamma / (std::f64::consts::PI * (gamma * gamma + x * x)))
        }
    }
}

/// Absolute moment E(|X|^ξ).
///
/// GGD: Γ((ξ+1)/c) / (Γ(1/c)·β^ξ). Weibull: Γ(ξ/δ + 1)·θ^ξ.
pub fn abs_moment(model: &HostModel, xi: f64) -> Result<f64> {
    model.validate()?;
    if xi < 0.0 {
        return Err(Error::Domain("moment order must be nonnegative".into()));
    }
    match *model {
        HostModel::Ggd { c, sigma_x } => {
            let beta = HostModel::ggd_beta(c, sigma_x);
            let ln = ln_gamma((xi + 1.0) / c) - ln_gamma(1.0 / c) - xi * beta.ln();
            Ok(ln.exp())
        }
        HostModel::Weibull { theta, delta } => {
            Ok((ln_gamma(xi / delta + 1.0) + xi * theta.ln()).exp())
        }
        HostModel::Cauchy { .. } => {
            if xi == 0.0 {
                Ok(1.0)
            } else {
                Err(Error::Unsupported(
                    "Cauchy absolute moments of order >= 1 diverge; fractional orders unsupported"
                        .into(),
                ))
            }
        }
    }
}

/// Variance of |X|^ξ.
pub fn abs_moment_var(model: &HostModel, xi: f64) -> Result<f64> {
    let m1 = abs_moment(model, xi)?;
    let m2 = abs_moment(model, 2.0 * xi)?;
    Ok(m2 - m1 * m1)
}

/// Mean-variation ratio ξ·E(|X|^ξ)/√Var(|X|^ξ).
///
/// Scale-free: depends only on the shape parameter. Maximized at ξ = c
/// (GGD, value √c) and ξ = δ (Weibull, value δ).
pub fn mvr(model: &HostModel, xi: f64) -> Result<f64> {
    if xi <= 0.0 {
        return Err(Error::Domain("mvr requires xi > 0".into()));
    }
    match *model {
        HostModel::Ggd { c, .. } => {
            // Computed on the unit-β scale; β cancels between numerator and
            // denominator.
            let g = |z: f64| ln_gamma(z / c);
            let num = xi * (g(xi + 1.0) - g(1.0)).exp();
            let var = (g(2.0 * xi + 1.0) - g(1.0)).exp() - (2.0 * (g(xi + 1.0) - g(1.0))).exp();
            Ok(num / var.sqrt())
        }
        HostModel::Weibull { delta, .. } => {
            let m1 = (ln_gamma(xi / delta + 1.0)).exp();
            let m2 = (ln_gamma(2.0 * xi / delta + 1.0)).exp();
            Ok(xi * m1 / (m2 - m1 * m1).sqrt())
        }
        HostModel::Cauchy { .. } => Err(Error::Unsupported(
            "mvr undefined for the Cauchy model".into(),
        )),
    }
}

/// The ratio ξ·E(|X|^ξ)/√(E(|X|^{2ξ})) — the analogue of `mvr` that
/// appears when the watermark sequence itself is treated as random.
pub fn amr(model: &HostModel, xi: f64) -> Result<f64> {
    if xi <= 0.0 {
        return Err(Error::Domain("amr requires xi > 0".into()));
    }
    let m1 = abs_moment(model, xi)?;
    let m2 = abs_moment(model, 2.0 * xi)?;
    Ok(xi * m1 / m2.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ggd,
    Weibull,
    Cauchy,
}

/// Fit a model of the requested kind to a sample batch.
///
/// GGD uses the moment-ratio method: invert M(c) = E(|X|)²/E(X²) =
/// Γ(2/c)²/(Γ(1/c)Γ(3/c)) by bisection, with σX the sample standard
/// deviation. Weibull solves the shape likelihood equation by bisection
/// on δ ∈ [0.05, 20]; the scale then follows as θ = (mean xᵟ)^(1/δ).
/// Cauchy solves the scale likelihood equation Σ(γ²−x²)/(γ²+x²) = 0.
pub fn estimate(samples: &SampleBatch, kind: ModelKind) -> Result<HostModel> {
    let xs = &samples.values;
    if xs.len() < 100 {
        return Err(Error::Domain(format!(
            "need at least 100 samples to estimate, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    match kind {
        ModelKind::Ggd => {
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            let e_abs = xs.iter().map(|x| x.abs()).sum::<f64>() / n;
            let e_sq = xs.iter().map(|x| x * x).sum::<f64>() / n;
            let target = e_abs * e_abs / e_sq;
            let m = |c: f64| {
                (2.0 * ln_gamma(2.0 / c) - ln_gamma(1.0 / c) - ln_gamma(3.0 / c)).exp()
            };
            // M(c) is strictly increasing in c.
            let c = bisect(|c| m(c) - target, 0.02, 50.0, 1e-10, 500)?;
            Ok(HostModel::Ggd {
                c,
                sigma_x: var.sqrt(),
            })
        }
        ModelKind::Weibull => {
            if xs.iter().any(|&x| x <= 0.0) {
                return Err(Error::Domain(
                    "Weibull estimation requires strictly positive samples".into(),
                ));
            }
            let sum_ln: f64 = xs.iter().map(|x| x.ln()).sum();
            let resid = |d: f64| {
                let mut s_pow = 0.0;
                let mut s_pow_ln = 0.0;
                for &x in xs {
                    let p = x.powf(d);
                    s_pow += p;
                    s_pow_ln += p * x.ln();
                }
                n / d + sum_ln - n * s_pow_ln / s_pow
            };
            let delta = bisect(resid, 0.05, 20.0, 1e-10, 500)?;
            let theta = (xs.iter().map(|x| x.powf(delta)).sum::<f64>() / n).powf(1.0 / delta);
            Ok(HostModel::Weibull { theta, delta })
        }
        ModelKind::Cauchy => {
            // N/γ = Σ 2γ/(γ²+xᵢ²)  ⇔  Σ (γ²−xᵢ²)/(γ²+xᵢ²) = 0, increasing in γ.
            let resid = |g: f64| {
                let g2 = g * g;
                xs.iter().map(|x| (g2 - x * x) / (g2 + x * x)).sum::<f64>()
            };
            let hi = xs.iter().fold(1.0_f64, |m, &x| m.max(x.abs())) + 1.0;
            let gamma_c = bisect(resid, 1e-9, hi, 1e-12, 500)?;
            Ok(HostModel::Cauchy { gamma: gamma_c })
        }
    }
}

/// Bracketed bisection root-finder on [lo, hi].
pub fn bisect<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numeric(format!(
            "root not bracketed on [{lo}, {hi}]: f(lo)={flo:.3e}, f(hi)={fhi:.3e}"
        )));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || 0.5 * (hi - lo) < tol {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numeric(format!(
        "bisection did not converge; bracket [{lo}, {hi}], residual {:.3e}",
        f(0.5 * (lo + hi))
    )))
}

/// Draw `n` coefficients from the model, deterministically for a given seed.
///
/// GGD draws a fair sign and a Gamma(1/c, β^{-c}) magnitude E, returning
/// ±E^{1/c}. Weibull draws an exponential Z with scale θᵟ and returns
/// Z^{1/δ}. Cauchy inverts the CDF.
pub fn sample(model: &HostModel, n: usize, seed: u64) -> Result<SampleBatch> {
    model.validate()?;
    if n == 0 {
        return Err(Error::Domain("sample count must be >= 1".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let values = sample_with(model, n, &mut rng)?;
    Ok(SampleBatch {
        values,
        seed,
        model: Some(*model),
    })
}

/// Sampling core reusable with an external RNG stream.
pub fn sample_with<R: Rng + ?Sized>(model: &HostModel, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    match *model {
        HostModel::Ggd { c, sigma_x } => {
            let beta = HostModel::ggd_beta(c, sigma_x);
            let gamma_dist = rand_distr::Gamma::new(1.0 / c, beta.powf(-c)).map_err(|e| {
                Error::Unsupported(format!("Gamma sampler rejected shape 1/c for c={c}: {e}"))
            })?;
            Ok((0..n)
                .map(|_| {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    let e: f64 = gamma_dist.sample(rng);
                    sign * e.powf(1.0 / c)
                })
                .collect())
        }
        HostModel::Weibull { theta, delta } => Ok((0..n)
            .map(|_| {
                let u: f64 = rng.random::<f64>();
                let z = -theta.powf(delta) * (1.0 - u).ln();
                z.powf(1.0 / delta)
            })
            .collect()),
        HostModel::Cauchy { gamma } => Ok((0..n)
            .map(|_| {
                let u: f64 = rng.random::<f64>();
                gamma * (std::f64::consts::PI * (u - 0.5)).tan()
            })
            .collect()),
    }
}

/// Gaussian upper-tail function Q(x) = P(Z > x) for Z ~ N(0,1).
pub fn q(x: f64) -> f64 {
    0.5 * erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of `q` on (0, 1), accurate to ~1e-12 relative via Newton
/// refinement of the inverse complementary error function.
pub fn q_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("q_inv requires p in (0,1), got {p}")));
    }
    let mut x = std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p);
    // Newton: d/dx Q(x) = -phi(x).
    for _ in 0..4 {
        let phi = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if phi == 0.0 {
            break;
        }
        x += (q(x) - p) / phi;
    }
    Ok(x)
}

/// Serialize a sample batch as newline-delimited decimal text.
pub fn write_samples<W: std::io::Write>(w: &mut W, values: &[f64]) -> Result<()> {
    for v in values {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

/// Parse newline-delimited decimal text into coefficients.
pub fn read_samples<R: std::io::BufRead>(r: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        out.push(
            t.parse::<f64>()
                .map_err(|e| Error::Config(format!("line {}: bad number {t:?}: {e}", i + 1)))?,
        );
    }
    Ok(out)
}
