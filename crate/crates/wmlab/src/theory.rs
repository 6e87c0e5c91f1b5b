//! Analytic performance predictors: Gaussian-approximation error and ROC
//! formulas, statistic moments for every supported scheme/attack pairing,
//! exact and approximate distortion forms for the interference-rejecting
//! embedder, lattice-scheme ROC sums, and the numeric convolution engine
//! used when a host-plus-noise density has no closed form.

use crate::error::{Error, Result};
use crate::models::{self, HostModel};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Means and standard deviations of a decision statistic under H0/H1,
/// feeding the Gaussian (CLT) error and ROC approximations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianStatSummary {
    pub m0: f64,
    pub m1: f64,
    pub s0: f64,
    pub s1: f64,
    /// Set when the central-limit approximation is suspect (small N, or a
    /// moment order far above the host shape for heavy-tailed hosts).
    #[serde(default)]
    pub clt_warning: bool,
}

impl GaussianStatSummary {
    pub fn new(m0: f64, m1: f64, s0: f64, s1: f64) -> Self {
        Self {
            m0,
            m1,
            s0,
            s1,
            clt_warning: false,
        }
    }
}

/// Total decoding error probability 0.5·Q(−m0/σ0) + 0.5·Q(m1/σ1).
pub fn pe_gaussian(sum: &GaussianStatSummary) -> f64 {
    0.5 * models::q(-sum.m0 / sum.s0) + 0.5 * models::q(sum.m1 / sum.s1)
}

/// Miss probability at a fixed false-alarm rate:
/// p_m = 1 − Q{[Q⁻¹(p_fa)·σ0 + m0 − m1]/σ1}.
pub fn roc_gaussian(sum: &GaussianStatSummary, p_fa: f64) -> Result<f64> {
    let z = models::q_inv(p_fa)?;
    Ok(1.0 - models::q((z * sum.s0 + sum.m0 - sum.m1) / sum.s1))
}

/// Density tabulated on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericPdf {
    pub min: f64,
    pub step: f64,
    pub vals: Vec<f64>,
}

/// Default grid resolution for tabulated densities and convolutions.
pub const GRID_POINTS: usize = 1 << 16;

impl NumericPdf {
    /// Tabulate a density function on [min, max] with `n` points.
    pub fn from_fn<F: Fn(f64) -> f64>(min: f64, max: f64, n: usize, f: F) -> Result<Self> {
        if !(max > min) || n < 16 {
            return Err(Error::Config("bad pdf grid".into()));
        }
        let step = (max - min) / (n - 1) as f64;
        let vals = (0..n).map(|i| f(min + i as f64 * step).max(0.0)).collect();
        let mut pdf = Self { min, step, vals };
        pdf.normalize();
        Ok(pdf)
    }

    /// Tabulate one of the host models over a range wide enough for its
    /// tails (heavy tails get a wide span).
    pub fn from_model(model: &HostModel, n: usize) -> Result<Self> {
        model.validate()?;
        match *model {
            HostModel::Ggd { c, sigma_x } => {
                // Span chosen so the truncated tail mass is negligible even
                // at heavy-tailed shapes around 0.3.
                let span = if c >= 1.0 { 14.0 } else { 40.0 + 30.0 / c };
                let m = *model;
                Self::from_fn(-span * sigma_x, span * sigma_x, n, move |x| {
                    models::pdf(&m, x).unwrap_or(0.0)
                })
            }
            HostModel::Weibull { theta, delta } => {
                let max = theta * (50.0_f64).powf(1.0 / delta) * 1.5;
                let m = *model;
                Self::from_fn(0.0, max, n, move |x| models::pdf(&m, x).unwrap_or(0.0))
            }
            HostModel::Cauchy { .. } => Err(Error::Unsupported(
                "no finite-moment grid exists for the Cauchy model".into(),
            )),
        }
    }

    /// Zero-mean Gaussian density on [-span·σ, span·σ].
    pub fn gaussian(sigma: f64, span: f64, n: usize) -> Result<Self> {
        Self::from_fn(-span * sigma, span * sigma, n, move |x| {
            (-0.5 * x * x / (sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
        })
    }

    pub fn max(&self) -> f64 {
        self.min + self.step * (self.vals.len() - 1) as f64
    }

    /// Trapezoid integral of the tabulated density.
    pub fn integral(&self) -> f64 {
        let s: f64 = self.vals.iter().sum();
        (s - 0.5 * self.vals[0] - 0.5 * self.vals[self.vals.len() - 1]) * self.step
    }

    pub fn normalize(&mut self) {
        let z = self.integral();
        if z > 0.0 {
            for v in &mut self.vals {
                *v /= z;
            }
        }
    }

    /// Trapezoid expectation E[g(X)].
    pub fn expect<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let n = self.vals.len();
        let mut acc = 0.0;
        for (i, &f) in self.vals.iter().enumerate() {
            let x = self.min + i as f64 * self.step;
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            acc += w * g(x) * f;
        }
        acc * self.step
    }

    /// Variance of g(X).
    pub fn var<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let m = self.expect(&g);
        let m2 = self.expect(|x| {
            let v = g(x);
            v * v
        });
        (m2 - m * m).max(0.0)
    }
}

fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(size);
    let ifft = planner.plan_fft_inverse(size);
    let mut fa: Vec<Complex<f64>> = a.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fa.resize(size, Complex::new(0.0, 0.0));
    let mut fb: Vec<Complex<f64>> = b.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fb.resize(size, Complex::new(0.0, 0.0));
    fft.process(&mut fa);
    fft.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    ifft.process(&mut fa);
    fa.truncate(out_len);
    fa.iter().map(|c| c.re / size as f64).collect()
}

/// Density of the sum of two independent variables tabulated on grids with
/// a common step: (f*g)(z), renormalized.
pub fn pdf_convolve(f: &NumericPdf, g: &NumericPdf) -> Result<NumericPdf> {
    let rel = (f.step - g.step).abs() / f.step.max(g.step);
    if rel > 1e-9 {
        return Err(Error::Config(format!(
            "grid mismatch: steps {} vs {}",
            f.step, g.step
        )));
    }
    let vals = fft_convolve(&f.vals, &g.vals)
        .into_iter()
        .map(|v| v.max(0.0) * f.step)
        .collect();
    let mut out = NumericPdf {
        min: f.min + g.min,
        step: f.step,
        vals,
    };
    out.normalize();
    Ok(out)
}

/// Additive noise channel description for the analytic predictors: a
/// zero-mean generalized-Gaussian noise of standard deviation `sigma_v`
/// and shape `shape` (2 = Gaussian), optionally rectified (`absolute`)
/// as used with positive magnitude hosts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseAttack {
    pub sigma_v: f64,
    #[serde(default = "default_shape")]
    pub shape: f64,
    #[serde(default)]
    pub absolute: bool,
}

fn default_shape() -> f64 {
    2.0
}

impl NoiseAttack {
    pub fn gaussian(sigma_v: f64) -> Self {
        Self {
            sigma_v,
            shape: 2.0,
            absolute: false,
        }
    }

    fn density_fn(&self) -> impl Fn(f64) -> f64 {
        let model = HostModel::Ggd {
            c: self.shape,
            sigma_x: self.sigma_v,
        };
        let absolute = self.absolute;
        move |v: f64| {
            if absolute {
                if v < 0.0 {
                    0.0
                } else {
                    2.0 * models::pdf(&model, v).unwrap_or(0.0)
                }
            } else {
                models::pdf(&model, v).unwrap_or(0.0)
            }
        }
    }
}

/// Which decision statistic (and embedding rule) a moment prediction is
/// for. Decode variants model the bit-decoding problem (sign rule);
/// detect variants model verification (H0 = no watermark).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stat", rename_all = "snake_case")]
pub enum Stat {
    /// Additive embedding, linear correlator, sign decoding.
    CorrDecode { a: f64 },
    /// Additive embedding, ξ-order decoder.
    AssOptDecode { a: f64, xi: f64 },
    /// Multiplicative embedding, ξ-order correlator, sign decoding.
    MssDecode { a: f64, xi: f64 },
    /// Additive embedding, ξ-order detection statistic.
    AssOptDetect { a: f64, xi: f64 },
    /// Multiplicative embedding, exact likelihood detection statistic.
    MssOptDetect { a: f64 },
    /// Multiplicative embedding, ξ-order correlator detection.
    GenCorrDetect { a: f64, xi: f64 },
    /// Additive embedding, linear correlator detection.
    CorrDetect { a: f64 },
    /// Magnitude-scaled additive embedding (exponent ζ), linear correlator.
    BarniCorrDetect { a: f64, zeta: f64 },
    /// Gaussian host + Gaussian noise exact likelihood detector.
    GaussAttackedOptDetect { a: f64 },
    /// Interference-rejecting multiplicative embedding, ξ-order correlator
    /// detection.
    EmssDetect { a: f64, lambda: f64, gamma: f64, xi: f64 },
    /// Same embedder, sign decoding.
    EmssDecode { a: f64, lambda: f64, gamma: f64, xi: f64 },
}

fn host_grid(model: &HostModel) -> Result<NumericPdf> {
    NumericPdf::from_model(model, GRID_POINTS)
}

/// Density of k·X + V on a common grid (V omitted when `attack` is None,
/// in which case the scaled host density itself is returned).
fn scaled_host_plus_noise(
    model: &HostModel,
    k: f64,
    attack: Option<&NoiseAttack>,
    base: &NumericPdf,
) -> Result<NumericPdf> {
    let m = *model;
    let scaled = NumericPdf::from_fn(base.min * k.abs().max(1.0), base.max() * k.abs().max(1.0), base.vals.len(), move |x| {
        models::pdf(&m, x / k).unwrap_or(0.0) / k.abs()
    });
    // Positive-support hosts keep a positive-side grid.
    let scaled = match *model {
        HostModel::Weibull { .. } => {
            let m2 = m;
            NumericPdf::from_fn(0.0, base.max() * k, base.vals.len(), move |x| {
                models::pdf(&m2, x / k).unwrap_or(0.0) / k
            })?
        }
        _ => scaled?,
    };
    match attack {
        None => Ok(scaled),
        Some(att) => {
            let dens = att.density_fn();
            let span = 12.0 * att.sigma_v;
            let n = ((2.0 * span / scaled.step).ceil() as usize + 1).max(64);
            let lo = if att.absolute { 0.0 } else { -span };
            let noise = NumericPdf::from_fn(lo, lo + (n - 1) as f64 * scaled.step, n, dens)?;
            pdf_convolve(&scaled, &noise)
        }
    }
}

fn clt_flag(model: &HostModel, xi: f64, n: usize) -> bool {
    let heavy = match *model {
        HostModel::Ggd { c, .. } => c < 1.0 && xi > 2.0 * c,
        _ => false,
    };
    n < 100 || heavy
}

/// Predicted moments of a decision statistic with N coefficients, for the
/// given host model and optional additive-noise attack. Pairings with no
/// analytic or convolution path report which capability is missing.
pub fn moments_for(
    stat: &Stat,
    model: &HostModel,
    attack: Option<&NoiseAttack>,
    n: usize,
) -> Result<GaussianStatSummary> {
    if n == 0 {
        return Err(Error::Config("N must be positive".into()));
    }
    let nf = n as f64;
    match *stat {
        Stat::CorrDecode { a } => {
            let var_x = model.variance()?;
            let var_v = attack.map_or(0.0, |t| {
                if t.absolute {
                    t.sigma_v * t.sigma_v * (1.0 - 2.0 / std::f64::consts::PI)
                } else {
                    t.sigma_v * t.sigma_v
                }
            });
            let s = ((var_x + var_v) / nf).sqrt();
            Ok(GaussianStatSummary::new(-a, a, s, s))
        }
        Stat::CorrDetect { a } => {
            let var_x = model.variance()?;
            let var_v = attack.map_or(0.0, |t| {
                if t.absolute {
                    t.sigma_v * t.sigma_v * (1.0 - 2.0 / std::f64::consts::PI)
                } else {
                    t.sigma_v * t.sigma_v
                }
            });
            let s = ((var_x + var_v) / nf).sqrt();
            Ok(GaussianStatSummary::new(0.0, a, s, s))
        }
        Stat::AssOptDecode { a, xi } => {
            let u = scaled_host_plus_noise(model, 1.0, attack, &host_grid(model)?)?;
            // Bit +1: per-term |u + 2a·w|^ξ − |u|^ξ with u symmetric, so the
            // w sign is immaterial.
            let g = |x: f64| (x + 2.0 * a).abs().powf(xi) - x.abs().powf(xi);
            let m1 = u.expect(g);
            let s1 = (u.var(g) / nf).sqrt();
            let mut out = GaussianStatSummary::new(-m1, m1, s1, s1);
            out.clt_warning = clt_flag(model, xi, n);
            Ok(out)
        }
        Stat::AssOptDetect { a, xi } => {
            let u = scaled_host_plus_noise(model, 1.0, attack, &host_grid(model)?)?;
            let g = |x: f64| (x + a).abs().powf(xi) - x.abs().powf(xi);
            let m1 = u.expect(g);
            let s = (u.var(g) / nf).sqrt();
            let mut out = GaussianStatSummary::new(-m1, m1, s, s);
            out.clt_warning = clt_flag(model, xi, n);
            Ok(out)
        }
        Stat::MssDecode { a, xi } | Stat::GenCorrDetect { a, xi } => {
            let decode = matches!(stat, Stat::MssDecode { .. });
            let (m0, s0, m1, s1) = match attack {
                None => {
                    let m = models::abs_moment(model, xi)?;
                    let v = models::abs_moment_var(model, xi)?;
                    let kp = (1.0 + a).powf(xi);
                    let km = (1.0 - a).powf(xi);
                    let m1 = 0.5 * m * (kp - km);
                    let s1 = ((kp * kp + km * km) / 2.0 * v / nf).sqrt();
                    (0.0, (v / nf).sqrt(), m1, s1)
                }
                Some(att) => {
                    let base = host_grid(model)?;
                    let u0 = scaled_host_plus_noise(model, 1.0, attack, &base)?;
                    let up = scaled_host_plus_noise(model, 1.0 + a, Some(att), &base)?;
                    let um = scaled_host_plus_noise(model, 1.0 - a, Some(att), &base)?;
                    let g = |x: f64| x.abs().powf(xi);
                    let m1 = 0.5 * (up.expect(g) - um.expect(g));
                    let s1 = ((up.var(g) + um.var(g)) / (2.0 * nf)).sqrt();
                    (0.0, (u0.var(g) / nf).sqrt(), m1, s1)
                }
            };
            let mut out = if decode {
                GaussianStatSummary::new(-m1, m1, s1, s1)
            } else {
                GaussianStatSummary::new(m0, m1, s0, s1)
            };
            out.clt_warning = clt_flag(model, xi, n);
            Ok(out)
        }
        Stat::MssOptDetect { a } => {
            if attack.is_some() {
                return Err(Error::Unsupported(
                    "exact multiplicative likelihood detector: moments only derived without attack"
                        .into(),
                ));
            }
            let shape = match *model {
                HostModel::Ggd { c, .. } => c,
                HostModel::Weibull { delta, .. } => delta,
                HostModel::Cauchy { .. } => {
                    return Err(Error::Unsupported("Cauchy host unsupported here".into()))
                }
            };
            let m = models::abs_moment(model, shape)?;
            let v = models::abs_moment_var(model, shape)?;
            let kp = 1.0 - (1.0 + a).powf(-shape);
            let km = 1.0 - (1.0 - a).powf(-shape);
            let jp = (1.0 + a).powf(shape) - 1.0;
            let jm = (1.0 - a).powf(shape) - 1.0;
            let m0 = 0.5 * m * (kp + km);
            let s0 = ((kp * kp + km * km) / 2.0 * v / nf).sqrt();
            let m1 = 0.5 * m * (jp + jm);
            let s1 = ((jp * jp + jm * jm) / 2.0 * v / nf).sqrt();
            Ok(GaussianStatSummary::new(m0, m1, s0, s1))
        }
        Stat::BarniCorrDetect { a, zeta } => {
            if attack.is_some() {
                return Err(Error::Unsupported(
                    "magnitude-scaled correlator under attack: use the multiplicative path on positive hosts"
                        .into(),
                ));
            }
            let var_x = model.variance()?;
            let m_z = models::abs_moment(model, zeta)?;
            let v_z = models::abs_moment_var(model, zeta)?;
            // Cov(X, |X|^ζ) vanishes for symmetric hosts; for positive hosts
            // it is E X^{1+ζ} − EX·EX^ζ.
            let cov = match *model {
                HostModel::Ggd { .. } => 0.0,
                HostModel::Weibull { .. } => {
                    models::abs_moment(model, 1.0 + zeta)?
                        - models::abs_moment(model, 1.0)? * m_z
                }
                HostModel::Cauchy { .. } => {
                    return Err(Error::Unsupported("Cauchy host unsupported here".into()))
                }
            };
            let s0 = (var_x / nf).sqrt();
            let m1 = a * m_z;
            let s1 = ((var_x + a * a * v_z + 2.0 * a * cov) / nf).sqrt();
            Ok(GaussianStatSummary::new(0.0, m1, s0, s1))
        }
        Stat::GaussAttackedOptDetect { a } => {
            let sigma_x = match *model {
                HostModel::Ggd { c, sigma_x } if (c - 2.0).abs() < 1e-9 => sigma_x,
                _ => {
                    return Err(Error::Unsupported(
                        "exact attacked likelihood detector requires a Gaussian host".into(),
                    ))
                }
            };
            let att = attack.ok_or_else(|| {
                Error::Config("this detector is defined for an additive Gaussian attack".into())
            })?;
            let sx2 = sigma_x * sigma_x;
            let sv2 = att.sigma_v * att.sigma_v;
            let dp = sx2 * (1.0 + a) * (1.0 + a) + sv2;
            let dm = sx2 * (1.0 - a) * (1.0 - a) + sv2;
            let rho_p = 1.0 / (sx2 + sv2) - 1.0 / dp;
            let rho_m = 1.0 / (sx2 + sv2) - 1.0 / dm;
            // Per-term y²·ρ(w) with y² having variance 2·(E y²)².
            let m0 = (sx2 + sv2) * (rho_p + rho_m) / 2.0;
            let s0 =
                ((sx2 + sv2) * (sx2 + sv2) * (rho_p * rho_p + rho_m * rho_m) / nf).sqrt();
            let m1 = (dp * rho_p + dm * rho_m) / 2.0;
            let s1 = ((dp * dp * rho_p * rho_p + dm * dm * rho_m * rho_m) / nf).sqrt();
            Ok(GaussianStatSummary::new(m0, m1, s0, s1))
        }
        Stat::EmssDetect { a, lambda, gamma, xi } | Stat::EmssDecode { a, lambda, gamma, xi } => {
            if attack.is_some() {
                return Err(Error::Unsupported(
                    "interference-rejecting embedder: attacked moments are provided for Gaussian hosts via the exact detector path only"
                        .into(),
                ));
            }
            let m_xi = models::abs_moment(model, xi)?;
            let v_xi = models::abs_moment_var(model, xi)?;
            let m1 = xi * a * m_xi;
            let s1_sq = if (gamma - xi).abs() < 1e-12 {
                ((1.0 - lambda) * (1.0 - lambda) + xi * xi * a * a) * v_xi / nf
            } else {
                let m_g = models::abs_moment(model, gamma)?;
                let v_g = models::abs_moment_var(model, gamma)?;
                let m_xg = models::abs_moment(model, xi + gamma)?;
                (1.0 + xi * xi * a * a) * v_xi / nf
                    + lambda * lambda * xi * xi * m_xi * m_xi * v_g
                        / (nf * gamma * gamma * m_g * m_g)
                    - 2.0 * lambda * xi * m_xi * (m_xg - m_xi * m_g) / (nf * gamma * m_g)
            };
            let s1 = s1_sq.max(0.0).sqrt();
            let s0 = (v_xi / nf).sqrt();
            let mut out = if matches!(stat, Stat::EmssDecode { .. }) {
                GaussianStatSummary::new(-m1, m1, s1, s1)
            } else {
                GaussianStatSummary::new(0.0, m1, s0, s1)
            };
            out.clt_warning = clt_flag(model, xi, n);
            Ok(out)
        }
    }
}

/// Double-sided ROC: p_m = 1 − 2Q[Q⁻¹(p_fa/2) − ρ] when p_fa < 2Q(ρ),
/// else exactly zero (the zero-miss region).
pub fn ds_roc(rho: f64, p_fa: f64) -> Result<f64> {
    if rho <= 0.0 {
        return Err(Error::Domain("rho must be positive".into()));
    }
    if !(p_fa > 0.0 && p_fa < 1.0) {
        return Err(Error::Domain("p_fa must lie in (0,1)".into()));
    }
    if p_fa >= 2.0 * models::q(rho) {
        return Ok(0.0);
    }
    Ok((1.0 - 2.0 * models::q(models::q_inv(p_fa / 2.0)? - rho)).max(0.0))
}

/// Double-sided detection under additive noise. The H1 statistic is
/// |x̄| + m1 plus noise of spread σ1, with x̄ the zero-mean host projection
/// of spread σ_x̄. Returns (p_fa, p_m) at threshold ψ:
/// p_fa = 2Q(ψ/σ0), p_m by quadrature over the host projection.
pub fn ds_pm_attacked(
    m1: f64,
    sigma0: f64,
    sigma1: f64,
    sigma_xbar: f64,
    psi: f64,
) -> Result<(f64, f64)> {
    if sigma0 <= 0.0 || sigma1 <= 0.0 || sigma_xbar <= 0.0 || psi < 0.0 {
        return Err(Error::Domain("spreads must be positive and psi nonnegative".into()));
    }
    let p_fa = 2.0 * models::q(psi / sigma0);
    // Simpson quadrature over x̄ ∈ [0, 10σ_x̄].
    let hi = 10.0 * sigma_xbar;
    let steps = 20_000usize;
    let h = hi / steps as f64;
    let dens = |x: f64| {
        (-0.5 * x * x / (sigma_xbar * sigma_xbar)).exp()
            / (sigma_xbar * (2.0 * std::f64::consts::PI).sqrt())
    };
    let inner = |x: f64| {
        let mu = x + m1;
        models::q((-psi - mu) / sigma1) - models::q((psi - mu) / sigma1)
    };
    let mut acc = dens(0.0) * inner(0.0) + dens(hi) * inner(hi);
    for i in 1..steps {
        let x = i as f64 * h;
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * dens(x) * inner(x);
    }
    let p_m = 2.0 * acc * h / 3.0;
    Ok((p_fa, p_m.clamp(0.0, 1.0)))
}

/// Detection trade-off for the projection-forcing double-sided rule:
/// the H1 projection sits exactly at ±l, so
/// p_fa = 2Q(ψ/σ0) and p_m = Q[(−ψ−l)/σ_v̄] − Q[(ψ−l)/σ_v̄].
pub fn hir_roc(l: f64, sigma0: f64, sigma_vbar: f64, psi: f64) -> Result<(f64, f64)> {
    if l <= 0.0 || sigma0 <= 0.0 || sigma_vbar <= 0.0 || psi < 0.0 {
        return Err(Error::Domain("l, spreads positive; psi nonnegative".into()));
    }
    let p_fa = 2.0 * models::q(psi / sigma0);
    let p_m = (models::q((-psi - l) / sigma_vbar) - models::q((psi - l) / sigma_vbar))
        .clamp(0.0, 1.0);
    Ok((p_fa, p_m))
}

/// Lattice-scheme detection trade-off: truncated sums over quantizer
/// cells. H0 projections are spread √((σx²+σv²)/N) around 0 and accepted
/// within ψ of any centroid kΔ + Δ/2; H1 projections sit on a centroid
/// plus noise of spread √(σv²/N).
pub fn stdm_roc(
    delta_step: f64,
    sigma_x: f64,
    sigma_v: f64,
    n: usize,
    psi: f64,
) -> Result<(f64, f64)> {
    if delta_step <= 0.0 || sigma_x <= 0.0 || sigma_v < 0.0 || n == 0 {
        return Err(Error::Config("bad lattice ROC parameters".into()));
    }
    if !(0.0..=delta_step / 2.0).contains(&psi) {
        return Err(Error::Config(format!("psi must lie in [0, delta/2], got {psi}")));
    }
    let s0 = ((sigma_x * sigma_x + sigma_v * sigma_v) / n as f64).sqrt();
    let sv = (sigma_v * sigma_v / n as f64).sqrt();
    let term_fa = |k: f64| {
        let c = k * delta_step + delta_step / 2.0;
        models::q((c - psi) / s0) - models::q((c + psi) / s0)
    };
    let term_det = |k: f64| {
        let c = k * delta_step;
        if sv == 0.0 {
            if c.abs() < psi {
                1.0
            } else {
                0.0
            }
        } else {
            models::q((c - psi) / sv) - models::q((c + psi) / sv)
        }
    };
    let sum_sym = |f: &dyn Fn(f64) -> f64| {
        let mut acc = 0.0;
        for k in 0..1_000_000i64 {
            let t = f(k as f64) + if k > 0 { f(-k as f64) } else { 0.0 };
            acc += t;
            if t.abs() < 1e-12 && k > 2 {
                break;
            }
        }
        acc
    };
    let p_fa = sum_sym(&term_fa).clamp(0.0, 1.0);
    let p_det = if sv == 0.0 {
        if psi > 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        sum_sym(&term_det).clamp(0.0, 1.0)
    };
    Ok((p_fa, 1.0 - p_det))
}

/// Derived quantities for the interference-rejecting embedder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmssDiagnostics {
    /// Variance of the distribution factor η.
    pub eta_var: f64,
    /// Large-N distortion a²σ² + (λ²/γ²)σ²σ_η².
    pub dw_approx: f64,
    /// Exact distortion (available when γ equals the host shape).
    pub dw_exact: Option<f64>,
    /// False-alarm rate at which the miss rate crosses one half.
    pub crit_pfa: f64,
    /// Largest λ that still beats the plain multiplicative scheme.
    pub lambda_max: f64,
    /// Distortion-optimal rejecting strength.
    pub lambda_opt: f64,
    /// Cross-moment ratio [E|X|^{ξ+γ} − E|X|^ξ·E|X|^γ]/(ξγ·E|X|^ξ·E|X|^γ).
    pub mmt: f64,
    /// Set when γ differs from the host shape, where the η-variance uses a
    /// law-of-large-numbers approximation.
    pub approximate: bool,
}

/// Exact Gamma-ratio coefficient in the exact distortion form:
/// R = β^{2c} / [(N/c + 2/c)(N/c + 2/c + 1)], valid at γ = c.
fn emss_exact_r(c: f64, beta: f64, n: f64) -> f64 {
    beta.powf(2.0 * c) / ((n / c + 2.0 / c) * (n / c + 2.0 / c + 1.0))
}

pub fn emss_diagnostics(
    model: &HostModel,
    gamma_order: f64,
    xi: f64,
    lambda: f64,
    a: f64,
    n: usize,
    dwr_db: f64,
) -> Result<EmssDiagnostics> {
    let (c, sigma_x) = match *model {
        HostModel::Ggd { c, sigma_x } => (c, sigma_x),
        _ => {
            return Err(Error::Unsupported(
                "diagnostics defined for generalized-Gaussian hosts".into(),
            ))
        }
    };
    if gamma_order <= 0.0 || xi <= 0.0 {
        return Err(Error::Domain("orders must be positive".into()));
    }
    let nf = n as f64;
    let m_g = models::abs_moment(model, gamma_order)?;
    let v_g = models::abs_moment_var(model, gamma_order)?;
    let eta_var = v_g / (v_g + nf * m_g * m_g);
    let sx2 = sigma_x * sigma_x;
    let dw_approx = a * a * sx2 + lambda * lambda / (gamma_order * gamma_order) * sx2 * eta_var;
    let approximate = (gamma_order - c).abs() > 1e-12;
    let dw_exact = if approximate {
        None
    } else {
        let beta = HostModel::ggd_beta(c, sigma_x);
        let r = emss_exact_r(c, beta, nf);
        let m2 = sx2;
        let m_2g = models::abs_moment(model, 2.0 * gamma_order)?;
        let m_2pg = models::abs_moment(model, 2.0 + gamma_order)?;
        let m_2p2g = models::abs_moment(model, 2.0 + 2.0 * gamma_order)?;
        let f = nf * m_2p2g - 2.0 * nf * m_2pg * m_g + nf * (nf - 1.0) * m2 * m_2g
            - nf * (nf - 2.0) * m2 * m_g * m_g;
        Some(a * a * sx2 + lambda * lambda / (nf * gamma_order * gamma_order) * r * f)
    };
    let mvr_g = models::mvr(model, gamma_order)?;
    let mvr_xi = models::mvr(model, xi)?;
    let pow = 10f64.powf(-dwr_db / 10.0);
    let crit_arg = nf * pow - lambda * lambda / (mvr_g * mvr_g);
    let crit_pfa = if crit_arg <= 0.0 {
        0.5
    } else {
        models::q(mvr_xi * crit_arg.sqrt())
    };
    let lambda_max = 2.0 - 2.0 / (1.0 + pow * nf * mvr_g * mvr_g);
    let lambda_opt = pow * nf * mvr_g * mvr_g;
    let m_xi = models::abs_moment(model, xi)?;
    let m_xg = models::abs_moment(model, xi + gamma_order)?;
    let mmt = (m_xg - m_xi * m_g) / (xi * gamma_order * m_xi * m_g);
    Ok(EmssDiagnostics {
        eta_var,
        dw_approx,
        dw_exact,
        crit_pfa,
        lambda_max,
        lambda_opt,
        mmt,
        approximate,
    })
}

/// Mean embedding distortion of the projection-forcing double-sided rule:
/// l² + σx²/N − 2l√(2σx²/(πN)).
pub fn hir_distortion(l: f64, sigma_x: f64, n: usize) -> Result<f64> {
    if l <= 0.0 || sigma_x <= 0.0 || n == 0 {
        return Err(Error::Domain("l, sigma_x, N must be positive".into()));
    }
    let nf = n as f64;
    let sx2 = sigma_x * sigma_x;
    Ok(l * l + sx2 / nf - 2.0 * l * (2.0 * sx2 / (std::f64::consts::PI * nf)).sqrt())
}

/// Miss rate of the ξ-order correlator when the watermark sequence itself
/// is drawn at random per trial: the deflection uses ξE|X|^ξ/√E|X|^{2ξ}
/// in place of the fixed-sequence mean-variation ratio, and is therefore
/// strictly worse.
pub fn random_w_roc(model: &HostModel, xi: f64, a: f64, n: usize, p_fa: f64) -> Result<f64> {
    let r = models::amr(model, xi)?;
    let z = models::q_inv(p_fa)?;
    Ok(1.0 - models::q(z - a * (n as f64).sqrt() * r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Theory,
    Empirical,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Theory => write!(f, "theory"),
            Provenance::Empirical => write!(f, "empirical"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub p_fa: f64,
    pub p_m: f64,
}

/// Paired false-alarm/miss samples from theory or simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocTable {
    pub rows: Vec<RocPoint>,
    pub provenance: Provenance,
    /// Free-form echo of the configuration that produced the table.
    #[serde(default)]
    pub config: Option<serde_json::Value>,
}

impl RocTable {
    pub fn new(rows: Vec<RocPoint>, provenance: Provenance) -> Result<Self> {
        for pair in rows.windows(2) {
            if pair[1].p_fa <= pair[0].p_fa {
                return Err(Error::Domain("p_fa must be strictly increasing".into()));
            }
        }
        if rows
            .iter()
            .any(|r| !(0.0..=1.0).contains(&r.p_fa) || !(0.0..=1.0).contains(&r.p_m))
        {
            return Err(Error::Domain("probabilities must lie in [0,1]".into()));
        }
        Ok(Self {
            rows,
            provenance,
            config: None,
        })
    }

    pub fn to_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "p_fa,p_m,provenance")?;
        for r in &self.rows {
            writeln!(w, "{},{},{}", r.p_fa, r.p_m, self.provenance)?;
        }
        Ok(())
    }
}
