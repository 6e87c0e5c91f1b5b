//! Seeded Monte-Carlo experiment harness: verification (ROC) and decoding
//! (bit-error) runs, host selection from a pool by random permutation,
//! parameter sweeps, and deterministic per-trial seeding that is stable
//! under parallel execution.

use crate::channel::{self, AttackSpec};
use crate::detect::{self, Rule};
use crate::embed::{self, SchemeConfig, WatermarkSequence};
use crate::error::{Error, Result};
use crate::models::{self, HostModel};
use crate::theory::{Provenance, RocPoint, RocTable};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// SplitMix64 finalizer; mixes a master seed with per-point and per-trial
/// counters so every trial gets an independent, reproducible stream
/// regardless of scheduling order.
pub fn mix_seed(master: u64, point: u64, trial: u64) -> u64 {
    let mut z = master
        .wrapping_add(point.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(trial.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draw `n` hosts from a larger pool by a fresh random permutation
/// (partial Fisher-Yates). The pool must be strictly larger than `n` so
/// successive trials see genuinely different subsets.
pub fn permute_hosts<R: Rng + ?Sized>(pool: &[f64], n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 || n >= pool.len() {
        return Err(Error::Protocol(format!(
            "need 0 < n < pool size; got n={} pool={}",
            n,
            pool.len()
        )));
    }
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    for i in 0..n {
        let j = rng.random_range(i..idx.len());
        idx.swap(i, j);
    }
    Ok(idx[..n].iter().map(|&i| pool[i]).collect())
}

/// Detection/decoding statistic selection for the harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "detector", rename_all = "snake_case")]
pub enum DetectorSpec {
    Correlate,
    GenCorrelate { xi: f64 },
    OptDecodeAss { a: f64, xi: f64 },
    OptDetectAss { a: f64, xi: f64, use_mask: bool },
    OptDetectMss { a: f64, shape: f64 },
    OptDetectGauss { a: f64, sigma_x: f64, sigma_v: f64 },
    Cauchy { gamma_c: f64 },
    /// Lattice detection: the statistic is the distance from the projection
    /// to the nearest watermark centroid, accepted when *below* ψ.
    Stdm { delta_step: f64 },
}

impl DetectorSpec {
    /// True when acceptance means "statistic below threshold" (lattice
    /// distance) rather than above it.
    pub fn accept_below(&self) -> bool {
        matches!(self, DetectorSpec::Stdm { .. })
    }

    pub fn statistic(
        &self,
        y: &[f64],
        w: &WatermarkSequence,
        mask: Option<&[f64]>,
    ) -> Result<f64> {
        match *self {
            DetectorSpec::Correlate => detect::correlate(y, w),
            DetectorSpec::GenCorrelate { xi } => detect::generalized_correlate(y, w, xi),
            DetectorSpec::OptDecodeAss { a, xi } => detect::optimum_decode_ass(y, w, a, xi),
            DetectorSpec::OptDetectAss { a, xi, use_mask } => {
                detect::optimum_detect_ass(y, w, a, xi, if use_mask { mask } else { None })
            }
            DetectorSpec::OptDetectMss { a, shape } => detect::optimum_detect_mss(y, w, a, shape),
            DetectorSpec::OptDetectGauss { a, sigma_x, sigma_v } => {
                detect::optimum_detect_gaussian_attacked(y, w, a, sigma_x, sigma_v)
            }
            DetectorSpec::Cauchy { gamma_c } => detect::cauchy_statistic(y, w, gamma_c),
            DetectorSpec::Stdm { delta_step } => {
                let ybar = detect::correlate(y, w)?;
                Ok((ybar - embed::stdm_centroid(ybar, delta_step, None)).abs())
            }
        }
    }
}

/// Full description of one Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: HostModel,
    pub scheme: SchemeConfig,
    pub detector: DetectorSpec,
    /// Coefficients per trial.
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub attack: Option<AttackSpec>,
    /// Thresholds swept for verification experiments.
    #[serde(default)]
    pub thresholds: Vec<f64>,
    /// Single-sided (statistic > ψ) or double-sided (|statistic| > ψ)
    /// acceptance for verification.
    #[serde(default = "default_rule")]
    pub rule: Rule,
    /// Draw a fresh watermark sequence every trial instead of fixing one
    /// for the whole run.
    #[serde(default)]
    pub random_watermark: bool,
    /// Optional fixed host pool; trials then draw n-of-pool permutations
    /// instead of sampling the model.
    #[serde(default)]
    pub host_pool: Option<Vec<f64>>,
}

fn default_rule() -> Rule {
    Rule::Single
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.scheme.validate()?;
        if self.n == 0 || self.n % 2 != 0 {
            return Err(Error::Config("n must be positive and even".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if let Some(att) = &self.attack {
            att.validate()?;
            if matches!(att, AttackSpec::Jpeg { .. }) {
                return Err(Error::Config(
                    "JPEG attacks run on images, not coefficient experiments".into(),
                ));
            }
        }
        if let Some(pool) = &self.host_pool {
            if pool.len() <= self.n {
                return Err(Error::Protocol(
                    "host pool must be strictly larger than n".into(),
                ));
            }
        }
        Ok(())
    }
}

/// One verification threshold's empirical operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub psi: f64,
    pub p_fa: f64,
    pub p_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub trials: usize,
    pub points: Vec<ThresholdPoint>,
    pub h0_mean: f64,
    pub h0_std: f64,
    pub h1_mean: f64,
    pub h1_std: f64,
}

impl VerificationReport {
    /// Convert to a ROC table (rows sorted by p_fa, duplicate p_fa rows
    /// collapsed to the best p_m).
    pub fn roc(&self) -> Result<RocTable> {
        let mut rows: Vec<RocPoint> = self
            .points
            .iter()
            .map(|p| RocPoint {
                p_fa: p.p_fa,
                p_m: p.p_m,
            })
            .collect();
        rows.sort_by(|a, b| a.p_fa.total_cmp(&b.p_fa));
        rows.dedup_by(|b, a| {
            if a.p_fa == b.p_fa {
                a.p_m = a.p_m.min(b.p_m);
                true
            } else {
                false
            }
        });
        RocTable::new(rows, Provenance::Empirical)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodingReport {
    pub trials: usize,
    pub errors: usize,
    pub p_e: f64,
    /// Binomial standard error √(p̂(1−p̂)/T).
    pub std_err: f64,
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>> {
    match std::env::var("WMLAB_THREADS") {
        Ok(v) => {
            let n: usize = v
                .parse()
                .map_err(|_| Error::Config("WMLAB_THREADS must be a positive integer".into()))?;
            if n == 0 {
                return Err(Error::Config("WMLAB_THREADS must be positive".into()));
            }
            Ok(Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
            ))
        }
        Err(_) => Ok(None),
    }
}

fn run_parallel<T: Send, F: Fn(u64) -> Result<T> + Sync>(
    trials: usize,
    f: F,
) -> Result<Vec<T>> {
    let work = || (0..trials as u64).into_par_iter().map(&f).collect();
    match thread_pool()? {
        Some(pool) => pool.install(work),
        None => work(),
    }
}

fn trial_host(cfg: &ExperimentConfig, rng: &mut ChaCha12Rng) -> Result<Vec<f64>> {
    match &cfg.host_pool {
        Some(pool) => permute_hosts(pool, cfg.n, rng),
        None => models::sample_with(&cfg.model, cfg.n, rng),
    }
}

fn trial_watermark(cfg: &ExperimentConfig, rng: &mut ChaCha12Rng) -> Result<WatermarkSequence> {
    if cfg.random_watermark {
        let seed = rng.random::<u64>();
        embed::gen_watermark(seed, cfg.n)
    } else {
        // Fixed sequence for the whole run, derived from the master seed.
        embed::gen_watermark(mix_seed(cfg.seed, u64::MAX, 0), cfg.n)
    }
}

/// Verification experiment: per trial, compute the statistic on an
/// unwatermarked host (H0) and on a watermarked one (H1), both passed
/// through the attack channel if configured; then sweep every threshold
/// over the cached statistic samples.
pub fn run_verification(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    if cfg.thresholds.is_empty() {
        return Err(Error::Config("verification needs at least one threshold".into()));
    }
    let stats: Vec<(f64, f64)> = run_parallel(cfg.trials, |t| {
        let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(cfg.seed, 0, t));
        let w = trial_watermark(cfg, &mut rng)?;
        let x = trial_host(cfg, &mut rng)?;
        let s = embed::embed(&x, &w, &cfg.scheme)?;
        let mask = cfg.scheme.mask.as_deref();
        let (y0, y1) = match &cfg.attack {
            Some(att) => (
                channel::apply_noise(&x, att, &mut rng)?,
                channel::apply_noise(&s, att, &mut rng)?,
            ),
            None => (x.clone(), s),
        };
        Ok((
            cfg.detector.statistic(&y0, &w, mask)?,
            cfg.detector.statistic(&y1, &w, mask)?,
        ))
    })?;
    let tn = cfg.trials as f64;
    let (mut m0, mut m1) = (0.0, 0.0);
    for &(a, b) in &stats {
        m0 += a;
        m1 += b;
    }
    m0 /= tn;
    m1 /= tn;
    let (mut v0, mut v1) = (0.0, 0.0);
    for &(a, b) in &stats {
        v0 += (a - m0) * (a - m0);
        v1 += (b - m1) * (b - m1);
    }
    let accept = |stat: f64, psi: f64| -> bool {
        if cfg.detector.accept_below() {
            stat < psi
        } else {
            match cfg.rule {
                Rule::Single => stat > psi,
                Rule::Double => stat.abs() > psi,
                Rule::Sign => stat > 0.0,
            }
        }
    };
    let points = cfg
        .thresholds
        .iter()
        .map(|&psi| {
            let fa = stats.iter().filter(|&&(s0, _)| accept(s0, psi)).count();
            let miss = stats.iter().filter(|&&(_, s1)| !accept(s1, psi)).count();
            ThresholdPoint {
                psi,
                p_fa: fa as f64 / tn,
                p_m: miss as f64 / tn,
            }
        })
        .collect();
    Ok(VerificationReport {
        trials: cfg.trials,
        points,
        h0_mean: m0,
        h0_std: (v0 / tn).sqrt(),
        h1_mean: m1,
        h1_std: (v1 / tn).sqrt(),
    })
}

/// Decoding experiment: trials alternate the embedded bit between +1 and
/// −1; the bit is decoded from the statistic's sign and errors counted.
pub fn run_decoding(cfg: &ExperimentConfig) -> Result<DecodingReport> {
    cfg.validate()?;
    let errors: Vec<bool> = run_parallel(cfg.trials, |t| {
        let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(cfg.seed, 1, t));
        let w = trial_watermark(cfg, &mut rng)?;
        let x = trial_host(cfg, &mut rng)?;
        let bit = if t % 2 == 0 { 1.0 } else { -1.0 };
        let mut scheme = cfg.scheme.clone();
        scheme.b = bit;
        let s = embed::embed(&x, &w, &scheme)?;
        let y = match &cfg.attack {
            Some(att) => channel::apply_noise(&s, att, &mut rng)?,
            None => s,
        };
        let stat = cfg.detector.statistic(&y, &w, cfg.scheme.mask.as_deref())?;
        let decoded = if stat > 0.0 { 1.0 } else { -1.0 };
        Ok(decoded != bit)
    })?;
    let e = errors.iter().filter(|&&b| b).count();
    let p = e as f64 / cfg.trials as f64;
    Ok(DecodingReport {
        trials: cfg.trials,
        errors: e,
        p_e: p,
        std_err: (p * (1.0 - p) / cfg.trials as f64).sqrt(),
    })
}

/// Which scalar parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Strength,
    Lambda,
    XiOrder,
    GammaOrder,
    SigmaV,
    N,
}

fn apply_axis(cfg: &ExperimentConfig, axis: SweepAxis, v: f64) -> Result<ExperimentConfig> {
    let mut c = cfg.clone();
    match axis {
        SweepAxis::Strength => c.scheme.a = v,
        SweepAxis::Lambda => c.scheme.lambda = v,
        SweepAxis::XiOrder => {
            c.scheme.xi_order = v;
            if let DetectorSpec::GenCorrelate { xi } = &mut c.detector {
                *xi = v;
            }
            if let DetectorSpec::OptDecodeAss { xi, .. } = &mut c.detector {
                *xi = v;
            }
            if let DetectorSpec::OptDetectAss { xi, .. } = &mut c.detector {
                *xi = v;
            }
        }
        SweepAxis::GammaOrder => c.scheme.gamma_order = v,
        SweepAxis::SigmaV => match &mut c.attack {
            Some(AttackSpec::Gaussian { sigma_v })
            | Some(AttackSpec::Ggd { sigma_v, .. })
            | Some(AttackSpec::AbsGaussian { sigma_v }) => *sigma_v = v,
            _ => return Err(Error::Config("sigma_v sweep needs a noise attack".into())),
        },
        SweepAxis::N => {
            if v < 2.0 || v.fract() != 0.0 {
                return Err(Error::Config("N sweep values must be even integers".into()));
            }
            c.n = v as usize;
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint<T> {
    pub value: f64,
    pub report: T,
}

/// Sweep a decoding experiment along one axis. Each point gets its own
/// seed derivation so points are independent but reproducible.
pub fn sweep_decoding(
    cfg: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepPoint<DecodingReport>>> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut c = apply_axis(cfg, axis, v)?;
            c.seed = mix_seed(cfg.seed, 2 + i as u64, 0);
            Ok(SweepPoint {
                value: v,
                report: run_decoding(&c)?,
            })
        })
        .collect()
}

/// Sweep a verification experiment along one axis.
pub fn sweep_verification(
    cfg: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepPoint<VerificationReport>>> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut c = apply_axis(cfg, axis, v)?;
            c.seed = mix_seed(cfg.seed, 2 + i as u64, 0);
            Ok(SweepPoint {
                value: v,
                report: run_verification(&c)?,
            })
        })
        .collect()
}
