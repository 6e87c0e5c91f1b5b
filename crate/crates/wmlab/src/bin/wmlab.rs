//! Command-line front end: model estimation and sampling, embedding,
//! attacks, detection, Monte-Carlo simulation and sweeps, perceptual
//! masks, and PSNR. Exit codes: 0 ok, 2 configuration error, 3 protocol
//! error, 4 numeric non-convergence.

use clap::{Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use wmlab::channel::{self, AttackSpec};
use wmlab::detect::{self, Rule};
use wmlab::embed::{self, SchemeConfig};
use wmlab::error::{Error, Result};
use wmlab::harness::{self, DetectorSpec, ExperimentConfig, SweepAxis};
use wmlab::models::{self, HostModel, ModelKind, SampleBatch};
use wmlab::percept::{self, GrayImage, MaskOptions};

#[derive(Parser)]
#[command(name = "wmlab", version, about = "watermarking laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Ggd,
    Weibull,
    Cauchy,
}

impl From<KindArg> for ModelKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Ggd => ModelKind::Ggd,
            KindArg::Weibull => ModelKind::Weibull,
            KindArg::Cauchy => ModelKind::Cauchy,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Strength,
    Lambda,
    XiOrder,
    GammaOrder,
    SigmaV,
    N,
}

impl From<AxisArg> for SweepAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Strength => SweepAxis::Strength,
            AxisArg::Lambda => SweepAxis::Lambda,
            AxisArg::XiOrder => SweepAxis::XiOrder,
            AxisArg::GammaOrder => SweepAxis::GammaOrder,
            AxisArg::SigmaV => SweepAxis::SigmaV,
            AxisArg::N => SweepAxis::N,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit a host model to a sample file or PGM image, print model JSON.
    Estimate {
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// First zigzag coefficient (images only).
        #[arg(long, default_value_t = 1)]
        ac_lo: usize,
        /// Coefficients per block (images only).
        #[arg(long, default_value_t = 16)]
        ac_count: usize,
    },
    /// Draw seeded samples from a model JSON file.
    Sample {
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embed a watermark into a host sample file per a scheme JSON config.
    Embed {
        config: PathBuf,
        #[arg(long)]
        host: PathBuf,
        #[arg(long, default_value_t = 1)]
        wseed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply an attack (JSON spec) to a sample file or PGM image.
    Attack {
        spec: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one detection/decoding statistic over a signal file.
    Detect {
        /// JSON detector spec.
        config: PathBuf,
        #[arg(long)]
        signal: PathBuf,
        #[arg(long, default_value_t = 1)]
        wseed: u64,
        #[arg(long, default_value_t = 0.0)]
        psi: f64,
        #[arg(long, value_enum, default_value = "single")]
        rule: RuleArg,
    },
    /// Run a Monte-Carlo experiment described by a JSON file.
    Simulate {
        experiment: PathBuf,
        /// verify (ROC) or decode (bit error rate).
        #[arg(long, value_enum, default_value = "verify")]
        mode: ModeArg,
        /// Also write the empirical ROC as CSV (verify mode).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sweep one experiment parameter over a comma-separated grid.
    Sweep {
        experiment: PathBuf,
        #[arg(long, value_enum)]
        axis: AxisArg,
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
        #[arg(long, value_enum, default_value = "decode")]
        mode: ModeArg,
    },
    /// Compute the DCT-domain visibility mask of an image, as CSV rows
    /// (block, row, col, mask).
    Mask {
        image: PathBuf,
        #[arg(long)]
        no_luminance: bool,
        #[arg(long)]
        no_contrast: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract zigzag AC coefficients of an image as a sample file.
    Dct {
        image: PathBuf,
        #[arg(long, default_value_t = 1)]
        ac_lo: usize,
        #[arg(long, default_value_t = 16)]
        ac_count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Peak signal-to-noise ratio between two PGM images.
    Psnr { a: PathBuf, b: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Single,
    Double,
    Sign,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Verify,
    Decode,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path)?;
    serde_json::from_reader(BufReader::new(f))
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn read_samples_file(path: &Path) -> Result<Vec<f64>> {
    models::read_samples(BufReader::new(File::open(path)?))
}

fn write_samples_out(path: Option<&Path>, values: &[f64]) -> Result<()> {
    match path {
        Some(p) => models::write_samples(&mut BufWriter::new(File::create(p)?), values),
        None => models::write_samples(&mut std::io::stdout().lock(), values),
    }
}

fn read_image(path: &Path) -> Result<GrayImage> {
    GrayImage::read_pgm(BufReader::new(File::open(path)?))
}

fn image_coeffs(path: &Path, lo: usize, count: usize) -> Result<Vec<f64>> {
    let img = read_image(path)?;
    let plane = percept::image_to_dct(&img)?;
    percept::extract_coeffs(&plane, lo, count)
}

fn is_pgm(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Estimate {
            input,
            kind,
            ac_lo,
            ac_count,
        } => {
            let values = if is_pgm(&input) {
                image_coeffs(&input, ac_lo, ac_count)?
            } else {
                read_samples_file(&input)?
            };
            let batch = SampleBatch {
                values,
                seed: 0,
                model: None,
            };
            let model = models::estimate(&batch, kind.into())?;
            println!("{}", serde_json::to_string_pretty(&model).unwrap());
        }
        Cmd::Sample { model, n, seed, out } => {
            let m: HostModel = read_json(&model)?;
            let batch = models::sample(&m, n, seed)?;
            write_samples_out(out.as_deref(), &batch.values)?;
        }
        Cmd::Embed {
            config,
            host,
            wseed,
            out,
        } => {
            let cfg: SchemeConfig = read_json(&config)?;
            let x = read_samples_file(&host)?;
            let w = embed::gen_watermark(wseed, x.len())?;
            let s = embed::embed(&x, &w, &cfg)?;
            write_samples_out(out.as_deref(), &s)?;
        }
        Cmd::Attack {
            spec,
            input,
            seed,
            out,
        } => {
            let att: AttackSpec = read_json(&spec)?;
            if let AttackSpec::Jpeg { quality } = att {
                let img = read_image(&input)?;
                let attacked = channel::jpeg_attack(&img, quality)?;
                match out {
                    Some(p) => attacked.write_pgm(&mut BufWriter::new(File::create(p)?))?,
                    None => attacked.write_pgm(&mut std::io::stdout().lock())?,
                }
            } else {
                let s = read_samples_file(&input)?;
                let y = channel::apply_noise_seeded(&s, &att, seed)?;
                write_samples_out(out.as_deref(), &y)?;
            }
        }
        Cmd::Detect {
            config,
            signal,
            wseed,
            psi,
            rule,
        } => {
            let det: DetectorSpec = read_json(&config)?;
            let y = read_samples_file(&signal)?;
            let w = embed::gen_watermark(wseed, y.len())?;
            let stat = det.statistic(&y, &w, None)?;
            let rule = match rule {
                RuleArg::Single => Rule::Single,
                RuleArg::Double => Rule::Double,
                RuleArg::Sign => Rule::Sign,
            };
            let outcome = if det.accept_below() {
                detect::stdm_detect(
                    &y,
                    &w,
                    match det {
                        DetectorSpec::Stdm { delta_step } => delta_step,
                        _ => unreachable!(),
                    },
                    psi,
                )?
            } else {
                detect::decide(stat, psi, rule)
            };
            println!("{}", serde_json::to_string_pretty(&outcome).unwrap());
        }
        Cmd::Simulate {
            experiment,
            mode,
            csv,
        } => {
            let cfg: ExperimentConfig = read_json(&experiment)?;
            match mode {
                ModeArg::Verify => {
                    let report = harness::run_verification(&cfg)?;
                    if let Some(p) = csv {
                        report.roc()?.to_csv(&mut BufWriter::new(File::create(p)?))?;
                    }
                    println!("{}", serde_json::to_string_pretty(&report).unwrap());
                }
                ModeArg::Decode => {
                    let report = harness::run_decoding(&cfg)?;
                    println!("{}", serde_json::to_string_pretty(&report).unwrap());
                }
            }
        }
        Cmd::Sweep {
            experiment,
            axis,
            grid,
            mode,
        } => {
            if grid.is_empty() {
                return Err(Error::Config("sweep grid is empty".into()));
            }
            let cfg: ExperimentConfig = read_json(&experiment)?;
            match mode {
                ModeArg::Decode => {
                    let pts = harness::sweep_decoding(&cfg, axis.into(), &grid)?;
                    println!("{}", serde_json::to_string_pretty(&pts).unwrap());
                }
                ModeArg::Verify => {
                    let pts = harness::sweep_verification(&cfg, axis.into(), &grid)?;
                    println!("{}", serde_json::to_string_pretty(&pts).unwrap());
                }
            }
        }
        Cmd::Mask {
            image,
            no_luminance,
            no_contrast,
            out,
        } => {
            let img = read_image(&image)?;
            let plane = percept::image_to_dct(&img)?;
            let masks = percept::watson_mask(
                &plane,
                MaskOptions {
                    luminance: !no_luminance,
                    contrast: !no_contrast,
                },
            )?;
            let mut sink: Box<dyn Write> = match out {
                Some(p) => Box::new(BufWriter::new(File::create(p)?)),
                None => Box::new(std::io::stdout().lock()),
            };
            writeln!(sink, "block,row,col,mask")?;
            for (k, m) in masks.iter().enumerate() {
                for i in 0..8 {
                    for j in 0..8 {
                        writeln!(sink, "{k},{i},{j},{}", m[i * 8 + j])?;
                    }
                }
            }
        }
        Cmd::Dct {
            image,
            ac_lo,
            ac_count,
            out,
        } => {
            let coeffs = image_coeffs(&image, ac_lo, ac_count)?;
            write_samples_out(out.as_deref(), &coeffs)?;
        }
        Cmd::Psnr { a, b } => {
            let v = percept::psnr(&read_image(&a)?, &read_image(&b)?)?;
            if v.is_infinite() {
                println!("inf");
            } else {
                println!("{v}");
            }
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
