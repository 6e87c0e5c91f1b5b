use approx::{assert_abs_diff_eq, assert_relative_eq};
use wmlab::channel::{
    apply_noise_seeded, jpeg_attack, jpeg_quant_table, AttackSpec, JPEG_LUMA_Q,
};
use wmlab::percept::{psnr, GrayImage};

#[test]
fn gaussian_noise_has_requested_power_and_is_seeded() {
    let s = vec![0.0; 200_000];
    let spec = AttackSpec::Gaussian { sigma_v: 5.0 };
    let y = apply_noise_seeded(&s, &spec, 7).unwrap();
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    assert_abs_diff_eq!(mean, 0.0, epsilon = 0.05);
    assert_relative_eq!(var, 25.0, max_relative = 0.02);
    assert_eq!(y, apply_noise_seeded(&s, &spec, 7).unwrap());
    assert_ne!(y, apply_noise_seeded(&s, &spec, 8).unwrap());
}

#[test]
fn ggd_noise_matches_shape_moments() {
    let s = vec![0.0; 200_000];
    let spec = AttackSpec::Ggd {
        sigma_v: 2.0,
        shape: 1.0,
    };
    let y = apply_noise_seeded(&s, &spec, 11).unwrap();
    let n = y.len() as f64;
    let var = y.iter().map(|v| v * v).sum::<f64>() / n;
    let eabs = y.iter().map(|v| v.abs()).sum::<f64>() / n;
    assert_relative_eq!(var, 4.0, max_relative = 0.02);
    // Laplacian: E|V| = σ/√2.
    assert_relative_eq!(eabs, 2.0 / std::f64::consts::SQRT_2, max_relative = 0.01);
}

#[test]
fn rectified_noise_is_nonnegative_with_half_normal_mean() {
    let s = vec![0.0; 200_000];
    let spec = AttackSpec::AbsGaussian { sigma_v: 3.0 };
    let y = apply_noise_seeded(&s, &spec, 13).unwrap();
    assert!(y.iter().all(|&v| v >= 0.0));
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    assert_relative_eq!(
        mean,
        3.0 * (2.0 / std::f64::consts::PI).sqrt(),
        max_relative = 0.01
    );
}

#[test]
fn zero_noise_is_identity_and_validation_works() {
    let s = vec![1.0, -2.0, 3.5];
    let y = apply_noise_seeded(&s, &AttackSpec::Gaussian { sigma_v: 0.0 }, 0).unwrap();
    assert_eq!(y, s);
    assert!(AttackSpec::Gaussian { sigma_v: -1.0 }.validate().is_err());
    assert!(AttackSpec::Jpeg { quality: 0 }.validate().is_err());
    assert!(AttackSpec::Jpeg { quality: 101 }.validate().is_err());
    // JPEG on coefficient vectors is a config error.
    assert!(apply_noise_seeded(&s, &AttackSpec::Jpeg { quality: 50 }, 0).is_err());
}

#[test]
fn attack_spec_json() {
    let a: AttackSpec = serde_json::from_str(r#"{"attack":"gaussian","sigma_v":5.0}"#).unwrap();
    assert_eq!(a, AttackSpec::Gaussian { sigma_v: 5.0 });
    let j: AttackSpec = serde_json::from_str(r#"{"attack":"jpeg","quality":75}"#).unwrap();
    assert_eq!(j, AttackSpec::Jpeg { quality: 75 });
    assert!(serde_json::from_str::<AttackSpec>(r#"{"attack":"gaussian","sigma":1}"#).is_err());
}

#[test]
fn quality_scaled_tables() {
    // Q = 50 reproduces the base table exactly.
    let t50 = jpeg_quant_table(50).unwrap();
    for (a, &b) in t50.iter().zip(JPEG_LUMA_Q.iter()) {
        assert_eq!(*a, b);
    }
    // Q = 100 is all ones (maximum fidelity).
    assert!(jpeg_quant_table(100).unwrap().iter().all(|&v| v == 1));
    // Lower quality gives coarser steps everywhere.
    let t10 = jpeg_quant_table(10).unwrap();
    let t90 = jpeg_quant_table(90).unwrap();
    for i in 0..64 {
        assert!(t10[i] >= t50[i]);
        assert!(t90[i] <= t50[i]);
    }
}

fn test_image() -> GrayImage {
    let mut img = GrayImage::new(64, 64).unwrap();
    for y in 0..64 {
        for x in 0..64 {
            let v = 128.0
                + 60.0 * ((x as f64) * 0.18).sin() * ((y as f64) * 0.13).cos()
                + 20.0 * (((x + y) % 7) as f64 / 7.0 - 0.5);
            img.set(x, y, v.clamp(0.0, 255.0));
        }
    }
    img
}

#[test]
fn jpeg_attack_quality_monotone_in_psnr() {
    let img = test_image();
    let q95 = jpeg_attack(&img, 95).unwrap();
    let q50 = jpeg_attack(&img, 50).unwrap();
    let q10 = jpeg_attack(&img, 10).unwrap();
    let p95 = psnr(&img, &q95).unwrap();
    let p50 = psnr(&img, &q50).unwrap();
    let p10 = psnr(&img, &q10).unwrap();
    assert!(p95 > p50 && p50 > p10, "psnr {p95} {p50} {p10}");
    assert!(p95 > 35.0);
    assert!(p10 < 35.0);
    // Output stays in range.
    assert!(q10.pixels.iter().all(|&v| (0.0..=255.0).contains(&v)));
}

#[test]
fn jpeg_attack_flat_image_is_fixed_point() {
    // A flat block quantizes exactly: DC = 8·(v−128) survives any table
    // when (v−128)·8 is a multiple of the DC step... choose v = 128 so all
    // coefficients are zero.
    let mut img = GrayImage::new(16, 16).unwrap();
    for p in img.pixels.iter_mut() {
        *p = 128.0;
    }
    let out = jpeg_attack(&img, 10).unwrap();
    for (a, b) in out.pixels.iter().zip(&img.pixels) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
    }
    // Non-multiple-of-8 dimensions are rejected.
    let odd = GrayImage::new(20, 16).unwrap();
    assert!(jpeg_attack(&odd, 50).is_err());
}
