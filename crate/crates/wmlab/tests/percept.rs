use approx::{assert_abs_diff_eq, assert_relative_eq};
use wmlab::percept::{
    block_dct, block_idct, dct_to_image, extract_coeffs, image_to_dct, inject_coeffs,
    mask_for_coeffs, psnr, watson_mask, zigzag_order, GrayImage, MaskOptions, BLOCK,
    DCT_SENSITIVITY,
};

fn textured_image(w: usize, h: usize) -> GrayImage {
    let mut img = GrayImage::new(w, h).unwrap();
    for y in 0..h {
        for x in 0..w {
            let v = 120.0
                + 50.0 * ((x as f64) * 0.21).sin()
                + 35.0 * ((y as f64) * 0.17).cos()
                + 15.0 * (((x * y) % 11) as f64 / 11.0);
            img.set(x, y, v.clamp(0.0, 255.0));
        }
    }
    img
}

#[test]
fn dct_is_orthonormal() {
    // Round trip is exact and energy is preserved.
    let mut block = [0.0f64; 64];
    for (i, b) in block.iter_mut().enumerate() {
        *b = ((i as f64) * 0.7).sin() * 50.0 + 10.0;
    }
    let coeffs = block_dct(&block);
    let back = block_idct(&coeffs);
    let energy_in: f64 = block.iter().map(|v| v * v).sum();
    let energy_out: f64 = coeffs.iter().map(|v| v * v).sum();
    assert_relative_eq!(energy_in, energy_out, max_relative = 1e-12);
    for i in 0..64 {
        assert_abs_diff_eq!(back[i], block[i], epsilon = 1e-10);
    }
    // Flat block v concentrates in DC with value 8v — the same scaling as
    // the JPEG reference transform, so standard quantization tables apply.
    let flat = [3.0f64; 64];
    let c = block_dct(&flat);
    assert_abs_diff_eq!(c[0], 24.0, epsilon = 1e-12);
    assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn zigzag_order_spot_values() {
    let z = zigzag_order();
    assert_eq!(z[0], (0, 0));
    assert_eq!(z[1], (0, 1));
    assert_eq!(z[2], (1, 0));
    assert_eq!(z[3], (2, 0));
    assert_eq!(z[4], (1, 1));
    assert_eq!(z[5], (0, 2));
    assert_eq!(z[63], (7, 7));
    // A permutation of all 64 cells.
    let mut seen = [false; 64];
    for &(i, j) in z.iter() {
        assert!(!seen[i * 8 + j]);
        seen[i * 8 + j] = true;
    }
}

#[test]
fn extract_inject_roundtrip() {
    let img = textured_image(32, 24);
    let mut plane = image_to_dct(&img).unwrap();
    let coeffs = extract_coeffs(&plane, 1, 16).unwrap();
    assert_eq!(coeffs.len(), (32 / 8) * (24 / 8) * 16);
    let perturbed: Vec<f64> = coeffs.iter().map(|v| v + 0.5).collect();
    inject_coeffs(&mut plane, 1, 16, &perturbed).unwrap();
    let back = extract_coeffs(&plane, 1, 16).unwrap();
    for (a, b) in back.iter().zip(&perturbed) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }
    // The image reconstructs with the expected mean-square change:
    // orthonormality spreads the 0.5² per coefficient over the pixels.
    let out = dct_to_image(&plane).unwrap();
    let mse: f64 = out
        .pixels
        .iter()
        .zip(&img.pixels)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / out.pixels.len() as f64;
    assert_relative_eq!(mse, 0.25 * 16.0 / 64.0, max_relative = 1e-9);
    // DC extraction is refused.
    assert!(extract_coeffs(&plane, 0, 4).is_err());
    assert!(extract_coeffs(&plane, 60, 8).is_err());
}

#[test]
fn image_roundtrip_through_dct_plane() {
    let img = textured_image(16, 16);
    let plane = image_to_dct(&img).unwrap();
    let back = dct_to_image(&plane).unwrap();
    for (a, b) in back.pixels.iter().zip(&img.pixels) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
    }
}

#[test]
fn sensitivity_table_constants() {
    // Bit-exact spot checks of the 8×8 frequency sensitivities.
    assert_eq!(DCT_SENSITIVITY[0], 1.40);
    assert_eq!(DCT_SENSITIVITY[1], 1.01);
    assert_eq!(DCT_SENSITIVITY[9], 1.45);
    assert_eq!(DCT_SENSITIVITY[36], 6.15);
    assert_eq!(DCT_SENSITIVITY[63], 21.15);
    // Symmetric in (i, j).
    for i in 0..8 {
        for j in 0..8 {
            assert_eq!(DCT_SENSITIVITY[i * 8 + j], DCT_SENSITIVITY[j * 8 + i]);
        }
    }
}

#[test]
fn frequency_only_mask_equals_table() {
    let img = textured_image(32, 32);
    let plane = image_to_dct(&img).unwrap();
    let masks = watson_mask(
        &plane,
        MaskOptions {
            luminance: false,
            contrast: false,
        },
    )
    .unwrap();
    for m in &masks {
        for k in 0..64 {
            assert_eq!(m[k], DCT_SENSITIVITY[k]);
        }
    }
}

#[test]
fn luminance_masking_identity_and_scaling() {
    // A uniform image has every block DC equal to the mean DC, so the
    // luminance factor is exactly 1 everywhere.
    let mut img = GrayImage::new(16, 16).unwrap();
    for p in img.pixels.iter_mut() {
        *p = 97.0;
    }
    let plane = image_to_dct(&img).unwrap();
    let masks = watson_mask(
        &plane,
        MaskOptions {
            luminance: true,
            contrast: false,
        },
    )
    .unwrap();
    for m in &masks {
        for k in 0..64 {
            assert_relative_eq!(m[k], DCT_SENSITIVITY[k], max_relative = 1e-12);
        }
    }
    // Brighter blocks tolerate more: a two-tone image has a larger mask in
    // the brighter half.
    let mut two = GrayImage::new(16, 8).unwrap();
    for y in 0..8 {
        for x in 0..16 {
            two.set(x, y, if x < 8 { 200.0 } else { 50.0 });
        }
    }
    let plane = image_to_dct(&two).unwrap();
    let masks = watson_mask(
        &plane,
        MaskOptions {
            luminance: true,
            contrast: false,
        },
    )
    .unwrap();
    assert!(masks[0][9] > masks[1][9]);
    // The exponent 0.649 appears in the ratio.
    let expect = (200.0f64 / 125.0).powf(0.649) / (50.0f64 / 125.0).powf(0.649);
    assert_relative_eq!(masks[0][9] / masks[1][9], expect, max_relative = 1e-9);
}

#[test]
fn contrast_masking_raises_thresholds_on_busy_coefficients() {
    // Contrast masking only ever increases the mask, and strictly does so
    // when |coefficient| exceeds the base threshold.
    let img = textured_image(32, 32);
    let plane = image_to_dct(&img).unwrap();
    let without = watson_mask(
        &plane,
        MaskOptions {
            luminance: true,
            contrast: false,
        },
    )
    .unwrap();
    let with = watson_mask(&plane, MaskOptions::default()).unwrap();
    let mut strictly_raised = 0usize;
    for (b, (mw, mo)) in with.iter().zip(&without).enumerate() {
        for k in 1..64 {
            assert!(mw[k] >= mo[k] - 1e-12, "block {b} coeff {k}");
            if plane.blocks[b][k].abs() > mo[k] {
                let expect = plane.blocks[b][k].abs().powf(0.7) * mo[k].powf(0.3);
                assert_relative_eq!(mw[k], expect, max_relative = 1e-9);
                strictly_raised += 1;
            }
        }
    }
    assert!(strictly_raised > 0);
}

#[test]
fn mask_flattening_matches_extraction_order() {
    let img = textured_image(16, 16);
    let plane = image_to_dct(&img).unwrap();
    let masks = watson_mask(&plane, MaskOptions::default()).unwrap();
    let flat = mask_for_coeffs(&masks, 1, 4).unwrap();
    let z = zigzag_order();
    assert_eq!(flat.len(), masks.len() * 4);
    for (b, m) in masks.iter().enumerate() {
        for (t, &(i, j)) in z[1..5].iter().enumerate() {
            assert_eq!(flat[b * 4 + t], m[i * BLOCK + j]);
        }
    }
}

#[test]
fn pgm_roundtrip_and_psnr() {
    let img = textured_image(24, 16);
    let mut buf = Vec::new();
    img.write_pgm(&mut buf).unwrap();
    let back = GrayImage::read_pgm(std::io::BufReader::new(&buf[..])).unwrap();
    assert_eq!(back.width, 24);
    assert_eq!(back.height, 16);
    // Quantization to u8 costs less than half a gray level per pixel.
    for (a, b) in back.pixels.iter().zip(&img.pixels) {
        assert!((a - b).abs() <= 0.5 + 1e-12);
    }
    // Identical images give +∞; a known perturbation gives the closed form.
    assert!(psnr(&back, &back).unwrap().is_infinite());
    let mut noisy = back.clone();
    for p in noisy.pixels.iter_mut() {
        *p += 2.0;
    }
    assert_relative_eq!(
        psnr(&back, &noisy).unwrap(),
        10.0 * (255.0f64 * 255.0 / 4.0).log10(),
        max_relative = 1e-12
    );
    // Comments and whitespace in headers are tolerated.
    let hdr = b"P5 # comment\n24 16 # another\n255\n";
    let mut full = hdr.to_vec();
    full.extend(std::iter::repeat(7u8).take(24 * 16));
    let img2 = GrayImage::read_pgm(std::io::BufReader::new(&full[..])).unwrap();
    assert_eq!(img2.pixels[0], 7.0);
    // Bad magic rejected.
    assert!(GrayImage::read_pgm(std::io::BufReader::new(&b"P2 2 2 255\n"[..])).is_err());
}
