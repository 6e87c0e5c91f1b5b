use approx::{assert_abs_diff_eq, assert_relative_eq};
use wmlab::detect::{
    cauchy_statistic, correlate, decide, generalized_correlate, optimum_decode_ass,
    optimum_detect_ass, optimum_detect_gaussian_attacked, optimum_detect_mss, stdm_detect, Rule,
    Verdict,
};
use wmlab::embed::{self, gen_watermark, Scheme, SchemeConfig, WatermarkSequence};

#[test]
fn correlators_on_tiny_vectors() {
    let w = WatermarkSequence::new(vec![1.0, -1.0, 1.0, -1.0]).unwrap();
    let s = vec![2.0, 1.0, -3.0, 0.5];
    // (2 − 1 − 3 − 0.5)/4
    assert_abs_diff_eq!(correlate(&s, &w).unwrap(), -0.625, epsilon = 1e-12);
    // ξ = 2: (4 − 1 + 9 − 0.25)/4
    assert_abs_diff_eq!(
        generalized_correlate(&s, &w, 2.0).unwrap(),
        2.9375,
        epsilon = 1e-12
    );
    // ξ = 1 uses |s|.
    assert_abs_diff_eq!(
        generalized_correlate(&s, &w, 1.0).unwrap(),
        (2.0 - 1.0 + 3.0 - 0.5) / 4.0,
        epsilon = 1e-12
    );
    assert!(correlate(&s[..2], &w).is_err());
}

#[test]
fn additive_decode_statistic_recovers_clean_bits() {
    let n = 100;
    let w = gen_watermark(3, n).unwrap();
    let x = vec![0.0; n];
    for bit in [1.0, -1.0] {
        let cfg = SchemeConfig::new(Scheme::Ass, 0.5).with_bit(bit);
        let s = embed::embed(&x, &w, &cfg).unwrap();
        let stat = optimum_decode_ass(&s, &w, 0.5, 1.0).unwrap();
        assert_eq!(stat.signum(), bit);
        let outcome = decide(stat, 0.0, Rule::Sign);
        assert_eq!(
            outcome.verdict,
            if bit > 0.0 { Verdict::Plus } else { Verdict::Minus }
        );
    }
}

#[test]
fn additive_detect_statistic_positive_when_marked() {
    let n = 200;
    let w = gen_watermark(5, n).unwrap();
    let x: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.61).sin() * 3.0).collect();
    let s = embed::embed(&x, &w, &SchemeConfig::new(Scheme::Ass, 1.0)).unwrap();
    let on = optimum_detect_ass(&s, &w, 1.0, 1.0, None).unwrap();
    let off = optimum_detect_ass(&x, &w, 1.0, 1.0, None).unwrap();
    assert!(on > off);
    assert!(on > 0.0);
    // With the exact watermark removed the statistic is symmetric around a
    // negative mean under H0.
    assert!(off < on);
}

#[test]
fn masked_detect_statistic_uses_the_mask() {
    let w = WatermarkSequence::new(vec![1.0, -1.0, 1.0, -1.0]).unwrap();
    let s = vec![3.0, -2.0, 1.0, -4.0];
    let mask = vec![2.0, 2.0, 2.0, 2.0];
    let plain = optimum_detect_ass(&s, &w, 0.5, 1.0, None).unwrap();
    let masked = optimum_detect_ass(&s, &w, 0.5, 1.0, Some(&mask)).unwrap();
    // Doubling the mask is the same as doubling a.
    let doubled = optimum_detect_ass(&s, &w, 1.0, 1.0, None).unwrap();
    assert_abs_diff_eq!(masked, doubled, epsilon = 1e-12);
    assert!((masked - plain).abs() > 0.0);
    assert!(optimum_detect_ass(&s, &w, 0.5, 1.0, Some(&mask[..2])).is_err());
}

#[test]
fn multiplicative_detect_statistic_matches_hand_expansion() {
    let w = WatermarkSequence::new(vec![1.0, -1.0]).unwrap();
    let s = vec![2.0, 3.0];
    let (a, c): (f64, f64) = (0.2, 1.3);
    let k_plus = 1.0 - (1.0 + a).powf(-c);
    let k_minus = 1.0 - (1.0 - a).powf(-c);
    let expect = (2.0f64.powf(c) * k_plus + 3.0f64.powf(c) * k_minus) / 2.0;
    assert_relative_eq!(
        optimum_detect_mss(&s, &w, a, c).unwrap(),
        expect,
        max_relative = 1e-12
    );
    assert!(optimum_detect_mss(&s, &w, 1.0, c).is_err());
}

#[test]
fn gaussian_attacked_statistic_matches_hand_expansion() {
    let w = WatermarkSequence::new(vec![1.0, -1.0]).unwrap();
    let y = vec![4.0, -1.0];
    let (a, sx, sv) = (0.3, 2.0, 1.0);
    let d0 = sx * sx + sv * sv;
    let dp = sx * sx * 1.3 * 1.3 + sv * sv;
    let dm = sx * sx * 0.7 * 0.7 + sv * sv;
    let expect = ((16.0 / d0 - 16.0 / dp) + (1.0 / d0 - 1.0 / dm)) / 2.0;
    assert_relative_eq!(
        optimum_detect_gaussian_attacked(&y, &w, a, sx, sv).unwrap(),
        expect,
        max_relative = 1e-12
    );
    assert!(optimum_detect_gaussian_attacked(&y, &w, a, 0.0, sv).is_err());
}

#[test]
fn cauchy_statistic_is_bounded_and_odd_in_s() {
    let w = WatermarkSequence::new(vec![1.0, -1.0]).unwrap();
    let s = vec![5.0, -2.0];
    let g = 1.5;
    let v = cauchy_statistic(&s, &w, g).unwrap();
    let neg: Vec<f64> = s.iter().map(|x| -x).collect();
    assert_abs_diff_eq!(cauchy_statistic(&neg, &w, g).unwrap(), -v, epsilon = 1e-12);
    // Per-term magnitude bound 1/(2γ).
    assert!(v.abs() <= 1.0 / (2.0 * g));
    assert!(cauchy_statistic(&s, &w, 0.0).is_err());
}

#[test]
fn decision_rules() {
    assert_eq!(decide(0.4, 0.3, Rule::Single).verdict, Verdict::H1);
    assert_eq!(decide(0.2, 0.3, Rule::Single).verdict, Verdict::H0);
    assert_eq!(decide(-0.4, 0.3, Rule::Double).verdict, Verdict::H1);
    assert_eq!(decide(-0.4, 0.3, Rule::Single).verdict, Verdict::H0);
    assert_eq!(decide(-0.01, 0.0, Rule::Sign).verdict, Verdict::Minus);
}

#[test]
fn stdm_detection_accepts_marked_rejects_threshold_abuse() {
    let n = 64;
    let w = gen_watermark(9, n).unwrap();
    let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.23).cos() * 4.0).collect();
    let mut cfg = SchemeConfig::new(Scheme::Stdm, 0.0);
    cfg.delta_step = 2.0;
    let s = embed::embed(&x, &w, &cfg).unwrap();
    let out = stdm_detect(&s, &w, 2.0, 0.4).unwrap();
    assert_eq!(out.verdict, Verdict::H1);
    assert_abs_diff_eq!(out.statistic, 0.0, epsilon = 1e-9);
    // ψ outside [0, Δ/2] is rejected.
    assert!(stdm_detect(&s, &w, 2.0, 1.1).is_err());
    assert!(stdm_detect(&s, &w, 2.0, -0.1).is_err());
}
