use super::*;
use std::f64::consts::E;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

#[test]
fn vc_upper_scalar_base_case() {
    let v = vc_upper_scalar(1, 1, 1, 0).unwrap();
    assert!(close(v, 14.0 * (8.0 * E * 9.0 * 8.0).log2(), 1e-14));
}

#[test]
fn vc_upper_scalar_increasing_in_k() {
    let mut prev = 0.0;
    for k in 1..200 {
        let v = vc_upper_scalar(3, 2, k, 1).unwrap();
        assert!(v > prev);
        prev = v;
    }
}

#[test]
fn vc_upper_scalar_large_inputs_stay_finite() {
    assert!(vc_upper_scalar(64, 4, 1_000_000, 3).unwrap().is_finite());
    assert!(vc_upper_scalar(0, 1, 1, 0).is_err());
}

#[test]
fn vc_lower_examples() {
    assert_eq!(vc_lower(2, 8, Rounding::Floor).unwrap(), 4);
    assert_eq!(vc_lower(1, 1, Rounding::Floor).unwrap(), 1);
    for k in 1..20 {
        assert_eq!(vc_lower(k, k, Rounding::Floor).unwrap(), k);
        assert_eq!(vc_lower(k, k, Rounding::Ceil).unwrap(), k);
    }
    // ⌊9/2⌋ = 4 → floor and ceil agree; ⌊10/2⌋ = 5 → they differ
    assert_eq!(vc_lower(2, 10, Rounding::Floor).unwrap(), 4);
    assert_eq!(vc_lower(2, 10, Rounding::Ceil).unwrap(), 6);
    assert!(vc_upper_scalar(2, 1, 8, 0).unwrap() >= 4.0);
}

#[test]
fn vector_bound_monotone_in_p() {
    let mut prev = 0.0;
    for p in 1..=6 {
        let v = vc_upper_vector(2, 1, p, 5, 1).unwrap();
        assert!(v >= prev);
        prev = v;
    }
    for n in 1..=4 {
        for k in 1..=8 {
            assert!(vc_upper_vector(n, 1, 1, k, 0).unwrap() >= vc_upper_scalar(n, 1, k, 0).unwrap());
        }
    }
    assert!(vc_upper_vector(1, 1, 100, 1, 0).unwrap().is_finite());
}

#[test]
fn pd_minus_vc_is_factor() {
    for n in 1..=5 {
        for m in 1..=3 {
            for k in [1, 4, 30] {
                let diff = pd_upper(n, m, k, 2).unwrap() - vc_upper_scalar(n, m, k, 2).unwrap();
                let factor = 2.0 * (2.0 * (m * n * n) as f64 + 4.0 * n as f64 + 1.0);
                assert!(close(diff, factor, 1e-12), "n={n} m={m} k={k}: {diff} vs {factor}");
            }
        }
    }
    assert!(close(
        pd_upper(1, 1, 1, 0).unwrap(),
        14.0 * (16.0 * E * 72.0).log2(),
        1e-14
    ));
    assert!(pd_upper(2, 1, 3, 2).unwrap() > pd_upper(2, 1, 3, 1).unwrap());
}

#[test]
fn fat_lipschitz_examples() {
    assert_eq!(fat_lipschitz(3, 1.0, 8.0, 1.0, Ball::OpenInf).unwrap().value, 9.0);
    let zero = fat_lipschitz(1, 1.0, 1.0, 2.0, Ball::OpenInf).unwrap();
    assert_eq!(zero.value, 0.0);
    assert_eq!(zero.notes.len(), 1);
    for c in [0.5, 1.0, 3.0] {
        for l in [0.7, 2.0, 13.0] {
            for g in [0.01, 0.3, 1.0, 5.0] {
                let open = fat_lipschitz(2, c, l, g, Ball::OpenInf).unwrap().value;
                let closed = fat_lipschitz(2, c, l, g, Ball::ClosedInf).unwrap().value;
                assert!(closed >= open);
            }
        }
    }
}

#[test]
fn fat_control_examples() {
    let f = fat_control(1, 1, 1.0, 1.0, E, Rounding::Floor).unwrap().value;
    let c = fat_control(1, 1, 1.0, 1.0, E, Rounding::Ceil).unwrap().value;
    assert_eq!(f, 0.0);
    assert_eq!(c, 0.0);
    let mut prev = f64::INFINITY;
    let mut gamma = 1e-4;
    for _ in 0..30 {
        let v = fat_control(3, 2, 1.5, 2.0, gamma, Rounding::Ceil).unwrap().value;
        assert!(v <= prev);
        prev = v;
        gamma *= 2.0;
    }
    let below = fat_control(1, 1, 1.0, 0.1, 1.0, Rounding::Floor).unwrap();
    assert_eq!(below.value, 0.0);
    assert!(!below.notes.is_empty());
    assert!(fat_control(1, 1, 0.5, 1.0, 1.0, Rounding::Ceil).is_err());
}

#[test]
fn fat_control_matches_lipschitz_form() {
    for n in 1..=3 {
        for m in 1..=2 {
            for tau in [1.0, 1.7, 3.0] {
                for gamma in [0.01, 0.5, 2.0, 40.0] {
                    let l = fat_control_lipschitz_constant(n, m, tau, 1.3);
                    let k = n * (m + 1);
                    let ctrl = fat_control(n, m, tau, 1.3, gamma, Rounding::Floor).unwrap().value;
                    let lip = fat_lipschitz(k, 1.0, l, gamma, Ball::OpenInf).unwrap().value;
                    assert_eq!(ctrl.to_bits(), lip.to_bits());
                    let ceil = fat_control(n, m, tau, 1.3, gamma, Rounding::Ceil).unwrap().value;
                    let closed = fat_lipschitz(k, 1.0, l, gamma, Ball::ClosedInf).unwrap().value;
                    assert!(ceil <= closed);
                }
            }
        }
    }
}

#[test]
fn fat_control_overflow_falls_back_to_logs() {
    let v = fat_control(64, 4, 800.0, 1.0, 1e-3, Rounding::Ceil).unwrap().value;
    assert!(v.is_finite() && v > 0.0);
}

#[test]
fn fat_combined_min_and_branches() {
    let gammas: Vec<f64> = (0..50).map(|i| 10f64.powf(1.0 - 0.3 * i as f64)).collect();
    let mut prev = 0.0;
    for &g in &gammas {
        let r = fat_combined(2, 1, 16, 1, 1.0, 1.0, g, Rounding::Ceil).unwrap();
        assert!(r.value >= prev);
        prev = r.value;
    }
    let tiny = fat_combined(2, 1, 4, 0, 1.0, 1.0, 1e-300, Rounding::Ceil).unwrap();
    assert!(tiny.notes.iter().any(|s| s.contains("second")));
    let big = fat_combined(2, 1, 4, 0, 1.0, 1.0, 10.0, Rounding::Ceil).unwrap();
    assert!(big.notes.iter().any(|s| s.contains("first")));
    let g = combined_gamma(None, Some(0.05), Some(0.5)).unwrap();
    assert!(close(g, 0.1, 1e-15));
    assert!(combined_gamma(None, Some(0.3), Some(0.5)).is_err());
    assert!(combined_gamma(None, None, Some(0.5)).is_err());
}

#[test]
fn fat_hyperplane_examples() {
    assert_eq!(fat_hyperplane(1.0, 3.0, 10).unwrap(), 2.0);
    assert_eq!(fat_hyperplane(1.0, 1.0, 5).unwrap(), 7.0);
    assert_eq!(fat_hyperplane(1.0, 1e-9, 5).unwrap(), 7.0);
}

#[test]
fn concept_sample_complexity() {
    let v = sample_complexity_concept(10.0, 0.1, 0.05).unwrap();
    let expect = (800.0 * (80.0 * E).log2()).max(40.0 * 40f64.log2());
    assert!(close(v, expect, 1e-14));
    let a = sample_complexity_concept(20.0, 0.1, 0.05).unwrap();
    assert!(close(a, 2.0 * v, 1e-14));
    assert!(sample_complexity_concept(0.5, 0.1, 0.1).is_err());
}

#[test]
fn concept_inversion_round_trips() {
    for &s in &[50.0, 1e3, 1e5, 1e7] {
        let eps = invert_sample_complexity_concept(12.0, 0.05, s).unwrap();
        if eps < 1.0 {
            let back = sample_complexity_concept(12.0, eps, 0.05).unwrap();
            assert!(close(back, s, 1e-9), "{back} vs {s}");
        }
    }
    let a = invert_sample_complexity_concept(12.0, 0.05, 1e3).unwrap();
    let b = invert_sample_complexity_concept(12.0, 0.05, 1e4).unwrap();
    assert!(b < a);
    assert_eq!(invert_sample_complexity_concept(12.0, 0.05, 1e-3).unwrap(), 8.0 * E);
}

#[test]
fn agnostic_sample_complexity() {
    let mut prev = f64::INFINITY;
    for i in 1..99 {
        let alpha = i as f64 / 100.0;
        let v = sample_complexity_agnostic(5.0, alpha, 0.1).unwrap().value;
        assert!(v < prev);
        prev = v;
    }
    let (a, d1, d2) = (0.2, 0.1, 0.01);
    let v1 = sample_complexity_agnostic(3.0, a, d1).unwrap().value;
    let v2 = sample_complexity_agnostic(3.0, a, d2).unwrap().value;
    // the δ term is tiny next to the rest, so compare at the scale of the values
    assert!(((v1 - v2) - 4.0 / (a * a) * (d2 / d1).ln()).abs() <= 1e-13 * v1);
    let only_delta = sample_complexity_agnostic(0.0, a, d1).unwrap().value;
    assert!(close(only_delta, 4.0 / (a * a) * (8.0 / d1).ln(), 1e-14));
}

#[test]
fn gj_and_sign_patterns() {
    assert!(close(gj_bound(6, 12, 8).unwrap(), 12.0 * (768.0 * E).log2(), 1e-14));
    assert!(close(
        gj_bound(12, 12, 8).unwrap(),
        2.0 * gj_bound(6, 12, 8).unwrap(),
        1e-14
    ));
    assert!(close(gj_bound(1, 1, 1).unwrap(), 2.0 * (8.0 * E).log2(), 1e-14));
    assert!(close(sign_pattern_count(1, 1, 1).unwrap(), 8.0 * E, 1e-14));
    for n in 1..=4u64 {
        for k in 1..=4u64 {
            let v = sign_pattern_count(2 * n, 2, 2 * n * k).unwrap();
            let expect = (16.0 * E * k as f64).powf(2.0 * n as f64);
            assert!(close(v, expect, 1e-12));
        }
    }
    assert!(sign_pattern_count(3, 1, 2).is_err());
    assert!(sign_pattern_count(2, 3, 5).unwrap() > sign_pattern_count(2, 2, 5).unwrap());
}

#[test]
fn small_integer_formulas() {
    assert_eq!(dual_vc_lower(1).unwrap(), 0);
    assert_eq!(dual_vc_lower(8).unwrap(), 3);
    assert_eq!(dual_vc_lower(9).unwrap(), 3);
    assert_eq!(axis_shatter_bound(&[4, 4]).unwrap(), 4);
    assert_eq!(axis_shatter_bound(&[1, 1, 1]).unwrap(), 0);
    assert_eq!(axis_shatter_bound(&[3, 5]).unwrap(), 3);
    assert!(axis_shatter_bound(&[0]).is_err());
    assert_eq!(dmax_rat(1, 0).unwrap(), 4);
    assert_eq!(dmax_rat(2, 3).unwrap(), 20);
}

#[test]
fn dmax_feeds_degree_slot() {
    for n in 1..=4u64 {
        for l in 0..=3u64 {
            for k in 1..=5u64 {
                let m = 2u64;
                assert_eq!(8 * m * n * n * k * (n + l), 2 * m * n * n * k * dmax_rat(n, l).unwrap());
            }
        }
    }
}

#[test]
fn rat_abstract_properties() {
    assert!(rat_vc_abstract(1, 1, 1, 1, 4).unwrap().is_finite());
    assert!(rat_vc_abstract(2, 1, 3, 3, 8).unwrap() > rat_vc_abstract(2, 1, 3, 2, 8).unwrap());
    for n in 1..=6 {
        for k in [1, 2, 8, 64] {
            for l in 0..=3 {
                let abs = rat_vc_abstract(n, 1, k, 2, dmax_rat(n, l).unwrap()).unwrap();
                assert!(abs >= vc_upper_scalar(n, 1, k, l).unwrap(), "n={n} k={k} l={l}");
            }
        }
    }
}

#[test]
fn report_echoes_inputs() {
    let dims = ProblemDims {
        gj_ell: Some(6),
        gj_d: Some(12),
        gj_s: Some(8),
        n: Some(3),
        ..Default::default()
    };
    let r = evaluate(FormulaId::GjBound, &dims).unwrap();
    assert_eq!(r.inputs.gj_ell, Some(6));
    assert_eq!(r.inputs.gj_d, Some(12));
    assert_eq!(r.inputs.gj_s, Some(8));
    assert_eq!(r.inputs.n, None);
    assert_eq!(r.ceil_value, r.value.ceil());
    assert_eq!(r.csv_fields().len(), CSV_HEADER.len());
    assert!(matches!(
        evaluate(FormulaId::VcUpperScalar, &dims),
        Err(BoundsError::Missing(_))
    ));
}

#[test]
fn formula_names_round_trip() {
    for id in FormulaId::ALL {
        assert_eq!(id.as_str().parse::<FormulaId>().unwrap(), id);
        let json = serde_json::to_string(&id).unwrap();
        assert_eq!(json, format!("\"{}\"", id.as_str()));
    }
    assert!("nope".parse::<FormulaId>().is_err());
}

#[test]
fn real_formatting_has_17_digits() {
    assert_eq!(report::fmt_real(1.0), "1.0000000000000000e0");
    assert_eq!(report::fmt_real(0.1), "1.0000000000000001e-1");
}
