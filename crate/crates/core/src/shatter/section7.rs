//! Indicator controls shattered by a single undamped oscillator.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use super::{DichotomyPattern, PointSet, ShatterReport, Witness};
use crate::error::ShatterError;
use crate::response::sign_observe;

/// Largest `k` for which every output clears the magnitude guard in double precision.
pub const SECTION7_MAX_K: usize = 8;
/// Default multiple of machine epsilon in the magnitude guard.
pub const SECTION7_DEFAULT_GUARD: f64 = 1e3;

/// The control `ω_i` with `ω_i(1 − t) = 1` on `[2^{-i}, 2^{-i} + 2^{α}]`, `α = −2(k+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndicatorControl {
    index: usize,
    k_total: usize,
}

impl IndicatorControl {
    pub fn new(index: usize, k_total: usize) -> Result<Self, ShatterError> {
        if index == 0 || index > k_total {
            return Err(ShatterError::Invalid(format!(
                "indicator index must lie in 1..={k_total}, got {index}"
            )));
        }
        if k_total > 500 {
            return Err(ShatterError::Invalid(format!(
                "k = {k_total} underflows the interval width"
            )));
        }
        Ok(Self { index, k_total })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn k_total(&self) -> usize {
        self.k_total
    }

    pub fn alpha(&self) -> i32 {
        -2 * (self.k_total as i32 + 1)
    }

    /// `(2^{-i}, 2^{-i} + 2^{α})`, in the reversed time variable.
    pub fn interval(&self) -> (f64, f64) {
        let lo = 2f64.powi(-(self.index as i32));
        (lo, lo + 2f64.powi(self.alpha()))
    }
}

/// `λ_J = π Σ_{i∈J} 2^i` for a set of 1-based indices.
pub fn section7_lambda(subset: &[usize]) -> f64 {
    PI * subset.iter().map(|&i| 2f64.powi(i as i32)).sum::<f64>()
}

/// `∫_a^b sin(λt) dt` over the control interval, as `(2/λ) sin(λ(a+b)/2) sin(λ(b−a)/2)`.
pub fn section7_output(ctrl: &IndicatorControl, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let (a, b) = ctrl.interval();
    2.0 / lambda * (lambda * (a + b) / 2.0).sin() * (lambda * (b - a) / 2.0).sin()
}

/// Magnitude below which [`section7_output`] is treated as indeterminate.
pub fn section7_guard(ctrl: &IndicatorControl, lambda: f64, scale: f64) -> f64 {
    let (a, b) = ctrl.interval();
    scale * f64::EPSILON * lambda * (b - a)
}

/// Final output of `ẍ = −λ²x + u, y = −x` from rest under `ω_i`:
/// `−(1/λ)∫_a^b sin(λt) dt`, with the `λ → 0` limit `−(b² − a²)/2`.
pub fn section7_system_output(ctrl: &IndicatorControl, lambda: f64) -> f64 {
    if lambda == 0.0 {
        let (a, b) = ctrl.interval();
        return -(b - a) * (b + a) / 2.0;
    }
    -section7_output(ctrl, lambda) / lambda
}

fn subset_of(mask: u64, k: usize) -> Vec<usize> {
    (1..=k).filter(|i| mask >> (i - 1) & 1 == 1).collect()
}

fn subset_label(subset: &[usize]) -> String {
    let items: Vec<String> = subset.iter().map(usize::to_string).collect();
    format!("J={{{}}}", items.join(","))
}

/// Enumerates all `2^k` subsets `J`, labels controls `ω_1..ω_k` by the sign of
/// the oscillator output at `λ_J`, and checks that `J ↦ pattern` is a bijection.
pub fn verify_section7(k: usize, guard_scale: f64) -> Result<ShatterReport, ShatterError> {
    if k == 0 {
        return Err(ShatterError::Invalid("k must be at least 1".into()));
    }
    if k > SECTION7_MAX_K {
        return Err(ShatterError::PrecisionLimit {
            k,
            limit: SECTION7_MAX_K,
        });
    }
    if !(guard_scale.is_finite() && guard_scale >= 0.0) {
        return Err(ShatterError::Invalid(format!(
            "guard scale must be nonnegative, got {guard_scale}"
        )));
    }
    let controls: Vec<IndicatorControl> = (1..=k).map(|i| IndicatorControl::new(i, k)).collect::<Result<_, _>>()?;

    let mut patterns = BTreeSet::new();
    let mut witnesses = BTreeMap::new();
    let mut indeterminate = 0;
    let mut collisions = 0;
    for mask in 0..(1u64 << k) {
        let subset = subset_of(mask, k);
        let lambda = section7_lambda(&subset);
        let mut outputs = Vec::with_capacity(k);
        for c in &controls {
            if lambda > 0.0 && section7_output(c, lambda).abs() < section7_guard(c, lambda, guard_scale) {
                indeterminate += 1;
            }
            outputs.push(section7_system_output(c, lambda));
        }
        let pattern = DichotomyPattern::new(sign_observe(&outputs));
        if !patterns.insert(pattern.clone()) {
            collisions += 1;
            continue;
        }
        witnesses.insert(
            pattern,
            Witness {
                params: vec![lambda],
                outputs,
                levels: None,
                residual: None,
                label: Some(subset_label(&subset)),
            },
        );
    }
    let target = 1u64 << k;
    let bijective = collisions == 0 && patterns.len() as u64 == target;
    let mut notes = vec!["output y = -(1/lambda) * integral of sin(lambda t) over the control interval".to_string()];
    if collisions > 0 {
        notes.push(format!("{collisions} subsets collided with an earlier pattern"));
    }
    let complete = bijective && indeterminate == 0;
    Ok(ShatterReport {
        construction: "section7".into(),
        points: PointSet {
            description: format!(
                "indicator controls omega_1..omega_{k}, interval width 2^{}",
                -2 * (k as i32 + 1)
            ),
            coordinates: controls
                .iter()
                .map(|c| {
                    let (a, b) = c.interval();
                    vec![a, b]
                })
                .collect(),
        },
        d: k,
        patterns_found: patterns,
        target_patterns: target,
        complete,
        witnesses,
        indeterminate_count: indeterminate,
        certified_value: complete.then_some(k as f64),
        shared_params: Vec::new(),
        notes,
    })
}

/// Re-evaluates every witness of a section-7 report; returns the first mismatch.
pub fn recheck_section7(report: &ShatterReport) -> Result<(), String> {
    let k = report.d;
    for (pattern, w) in &report.witnesses {
        let lambda = *w.params.first().ok_or("witness without lambda")?;
        let outputs: Vec<f64> = (1..=k)
            .map(|i| {
                let c = IndicatorControl::new(i, k).map_err(|e| e.to_string())?;
                Ok(section7_system_output(&c, lambda))
            })
            .collect::<Result<_, String>>()?;
        if sign_observe(&outputs) != pattern.bits {
            return Err(format!("witness for {pattern} re-evaluates to a different pattern"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_examples() {
        assert_eq!(section7_lambda(&[]), 0.0);
        assert_eq!(section7_lambda(&[1]), 2.0 * PI);
        assert_eq!(section7_lambda(&[1, 2]), 6.0 * PI);
    }

    #[test]
    fn intervals_are_disjoint_and_inside() {
        for k in 1..=8 {
            let ivs: Vec<_> = (1..=k)
                .map(|i| IndicatorControl::new(i, k).unwrap().interval())
                .collect();
            for (i, &(a, b)) in ivs.iter().enumerate() {
                assert!(a > 0.0 && b <= 1.0 && a < b);
                for &(c, d) in &ivs[..i] {
                    assert!(b < c || d < a);
                }
            }
        }
    }

    #[test]
    fn stable_form_matches_cosine_difference() {
        let c = IndicatorControl::new(2, 3);
        let c = c.unwrap();
        let (a, b) = c.interval();
        for lambda in [0.3, 1.7, 6.0 * PI + 0.1, 20.0] {
            let stable = section7_output(&c, lambda);
            let naive = ((lambda * a).cos() - (lambda * b).cos()) / lambda;
            assert!((stable - naive).abs() <= 1e-12 * stable.abs().max(1e-300) + 1e-15);
        }
        assert_eq!(section7_output(&c, 0.0), 0.0);
    }

    #[test]
    fn single_subset_distinguishes_one_coordinate() {
        let lambda = section7_lambda(&[2]);
        let outs: Vec<f64> = (1..=3)
            .map(|i| section7_system_output(&IndicatorControl::new(i, 3).unwrap(), lambda))
            .collect();
        let bits = sign_observe(&outs);
        assert_eq!(bits.iter().filter(|&&b| b).count(), 1);
        assert!(bits[1]);
    }

    #[test]
    fn literal_integral_labels_collide_at_lambda_zero() {
        // with ∫ sin(λt) dt itself as the output, J = ∅ and J = {1..k} both give all zeros
        let k = 3;
        let label = |subset: &[usize]| -> Vec<bool> {
            let lambda = section7_lambda(subset);
            let outs: Vec<f64> = (1..=k)
                .map(|i| section7_output(&IndicatorControl::new(i, k).unwrap(), lambda))
                .collect();
            sign_observe(&outs)
        };
        assert_eq!(label(&[]), label(&[1, 2, 3]));
        assert_eq!(label(&[]), vec![false; 3]);
    }

    #[test]
    fn small_k_is_bijective() {
        for k in 1..=4 {
            let r = verify_section7(k, SECTION7_DEFAULT_GUARD).unwrap();
            assert!(r.complete, "k = {k}");
            assert_eq!(r.patterns_found.len(), 1 << k);
            recheck_section7(&r).unwrap();
        }
    }

    #[test]
    fn rejects_out_of_range_k() {
        assert!(matches!(
            verify_section7(40, 1e3),
            Err(ShatterError::PrecisionLimit { .. })
        ));
        assert!(verify_section7(0, 1e3).is_err());
    }
}
