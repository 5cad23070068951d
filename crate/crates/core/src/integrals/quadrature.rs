//! Globally adaptive 15-point Gauss–Kronrod quadrature.
//!
//! This is the independent oracle used to check every closed form in the
//! crate. It shares no code with the recursion in the parent module.

use crate::error::IntegralError;

/// Kronrod abscissae on [-1, 1] (positive half, descending, centre last).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the embedded 7-point rule (abscissae XGK[1], XGK[3], XGK[5], XGK[7]).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Maximum number of interval bisections before giving up.
pub const MAX_SUBDIVISIONS: usize = 4000;

/// Outcome of an adaptive quadrature run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    resabs: f64,
}

fn qk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Segment, IntegralError> {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let eval = |t: f64| {
        let v = f(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(IntegralError::NonFiniteIntegrand(t))
        }
    };

    let fc = eval(centre)?;
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(centre - dx)?;
        let f2 = eval(centre + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Segment {
        lo,
        hi,
        value,
        error,
        resabs,
    })
}

/// Integrates `f` over `[lo, hi]` to the requested relative tolerance.
///
/// Convergence is declared when the summed error estimate drops below
/// `max(rel_tol * |I|, 50 * eps * ∫|f|)`; the second term lets integrals
/// whose exact value is zero terminate at roundoff level.
pub fn integrate_interval<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Result<QuadratureResult, IntegralError> {
    integrate_interval_with_budget(f, lo, hi, rel_tol, MAX_SUBDIVISIONS)
}

/// [`integrate_interval`] with an explicit bisection budget.
pub fn integrate_interval_with_budget<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<QuadratureResult, IntegralError> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(IntegralError::NonFinite("integration bounds"));
    }
    if !(rel_tol > 0.0 && rel_tol <= 1e-2) {
        return Err(IntegralError::InvalidTolerance(rel_tol));
    }
    if lo == hi {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
        });
    }

    let mut segments = vec![qk15(&f, lo, hi)?];
    let mut subdivisions = 0;
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let resabs: f64 = segments.iter().map(|s| s.resabs).sum();
        let target = (rel_tol * total.abs()).max(50.0 * f64::EPSILON * resabs);
        if error <= target {
            return Ok(QuadratureResult {
                value: total,
                error_estimate: error,
                subdivisions,
            });
        }
        if subdivisions >= max_subdivisions {
            return Err(IntegralError::NoConvergence {
                subdivisions,
                estimate: total,
                error,
            });
        }

        // bisect the segment with the largest error; ties resolve to the lowest index
        let (worst, _) =
            segments.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, s)| {
                    if s.error > acc.1 {
                        (i, s.error)
                    } else {
                        acc
                    }
                },
            );
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            return Err(IntegralError::NoConvergence {
                subdivisions,
                estimate: total,
                error,
            });
        }
        segments.push(qk15(&f, seg.lo, mid)?);
        segments.push(qk15(&f, mid, seg.hi)?);
        subdivisions += 1;
    }
}

/// Integrates `f` over `[0, tau]`.
pub fn integrate_quadrature<F: Fn(f64) -> f64>(
    f: F,
    tau: f64,
    rel_tol: f64,
) -> Result<QuadratureResult, IntegralError> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(IntegralError::InvalidHorizon(tau));
    }
    integrate_interval(f, 0.0, tau, rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kronrod_weights_integrate_constants() {
        let total = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        assert!((total - 2.0).abs() < 1e-15);
        let gauss = 2.0 * (WG[0] + WG[1] + WG[2]) + WG[3];
        assert!((gauss - 2.0).abs() < 1e-15);
    }

    #[test]
    fn constant_and_sine() {
        let one = integrate_quadrature(|_| 1.0, 1.0, 1e-10).unwrap();
        assert!((one.value - 1.0).abs() < 1e-14);
        let s = integrate_quadrature(|t| (PI * t).sin(), 1.0, 1e-10).unwrap();
        assert!((s.value - 2.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn zero_valued_integral_terminates() {
        let r = integrate_quadrature(|t| (2.0 * PI * t).sin(), 1.0, 1e-12).unwrap();
        assert!(r.value.abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_tolerance_and_horizon() {
        assert!(matches!(
            integrate_quadrature(|_| 1.0, 1.0, 0.5),
            Err(IntegralError::InvalidTolerance(_))
        ));
        assert!(matches!(
            integrate_quadrature(|_| 1.0, -1.0, 1e-6),
            Err(IntegralError::InvalidHorizon(_))
        ));
    }

    #[test]
    fn reports_non_convergence() {
        // a fast oscillation cannot be resolved with a handful of bisections
        let r = integrate_interval_with_budget(|t| (400.0 * t * t).sin(), 0.0, 3.0, 1e-12, 8);
        assert!(matches!(r, Err(IntegralError::NoConvergence { subdivisions: 8, .. })));
        let ok = integrate_interval_with_budget(|t| (400.0 * t * t).sin(), 0.0, 3.0, 1e-12, MAX_SUBDIVISIONS);
        assert!(ok.is_ok());
        let nan = integrate_quadrature(|_| f64::NAN, 1.0, 1e-6);
        assert!(matches!(nan, Err(IntegralError::NonFiniteIntegrand(_))));
    }

    #[test]
    fn deterministic() {
        let f = |t: f64| t * t.exp() * (3.0 * t).sin();
        let a = integrate_quadrature(f, 1.0, 1e-10).unwrap();
        let b = integrate_quadrature(f, 1.0, 1e-10).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
