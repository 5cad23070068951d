//! Calculators for the complexity-dimension and sample-complexity formulas.
//!
//! Every formula that involves a product of large factors is evaluated as
//! a sum of base-2 logarithms so that `n` up to 64 and `k` up to 10^6 stay finite.

mod counting;
mod report;

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use crate::error::BoundsError;

pub use counting::{
    pole_free_count, pole_free_count_binomial, pole_free_count_enumerate, xi_basis_count, xi_basis_elements, CountMode,
    XiElement, XiTrig,
};
pub use report::{evaluate, fmt_real, BoundReport, FormulaId, ProblemDims, CSV_HEADER};

/// Which rounding to apply where two printed forms of a bound disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    Floor,
    Ceil,
}

/// Parameter ball used in the Lipschitz fat-shattering bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ball {
    OpenInf,
    ClosedInf,
    ClosedL2,
}

/// A bound value with any branch or clamping notes.
#[derive(Debug, Clone, PartialEq)]
pub struct Valued {
    pub value: f64,
    pub notes: Vec<String>,
}

impl Valued {
    fn plain(value: f64) -> Self {
        Self {
            value,
            notes: Vec::new(),
        }
    }

    fn noted(value: f64, note: impl Into<String>) -> Self {
        Self {
            value,
            notes: vec![note.into()],
        }
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> BoundsError {
    BoundsError::InvalidArgument {
        field,
        reason: reason.into(),
    }
}

fn at_least_one(field: &'static str, v: u64) -> Result<f64, BoundsError> {
    if v >= 1 {
        Ok(v as f64)
    } else {
        Err(invalid(field, format!("must be at least 1, got {v}")))
    }
}

fn positive(field: &'static str, v: f64) -> Result<f64, BoundsError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

fn unit_open(field: &'static str, v: f64) -> Result<f64, BoundsError> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(invalid(field, format!("must lie in (0, 1), got {v}")))
    }
}

fn finite(what: &'static str, v: f64) -> Result<f64, BoundsError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(BoundsError::Overflow(what))
    }
}

/// `log2(2^x + 2^y)` without forming either power.
pub fn log2_add(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (1.0 + (lo - hi).exp2()).log2()
}

/// `log2(2nk + 2(1+2k)^n)`.
fn log2_pole_term(n: f64, k: f64) -> f64 {
    log2_add((2.0 * n * k).log2(), 1.0 + n * (1.0 + 2.0 * k).log2())
}

/// `2(2mn² + 4n + 1) log₂[8e(8mn²k(n+ℓ) + 1)(2nk + 2(1+2k)ⁿ)]`.
pub fn vc_upper_scalar(n: u64, m: u64, k: u64, ell_max: u64) -> Result<f64, BoundsError> {
    let (n, m, k) = (at_least_one("n", n)?, at_least_one("m", m)?, at_least_one("k", k)?);
    let l = ell_max as f64;
    let factor = 2.0 * (2.0 * m * n * n + 4.0 * n + 1.0);
    let log_arg = (8.0 * E).log2() + (8.0 * m * n * n * k * (n + l) + 1.0).log2() + log2_pole_term(n, k);
    finite("vc_upper_scalar", factor * log_arg)
}

/// `max{m'·round(log₂⌊k/m'⌋), m'}` with `m' = min{n, k}`.
pub fn vc_lower(n: u64, k: u64, variant: Rounding) -> Result<u64, BoundsError> {
    at_least_one("n", n)?;
    at_least_one("k", k)?;
    let mp = n.min(k);
    let q = k / mp;
    let log = match variant {
        Rounding::Floor => floor_log2(q),
        Rounding::Ceil => ceil_log2(q),
    };
    Ok((mp * log).max(mp))
}

fn floor_log2(x: u64) -> u64 {
    debug_assert!(x >= 1);
    63 - x.leading_zeros() as u64
}

fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as u64
    }
}

/// `2(2pmn² + 4n + p) log₂[8e(8mn²k(n+ℓ)+1)(2^p − 1 + 2p(2k+1)ⁿ + 2nk)]`.
pub fn vc_upper_vector(n: u64, m: u64, p: u64, k: u64, ell_max: u64) -> Result<f64, BoundsError> {
    let (n, m, p, k) = (
        at_least_one("n", n)?,
        at_least_one("m", m)?,
        at_least_one("p", p)?,
        at_least_one("k", k)?,
    );
    let l = ell_max as f64;
    let factor = 2.0 * (2.0 * p * m * n * n + 4.0 * n + p);
    // 2^p − 1 + 2p(2k+1)^n + 2nk
    let log_two_p_minus_one = if p < 64.0 { (p.exp2() - 1.0).log2() } else { p };
    let log_s = log2_add(
        log2_add(log_two_p_minus_one, 1.0 + p.log2() + n * (2.0 * k + 1.0).log2()),
        (2.0 * n * k).log2(),
    );
    let log_arg = (8.0 * E).log2() + (8.0 * m * n * n * k * (n + l) + 1.0).log2() + log_s;
    finite("vc_upper_vector", factor * log_arg)
}

/// `2(2mn²+4n+1) log₂[16e(8mn²k(n+ℓ)+1)(2nk + 2(2k+1)ⁿ)]`.
pub fn pd_upper(n: u64, m: u64, k: u64, ell_max: u64) -> Result<f64, BoundsError> {
    let (n, m, k) = (at_least_one("n", n)?, at_least_one("m", m)?, at_least_one("k", k)?);
    let l = ell_max as f64;
    let factor = 2.0 * (2.0 * m * n * n + 4.0 * n + 1.0);
    let log_arg = (16.0 * E).log2() + (8.0 * m * n * n * k * (n + l) + 1.0).log2() + log2_pole_term(n, k);
    finite("pd_upper", factor * log_arg)
}

/// Lipschitz-parameterised fat-shattering bound at scale `gamma`.
pub fn fat_lipschitz(k: u64, c: f64, l: f64, gamma: f64, ball: Ball) -> Result<Valued, BoundsError> {
    let kf = at_least_one("k", k)?;
    let c = positive("C", c)?;
    let l = positive("L", l)?;
    let gamma = positive("gamma", gamma)?;
    let ratio = c * l / gamma;
    Ok(match ball {
        Ball::OpenInf => {
            let fl = ratio.floor();
            if fl <= 1.0 {
                Valued::noted(0.0, "floor(CL/gamma) <= 1: bound is 0")
            } else {
                Valued::plain(finite("fat_lipschitz", kf * fl.log2())?)
            }
        }
        Ball::ClosedInf => Valued::plain(finite("fat_lipschitz", kf * (1.0 + ratio.floor()).log2())?),
        Ball::ClosedL2 => {
            let arg = c + l / gamma;
            if arg <= 1.0 {
                Valued::noted(0.0, "C + L/gamma <= 1: bound clamped to 0")
            } else {
                Valued::plain(finite("fat_lipschitz", kf * arg.log2())?)
            }
        }
    })
}

/// `log₂ round(x)` for `x > 0`; `None` when the rounded argument is 0.
/// For arguments beyond 2^53 rounding is the identity in double precision.
fn log2_rounded(x: f64, rounding: Rounding) -> Option<f64> {
    let r = match rounding {
        Rounding::Floor => x.floor(),
        Rounding::Ceil => x.ceil(),
    };
    (r >= 1.0).then(|| r.log2())
}

/// `log2(n² m τⁿ e^τ M)` without overflow.
fn log2_control_lipschitz(n: f64, m: f64, tau: f64, big_m: f64) -> f64 {
    2.0 * n.log2() + m.log2() + n * tau.log2() + tau / LN_2 + big_m.log2()
}

fn control_lipschitz(n: f64, m: f64, tau: f64, big_m: f64) -> f64 {
    n * n * m * tau.powf(n) * tau.exp() * big_m
}

/// `n(m+1) log₂ round(n² m τⁿ e^τ M / γ)`.
pub fn fat_control(
    n: u64,
    m: u64,
    tau: f64,
    big_m: f64,
    gamma: f64,
    rounding: Rounding,
) -> Result<Valued, BoundsError> {
    let (nf, mf) = (at_least_one("n", n)?, at_least_one("m", m)?);
    if !(tau.is_finite() && tau >= 1.0) {
        return Err(invalid("tau", format!("must be finite and at least 1, got {tau}")));
    }
    let big_m = positive("M", big_m)?;
    let gamma = positive("gamma", gamma)?;
    let params = nf * (mf + 1.0);
    let lip = control_lipschitz(nf, mf, tau, big_m);
    let arg = lip / gamma;
    let log = if arg.is_finite() {
        log2_rounded(arg, rounding)
    } else {
        Some(log2_control_lipschitz(nf, mf, tau, big_m) - gamma.log2())
    };
    match log {
        Some(v) => Ok(Valued::plain(finite("fat_control", params * v)?)),
        None => Ok(Valued::noted(0.0, "rounded argument is 0: bound is 0")),
    }
}

/// The Lipschitz constant `n² m τⁿ e^τ M` that links [`fat_control`] to [`fat_lipschitz`].
pub fn fat_control_lipschitz_constant(n: u64, m: u64, tau: f64, big_m: f64) -> f64 {
    control_lipschitz(n as f64, m as f64, tau, big_m)
}

/// Scale at which the combined bound is evaluated: a direct `gamma`, else `(1/4 − κ)ε`.
pub fn combined_gamma(gamma: Option<f64>, kappa: Option<f64>, eps: Option<f64>) -> Result<f64, BoundsError> {
    match (gamma, kappa, eps) {
        (Some(g), _, _) => positive("gamma", g),
        (None, Some(kappa), Some(eps)) => {
            if !(kappa > 0.0 && kappa < 0.25) {
                return Err(invalid("kappa", format!("must lie in (0, 1/4), got {kappa}")));
            }
            let eps = unit_open("eps", eps)?;
            Ok((0.25 - kappa) * eps)
        }
        _ => Err(BoundsError::Missing("gamma, or both kappa and eps".into())),
    }
}

/// `min{(m+1)n log₂ round(n²mτⁿe^τkM/γ), 2(m+4)n log₂(8e(4nmk(n+ℓ)+1)(2nk+2(2k+1)ⁿ))}`.
#[allow(clippy::too_many_arguments)]
pub fn fat_combined(
    n: u64,
    m: u64,
    k: u64,
    ell_max: u64,
    tau: f64,
    big_m: f64,
    gamma: f64,
    rounding: Rounding,
) -> Result<Valued, BoundsError> {
    let (nf, mf, kf) = (at_least_one("n", n)?, at_least_one("m", m)?, at_least_one("k", k)?);
    if !(tau.is_finite() && tau >= 1.0) {
        return Err(invalid("tau", format!("must be finite and at least 1, got {tau}")));
    }
    let big_m = positive("M", big_m)?;
    let gamma = positive("gamma", gamma)?;
    let l = ell_max as f64;

    let arg = control_lipschitz(nf, mf, tau, big_m) * kf / gamma;
    let log = if arg.is_finite() {
        log2_rounded(arg, rounding)
    } else {
        Some(log2_control_lipschitz(nf, mf, tau, big_m) + kf.log2() - gamma.log2())
    };
    let first = (mf + 1.0) * nf * log.unwrap_or(0.0);
    let second = 2.0
        * (mf + 4.0)
        * nf
        * ((8.0 * E).log2() + (4.0 * nf * mf * kf * (nf + l) + 1.0).log2() + log2_pole_term(nf, kf));
    let first = finite("fat_combined", first)?;
    let second = finite("fat_combined", second)?;
    let mut notes = Vec::new();
    if log.is_none() {
        notes.push("first branch: rounded argument is 0".to_string());
    }
    if first <= second {
        notes.push("first branch (scale-dependent) selected".into());
        Ok(Valued { value: first, notes })
    } else {
        notes.push("second branch (scale-free) selected".into());
        Ok(Valued { value: second, notes })
    }
}

/// `min{9R²/γ², k+1} + 1`.
pub fn fat_hyperplane(r: f64, gamma: f64, k: u64) -> Result<f64, BoundsError> {
    let r = positive("R", r)?;
    let gamma = positive("gamma", gamma)?;
    let ratio = 9.0 * r * r / (gamma * gamma);
    Ok(ratio.min(k as f64 + 1.0) + 1.0)
}

fn concept_formula(d: f64, eps: f64, delta: f64) -> f64 {
    let a = 8.0 * d / eps * (8.0 * E / eps).log2();
    let b = 4.0 / eps * (2.0 / delta).log2();
    a.max(b)
}

/// `max{(8d/ε) log₂(8e/ε), (4/ε) log₂(2/δ)}`.
pub fn sample_complexity_concept(d: f64, eps: f64, delta: f64) -> Result<f64, BoundsError> {
    if !(d.is_finite() && d >= 1.0) {
        return Err(invalid("d", format!("must be finite and at least 1, got {d}")));
    }
    let eps = unit_open("eps", eps)?;
    let delta = unit_open("delta", delta)?;
    Ok(concept_formula(d, eps, delta))
}

/// The `ε` at which [`sample_complexity_concept`] equals `s`.
///
/// The formula is strictly decreasing in `ε` on `(0, 8e)`, so the inverse is
/// found by bisection there. Values above 1 are returned unclamped; they
/// mean the bound is vacuous at this sample size. If `s` is below the
/// formula's infimum on the interval, `8e` is returned.
pub fn invert_sample_complexity_concept(d: f64, delta: f64, s: f64) -> Result<f64, BoundsError> {
    if !(d.is_finite() && d >= 1.0) {
        return Err(invalid("d", format!("must be finite and at least 1, got {d}")));
    }
    let delta = unit_open("delta", delta)?;
    let s = positive("s", s)?;
    let hi_cap = 8.0 * E;
    if concept_formula(d, hi_cap, delta) >= s {
        return Ok(hi_cap);
    }
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, hi_cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if concept_formula(d, mid, delta) > s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Agnostic sample complexity, evaluated exactly as printed:
/// `(4/α²)((6d/ln2)·ln(7/α)·((336e/(α³ln2))·ln(7/α)) + ln(8/δ))`.
/// The second note carries the `O`-form proxy `(1/α²)(d log₂²(1/α) + log₂(1/δ))`.
pub fn sample_complexity_agnostic(d: f64, alpha: f64, delta: f64) -> Result<Valued, BoundsError> {
    if !(d.is_finite() && d >= 0.0) {
        return Err(invalid("d", format!("must be finite and nonnegative, got {d}")));
    }
    let alpha = unit_open("alpha", alpha)?;
    let delta = unit_open("delta", delta)?;
    let l7 = (7.0 / alpha).ln();
    let inner = (6.0 * d / LN_2) * l7 * ((336.0 * E / (alpha.powi(3) * LN_2)) * l7);
    let value = 4.0 / (alpha * alpha) * (inner + (8.0 / delta).ln());
    let proxy = ((1.0 / alpha).log2().powi(2) * d + (1.0 / delta).log2()) / (alpha * alpha);
    Ok(Valued {
        value: finite("sample_complexity_agnostic", value)?,
        notes: vec![
            "grouping: (4/a^2)*((6d/ln2)*ln(7/a)*((336e/(a^3 ln2))*ln(7/a)) + ln(8/delta))".into(),
            format!("o_form={proxy:.16e}"),
        ],
    })
}

/// `2·ℓ·log₂(8eds)` from `log₂ d` and `log₂ s`.
pub fn gj_bound_log(ell: f64, log2_d: f64, log2_s: f64) -> f64 {
    2.0 * ell * ((8.0 * E).log2() + log2_d + log2_s)
}

/// `2·ℓ·log₂(8eds)`.
pub fn gj_bound(ell: u64, d: u64, s: u64) -> Result<f64, BoundsError> {
    let ell = at_least_one("ell", ell)?;
    let d = at_least_one("d", d)?;
    let s = at_least_one("s", s)?;
    Ok(gj_bound_log(ell, d.log2(), s.log2()))
}

/// `log₂ ((8e·d·m_polys)/n_vars)^{n_vars}`.
pub fn sign_pattern_count_log2(n_vars: u64, d: u64, m_polys: u64) -> Result<f64, BoundsError> {
    let nv = at_least_one("n_vars", n_vars)?;
    let df = at_least_one("d", d)?;
    let mp = at_least_one("m_polys", m_polys)?;
    if n_vars > m_polys {
        return Err(invalid(
            "n_vars",
            format!("must not exceed m_polys = {m_polys}, got {n_vars}"),
        ));
    }
    Ok(nv * (8.0 * E * df * mp / nv).log2())
}

/// `((8·e·d·m_polys)/n_vars)^{n_vars}`.
pub fn sign_pattern_count(n_vars: u64, d: u64, m_polys: u64) -> Result<f64, BoundsError> {
    sign_pattern_count_log2(n_vars, d, m_polys)?;
    let nv = n_vars as f64;
    finite(
        "sign_pattern_count",
        (8.0 * E * d as f64 * m_polys as f64 / nv).powf(nv),
    )
}

/// `⌊log₂ vc_dual⌋`.
pub fn dual_vc_lower(vc_dual: u64) -> Result<u64, BoundsError> {
    at_least_one("vc_dual", vc_dual)?;
    Ok(floor_log2(vc_dual))
}

/// `Σ ⌊log₂ r_i⌋`.
pub fn axis_shatter_bound(r: &[u64]) -> Result<u64, BoundsError> {
    r.iter()
        .map(|&ri| {
            at_least_one("axis_sizes", ri)?;
            Ok(floor_log2(ri))
        })
        .sum()
}

/// `4(n + ℓ_max)`.
pub fn dmax_rat(n: u64, ell_max: u64) -> Result<u64, BoundsError> {
    at_least_one("n", n)?;
    n.checked_add(ell_max)
        .and_then(|x| x.checked_mul(4))
        .ok_or(BoundsError::Overflow("dmax_rat"))
}

/// The Goldberg–Jerrum bound under the abstract rationality assumption with
/// `h_rat` polynomials of degree at most `d_rat`.
pub fn rat_vc_abstract(n: u64, m: u64, k: u64, h_rat: u64, d_rat: u64) -> Result<f64, BoundsError> {
    let (n, m, k) = (at_least_one("n", n)?, at_least_one("m", m)?, at_least_one("k", k)?);
    let h = at_least_one("h_rat", h_rat)?;
    let dr = at_least_one("d_rat", d_rat)?;
    let ell = 2.0 * m * n * n + 4.0 * n;
    let d = 2.0 * m * n * n * k * dr + 1.0;
    let log_s = log2_add(
        1.0 + 4.0 * n * (8.0 * E * dr * 2.0 * n * n * k * h / (4.0 * n)).log2(),
        (2.0 * n * n * k * h).log2(),
    );
    finite("rat_vc_abstract", gj_bound_log(ell, d.log2(), log_s))
}

#[cfg(test)]
mod tests;
