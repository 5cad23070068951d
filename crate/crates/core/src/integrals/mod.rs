//! Exact evaluation of `∫_0^τ t^K e^{ãt} sin(b̃t) dt` and its cosine twin.
//!
//! Integrals of system modes against band-limited inputs reduce, after a
//! product-to-sum expansion, to at most two such monomials. Each monomial is
//! a rational function of `(ã, b̃, e^{ãτ}cos b̃τ, e^{ãτ}sin b̃τ)` with the single
//! pole `ã² + b̃² = 0`, so the evaluator is piecewise:
//!
//! * `ã = b̃ = 0` exactly: the polynomial limit (`0` for sine, `τ^{K+1}/(K+1)` for cosine).
//! * `0 < ã² + b̃² ≤ 1e-8`: the quadrature oracle.
//! * `|ã + ib̃|·τ ≤ 4`: the entire power series of the same function.
//! * otherwise: the base closed form followed by upward integration-by-parts
//!   recursion in `K`.

pub mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::IntegralError;
use crate::response::BasisFunction;

pub use quadrature::{integrate_interval, integrate_quadrature, QuadratureResult};

/// `ã² + b̃²` at or below this value is labelled as the pole branch.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;
/// `ã² + b̃²` at or below this value (but nonzero) is integrated by quadrature.
pub const NEAR_DEGENERATE_THRESHOLD: f64 = 1e-8;
/// Below this value of `|ã + ib̃|·τ` the power series replaces the recursion.
pub const SERIES_RADIUS: f64 = 4.0;
/// Tolerance used when the near-pole branch falls back to quadrature.
const FALLBACK_REL_TOL: f64 = 1e-13;
/// Largest `ã·τ` for which `e^{ãτ}` stays finite.
const MAX_EXPONENT: f64 = 709.0;

/// Trigonometric factor of a monomial or basis function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trig {
    Sin,
    Cos,
}

impl Trig {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Trig::Sin => x.sin(),
            Trig::Cos => x.cos(),
        }
    }
}

/// One term `t^power · e^{rate·t} · sin|cos(freq·t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTrigMonomial {
    pub power: u32,
    pub rate: f64,
    pub freq: f64,
    pub phase: Trig,
}

impl ExpTrigMonomial {
    pub fn new(power: u32, rate: f64, freq: f64, phase: Trig) -> Self {
        Self {
            power,
            rate,
            freq,
            phase,
        }
    }

    /// Pointwise value of the integrand.
    pub fn eval(&self, t: f64) -> f64 {
        t.powi(self.power as i32) * (self.rate * t).exp() * self.phase.eval(self.freq * t)
    }
}

/// Which piece of the piecewise-rational definition produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Regular,
    DegenerateDenominator,
}

/// How the value was actually computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Series,
    PolynomialLimit,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub branch: Branch,
    /// `ã² + b̃²`.
    pub denom_magnitude: f64,
    pub method: Method,
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Returns `(∫ t^K e^{at} cos bt, ∫ t^K e^{at} sin bt)` over `[0, τ]` for all
/// `K ≤ max_power` by upward recursion. Requires `a² + b² > 0`.
pub(crate) fn recursion_table(a: f64, b: f64, tau: f64, max_power: u32) -> Vec<(f64, f64)> {
    let denom = a * a + b * b;
    let growth = (a * tau).exp();
    let (s, c) = (b * tau).sin_cos();
    // boundary factors e^{aτ}(a cos + b sin) and e^{aτ}(a sin − b cos)
    let bc = growth * (a * c + b * s);
    let bs = growth * (a * s - b * c);

    let mut out = Vec::with_capacity(max_power as usize + 1);
    let mut cos_k = (bc - a) / denom;
    let mut sin_k = (bs + b) / denom;
    out.push((cos_k, sin_k));
    let mut tau_pow = 1.0;
    for k in 1..=max_power {
        tau_pow *= tau;
        let kf = k as f64;
        let next_cos = tau_pow * bc / denom - kf * (a * cos_k + b * sin_k) / denom;
        let next_sin = tau_pow * bs / denom - kf * (a * sin_k - b * cos_k) / denom;
        cos_k = next_cos;
        sin_k = next_sin;
        out.push((cos_k, sin_k));
    }
    out
}

/// `Σ_j (zτ)^j/j! · τ^{K+1}/(K+j+1)` evaluated in complex arithmetic; returns `(re, im)`.
fn series(power: u32, a: f64, b: f64, tau: f64) -> (f64, f64) {
    let (zr, zi) = (a * tau, b * tau);
    let scale = tau.powi(power as i32 + 1);
    let mut re = CompensatedSum::default();
    let mut im = CompensatedSum::default();
    let (mut wr, mut wi) = (1.0_f64, 0.0_f64);
    let kp1 = power as f64 + 1.0;
    re.add(1.0 / kp1);
    for j in 1..200 {
        let jf = j as f64;
        let nr = (wr * zr - wi * zi) / jf;
        let ni = (wr * zi + wi * zr) / jf;
        wr = nr;
        wi = ni;
        let d = kp1 + jf;
        re.add(wr / d);
        im.add(wi / d);
        let mag = (wr * wr + wi * wi).sqrt() / d;
        if mag < 1e-18 * (re.value().abs() + im.value().abs()).max(f64::MIN_POSITIVE) && jf > zr.hypot(zi) {
            break;
        }
    }
    (scale * re.value(), scale * im.value())
}

fn check_inputs(m: &ExpTrigMonomial, tau: f64) -> Result<(), IntegralError> {
    if !m.rate.is_finite() {
        return Err(IntegralError::NonFinite("rate"));
    }
    if !m.freq.is_finite() {
        return Err(IntegralError::NonFinite("freq"));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(IntegralError::InvalidHorizon(tau));
    }
    if m.rate * tau > MAX_EXPONENT {
        return Err(IntegralError::Range(m.rate * tau));
    }
    Ok(())
}

/// Exact value of `∫_0^τ t^K e^{ãt} sin|cos(b̃t) dt`.
pub fn integrate_monomial(m: &ExpTrigMonomial, tau: f64) -> Result<IntegralResult, IntegralError> {
    check_inputs(m, tau)?;
    let (a, b) = (m.rate, m.freq);
    let denom = a * a + b * b;
    let branch = if denom <= DEGENERACY_THRESHOLD {
        Branch::DegenerateDenominator
    } else {
        Branch::Regular
    };

    if a == 0.0 && b == 0.0 {
        let value = match m.phase {
            Trig::Sin => 0.0,
            Trig::Cos => tau.powi(m.power as i32 + 1) / (m.power as f64 + 1.0),
        };
        return Ok(IntegralResult {
            value,
            branch,
            denom_magnitude: denom,
            method: Method::PolynomialLimit,
        });
    }

    if denom <= NEAR_DEGENERATE_THRESHOLD {
        let q = integrate_quadrature(|t| m.eval(t), tau, FALLBACK_REL_TOL)?;
        return Ok(IntegralResult {
            value: q.value,
            branch,
            denom_magnitude: denom,
            method: Method::Quadrature,
        });
    }

    let (value, method) = if denom.sqrt() * tau <= SERIES_RADIUS {
        let (re, im) = series(m.power, a, b, tau);
        let v = match m.phase {
            Trig::Cos => re,
            Trig::Sin => im,
        };
        (v, Method::Series)
    } else {
        let table = recursion_table(a, b, tau, m.power);
        let (c, s) = table[m.power as usize];
        let v = match m.phase {
            Trig::Cos => c,
            Trig::Sin => s,
        };
        (v, Method::ClosedForm)
    };
    if !value.is_finite() {
        return Err(IntegralError::Range(a * tau));
    }
    Ok(IntegralResult {
        value,
        branch,
        denom_magnitude: denom,
        method,
    })
}

/// Product-to-sum expansion of `t^l e^{at} trig(bt) · ω(t)` into two monomials
/// with coefficients `±1/2`.
pub fn expand_xi_times_basis(
    l_xi: u32,
    a: f64,
    b: f64,
    trig: Trig,
    omega: &BasisFunction,
) -> [(f64, ExpTrigMonomial); 2] {
    let power = l_xi + omega.ell;
    let rate = a + omega.alpha;
    let (diff, sum) = (b - omega.beta, b + omega.beta);
    let mono = |freq, phase| ExpTrigMonomial::new(power, rate, freq, phase);
    match (trig, omega.kind) {
        // sin·sin = (cos(b−β) − cos(b+β))/2
        (Trig::Sin, Trig::Sin) => [(0.5, mono(diff, Trig::Cos)), (-0.5, mono(sum, Trig::Cos))],
        // cos·cos = (cos(b−β) + cos(b+β))/2
        (Trig::Cos, Trig::Cos) => [(0.5, mono(diff, Trig::Cos)), (0.5, mono(sum, Trig::Cos))],
        // sin·cos = (sin(b+β) + sin(b−β))/2
        (Trig::Sin, Trig::Cos) => [(0.5, mono(sum, Trig::Sin)), (0.5, mono(diff, Trig::Sin))],
        // cos·sin = (sin(b+β) − sin(b−β))/2
        (Trig::Cos, Trig::Sin) => [(0.5, mono(sum, Trig::Sin)), (-0.5, mono(diff, Trig::Sin))],
    }
}

/// Value of a ξ–basis integral together with the two monomial evaluations behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiBasisIntegral {
    pub value: f64,
    pub parts: [(f64, ExpTrigMonomial, IntegralResult); 2],
}

impl XiBasisIntegral {
    /// True when either monomial sits on its pole branch.
    pub fn degenerate(&self) -> bool {
        self.parts
            .iter()
            .any(|(_, _, r)| r.branch == Branch::DegenerateDenominator)
    }
}

pub fn integrate_xi_times_basis_detailed(
    l_xi: u32,
    a: f64,
    b: f64,
    trig: Trig,
    omega: &BasisFunction,
    tau: f64,
) -> Result<XiBasisIntegral, IntegralError> {
    let [(c0, m0), (c1, m1)] = expand_xi_times_basis(l_xi, a, b, trig, omega);
    let r0 = integrate_monomial(&m0, tau)?;
    let r1 = integrate_monomial(&m1, tau)?;
    Ok(XiBasisIntegral {
        value: c0 * r0.value + c1 * r1.value,
        parts: [(c0, m0, r0), (c1, m1, r1)],
    })
}

/// `∫_0^τ t^{l_xi} e^{at} trig(bt) · ω(t) dt`.
pub fn integrate_xi_times_basis(
    l_xi: u32,
    a: f64,
    b: f64,
    trig: Trig,
    omega: &BasisFunction,
    tau: f64,
) -> Result<f64, IntegralError> {
    integrate_xi_times_basis_detailed(l_xi, a, b, trig, omega, tau).map(|r| r.value)
}
