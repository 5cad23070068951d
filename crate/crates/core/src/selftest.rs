//! Fast internal consistency suite: integral engine against quadrature,
//! the VC sandwich grid, and the indicator-control shattering check.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{vc_lower, vc_upper_scalar, Rounding};
use crate::integrals::quadrature::integrate_quadrature;
use crate::integrals::{integrate_monomial, ExpTrigMonomial, Trig};
use crate::rng::derived_rng;
use crate::shatter::{verify_section7, SECTION7_DEFAULT_GUARD};

const ORACLE_CASES: usize = 300;
const ORACLE_SEED: u64 = 0x5e1f_7e57;
const ABS_TOL: f64 = 1e-8;
const REL_TOL: f64 = 1e-6;

/// Test harness hooks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SelfTestOptions {
    /// Relative error injected into every closed-form value before comparison.
    pub closed_form_perturbation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub cases: usize,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfTestReport {
    pub passed: bool,
    pub suites: Vec<SuiteOutcome>,
}

impl SelfTestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }
}

fn oracle_suite(opts: &SelfTestOptions) -> SuiteOutcome {
    let mut rng = derived_rng(ORACLE_SEED, 0);
    let mut failures = Vec::new();
    for case in 0..ORACLE_CASES {
        let m = ExpTrigMonomial::new(
            rng.gen_range(0..=6),
            rng.gen_range(-5.0..=5.0),
            rng.gen_range(-5.0..=5.0),
            if rng.gen_bool(0.5) { Trig::Sin } else { Trig::Cos },
        );
        let tau = if rng.gen_bool(0.5) { 1.0 } else { 2.0 };
        let closed = integrate_monomial(&m, tau).map(|r| r.value * (1.0 + opts.closed_form_perturbation));
        let quad = integrate_quadrature(|t| m.eval(t), tau, 1e-12).map(|r| r.value);
        match (closed, quad) {
            (Ok(c), Ok(q)) if (c - q).abs() <= ABS_TOL + REL_TOL * q.abs() => {}
            (c, q) => failures.push(format!(
                "case {case}: {m:?} on [0, {tau}]: closed form {c:?}, quadrature {q:?}"
            )),
        }
    }
    SuiteOutcome {
        suite: "integral_oracle".into(),
        cases: ORACLE_CASES,
        failures,
    }
}

fn sandwich_suite() -> SuiteOutcome {
    let mut failures = Vec::new();
    let mut cases = 0;
    for n in 1..=6u64 {
        for k in 1..=64u64 {
            for ell in 0..=3u64 {
                for rounding in [Rounding::Floor, Rounding::Ceil] {
                    cases += 1;
                    match (vc_lower(n, k, rounding), vc_upper_scalar(n, 1, k, ell)) {
                        (Ok(lo), Ok(hi)) if lo as f64 <= hi => {}
                        (lo, hi) => failures.push(format!(
                            "n={n} k={k} ell={ell} {rounding:?}: lower {lo:?}, upper {hi:?}"
                        )),
                    }
                }
            }
        }
    }
    SuiteOutcome {
        suite: "vc_sandwich".into(),
        cases,
        failures,
    }
}

fn indicator_suite() -> SuiteOutcome {
    let mut failures = Vec::new();
    for k in 1..=6 {
        match verify_section7(k, SECTION7_DEFAULT_GUARD) {
            Ok(r) if r.complete => {}
            Ok(r) => failures.push(format!(
                "k={k}: {} of {} patterns, {} indeterminate",
                r.patterns_found.len(),
                r.target_patterns,
                r.indeterminate_count
            )),
            Err(e) => failures.push(format!("k={k}: {e}")),
        }
    }
    SuiteOutcome {
        suite: "indicator_shattering".into(),
        cases: 6,
        failures,
    }
}

pub fn run_selftest(opts: &SelfTestOptions) -> SelfTestReport {
    let suites = vec![oracle_suite(opts), sandwich_suite(), indicator_suite()];
    SelfTestReport {
        passed: suites.iter().all(|s| s.failures.is_empty()),
        suites,
    }
}
