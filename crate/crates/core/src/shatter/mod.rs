//! Explicit shattering constructions and randomized lower-bound searches.
//!
//! Every positive result carries witnesses that can be re-evaluated from
//! their stored parameters; negative results of the randomized searches are
//! inconclusive.

mod empirical;
mod linear;
mod section7;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ShatterError;
use crate::integrals::{integrate_monomial, ExpTrigMonomial};
use crate::response::BasisFunction;
pub(crate) use crate::rng::derived_rng;

pub use empirical::{
    empirical_fat_lower, empirical_vc_lower, recheck_empirical, ConstantFamily, ControlSystemFamily, FatSearch,
    HalfspaceFamily, LinearFamily, ParamFamily, EMPIRICAL_CHUNKS,
};
pub use linear::{
    axis_shatter_construct, find_rank_k_lambdas, h_matrix, hyperplane_lower_witness, recheck_linear, HyperplaneMode,
    LambdaSearch, LambdaSet, AXIS_ZERO_BAND, RESIDUAL_LIMIT,
};
pub use section7::{
    recheck_section7, section7_guard, section7_lambda, section7_output, section7_system_output, verify_section7,
    IndicatorControl, SECTION7_DEFAULT_GUARD, SECTION7_MAX_K,
};

/// A {0,1}-labelling of the tested points, optionally tied to one grid axis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DichotomyPattern {
    pub axis: Option<usize>,
    pub bits: Vec<bool>,
}

impl DichotomyPattern {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { axis: None, bits }
    }

    pub fn on_axis(axis: usize, bits: Vec<bool>) -> Self {
        Self { axis: Some(axis), bits }
    }

    /// Bits of `mask` in positions `0..d`, least significant first.
    pub fn from_mask(mask: u64, d: usize) -> Self {
        Self::new((0..d).map(|i| mask >> i & 1 == 1).collect())
    }
}

impl fmt::Display for DichotomyPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(axis) = self.axis {
            write!(f, "axis{axis}:")?;
        }
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for DichotomyPattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (axis, bits) = match s.strip_prefix("axis") {
            Some(rest) => {
                let (a, b) = rest.split_once(':').ok_or_else(|| format!("malformed pattern `{s}`"))?;
                (Some(a.parse::<usize>().map_err(|e| e.to_string())?), b)
            }
            None => (None, s),
        };
        let bits = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(format!("malformed pattern `{s}`")),
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { axis, bits })
    }
}

impl Serialize for DichotomyPattern {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DichotomyPattern {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The tested point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub description: String,
    pub coordinates: Vec<Vec<f64>>,
}

/// Parameters that realize one pattern, with the outputs they produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub params: Vec<f64>,
    pub outputs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Outcome of a construction or search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatterReport {
    pub construction: String,
    pub points: PointSet,
    pub d: usize,
    pub patterns_found: BTreeSet<DichotomyPattern>,
    pub target_patterns: u64,
    pub complete: bool,
    pub witnesses: BTreeMap<DichotomyPattern, Witness>,
    pub indeterminate_count: usize,
    /// Lower-bound value certified when `complete` holds.
    pub certified_value: Option<f64>,
    /// Parameters common to every witness: the rank-`k` eigenvalue set or the system modes.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shared_params: Vec<f64>,
    pub notes: Vec<String>,
}

impl ShatterReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }
}

/// `h(λ) = ∫_0^1 e^{λt} ω(t) dt`.
pub fn h_transform(lambda: f64, omega: &BasisFunction) -> Result<f64, ShatterError> {
    let m = ExpTrigMonomial::new(omega.ell, lambda + omega.alpha, omega.beta, omega.kind);
    Ok(integrate_monomial(&m, 1.0)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::Trig;

    #[test]
    fn pattern_strings_round_trip() {
        let p = DichotomyPattern::on_axis(1, vec![true, false, true]);
        assert_eq!(p.to_string(), "axis1:101");
        assert_eq!("axis1:101".parse::<DichotomyPattern>().unwrap(), p);
        let q = DichotomyPattern::from_mask(0b110, 3);
        assert_eq!(q.to_string(), "011");
        assert!("01x".parse::<DichotomyPattern>().is_err());
    }

    #[test]
    fn h_transform_examples() {
        let one = BasisFunction::constant();
        assert!((h_transform(0.0, &one).unwrap() - 1.0).abs() < 1e-15);
        assert!((h_transform(1.0, &one).unwrap() - (std::f64::consts::E - 1.0)).abs() < 1e-14);
        let w = BasisFunction::new(2, -0.3, 2.0, Trig::Sin);
        let q = crate::integrals::quadrature::integrate_quadrature(|t| (0.7 * t).exp() * w.eval(t), 1.0, 1e-12)
            .unwrap()
            .value;
        assert!((h_transform(0.7, &w).unwrap() - q).abs() < 1e-12);
    }
}
