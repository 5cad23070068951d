//! Declarative shattering-verification requests and their dispatch.

use serde::{Deserialize, Serialize};

use crate::error::ShatterError;
use crate::response::{BasisFamily, JordanTag};
use crate::shatter::{
    axis_shatter_construct, empirical_fat_lower, empirical_vc_lower, hyperplane_lower_witness, verify_section7,
    ConstantFamily, ControlSystemFamily, FatSearch, HalfspaceFamily, HyperplaneMode, LambdaSearch, LinearFamily,
    ParamFamily, ShatterReport,
};

fn default_guard() -> f64 {
    crate::shatter::SECTION7_DEFAULT_GUARD
}
fn default_range() -> (f64, f64) {
    (-10.0, 10.0)
}
fn default_attempts() -> usize {
    1000
}
fn default_cond() -> f64 {
    1e8
}

/// Rank-`k` eigenvalue search settings (the seed comes from `--seed` or `seed`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[serde(default = "default_range")]
    pub range: (f64, f64),
    #[serde(default = "default_attempts")]
    pub attempts: usize,
    #[serde(default = "default_cond")]
    pub cond_threshold: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            range: default_range(),
            attempts: default_attempts(),
            cond_threshold: default_cond(),
        }
    }
}

/// Function classes available to the empirical estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    Halfspace {
        dim: usize,
    },
    Linear {
        dim: usize,
        #[serde(default = "one")]
        scale: f64,
    },
    Constant {
        lo: f64,
        hi: f64,
    },
    ControlSystem {
        basis: BasisFamily,
        jordan_tag: JordanTag,
        #[serde(default = "one")]
        tau: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// One verification request, tagged by `construction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", deny_unknown_fields)]
pub enum VerifyConfig {
    #[serde(rename = "section7")]
    Section7 {
        k: usize,
        #[serde(default = "default_guard")]
        guard_scale: f64,
    },
    #[serde(rename = "axis")]
    Axis {
        n: usize,
        basis: BasisFamily,
        #[serde(default)]
        search: SearchConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    #[serde(rename = "hyperplane-kln")]
    HyperplaneKln {
        n: usize,
        basis: BasisFamily,
        #[serde(default)]
        search: SearchConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    #[serde(rename = "hyperplane-nlk")]
    HyperplaneNlk {
        n: usize,
        basis: BasisFamily,
        #[serde(default)]
        search: SearchConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    #[serde(rename = "empirical-vc")]
    EmpiricalVc {
        family: FamilyConfig,
        points: Vec<Vec<f64>>,
        budget: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    #[serde(rename = "empirical-fat")]
    EmpiricalFat {
        family: FamilyConfig,
        points: Vec<Vec<f64>>,
        budget: usize,
        gamma: f64,
        #[serde(default)]
        search: FatSearch,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl VerifyConfig {
    pub fn config_seed(&self) -> Option<u64> {
        match self {
            VerifyConfig::Section7 { .. } => None,
            VerifyConfig::Axis { seed, .. }
            | VerifyConfig::HyperplaneKln { seed, .. }
            | VerifyConfig::HyperplaneNlk { seed, .. }
            | VerifyConfig::EmpiricalVc { seed, .. }
            | VerifyConfig::EmpiricalFat { seed, .. } => *seed,
        }
    }

    pub fn is_randomized(&self) -> bool {
        !matches!(self, VerifyConfig::Section7 { .. })
    }

    pub fn hyperplane_mode(&self) -> Option<HyperplaneMode> {
        match self {
            VerifyConfig::HyperplaneKln { .. } => Some(HyperplaneMode::KLeN),
            VerifyConfig::HyperplaneNlk { .. } => Some(HyperplaneMode::NLeK),
            _ => None,
        }
    }
}

pub fn resolve_seed(cli: Option<u64>, config: Option<u64>) -> Result<u64, ShatterError> {
    cli.or(config).ok_or_else(|| {
        ShatterError::Invalid("this command is randomized and needs an explicit seed (--seed or \"seed\")".into())
    })
}

fn lambda_search(s: SearchConfig, seed: u64) -> LambdaSearch {
    LambdaSearch {
        range: s.range,
        attempts: s.attempts,
        cond_threshold: s.cond_threshold,
        seed,
    }
}

pub fn build_family(cfg: &FamilyConfig) -> Result<Box<dyn ParamFamily>, ShatterError> {
    Ok(match cfg {
        FamilyConfig::Halfspace { dim } => Box::new(HalfspaceFamily { dim: *dim }),
        FamilyConfig::Linear { dim, scale } => Box::new(LinearFamily {
            dim: *dim,
            scale: *scale,
        }),
        FamilyConfig::Constant { lo, hi } => {
            if !(lo <= hi) {
                return Err(ShatterError::Invalid(format!(
                    "family: need lo <= hi, got [{lo}, {hi}]"
                )));
            }
            Box::new(ConstantFamily { lo: *lo, hi: *hi })
        }
        FamilyConfig::ControlSystem { basis, jordan_tag, tau } => {
            if jordan_tag.0.is_empty() || !(tau.is_finite() && *tau > 0.0) {
                return Err(ShatterError::Invalid(
                    "family: jordan_tag must be nonempty and tau positive".into(),
                ));
            }
            Box::new(ControlSystemFamily {
                family: basis.clone(),
                tag: jordan_tag.clone(),
                tau: *tau,
            })
        }
    })
}

fn check_points(points: &[Vec<f64>], family: &FamilyConfig) -> Result<(), ShatterError> {
    let dim = match family {
        FamilyConfig::Halfspace { dim } | FamilyConfig::Linear { dim, .. } => Some(*dim),
        FamilyConfig::ControlSystem { basis, .. } => Some(basis.len()),
        FamilyConfig::Constant { .. } => None,
    };
    for (i, p) in points.iter().enumerate() {
        if let Some(d) = dim {
            if p.len() != d {
                return Err(ShatterError::Invalid(format!(
                    "points[{i}]: expected {d} coordinates, got {}",
                    p.len()
                )));
            }
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(ShatterError::Invalid(format!("points[{i}]: non-finite coordinate")));
        }
    }
    Ok(())
}

/// Runs `cfg`; an explicit `seed` overrides the one in the document.
pub fn run_verify(cfg: &VerifyConfig, cli_seed: Option<u64>) -> Result<ShatterReport, ShatterError> {
    let seed = if cfg.is_randomized() {
        resolve_seed(cli_seed, cfg.config_seed())?
    } else {
        0
    };
    let report = match cfg {
        VerifyConfig::Section7 { k, guard_scale } => verify_section7(*k, *guard_scale)?,
        VerifyConfig::Axis { n, basis, search, .. } => {
            axis_shatter_construct(*n, basis, &lambda_search(*search, seed))?
        }
        VerifyConfig::HyperplaneKln { n, basis, search, .. } | VerifyConfig::HyperplaneNlk { n, basis, search, .. } => {
            let mode = cfg.hyperplane_mode().expect("hyperplane variant");
            hyperplane_lower_witness(mode, *n, basis, &lambda_search(*search, seed))?
        }
        VerifyConfig::EmpiricalVc {
            family, points, budget, ..
        } => {
            check_points(points, family)?;
            empirical_vc_lower(build_family(family)?.as_ref(), points, *budget, seed)?
        }
        VerifyConfig::EmpiricalFat {
            family,
            points,
            budget,
            gamma,
            search,
            ..
        } => {
            check_points(points, family)?;
            empirical_fat_lower(build_family(family)?.as_ref(), points, *gamma, search, *budget, seed)?
        }
    };
    Ok(report)
}
