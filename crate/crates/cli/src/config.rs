//! `bounds` configuration document.

use serde::{Deserialize, Serialize};
use vclab_core::bounds::{FormulaId, ProblemDims};

/// `bounds` command: formulas evaluated at `dims`, or at every point of `grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub formulas: Vec<FormulaId>,
    #[serde(default)]
    pub dims: ProblemDims,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<BoundsGrid>,
}

/// Sweep ranges; integer ranges are inclusive `[lo, hi]`, real axes are explicit lists.
/// Grid points are visited with `n` outermost, then `k`, `gamma`, `eps`, `delta`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<[u64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<[u64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<f64>>,
}
