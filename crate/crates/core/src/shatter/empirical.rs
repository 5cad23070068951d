//! Randomized certificate searches for VC and fat-shattering lower bounds.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derived_rng, DichotomyPattern, PointSet, ShatterReport, Witness};
use crate::error::ShatterError;
use crate::response::{response_compact, BasisFamily, CompactSystemParams, ControlMatrix, JordanTag};

/// Number of independent sampling streams; the budget is split evenly across them.
pub const EMPIRICAL_CHUNKS: usize = 8;

/// A parameterised real-valued function class with a sampling distribution.
pub trait ParamFamily: Sync {
    fn name(&self) -> String;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
    fn eval(&self, params: &[f64], point: &[f64]) -> Result<f64, ShatterError>;
}

/// Half-spaces through the origin, `x ↦ sign(w·x)` with `w` uniform in `[-1, 1]^dim`.
#[derive(Debug, Clone, Copy)]
pub struct HalfspaceFamily {
    pub dim: usize,
}

impl ParamFamily for HalfspaceFamily {
    fn name(&self) -> String {
        format!("halfspace(dim={})", self.dim)
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }
    fn eval(&self, params: &[f64], point: &[f64]) -> Result<f64, ShatterError> {
        dot(params, point)
    }
}

/// Linear functions `g ↦ w·g` with `w` uniform in `[-scale, scale]^dim`.
#[derive(Debug, Clone, Copy)]
pub struct LinearFamily {
    pub dim: usize,
    pub scale: f64,
}

impl ParamFamily for LinearFamily {
    fn name(&self) -> String {
        format!("linear(dim={}, scale={})", self.dim, self.scale)
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.dim).map(|_| rng.gen_range(-self.scale..self.scale)).collect()
    }
    fn eval(&self, params: &[f64], point: &[f64]) -> Result<f64, ShatterError> {
        dot(params, point)
    }
}

/// Constant functions with value uniform in `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantFamily {
    pub lo: f64,
    pub hi: f64,
}

impl ParamFamily for ConstantFamily {
    fn name(&self) -> String {
        format!("constant([{}, {}])", self.lo, self.hi)
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        vec![if self.lo < self.hi {
            rng.gen_range(self.lo..=self.hi)
        } else {
            self.lo
        }]
    }
    fn eval(&self, params: &[f64], _point: &[f64]) -> Result<f64, ShatterError> {
        Ok(params[0])
    }
}

/// Single-input compact systems; a point is a control row `g`, the value is `y(τ)`.
#[derive(Debug, Clone)]
pub struct ControlSystemFamily {
    pub family: BasisFamily,
    pub tag: JordanTag,
    pub tau: f64,
}

impl ParamFamily for ControlSystemFamily {
    fn name(&self) -> String {
        format!("control_system(n={}, k={})", self.tag.dimension(), self.family.len())
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        // open interval (-1, 1)
        (0..2 * self.tag.dimension())
            .map(|_| loop {
                let x: f64 = rng.gen_range(-1.0..1.0);
                if x > -1.0 {
                    break x;
                }
            })
            .collect()
    }
    fn eval(&self, params: &[f64], point: &[f64]) -> Result<f64, ShatterError> {
        let sys = CompactSystemParams::from_vector(1, params, self.tag.clone())?;
        Ok(response_compact(
            &sys,
            &ControlMatrix::row(point)?,
            &self.family,
            self.tau,
        )?)
    }
}

fn dot(a: &[f64], b: &[f64]) -> Result<f64, ShatterError> {
    if a.len() != b.len() {
        return Err(ShatterError::Invalid(format!(
            "point has dimension {}, parameters have {}",
            b.len(),
            a.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x * y).sum())
}

fn chunk_budget(budget: usize, chunk: usize) -> usize {
    budget / EMPIRICAL_CHUNKS + usize::from(chunk < budget % EMPIRICAL_CHUNKS)
}

fn check_points(points: &[Vec<f64>]) -> Result<usize, ShatterError> {
    let d = points.len();
    if d == 0 {
        return Err(ShatterError::Invalid("point set is empty".into()));
    }
    if d > 20 {
        return Err(ShatterError::Invalid(format!(
            "{d} points give too many dichotomies to track"
        )));
    }
    Ok(d)
}

/// Parameters paired with the outputs they produce on the tested points.
type Sample = (Vec<f64>, Vec<f64>);

/// Samples parameters and records which sign patterns `1[f(x) > 0]` appear on `points`.
///
/// `complete = true` is a shattering certificate; `false` proves nothing.
pub fn empirical_vc_lower(
    evaluator: &dyn ParamFamily,
    points: &[Vec<f64>],
    budget: usize,
    seed: u64,
) -> Result<ShatterReport, ShatterError> {
    if budget == 0 {
        return Err(ShatterError::Invalid("budget must be at least 1".into()));
    }
    let d = check_points(points)?;
    let target = 1u64 << d;
    let chunks: Vec<Result<BTreeMap<DichotomyPattern, Witness>, ShatterError>> = (0..EMPIRICAL_CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut rng = derived_rng(seed, c as u64);
            let mut found = BTreeMap::new();
            for _ in 0..chunk_budget(budget, c) {
                let params = evaluator.sample(&mut rng);
                let outputs = points
                    .iter()
                    .map(|x| evaluator.eval(&params, x))
                    .collect::<Result<Vec<f64>, _>>()?;
                let pattern = DichotomyPattern::new(outputs.iter().map(|&y| y > 0.0).collect());
                found.entry(pattern).or_insert(Witness {
                    params,
                    outputs,
                    levels: None,
                    residual: None,
                    label: None,
                });
                if found.len() as u64 == target {
                    break;
                }
            }
            Ok(found)
        })
        .collect();
    let mut witnesses = BTreeMap::new();
    for chunk in chunks {
        for (p, w) in chunk? {
            witnesses.entry(p).or_insert(w);
        }
    }
    let patterns: BTreeSet<DichotomyPattern> = witnesses.keys().cloned().collect();
    let complete = patterns.len() as u64 == target;
    let note = if complete {
        format!("certificate: all {target} patterns realized (budget {budget}, seed {seed})")
    } else {
        format!(
            "inconclusive: {} of {target} patterns found (budget {budget}, seed {seed})",
            patterns.len()
        )
    };
    Ok(ShatterReport {
        construction: "empirical-vc".into(),
        points: PointSet {
            description: format!("{d} points, class {}", evaluator.name()),
            coordinates: points.to_vec(),
        },
        d,
        patterns_found: patterns,
        target_patterns: target,
        complete,
        witnesses,
        indeterminate_count: 0,
        certified_value: complete.then_some(d as f64),
        shared_params: Vec::new(),
        notes: vec![note],
    })
}

/// Level-search settings for [`empirical_fat_lower`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FatSearch {
    /// Candidate levels per point: `2·grid + 1` evenly spaced values over the observed range.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Passes of coordinate-wise level improvement.
    #[serde(default = "default_rounds")]
    pub rounds: usize,
}

fn default_grid() -> usize {
    16
}
fn default_rounds() -> usize {
    3
}

impl Default for FatSearch {
    fn default() -> Self {
        Self {
            grid: default_grid(),
            rounds: default_rounds(),
        }
    }
}

fn margin_pattern(values: &[f64], levels: &[f64], gamma: f64) -> Option<Vec<bool>> {
    values
        .iter()
        .zip(levels)
        .map(|(&v, &r)| {
            if v >= r + gamma {
                Some(true)
            } else if v <= r - gamma {
                Some(false)
            } else {
                None
            }
        })
        .collect()
}

fn count_patterns(samples: &[Vec<f64>], levels: &[f64], gamma: f64) -> usize {
    samples
        .iter()
        .filter_map(|v| margin_pattern(v, levels, gamma))
        .collect::<BTreeSet<_>>()
        .len()
}

/// Searches jointly for levels `r_x` and parameters with `f(x) ≥ r_x + γ`
/// on 1-bits and `f(x) ≤ r_x − γ` on 0-bits, for every bit pattern.
pub fn empirical_fat_lower(
    evaluator: &dyn ParamFamily,
    points: &[Vec<f64>],
    gamma: f64,
    search: &FatSearch,
    budget: usize,
    seed: u64,
) -> Result<ShatterReport, ShatterError> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(ShatterError::Invalid(format!("gamma must be positive, got {gamma}")));
    }
    if budget == 0 {
        return Err(ShatterError::Invalid("budget must be at least 1".into()));
    }
    let d = check_points(points)?;
    let target = 1u64 << d;

    let chunks: Vec<Result<Vec<Sample>, ShatterError>> = (0..EMPIRICAL_CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut rng = derived_rng(seed, c as u64);
            (0..chunk_budget(budget, c))
                .map(|_| {
                    let params = evaluator.sample(&mut rng);
                    let outs = points
                        .iter()
                        .map(|x| evaluator.eval(&params, x))
                        .collect::<Result<Vec<f64>, _>>()?;
                    Ok((params, outs))
                })
                .collect()
        })
        .collect();
    let mut samples = Vec::with_capacity(budget);
    for c in chunks {
        samples.extend(c?);
    }
    let values: Vec<Vec<f64>> = samples.iter().map(|(_, v)| v.clone()).collect();

    let ranges: Vec<(f64, f64)> = (0..d)
        .map(|x| {
            values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v[x]), hi.max(v[x]))
            })
        })
        .collect();
    let candidates: Vec<Vec<f64>> = ranges
        .iter()
        .map(|&(lo, hi)| {
            let steps = 2 * search.grid.max(1);
            (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect()
        })
        .collect();
    let mut levels: Vec<f64> = ranges.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect();
    let mut best = count_patterns(&values, &levels, gamma);
    for _ in 0..search.rounds {
        let before = best;
        for x in 0..d {
            for &c in &candidates[x] {
                let mut trial = levels.clone();
                trial[x] = c;
                let n = count_patterns(&values, &trial, gamma);
                if n > best {
                    best = n;
                    levels = trial;
                }
            }
        }
        if best as u64 == target || best == before {
            break;
        }
    }

    let mut witnesses = BTreeMap::new();
    for (params, outs) in &samples {
        if let Some(bits) = margin_pattern(outs, &levels, gamma) {
            witnesses.entry(DichotomyPattern::new(bits)).or_insert_with(|| Witness {
                params: params.clone(),
                outputs: outs.clone(),
                levels: Some(levels.clone()),
                residual: None,
                label: None,
            });
        }
    }
    let patterns: BTreeSet<DichotomyPattern> = witnesses.keys().cloned().collect();
    let complete = patterns.len() as u64 == target;
    let note = if complete {
        format!("certificate: fat-shattered at gamma = {gamma} with levels {levels:?}")
    } else {
        format!(
            "inconclusive: {} of {target} patterns found with margin {gamma}",
            patterns.len()
        )
    };
    Ok(ShatterReport {
        construction: "empirical-fat".into(),
        points: PointSet {
            description: format!("{d} points, class {}", evaluator.name()),
            coordinates: points.to_vec(),
        },
        d,
        patterns_found: patterns,
        target_patterns: target,
        complete,
        witnesses,
        indeterminate_count: 0,
        certified_value: complete.then_some(d as f64),
        shared_params: levels,
        notes: vec![note],
    })
}

/// Re-evaluates the witnesses of an `empirical-*` report against `evaluator`.
pub fn recheck_empirical(
    report: &ShatterReport,
    evaluator: &dyn ParamFamily,
    gamma: Option<f64>,
) -> Result<(), String> {
    for (pattern, w) in &report.witnesses {
        let outs = report
            .points
            .coordinates
            .iter()
            .map(|x| evaluator.eval(&w.params, x))
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| e.to_string())?;
        let bits = match (&w.levels, gamma) {
            (Some(levels), Some(g)) => margin_pattern(&outs, levels, g),
            _ => Some(outs.iter().map(|&y| y > 0.0).collect()),
        };
        if bits.as_deref() != Some(pattern.bits.as_slice()) {
            return Err(format!("witness for {pattern} re-evaluates differently"));
        }
    }
    Ok(())
}
