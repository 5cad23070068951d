//! Constructions that interpolate through a well-conditioned matrix `[h_j(λ_i)]`.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derived_rng, h_transform, DichotomyPattern, PointSet, ShatterReport, Witness};
use crate::bounds::axis_shatter_bound;
use crate::error::ShatterError;
use crate::response::{eigen_row, response_full, sign_observe, BasisFamily, ControlMatrix, FullSystemParams};

/// Largest accepted interpolation residual.
pub const RESIDUAL_LIMIT: f64 = 1e-8;
/// Outputs within `m' ×` this band of zero are read as exact zeros on zero-target rows.
pub const AXIS_ZERO_BAND: f64 = 1e-8;
/// Cap on the number of dichotomies a construction will enumerate.
const MAX_DICHOTOMIES: u64 = 1 << 20;

/// Random search settings for a well-conditioned `λ` set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaSearch {
    #[serde(default = "default_range")]
    pub range: (f64, f64),
    #[serde(default = "default_attempts")]
    pub attempts: usize,
    #[serde(default = "default_cond")]
    pub cond_threshold: f64,
    pub seed: u64,
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

impl LambdaSearch {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            range: default_range(),
            attempts: default_attempts(),
            cond_threshold: default_cond(),
            seed,
        }
    }
}

/// `λ_1..λ_k` with the condition number of `[h_j(λ_i)]` and the attempt that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSet {
    pub lambdas: Vec<f64>,
    pub condition: f64,
    pub attempt: usize,
}

/// `H[i][j] = h_j(λ_i)`.
pub fn h_matrix(lambdas: &[f64], family: &BasisFamily) -> Result<DMatrix<f64>, ShatterError> {
    let k = family.len();
    let mut h = DMatrix::zeros(lambdas.len(), k);
    for (i, &l) in lambdas.iter().enumerate() {
        for (j, w) in family.elements().iter().enumerate() {
            h[(i, j)] = h_transform(l, w)?;
        }
    }
    Ok(h)
}

fn condition_number(h: &DMatrix<f64>) -> f64 {
    let sv = h.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 && max.is_finite() {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Samples `λ` sets uniformly from `search.range` until `[h_j(λ_i)]` is well conditioned.
///
/// Attempt `i` draws from its own stream derived from `(seed, i)`; the
/// lowest passing attempt wins, so the result does not depend on scheduling.
pub fn find_rank_k_lambdas(family: &BasisFamily, search: &LambdaSearch) -> Result<LambdaSet, ShatterError> {
    if search.attempts == 0 {
        return Err(ShatterError::Invalid("attempts must be at least 1".into()));
    }
    let (lo, hi) = search.range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(ShatterError::Invalid(format!("invalid lambda range ({lo}, {hi})")));
    }
    if !(search.cond_threshold > 1.0) {
        return Err(ShatterError::Invalid("condition threshold must exceed 1".into()));
    }
    let k = family.len();
    let trial = |attempt: usize| -> Result<LambdaSet, ShatterError> {
        let mut rng = derived_rng(search.seed, attempt as u64);
        let lambdas: Vec<f64> = (0..k).map(|_| rng.gen_range(lo..hi)).collect();
        let condition = condition_number(&h_matrix(&lambdas, family)?);
        Ok(LambdaSet {
            lambdas,
            condition,
            attempt,
        })
    };
    let results: Vec<Result<LambdaSet, ShatterError>> = (0..search.attempts).into_par_iter().map(trial).collect();
    let mut best = f64::INFINITY;
    for r in results {
        let set = r?;
        if set.condition < search.cond_threshold {
            return Ok(set);
        }
        best = best.min(set.condition);
    }
    Err(ShatterError::SearchExhausted {
        attempts: search.attempts,
        best_condition: best,
    })
}

/// System whose modes are `e^{λ_r t}` with coefficients `coeffs[r]`, single input and output.
fn real_mode_system(lambdas: &[f64], coeffs: &[f64]) -> Result<FullSystemParams, ShatterError> {
    let n = lambdas.len();
    let mut flat = vec![0.0; n * 2 * n];
    for (r, &c) in coeffs.iter().enumerate() {
        // ℓ = 0 is the power-0 cosine slot, which is e^{at} when b = 0
        flat[r * 2 * n] = c;
    }
    let table = lambdas.iter().map(|&l| eigen_row(l, 0.0)).collect();
    Ok(FullSystemParams::from_flat(1, n, 1, flat, table, vec![0.0])?)
}

fn solve(h: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<(DVector<f64>, f64), ShatterError> {
    let x = h
        .clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| ShatterError::Invalid("interpolation matrix is singular".into()))?;
    let residual = (h * &x - rhs).amax();
    Ok((x, residual))
}

fn bits_of(mask: u64, width: usize) -> Vec<bool> {
    (0..width).map(|i| mask >> i & 1 == 1).collect()
}

/// Axis shattering through the interpolation system `H g = target`.
///
/// The `k` rank-`k` points are split into `m' = min{n, k}` blocks of size
/// `⌊k/m'⌋`. For each block `s` and each labelling `φ` of it, `g` solves
/// `H g = φ` on block `s` and `0` on every other row; the sign of
/// `Σ_s Σ_j g_j h_j(x_s)` is then checked at every grid point
/// `(x_1, …, x_{m'}) ∈ L_1 × … × L_{m'}` by evaluating the response map.
pub fn axis_shatter_construct(
    n: usize,
    family: &BasisFamily,
    search: &LambdaSearch,
) -> Result<ShatterReport, ShatterError> {
    if n == 0 {
        return Err(ShatterError::Invalid("n must be at least 1".into()));
    }
    let k = family.len();
    let mp = n.min(k);
    let block = k / mp;
    let dichotomies = (mp as u64).saturating_mul(1u64.checked_shl(block as u32).unwrap_or(u64::MAX));
    let grid_size = (block as u64).checked_pow(mp as u32).unwrap_or(u64::MAX);
    if dichotomies > MAX_DICHOTOMIES || dichotomies.saturating_mul(grid_size) > MAX_DICHOTOMIES * 64 {
        return Err(ShatterError::Invalid(format!(
            "axis construction with n = {n}, k = {k} needs {dichotomies} dichotomies over {grid_size} grid points"
        )));
    }
    let set = find_rank_k_lambdas(family, search)?;
    let h = h_matrix(&set.lambdas, family)?;
    let blocks: Vec<Vec<usize>> = (0..mp).map(|s| (s * block..(s + 1) * block).collect()).collect();

    // every grid point as one index into each block
    let mut grid: Vec<Vec<usize>> = vec![vec![]];
    for b in &blocks {
        grid = grid
            .into_iter()
            .flat_map(|p| {
                b.iter().map(move |&i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    let zero_band = mp as f64 * AXIS_ZERO_BAND;

    let mut patterns = BTreeSet::new();
    let mut witnesses = BTreeMap::new();
    let mut failures = Vec::new();
    for (s, b) in blocks.iter().enumerate() {
        for mask in 0..(1u64 << block) {
            let phi = bits_of(mask, block);
            let mut target = DVector::zeros(k);
            for (pos, &row) in b.iter().enumerate() {
                target[row] = if phi[pos] { 1.0 } else { 0.0 };
            }
            let (g, residual) = solve(&h, &target)?;
            let pattern = DichotomyPattern::on_axis(s, phi.clone());
            if residual > RESIDUAL_LIMIT {
                failures.push(format!("{pattern}: residual {residual:e}"));
                continue;
            }
            let control = ControlMatrix::row(g.as_slice())?;
            let mut realized = true;
            let mut outputs = Vec::with_capacity(grid.len());
            for point in &grid {
                let lambdas: Vec<f64> = point.iter().map(|&i| set.lambdas[i]).collect();
                let sys = real_mode_system(&lambdas, &vec![1.0; mp])?;
                let y = response_full(&sys, &control, family, 1.0)?[0];
                let y = if y.abs() <= zero_band { 0.0 } else { y };
                outputs.push(y);
                let pos = b.iter().position(|&i| i == point[s]).expect("grid point lies in block");
                if sign_observe(&[y])[0] != phi[pos] {
                    realized = false;
                }
            }
            if realized {
                patterns.insert(pattern.clone());
                witnesses.insert(
                    pattern,
                    Witness {
                        params: g.as_slice().to_vec(),
                        outputs,
                        levels: None,
                        residual: Some(residual),
                        label: None,
                    },
                );
            } else {
                failures.push(format!("{pattern}: grid signs disagree"));
            }
        }
    }
    let complete = patterns.len() as u64 == dichotomies;
    let sizes = vec![block as u64; mp];
    let value = axis_shatter_bound(&sizes)? as f64;
    let mut notes = vec![
        format!(
            "lambda search attempt {} with condition number {:e}",
            set.attempt, set.condition
        ),
        format!(
            "blocks of size {block}; {} lambda values left unused by the grid",
            k - block * mp
        ),
        format!("outputs with |y| <= {zero_band:e} on zero-target rows read as 0"),
    ];
    notes.extend(failures);
    Ok(ShatterReport {
        construction: "axis".into(),
        points: PointSet {
            description: format!("grid L_1 x ... x L_{mp} of eigenvalue parameters; coordinates list each block"),
            coordinates: blocks
                .iter()
                .map(|b| b.iter().map(|&i| set.lambdas[i]).collect())
                .collect(),
        },
        d: block * mp,
        patterns_found: patterns,
        target_patterns: dichotomies,
        complete,
        witnesses,
        indeterminate_count: 0,
        certified_value: complete.then_some(value),
        shared_params: set.lambdas.clone(),
        notes,
    })
}

/// Which hyperplane reduction to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HyperplaneMode {
    /// `k ≤ n`: points are the unit controls `e_j`; the system solves `Hᵀβ = γ`.
    KLeN,
    /// `n ≤ k`: points are controls with `H g = e_s`; the system takes `β = ±1`.
    NLeK,
}

/// Realizes every labelling of `min{n, k}` canonical control vectors.
pub fn hyperplane_lower_witness(
    mode: HyperplaneMode,
    n: usize,
    family: &BasisFamily,
    search: &LambdaSearch,
) -> Result<ShatterReport, ShatterError> {
    let k = family.len();
    if n == 0 {
        return Err(ShatterError::Invalid("n must be at least 1".into()));
    }
    match mode {
        HyperplaneMode::KLeN if k > n => {
            return Err(ShatterError::Invalid(format!(
                "k <= n mode needs k <= n, got k = {k}, n = {n}"
            )))
        }
        HyperplaneMode::NLeK if n > k => {
            return Err(ShatterError::Invalid(format!(
                "n <= k mode needs n <= k, got n = {n}, k = {k}"
            )))
        }
        _ => {}
    }
    let d = n.min(k);
    if d > 20 {
        return Err(ShatterError::Invalid(format!(
            "2^{d} dichotomies is too many to enumerate"
        )));
    }
    let set = find_rank_k_lambdas(family, search)?;
    let h = h_matrix(&set.lambdas, family)?;

    // canonical points in control space
    let points: Vec<Vec<f64>> = match mode {
        HyperplaneMode::KLeN => (0..k)
            .map(|j| (0..k).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
            .collect(),
        HyperplaneMode::NLeK => {
            let mut pts = Vec::with_capacity(n);
            for s in 0..n {
                let mut e = DVector::zeros(k);
                e[s] = 1.0;
                let (g, residual) = solve(&h, &e)?;
                if residual > RESIDUAL_LIMIT {
                    return Err(ShatterError::Invalid(format!(
                        "canonical point {s} has interpolation residual {residual:e}"
                    )));
                }
                pts.push(g.as_slice().to_vec());
            }
            pts
        }
    };
    // the system uses the first `d` eigenvalues of the rank-k set (KLeN) or the first n (NLeK)
    let modes: Vec<f64> = set.lambdas[..d].to_vec();
    let ht = h.rows(0, d).transpose();

    let mut patterns = BTreeSet::new();
    let mut witnesses = BTreeMap::new();
    let mut failures = Vec::new();
    for mask in 0..(1u64 << d) {
        let phi = bits_of(mask, d);
        let signs = DVector::from_iterator(d, phi.iter().map(|&b| if b { 1.0 } else { -1.0 }));
        let (beta, residual) = match mode {
            HyperplaneMode::KLeN => solve(&ht.clone_owned(), &signs)?,
            HyperplaneMode::NLeK => (signs.clone(), 0.0),
        };
        let pattern = DichotomyPattern::new(phi.clone());
        if residual > RESIDUAL_LIMIT {
            failures.push(format!("{pattern}: residual {residual:e}"));
            continue;
        }
        let sys = real_mode_system(&modes, beta.as_slice())?;
        let mut outputs = Vec::with_capacity(d);
        for p in &points {
            outputs.push(response_full(&sys, &ControlMatrix::row(p)?, family, 1.0)?[0]);
        }
        if sign_observe(&outputs) == phi {
            patterns.insert(pattern.clone());
            witnesses.insert(
                pattern,
                Witness {
                    params: beta.as_slice().to_vec(),
                    outputs,
                    levels: None,
                    residual: Some(residual),
                    label: None,
                },
            );
        } else {
            failures.push(format!("{pattern}: signs disagree"));
        }
    }
    let target = 1u64 << d;
    let complete = patterns.len() as u64 == target;
    let mut notes = vec![format!(
        "lambda search attempt {} with condition number {:e}",
        set.attempt, set.condition
    )];
    notes.extend(failures);
    Ok(ShatterReport {
        construction: match mode {
            HyperplaneMode::KLeN => "hyperplane-kln".into(),
            HyperplaneMode::NLeK => "hyperplane-nlk".into(),
        },
        points: PointSet {
            description: format!("{d} canonical control vectors g in R^{k}"),
            coordinates: points,
        },
        d,
        patterns_found: patterns,
        target_patterns: target,
        complete,
        witnesses,
        indeterminate_count: 0,
        certified_value: complete.then_some(d as f64),
        shared_params: modes,
        notes,
    })
}

/// Re-evaluates the witnesses of an `axis` or `hyperplane-*` report against `family`.
pub fn recheck_linear(report: &ShatterReport, family: &BasisFamily) -> Result<(), String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    match report.construction.as_str() {
        "axis" => {
            let blocks = &report.points.coordinates;
            let mp = blocks.len();
            let zero_band = mp as f64 * AXIS_ZERO_BAND;
            let mut grid: Vec<Vec<(usize, f64)>> = vec![vec![]];
            for b in blocks {
                grid = grid
                    .into_iter()
                    .flat_map(|p| {
                        b.iter().enumerate().map(move |(i, &l)| {
                            let mut q = p.clone();
                            q.push((i, l));
                            q
                        })
                    })
                    .collect();
            }
            for (pattern, w) in &report.witnesses {
                let s = pattern.axis.ok_or("axis witness without axis")?;
                let control = ControlMatrix::row(&w.params).map_err(|e| err(&e))?;
                for point in &grid {
                    let lambdas: Vec<f64> = point.iter().map(|&(_, l)| l).collect();
                    let sys = real_mode_system(&lambdas, &vec![1.0; mp]).map_err(|e| err(&e))?;
                    let y = response_full(&sys, &control, family, 1.0).map_err(|e| err(&e))?[0];
                    let y = if y.abs() <= zero_band { 0.0 } else { y };
                    if (y > 0.0) != pattern.bits[point[s].0] {
                        return Err(format!("witness for {pattern} fails at grid point {lambdas:?}"));
                    }
                }
            }
            Ok(())
        }
        "hyperplane-kln" | "hyperplane-nlk" => {
            let d = report.d;
            let modes = &report.shared_params;
            if modes.len() != d {
                return Err("mode count does not match d".into());
            }
            for (pattern, w) in &report.witnesses {
                let sys = real_mode_system(modes, &w.params).map_err(|e| err(&e))?;
                let mut outs = Vec::with_capacity(d);
                for p in &report.points.coordinates {
                    let g = ControlMatrix::row(p).map_err(|e| err(&e))?;
                    outs.push(response_full(&sys, &g, family, 1.0).map_err(|e| err(&e))?[0]);
                }
                if sign_observe(&outs) != pattern.bits {
                    return Err(format!("witness for {pattern} re-evaluates differently"));
                }
            }
            Ok(())
        }
        other => Err(format!("not a linear construction: {other}")),
    }
}
