//! PAC-learning experiment: randomized empirical-risk minimization over a
//! compact system class, compared against the sample-complexity bound.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{fmt_real, invert_sample_complexity_concept, vc_upper_scalar};
use crate::error::LearnError;
use crate::response::{precompute_lambda, BasisFamily, CompactSystemParams, JordanTag, LambdaTable};
use crate::rng::derived_rng;
use crate::schema::SystemDoc;

/// Column order of [`ExperimentResult::to_csv`].
pub const LEARN_CSV_HEADER: [&str; 8] = [
    "s",
    "trial",
    "train_error",
    "test_error",
    "test_error_halfwidth",
    "consistent",
    "evaluations",
    "bound_eps",
];

/// Randomized search settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErmConfig {
    /// Candidate hypotheses evaluated per trial.
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Share of the budget spent perturbing the incumbent instead of sampling uniformly.
    #[serde(default = "default_refine_fraction")]
    pub refine_fraction: f64,
    /// Initial half-width of the perturbation box; it shrinks linearly to 5% of this.
    #[serde(default = "default_refine_radius")]
    pub refine_radius: f64,
}

fn default_budget() -> usize {
    2000
}
fn default_refine_fraction() -> f64 {
    0.5
}
fn default_refine_radius() -> f64 {
    0.25
}
fn default_half_width() -> f64 {
    1.0
}
fn default_test_size() -> usize {
    10_000
}
fn default_delta() -> f64 {
    0.05
}

impl Default for ErmConfig {
    fn default() -> Self {
        Self {
            budget: default_budget(),
            refine_fraction: default_refine_fraction(),
            refine_radius: default_refine_radius(),
        }
    }
}

/// Experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnConfig {
    /// Scalar-output system that labels the controls.
    pub target: SystemDoc,
    /// Jordan structure of the hypothesis class.
    pub hypothesis_tag: JordanTag,
    /// Control entries are drawn i.i.d. uniform on `[-half_width, half_width]`.
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    pub sizes: Vec<usize>,
    pub trials: usize,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default)]
    pub erm: ErmConfig,
    /// Confidence of the bound curve.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// One `(s, trial)` outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub s: usize,
    pub trial: usize,
    pub train_error: f64,
    /// Error rate on the fresh test sample (an estimate of the true error).
    pub test_error: f64,
    /// 95% normal-approximation half-width of `test_error`.
    pub test_error_halfwidth: f64,
    /// Whether the returned hypothesis agrees with every training label.
    pub consistent: bool,
    pub evaluations: usize,
    /// `ε` at which the sample-complexity bound equals `s`; above 1 means vacuous.
    pub bound_eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub vc_dimension_bound: f64,
    pub delta: f64,
    pub seed: u64,
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentResult {
    /// CSV with LF line endings and 17 significant digits for reals.
    pub fn to_csv(&self) -> String {
        let mut out = LEARN_CSV_HEADER.join(",");
        out.push('\n');
        for r in &self.rows {
            let fields = [
                r.s.to_string(),
                r.trial.to_string(),
                fmt_real(r.train_error),
                fmt_real(r.test_error),
                fmt_real(r.test_error_halfwidth),
                r.consistent.to_string(),
                r.evaluations.to_string(),
                fmt_real(r.bound_eps),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// Median test error for each sample size, in row order.
    pub fn median_test_errors(&self) -> Vec<(usize, f64)> {
        let mut sizes: Vec<usize> = Vec::new();
        for r in &self.rows {
            if !sizes.contains(&r.s) {
                sizes.push(r.s);
            }
        }
        sizes
            .into_iter()
            .map(|s| {
                let mut v: Vec<f64> = self.rows.iter().filter(|r| r.s == s).map(|r| r.test_error).collect();
                v.sort_by(f64::total_cmp);
                let mid = v.len() / 2;
                let med = if v.len() % 2 == 1 {
                    v[mid]
                } else {
                    0.5 * (v[mid - 1] + v[mid])
                };
                (s, med)
            })
            .collect()
    }
}

struct Sample {
    g: Vec<Vec<f64>>,
    labels: Vec<bool>,
}

fn draw_sample(rng: &mut ChaCha8Rng, target: &LambdaTable, count: usize, half_width: f64) -> Sample {
    let dim = target.m * target.k;
    let g: Vec<Vec<f64>> = (0..count)
        .map(|_| (0..dim).map(|_| rng.gen_range(-half_width..=half_width)).collect())
        .collect();
    let labels = g.iter().map(|x| target.evaluate(x) > 0.0).collect();
    Sample { g, labels }
}

fn mistakes(table: &LambdaTable, sample: &Sample) -> usize {
    sample
        .g
        .iter()
        .zip(&sample.labels)
        .filter(|(x, &l)| (table.evaluate(x) > 0.0) != l)
        .count()
}

struct Fit {
    table: LambdaTable,
    mistakes: usize,
    evaluations: usize,
}

const PARAM_LIMIT: f64 = 1.0 - 1e-9;

fn erm(
    rng: &mut ChaCha8Rng,
    m: usize,
    tag: &JordanTag,
    family: &BasisFamily,
    tau: f64,
    train: &Sample,
    cfg: &ErmConfig,
) -> Result<Fit, LearnError> {
    let dim = tag.dimension() * (m + 1);
    let refine = ((cfg.budget as f64) * cfg.refine_fraction).round() as usize;
    let explore = cfg.budget - refine.min(cfg.budget);
    let mut best: Option<(Vec<f64>, Fit)> = None;
    for step in 0..cfg.budget {
        let theta: Vec<f64> = match &best {
            Some((inc, _)) if step >= explore => {
                let progress = (step - explore) as f64 / refine.max(1) as f64;
                let radius = cfg.refine_radius * (1.0 - 0.95 * progress);
                inc.iter()
                    .map(|&x| (x + rng.gen_range(-radius..=radius)).clamp(-PARAM_LIMIT, PARAM_LIMIT))
                    .collect()
            }
            _ => (0..dim).map(|_| rng.gen_range(-PARAM_LIMIT..=PARAM_LIMIT)).collect(),
        };
        let params = CompactSystemParams::from_vector(m, &theta, tag.clone())?;
        let table = precompute_lambda(&params.into(), family, tau)?;
        let errs = mistakes(&table, train);
        let better = best.as_ref().is_none_or(|(_, f)| errs < f.mistakes);
        if better {
            best = Some((
                theta,
                Fit {
                    table,
                    mistakes: errs,
                    evaluations: 0,
                },
            ));
        }
        if errs == 0 {
            let (_, mut fit) = best.expect("set above");
            fit.evaluations = step + 1;
            return Ok(fit);
        }
    }
    let (_, mut fit) = best.ok_or_else(|| LearnError::Config("ERM budget must be at least 1".into()))?;
    fit.evaluations = cfg.budget;
    Ok(fit)
}

fn validate(cfg: &LearnConfig) -> Result<u64, LearnError> {
    let seed = cfg
        .seed
        .ok_or_else(|| LearnError::Config("a seed is required for randomized experiments".into()))?;
    if cfg.sizes.is_empty() || cfg.sizes.contains(&0) {
        return Err(LearnError::Config(
            "sizes must be a nonempty list of positive integers".into(),
        ));
    }
    let mut distinct = cfg.sizes.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != cfg.sizes.len() {
        return Err(LearnError::Config("sizes must not repeat".into()));
    }
    if cfg.trials == 0 || cfg.test_size == 0 || cfg.erm.budget == 0 {
        return Err(LearnError::Config(
            "trials, test_size and erm.budget must be positive".into(),
        ));
    }
    if !(cfg.half_width.is_finite() && cfg.half_width > 0.0) {
        return Err(LearnError::Config(format!(
            "half_width must be positive, got {}",
            cfg.half_width
        )));
    }
    if !(0.0..=1.0).contains(&cfg.erm.refine_fraction) || !(cfg.erm.refine_radius > 0.0) {
        return Err(LearnError::Config(
            "erm.refine_fraction must lie in [0, 1] and erm.refine_radius be positive".into(),
        ));
    }
    if cfg.hypothesis_tag.0.is_empty() {
        return Err(LearnError::Config(
            "hypothesis_tag must name at least one eigenvalue slot".into(),
        ));
    }
    Ok(seed)
}

/// Runs every `(s, trial)` pair; rows are sorted by `(s, trial)`.
pub fn run_experiment(cfg: &LearnConfig) -> Result<ExperimentResult, LearnError> {
    let seed = validate(cfg)?;
    let spec = cfg
        .target
        .clone()
        .validate()
        .map_err(|e| LearnError::Config(format!("target.{e}")))?;
    let tau = cfg.tau.or(spec.tau).unwrap_or(1.0);
    let family = spec.family;
    let target = precompute_lambda(&spec.params, &family, tau)?;
    let m = target.m;
    let n = cfg.hypothesis_tag.dimension();
    let d = vc_upper_scalar(n as u64, m as u64, family.len() as u64, family.ell_max() as u64)?;

    let jobs: Vec<(usize, usize, usize)> = cfg
        .sizes
        .iter()
        .enumerate()
        .flat_map(|(si, &s)| (0..cfg.trials).map(move |t| (si, s, t)))
        .collect();
    let rows: Vec<Result<ExperimentRow, LearnError>> = jobs
        .par_iter()
        .map(|&(si, s, trial)| {
            let mut rng = derived_rng(seed, (si * cfg.trials + trial) as u64);
            let train = draw_sample(&mut rng, &target, s, cfg.half_width);
            let test = draw_sample(&mut rng, &target, cfg.test_size, cfg.half_width);
            let fit = erm(&mut rng, m, &cfg.hypothesis_tag, &family, tau, &train, &cfg.erm)?;
            let test_error = mistakes(&fit.table, &test) as f64 / cfg.test_size as f64;
            Ok(ExperimentRow {
                s,
                trial,
                train_error: fit.mistakes as f64 / s as f64,
                test_error,
                test_error_halfwidth: 1.96 * (test_error * (1.0 - test_error) / cfg.test_size as f64).sqrt(),
                consistent: fit.mistakes == 0,
                evaluations: fit.evaluations,
                bound_eps: invert_sample_complexity_concept(d.max(1.0), cfg.delta, s as f64)?,
            })
        })
        .collect();
    let mut rows: Vec<ExperimentRow> = rows.into_iter().collect::<Result<_, _>>()?;
    rows.sort_by_key(|r| (r.s, r.trial));
    Ok(ExperimentResult {
        vc_dimension_bound: d,
        delta: cfg.delta,
        seed,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(offset: f64, sizes: Vec<usize>) -> LearnConfig {
        let target = format!(
            r#"{{"basis": [{{"ell":0,"alpha":0.0,"beta":3.141592653589793,"kind":"sin"}},
                          {{"ell":0,"alpha":0.0,"beta":6.283185307179586,"kind":"sin"}}],
                "coeffs": [[[[0.8],[0.0]]]], "eigen_table": [[-0.5, 0.0, 0.6065306597126334, 0.0]],
                "offset": [{offset}]}}"#
        );
        LearnConfig {
            target: serde_json::from_str(&target).unwrap(),
            hypothesis_tag: JordanTag::all_real(1),
            half_width: 1.0,
            sizes,
            trials: 3,
            test_size: 500,
            erm: ErmConfig {
                budget: 200,
                ..ErmConfig::default()
            },
            delta: 0.05,
            tau: None,
            seed: Some(5),
        }
    }

    #[test]
    fn constant_concept_is_fit_at_one_sample() {
        let r = run_experiment(&config(1e6, vec![1])).unwrap();
        assert!(r.rows.iter().all(|row| row.consistent && row.train_error == 0.0));
    }

    #[test]
    fn realizable_target_is_learned() {
        let r = run_experiment(&config(0.0, vec![20])).unwrap();
        for row in &r.rows {
            assert!(row.consistent);
            assert!(row.test_error <= 0.2, "{row:?}");
        }
    }

    #[test]
    fn csv_is_ordered_and_reproducible() {
        let cfg = config(0.0, vec![5, 2]);
        let a = run_experiment(&cfg).unwrap();
        assert_eq!(a.to_csv(), run_experiment(&cfg).unwrap().to_csv());
        let order: Vec<(usize, usize)> = a.rows.iter().map(|r| (r.s, r.trial)).collect();
        assert_eq!(order, vec![(2, 0), (2, 1), (2, 2), (5, 0), (5, 1), (5, 2)]);
        assert!(a.to_csv().starts_with("s,trial,train_error"));
    }

    #[test]
    fn seed_is_mandatory() {
        let mut cfg = config(0.0, vec![5]);
        cfg.seed = None;
        assert!(matches!(run_experiment(&cfg), Err(LearnError::Config(_))));
    }
}
