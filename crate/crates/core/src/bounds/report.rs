//! Uniform report rows for every calculator.

use serde::{Deserialize, Serialize};

use super::*;

/// Inputs shared by all calculators. Each formula reads only the fields it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDims {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub big_m: Option<f64>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_rat: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_rat: Option<u64>,
    /// Parameter-ball radius of the Lipschitz bound.
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Lipschitz constant.
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball: Option<Ball>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounding: Option<Rounding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count_mode: Option<CountMode>,
    /// Parameter count of the Goldberg–Jerrum bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gj_ell: Option<u64>,
    /// Degree of the Goldberg–Jerrum bound and the sign-pattern count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gj_d: Option<u64>,
    /// Polynomial count of the Goldberg–Jerrum bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gj_s: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_vars: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_polys: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vc_dual: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_sizes: Option<Vec<u64>>,
    /// Dimension fed to the sample-complexity formulas.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    /// Accuracy slack of the agnostic bound; defaults to `κε`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

/// Every calculator, named by the quantity it bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    VcUpperScalar,
    VcLower,
    VcUpperVector,
    PdUpper,
    FatLipschitz,
    FatControl,
    FatCombined,
    FatHyperplane,
    SampleComplexityConcept,
    SampleComplexityAgnostic,
    GjBound,
    SignPatternCount,
    PoleFreeCount,
    DualVcLower,
    AxisShatterBound,
    DmaxRat,
    RatVcAbstract,
    XiBasisCount,
}

impl FormulaId {
    pub const ALL: [FormulaId; 18] = [
        FormulaId::VcUpperScalar,
        FormulaId::VcLower,
        FormulaId::VcUpperVector,
        FormulaId::PdUpper,
        FormulaId::FatLipschitz,
        FormulaId::FatControl,
        FormulaId::FatCombined,
        FormulaId::FatHyperplane,
        FormulaId::SampleComplexityConcept,
        FormulaId::SampleComplexityAgnostic,
        FormulaId::GjBound,
        FormulaId::SignPatternCount,
        FormulaId::PoleFreeCount,
        FormulaId::DualVcLower,
        FormulaId::AxisShatterBound,
        FormulaId::DmaxRat,
        FormulaId::RatVcAbstract,
        FormulaId::XiBasisCount,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FormulaId::VcUpperScalar => "vc_upper_scalar",
            FormulaId::VcLower => "vc_lower",
            FormulaId::VcUpperVector => "vc_upper_vector",
            FormulaId::PdUpper => "pd_upper",
            FormulaId::FatLipschitz => "fat_lipschitz",
            FormulaId::FatControl => "fat_control",
            FormulaId::FatCombined => "fat_combined",
            FormulaId::FatHyperplane => "fat_hyperplane",
            FormulaId::SampleComplexityConcept => "sample_complexity_concept",
            FormulaId::SampleComplexityAgnostic => "sample_complexity_agnostic",
            FormulaId::GjBound => "gj_bound",
            FormulaId::SignPatternCount => "sign_pattern_count",
            FormulaId::PoleFreeCount => "pole_free_count",
            FormulaId::DualVcLower => "dual_vc_lower",
            FormulaId::AxisShatterBound => "axis_shatter_bound",
            FormulaId::DmaxRat => "dmax_rat",
            FormulaId::RatVcAbstract => "rat_vc_abstract",
            FormulaId::XiBasisCount => "xi_basis_count",
        }
    }
}

impl std::fmt::Display for FormulaId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FormulaId {
    type Err = BoundsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FormulaId::ALL
            .iter()
            .copied()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| BoundsError::InvalidArgument {
                field: "formula_id",
                reason: format!("unknown formula `{s}`"),
            })
    }
}

/// One evaluated formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub formula_id: FormulaId,
    pub value: f64,
    pub ceil_value: f64,
    pub inputs: ProblemDims,
    pub notes: Vec<String>,
}

impl BoundReport {
    fn new(formula_id: FormulaId, value: f64, inputs: ProblemDims, notes: Vec<String>) -> Self {
        Self {
            formula_id,
            value,
            ceil_value: value.ceil(),
            inputs,
            notes,
        }
    }

    /// Fields in [`CSV_HEADER`] order. Reals carry 17 significant digits.
    pub fn csv_fields(&self) -> Vec<String> {
        let i = &self.inputs;
        let int = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        let real = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
        let tag = |v: Option<String>| v.unwrap_or_default();
        let enum_str = |v: Option<String>| v.map(|s| s.trim_matches('"').to_string());
        vec![
            self.formula_id.to_string(),
            fmt_real(self.value),
            fmt_real(self.ceil_value),
            int(i.n),
            int(i.m),
            int(i.p),
            int(i.k),
            int(i.ell_max),
            real(i.tau),
            real(i.big_m),
            real(i.radius),
            real(i.gamma),
            real(i.eps),
            real(i.delta),
            real(i.kappa),
            int(i.h_rat),
            int(i.d_rat),
            real(i.c),
            real(i.lipschitz),
            tag(enum_str(i.ball.map(|b| serde_json::to_string(&b).unwrap_or_default()))),
            tag(enum_str(
                i.rounding.map(|b| serde_json::to_string(&b).unwrap_or_default()),
            )),
            tag(enum_str(
                i.count_mode.map(|b| serde_json::to_string(&b).unwrap_or_default()),
            )),
            int(i.gj_ell),
            int(i.gj_d),
            int(i.gj_s),
            int(i.n_vars),
            int(i.m_polys),
            int(i.vc_dual),
            i.axis_sizes
                .as_ref()
                .map(|v| v.iter().map(u64::to_string).collect::<Vec<_>>().join(";"))
                .unwrap_or_default(),
            real(i.d),
            real(i.alpha),
            self.notes.join(";"),
        ]
    }
}

/// CSV column order for [`BoundReport::csv_fields`].
pub const CSV_HEADER: [&str; 32] = [
    "formula_id",
    "value",
    "ceil_value",
    "n",
    "m",
    "p",
    "k",
    "ell_max",
    "tau",
    "M",
    "R",
    "gamma",
    "eps",
    "delta",
    "kappa",
    "h_rat",
    "d_rat",
    "C",
    "L",
    "ball",
    "rounding",
    "count_mode",
    "gj_ell",
    "gj_d",
    "gj_s",
    "n_vars",
    "m_polys",
    "vc_dual",
    "axis_sizes",
    "d",
    "alpha",
    "notes",
];

/// Scientific notation with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T, BoundsError> {
    v.ok_or_else(|| BoundsError::Missing(name.to_string()))
}

/// Evaluates `id` on the fields of `dims` it needs; the report echoes exactly those fields.
pub fn evaluate(id: FormulaId, dims: &ProblemDims) -> Result<BoundReport, BoundsError> {
    let mut used = ProblemDims::default();
    macro_rules! take {
        ($field:ident, $name:expr) => {{
            let v = need(dims.$field, $name)?;
            used.$field = Some(v);
            v
        }};
    }
    macro_rules! take_or {
        ($field:ident, $default:expr) => {{
            let v = dims.$field.unwrap_or($default);
            used.$field = Some(v);
            v
        }};
    }
    let (value, notes) = match id {
        FormulaId::VcUpperScalar => {
            let v = vc_upper_scalar(take!(n, "n"), take!(m, "m"), take!(k, "k"), take_or!(ell_max, 0))?;
            (v, vec![])
        }
        FormulaId::VcLower => {
            let variant = take_or!(rounding, Rounding::Floor);
            let v = vc_lower(take!(n, "n"), take!(k, "k"), variant)?;
            (v as f64, vec![])
        }
        FormulaId::VcUpperVector => {
            let v = vc_upper_vector(
                take!(n, "n"),
                take!(m, "m"),
                take!(p, "p"),
                take!(k, "k"),
                take_or!(ell_max, 0),
            )?;
            (v, vec!["pole term spelled (2k+1)^n".to_string()])
        }
        FormulaId::PdUpper => {
            let v = pd_upper(take!(n, "n"), take!(m, "m"), take!(k, "k"), take_or!(ell_max, 0))?;
            (v, vec!["pole term spelled (2k+1)^n".to_string()])
        }
        FormulaId::FatLipschitz => {
            let r = fat_lipschitz(
                take!(k, "k"),
                take!(c, "C"),
                take!(lipschitz, "L"),
                take!(gamma, "gamma"),
                take!(ball, "ball"),
            )?;
            (r.value, r.notes)
        }
        FormulaId::FatControl => {
            let rounding = take_or!(rounding, Rounding::Ceil);
            let r = fat_control(
                take!(n, "n"),
                take!(m, "m"),
                take!(tau, "tau"),
                take!(big_m, "M"),
                take!(gamma, "gamma"),
                rounding,
            )?;
            (r.value, r.notes)
        }
        FormulaId::FatCombined => {
            let rounding = take_or!(rounding, Rounding::Ceil);
            let n = take!(n, "n");
            let m = take!(m, "m");
            let k = take!(k, "k");
            let ell = take_or!(ell_max, 0);
            let tau = take!(tau, "tau");
            let big_m = take!(big_m, "M");
            let mut notes = Vec::new();
            let gamma = if let Some(g) = dims.gamma {
                used.gamma = Some(g);
                g
            } else {
                let g = combined_gamma(None, dims.kappa, dims.eps)?;
                used.kappa = dims.kappa;
                used.eps = dims.eps;
                notes.push(format!("gamma=(1/4-kappa)*eps={}", fmt_real(g)));
                g
            };
            let r = fat_combined(n, m, k, ell, tau, big_m, gamma, rounding)?;
            notes.extend(r.notes);
            (r.value, notes)
        }
        FormulaId::FatHyperplane => {
            let v = fat_hyperplane(take!(radius, "R"), take!(gamma, "gamma"), take!(k, "k"))?;
            (v, vec![])
        }
        FormulaId::SampleComplexityConcept => {
            let v = sample_complexity_concept(take!(d, "d"), take!(eps, "eps"), take!(delta, "delta"))?;
            (v, vec![])
        }
        FormulaId::SampleComplexityAgnostic => {
            let d = take!(d, "d");
            let delta = take!(delta, "delta");
            let mut notes = Vec::new();
            let alpha = match dims.alpha {
                Some(a) => {
                    used.alpha = Some(a);
                    a
                }
                None => {
                    let kappa = need(dims.kappa, "alpha, or both kappa and eps")?;
                    let eps = need(dims.eps, "alpha, or both kappa and eps")?;
                    used.kappa = Some(kappa);
                    used.eps = Some(eps);
                    notes.push("alpha=kappa*eps".to_string());
                    kappa * eps
                }
            };
            let r = sample_complexity_agnostic(d, alpha, delta)?;
            notes.extend(r.notes);
            (r.value, notes)
        }
        FormulaId::GjBound => {
            let v = gj_bound(take!(gj_ell, "gj_ell"), take!(gj_d, "gj_d"), take!(gj_s, "gj_s"))?;
            (v, vec![])
        }
        FormulaId::SignPatternCount => {
            let v = sign_pattern_count(take!(n_vars, "n_vars"), take!(gj_d, "gj_d"), take!(m_polys, "m_polys"))?;
            (v, vec![])
        }
        FormulaId::PoleFreeCount => {
            let v = pole_free_count(take!(n, "n"), take!(k, "k"))?;
            (v as f64, vec!["pole term spelled (1+2k)^n".to_string()])
        }
        FormulaId::DualVcLower => (dual_vc_lower(take!(vc_dual, "vc_dual"))? as f64, vec![]),
        FormulaId::AxisShatterBound => {
            let sizes = dims
                .axis_sizes
                .clone()
                .ok_or_else(|| BoundsError::Missing("axis_sizes".into()))?;
            let v = axis_shatter_bound(&sizes)?;
            used.axis_sizes = Some(sizes);
            (v as f64, vec![])
        }
        FormulaId::DmaxRat => (dmax_rat(take!(n, "n"), take_or!(ell_max, 0))? as f64, vec![]),
        FormulaId::RatVcAbstract => {
            let v = rat_vc_abstract(
                take!(n, "n"),
                take!(m, "m"),
                take!(k, "k"),
                take!(h_rat, "h_rat"),
                take!(d_rat, "d_rat"),
            )?;
            (v, vec![])
        }
        FormulaId::XiBasisCount => {
            let mode = take_or!(count_mode, CountMode::ClosedSum);
            (xi_basis_count(take!(n, "n"), mode)? as f64, vec![])
        }
    };
    if !(value.is_finite() && value >= 0.0) {
        return Err(BoundsError::Overflow(id.as_str()));
    }
    Ok(BoundReport::new(id, value, used, notes))
}
