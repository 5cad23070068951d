//! Command implementations. Each returns the rendered output and an exit code.

use serde::Serialize;
use vclab_core::bounds::{evaluate, BoundReport, ProblemDims, CSV_HEADER};
use vclab_core::learn::{run_experiment, LearnConfig};
use vclab_core::response::{
    response_full_detailed, response_quadrature, sign_observe, ActivePole, ControlMatrix, FullSystemParams,
};
use vclab_core::schema::{from_str_with_path, parse_controls, parse_system};
use vclab_core::selftest::{run_selftest, SelfTestOptions};
use vclab_core::verify::{run_verify, VerifyConfig};

use crate::config::BoundsConfig;
use crate::error::{CliError, EXIT_FAILURE, EXIT_INDETERMINATE, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Rendered command output.
pub struct Output {
    pub text: String,
    pub exit_code: i32,
}

impl Output {
    fn ok(text: String) -> Self {
        Self {
            text,
            exit_code: EXIT_OK,
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types always serialize");
    s.push('\n');
    s
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Failure(format!("csv encoding failed: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Failure(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Failure(e.to_string()))
}

fn grid_points(cfg: &BoundsConfig) -> Result<Vec<ProblemDims>, CliError> {
    let Some(grid) = &cfg.grid else {
        return Ok(vec![cfg.dims.clone()]);
    };
    let int_axis = |name: &str, range: Option<[u64; 2]>, base: Option<u64>| -> Result<Vec<Option<u64>>, CliError> {
        match range {
            Some([lo, hi]) if lo <= hi => Ok((lo..=hi).map(Some).collect()),
            Some([lo, hi]) => Err(CliError::Invalid(format!("grid.{name}: empty range [{lo}, {hi}]"))),
            None => Ok(vec![base]),
        }
    };
    let real_axis = |name: &str, list: &Option<Vec<f64>>, base: Option<f64>| -> Result<Vec<Option<f64>>, CliError> {
        match list {
            Some(v) if v.is_empty() => Err(CliError::Invalid(format!("grid.{name}: empty list"))),
            Some(v) => Ok(v.iter().copied().map(Some).collect()),
            None => Ok(vec![base]),
        }
    };
    let ns = int_axis("n", grid.n, cfg.dims.n)?;
    let ks = int_axis("k", grid.k, cfg.dims.k)?;
    let gammas = real_axis("gamma", &grid.gamma, cfg.dims.gamma)?;
    let epss = real_axis("eps", &grid.eps, cfg.dims.eps)?;
    let deltas = real_axis("delta", &grid.delta, cfg.dims.delta)?;
    let mut out = Vec::new();
    for &n in &ns {
        for &k in &ks {
            for &gamma in &gammas {
                for &eps in &epss {
                    for &delta in &deltas {
                        out.push(ProblemDims {
                            n,
                            k,
                            gamma,
                            eps,
                            delta,
                            ..cfg.dims.clone()
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn cmd_bounds(config_text: &str, format: Format) -> Result<Output, CliError> {
    let cfg: BoundsConfig = from_str_with_path(config_text)?;
    let mut reports: Vec<BoundReport> = Vec::new();
    if !cfg.formulas.is_empty() {
        for dims in grid_points(&cfg)? {
            for &id in &cfg.formulas {
                reports.push(evaluate(id, &dims).map_err(|e| CliError::Invalid(format!("{id}: {e}")))?);
            }
        }
    }
    let text = match format {
        Format::Json => to_json(&reports),
        Format::Csv => csv_table(&CSV_HEADER, reports.iter().map(BoundReport::csv_fields))?,
    };
    Ok(Output::ok(text))
}

fn resolve_seed(cli: Option<u64>, config: Option<u64>) -> Result<u64, CliError> {
    Ok(vclab_core::verify::resolve_seed(cli, config)?)
}

pub fn cmd_verify(config_text: &str, cli_seed: Option<u64>, format: Format) -> Result<Output, CliError> {
    if format == Format::Csv {
        return Err(CliError::Invalid("verify only produces JSON".into()));
    }
    let cfg: VerifyConfig = from_str_with_path(config_text)?;
    let report = run_verify(&cfg, cli_seed)?;
    let exit_code = if report.complete {
        EXIT_OK
    } else if report.indeterminate_count > 0 {
        EXIT_INDETERMINATE
    } else {
        EXIT_FAILURE
    };
    Ok(Output {
        text: to_json(&report),
        exit_code,
    })
}

fn pole_condition(p: &ActivePole) -> String {
    format!(
        "(a_{r} + alpha_{j})^2 + (b_{r} {sign} beta_{j})^2 = 0",
        r = p.row + 1,
        j = p.basis + 1,
        sign = if p.plus { "+" } else { "-" }
    )
}

#[derive(Serialize)]
struct PoleOut {
    row: usize,
    basis: usize,
    plus: bool,
    condition: String,
}

#[derive(Serialize)]
struct OracleOut {
    y_quadrature: Vec<f64>,
    max_abs_discrepancy: f64,
}

#[derive(Serialize)]
struct RespondOut {
    tau: f64,
    y: Vec<f64>,
    sign: Vec<u8>,
    branch: &'static str,
    active_poles: Vec<PoleOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleOut>,
}

/// Oracle tolerance passed to the quadrature cross-check.
const ORACLE_REL_TOL: f64 = 1e-12;

pub fn cmd_respond(
    system_text: &str,
    controls_text: Option<&str>,
    cli_tau: Option<f64>,
    oracle: bool,
    format: Format,
) -> Result<Output, CliError> {
    if format == Format::Csv {
        return Err(CliError::Invalid("respond only produces JSON".into()));
    }
    let system = parse_system(system_text)?;
    let (g, controls_tau): (ControlMatrix, Option<f64>) = match controls_text {
        Some(text) => {
            let c = parse_controls(text)?;
            (c.g, c.tau)
        }
        None => (
            system
                .g
                .clone()
                .ok_or_else(|| CliError::Invalid("G: no controls given (use --controls or a \"G\" field)".into()))?,
            None,
        ),
    };
    let tau = cli_tau.or(controls_tau).or(system.tau).unwrap_or(1.0);
    if !(tau.is_finite() && tau > 0.0) {
        return Err(CliError::Invalid(format!("tau must be positive, got {tau}")));
    }
    let full: FullSystemParams = system.params.to_full();
    let detail = response_full_detailed(&full, &g, &system.family, tau)?;
    let oracle_out = if oracle {
        let yq = response_quadrature(&full, &g, &system.family, tau, ORACLE_REL_TOL)?;
        let disc = detail.y.iter().zip(&yq).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        Some(OracleOut {
            y_quadrature: yq,
            max_abs_discrepancy: disc,
        })
    } else {
        None
    };
    let out = RespondOut {
        tau,
        sign: sign_observe(&detail.y).into_iter().map(u8::from).collect(),
        branch: if detail.active_poles.is_empty() {
            "regular"
        } else {
            "pole"
        },
        active_poles: detail
            .active_poles
            .iter()
            .map(|p| PoleOut {
                row: p.row,
                basis: p.basis,
                plus: p.plus,
                condition: pole_condition(p),
            })
            .collect(),
        y: detail.y,
        oracle: oracle_out,
    };
    Ok(Output::ok(to_json(&out)))
}

pub fn cmd_learn(config_text: &str, cli_seed: Option<u64>, format: Format) -> Result<Output, CliError> {
    let mut cfg: LearnConfig = from_str_with_path(config_text)?;
    cfg.seed = Some(resolve_seed(cli_seed, cfg.seed)?);
    let result = run_experiment(&cfg)?;
    let text = match format {
        Format::Csv => result.to_csv(),
        Format::Json => to_json(&result),
    };
    Ok(Output::ok(text))
}

pub fn cmd_selftest(perturbation: f64) -> Result<Output, CliError> {
    let report = run_selftest(&SelfTestOptions {
        closed_form_perturbation: perturbation,
    });
    let mut text = report.to_json();
    text.push('\n');
    Ok(Output {
        text,
        exit_code: if report.passed { EXIT_OK } else { EXIT_FAILURE },
    })
}
