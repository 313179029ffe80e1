//! Single-problem reports: values, increments, a-priori bounds and, when an
//! oracle exists, realized errors.

use std::fmt::Write as _;

use largeparam::fixedpoint::{remainder_bound, solve, volterra_residual};
use largeparam::olver::{normalize_to_problem, olver_remainder_bound, Branch};
use largeparam::{Complex64, ProblemKind};
use rayon::prelude::*;

use crate::config::{Case, Format, Kind, RunConfig};
use crate::error::CliError;
use crate::format::{format_complex, format_real};
use crate::table::{coefficients, setup, solve_options, with_pool, CaseSetup};

#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    pub n: usize,
    /// `y_n(z)` from the fixed-point iteration.
    pub fixed_point_value: Complex64,
    /// Uniform bound on `|y − y_n|` along the path (rescaled variable for
    /// Minus problems).
    pub apriori_bound: f64,
    /// `|y_n(z) − y(z)|/|y(z)|` against the closed form, when there is one.
    pub realized_error: Option<f64>,
    pub olver_value: Option<Complex64>,
    pub olver_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub case: Case,
    pub converged: bool,
    pub order_used: usize,
    pub grid_size: usize,
    pub value: Complex64,
    pub increments: Vec<f64>,
    pub volterra_residual: f64,
    pub orders: Vec<OrderReport>,
}

fn olver_parts(config: &RunConfig, setup: &CaseSetup, n: usize) -> Result<(Complex64, f64), largeparam::Error> {
    let m = n + config.olver_offset();
    let z = setup.problem.endpoint;
    let coeffs = coefficients(setup, m + 1, z)?;
    let approx = normalize_to_problem(&coeffs, setup.lambda, &setup.problem, m)?;
    let rhs = setup.entry.rhs.clone();
    let g = move |t: Complex64| rhs.eval(t, Complex64::new(1.0, 0.0));
    let branch = match config.kind {
        Kind::Plus => Branch::Plus,
        Kind::Minus => Branch::Minus,
    };
    let bound = olver_remainder_bound(&coeffs, &g, setup.lambda, m, branch, &setup.problem.path()?)?;
    Ok((approx.eval(z)?, bound))
}

fn solve_case(config: &RunConfig, case: Case) -> Result<SolveReport, largeparam::Error> {
    let setup = setup(config, case)?;
    let result = solve(&setup.problem, &solve_options(config))?;
    let residual = volterra_residual(&setup.problem, &result)?;
    let linear = matches!(setup.problem.kind, ProblemKind::LinearPlus | ProblemKind::LinearMinus);
    let mut orders = Vec::new();
    for &n in &config.n {
        let n_used = n.min(result.order_used);
        let apriori_bound = if result.converged { remainder_bound(&setup.problem, &result, n_used)? } else { f64::INFINITY };
        let realized_error = setup.oracle.map(|y| result.remainder_at_end(n_used).norm() / y.norm());
        let (olver_value, olver_bound) = if linear && config.method.olver() {
            let (v, b) = olver_parts(config, &setup, n)?;
            (Some(v), Some(b))
        } else {
            (None, None)
        };
        orders.push(OrderReport {
            n,
            fixed_point_value: result.value_at_end(n_used),
            apriori_bound,
            realized_error,
            olver_value,
            olver_bound,
        });
    }
    Ok(SolveReport {
        case,
        converged: result.converged,
        order_used: result.order_used,
        grid_size: result.grid_size,
        value: result.final_iterate().last(),
        increments: result.increments.clone(),
        volterra_residual: residual,
        orders,
    })
}

/// One report per `(z, Λ)` case, in configuration order.
pub fn run_solve(config: &RunConfig) -> Result<Vec<Result<SolveReport, String>>, CliError> {
    config.validate()?;
    let cases = config.cases();
    with_pool(config, || {
        cases.par_iter().map(|&c| solve_case(config, c).map_err(|e| e.to_string())).collect()
    })
}

fn opt_real(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

pub fn emit_reports(reports: &[Result<SolveReport, String>], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str("z,lambda,n,fixedpoint_value,apriori_bound,realized_error,olver_value,olver_bound\n");
            for report in reports.iter().flatten() {
                for o in &report.orders {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        format_complex(report.case.z),
                        format_complex(report.case.lambda),
                        o.n,
                        format_complex(o.fixed_point_value),
                        format_real(o.apriori_bound),
                        opt_real(o.realized_error),
                        o.olver_value.map(format_complex).unwrap_or_default(),
                        opt_real(o.olver_bound),
                    );
                }
            }
        }
        Format::Markdown => {
            for report in reports {
                let report = match report {
                    Ok(r) => r,
                    Err(msg) => {
                        let _ = writeln!(out, "## failed case\n\n{msg}\n");
                        continue;
                    }
                };
                let _ = writeln!(out, "## z = {}, Λ = {}\n", report.case.z, report.case.lambda);
                let _ = writeln!(out, "- value: {}", report.value);
                let _ = writeln!(out, "- converged: {} at order {} on {} nodes", report.converged, report.order_used, report.grid_size);
                let incs: Vec<String> = report.increments.iter().map(|x| format!("{x:.3e}")).collect();
                let _ = writeln!(out, "- increments: {}", incs.join(", "));
                let _ = writeln!(out, "- Volterra residual: {:.3e}\n", report.volterra_residual);
                out.push_str("| n | y_n(z) | bound | realized | Olver value | Olver bound |\n|---|---|---|---|---|---|\n");
                for o in &report.orders {
                    let short = |x: Option<f64>| x.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "–".into());
                    let _ = writeln!(
                        out,
                        "| {} | {:.12} | {:.3e} | {} | {} | {} |",
                        o.n,
                        o.fixed_point_value,
                        o.apriori_bound,
                        short(o.realized_error),
                        o.olver_value.map(|v| format!("{v:.12}")).unwrap_or_else(|| "–".into()),
                        short(o.olver_bound),
                    );
                }
                out.push('\n');
            }
        }
    }
    out
}
