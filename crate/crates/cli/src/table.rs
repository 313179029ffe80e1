//! Relative-error tables for the fixed-point and Olver approximations.

use std::fmt;
use std::str::FromStr;

use largeparam::fixedpoint::{solve, ExpansionResult, SolveOptions};
use largeparam::olver::{normalize_to_problem, remainder_plus, CoefficientSequence};
use largeparam::specfun::{example_minus_data, example_reference_minus, example_reference_plus};
use largeparam::{relative_error, Complex64, LargeParameter, ProblemSpec, RaySegment};
use rayon::prelude::*;

use crate::config::{Case, InitialDataSource, Kind, RunConfig};
use crate::error::CliError;
use crate::registry::{self, RhsEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellMethod {
    FixedPoint,
    Olver,
}

impl fmt::Display for CellMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellMethod::FixedPoint => "fixedpoint",
            CellMethod::Olver => "olver",
        })
    }
}

impl FromStr for CellMethod {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "fixedpoint" => Ok(CellMethod::FixedPoint),
            "olver" => Ok(CellMethod::Olver),
            _ => Err(CliError::Parse(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// `|approx − ref|/|ref|`.
    Value(f64),
    Failed(String),
    /// The method does not apply (Olver on a nonlinear problem).
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub z: Complex64,
    pub lambda: Complex64,
    pub n: usize,
    pub method: CellMethod,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub rows: Vec<Row>,
}

impl Table {
    pub fn has_failures(&self) -> bool {
        self.rows.iter().any(|r| matches!(r.outcome, Outcome::Failed(_)))
    }

    pub fn get(&self, z: Complex64, lambda: Complex64, n: usize, method: CellMethod) -> Option<&Outcome> {
        self.rows
            .iter()
            .find(|r| r.z == z && r.lambda == lambda && r.n == n && r.method == method)
            .map(|r| &r.outcome)
    }
}

/// Largest disagreement tolerated between a converged solve and the oracle.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Everything needed to evaluate one `(z, Λ)` case.
pub(crate) struct CaseSetup {
    pub lambda: LargeParameter,
    pub problem: ProblemSpec,
    pub entry: RhsEntry,
    /// Closed-form solution value at `z`, when one is known.
    pub oracle: Option<Complex64>,
}

pub(crate) fn setup(config: &RunConfig, case: Case) -> Result<CaseSetup, largeparam::Error> {
    let lambda = LargeParameter::new(case.lambda)?;
    let entry = registry::lookup(&config.rhs).expect("validated rhs");
    let unit = config.rhs == "unit";
    let (problem, oracle) = match config.kind {
        Kind::Plus => {
            let segment = RaySegment::through(case.z).map_err(|_| largeparam::Error::OriginError)?;
            let problem = ProblemSpec::plus(lambda, segment, config.y0, entry.rhs.clone());
            let oracle = match config.rhs.as_str() {
                "unit" => Some(config.y0 * example_reference_plus(lambda, case.z)?),
                "zero" => Some(config.y0),
                _ => None,
            };
            (problem, oracle)
        }
        Kind::Minus => {
            let example = config.initial_data == InitialDataSource::Example && unit;
            let (anchor, (ybar0, y1)) = if example {
                (Complex64::new(1.0, 0.0), example_minus_data(lambda)?)
            } else {
                (config.anchor, (config.ybar0, config.y1))
            };
            let problem = ProblemSpec::minus(lambda, anchor, case.z, ybar0, y1, entry.rhs.clone())?
                .with_continuation(true);
            let oracle = if example { Some(example_reference_minus(lambda, case.z)?) } else { None };
            (problem, oracle)
        }
    };
    Ok(CaseSetup { lambda, problem: problem.validate()?, entry, oracle })
}

pub(crate) fn solve_options(config: &RunConfig) -> SolveOptions {
    let n_max = config.n.iter().copied().max().unwrap_or(1);
    // A few orders past the last requested one, so its tail is well estimated.
    SolveOptions { min_order: (n_max + 3).min(config.max_order), ..SolveOptions::with_tol(config.tol, config.max_order) }
}

pub(crate) fn coefficients(setup: &CaseSetup, count: usize, end: Complex64) -> Result<CoefficientSequence, largeparam::Error> {
    match &setup.entry.polynomial {
        Some(p) => Ok(CoefficientSequence::polynomial(p, count)),
        None => {
            let rhs = setup.entry.rhs.clone();
            CoefficientSequence::grid(&move |z| rhs.eval(z, Complex64::new(1.0, 0.0)), end, 65, count)
        }
    }
}

/// Fixed-point cells: the tail `Σ_{k>n} d_k` at `z` relative to the reference.
fn fixed_point_cells(config: &RunConfig, result: &ExpansionResult, reference: Complex64) -> Vec<Outcome> {
    config
        .n
        .iter()
        .map(|&n| {
            if n > result.order_used {
                return Outcome::Failed(format!("stopped at order {}", result.order_used));
            }
            Outcome::Value(result.remainder_at_end(n).norm() / reference.norm())
        })
        .collect()
}

fn olver_cell(config: &RunConfig, setup: &CaseSetup, n: usize, reference: Complex64) -> Result<f64, largeparam::Error> {
    let m = n + config.olver_offset();
    let z = setup.problem.endpoint;
    let coeffs = coefficients(setup, m + 1, z)?;
    match config.kind {
        Kind::Plus => {
            // y − c·y_m⁺ from the remainder equation, free of cancellation.
            let remainder = remainder_plus(&coeffs, &setup.problem, m, &solve_options(config))?;
            Ok(remainder.norm() / reference.norm())
        }
        Kind::Minus => {
            let approx = normalize_to_problem(&coeffs, setup.lambda, &setup.problem, m)?;
            Ok(relative_error(approx.eval(z)?, reference))
        }
    }
}

fn run_case(config: &RunConfig, case: Case) -> Vec<Row> {
    let row = |n, method, outcome| Row { z: case.z, lambda: case.lambda, n, method, outcome };
    let fail_all = |msg: String| -> Vec<Row> {
        let mut rows = Vec::new();
        for &n in &config.n {
            if config.method.olver() {
                rows.push(row(n, CellMethod::Olver, Outcome::Failed(msg.clone())));
            }
            if config.method.fixed_point() {
                rows.push(row(n, CellMethod::FixedPoint, Outcome::Failed(msg.clone())));
            }
        }
        rows
    };
    let setup = match setup(config, case) {
        Ok(s) => s,
        Err(e) => return fail_all(e.to_string()),
    };
    // The fixed-point solve is needed for its own cells and, without an
    // oracle, as the reference for the Olver cells.
    let solved = if config.method.fixed_point() || setup.oracle.is_none() {
        Some(solve(&setup.problem, &solve_options(config)))
    } else {
        None
    };
    let reference = match (&solved, setup.oracle) {
        (_, Some(v)) => v,
        (Some(Ok(r)), None) => r.final_iterate().last(),
        (Some(Err(e)), None) => return fail_all(e.to_string()),
        (None, None) => unreachable!("solved whenever there is no oracle"),
    };
    let fixed: Vec<Outcome> = match &solved {
        Some(Ok(result)) => {
            let disagreement = relative_error(result.final_iterate().last(), reference);
            if !result.converged {
                let msg = format!("not converged by order {}", result.order_used);
                config.n.iter().map(|_| Outcome::Failed(msg.clone())).collect()
            } else if disagreement > CONSISTENCY_TOL {
                let msg = format!("converged solution is {disagreement:.3e} away from the reference");
                config.n.iter().map(|_| Outcome::Failed(msg.clone())).collect()
            } else {
                fixed_point_cells(config, result, reference)
            }
        }
        Some(Err(e)) => config.n.iter().map(|_| Outcome::Failed(e.to_string())).collect(),
        None => Vec::new(),
    };
    let mut rows = Vec::new();
    for (i, &n) in config.n.iter().enumerate() {
        if config.method.olver() {
            let outcome = if !setup.entry.linear {
                Outcome::Skipped
            } else {
                match olver_cell(config, &setup, n, reference) {
                    Ok(v) => Outcome::Value(v),
                    Err(e) => Outcome::Failed(e.to_string()),
                }
            };
            rows.push(row(n, CellMethod::Olver, outcome));
        }
        if config.method.fixed_point() {
            rows.push(row(n, CellMethod::FixedPoint, fixed[i].clone()));
        }
    }
    rows
}

/// Runs `f` on a pool with the configured number of threads.
pub(crate) fn with_pool<T: Send>(config: &RunConfig, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match config.threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| CliError::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// One row per `(z, Λ, n, method)`; cells that fail are marked and the run
/// continues.
pub fn run_table(config: &RunConfig) -> Result<Table, CliError> {
    config.validate()?;
    let cases = config.cases();
    let blocks: Vec<Vec<Row>> = with_pool(config, || cases.par_iter().map(|&c| run_case(config, c)).collect())?;
    Ok(Table { rows: blocks.into_iter().flatten().collect() })
}
