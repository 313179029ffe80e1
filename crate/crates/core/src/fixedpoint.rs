//! Picard iteration of the Volterra equations equivalent to the Plus and
//! Minus problems, with a-priori remainder bounds.
//!
//! Plus problems iterate `y_{n+1} = y₀ + K[F(y_n)]` directly. Minus problems
//! iterate the rescaled unknown `v = S·y`, `S(t) = (t/z₀)^{2Λ−1}`, whose kernel
//! `(z/t)^{2Λ−1} − 1` stays bounded by 2 along the path; iterates are reported
//! in terms of `y = v/S`. Linear problems are iterated in increment form
//! (`d_{k+1} = K[g·d_k]`), so every increment and every tail `Σ_{k>n} d_k` is
//! obtained without cancellation.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Path;
use crate::grid::{ChebGrid, GridFunction};
use crate::numeric::cdiv;
use crate::param::LargeParameter;
use crate::problem::{InitialData, ProblemKind, ProblemSpec, RightHandSide};
use crate::quadrature::{path_kernel_sup, KernelIntegralPlan};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Stop once `‖y_{n+1} − y_n‖∞ < tol·(1 + ‖y_{n+1}‖∞)`.
    pub tol: f64,
    pub max_order: usize,
    /// Never stop before this order.
    pub min_order: usize,
    pub initial_grid: usize,
    pub max_grid: usize,
    /// Grids are refined until the relative Chebyshev tail of the iterates
    /// falls below this.
    pub resolution_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_order: 200, min_order: 0, initial_grid: 65, max_grid: 1025, resolution_tol: 1e-13 }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64, max_order: usize) -> Self {
        Self { tol, max_order, ..Self::default() }
    }
}

/// `S(t) = (t/z₀)^{2Λ−1}` on the path of a Minus problem, `1` for Plus problems.
fn scaling(problem: &ProblemSpec, path: &Path, grid: &Arc<ChebGrid>) -> GridFunction {
    if problem.kind.is_plus() {
        return GridFunction::constant(path.clone(), grid.clone(), Complex64::new(1.0, 0.0));
    }
    let nu = problem.lambda.two_lambda_minus_one();
    let start = path.start_log();
    let mut values = Vec::with_capacity(path.len() * grid.len());
    for panel in path.panels() {
        values.extend(grid.nodes().iter().map(|&tau| (nu * (panel.log_point(tau) - start)).exp()));
    }
    GridFunction::from_values(path.clone(), grid.clone(), values).expect("layout")
}

/// `φ₊ ≡ y₀` on the problem's path.
pub fn phi_plus(problem: &ProblemSpec) -> Result<GridFunction> {
    phi_plus_on(problem, ChebGrid::shared(SolveOptions::default().initial_grid))
}

pub fn phi_plus_on(problem: &ProblemSpec, grid: Arc<ChebGrid>) -> Result<GridFunction> {
    match (problem.kind.is_plus(), problem.data) {
        (true, InitialData::Plus { y0 }) => Ok(GridFunction::constant(problem.path()?, grid, y0)),
        _ => Err(Error::KindMismatch("φ₊ needs a Plus problem".into())),
    }
}

/// `φ₋(z) = ȳ₀ + y₁·z₀/(1−2Λ)·[(z/z₀)^{1−2Λ} − 1]` on the problem's path.
pub fn phi_minus(problem: &ProblemSpec) -> Result<GridFunction> {
    phi_minus_on(problem, ChebGrid::shared(SolveOptions::default().initial_grid))
}

pub fn phi_minus_on(problem: &ProblemSpec, grid: Arc<ChebGrid>) -> Result<GridFunction> {
    let InitialData::Minus { ybar0, y1 } = problem.data else {
        return Err(Error::KindMismatch("φ₋ needs a Minus problem".into()));
    };
    if problem.kind.is_plus() {
        return Err(Error::KindMismatch("φ₋ needs a Minus problem".into()));
    }
    if problem.anchor.norm() == 0.0 {
        return Err(Error::AnchorOrder("Minus problems need z0 ≠ 0".into()));
    }
    let path = problem.path()?;
    let nu = problem.lambda.two_lambda_minus_one();
    let start = path.start_log();
    let coef = y1 * problem.anchor / (-nu);
    let mut values = Vec::with_capacity(path.len() * grid.len());
    for panel in path.panels() {
        values.extend(grid.nodes().iter().map(|&tau| {
            let bracket = (-nu * (panel.log_point(tau) - start)).exp() - 1.0;
            ybar0 + coef * bracket
        }));
    }
    GridFunction::from_values(path, grid, values)
}

/// `φ` in the working variable: `y₀` (Plus) or `S·φ₋ = S·(ȳ₀ + y₁z₀/ν) − y₁z₀/ν` (Minus).
fn working_phi(problem: &ProblemSpec, scale: &GridFunction) -> GridFunction {
    match problem.data {
        InitialData::Plus { y0 } => scale.map(|_| y0),
        InitialData::Minus { ybar0, y1 } => {
            let c = y1 * problem.anchor / problem.lambda.two_lambda_minus_one();
            scale.map(|s| s * (ybar0 + c) - c)
        }
    }
}

/// Snapshot of the iteration after `n` steps.
#[derive(Debug, Clone)]
pub struct IterationState {
    pub problem: ProblemSpec,
    plan: Arc<KernelIntegralPlan>,
    scale: GridFunction,
    phi: GridFunction,
    g_values: Option<Vec<Complex64>>,
    source: Option<GridFunction>,
    /// `y_n` in the working variable.
    pub current: GridFunction,
    /// `y_{n−1}` in the working variable (equal to `current` at `n = 0`).
    pub previous: GridFunction,
    /// `d_0 = φ`, `d_k = y_k − y_{k−1}`, working variable.
    pub corrections: Vec<GridFunction>,
    pub n: usize,
    pub increment_norms: Vec<f64>,
}

impl IterationState {
    /// Validates the problem and assembles its kernel on `grid`.
    pub fn new(problem: &ProblemSpec, grid: Arc<ChebGrid>) -> Result<Self> {
        let problem = problem.clone().validate()?;
        let path = problem.path()?;
        let plan = if problem.kind.is_plus() {
            KernelIntegralPlan::plus(problem.lambda, path.clone(), grid.clone())?
        } else {
            KernelIntegralPlan::minus(problem.lambda, path.clone(), grid.clone())?
        };
        Self::with_plan(problem, Arc::new(plan))
    }

    /// Starts from an already assembled kernel for the problem's path.
    pub fn with_plan(problem: ProblemSpec, plan: Arc<KernelIntegralPlan>) -> Result<Self> {
        let path = plan.path().clone();
        let grid = plan.grid().clone();
        let scale = scaling(&problem, &path, &grid);
        let phi = working_phi(&problem, &scale);
        let points = phi.points();
        let (g_values, source) = match &problem.rhs {
            RightHandSide::Linear { g, source } => {
                let gv = points.iter().map(|&t| g(t)).collect();
                let src = match source {
                    Some(h) => {
                        let hs = scale.map_with_point(|t, s| s * h(t));
                        Some(plan.apply(&hs)?)
                    }
                    None => None,
                };
                (Some(gv), src)
            }
            RightHandSide::Nonlinear { .. } => (None, None),
        };
        Ok(Self {
            problem,
            plan,
            scale,
            phi: phi.clone(),
            g_values,
            source,
            current: phi.clone(),
            previous: phi.clone(),
            corrections: vec![phi],
            n: 0,
            increment_norms: Vec::new(),
        })
    }

    pub fn plan(&self) -> &Arc<KernelIntegralPlan> {
        &self.plan
    }

    /// `y_n` in the original variable.
    pub fn current_y(&self) -> GridFunction {
        self.current.zip_with(&self.scale, cdiv).expect("layout")
    }

    /// `F(t, w)` in the working variable.
    fn forcing(&self, w: &GridFunction) -> GridFunction {
        match &self.problem.rhs {
            RightHandSide::Linear { .. } => {
                let g = self.g_values.as_ref().expect("linear");
                let values = w.values().iter().zip(g).map(|(a, b)| a * b).collect();
                GridFunction::from_values(w.path().clone(), w.grid().clone(), values).expect("layout")
            }
            RightHandSide::Nonlinear { f, .. } => {
                let points = w.points();
                let values = w
                    .values()
                    .iter()
                    .zip(self.scale.values())
                    .zip(points)
                    .map(|((&v, &s), t)| s * f(t, cdiv(v, s)))
                    .collect();
                GridFunction::from_values(w.path().clone(), w.grid().clone(), values).expect("layout")
            }
        }
    }
}

/// One Picard step.
pub fn iterate(state: IterationState) -> Result<IterationState> {
    let mut state = state;
    let (next, correction) = if state.problem.kind.is_linear() {
        let last = state.corrections.last().expect("d_0 present");
        let mut d = state.plan.apply(&state.forcing(last))?;
        if state.n == 0 {
            if let Some(src) = &state.source {
                d = d.add(src)?;
            }
        }
        (state.current.add(&d)?, d)
    } else {
        let next = state.phi.add(&state.plan.apply(&state.forcing(&state.current))?)?;
        let d = next.sub(&state.current)?;
        (next, d)
    };
    let norm = correction.sup_norm();
    if !norm.is_finite() {
        return Err(Error::NoConvergence(format!("iterate {} is not finite", state.n + 1)));
    }
    state.increment_norms.push(norm);
    state.corrections.push(correction);
    state.previous = std::mem::replace(&mut state.current, next);
    state.n += 1;
    Ok(state)
}

/// Outcome of [`solve`].
#[derive(Debug, Clone)]
pub struct ExpansionResult {
    pub kind: ProblemKind,
    pub lambda: LargeParameter,
    /// `y_0, …, y_n` in the original variable.
    pub iterates: Vec<GridFunction>,
    /// `‖y_{k+1} − y_k‖∞` in the working variable, `k < order_used`.
    pub increments: Vec<f64>,
    /// Bound on `‖y − y_n‖∞` at `n = order_used` (working variable).
    pub apriori_bound: f64,
    pub converged: bool,
    pub order_used: usize,
    /// `d_0 = φ`, `d_k = y_k − y_{k−1}` in the working variable.
    pub corrections: Vec<GridFunction>,
    /// `φ` in the working variable.
    pub phi: GridFunction,
    /// `(t/z₀)^{2Λ−1}` for Minus problems, `1` for Plus problems.
    pub scaling: GridFunction,
    /// Kernel modulus bound used in the contraction factor (2 on rays).
    pub kernel_bound: f64,
    pub path_length: f64,
    /// `‖g‖∞` over the grid (linear) or the Lipschitz constant (nonlinear).
    pub rhs_constant: f64,
    pub grid_size: usize,
    /// Largest relative Chebyshev tail among the checked grid functions.
    pub chebyshev_tail: f64,
}

impl ExpansionResult {
    pub fn final_iterate(&self) -> &GridFunction {
        &self.iterates[self.iterates.len() - 1]
    }

    /// `y_final − y_n` in the working variable, summed from the increments.
    pub fn realized_remainder(&self, n: usize) -> GridFunction {
        let start = n.min(self.order_used) + 1;
        let zero = self.phi.map(|_| Complex64::default());
        self.corrections[start..].iter().fold(zero, |acc, d| acc.add(d).expect("layout"))
    }

    /// `y_n` at the end of the path.
    pub fn value_at_end(&self, n: usize) -> Complex64 {
        self.iterates[n.min(self.order_used)].last()
    }

    /// `y_final − y_n` at the end of the path, in the original variable.
    pub fn remainder_at_end(&self, n: usize) -> Complex64 {
        let start = n.min(self.order_used) + 1;
        let tail: Complex64 = self.corrections[start..].iter().map(GridFunction::last).sum();
        cdiv(tail, self.scaling.last())
    }

    /// `‖y_final − φ‖∞` in the working variable.
    pub fn distance_from_phi(&self) -> f64 {
        self.realized_remainder(0).sup_norm()
    }

    pub fn contraction_factor(&self, n: usize) -> f64 {
        contraction_factor_from(
            self.kernel_bound,
            self.path_length,
            self.rhs_constant,
            self.lambda.two_lambda_minus_one().norm(),
            n,
        )
    }
}

/// `(κ·ℓ·C/|2Λ−1|)ⁿ/n!` with kernel bound `κ`, path length `ℓ` and `C = ‖g‖∞` or `L`.
pub fn contraction_factor_from(kernel_bound: f64, length: f64, c: f64, nu_abs: f64, n: usize) -> f64 {
    let ratio = kernel_bound * length * c / nu_abs;
    (1..=n).fold(1.0, |acc, k| acc * ratio / k as f64)
}

fn kernel_bound_for(path: &Path, grid: &ChebGrid, lambda: LargeParameter) -> f64 {
    if path.is_radial() {
        2.0
    } else {
        path_kernel_sup(path, grid, lambda).max(2.0)
    }
}

/// `(2·|z_max − z₀|·C)ⁿ/(n!·|2Λ−1|ⁿ)`; on continuation paths the path length
/// and the sampled kernel modulus replace `|z_max − z₀|` and 2.
pub fn contraction_factor(problem: &ProblemSpec, n: usize) -> Result<f64> {
    let path = problem.path()?;
    let grid = ChebGrid::shared(SolveOptions::default().initial_grid);
    let points = GridFunction::constant(path.clone(), grid.clone(), Complex64::default()).points();
    let c = problem.rhs_constant(&points);
    let kappa = kernel_bound_for(&path, &grid, problem.lambda);
    Ok(contraction_factor_from(kappa, path.length(), c, problem.lambda.two_lambda_minus_one().norm(), n))
}

/// `contraction_factor(n)·‖y_final − φ‖∞`, bounding `‖y − y_n‖∞` uniformly on
/// the path (working variable).
pub fn remainder_bound(problem: &ProblemSpec, result: &ExpansionResult, n: usize) -> Result<f64> {
    if !result.converged {
        return Err(Error::NotConverged);
    }
    if problem.kind != result.kind {
        return Err(Error::KindMismatch("result belongs to a different problem".into()));
    }
    Ok(result.contraction_factor(n) * result.distance_from_phi())
}

/// Iterates to convergence, refining the grid until the iterates are resolved.
pub fn solve(problem: &ProblemSpec, options: &SolveOptions) -> Result<ExpansionResult> {
    if !(options.tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {} must be positive", options.tol)));
    }
    let problem = problem.clone().validate()?;
    let mut n_grid = options.initial_grid.max(3);
    loop {
        let grid = ChebGrid::shared(n_grid);
        let mut state = IterationState::new(&problem, grid.clone())?;
        let mut converged = false;
        while state.n < options.max_order {
            state = iterate(state)?;
            let inc = *state.increment_norms.last().expect("one step taken");
            if state.n >= options.min_order && inc < options.tol * (1.0 + state.current.sup_norm()) {
                converged = true;
                break;
            }
        }
        if !converged {
            let incs = &state.increment_norms;
            if incs.len() >= 2 && incs[incs.len() - 1] >= incs[incs.len() - 2] {
                return Err(Error::NoConvergence(format!(
                    "increments stopped decreasing at order {}",
                    state.n
                )));
            }
        }
        let tail = resolution_tail(&state);
        if tail <= options.resolution_tol || 2 * n_grid - 1 > options.max_grid {
            return Ok(finish(&problem, state, converged, tail));
        }
        n_grid = 2 * n_grid - 1;
    }
}

/// Largest relative Chebyshev tail of the iterate and of `d_1, …, d_6`.
/// Linear increments are computed directly, so each must be resolved on its
/// own scale; nonlinear increments are differences of iterates and are only
/// resolved relative to the iterate.
fn resolution_tail(state: &IterationState) -> f64 {
    let size = state.current.sup_norm();
    let linear = state.problem.kind.is_linear();
    state
        .corrections
        .iter()
        .skip(1)
        .take(6)
        .map(|d| {
            let tail = d.chebyshev_tail();
            if linear || size == 0.0 {
                tail
            } else {
                tail * d.sup_norm() / size
            }
        })
        .fold(state.current.chebyshev_tail(), f64::max)
}

fn finish(problem: &ProblemSpec, state: IterationState, converged: bool, tail: f64) -> ExpansionResult {
    let path = state.plan.path().clone();
    let grid = state.plan.grid().clone();
    let points = state.current.points();
    let kernel_bound = kernel_bound_for(&path, &grid, problem.lambda);
    let rhs_constant = problem.rhs_constant(&points);
    let mut partial = state.phi.map(|_| Complex64::default());
    let iterates = state
        .corrections
        .iter()
        .map(|d| {
            partial = partial.add(d).expect("layout");
            partial.zip_with(&state.scale, cdiv).expect("layout")
        })
        .collect();
    let mut result = ExpansionResult {
        kind: problem.kind,
        lambda: problem.lambda,
        iterates,
        increments: state.increment_norms,
        apriori_bound: 0.0,
        converged,
        order_used: state.n,
        corrections: state.corrections,
        phi: state.phi,
        scaling: state.scale,
        kernel_bound,
        path_length: path.length(),
        rhs_constant,
        grid_size: grid.len(),
        chebyshev_tail: tail,
    };
    result.apriori_bound = result.contraction_factor(result.order_used) * result.distance_from_phi();
    result
}

/// `max |y − φ − K[F(y)]| / max(1, ‖y‖∞)` for the final iterate, re-evaluated
/// on a grid with twice as many intervals.
pub fn volterra_residual(problem: &ProblemSpec, result: &ExpansionResult) -> Result<f64> {
    let fine = ChebGrid::shared(2 * result.grid_size - 1);
    let working = result
        .final_iterate()
        .zip_with(&result.scaling, |y, s| y * s)?
        .resample(fine.clone());
    let state = IterationState::new(problem, fine)?;
    let mut probe = state.clone();
    probe.current = working.clone();
    let forcing = probe.forcing(&working);
    let mut image = state.phi.add(&state.plan.apply(&forcing)?)?;
    if let Some(src) = &state.source {
        image = image.add(src)?;
    }
    let scale = working.sup_norm().max(1.0);
    Ok(working.sub(&image)?.sup_norm() / scale)
}
