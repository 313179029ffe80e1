//! Poincaré-type expansions `y_n⁺ = Σ_{k<n} A_k/(2Λ)^k` and
//! `y_n⁻ = z^{1−2Λ}·Σ_{k<n} A_k/[2(1−Λ)]^k`, with the coefficient recurrence
//! `A_{k+1} = A_k − z·A_k' + ∫₀^z g·A_k`, `A_0 = 1`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fixedpoint::{solve, SolveOptions};
use crate::geometry::{Path, RaySegment};
use crate::grid::{ChebGrid, GridFunction};
use crate::numeric::cdiv;
use crate::param::LargeParameter;
use crate::problem::{InitialData, ProblemSpec, RightHandSide};

/// Polynomial with complex coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_real(&[1.0])
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            self.coeffs.pop();
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::default(), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect())
    }

    /// Antiderivative vanishing at the origin.
    pub fn antiderivative(&self) -> Self {
        let mut out = vec![Complex64::default()];
        out.extend(self.coeffs.iter().enumerate().map(|(k, &c)| c / (k + 1) as f64));
        Self::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Self, k: usize| p.coeffs.get(k).copied().unwrap_or_default();
        Self::new((0..n).map(|k| get(self, k) + get(other, k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex64::default(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// `z·p(z)`.
    pub fn mul_z(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex64::default()];
        out.extend_from_slice(&self.coeffs);
        Self::new(out)
    }
}

/// One recurrence step on either backend.
pub enum CoefficientInput<'a> {
    Polynomial(&'a ComplexPolynomial, &'a ComplexPolynomial),
    Grid(&'a GridFunction, &'a GridFunction),
}

/// `A_{n+1} = A_n − z·A_n' + ∫₀^z g·A_n`. On the grid backend `g` is given by
/// its samples on the same grid, which must start at the origin.
pub fn next_coefficient(input: CoefficientInput<'_>) -> Result<CoefficientValue> {
    match input {
        CoefficientInput::Polynomial(a, g) => {
            let next = a.sub(&a.derivative().mul_z()).add(&g.mul(a).antiderivative());
            Ok(CoefficientValue::Polynomial(next))
        }
        CoefficientInput::Grid(a, g) => {
            if !a.same_layout(g) {
                return Err(Error::BackendMismatch("A_n and g sampled on different grids".into()));
            }
            let end = radial_end(a.path())?;
            let grid = a.grid();
            let next = chebyshev_step(&chop(grid.coefficients(a.values())), &chop(grid.coefficients(g.values())), end);
            Ok(CoefficientValue::Grid(GridFunction::from_values(a.path().clone(), grid.clone(), grid.synthesize(&next))?))
        }
    }
}

/// End point of a single radial panel starting at the origin.
fn radial_end(path: &Path) -> Result<Complex64> {
    if path.len() != 1 || !path.is_radial() || path.start().norm() != 0.0 {
        return Err(Error::BackendMismatch("grid coefficients must live on one segment from the origin".into()));
    }
    Ok(path.end())
}

/// Drops trailing coefficients at the rounding level of the largest one;
/// left in place they would be amplified by every later step.
fn chop(mut c: Vec<Complex64>) -> Vec<Complex64> {
    let max = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let keep = c.iter().rposition(|v| v.norm() > CHOP_TOL * max).map_or(0, |k| k + 1);
    for v in &mut c[keep..] {
        *v = Complex64::default();
    }
    c
}

const CHOP_TOL: f64 = 1e-14;

/// `d/dx` of `Σ c_k T_k(x)`.
fn chebyshev_derivative(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len();
    let mut d = vec![Complex64::default(); n];
    for k in (1..n).rev() {
        let above = if k + 1 < n { d[k + 1] } else { Complex64::default() };
        d[k - 1] = above + 2.0 * k as f64 * c[k];
    }
    if n > 0 {
        d[0] *= 0.5;
    }
    d
}

/// `x·Σ c_k T_k(x)`, truncated to the input length.
fn chebyshev_times_x(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len();
    let mut out = vec![Complex64::default(); n];
    for (k, &ck) in c.iter().enumerate() {
        if k == 0 {
            if n > 1 {
                out[1] += ck;
            }
            continue;
        }
        out[k - 1] += 0.5 * ck;
        if k + 1 < n {
            out[k + 1] += 0.5 * ck;
        }
    }
    out
}

/// Product of two Chebyshev series, truncated to the length of `a`.
fn chebyshev_product(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let mut out = vec![Complex64::default(); n];
    for (j, &aj) in a.iter().enumerate() {
        if aj == Complex64::default() {
            continue;
        }
        for (k, &bk) in b.iter().enumerate() {
            let t = 0.5 * aj * bk;
            if j + k < n {
                out[j + k] += t;
            }
            out[j.abs_diff(k)] += t;
        }
    }
    out
}

/// `∫_{−1}^x Σ c_k T_k(s) ds`, truncated to the input length.
fn chebyshev_integral(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len();
    let at = |k: usize| if k < n { c[k] } else { Complex64::default() };
    let mut b = vec![Complex64::default(); n];
    for (k, slot) in b.iter_mut().enumerate().skip(1) {
        let lower = if k == 1 { at(0) * 2.0 } else { at(k - 1) };
        *slot = (lower - at(k + 1)) / (2.0 * k as f64);
    }
    b[0] = -b.iter().enumerate().skip(1).map(|(k, bk)| if k % 2 == 0 { *bk } else { -bk }).sum::<Complex64>();
    b
}

/// One recurrence step on the Chebyshev coefficients (in `x = 2τ − 1`) of
/// `A_n` and `g` along `z = end·τ`. Working on coefficients keeps the error
/// of each mode relative to its own size, so the `z·A'` term does not amplify
/// rounding noise from one step to the next.
fn chebyshev_step(a: &[Complex64], g: &[Complex64], end: Complex64) -> Vec<Complex64> {
    // z·d/dz = τ·d/dτ = (1 + x)·d/dx
    let da = chebyshev_derivative(a);
    let xda = chebyshev_times_x(&da);
    // ∫₀^z g·A dz = end·∫₀^τ g·A dτ = (end/2)·∫_{−1}^x g·A dx
    let ga = chebyshev_integral(&chebyshev_product(a, g));
    a.iter()
        .zip(&da)
        .zip(&xda)
        .zip(&ga)
        .map(|(((&ak, &dk), &xk), &ik)| ak - dk - xk + 0.5 * end * ik)
        .collect()
}

pub enum CoefficientValue {
    Polynomial(ComplexPolynomial),
    Grid(GridFunction),
}

#[derive(Clone)]
enum Backend {
    Polynomial { coeffs: Vec<ComplexPolynomial>, derivs: Vec<ComplexPolynomial> },
    Grid { coeffs: Vec<GridFunction>, derivs: Vec<GridFunction> },
}

/// `A_0, …, A_{count−1}` on one backend.
#[derive(Clone)]
pub struct CoefficientSequence {
    backend: Backend,
}

impl fmt::Debug for CoefficientSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.backend {
            Backend::Polynomial { .. } => "Polynomial",
            Backend::Grid { .. } => "Grid",
        };
        f.debug_struct("CoefficientSequence").field("backend", &kind).field("order", &self.order()).finish()
    }
}

impl CoefficientSequence {
    /// Exact coefficients for polynomial `g`.
    pub fn polynomial(g: &ComplexPolynomial, count: usize) -> Self {
        let mut coeffs = vec![ComplexPolynomial::one()];
        while coeffs.len() < count {
            let last = coeffs.last().expect("A_0 present");
            let CoefficientValue::Polynomial(next) =
                next_coefficient(CoefficientInput::Polynomial(last, g)).expect("polynomial step")
            else {
                unreachable!()
            };
            coeffs.push(next);
        }
        coeffs.truncate(count.max(1));
        let derivs = coeffs.iter().map(ComplexPolynomial::derivative).collect();
        Self { backend: Backend::Polynomial { coeffs, derivs } }
    }

    /// Coefficients sampled on the segment from the origin to `end`.
    pub fn grid(g: &dyn Fn(Complex64) -> Complex64, end: Complex64, nodes: usize, count: usize) -> Result<Self> {
        let path = Path::ray(&RaySegment::through(end)?);
        let grid = ChebGrid::shared(nodes);
        let gf = GridFunction::from_fn(path.clone(), grid.clone(), g);
        let gc = chop(grid.coefficients(gf.values()));
        let mut series = vec![Complex64::default(); grid.len()];
        series[0] = Complex64::new(1.0, 0.0);
        let mut coeffs = Vec::with_capacity(count.max(1));
        let mut derivs = Vec::with_capacity(count.max(1));
        loop {
            coeffs.push(GridFunction::from_values(path.clone(), grid.clone(), grid.synthesize(&series))?);
            // dA/dz = (2/end)·dA/dx
            let dz: Vec<Complex64> = chebyshev_derivative(&series).into_iter().map(|d| 2.0 * d / end).collect();
            derivs.push(GridFunction::from_values(path.clone(), grid.clone(), grid.synthesize(&dz))?);
            if coeffs.len() >= count {
                break;
            }
            series = chebyshev_step(&series, &gc, end);
        }
        Ok(Self { backend: Backend::Grid { coeffs, derivs } })
    }

    /// Number of stored coefficients.
    pub fn order(&self) -> usize {
        match &self.backend {
            Backend::Polynomial { coeffs, .. } => coeffs.len(),
            Backend::Grid { coeffs, .. } => coeffs.len(),
        }
    }

    pub fn polynomials(&self) -> Option<&[ComplexPolynomial]> {
        match &self.backend {
            Backend::Polynomial { coeffs, .. } => Some(coeffs),
            Backend::Grid { .. } => None,
        }
    }

    pub fn grid_functions(&self) -> Option<&[GridFunction]> {
        match &self.backend {
            Backend::Grid { coeffs, .. } => Some(coeffs),
            Backend::Polynomial { .. } => None,
        }
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.order() {
            return Err(Error::Domain(format!("coefficient A_{k} not computed (order {})", self.order())));
        }
        Ok(())
    }

    /// `A_k(z)`.
    pub fn value(&self, k: usize, z: Complex64) -> Result<Complex64> {
        self.check_index(k)?;
        match &self.backend {
            Backend::Polynomial { coeffs, .. } => Ok(coeffs[k].eval(z)),
            Backend::Grid { coeffs, .. } => coeffs[k].evaluate(z),
        }
    }

    /// `A_k'(z)`.
    pub fn derivative(&self, k: usize, z: Complex64) -> Result<Complex64> {
        self.check_index(k)?;
        match &self.backend {
            Backend::Polynomial { derivs, .. } => Ok(derivs[k].eval(z)),
            Backend::Grid { derivs, .. } => derivs[k].evaluate(z),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

fn expansion_variable(lambda: LargeParameter, branch: Branch) -> Complex64 {
    match branch {
        Branch::Plus => lambda.two_lambda(),
        Branch::Minus => lambda.reflected(),
    }
}

/// `(Σ_{k<n} A_k(z)/b^k, Σ_{k<n} A_k'(z)/b^k)`.
fn sums(coeffs: &CoefficientSequence, b: Complex64, n: usize, z: Complex64) -> Result<(Complex64, Complex64)> {
    let mut value = Complex64::default();
    let mut deriv = Complex64::default();
    let mut power = Complex64::new(1.0, 0.0);
    for k in 0..n {
        value += coeffs.value(k, z)? * power;
        deriv += coeffs.derivative(k, z)? * power;
        power /= b;
    }
    Ok((value, deriv))
}

/// `y_n⁺(z) = Σ_{k<n} A_k(z)/(2Λ)^k`.
pub fn partial_sum_plus(coeffs: &CoefficientSequence, lambda: LargeParameter, n: usize, z: Complex64) -> Result<Complex64> {
    Ok(sums(coeffs, lambda.two_lambda(), n, z)?.0)
}

/// `(y_n⁺)'(z)`.
pub fn partial_sum_plus_derivative(
    coeffs: &CoefficientSequence,
    lambda: LargeParameter,
    n: usize,
    z: Complex64,
) -> Result<Complex64> {
    Ok(sums(coeffs, lambda.two_lambda(), n, z)?.1)
}

/// `z^{1−2Λ}` on the principal branch.
fn minus_factor(lambda: LargeParameter, z: Complex64) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return Err(Error::OriginError);
    }
    Ok((-lambda.two_lambda_minus_one() * z.ln()).exp())
}

/// `y_n⁻(z) = z^{1−2Λ}·Σ_{k<n} A_k(z)/[2(1−Λ)]^k`.
pub fn partial_sum_minus(coeffs: &CoefficientSequence, lambda: LargeParameter, n: usize, z: Complex64) -> Result<Complex64> {
    let factor = minus_factor(lambda, z)?;
    Ok(factor * sums(coeffs, lambda.reflected(), n, z)?.0)
}

/// `(y_n⁻)'(z) = z^{1−2Λ}·[S'(z) + (1−2Λ)·S(z)/z]`.
pub fn partial_sum_minus_derivative(
    coeffs: &CoefficientSequence,
    lambda: LargeParameter,
    n: usize,
    z: Complex64,
) -> Result<Complex64> {
    let factor = minus_factor(lambda, z)?;
    let (s, ds) = sums(coeffs, lambda.reflected(), n, z)?;
    Ok(factor * (ds - lambda.two_lambda_minus_one() * s / z))
}

/// `2‖A_n'‖₁/(|2Λ−1|·|b|^{n−1})·exp(2‖g‖₁/|2Λ−1|)`, `b = 2Λ` (Plus) or
/// `2(1−Λ)` (Minus), with both L¹ norms taken along `path`.
pub fn olver_remainder_bound(
    coeffs: &CoefficientSequence,
    g: &dyn Fn(Complex64) -> Complex64,
    lambda: LargeParameter,
    n: usize,
    branch: Branch,
    path: &Path,
) -> Result<f64> {
    coeffs.check_index(n)?;
    let grid = ChebGrid::shared(129);
    let mut deriv = Vec::with_capacity(path.len() * grid.len());
    for panel in path.panels() {
        for &tau in grid.nodes() {
            deriv.push(coeffs.derivative(n, panel.point(tau))?);
        }
    }
    let a_l1 = GridFunction::from_values(path.clone(), grid.clone(), deriv)?.l1_norm();
    let g_l1 = GridFunction::from_fn(path.clone(), grid, g).l1_norm();
    let nu = lambda.two_lambda_minus_one().norm();
    let b = expansion_variable(lambda, branch).norm();
    let power = b.powi(n as i32 - 1);
    Ok(2.0 * a_l1 / (nu * power) * (2.0 * g_l1 / nu).exp())
}

/// Olver approximant matched to a problem's initial data:
/// `c₊·y_n⁺` (Plus) or `c₊·y_n⁺ + c₋·y_n⁻` (Minus).
#[derive(Debug, Clone)]
pub struct OlverApproximant {
    pub lambda: LargeParameter,
    pub order: usize,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    coeffs: CoefficientSequence,
}

impl OlverApproximant {
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let mut value = self.c_plus * partial_sum_plus(&self.coeffs, self.lambda, self.order, z)?;
        if self.c_minus != Complex64::default() {
            value += self.c_minus * partial_sum_minus(&self.coeffs, self.lambda, self.order, z)?;
        }
        Ok(value)
    }

    pub fn coefficients(&self) -> &CoefficientSequence {
        &self.coeffs
    }
}

/// Fixes the constants of the order-`n` approximant from the problem's data.
pub fn normalize_to_problem(
    coeffs: &CoefficientSequence,
    lambda: LargeParameter,
    problem: &ProblemSpec,
    n: usize,
) -> Result<OlverApproximant> {
    if n == 0 {
        return Err(Error::Domain("the approximant needs at least one term".into()));
    }
    coeffs.check_index(n - 1)?;
    let (c_plus, c_minus) = match problem.data {
        InitialData::Plus { y0 } => {
            let at_origin = partial_sum_plus(coeffs, lambda, n, Complex64::default())?;
            (cdiv(y0, at_origin), Complex64::default())
        }
        InitialData::Minus { ybar0, y1 } => {
            let z0 = problem.anchor;
            let a = partial_sum_plus(coeffs, lambda, n, z0)?;
            let b = partial_sum_minus(coeffs, lambda, n, z0)?;
            let c = partial_sum_plus_derivative(coeffs, lambda, n, z0)?;
            let d = partial_sum_minus_derivative(coeffs, lambda, n, z0)?;
            let det = a * d - b * c;
            let scale = (a * d).norm() + (b * c).norm();
            if !(det.norm() > 1e-12 * scale) {
                return Err(Error::SingularMatch(det.norm()));
            }
            (cdiv(ybar0 * d - b * y1, det), cdiv(a * y1 - c * ybar0, det))
        }
    };
    Ok(OlverApproximant { lambda, order: n, c_plus, c_minus, coeffs: coeffs.clone() })
}

/// `y(z) − c₊·y_n⁺(z)` for a linear Plus problem with `y(0) = y₀`, obtained
/// without cancellation as `c₊·R(z)`, where `R` solves
/// `z·R'' + 2Λ·R' = g·R + A_n'/(2Λ)^{n−1}`, `R(0) = 0`.
pub fn remainder_plus(
    coeffs: &CoefficientSequence,
    problem: &ProblemSpec,
    n: usize,
    options: &SolveOptions,
) -> Result<Complex64> {
    let RightHandSide::Linear { g, source: None } = &problem.rhs else {
        return Err(Error::KindMismatch("the Olver remainder needs a homogeneous linear problem".into()));
    };
    coeffs.check_index(n)?;
    let approx = normalize_to_problem(coeffs, problem.lambda, problem, n)?;
    // The equation is linear, so R is solved with a source rescaled to make
    // it O(1); the relative stopping rule then applies to R itself.
    let path = problem.path()?;
    let length = path.length();
    let panel = path.panels()[0];
    let mut amax: f64 = 0.0;
    for &tau in ChebGrid::shared(33).nodes() {
        amax = amax.max(coeffs.derivative(n, panel.point(tau))?.norm());
    }
    if amax == 0.0 {
        return Ok(Complex64::default());
    }
    let nu = problem.lambda.two_lambda_minus_one().norm();
    let rescale = nu / (length * amax);
    let shared = coeffs.clone();
    let source: Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync> =
        Arc::new(move |t| shared.derivative(n, t).unwrap_or(Complex64::new(f64::NAN, f64::NAN)) * rescale);
    let mut remainder_problem = problem.clone();
    remainder_problem.data = InitialData::Plus { y0: Complex64::default() };
    remainder_problem.rhs = RightHandSide::Linear { g: g.clone(), source: Some(source) };
    let result = solve(&remainder_problem, options)?;
    let power = problem.lambda.two_lambda().powi(n as i32 - 1);
    Ok(approx.c_plus * cdiv(result.final_iterate().last(), power * rescale))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lam(re: f64) -> LargeParameter {
        LargeParameter::real(re).unwrap()
    }

    fn unit_sequence(count: usize) -> CoefficientSequence {
        CoefficientSequence::polynomial(&ComplexPolynomial::one(), count)
    }

    #[test]
    fn polynomial_arithmetic() {
        let p = ComplexPolynomial::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.eval(c(2.0, 0.0)), c(17.0, 0.0));
        assert_eq!(p.derivative(), ComplexPolynomial::from_real(&[2.0, 6.0]));
        assert_eq!(p.antiderivative(), ComplexPolynomial::from_real(&[0.0, 1.0, 1.0, 1.0]));
        assert!(p.sub(&p).is_zero());
        assert_eq!(p.mul(&ComplexPolynomial::from_real(&[0.0, 1.0])), p.mul_z());
        assert_eq!(ComplexPolynomial::from_real(&[1.0, 0.0, 0.0]).degree(), Some(0));
    }

    #[test]
    fn zero_coefficient_keeps_a_constant() {
        let seq = CoefficientSequence::polynomial(&ComplexPolynomial::zero(), 6);
        for a in seq.polynomials().unwrap() {
            assert_eq!(a, &ComplexPolynomial::one());
        }
    }

    #[test]
    fn linear_coefficient_first_step() {
        let seq = CoefficientSequence::polynomial(&ComplexPolynomial::from_real(&[0.0, 1.0]), 2);
        assert_eq!(seq.polynomials().unwrap()[1], ComplexPolynomial::from_real(&[1.0, 0.0, 0.5]));
    }

    #[test]
    fn partial_sums() {
        let seq = unit_sequence(4);
        let l = lam(5.0);
        assert_eq!(partial_sum_plus(&seq, l, 1, c(0.7, 0.2)).unwrap(), c(1.0, 0.0));
        let z = c(0.5, 0.3);
        let m = partial_sum_minus(&seq, l, 1, z).unwrap();
        assert!((m - z.powc(c(-9.0, 0.0))).norm() < 1e-12 * m.norm());
        let s = partial_sum_plus(&seq, l, 3, c(1.0, 0.0)).unwrap();
        assert!((s - c(1.225, 0.0)).norm() < 1e-15);
        assert!(matches!(partial_sum_minus(&seq, l, 2, c(0.0, 0.0)), Err(Error::OriginError)));
    }

    #[test]
    fn minus_derivative_matches_finite_difference() {
        let seq = unit_sequence(5);
        let l = LargeParameter::new(c(3.0, 0.5)).unwrap();
        let z = c(0.8, 0.1);
        let h = 1e-6;
        let fd = (partial_sum_minus(&seq, l, 4, z + h).unwrap() - partial_sum_minus(&seq, l, 4, z - h).unwrap())
            / (2.0 * h);
        let d = partial_sum_minus_derivative(&seq, l, 4, z).unwrap();
        assert!((fd - d).norm() < 1e-7 * d.norm());
    }

    #[test]
    fn bound_values() {
        let seq = unit_sequence(3);
        let path = Path::ray(&RaySegment::from_angle(0.0, 1.0).unwrap());
        let one = |_: Complex64| c(1.0, 0.0);
        let b = olver_remainder_bound(&seq, &one, lam(5.0), 1, Branch::Plus, &path).unwrap();
        assert!((b - 2.0 / 9.0 * (2.0f64 / 9.0).exp()).abs() < 1e-12);
        let zero = CoefficientSequence::polynomial(&ComplexPolynomial::zero(), 4);
        let zg = |_: Complex64| c(0.0, 0.0);
        assert_eq!(olver_remainder_bound(&zero, &zg, lam(5.0), 2, Branch::Plus, &path).unwrap(), 0.0);
    }

    #[test]
    fn plus_normalization() {
        let seq = unit_sequence(4);
        let seg = RaySegment::from_angle(0.0, 1.0).unwrap();
        let p = ProblemSpec::plus(lam(5.0), seg, c(1.0, 0.0), RightHandSide::linear(|_| c(1.0, 0.0)));
        let a1 = normalize_to_problem(&seq, lam(5.0), &p, 1).unwrap();
        assert_eq!(a1.c_plus, c(1.0, 0.0));
        assert_eq!(a1.eval(c(0.4, 0.0)).unwrap(), c(1.0, 0.0));
        let a3 = normalize_to_problem(&seq, lam(5.0), &p, 3).unwrap();
        assert!((a3.c_plus - c(1.0 / 1.11, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn grid_backend_anchor_check() {
        let seq = CoefficientSequence::grid(&|_| c(1.0, 0.0), c(1.0, 0.0), 33, 3).unwrap();
        assert_eq!(seq.order(), 3);
        assert!(seq.polynomials().is_none());
        let path = Path::from_anchor(c(1.0, 0.0), c(0.5, 0.0)).unwrap();
        let g = GridFunction::constant(path, ChebGrid::shared(9), c(1.0, 0.0));
        assert!(matches!(
            next_coefficient(CoefficientInput::Grid(&g, &g)),
            Err(Error::BackendMismatch(_))
        ));
    }

    #[test]
    fn unit_coefficients_are_exact() {
        let seq = unit_sequence(6);
        let expected: [&[f64]; 6] = [
            &[1.0],
            &[1.0, 1.0],
            &[1.0, 1.0, 0.5],
            &[1.0, 1.0, 0.0, 1.0 / 6.0],
            &[1.0, 1.0, 0.5, -1.0 / 3.0, 1.0 / 24.0],
            &[1.0, 1.0, 0.0, 5.0 / 6.0, -5.0 / 24.0, 1.0 / 120.0],
        ];
        for (a, e) in seq.polynomials().unwrap().iter().zip(expected) {
            assert_eq!(a.coefficients().len(), e.len());
            for (x, y) in a.coefficients().iter().zip(e) {
                assert!((x - y).norm() <= 1e-14);
            }
        }
    }

    #[test]
    fn spectral_and_termwise_derivatives_agree() {
        let seq = unit_sequence(5);
        let l = LargeParameter::new(c(7.0, 2.0)).unwrap();
        let path = Path::ray(&RaySegment::from_angle(0.9, 1.5).unwrap());
        let y = GridFunction::from_fn(path, ChebGrid::shared(33), |z| partial_sum_plus(&seq, l, 5, z).unwrap());
        let d = y.differentiate();
        for (z, v) in d.points().into_iter().zip(d.values()) {
            assert!((v - partial_sum_plus_derivative(&seq, l, 5, z).unwrap()).norm() < 1e-11);
        }
    }

    #[test]
    fn grid_step_matches_polynomial_step() {
        let path = Path::ray(&RaySegment::from_angle(0.5, 1.0).unwrap());
        let grid = ChebGrid::shared(17);
        let a = GridFunction::constant(path.clone(), grid.clone(), c(1.0, 0.0));
        let g = GridFunction::from_fn(path, grid, |z| z);
        let CoefficientValue::Grid(next) = next_coefficient(CoefficientInput::Grid(&a, &g)).unwrap() else {
            panic!("grid input gives a grid value")
        };
        for (z, v) in next.points().into_iter().zip(next.values()) {
            assert!((v - (1.0 + z * z / 2.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn backends_agree() {
        let gp = ComplexPolynomial::new(vec![c(0.5, -0.2), c(0.3, 0.4), c(-0.1, 0.2)]);
        let poly = CoefficientSequence::polynomial(&gp, 9);
        let end = c(0.8, 0.6);
        let g = gp.clone();
        let grid = CoefficientSequence::grid(&move |z| g.eval(z), end, 65, 9).unwrap();
        for (k, f) in grid.grid_functions().unwrap().iter().enumerate() {
            for (z, v) in f.points().into_iter().zip(f.values()) {
                assert!((v - poly.value(k, z).unwrap()).norm() < 1e-11, "k = {k}");
            }
        }
    }

    #[test]
    fn remainder_bound_ratio() {
        let seq = unit_sequence(5);
        let path = Path::ray(&RaySegment::from_angle(0.0, 1.0).unwrap());
        let one = |_: Complex64| c(1.0, 0.0);
        let l = lam(5.0);
        let grid = ChebGrid::shared(129);
        let norm = |k: usize| GridFunction::from_fn(path.clone(), grid.clone(), |z| seq.derivative(k, z).unwrap()).l1_norm();
        for n in 1..4 {
            let a = olver_remainder_bound(&seq, &one, l, n, Branch::Plus, &path).unwrap();
            let b = olver_remainder_bound(&seq, &one, l, n + 1, Branch::Plus, &path).unwrap();
            assert!((b / a - norm(n + 1) / (norm(n) * 10.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn bound_dominates_unit_example() {
        use crate::specfun::example_reference_plus;
        let seq = unit_sequence(6);
        let path = Path::ray(&RaySegment::from_angle(0.0, 1.0).unwrap());
        let one = |_: Complex64| c(1.0, 0.0);
        for l in [lam(5.0), lam(100.0)] {
            for n in [1, 3, 5] {
                let bound = olver_remainder_bound(&seq, &one, l, n, Branch::Plus, &path).unwrap();
                let scale = partial_sum_plus(&seq, l, n, c(0.0, 0.0)).unwrap();
                for &tau in ChebGrid::shared(17).nodes() {
                    let z = c(tau, 0.0);
                    let exact = scale * example_reference_plus(l, z).unwrap();
                    let observed = (exact - partial_sum_plus(&seq, l, n, z).unwrap()).norm();
                    assert!(observed <= bound, "Λ = {:?}, n = {n}", l.value());
                }
            }
        }
    }

    #[test]
    fn error_scales_like_a_power_of_lambda() {
        let seg = RaySegment::from_angle(0.0, 1.0).unwrap();
        let seq = unit_sequence(5);
        for n in 1..=3 {
            let errors: Vec<f64> = [25.0, 50.0, 100.0]
                .iter()
                .map(|&l| {
                    let p = ProblemSpec::plus(lam(l), seg, c(1.0, 0.0), RightHandSide::linear(|_| c(1.0, 0.0)));
                    remainder_plus(&seq, &p, n, &SolveOptions::default()).unwrap().norm()
                })
                .collect();
            let expected = 2f64.powi(n as i32);
            for w in errors.windows(2) {
                let ratio = w[0] / w[1] / expected;
                assert!((1.0 / 3.0..=3.0).contains(&ratio), "n = {n}: {errors:?}");
            }
        }
    }

    #[test]
    fn minus_normalization_table_cell() {
        use crate::specfun::{example_minus_data, example_reference_minus};
        let l = lam(5.0);
        let (ybar0, y1) = example_minus_data(l).unwrap();
        let p = ProblemSpec::minus(l, c(1.0, 0.0), c(0.5, 0.0), ybar0, y1, RightHandSide::linear(|_| c(1.0, 0.0)))
            .unwrap();
        let seq = unit_sequence(4);
        let approx = normalize_to_problem(&seq, l, &p, 3).unwrap();
        let z = c(0.5, 0.0);
        let exact = example_reference_minus(l, z).unwrap();
        let err = crate::numeric::relative_error(approx.eval(z).unwrap(), exact);
        assert!((err / 0.00120818 - 1.0).abs() < 0.01, "{err}");
        // The matched approximant reproduces the data at the anchor.
        assert!((approx.eval(c(1.0, 0.0)).unwrap() - ybar0).norm() < 1e-12 * ybar0.norm());
    }

    #[test]
    fn minus_normalization_rejects_degenerate_data() {
        let p = ProblemSpec::minus(lam(5.0), c(1.0, 0.0), c(0.5, 0.0), c(1.0, 0.0), c(0.0, 0.0), RightHandSide::linear(|_| c(0.0, 0.0)))
            .unwrap();
        let seq = CoefficientSequence::polynomial(&ComplexPolynomial::zero(), 2);
        let approx = normalize_to_problem(&seq, lam(5.0), &p, 1).unwrap();
        assert!((approx.c_plus - c(1.0, 0.0)).norm() < 1e-14);
        assert!(approx.c_minus.norm() < 1e-14);
        assert!(matches!(normalize_to_problem(&seq, lam(5.0), &p, 0), Err(Error::Domain(_))));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn formal_residual_identity(re in 1.0f64..100.0, im in -30.0f64..30.0, theta in -3.0f64..3.0,
                                   radius in 0.2f64..2.0, coeffs in proptest::collection::vec((-0.7f64..0.7, -0.7f64..0.7), 1..5),
                                   n in 1usize..7) {
            let g = ComplexPolynomial::new(coeffs.iter().map(|&(a, b)| c(a, b)).collect());
            let l = LargeParameter::new(c(re, im)).unwrap();
            let seq = CoefficientSequence::polynomial(&g, n + 1);
            let mut y = ComplexPolynomial::zero();
            for (k, a) in seq.polynomials().unwrap().iter().take(n).enumerate() {
                y = y.add(&a.scale(l.two_lambda().powi(-(k as i32))));
            }
            let (d1, d2) = (y.derivative(), y.derivative().derivative());
            let power = l.two_lambda().powi(n as i32 - 1);
            for i in 0..=16 {
                let z = Complex64::from_polar(radius * i as f64 / 16.0, theta);
                let lhs = z * d2.eval(z) + l.two_lambda() * d1.eval(z) - g.eval(z) * y.eval(z);
                let rhs = -seq.derivative(n, z).unwrap() / power;
                let scale = (z * d2.eval(z)).norm() + (l.two_lambda() * d1.eval(z)).norm() + (g.eval(z) * y.eval(z)).norm();
                proptest::prop_assert!((lhs - rhs).norm() <= 1e-9 * scale.max(rhs.norm()));
            }
        }
    }
}

