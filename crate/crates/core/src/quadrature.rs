//! Green's-kernel integrals on Chebyshev grids.
//!
//! A [`KernelIntegralPlan`] assembles the Volterra operator of one problem
//! into a dense matrix once, so each Picard step costs a single matrix-vector
//! product. Two kernels are supported:
//!
//! * Plus: `(K F)(z) = (z/ν)∫₀¹ (1 − s^ν) F(zs) ds`, `ν = 2Λ − 1`, integrated
//!   against the modified moments of `s^ν`, exact for polynomial `F`;
//! * Minus (rescaled): `(K F)(z) = (1/ν)∫_{z₀}^{z} [(z/t)^ν − 1] F(t) dt`,
//!   integrated by Clenshaw–Curtis rules sized per target from the Chebyshev
//!   tail of the kernel.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Path;
use crate::grid::{coefficient_tail, ChebGrid, GridFunction};
use crate::param::LargeParameter;

const KERNEL_TAIL_TOL: f64 = 1e-15;
const MAX_KERNEL_NODES: usize = 4097;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Plus,
    Minus,
}

/// The Volterra operator of one problem, discretized on `path × grid`.
#[derive(Debug, Clone)]
pub struct KernelIntegralPlan {
    kind: KernelKind,
    lambda: LargeParameter,
    path: Path,
    grid: Arc<ChebGrid>,
    // row-major, (panels·n) × (panels·n)
    matrix: Arc<Vec<Complex64>>,
    // Plus only: s-quadrature weights for ∫₀¹ (1 − s^ν) h(s) ds
    plus_weights: Option<Arc<Vec<Complex64>>>,
}

/// `μ_k = ∫₀¹ s^ν T_k(2s − 1) ds` for `k < n`.
pub fn power_moments(nu: Complex64, n: usize) -> Vec<Complex64> {
    let mut mu = Vec::with_capacity(n);
    let m0 = 1.0 / (nu + 1.0);
    mu.push(m0);
    if n > 1 {
        mu.push(2.0 / (nu + 2.0) - m0);
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        let next = (2.0 * nu * mu[k] + (kf - nu - 2.0) * mu[k - 1]) / (kf + nu + 2.0);
        mu.push(next);
    }
    mu
}

/// Weights `ω_k` on the nodes of `grid` with `Σ ω_k h(σ_k) = ∫₀¹ (1 − s^ν) h(s) ds`
/// for every polynomial `h` of degree below the node count.
pub fn plus_kernel_weights(grid: &ChebGrid, nu: Complex64) -> Vec<Complex64> {
    let mu = power_moments(nu, grid.len());
    grid.weights()
        .iter()
        .zip(grid.weights_for_moments(&mu))
        .map(|(&w, m)| w - m)
        .collect()
}

impl KernelIntegralPlan {
    /// Plus kernel on a single radial panel starting at the origin.
    pub fn plus(lambda: LargeParameter, path: Path, grid: Arc<ChebGrid>) -> Result<Self> {
        if !path.is_radial() || path.start().norm() != 0.0 {
            return Err(Error::GridMismatch("the Plus kernel needs a radial path from the origin".into()));
        }
        let nu = lambda.two_lambda_minus_one();
        let n = grid.len();
        let omega = plus_kernel_weights(&grid, nu);
        let panel = path.panels()[0];
        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let tau = grid.nodes()[i];
                let mut row = vec![Complex64::default(); n];
                if tau == 0.0 {
                    return row;
                }
                for (sigma, w) in grid.nodes().iter().zip(&omega) {
                    let basis = grid.lagrange_basis(tau * sigma);
                    for (r, b) in row.iter_mut().zip(basis) {
                        *r += w * b;
                    }
                }
                let scale = panel.point(tau) / nu;
                row.iter_mut().for_each(|r| *r *= scale);
                row
            })
            .collect();
        Ok(Self {
            kind: KernelKind::Plus,
            lambda,
            path,
            grid,
            matrix: Arc::new(rows.concat()),
            plus_weights: Some(Arc::new(omega)),
        })
    }

    /// Rescaled Minus kernel on a path starting at the anchor.
    pub fn minus(lambda: LargeParameter, path: Path, grid: Arc<ChebGrid>) -> Result<Self> {
        let nu = lambda.two_lambda_minus_one();
        let n = grid.len();
        let targets: Vec<(usize, usize)> =
            (0..path.len()).flat_map(|p| (0..n).map(move |i| (p, i))).collect();
        let rows: Vec<Vec<Complex64>> = targets
            .par_iter()
            .map(|&(p, i)| {
                let tau = grid.nodes()[i];
                let log_z = path.panels()[p].log_point(tau);
                let kernel = |log_t: Complex64| (nu * (log_z - log_t)).exp() - 1.0;
                let mut row = volterra_row(&path, &grid, p, tau, &kernel);
                row.iter_mut().for_each(|r| *r /= nu);
                row
            })
            .collect();
        Ok(Self {
            kind: KernelKind::Minus,
            lambda,
            path,
            grid,
            matrix: Arc::new(rows.concat()),
            plus_weights: None,
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn lambda(&self) -> LargeParameter {
        self.lambda
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn grid(&self) -> &Arc<ChebGrid> {
        &self.grid
    }

    /// Number of sample points (panels × nodes).
    pub fn size(&self) -> usize {
        self.path.len() * self.grid.len()
    }

    /// Arc-length quadrature weights over all sample points; they sum to the
    /// path length.
    pub fn weights(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.size());
        for panel in self.path.panels() {
            for (&tau, &w) in self.grid.nodes().iter().zip(self.grid.weights()) {
                out.push(w * panel.tangent(tau).norm());
            }
        }
        out
    }

    fn check(&self, f: &GridFunction) -> Result<()> {
        if f.grid().len() != self.grid.len() || f.path() != &self.path {
            return Err(Error::GridMismatch(format!(
                "function sampled on {} nodes × {} panels, plan built for {} × {}",
                f.grid().len(),
                f.path().len(),
                self.grid.len(),
                self.path.len()
            )));
        }
        Ok(())
    }

    /// The operator applied at every sample point.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.check(f)?;
        Ok(GridFunction::from_values(self.path.clone(), self.grid.clone(), self.apply_values(f.values()))
            .expect("layout checked"))
    }

    /// Matrix-vector product on raw sample values.
    pub fn apply_values(&self, values: &[Complex64]) -> Vec<Complex64> {
        let size = self.size();
        self.matrix
            .par_chunks(size)
            .map(|row| row.iter().zip(values).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Row of the discretized operator `F ↦ ∫_{path start}^{z} κ(t) F(t) dt` at the
/// target `z` = parameter `tau` of panel `p`. `kernel` receives `ln t` with a
/// continuous argument along the path.
fn volterra_row(
    path: &Path,
    grid: &ChebGrid,
    p: usize,
    tau: f64,
    kernel: &dyn Fn(Complex64) -> Complex64,
) -> Vec<Complex64> {
    let n = grid.len();
    let mut row = vec![Complex64::default(); path.len() * n];
    for q in 0..=p {
        let b = if q == p { tau } else { 1.0 };
        if b == 0.0 {
            continue;
        }
        let panel = path.panels()[q];
        let integrand = |u: f64| {
            let sigma = b * u;
            kernel(panel.log_point(sigma)) * panel.tangent(sigma) * b
        };
        let mut m = 17;
        loop {
            let probe = ChebGrid::shared(m);
            let samples: Vec<Complex64> = probe.nodes().iter().map(|&u| integrand(u)).collect();
            if coefficient_tail(&probe.coefficients(&samples)) < KERNEL_TAIL_TOL || m >= MAX_KERNEL_NODES {
                break;
            }
            m = 2 * m - 1;
        }
        let quad = ChebGrid::shared(m + n);
        let block = &mut row[q * n..(q + 1) * n];
        for (&u, &w) in quad.nodes().iter().zip(quad.weights()) {
            let val = integrand(u) * w;
            for (r, basis) in block.iter_mut().zip(grid.lagrange_basis(b * u)) {
                *r += val * basis;
            }
        }
    }
    row
}

/// `(z/ν)∫₀¹ (1 − s^ν) F(zs) ds` at a point `z` of the plan's segment.
pub fn apply_plus_kernel(plan: &KernelIntegralPlan, f: &GridFunction, z: Complex64) -> Result<Complex64> {
    plan.check(f)?;
    let weights = plan
        .plus_weights
        .as_ref()
        .ok_or_else(|| Error::KindMismatch("plan does not carry the Plus kernel".into()))?;
    let (_, tau) = plan.path.locate(z).ok_or(Error::OffSegment(z))?;
    let nu = plan.lambda.two_lambda_minus_one();
    let sum: Complex64 = plan
        .grid
        .nodes()
        .iter()
        .zip(weights.iter())
        .map(|(&sigma, w)| w * f.interpolate(0, tau * sigma))
        .sum();
    Ok(z / nu * sum)
}

/// `(1/ν)∫_{z₀}^{z} [1 − (t/z)^ν] F(t) dt` along the plan's path, where `z₀`
/// is the start of the path.
pub fn apply_minus_kernel(
    plan: &KernelIntegralPlan,
    f: &GridFunction,
    z: Complex64,
    z0: Complex64,
) -> Result<Complex64> {
    plan.check(f)?;
    if (plan.path.start() - z0).norm() > 1e-12 * z0.norm().max(1.0) {
        return Err(Error::GridMismatch(format!("plan path starts at {}, not {z0}", plan.path.start())));
    }
    let (p, tau) = plan.path.locate(z).ok_or(Error::OffSegment(z))?;
    if plan.path.is_radial() && z.norm() > z0.norm() {
        return Err(Error::AnchorOrder(format!("|z| = {} exceeds |z0| = {}", z.norm(), z0.norm())));
    }
    let nu = plan.lambda.two_lambda_minus_one();
    let log_z = plan.path.panels()[p].log_point(tau);
    let kernel = |log_t: Complex64| 1.0 - (nu * (log_t - log_z)).exp();
    let row = volterra_row(&plan.path, &plan.grid, p, tau, &kernel);
    Ok(row.iter().zip(f.values()).map(|(a, b)| a * b).sum::<Complex64>() / nu)
}

/// Largest kernel modulus over grid samples: `|1 − s^ν|` (Plus) or
/// `|(z/t)^ν − 1|` over ordered node pairs (Minus).
pub fn kernel_bound_check(plan: &KernelIntegralPlan) -> f64 {
    let nu = plan.lambda.two_lambda_minus_one();
    match plan.kind {
        KernelKind::Plus => plan
            .grid
            .nodes()
            .iter()
            .map(|&s| if s == 0.0 { 1.0 } else { (1.0 - (nu * s.ln()).exp()).norm() })
            .fold(0.0, f64::max),
        KernelKind::Minus => path_kernel_sup(&plan.path, &plan.grid, plan.lambda),
    }
}

/// `max |(z/t)^ν − 1|` over node pairs with `t` between the path start and `z`.
pub fn path_kernel_sup(path: &Path, grid: &ChebGrid, lambda: LargeParameter) -> f64 {
    let nu = lambda.two_lambda_minus_one();
    let logs: Vec<Complex64> = path
        .panels()
        .iter()
        .flat_map(|panel| grid.nodes().iter().map(move |&tau| panel.log_point(tau)))
        .collect();
    (0..logs.len())
        .into_par_iter()
        .map(|zi| logs[..=zi].iter().map(|&lt| ((nu * (logs[zi] - lt)).exp() - 1.0).norm()).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

/// `∫ |F(t)| |dt|` along the path.
pub fn l1_norm(f: &GridFunction) -> f64 {
    f.l1_norm()
}

/// `max |F|` over the sample points.
pub fn sup_norm(f: &GridFunction) -> f64 {
    f.sup_norm()
}

/// Spectral derivative along the path.
pub fn differentiate(f: &GridFunction) -> GridFunction {
    f.differentiate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RaySegment;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lam(re: f64, im: f64) -> LargeParameter {
        LargeParameter::new(c(re, im)).unwrap()
    }

    fn plus_plan(l: LargeParameter, theta: f64, radius: f64, n: usize) -> KernelIntegralPlan {
        let seg = RaySegment::from_angle(theta, radius).unwrap();
        KernelIntegralPlan::plus(l, Path::ray(&seg), ChebGrid::shared(n)).unwrap()
    }

    #[test]
    fn moments_match_exact_integrals_for_integer_powers() {
        let fine = ChebGrid::shared(64);
        for p in [1u32, 3, 8] {
            let mu = power_moments(c(p as f64, 0.0), 20);
            for (k, m) in mu.iter().enumerate() {
                let vals: Vec<Complex64> = (0..64)
                    .map(|i| c(fine.nodes()[i].powi(p as i32) * fine.cheb_at_node(k, i), 0.0))
                    .collect();
                assert!((fine.integrate(&vals) - m).norm() < 1e-14, "p={p} k={k}");
            }
        }
    }

    #[test]
    fn plus_kernel_closed_forms() {
        let l = lam(5.0, 0.0);
        let plan = plus_plan(l, 0.3, 2.0, 33);
        let z = plan.path().end();
        let zero = GridFunction::constant(plan.path().clone(), plan.grid().clone(), c(0.0, 0.0));
        assert_eq!(apply_plus_kernel(&plan, &zero, z).unwrap(), c(0.0, 0.0));
        let one = GridFunction::constant(plan.path().clone(), plan.grid().clone(), c(1.0, 0.0));
        let got = apply_plus_kernel(&plan, &one, z).unwrap();
        assert!((got - z / 10.0).norm() < 1e-14);
        let id = GridFunction::from_fn(plan.path().clone(), plan.grid().clone(), |t| t);
        let got = apply_plus_kernel(&plan, &id, z).unwrap();
        assert!((got - z * z / 22.0).norm() < 1e-14);
        let applied = plan.apply(&id).unwrap();
        for (v, t) in applied.values().iter().zip(applied.points()) {
            assert!((v - t * t / 22.0).norm() < 1e-14);
        }
    }

    #[test]
    fn plus_kernel_rejects_foreign_grids() {
        let plan = plus_plan(lam(5.0, 0.0), 0.0, 1.0, 17);
        let other = GridFunction::constant(plan.path().clone(), ChebGrid::shared(33), c(1.0, 0.0));
        assert!(matches!(plan.apply(&other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn minus_kernel_closed_form_at_unit_exponent() {
        // ν = 1: ∫_{z0}^{z} (1 − t/z) dt = (z − z0) − (z² − z0²)/(2z)
        let l = lam(1.0, 0.0);
        let path = Path::from_anchor(c(1.0, 0.0), c(0.5, 0.0)).unwrap();
        let plan = KernelIntegralPlan::minus(l, path.clone(), ChebGrid::shared(17)).unwrap();
        let one = GridFunction::constant(path, plan.grid().clone(), c(1.0, 0.0));
        let z = c(0.5, 0.0);
        let got = apply_minus_kernel(&plan, &one, z, c(1.0, 0.0)).unwrap();
        assert!((got - c(0.25, 0.0)).norm() < 1e-12);
        let at_anchor = apply_minus_kernel(&plan, &one, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(at_anchor, c(0.0, 0.0));
    }

    #[test]
    fn rescaled_minus_matrix_on_polynomials() {
        // ∫_{z0}^{z} [(z/t)^ν − 1] t^k dt in closed form
        let l = lam(5.0, 1.0);
        let nu = l.two_lambda_minus_one();
        let z0 = c(1.0, 0.0);
        let exact = |z: Complex64, k: i32| {
            let kf = k as f64;
            let a = z.powc(nu) * (z.powc(kf + 1.0 - nu) - z0.powc(kf + 1.0 - nu)) / (kf + 1.0 - nu);
            let b = (z.powi(k + 1) - z0.powi(k + 1)) / (kf + 1.0);
            (a - b) / nu
        };
        for end in [c(0.5, 0.0), c(-1.0, 0.25)] {
            let path = Path::from_anchor(z0, end).unwrap();
            let plan = KernelIntegralPlan::minus(l, path.clone(), ChebGrid::shared(33)).unwrap();
            for k in [0, 2] {
                let f = GridFunction::from_fn(path.clone(), plan.grid().clone(), |t| t.powi(k));
                let applied = plan.apply(&f).unwrap();
                for (v, t) in applied.values().iter().zip(applied.points()).skip(1) {
                    let want = exact(t, k);
                    assert!((v - want).norm() < 1e-12 * want.norm().max(1e-3), "{t} {v} {want}");
                }
            }
        }
    }

    #[test]
    fn weights_sum_to_length() {
        let plan = plus_plan(lam(5.0, 0.0), 1.0, 2.0, 33);
        assert!((plan.weights().iter().sum::<f64>() - 2.0).abs() < 1e-12 * 2.0);
        let path = Path::from_anchor(c(1.0, 0.0), c(-1.0, 0.25)).unwrap();
        let len = path.length();
        let plan = KernelIntegralPlan::minus(lam(5.0, 0.0), path, ChebGrid::shared(17)).unwrap();
        assert!((plan.weights().iter().sum::<f64>() - len).abs() < 1e-12 * len);
    }

    #[test]
    fn kernel_bounds_for_table_parameters() {
        for l in [lam(50.0, -2.0), lam(25.0, 5.0), lam(0.75, 0.0), lam(5.0, 0.0)] {
            let plan = plus_plan(l, 0.0, 1.0, 33);
            assert!(kernel_bound_check(&plan) <= 2.0 + 1e-12);
            let path = Path::from_anchor(c(1.0, 0.0), c(0.5, 0.0)).unwrap();
            let plan = KernelIntegralPlan::minus(l, path, ChebGrid::shared(17)).unwrap();
            assert!(kernel_bound_check(&plan) <= 2.0 + 1e-12);
        }
        let real = plus_plan(lam(3.0, 0.0), 0.0, 1.0, 33);
        assert!(kernel_bound_check(&real) <= 1.0 + 1e-15);
    }

    #[test]
    fn norms_and_derivative() {
        let seg = RaySegment::from_angle(0.0, 2.0).unwrap();
        let one = GridFunction::constant(Path::ray(&seg), ChebGrid::shared(17), c(1.0, 0.0));
        assert!((l1_norm(&one) - 2.0).abs() < 1e-13);
        assert_eq!(sup_norm(&one), 1.0);
        let sq = GridFunction::from_fn(Path::ray(&seg), ChebGrid::shared(17), |z| z * z);
        let d = differentiate(&sq);
        for (v, z) in d.values().iter().zip(d.points()) {
            assert!((v - 2.0 * z).norm() < 1e-11);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn plus_kernel_is_exact_on_polynomials(
            re in 0.6f64..200.0, im in -20.0f64..20.0, theta in -3.1f64..3.1,
            radius in 0.2f64..2.0, k in 0usize..29,
        ) {
            let l = lam(re, im);
            let plan = plus_plan(l, theta, radius, 33);
            let f = GridFunction::from_fn(plan.path().clone(), plan.grid().clone(), |t| t.powu(k as u32));
            let z = plan.path().end();
            let got = apply_plus_kernel(&plan, &f, z).unwrap();
            let kf = k as f64;
            let want = z.powu(k as u32 + 1) / ((kf + 1.0) * (l.two_lambda() + kf));
            prop_assert!((got - want).norm() <= 1e-11 * want.norm());
        }

        #[test]
        fn plus_kernel_bounded_by_two(re in 0.51f64..300.0, im in -100.0f64..100.0) {
            let plan = plus_plan(lam(re, im), 0.0, 1.0, 65);
            prop_assert!(kernel_bound_check(&plan) <= 2.0 + 1e-12);
        }
    }
}
