//! Chebyshev–Lobatto grids and functions sampled on them.
//!
//! Every panel of a [`Path`] is parametrized by `τ ∈ [0, 1]`; a [`ChebGrid`]
//! holds the nodes `τ_i = sin²(iπ/(2(n−1)))` (ascending, `τ_0 = 0`) together
//! with everything needed for interpolation, differentiation and quadrature.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{Panel, Path};

thread_local! {
    static FFT_PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Chebyshev–Lobatto grid on `[0, 1]`.
#[derive(Debug)]
pub struct ChebGrid {
    n: usize,
    tau: Vec<f64>,
    bary: Vec<f64>,
    // cos(jπ/(n−1)) for j in 0..2(n−1)
    cos_table: Vec<f64>,
    cc_weights: Vec<f64>,
    diff_matrix: OnceLock<Vec<f64>>,
}

impl ChebGrid {
    /// Builds a grid with `n ≥ 2` nodes. Prefer [`ChebGrid::shared`] for reuse.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "a Chebyshev–Lobatto grid needs at least two nodes");
        let m = n - 1;
        let tau = (0..n)
            .map(|i| {
                let s = (i as f64 * PI / (2.0 * m as f64)).sin();
                s * s
            })
            .collect();
        let bary = (0..n)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                if i == 0 || i == m {
                    0.5 * sign
                } else {
                    sign
                }
            })
            .collect();
        let cos_table = (0..2 * m).map(|j| (j as f64 * PI / m as f64).cos()).collect();
        let mut grid = Self { n, tau, bary, cos_table, cc_weights: Vec::new(), diff_matrix: OnceLock::new() };
        let moments: Vec<f64> = (0..n)
            .map(|k| if k % 2 == 0 { 1.0 / (1.0 - (k * k) as f64) } else { 0.0 })
            .collect();
        grid.cc_weights = grid.weights_for_real_moments(&moments);
        grid
    }

    /// Process-wide cached grid of size `n`.
    pub fn shared(n: usize) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<ChebGrid>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(n).or_insert_with(|| Arc::new(ChebGrid::new(n))).clone()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.tau
    }

    /// Clenshaw–Curtis weights for `∫₀¹ f(τ) dτ`.
    pub fn weights(&self) -> &[f64] {
        &self.cc_weights
    }

    /// `T_k(2τ_i − 1)`.
    #[inline]
    pub fn cheb_at_node(&self, k: usize, i: usize) -> f64 {
        let m2 = 2 * (self.n - 1);
        let c = self.cos_table[(k * i) % m2];
        if k.is_multiple_of(2) {
            c
        } else {
            -c
        }
    }

    fn half(&self, i: usize) -> f64 {
        if i == 0 || i == self.n - 1 {
            0.5
        } else {
            1.0
        }
    }

    /// Entry `(k, i)` of the matrix taking node values to Chebyshev coefficients.
    #[inline]
    fn analysis(&self, k: usize, i: usize) -> f64 {
        2.0 / (self.n - 1) as f64 * self.half(i) * self.half(k) * self.cheb_at_node(k, i)
    }

    fn weights_for_real_moments(&self, moments: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| moments.iter().enumerate().map(|(k, m)| m * self.analysis(k, i)).sum())
            .collect()
    }

    /// Node weights `w_i` with `Σ w_i f(τ_i) = Σ_k m_k c_k`, where `c_k` are the
    /// Chebyshev coefficients of the interpolant and `m_k = ∫ μ(τ) T_k(2τ−1) dτ`
    /// are the modified moments of some weight `μ`.
    pub fn weights_for_moments(&self, moments: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                moments
                    .iter()
                    .take(self.n)
                    .enumerate()
                    .map(|(k, m)| m * self.analysis(k, i))
                    .sum()
            })
            .collect()
    }

    /// Chebyshev coefficients `c_k` with `f(τ) = Σ c_k T_k(2τ − 1)`.
    pub fn coefficients(&self, values: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.n);
        if self.n < 32 {
            return (0..self.n)
                .map(|k| values.iter().enumerate().map(|(i, v)| v * self.analysis(k, i)).sum())
                .collect();
        }
        // DCT-I through an FFT of the even extension
        let m = self.n - 1;
        let mut buf: Vec<Complex64> = Vec::with_capacity(2 * m);
        buf.extend_from_slice(values);
        buf.extend(values[1..m].iter().rev());
        FFT_PLANNER.with(|planner| planner.borrow_mut().plan_fft_forward(2 * m).process(&mut buf));
        buf.truncate(self.n);
        for (k, c) in buf.iter_mut().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *c *= sign * self.half(k) / m as f64;
        }
        buf
    }

    /// Node values of `Σ c_k T_k` for any number of coefficients.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| coeffs.iter().enumerate().map(|(k, c)| c * self.cheb_at_node(k, i)).sum())
            .collect()
    }

    /// Barycentric differentiation matrix in `τ`, off-diagonal entries only.
    fn diff_matrix(&self) -> &[f64] {
        self.diff_matrix.get_or_init(|| {
            let n = self.n;
            let step = PI / (n - 1) as f64;
            let mut d = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        // τ_i − τ_j = sin((θ_i+θ_j)/2)·sin((θ_i−θ_j)/2), θ_k = kπ/(n−1)
                        let (a, b) = (i as f64 * step, j as f64 * step);
                        let diff = (0.5 * (a + b)).sin() * (0.5 * (a - b)).sin();
                        d[i * n + j] = self.bary[j] / self.bary[i] / diff;
                    }
                }
            }
            d
        })
    }

    /// Node values of `d f/dτ`.
    pub fn derivative(&self, values: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let d = self.diff_matrix();
        (0..n)
            .map(|i| {
                let fi = values[i];
                let row = &d[i * n..(i + 1) * n];
                row.iter().zip(values).map(|(&dij, &fj)| (fj - fi) * dij).sum()
            })
            .collect()
    }

    /// Node values of `∫₀^τ f(s) ds`.
    pub fn cumulative_integral(&self, values: &[Complex64]) -> Vec<Complex64> {
        let c = self.coefficients(values);
        let n = self.n;
        let at = |k: usize| if k < n { c[k] } else { Complex64::default() };
        let mut b = vec![Complex64::default(); n + 1];
        for (k, slot) in b.iter_mut().enumerate().skip(1) {
            let lower = if k == 1 { at(0) * 2.0 } else { at(k - 1) };
            *slot = (lower - at(k + 1)) / (2.0 * k as f64);
        }
        b[0] = -b
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, bk)| if k % 2 == 0 { *bk } else { -bk })
            .sum::<Complex64>();
        // dx = 2 dτ
        self.synthesize(&b).into_iter().map(|v| v * 0.5).collect()
    }

    pub fn integrate(&self, values: &[Complex64]) -> Complex64 {
        values.iter().zip(&self.cc_weights).map(|(v, w)| v * w).sum()
    }

    /// Barycentric interpolation at `τ`; exact at nodes.
    pub fn interpolate(&self, values: &[Complex64], tau: f64) -> Complex64 {
        let mut num = Complex64::default();
        let mut den = 0.0;
        for (i, (&t, &w)) in self.tau.iter().zip(&self.bary).enumerate() {
            let diff = tau - t;
            if diff == 0.0 {
                return values[i];
            }
            let q = w / diff;
            num += values[i] * q;
            den += q;
        }
        num / den
    }

    /// Barycentric basis values `ℓ_m(τ)`, summing to one.
    pub fn lagrange_basis(&self, tau: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        if let Some(i) = self.tau.iter().position(|&t| t == tau) {
            out[i] = 1.0;
            return out;
        }
        let mut den = 0.0;
        for (i, (&t, &w)) in self.tau.iter().zip(&self.bary).enumerate() {
            let q = w / (tau - t);
            out[i] = q;
            den += q;
        }
        out.iter_mut().for_each(|v| *v /= den);
        out
    }

    /// Size of the trailing Chebyshev coefficients relative to the largest one.
    pub fn tail(&self, values: &[Complex64]) -> f64 {
        coefficient_tail(&self.coefficients(values))
    }
}

/// Relative size of the last few entries of a Chebyshev coefficient sequence.
pub fn coefficient_tail(coeffs: &[Complex64]) -> f64 {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let k = (coeffs.len() / 16).max(3).min(coeffs.len());
    let tail = coeffs[coeffs.len() - k..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    tail / scale
}

/// A function sampled on every panel of a [`Path`] at the nodes of a [`ChebGrid`].
///
/// Values are stored panel-major: node `i` of panel `p` sits at `p·n + i`.
#[derive(Debug, Clone)]
pub struct GridFunction {
    path: Path,
    grid: Arc<ChebGrid>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn from_values(path: Path, grid: Arc<ChebGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != path.len() * grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for {} panels of {} nodes",
                values.len(),
                path.len(),
                grid.len()
            )));
        }
        Ok(Self { path, grid, values })
    }

    pub fn from_fn(path: Path, grid: Arc<ChebGrid>, f: impl Fn(Complex64) -> Complex64) -> Self {
        let values = node_points(&path, &grid).map(f).collect();
        Self { path, grid, values }
    }

    pub fn constant(path: Path, grid: Arc<ChebGrid>, value: Complex64) -> Self {
        let values = vec![value; path.len() * grid.len()];
        Self { path, grid, values }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn grid(&self) -> &Arc<ChebGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn panel_values(&self, p: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.values[p * n..(p + 1) * n]
    }

    /// All sample points, panel-major.
    pub fn points(&self) -> Vec<Complex64> {
        node_points(&self.path, &self.grid).collect()
    }

    pub fn point(&self, index: usize) -> Complex64 {
        let n = self.grid.len();
        self.path.panels()[index / n].point(self.grid.nodes()[index % n])
    }

    /// Value at the far end of the path.
    pub fn last(&self) -> Complex64 {
        self.values[self.values.len() - 1]
    }

    /// Value at the start of the path.
    pub fn first(&self) -> Complex64 {
        self.values[0]
    }

    pub fn same_layout(&self, other: &GridFunction) -> bool {
        self.grid.len() == other.grid.len() && self.path == other.path
    }

    fn check_layout(&self, other: &GridFunction) -> Result<()> {
        if self.same_layout(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch("grid functions live on different grids".into()))
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    /// Pointwise `f(t, v)` over sample points.
    pub fn map_with_point(&self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let values = node_points(&self.path, &self.grid).zip(&self.values).map(|(t, &v)| f(t, v)).collect();
        Self { values, ..self.clone() }
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.check_layout(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { values, ..self.clone() })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|v| v * s)
    }

    /// Interpolated value at parameter `tau` of panel `p`.
    pub fn interpolate(&self, p: usize, tau: f64) -> Complex64 {
        self.grid.interpolate(self.panel_values(p), tau)
    }

    /// Interpolated value at a point of the path.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        let (p, tau) = self.path.locate(z).ok_or(Error::OffSegment(z))?;
        Ok(self.interpolate(p, tau))
    }

    /// Spectral derivative `dF/dt` along the path.
    pub fn differentiate(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for (p, panel) in self.path.panels().iter().enumerate() {
            let d = self.grid.derivative(self.panel_values(p));
            values.extend(d.into_iter().zip(self.grid.nodes()).map(|(v, &tau)| v / panel.tangent(tau)));
        }
        Self { values, ..self.clone() }
    }

    /// `∫ F(t) dt` from the start of the path to every sample point.
    pub fn cumulative_integral(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        let mut offset = Complex64::default();
        for (p, panel) in self.path.panels().iter().enumerate() {
            let integrand: Vec<Complex64> = self
                .panel_values(p)
                .iter()
                .zip(self.grid.nodes())
                .map(|(v, &tau)| v * panel.tangent(tau))
                .collect();
            let cum = self.grid.cumulative_integral(&integrand);
            let end = offset + cum[cum.len() - 1];
            values.extend(cum.into_iter().map(|v| v + offset));
            offset = end;
        }
        Self { values, ..self.clone() }
    }

    /// `∫ F(t) dt` along the whole path.
    pub fn integral(&self) -> Complex64 {
        self.weighted_sum(|panel, tau, v| v * panel.tangent(tau))
    }

    /// `∫ |F(t)| |dt|` along the whole path.
    pub fn l1_norm(&self) -> f64 {
        self.weighted_sum(|panel, tau, v| Complex64::new(v.norm() * panel.tangent(tau).norm(), 0.0)).re
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn weighted_sum(&self, f: impl Fn(&Panel, f64, Complex64) -> Complex64) -> Complex64 {
        let mut total = Complex64::default();
        for (p, panel) in self.path.panels().iter().enumerate() {
            for ((v, &tau), w) in self.panel_values(p).iter().zip(self.grid.nodes()).zip(self.grid.weights()) {
                total += f(panel, tau, *v) * *w;
            }
        }
        total
    }

    /// Largest relative Chebyshev tail over all panels.
    pub fn chebyshev_tail(&self) -> f64 {
        (0..self.path.len()).map(|p| self.grid.tail(self.panel_values(p))).fold(0.0, f64::max)
    }

    /// Chebyshev coefficients of panel `p`.
    pub fn coefficients(&self, p: usize) -> Vec<Complex64> {
        self.grid.coefficients(self.panel_values(p))
    }

    /// Re-samples onto a grid with a different node count.
    pub fn resample(&self, grid: Arc<ChebGrid>) -> Self {
        let mut values = Vec::with_capacity(self.path.len() * grid.len());
        for p in 0..self.path.len() {
            let own = self.panel_values(p);
            values.extend(grid.nodes().iter().map(|&tau| self.grid.interpolate(own, tau)));
        }
        Self { path: self.path.clone(), grid, values }
    }
}

fn node_points<'a>(path: &'a Path, grid: &'a ChebGrid) -> impl Iterator<Item = Complex64> + 'a {
    path.panels().iter().flat_map(move |panel| grid.nodes().iter().map(move |&tau| panel.point(tau)))
}
