use num_complex::Complex64;

use super::SpecFunConfig;
use crate::error::{Error, Result};

/// `₀F₁(; b; z) = Σ z^k / (k!·(b)_k)`.
pub fn hyp0f1(b: Complex64, z: Complex64) -> Result<Complex64> {
    hyp0f1_with(b, z, &SpecFunConfig::default())
}

pub fn hyp0f1_with(b: Complex64, z: Complex64, cfg: &SpecFunConfig) -> Result<Complex64> {
    if b.im == 0.0 && b.re <= 0.0 && b.re == b.re.round() {
        return Err(Error::Pole(b));
    }
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev = f64::INFINITY;
    for k in 1..=cfg.max_terms {
        term *= z / (k as f64 * (b + (k - 1) as f64));
        sum += term;
        let size = term.norm();
        if size <= cfg.series_tol * sum.norm() && size < prev {
            return Ok(sum);
        }
        prev = size;
    }
    Err(Error::NoConvergence(format!("0F1({b}; {z}) after {} terms", cfg.max_terms)))
}
