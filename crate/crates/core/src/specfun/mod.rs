//! Special functions of complex argument and order: `ln Γ`, `₀F₁`, `I_ν`, `K_ν`,
//! and the exact solutions of the `g ≡ 1` example built from them.

mod bessel;
mod gamma;
mod hyp;
mod reference;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use bessel::{bessel_i, bessel_i_with, bessel_k, bessel_k_with, log_bessel_i, log_bessel_k};
pub use gamma::{gamma, log_gamma};
pub use hyp::{hyp0f1, hyp0f1_with};
pub use reference::{example_minus_data, example_reference_minus, example_reference_plus, log_example_reference_minus};

/// Truncation and step controls shared by the series and quadrature routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunConfig {
    /// A series stops once `|term| < series_tol·|partial sum|`.
    pub series_tol: f64,
    pub max_terms: usize,
    /// Trapezoid step for the `K_ν` integral.
    pub quad_step: f64,
    /// The `K_ν` integrand is truncated where its log-magnitude falls this far
    /// below the peak (44 ≈ ln 10¹⁹).
    pub quad_cutoff: f64,
}

impl Default for SpecFunConfig {
    fn default() -> Self {
        Self { series_tol: 1e-16, max_terms: 500, quad_step: 1e-2, quad_cutoff: 44.0 }
    }
}

impl SpecFunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.series_tol > 0.0) || self.max_terms < 10 || !(self.quad_step > 0.0) || !(self.quad_cutoff > 0.0) {
            return Err(Error::Domain(format!("invalid special-function configuration {self:?}")));
        }
        Ok(())
    }
}

/// A complex number stored as its logarithm `ln|v| + i·arg v`.
///
/// Products become sums, so factors that individually overflow can be
/// combined before the final exponentiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScaled(pub Complex64);

impl LogScaled {
    pub fn from_value(v: Complex64) -> Self {
        LogScaled(v.ln())
    }

    pub fn ln_abs(&self) -> f64 {
        self.0.re
    }

    /// The represented value; `Overflow` if it is not representable.
    pub fn value(&self) -> Result<Complex64> {
        if self.0.re > f64::MAX.ln() {
            return Err(Error::Overflow);
        }
        Ok(self.0.exp())
    }
}

impl std::ops::Mul for LogScaled {
    type Output = LogScaled;

    fn mul(self, other: LogScaled) -> LogScaled {
        LogScaled(self.0 + other.0)
    }
}

impl std::ops::Div for LogScaled {
    type Output = LogScaled;

    fn div(self, other: LogScaled) -> LogScaled {
        LogScaled(self.0 - other.0)
    }
}
