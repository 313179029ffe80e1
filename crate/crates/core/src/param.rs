use num_complex::Complex64;

use crate::error::{Error, Result};

/// The large parameter Λ of `z·y'' + 2Λ·y' = g·y`, restricted to `Re Λ > 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeParameter {
    lambda: Complex64,
}

impl LargeParameter {
    pub fn new(lambda: Complex64) -> Result<Self> {
        if !(lambda.re > 0.5) || !lambda.im.is_finite() {
            return Err(Error::InvalidLambda(lambda));
        }
        Ok(Self { lambda })
    }

    #[cfg(test)]
    pub(crate) fn unchecked(lambda: Complex64) -> Self {
        Self { lambda }
    }

    pub fn real(lambda: f64) -> Result<Self> {
        Self::new(Complex64::new(lambda, 0.0))
    }

    pub fn value(&self) -> Complex64 {
        self.lambda
    }

    /// `ν = 2Λ − 1`, the exponent of every kernel power.
    pub fn two_lambda_minus_one(&self) -> Complex64 {
        2.0 * self.lambda - 1.0
    }

    pub fn two_lambda(&self) -> Complex64 {
        2.0 * self.lambda
    }

    /// `2(1 − Λ)`, the expansion variable of the second Olver solution.
    pub fn reflected(&self) -> Complex64 {
        2.0 * (1.0 - self.lambda)
    }

    /// `Λ̃² = Λ(Λ − 1)`.
    pub fn tilde_squared(&self) -> Complex64 {
        self.lambda * (self.lambda - 1.0)
    }
}

/// Maps the parameter `Λ̃` of `u'' − Λ̃² z⁻² u = h u` to `Λ = (1 + √(4Λ̃² + 1))/2`
/// using the principal square root.
pub fn lambda_from_tilde(tilde: Complex64) -> Result<LargeParameter> {
    let root = (4.0 * tilde * tilde + 1.0).sqrt();
    LargeParameter::new(0.5 * (1.0 + root))
}
