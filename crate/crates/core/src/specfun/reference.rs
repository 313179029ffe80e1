use num_complex::Complex64;

use super::{hyp0f1, log_bessel_k, LogScaled, SpecFunConfig};
use crate::error::{Error, Result};
use crate::param::LargeParameter;

/// Bounded solution of `z·y'' + 2Λ·y' = y`, `y(0) = 1`: `₀F₁(; 2Λ; z)`.
pub fn example_reference_plus(lambda: LargeParameter, z: Complex64) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    hyp0f1(lambda.two_lambda(), z)
}

/// `ln[z^{1/2−Λ}·K_{2Λ−1}(2√z)]`.
pub fn log_example_reference_minus(lambda: LargeParameter, z: Complex64) -> Result<LogScaled> {
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(Error::Domain(format!("{z} lies on the branch cut (−∞, 0]")));
    }
    let k = log_bessel_k(lambda.two_lambda_minus_one(), 2.0 * z.sqrt(), &SpecFunConfig::default())?;
    Ok(LogScaled((0.5 - lambda.value()) * z.ln()) * k)
}

/// Solution of `z·y'' + 2Λ·y' = y` with `y(1) = K_{2Λ−1}(2)`, `y'(1) = −K_{2Λ}(2)`:
/// `z^{1/2−Λ}·K_{2Λ−1}(2√z)`.
pub fn example_reference_minus(lambda: LargeParameter, z: Complex64) -> Result<Complex64> {
    log_example_reference_minus(lambda, z)?.value()
}

/// Initial data `(y(1), y'(1)) = (K_{2Λ−1}(2), −K_{2Λ}(2))` of the Minus example.
pub fn example_minus_data(lambda: LargeParameter) -> Result<(Complex64, Complex64)> {
    let cfg = SpecFunConfig::default();
    let two = Complex64::new(2.0, 0.0);
    let y0 = log_bessel_k(lambda.two_lambda_minus_one(), two, &cfg)?.value()?;
    let y1 = -log_bessel_k(lambda.two_lambda(), two, &cfg)?.value()?;
    Ok((y0, y1))
}
