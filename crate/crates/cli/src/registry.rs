//! Named right-hand sides available from the command line.

use largeparam::olver::ComplexPolynomial;
use largeparam::{Complex64, RightHandSide};

pub struct RhsEntry {
    pub rhs: RightHandSide,
    /// `g` as a polynomial when it is one, for the exact coefficient backend.
    pub polynomial: Option<ComplexPolynomial>,
    pub linear: bool,
}

pub const NAMES: [&str; 4] = ["unit", "zero", "linear", "cos"];

pub fn lookup(name: &str) -> Option<RhsEntry> {
    let poly = |coeffs: &[f64]| ComplexPolynomial::from_real(coeffs);
    let entry = match name {
        "unit" => RhsEntry {
            rhs: RightHandSide::linear(|_| Complex64::new(1.0, 0.0)),
            polynomial: Some(poly(&[1.0])),
            linear: true,
        },
        "zero" => RhsEntry {
            rhs: RightHandSide::linear(|_| Complex64::new(0.0, 0.0)),
            polynomial: Some(ComplexPolynomial::zero()),
            linear: true,
        },
        "linear" => RhsEntry { rhs: RightHandSide::linear(|z| z), polynomial: Some(poly(&[0.0, 1.0])), linear: true },
        "cos" => RhsEntry {
            rhs: RightHandSide::nonlinear(|_, y: Complex64| y.cos(), 1.0),
            polynomial: None,
            linear: false,
        },
        _ => return None,
    };
    Some(entry)
}
