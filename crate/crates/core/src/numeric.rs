use num_complex::Complex64;

/// `a / b` without forming `|b|²`, so operands near the ends of the
/// floating-point range divide safely.
#[inline]
pub fn cdiv(a: Complex64, b: Complex64) -> Complex64 {
    let r = b.norm();
    (a / r) * (b.conj() / r)
}

/// `|a − b| / |b|`.
pub fn relative_error(approx: Complex64, reference: Complex64) -> f64 {
    (approx - reference).norm() / reference.norm()
}
