use num_complex::Complex64;

use super::{gamma::log_gamma, LogScaled, SpecFunConfig};
use crate::error::{Error, Result};

fn negative_integer(nu: Complex64) -> bool {
    nu.im == 0.0 && nu.re < 0.0 && nu.re == nu.re.round()
}

/// `ln I_ν(x)` from the ascending series, with the leading factor
/// `(x/2)^ν / Γ(ν+1)` kept in logarithmic form.
pub fn log_bessel_i(nu: Complex64, x: Complex64, cfg: &SpecFunConfig) -> Result<LogScaled> {
    if x.norm() == 0.0 {
        return Err(Error::Domain("ln I_ν(0) is undefined".into()));
    }
    // I_{−m} = I_m for integer m
    let nu = if negative_integer(nu) { -nu } else { nu };
    let lead = nu * (0.5 * x).ln() - log_gamma(nu + 1.0)?;
    let q = 0.25 * x * x;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev = f64::INFINITY;
    for k in 1..=cfg.max_terms {
        term *= q / (k as f64 * (nu + k as f64));
        sum += term;
        let size = term.norm();
        if size <= cfg.series_tol * sum.norm() && size < prev {
            return Ok(LogScaled(lead + sum.ln()));
        }
        prev = size;
    }
    Err(Error::NoConvergence(format!("I_{nu}({x}) series after {} terms", cfg.max_terms)))
}

/// Modified Bessel function of the first kind, principal branch.
pub fn bessel_i(nu: Complex64, x: Complex64) -> Result<Complex64> {
    bessel_i_with(nu, x, &SpecFunConfig::default())
}

pub fn bessel_i_with(nu: Complex64, x: Complex64, cfg: &SpecFunConfig) -> Result<Complex64> {
    if x.norm() == 0.0 {
        if nu.norm() == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        if nu.re > 0.0 || negative_integer(nu) {
            return Ok(Complex64::default());
        }
        return Err(Error::Domain(format!("I_{nu}(0) is unbounded")));
    }
    log_bessel_i(nu, x, cfg)?.value()
}

/// `ln K_ν(x)` from `K_ν(x) = ½∫ exp(−x·cosh t + ν·t) dt` over the real line,
/// with the contour `t = s − iα·tanh s` (`α = arg x`) so that `x·cosh t` is
/// real and positive in both tails. The trapezoid sum is formed relative to
/// the peak of the integrand and checked against the sum with twice the step.
pub fn log_bessel_k(nu: Complex64, x: Complex64, cfg: &SpecFunConfig) -> Result<LogScaled> {
    if !(x.re > 0.0) {
        return Err(Error::Domain(format!("K_ν(x) needs Re x > 0, got x = {x}")));
    }
    let alpha = x.arg();
    let h = cfg.quad_step;
    let sample = |j: i64| {
        let s = j as f64 * h;
        let sech = 1.0 / s.cosh();
        let t = Complex64::new(s, -alpha * s.tanh());
        let dt = Complex64::new(1.0, -alpha * sech * sech);
        (-x * t.cosh() + nu * t, dt)
    };
    let limit = (60.0 / h) as i64;
    let mut samples: Vec<(i64, Complex64, Complex64)> = Vec::new();
    let mut peak = f64::NEG_INFINITY;
    for dir in [1i64, -1] {
        let start: i64 = if dir == 1 { 0 } else { -1 };
        let mut j = start;
        loop {
            if j.abs() > limit {
                return Err(Error::NoConvergence(format!("K_{nu}({x}) integrand does not decay")));
            }
            let (e, dt) = sample(j);
            peak = peak.max(e.re);
            samples.push((j, e, dt));
            if e.re < peak - cfg.quad_cutoff {
                break;
            }
            j += dir;
        }
    }
    let mut fine = Complex64::default();
    let mut coarse = Complex64::default();
    for &(j, e, dt) in &samples {
        let v = (e - peak).exp() * dt;
        fine += v;
        if j % 2 == 0 {
            coarse += v;
        }
    }
    fine *= h;
    coarse *= 2.0 * h;
    let disagreement = (fine - coarse).norm() / fine.norm();
    if !(disagreement <= 1e-10) {
        return Err(Error::Accuracy(disagreement));
    }
    Ok(LogScaled(Complex64::new(peak, 0.0) + (0.5 * fine).ln()))
}

/// Modified Bessel function of the second kind for any complex order.
pub fn bessel_k(nu: Complex64, x: Complex64) -> Result<Complex64> {
    bessel_k_with(nu, x, &SpecFunConfig::default())
}

pub fn bessel_k_with(nu: Complex64, x: Complex64, cfg: &SpecFunConfig) -> Result<Complex64> {
    log_bessel_k(nu, x, cfg)?.value()
}
