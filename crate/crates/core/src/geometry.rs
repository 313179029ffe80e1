//! Integration geometry: the straight segment 𝓛 through the origin and the
//! piecewise paths (radial legs and circular arcs) the solvers integrate on.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const DIRECTION_TOL: f64 = 1e-14;

/// Straight segment `{ r·e^{iθ} : 0 ≤ r ≤ radius }` with one end at the origin.
///
/// For two points `t`, `z` of the segment the ratio `t/z` is the positive real
/// `r_t/r_z`, so every kernel power `(t/z)^ν` is taken as `exp(ν·ln(r_t/r_z))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySegment {
    theta: f64,
    direction: Complex64,
    radius: f64,
}

impl RaySegment {
    pub fn new(direction: Complex64, radius: f64) -> Result<Self> {
        if (direction.norm() - 1.0).abs() > DIRECTION_TOL {
            return Err(Error::Domain(format!(
                "segment direction {direction} is not a unit complex number"
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("segment radius {radius} must be positive and finite")));
        }
        Ok(Self { theta: direction.arg(), direction, radius })
    }

    pub fn from_angle(theta: f64, radius: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(1.0, theta), radius)
    }

    /// The segment from the origin to `z`.
    pub fn through(z: Complex64) -> Result<Self> {
        let r = z.norm();
        if r == 0.0 {
            return Err(Error::Domain("cannot build a segment through the origin alone".into()));
        }
        Self::new(z / r, r)
    }

    pub fn direction(&self) -> Complex64 {
        self.direction
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn point(&self, r: f64) -> Complex64 {
        self.direction * r
    }

    pub fn far_end(&self) -> Complex64 {
        self.point(self.radius)
    }

    /// Radial coordinate of `z` if it lies on the segment (relative tolerance `tol`).
    pub fn radial_coordinate(&self, z: Complex64, tol: f64) -> Option<f64> {
        let r = z.norm();
        let scale = self.radius.max(1.0);
        if r > self.radius * (1.0 + tol) {
            return None;
        }
        if (z - self.direction * r).norm() > tol * scale {
            return None;
        }
        Some(r.min(self.radius))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.radial_coordinate(z, 1e-12).is_some()
    }

    /// `t/z` for two points of the segment; a nonnegative real.
    pub fn ratio(&self, t: Complex64, z: Complex64) -> Result<f64> {
        let rt = self.radial_coordinate(t, 1e-12).ok_or(Error::OffSegment(t))?;
        let rz = self.radial_coordinate(z, 1e-12).ok_or(Error::OffSegment(z))?;
        if rz == 0.0 {
            return Err(Error::OriginError);
        }
        Ok(rt / rz)
    }
}

/// One smooth piece of an integration path, parametrized by `τ ∈ [0, 1]`.
///
/// `τ = 0` is the end nearest the anchor of the Volterra integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Panel {
    Radial { theta: f64, r_start: f64, r_end: f64 },
    Arc { radius: f64, theta_start: f64, theta_end: f64 },
}

impl Panel {
    pub fn point(&self, tau: f64) -> Complex64 {
        match *self {
            Panel::Radial { theta, r_start, r_end } => {
                Complex64::from_polar(r_start + tau * (r_end - r_start), theta)
            }
            Panel::Arc { radius, theta_start, theta_end } => {
                Complex64::from_polar(radius, theta_start + tau * (theta_end - theta_start))
            }
        }
    }

    /// `ln|t| + i·θ(t)` with θ continuous along the path (not reduced to the
    /// principal range).
    pub fn log_point(&self, tau: f64) -> Complex64 {
        match *self {
            Panel::Radial { theta, r_start, r_end } => {
                Complex64::new((r_start + tau * (r_end - r_start)).ln(), theta)
            }
            Panel::Arc { radius, theta_start, theta_end } => {
                Complex64::new(radius.ln(), theta_start + tau * (theta_end - theta_start))
            }
        }
    }

    pub fn modulus(&self, tau: f64) -> f64 {
        match *self {
            Panel::Radial { r_start, r_end, .. } => r_start + tau * (r_end - r_start),
            Panel::Arc { radius, .. } => radius,
        }
    }

    /// `dt/dτ`.
    pub fn tangent(&self, tau: f64) -> Complex64 {
        match *self {
            Panel::Radial { theta, r_start, r_end } => Complex64::from_polar(r_end - r_start, theta),
            Panel::Arc { theta_start, theta_end, .. } => {
                Complex64::i() * (theta_end - theta_start) * self.point(tau)
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Panel::Radial { r_start, r_end, .. } => (r_end - r_start).abs(),
            Panel::Arc { radius, theta_start, theta_end } => radius * (theta_end - theta_start).abs(),
        }
    }

    /// Parameter of `z` on this panel, if it lies on it.
    pub fn locate(&self, z: Complex64, tol: f64) -> Option<f64> {
        let scale = z.norm().max(1.0);
        let tau = match *self {
            Panel::Radial { r_start, r_end, .. } => (z.norm() - r_start) / (r_end - r_start),
            Panel::Arc { theta_start, theta_end, .. } => {
                let span = theta_end - theta_start;
                let start = self.point(0.0);
                let rel = (z / start).arg();
                rel / span
            }
        };
        if !(-tol..=1.0 + tol).contains(&tau) {
            return None;
        }
        let tau = tau.clamp(0.0, 1.0);
        ((self.point(tau) - z).norm() <= tol * scale).then_some(tau)
    }
}

/// A piecewise path made of consecutive [`Panel`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    panels: Vec<Panel>,
}

impl Path {
    /// The whole segment, traversed outward from the origin.
    pub fn ray(segment: &RaySegment) -> Self {
        Self {
            panels: vec![Panel::Radial { theta: segment.theta(), r_start: 0.0, r_end: segment.radius() }],
        }
    }

    /// Path from an anchor `z₀ ≠ 0` to `end ≠ 0`.
    ///
    /// When both points lie on one ray the path is the radial segment joining
    /// them. Otherwise it first follows the circle `|t| = |z₀|` through the
    /// angle `arg(end/z₀) ∈ (−π, π)` and then runs radially to `end`; the
    /// modulus of every kernel power stays bounded along such a path.
    pub fn from_anchor(anchor: Complex64, end: Complex64) -> Result<Self> {
        let r0 = anchor.norm();
        let r1 = end.norm();
        if r0 == 0.0 {
            return Err(Error::InvalidAnchor("anchor must differ from the origin".into()));
        }
        if r1 == 0.0 {
            return Err(Error::OriginError);
        }
        let theta0 = anchor.arg();
        let delta = (end / anchor).arg();
        if delta.abs() >= PI - 1e-12 {
            return Err(Error::Domain(format!(
                "continuation from {anchor} to {end} would wind around the branch point"
            )));
        }
        let mut panels = Vec::new();
        if delta.abs() > 1e-14 {
            panels.push(Panel::Arc { radius: r0, theta_start: theta0, theta_end: theta0 + delta });
        }
        if (r1 - r0).abs() > 1e-15 * r0 {
            panels.push(Panel::Radial { theta: theta0 + delta, r_start: r0, r_end: r1 });
        }
        if panels.is_empty() {
            return Err(Error::AnchorOrder("evaluation endpoint coincides with the anchor".into()));
        }
        Ok(Self { panels })
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    pub fn start(&self) -> Complex64 {
        self.panels[0].point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.panels[self.panels.len() - 1].point(1.0)
    }

    pub fn start_log(&self) -> Complex64 {
        self.panels[0].log_point(0.0)
    }

    pub fn length(&self) -> f64 {
        self.panels.iter().map(Panel::length).sum()
    }

    /// True when the path is a single radial panel.
    pub fn is_radial(&self) -> bool {
        self.panels.len() == 1 && matches!(self.panels[0], Panel::Radial { .. })
    }

    pub fn locate(&self, z: Complex64) -> Option<(usize, f64)> {
        self.panels
            .iter()
            .enumerate()
            .find_map(|(p, panel)| panel.locate(z, 1e-10).map(|tau| (p, tau)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ray_basics() {
        let s = RaySegment::from_angle(PI, 2.0).unwrap();
        assert!((s.far_end() - Complex64::new(-2.0, 0.0)).norm() < 1e-15);
        assert!(s.contains(Complex64::new(-1.0, 0.0)));
        assert!(!s.contains(Complex64::new(1.0, 0.0)));
        assert!(!s.contains(Complex64::new(-2.5, 0.0)));
        assert!(RaySegment::new(Complex64::new(1.0, 1.0), 1.0).is_err());
        assert!(RaySegment::from_angle(0.0, 0.0).is_err());
    }

    #[test]
    fn anchor_path_on_ray() {
        let p = Path::from_anchor(Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)).unwrap();
        assert!(p.is_radial());
        assert!((p.length() - 0.5).abs() < 1e-15);
        assert!((p.end() - 0.5).norm() < 1e-15);
    }

    #[test]
    fn anchor_path_with_arc() {
        let end = Complex64::new(-1.0, 0.25);
        let p = Path::from_anchor(Complex64::new(1.0, 0.0), end).unwrap();
        assert_eq!(p.len(), 2);
        assert!((p.end() - end).norm() < 1e-14);
        let theta = end.arg();
        assert!((p.length() - (theta + end.norm() - 1.0)).abs() < 1e-14);
        let (panel, tau) = p.locate(Complex64::from_polar(1.0, 1.0)).unwrap();
        assert_eq!(panel, 0);
        assert!((tau - 1.0 / theta).abs() < 1e-12);
        assert!(Path::from_anchor(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)).is_err());
        assert!(Path::from_anchor(Complex64::new(0.0, 0.0), end).is_err());
    }

    #[test]
    fn tangent_matches_finite_difference() {
        let arc = Panel::Arc { radius: 1.5, theta_start: 0.2, theta_end: 2.0 };
        let h = 1e-6;
        let fd = (arc.point(0.3 + h) - arc.point(0.3 - h)) / (2.0 * h);
        assert!((fd - arc.tangent(0.3)).norm() < 1e-8);
    }

    proptest! {
        #[test]
        fn ratio_is_positive_real(theta in -3.1f64..3.1, radius in 0.1f64..10.0,
                                  a in 0.01f64..1.0, b in 0.01f64..1.0) {
            let s = RaySegment::from_angle(theta, radius).unwrap();
            let t = s.point(a * radius);
            let z = s.point(b * radius);
            let q = t / z;
            prop_assert!(q.im.abs() < 1e-14 * q.norm().max(1.0));
            prop_assert!(q.re >= 0.0);
            let r = s.ratio(t, z).unwrap();
            prop_assert!((r - a / b).abs() <= 1e-12 * (a / b));
        }
    }
}
