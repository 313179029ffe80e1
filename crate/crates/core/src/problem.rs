//! Initial value problems `z·y'' + 2Λ·y' = g(z)·y` (linear) or `= f(z, y)`
//! (nonlinear), with data at the singular point or at an anchor `z₀ ≠ 0`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Path, RaySegment};
use crate::param::LargeParameter;

pub type LinearCoefficient = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;
pub type NonlinearRhs = Arc<dyn Fn(Complex64, Complex64) -> Complex64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    LinearPlus,
    LinearMinus,
    NonlinearPlus,
    NonlinearMinus,
}

impl ProblemKind {
    pub fn is_plus(self) -> bool {
        matches!(self, ProblemKind::LinearPlus | ProblemKind::NonlinearPlus)
    }

    pub fn is_linear(self) -> bool {
        matches!(self, ProblemKind::LinearPlus | ProblemKind::LinearMinus)
    }
}

/// `y(0) = y0` for Plus problems; `y(z₀) = ybar0`, `y'(z₀) = y1` for Minus problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    Plus { y0: Complex64 },
    Minus { ybar0: Complex64, y1: Complex64 },
}

#[derive(Clone)]
pub enum RightHandSide {
    /// `g(z)·y`, optionally plus an inhomogeneous term `h(z)`.
    Linear { g: LinearCoefficient, source: Option<LinearCoefficient> },
    /// `f(z, y)`, Lipschitz in `y` with constant `lipschitz`.
    Nonlinear { f: NonlinearRhs, lipschitz: f64 },
}

impl RightHandSide {
    pub fn linear(g: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        RightHandSide::Linear { g: Arc::new(g), source: None }
    }

    pub fn nonlinear(
        f: impl Fn(Complex64, Complex64) -> Complex64 + Send + Sync + 'static,
        lipschitz: f64,
    ) -> Self {
        RightHandSide::Nonlinear { f: Arc::new(f), lipschitz }
    }

    /// Right-hand side value at `(t, y)`.
    pub fn eval(&self, t: Complex64, y: Complex64) -> Complex64 {
        match self {
            RightHandSide::Linear { g, source } => {
                g(t) * y + source.as_ref().map_or(Complex64::default(), |h| h(t))
            }
            RightHandSide::Nonlinear { f, .. } => f(t, y),
        }
    }
}

impl fmt::Debug for RightHandSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RightHandSide::Linear { source, .. } => f
                .debug_struct("Linear")
                .field("has_source", &source.is_some())
                .finish_non_exhaustive(),
            RightHandSide::Nonlinear { lipschitz, .. } => f
                .debug_struct("Nonlinear")
                .field("lipschitz", lipschitz)
                .finish_non_exhaustive(),
        }
    }
}

/// A complete problem description.
///
/// `endpoint` is the point the solution is wanted at. For Plus problems it
/// defaults to the far end of the segment; for Minus problems it must lie
/// strictly inside `|z| < |z₀|` on the segment unless `continuation` is set,
/// in which case it may be any nonzero point reached from `z₀` by an arc of
/// radius `|z₀|` followed by a radial leg.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub lambda: LargeParameter,
    pub segment: RaySegment,
    pub anchor: Complex64,
    pub endpoint: Complex64,
    pub data: InitialData,
    pub rhs: RightHandSide,
    pub continuation: bool,
}

impl ProblemSpec {
    /// Plus problem on `segment`, solved up to its far end.
    pub fn plus(lambda: LargeParameter, segment: RaySegment, y0: Complex64, rhs: RightHandSide) -> Self {
        let kind = match rhs {
            RightHandSide::Linear { .. } => ProblemKind::LinearPlus,
            RightHandSide::Nonlinear { .. } => ProblemKind::NonlinearPlus,
        };
        Self {
            kind,
            lambda,
            segment,
            anchor: Complex64::default(),
            endpoint: segment.far_end(),
            data: InitialData::Plus { y0 },
            rhs,
            continuation: false,
        }
    }

    /// Minus problem with data at `anchor`, solved from `anchor` to `endpoint`.
    /// The segment is the one through the anchor.
    pub fn minus(
        lambda: LargeParameter,
        anchor: Complex64,
        endpoint: Complex64,
        ybar0: Complex64,
        y1: Complex64,
        rhs: RightHandSide,
    ) -> Result<Self> {
        let segment = RaySegment::through(anchor)
            .map_err(|_| Error::InvalidAnchor("we cannot set z0 = 0 for a Minus problem".into()))?;
        let kind = match rhs {
            RightHandSide::Linear { .. } => ProblemKind::LinearMinus,
            RightHandSide::Nonlinear { .. } => ProblemKind::NonlinearMinus,
        };
        Ok(Self {
            kind,
            lambda,
            segment,
            anchor,
            endpoint,
            data: InitialData::Minus { ybar0, y1 },
            rhs,
            continuation: false,
        })
    }

    pub fn with_continuation(mut self, continuation: bool) -> Self {
        self.continuation = continuation;
        self
    }

    pub fn with_endpoint(mut self, endpoint: Complex64) -> Self {
        self.endpoint = endpoint;
        self
    }

    /// Checks every structural invariant and returns the problem unchanged.
    pub fn validate(self) -> Result<Self> {
        let re = self.lambda.value().re;
        if !(re > 0.5) {
            return Err(Error::InvalidLambda(self.lambda.value()));
        }
        match (self.kind.is_plus(), &self.data) {
            (true, InitialData::Plus { .. }) | (false, InitialData::Minus { .. }) => {}
            _ => {
                return Err(Error::KindMismatch(format!(
                    "{:?} problem carries {:?} data",
                    self.kind, self.data
                )))
            }
        }
        match (self.kind.is_linear(), &self.rhs) {
            (true, RightHandSide::Linear { .. }) => {}
            (false, RightHandSide::Nonlinear { lipschitz, .. }) => {
                if !(lipschitz.is_finite() && *lipschitz > 0.0) {
                    return Err(Error::Domain(format!(
                        "Lipschitz constant {lipschitz} must be positive and finite"
                    )));
                }
            }
            _ => {
                return Err(Error::KindMismatch(format!(
                    "{:?} problem with {:?} right-hand side",
                    self.kind, self.rhs
                )))
            }
        }
        if self.kind.is_plus() {
            if self.anchor != Complex64::default() {
                return Err(Error::InvalidAnchor("Plus problems are anchored at the origin".into()));
            }
            if !self.segment.contains(self.endpoint) {
                return Err(Error::OffSegment(self.endpoint));
            }
            if self.endpoint.norm() == 0.0 {
                return Err(Error::OriginError);
            }
        } else {
            if self.anchor.norm() == 0.0 {
                return Err(Error::InvalidAnchor("we cannot set z0 = 0 for a Minus problem".into()));
            }
            if !self.segment.contains(self.anchor) {
                return Err(Error::OffSegment(self.anchor));
            }
            if self.endpoint.norm() == 0.0 {
                return Err(Error::OriginError);
            }
            if !self.continuation {
                if self.endpoint.norm() >= self.anchor.norm() {
                    return Err(Error::AnchorOrder(format!(
                        "|z| = {} must be below |z0| = {}",
                        self.endpoint.norm(),
                        self.anchor.norm()
                    )));
                }
                if !self.segment.contains(self.endpoint) {
                    return Err(Error::OffSegment(self.endpoint));
                }
            }
        }
        Ok(self)
    }

    /// Integration path from the anchor to the endpoint.
    pub fn path(&self) -> Result<Path> {
        if self.kind.is_plus() {
            let r = self.endpoint.norm();
            let seg = RaySegment::new(self.segment.direction(), r)?;
            Ok(Path::ray(&seg))
        } else {
            Path::from_anchor(self.anchor, self.endpoint)
        }
    }

    /// `‖g‖∞` on `points` for linear problems, `L` for nonlinear ones.
    pub fn rhs_constant(&self, points: &[Complex64]) -> f64 {
        match &self.rhs {
            RightHandSide::Linear { g, .. } => points.iter().map(|&t| g(t).norm()).fold(0.0, f64::max),
            RightHandSide::Nonlinear { lipschitz, .. } => *lipschitz,
        }
    }
}
