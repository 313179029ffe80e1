//! Large-parameter expansions for `z·y'' + 2Λ·y' = g(z)·y` and its nonlinear
//! generalization `z·y'' + 2Λ·y' = f(z, y)`.
//!
//! Two families of approximants are provided for solutions anchored at the
//! regular singular point `z = 0`:
//!
//! * [`fixedpoint`]: a convergent Picard expansion built from the Green's
//!   kernel `1 − (t/z)^{2Λ−1}`, with a-priori remainder bounds;
//! * [`olver`]: a Poincaré-type expansion in powers of `1/(2Λ)` whose
//!   coefficients satisfy a first-order recurrence.
//!
//! Everything lives on straight segments through the origin (and, for
//! problems anchored away from the origin, on an arc-plus-radial
//! continuation path). Functions are sampled on Chebyshev–Lobatto grids
//! ([`grid`]) and kernel integrals are assembled once per problem into
//! dense operators ([`quadrature`]).
//!
//! [`specfun`] holds the independent oracles (complex Gamma, `₀F₁`, `I_ν`,
//! `K_ν`) used to build exact solutions of the `g ≡ 1` example.

pub mod error;
pub mod fixedpoint;
pub mod geometry;
pub mod grid;
mod numeric;
pub mod olver;
pub mod param;
pub mod problem;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
pub use geometry::{Panel, Path, RaySegment};
pub use grid::{ChebGrid, GridFunction};
pub use numeric::{cdiv, relative_error};
pub use param::{lambda_from_tilde, LargeParameter};
pub use problem::{InitialData, ProblemKind, ProblemSpec, RightHandSide};

pub use num_complex::Complex64;
