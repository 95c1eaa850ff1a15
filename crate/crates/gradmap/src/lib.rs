//! Gradient maps of real reductive group representations.
//!
//! Given commuting symmetric generators of an abelian subalgebra acting on a
//! finite dimensional real vector space, this crate computes weight data,
//! Kempf-Ness functions and their gradient maps, the convex geometry of
//! weight cones and polytopes, orbit stability classifications with
//! certificates, and the projective norm-square gradient flow.
//!
//! Layout:
//!
//! * [`linalg`] - symmetric eigensolver, simultaneous diagonalization,
//!   weight-basis exponential action.
//! * [`convexgeom`] - cones, polytopes, faces and min-norm points, generic
//!   over exact rational or tolerance-based float arithmetic.
//! * [`repmodel`] - representations, gradient maps, Kempf-Ness evaluation,
//!   and the gallery of built-in examples.
//! * [`stability`] - support/cone analysis, stability classes, witnesses,
//!   null-cone decomposition, destabilization search, orbit sampling.
//! * [`flows`] - moment inversion, projective limits, the norm-square
//!   flow, and the two-route orbit minimum-norm computation.

pub mod convexgeom;
pub mod flows;
pub mod linalg;
pub mod repmodel;
pub mod scalar;
pub mod stability;

pub use scalar::Scalar;

/// Exact rational scalar used by the polyhedral routines in exact mode.
pub type Exact = num_rational::BigRational;

/// Weight cone over `f64` with feasibility tolerance.
pub type ConeF = convexgeom::GeneratedCone<f64>;
/// Weight cone in exact rational arithmetic.
pub type ConeQ = convexgeom::GeneratedCone<Exact>;
/// Weight polytope over `f64` with feasibility tolerance.
pub type PolytopeF = convexgeom::GeneratedPolytope<f64>;
/// Weight polytope in exact rational arithmetic.
pub type PolytopeQ = convexgeom::GeneratedPolytope<Exact>;
