//! Christoffel functions of total-degree polynomial spaces on compact domains
//! of R^d, estimation of the sharp Nikol'skii exponent and explicit lower and
//! upper bound certificates.
//!
//! The main entry points are:
//!
//! * [`geometry::Domain`]: the domain catalogue (lp-balls, cubes, simplices,
//!   half-balls, the cone over a disk, products and affine images).
//! * [`moments::assemble_gram`]: Gram matrix of a polynomial basis over a
//!   domain together with its pivoted triangular factor.
//! * [`christoffel::ChristoffelEvaluator`]: pointwise values, reproducing
//!   kernel, extremal polynomials and the maximum over the domain.
//! * [`asymptotics`]: exponent fits, the closed-form exponent table and
//!   certificates.

pub mod asymptotics;
pub mod basis;
pub mod christoffel;
mod error;
pub mod geometry;
pub mod io;
mod linalg;
pub mod moments;
pub mod orthopoly;
pub mod sampling;

pub use error::{Error, Result};

pub use asymptotics::{fit_sigma, sigma_reference, Certificate, CertificateKind, SigmaEstimate};
pub use basis::{enumerate_indices, BasisKind, BasisSpec, BoundingBox, MultiIndexSet};
pub use christoffel::{ChristoffelEvaluator, MaxReport, SearchConfig};
pub use geometry::{AffineMap, Domain};
pub use moments::{assemble_gram, GramSystem, MomentEngine, MomentMode};
