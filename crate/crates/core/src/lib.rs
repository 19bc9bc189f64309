//! Symbolic-numeric toolkit for third-order evolution equations that describe
//! pseudospherical surfaces.
//!
//! * [`jetalg`]: exact jet-space algebra, total derivatives, prolongation.
//! * [`cartan`]: 1-forms, wedge, exterior derivative, structure residuals.
//! * [`families`]: the classified equation families, the sine-Gordon fixture,
//!   the condition checker and the Camassa–Holm matcher.
//! * [`immersion`]: second fundamental forms, strips, the ODE for `b`,
//!   obstruction certificates.
//! * [`bonnet`]: concrete solutions, frame integration, meshes, curvature.

pub mod bonnet;
pub mod cartan;
pub mod error;
pub mod families;
pub mod immersion;
pub mod jetalg;
pub mod ode;

pub use error::{Error, Result};

/// Exact rational scalar used throughout the symbolic layer.
pub type Rational = num_rational::BigRational;

/// Crate version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parse a decimal or `p/q` literal into an exact rational.
pub fn rational(text: &str) -> Result<Rational> {
    let e = jetalg::parse_expr(text)?;
    e.as_constant().ok_or_else(|| Error::Validation(format!("`{text}` is not a rational constant")))
}
