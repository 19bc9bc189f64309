//! Exact algebra on jet-space expressions.
//!
//! Expressions live in a canonical form: a sum of rational multiples of
//! monomials over jet coordinates and atoms, divided by a single monomial.
//! Exponentials merge by adding their linear arguments, and `sin²` is rewritten
//! as `1 − cos²`, so deciding whether an expression vanishes reduces to
//! checking that its numerator has no terms.
//!
//! Opaque atoms (`f⁽ᵏ⁾`, partials of `φ₁`, `φ⁽ᵏ⁾`) and distinct kernels are
//! treated as algebraically independent. That assumption makes [`is_zero`]
//! sound for the residuals generated in this crate, which vanish coefficient
//! by coefficient; it is not a decision procedure for arbitrary functions.
//!
//! Grammar accepted by [`parse_expr`]:
//!
//! ```text
//! variables   x t u0..u9 w1..w9 v1..v9
//! literals    decimal rationals (2, 0.25)
//! operators   + - * / ^ (integer exponents)
//! kernels     exp(<linear form>) sin(u0) cos(u0)
//! opaque      f<k>(u0-u2) phi1_<a>_<b>(u0,u1) vphi<k>(u0)
//! ```

mod atom;
mod deriv;
mod eval;
mod expr;
mod parse;
mod pde;
mod render;
mod var;

pub use atom::{Atom, LinForm};
pub use deriv::diff_wrt;
pub use eval::{CompiledExpr, JetPoint};
pub use expr::{JetExpr, Monomial, Poly};
pub use parse::parse_expr;
pub use pde::{total_dt, total_dx, PdeKind, PdeSpec, DEFAULT_JET_ORDER};
pub use var::JetVar;

/// True iff the canonical numerator of `e` is empty.
pub fn is_zero(e: &JetExpr) -> bool {
    e.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_test_examples() {
        assert!(is_zero(&parse_expr("u0*u1 - u1*u0").unwrap()));
        assert!(is_zero(&parse_expr("exp(u0)*exp(u0) - exp(2*u0)").unwrap()));
        assert!(is_zero(&parse_expr("sin(u0)^2 + cos(u0)^2 - 1").unwrap()));
        assert!(!is_zero(&parse_expr("sin(u0)^2 - cos(u0)^2").unwrap()));
    }

    #[test]
    fn diff_examples() {
        let e = parse_expr("u0^2*u1").unwrap();
        assert_eq!(diff_wrt(&e, JetVar::U(0)), parse_expr("2*u0*u1").unwrap());
        let f = parse_expr("f(u0-u2)").unwrap();
        assert_eq!(diff_wrt(&f, JetVar::U(2)), parse_expr("-f1(u0-u2)").unwrap());
    }
}
