use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::atom::Atom;
use super::expr::{JetExpr, Monomial, Poly};
use super::var::JetVar;
use crate::Rational;

/// ∂a/∂v for a single atom, by the chain rule on its declared argument.
fn atom_partial(a: Atom, v: JetVar) -> Poly {
    let one = Rational::one();
    let mono = |a: Atom| Monomial::atom(a, 1);
    match (a, v) {
        (Atom::Var(w), _) if w == v => Poly::constant(one),
        (Atom::F(k), JetVar::U(0)) => Poly::term(mono(Atom::F(k + 1)), one),
        (Atom::F(k), JetVar::U(2)) => Poly::term(mono(Atom::F(k + 1)), -one),
        (Atom::Phi1(p, q), JetVar::U(0)) => Poly::term(mono(Atom::Phi1(p + 1, q)), one),
        (Atom::Phi1(p, q), JetVar::U(1)) => Poly::term(mono(Atom::Phi1(p, q + 1)), one),
        (Atom::VPhi(k), JetVar::U(0)) => Poly::term(mono(Atom::VPhi(k + 1)), one),
        (Atom::Sin, JetVar::U(0)) => Poly::term(mono(Atom::Cos), one),
        (Atom::Cos, JetVar::U(0)) => Poly::term(mono(Atom::Sin), -one),
        _ => Poly::zero(),
    }
}

fn monomial_partial(m: &Monomial, c: &Rational, v: JetVar, out: &mut Poly) {
    for (a, p) in &m.atoms {
        let da = atom_partial(*a, v);
        if da.is_zero() {
            continue;
        }
        let mut rest = m.clone();
        rest.reduce(*a, 1);
        let k = c * Rational::from_integer((*p).into());
        for (dm, dc) in da.terms() {
            out.add_term(rest.mul(dm), &k * dc);
        }
    }
    let l = m.exp.coeff(v);
    if !l.is_zero() {
        out.add_term(m.clone(), c * l);
    }
}

pub(crate) fn poly_partial(p: &Poly, v: JetVar) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        monomial_partial(m, c, v, &mut out);
    }
    out
}

/// Formal partial derivative with respect to one jet coordinate.
///
/// For `N/D` with monomial `D = Π aᵖ` this is `N_v/D − N·Σ p·a_v/(a·D)`.
pub fn diff_wrt(e: &JetExpr, v: JetVar) -> JetExpr {
    let mut out = JetExpr::from_parts(poly_partial(&e.num, v), e.den.clone());
    for (a, p) in &e.den {
        let da = atom_partial(*a, v);
        if da.is_zero() {
            continue;
        }
        let mut den: BTreeMap<Atom, u32> = e.den.clone();
        *den.entry(*a).or_insert(0) += 1;
        let num = e.num.mul(&da).scale(&-Rational::from_integer((*p).into()));
        out = &out + &JetExpr::from_parts(num, den);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_rule_through_f() {
        let f = JetExpr::atom(Atom::F(0));
        let fu2 = diff_wrt(&f, JetVar::U(2));
        assert_eq!(fu2, -JetExpr::atom(Atom::F(1)));
        let sum = &diff_wrt(&f, JetVar::U(0)) + &fu2;
        assert!(sum.is_zero());
    }

    #[test]
    fn quotient_rule() {
        // d/du0 (u1/u0) = -u1/u0^2
        let e = JetExpr::u(1).div_expr(&JetExpr::u(0)).unwrap();
        let d = diff_wrt(&e, JetVar::U(0));
        let expect = -JetExpr::u(1).div_expr(&JetExpr::u(0).pow(2)).unwrap();
        assert_eq!(d, expect);
    }

    #[test]
    fn polynomial_partial() {
        let e = &JetExpr::u(0).pow(2) * &JetExpr::u(1);
        assert_eq!(diff_wrt(&e, JetVar::U(0)), &JetExpr::int(2) * &(&JetExpr::u(0) * &JetExpr::u(1)));
    }

    #[test]
    fn sine_over_sine_derivative() {
        let cot = JetExpr::cos_u0().div_expr(&JetExpr::sin_u0()).unwrap();
        let d = diff_wrt(&cot, JetVar::U(0));
        // d cot = -1/sin^2
        let expect = -JetExpr::one().div_expr(&JetExpr::sin_u0().pow(2)).unwrap();
        assert!(d.equivalent(&expect));
    }
}
