use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::var::JetVar;
use crate::Rational;

/// Multiplicative generator of the canonical form.
///
/// Opaque atoms stand for derivatives of the function slots evaluated on their
/// fixed arguments: `F(k) = f⁽ᵏ⁾(u₀−u₂)`, `Phi1(a, b) = ∂ᵃ_{u₀}∂ᵇ_{u₁}φ₁(u₀,u₁)`,
/// `VPhi(k) = φ⁽ᵏ⁾(u₀)`. `Sin` and `Cos` take the argument `u₀`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(JetVar),
    F(u32),
    Phi1(u32, u32),
    VPhi(u32),
    Sin,
    Cos,
}

impl Atom {
    /// Jet coordinates the atom depends on.
    pub fn vars(self) -> Vec<JetVar> {
        match self {
            Atom::Var(v) => vec![v],
            Atom::F(_) => vec![JetVar::U(0), JetVar::U(2)],
            Atom::Phi1(..) => vec![JetVar::U(0), JetVar::U(1)],
            Atom::VPhi(_) | Atom::Sin | Atom::Cos => vec![JetVar::U(0)],
        }
    }

    pub fn is_opaque(self) -> bool {
        matches!(self, Atom::F(_) | Atom::Phi1(..) | Atom::VPhi(_))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Var(v) => write!(f, "{v}"),
            Atom::F(k) => write!(f, "f{k}(u0-u2)"),
            Atom::Phi1(a, b) => write!(f, "phi1_{a}_{b}(u0,u1)"),
            Atom::VPhi(k) => write!(f, "vphi{k}(u0)"),
            Atom::Sin => write!(f, "sin(u0)"),
            Atom::Cos => write!(f, "cos(u0)"),
        }
    }
}

/// Linear form with rational coefficients and no constant term, the argument
/// of an exponential kernel. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinForm(pub(crate) BTreeMap<JetVar, Rational>);

impl LinForm {
    pub fn new() -> Self {
        LinForm(BTreeMap::new())
    }

    pub fn single(v: JetVar, c: Rational) -> Self {
        let mut l = LinForm::new();
        l.add_term(v, c);
        l
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeff(&self, v: JetVar) -> Rational {
        self.0.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&JetVar, &Rational)> {
        self.0.iter()
    }

    pub fn add_term(&mut self, v: JetVar, c: Rational) {
        let entry = self.0.entry(v).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.0.remove(&v);
        }
    }

    pub fn add(&self, other: &LinForm) -> LinForm {
        let mut out = self.clone();
        for (v, c) in &other.0 {
            out.add_term(*v, c.clone());
        }
        out
    }

    pub fn neg(&self) -> LinForm {
        LinForm(self.0.iter().map(|(v, c)| (*v, -c)).collect())
    }
}

impl fmt::Display for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, (v, c)) in self.0.iter().enumerate() {
            let mag = c.abs();
            if n == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mag.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
        }
        Ok(())
    }
}
