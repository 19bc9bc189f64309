use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::atom::{Atom, LinForm};
use super::var::JetVar;
use crate::error::{Error, Result};
use crate::Rational;

/// Product of atom powers times at most one exponential kernel.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub(crate) atoms: BTreeMap<Atom, u32>,
    pub(crate) exp: LinForm,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn atom(a: Atom, p: u32) -> Self {
        let mut m = Monomial::one();
        if p > 0 {
            m.atoms.insert(a, p);
        }
        m
    }

    pub fn exp(l: LinForm) -> Self {
        Monomial {
            atoms: BTreeMap::new(),
            exp: l,
        }
    }

    pub fn is_one(&self) -> bool {
        self.atoms.is_empty() && self.exp.is_empty()
    }

    pub fn power(&self, a: Atom) -> u32 {
        self.atoms.get(&a).copied().unwrap_or(0)
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Atom, &u32)> {
        self.atoms.iter()
    }

    pub fn exp_arg(&self) -> &LinForm {
        &self.exp
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut atoms = self.atoms.clone();
        for (a, p) in &other.atoms {
            *atoms.entry(*a).or_insert(0) += p;
        }
        Monomial {
            atoms,
            exp: self.exp.add(&other.exp),
        }
    }

    pub(crate) fn mul_atoms(&self, atoms: &BTreeMap<Atom, u32>) -> Monomial {
        let mut out = self.clone();
        for (a, p) in atoms {
            *out.atoms.entry(*a).or_insert(0) += p;
        }
        out
    }

    /// Lower the power of `a` by `k`; the caller guarantees it is present.
    pub(crate) fn reduce(&mut self, a: Atom, k: u32) {
        let p = self.atoms.get_mut(&a).expect("atom present");
        *p -= k;
        if *p == 0 {
            self.atoms.remove(&a);
        }
    }

    /// Total degree in jet variables only.
    pub fn var_degree(&self) -> u32 {
        self.atoms
            .iter()
            .filter(|(a, _)| matches!(a, Atom::Var(_)))
            .map(|(_, p)| *p)
            .sum()
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<JetVar>) {
        for a in self.atoms.keys() {
            out.extend(a.vars());
        }
        out.extend(self.exp.0.keys().copied());
    }
}

/// Sum of monomials with nonzero rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    pub(crate) terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Rational) -> Self {
        Poly::term(Monomial::one(), c)
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_poly(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    fn add_poly_ret(mut self, other: &Poly) -> Poly {
        self.add_poly(other);
        self
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

/// Canonical-form expression `numerator / denominator` over jet coordinates
/// and atoms.
///
/// Invariants after normalization: the numerator has no zero coefficients,
/// no monomial carries `sin²`, the denominator is a product of atoms (never an
/// exponential) sharing no common factor with every numerator term, and the
/// zero expression has an empty denominator.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetExpr {
    pub(crate) num: Poly,
    pub(crate) den: BTreeMap<Atom, u32>,
}

impl JetExpr {
    pub fn zero() -> Self {
        JetExpr::default()
    }

    pub fn one() -> Self {
        JetExpr::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        JetExpr::from_poly(Poly::constant(c))
    }

    pub fn int(n: i64) -> Self {
        JetExpr::constant(Rational::from_integer(n.into()))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        JetExpr::constant(Rational::new(n.into(), d.into()))
    }

    pub fn var(v: JetVar) -> Self {
        JetExpr::atom(Atom::Var(v))
    }

    pub fn u(i: u8) -> Self {
        JetExpr::var(JetVar::U(i))
    }

    pub fn atom(a: Atom) -> Self {
        JetExpr::from_poly(Poly::term(Monomial::atom(a, 1), Rational::one()))
    }

    pub fn exp(l: LinForm) -> Self {
        JetExpr::from_poly(Poly::term(Monomial::exp(l), Rational::one()))
    }

    pub fn sin_u0() -> Self {
        JetExpr::atom(Atom::Sin)
    }

    pub fn cos_u0() -> Self {
        JetExpr::atom(Atom::Cos)
    }

    pub fn from_poly(num: Poly) -> Self {
        JetExpr::from_parts(num, BTreeMap::new())
    }

    pub fn from_parts(num: Poly, den: BTreeMap<Atom, u32>) -> Self {
        let mut e = JetExpr { num, den };
        e.normalize_in_place();
        e
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &BTreeMap<Atom, u32> {
        &self.den
    }

    /// The denominator as an expression, `1` when absent.
    pub fn denominator_expr(&self) -> JetExpr {
        JetExpr::from_poly(Poly::term(
            Monomial::one().mul_atoms(&self.den),
            Rational::one(),
        ))
    }

    /// The numerator alone, i.e. the expression with its denominator cleared.
    pub fn numerator_expr(&self) -> JetExpr {
        JetExpr::from_poly(self.num.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The value if the expression is a rational constant.
    pub fn as_constant(&self) -> Option<Rational> {
        if !self.den.is_empty() {
            return None;
        }
        match self.num.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.num.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Jet coordinates the expression depends on syntactically.
    pub fn vars(&self) -> BTreeSet<JetVar> {
        let mut out = BTreeSet::new();
        for m in self.num.terms.keys() {
            m.collect_vars(&mut out);
        }
        for a in self.den.keys() {
            out.extend(a.vars());
        }
        out
    }

    /// Opaque atoms present anywhere in the expression.
    pub fn opaque_atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for m in self.num.terms.keys() {
            out.extend(m.atoms.keys().copied().filter(|a| a.is_opaque()));
        }
        out.extend(self.den.keys().copied().filter(|a| a.is_opaque()));
        out
    }

    /// Largest derivative index among the jet coordinates present.
    pub fn max_order(&self) -> usize {
        self.vars().into_iter().map(JetVar::index).max().unwrap_or(0)
    }

    pub fn normalize(&self) -> JetExpr {
        let mut e = self.clone();
        e.normalize_in_place();
        e
    }

    fn normalize_in_place(&mut self) {
        loop {
            if self.num.is_zero() {
                self.den.clear();
                return;
            }
            let mut changed = self.cancel_common();
            changed |= self.rewrite_sin_squares();
            if !changed {
                return;
            }
        }
    }

    fn cancel_common(&mut self) -> bool {
        let mut changed = false;
        let den_atoms: Vec<(Atom, u32)> = self.den.iter().map(|(a, p)| (*a, *p)).collect();
        for (a, dp) in den_atoms {
            let common = self
                .num
                .terms
                .keys()
                .map(|m| m.power(a))
                .min()
                .unwrap_or(0)
                .min(dp);
            if common == 0 {
                continue;
            }
            let terms = std::mem::take(&mut self.num.terms);
            for (mut m, c) in terms {
                m.reduce(a, common);
                self.num.terms.insert(m, c);
            }
            let p = self.den.get_mut(&a).unwrap();
            *p -= common;
            if *p == 0 {
                self.den.remove(&a);
            }
            changed = true;
        }
        changed
    }

    fn rewrite_sin_squares(&mut self) -> bool {
        if !self.num.terms.keys().any(|m| m.power(Atom::Sin) >= 2) {
            return false;
        }
        let terms = std::mem::take(&mut self.num.terms);
        let mut out = Poly::zero();
        let mut stack: Vec<(Monomial, Rational)> = terms.into_iter().collect();
        while let Some((m, c)) = stack.pop() {
            if m.power(Atom::Sin) < 2 {
                out.add_term(m, c);
                continue;
            }
            let mut base = m.clone();
            base.reduce(Atom::Sin, 2);
            let with_cos = base.mul(&Monomial::atom(Atom::Cos, 2));
            stack.push((base, c.clone()));
            stack.push((with_cos, -c));
        }
        self.num = out;
        true
    }

    fn common_den(&self, other: &JetExpr) -> BTreeMap<Atom, u32> {
        let mut den = self.den.clone();
        for (a, p) in &other.den {
            let e = den.entry(*a).or_insert(0);
            *e = (*e).max(*p);
        }
        den
    }

    fn lift_num(&self, den: &BTreeMap<Atom, u32>) -> Poly {
        let mut factor = BTreeMap::new();
        for (a, p) in den {
            let extra = p - self.den.get(a).copied().unwrap_or(0);
            if extra > 0 {
                factor.insert(*a, extra);
            }
        }
        self.num.mul_monomial(&Monomial::one().mul_atoms(&factor))
    }

    pub fn add_expr(&self, other: &JetExpr) -> JetExpr {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        let den = self.common_den(other);
        let mut num = self.lift_num(&den);
        num.add_poly(&other.lift_num(&den));
        JetExpr::from_parts(num, den)
    }

    pub fn mul_expr(&self, other: &JetExpr) -> JetExpr {
        if self.is_zero() || other.is_zero() {
            return JetExpr::zero();
        }
        let mut den = self.den.clone();
        for (a, p) in &other.den {
            *den.entry(*a).or_insert(0) += p;
        }
        JetExpr::from_parts(self.num.mul(&other.num), den)
    }

    pub fn scale(&self, c: &Rational) -> JetExpr {
        JetExpr::from_parts(self.num.scale(c), self.den.clone())
    }

    /// Undo the `sin²` rewrite: find `c·M·(1 − cos²)ᵏ` equal to the numerator
    /// and return `(c, M·sin²ᵏ)`.
    fn as_sine_monomial(&self) -> Option<(Rational, Monomial)> {
        let min_cos = self.num.terms.keys().map(|m| m.power(Atom::Cos)).min()?;
        let lowest: Vec<_> = self
            .num
            .terms
            .iter()
            .filter(|(m, _)| m.power(Atom::Cos) == min_cos)
            .collect();
        if lowest.len() != 1 {
            return None;
        }
        let (m, c) = lowest[0];
        let max_cos = self.num.terms.keys().map(|m| m.power(Atom::Cos)).max()?;
        let k = (max_cos - min_cos) / 2;
        if k == 0 || self.num.terms.len() != k as usize + 1 {
            return None;
        }
        let one_minus = Poly::constant(Rational::one())
            .add_poly_ret(&Poly::term(Monomial::atom(Atom::Cos, 2), -Rational::one()));
        let mut p = Poly::term(m.clone(), c.clone());
        for _ in 0..k {
            p = p.mul(&one_minus);
        }
        (p == self.num).then(|| (c.clone(), m.mul(&Monomial::atom(Atom::Sin, 2 * k))))
    }

    /// Reciprocal; defined only when the numerator is a single monomial, up to
    /// the `sin²` rewrite.
    pub fn recip(&self) -> Result<JetExpr> {
        if self.num.terms.len() != 1 {
            let (c, m) = self
                .as_sine_monomial()
                .ok_or_else(|| Error::SumDenominator(self.to_string()))?;
            let single = JetExpr {
                num: Poly::term(m, c),
                den: self.den.clone(),
            };
            return single.recip();
        }
        let (m, c) = self.num.terms.iter().next().unwrap();
        let mut num_mono = Monomial::exp(m.exp.neg());
        num_mono = num_mono.mul_atoms(&self.den);
        Ok(JetExpr::from_parts(
            Poly::term(num_mono, Rational::one() / c),
            m.atoms.clone(),
        ))
    }

    pub fn div_expr(&self, other: &JetExpr) -> Result<JetExpr> {
        Ok(self.mul_expr(&other.recip()?))
    }

    pub fn pow(&self, n: u32) -> JetExpr {
        let mut out = JetExpr::one();
        for _ in 0..n {
            out = out.mul_expr(self);
        }
        out
    }

    /// `is_zero(self − other)`; tolerant of representations that differ only
    /// by the sin/cos rewrite.
    pub fn equivalent(&self, other: &JetExpr) -> bool {
        (self - other).is_zero()
    }
}

impl Add for &JetExpr {
    type Output = JetExpr;
    fn add(self, rhs: &JetExpr) -> JetExpr {
        self.add_expr(rhs)
    }
}

impl Add for JetExpr {
    type Output = JetExpr;
    fn add(self, rhs: JetExpr) -> JetExpr {
        self.add_expr(&rhs)
    }
}

impl Sub for &JetExpr {
    type Output = JetExpr;
    fn sub(self, rhs: &JetExpr) -> JetExpr {
        self.add_expr(&-rhs)
    }
}

impl Sub for JetExpr {
    type Output = JetExpr;
    fn sub(self, rhs: JetExpr) -> JetExpr {
        self.add_expr(&-&rhs)
    }
}

impl Mul for &JetExpr {
    type Output = JetExpr;
    fn mul(self, rhs: &JetExpr) -> JetExpr {
        self.mul_expr(rhs)
    }
}

impl Mul for JetExpr {
    type Output = JetExpr;
    fn mul(self, rhs: JetExpr) -> JetExpr {
        self.mul_expr(&rhs)
    }
}

impl Neg for &JetExpr {
    type Output = JetExpr;
    fn neg(self) -> JetExpr {
        JetExpr {
            num: self.num.scale(&-Rational::one()),
            den: self.den.clone(),
        }
    }
}

impl Neg for JetExpr {
    type Output = JetExpr;
    fn neg(self) -> JetExpr {
        -&self
    }
}

impl From<Rational> for JetExpr {
    fn from(c: Rational) -> Self {
        JetExpr::constant(c)
    }
}

impl From<JetVar> for JetExpr {
    fn from(v: JetVar) -> Self {
        JetExpr::var(v)
    }
}
