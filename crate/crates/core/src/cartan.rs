//! Differential forms in the coordinates `(x, t)` with [`JetExpr`]
//! coefficients.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::jetalg::{Atom, JetExpr, PdeSpec};

/// `cdx·dx + cdt·dt`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OneForm {
    pub cdx: JetExpr,
    pub cdt: JetExpr,
}

/// `c·dx∧dt`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TwoForm {
    pub c: JetExpr,
}

impl OneForm {
    pub fn new(cdx: JetExpr, cdt: JetExpr) -> Self {
        OneForm { cdx, cdt }
    }

    pub fn zero() -> Self {
        OneForm::default()
    }

    pub fn dx() -> Self {
        OneForm::new(JetExpr::one(), JetExpr::zero())
    }

    pub fn dt() -> Self {
        OneForm::new(JetExpr::zero(), JetExpr::one())
    }

    pub fn scale(&self, h: &JetExpr) -> OneForm {
        OneForm::new(h * &self.cdx, h * &self.cdt)
    }

    pub fn is_zero(&self) -> bool {
        self.cdx.is_zero() && self.cdt.is_zero()
    }
}

impl Add for &OneForm {
    type Output = OneForm;
    fn add(self, rhs: &OneForm) -> OneForm {
        OneForm::new(&self.cdx + &rhs.cdx, &self.cdt + &rhs.cdt)
    }
}

impl Sub for &OneForm {
    type Output = OneForm;
    fn sub(self, rhs: &OneForm) -> OneForm {
        OneForm::new(&self.cdx - &rhs.cdx, &self.cdt - &rhs.cdt)
    }
}

impl Neg for &OneForm {
    type Output = OneForm;
    fn neg(self) -> OneForm {
        OneForm::new(-&self.cdx, -&self.cdt)
    }
}

impl TwoForm {
    pub fn zero() -> Self {
        TwoForm::default()
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero()
    }
}

impl Add for &TwoForm {
    type Output = TwoForm;
    fn add(self, rhs: &TwoForm) -> TwoForm {
        TwoForm { c: &self.c + &rhs.c }
    }
}

impl Sub for &TwoForm {
    type Output = TwoForm;
    fn sub(self, rhs: &TwoForm) -> TwoForm {
        TwoForm { c: &self.c - &rhs.c }
    }
}

pub fn wedge(a: &OneForm, b: &OneForm) -> TwoForm {
    TwoForm {
        c: &(&a.cdx * &b.cdt) - &(&a.cdt * &b.cdx),
    }
}

/// `dω = (D_x ω_t − D_t ω_x) dx∧dt` modulo the PDE.
pub fn exterior_d(w: &OneForm, pde: &PdeSpec) -> Result<TwoForm> {
    Ok(TwoForm {
        c: &pde.dx(&w.cdt)? - &pde.dt(&w.cdx)?,
    })
}

/// `dh = D_x h dx + D_t h dt`.
pub fn differential(h: &JetExpr, pde: &PdeSpec) -> Result<OneForm> {
    Ok(OneForm::new(pde.dx(h)?, pde.dt(h)?))
}

/// Structure-equation residuals with their common denominator cleared.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureResiduals {
    /// `dω₁ − ω₃∧ω₂`, `dω₂ − ω₁∧ω₃`, `dω₃ − ω₁∧ω₂`.
    pub raw: [JetExpr; 3],
    /// `raw[i]` multiplied by `cleared_denominator`.
    pub cleared: [JetExpr; 3],
    pub cleared_denominator: JetExpr,
}

impl StructureResiduals {
    pub fn all_zero(&self) -> bool {
        self.cleared.iter().all(JetExpr::is_zero)
    }
}

pub(crate) fn lcm_denominator(es: &[JetExpr]) -> JetExpr {
    let mut den: BTreeMap<Atom, u32> = BTreeMap::new();
    for e in es {
        for (a, p) in e.denominator() {
            let slot = den.entry(*a).or_insert(0);
            *slot = (*slot).max(*p);
        }
    }
    let mut out = JetExpr::one();
    for (a, p) in den {
        out = &out * &JetExpr::atom(a).pow(p);
    }
    out
}

pub fn structure_residuals(
    w1: &OneForm,
    w2: &OneForm,
    w3: &OneForm,
    pde: &PdeSpec,
) -> Result<StructureResiduals> {
    let raw = [
        (&exterior_d(w1, pde)? - &wedge(w3, w2)).c,
        (&exterior_d(w2, pde)? - &wedge(w1, w3)).c,
        (&exterior_d(w3, pde)? - &wedge(w1, w2)).c,
    ];
    let den = lcm_denominator(&raw);
    let cleared = [&raw[0] * &den, &raw[1] * &den, &raw[2] * &den];
    Ok(StructureResiduals {
        raw,
        cleared,
        cleared_denominator: den,
    })
}

/// Coefficient of `ω₁∧ω₂`; it must not vanish identically.
pub fn independence_witness(w1: &OneForm, w2: &OneForm) -> JetExpr {
    wedge(w1, w2).c
}

/// `Δ_ij = f_i1 f_j2 − f_j1 f_i2` for 1-based `i, j`.
pub fn delta(i: usize, j: usize, forms: &[OneForm; 3]) -> Result<JetExpr> {
    if !(1..=3).contains(&i) || !(1..=3).contains(&j) {
        return Err(Error::Validation(format!("delta index ({i},{j}) outside 1..=3")));
    }
    Ok(wedge(&forms[i - 1], &forms[j - 1]).c)
}

/// Symmetric quadratic form `p·dx² + 2q·dxdt + r·dt²`, stored as `(p, q, r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTriple<T> {
    pub dxdx: T,
    pub dxdt: T,
    pub dtdt: T,
}

/// First and second fundamental forms from the coframe and `a, b, c`.
pub fn fundamental_forms(
    forms: &[OneForm; 3],
    a: &JetExpr,
    b: &JetExpr,
    c: &JetExpr,
) -> (SymTriple<JetExpr>, SymTriple<JetExpr>) {
    let (f11, f12) = (&forms[0].cdx, &forms[0].cdt);
    let (f21, f22) = (&forms[1].cdx, &forms[1].cdt);
    let first = SymTriple {
        dxdx: &(f11 * f11) + &(f21 * f21),
        dxdt: &(f11 * f12) + &(f21 * f22),
        dtdt: &(f12 * f12) + &(f22 * f22),
    };
    let two = JetExpr::int(2);
    let second = SymTriple {
        dxdx: &(&(a * &(f11 * f11)) + &(&two * &(b * &(f11 * f21)))) + &(c * &(f21 * f21)),
        dxdt: &(&(a * &(f11 * f12)) + &(b * &(&(f11 * f22) + &(f21 * f12)))) + &(c * &(f21 * f22)),
        dtdt: &(&(a * &(f12 * f12)) + &(&two * &(b * &(f12 * f22)))) + &(c * &(f22 * f22)),
    };
    (first, second)
}

/// Numeric variant of [`fundamental_forms`] for sampled coefficients
/// `f = [[f11, f12], [f21, f22]]`.
pub fn fundamental_forms_numeric(f: [[f64; 2]; 2], a: f64, b: f64, c: f64) -> (SymTriple<f64>, SymTriple<f64>) {
    let [[f11, f12], [f21, f22]] = f;
    (
        SymTriple {
            dxdx: f11 * f11 + f21 * f21,
            dxdt: f11 * f12 + f21 * f22,
            dtdt: f12 * f12 + f22 * f22,
        },
        SymTriple {
            dxdx: a * f11 * f11 + 2.0 * b * f11 * f21 + c * f21 * f21,
            dxdt: a * f11 * f12 + b * (f11 * f22 + f21 * f12) + c * f21 * f22,
            dtdt: a * f12 * f12 + 2.0 * b * f12 * f22 + c * f22 * f22,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetalg::parse_expr;

    fn p(s: &str) -> JetExpr {
        parse_expr(s).unwrap()
    }

    fn sg_forms(eta: &str) -> [OneForm; 3] {
        [
            OneForm::new(p("0"), p(&format!("sin(u0)/{eta}"))),
            OneForm::new(p(eta), p(&format!("cos(u0)/{eta}"))),
            OneForm::new(p("u1"), p("0")),
        ]
    }

    #[test]
    fn wedge_basics() {
        let w = OneForm::new(p("u0"), p("u1^2"));
        assert!(wedge(&w, &w).is_zero());
        assert_eq!(wedge(&OneForm::dx(), &OneForm::dt()).c, JetExpr::one());
    }

    #[test]
    fn exterior_d_basics() {
        let pde = PdeSpec::sine_gordon();
        let d = exterior_d(&OneForm::new(p("u0"), p("0")), &pde).unwrap();
        assert_eq!(d.c, p("-w1"));
        let d = exterior_d(&OneForm::new(p("3/2"), p("3/2")), &pde).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn sine_gordon_closes() {
        let pde = PdeSpec::sine_gordon();
        let [w1, w2, w3] = sg_forms("2");
        assert_eq!(wedge(&w1, &w2).c, p("-sin(u0)"));
        assert_eq!(exterior_d(&w3, &pde).unwrap(), wedge(&w1, &w2));
        let r = structure_residuals(&w1, &w2, &w3, &pde).unwrap();
        assert!(r.all_zero());
    }

    #[test]
    fn zero_forms_close() {
        let pde = PdeSpec::sine_gordon();
        let z = OneForm::zero();
        assert!(structure_residuals(&z, &z, &z, &pde).unwrap().all_zero());
    }

    #[test]
    fn dependence_detected() {
        let w = OneForm::new(p("u0"), p("u1"));
        let w2 = w.scale(&JetExpr::int(2));
        assert!(independence_witness(&w, &w2).is_zero());
    }

    #[test]
    fn delta_indices() {
        let forms = sg_forms("2");
        assert_eq!(delta(1, 2, &forms).unwrap(), p("-sin(u0)"));
        assert!(delta(3, 3, &forms).unwrap().is_zero());
        assert!(delta(0, 2, &forms).is_err());
    }

    #[test]
    fn sine_gordon_fundamental_forms() {
        let forms = sg_forms("3");
        let (first, second) = fundamental_forms(&forms, &p("-2*cos(u0)/sin(u0)"), &p("1"), &p("0"));
        assert_eq!(first.dxdx, p("9"));
        assert_eq!(first.dxdt, p("cos(u0)"));
        assert_eq!(first.dtdt, p("1/9"));
        assert!(second.dxdx.is_zero());
        assert_eq!(second.dxdt, p("sin(u0)"));
        assert!(second.dtdt.is_zero());
    }
}
