use num_traits::ToPrimitive;

use super::atom::Atom;
use super::expr::JetExpr;
use super::var::JetVar;
use crate::error::{Error, Result};

/// Numeric values of the jet coordinates at one point. Index 0 of `w` and `v`
/// is unused; `w_0 = u_0` and `v_0 = u_1`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct JetPoint {
    pub x: f64,
    pub t: f64,
    pub u: [f64; 10],
    pub w: [f64; 10],
    pub v: [f64; 10],
}

impl JetPoint {
    pub fn get(&self, v: JetVar) -> f64 {
        match v {
            JetVar::X => self.x,
            JetVar::T => self.t,
            JetVar::U(i) => self.u[i as usize],
            JetVar::W(j) => self.w[j as usize],
            JetVar::V(k) => self.v[k as usize],
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Base {
    Var(JetVar),
    Sin,
    Cos,
}

impl Base {
    fn value(self, p: &JetPoint) -> f64 {
        match self {
            Base::Var(v) => p.get(v),
            Base::Sin => p.u[0].sin(),
            Base::Cos => p.u[0].cos(),
        }
    }
}

#[derive(Clone, Debug)]
struct Term {
    coef: f64,
    factors: Vec<(Base, i32)>,
    exp: Vec<(JetVar, f64)>,
}

/// Floating-point evaluator for an expression free of opaque atoms.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    terms: Vec<Term>,
    den: Vec<(Base, i32)>,
}

fn base_of(a: Atom, e: &JetExpr) -> Result<Base> {
    match a {
        Atom::Var(v) => Ok(Base::Var(v)),
        Atom::Sin => Ok(Base::Sin),
        Atom::Cos => Ok(Base::Cos),
        _ => Err(Error::Numeric(format!(
            "cannot evaluate opaque atom {a} in `{e}`; instantiate the slot first"
        ))),
    }
}

impl CompiledExpr {
    pub fn eval(&self, p: &JetPoint) -> f64 {
        let mut num = 0.0;
        for t in &self.terms {
            let mut v = t.coef;
            for (b, k) in &t.factors {
                v *= b.value(p).powi(*k);
            }
            if !t.exp.is_empty() {
                let arg: f64 = t.exp.iter().map(|(var, c)| c * p.get(*var)).sum();
                v *= arg.exp();
            }
            num += v;
        }
        let mut den = 1.0;
        for (b, k) in &self.den {
            den *= b.value(p).powi(*k);
        }
        num / den
    }
}

impl JetExpr {
    pub fn compile(&self) -> Result<CompiledExpr> {
        let mut terms = Vec::with_capacity(self.num.len());
        for (m, c) in self.num.terms() {
            let factors = m
                .atoms()
                .map(|(a, p)| Ok((base_of(*a, self)?, *p as i32)))
                .collect::<Result<Vec<_>>>()?;
            let exp = m
                .exp_arg()
                .terms()
                .map(|(v, c)| (*v, c.to_f64().unwrap_or(f64::NAN)))
                .collect();
            terms.push(Term {
                coef: c.to_f64().unwrap_or(f64::NAN),
                factors,
                exp,
            });
        }
        let den = self
            .den
            .iter()
            .map(|(a, p)| Ok((base_of(*a, self)?, *p as i32)))
            .collect::<Result<Vec<_>>>()?;
        Ok(CompiledExpr { terms, den })
    }

    pub fn eval(&self, p: &JetPoint) -> Result<f64> {
        Ok(self.compile()?.eval(p))
    }
}
