use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jetalg::{diff_wrt, parse_expr, Atom, JetExpr, JetVar};
use crate::Rational;

/// Which classified family (or the sine-Gordon fixture) an instance belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    T22,
    T23,
    T24,
    T25i,
    T25ii,
    Sg,
}

impl FamilyKind {
    pub const CLASSIFIED: [FamilyKind; 5] = [
        FamilyKind::T22,
        FamilyKind::T23,
        FamilyKind::T24,
        FamilyKind::T25i,
        FamilyKind::T25ii,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::T22 => "t22",
            FamilyKind::T23 => "t23",
            FamilyKind::T24 => "t24",
            FamilyKind::T25i => "t25i",
            FamilyKind::T25ii => "t25ii",
            FamilyKind::Sg => "sg",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t22" => Ok(FamilyKind::T22),
            "t23" => Ok(FamilyKind::T23),
            "t24" => Ok(FamilyKind::T24),
            "t25i" => Ok(FamilyKind::T25i),
            "t25ii" => Ok(FamilyKind::T25ii),
            "sg" => Ok(FamilyKind::Sg),
            other => Err(Error::Validation(format!("unknown family kind `{other}`"))),
        }
    }
}

/// Parameters of a family instance.
///
/// Scalars are exact rationals. `mu3`/`eta3` are inputs for T23 and T25ii and
/// are derived (and cross-checked when given) for the other kinds. Function
/// slots hold expressions; the opaque atoms `f0(u0-u2)`, `phi1_0_0(u0,u1)` and
/// `vphi0(u0)` keep them symbolic.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyParams {
    pub kind: FamilyKind,
    pub sign: i8,
    pub mu2: Rational,
    pub mu3: Option<Rational>,
    pub eta2: Rational,
    pub eta3: Option<Rational>,
    pub lambda: Rational,
    pub c1: Rational,
    pub c2: Rational,
    pub theta: Rational,
    pub nu: Rational,
    pub sigma: Rational,
    pub tau: Rational,
    /// Sine-Gordon parameter η.
    pub eta: Rational,
    pub f: JetExpr,
    pub phi1: JetExpr,
    pub vphi: JetExpr,
}

pub(crate) fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub(crate) fn z(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
pub fn exact_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| Rational::new(n, d))
}

impl FamilyParams {
    /// All scalars zero, opaque slots, `ε = +1`.
    pub fn blank(kind: FamilyKind) -> Self {
        FamilyParams {
            kind,
            sign: 1,
            mu2: Rational::zero(),
            mu3: None,
            eta2: Rational::zero(),
            eta3: None,
            lambda: Rational::zero(),
            c1: Rational::zero(),
            c2: Rational::zero(),
            theta: Rational::zero(),
            nu: Rational::zero(),
            sigma: Rational::zero(),
            tau: Rational::zero(),
            eta: Rational::one(),
            f: JetExpr::atom(Atom::F(0)),
            phi1: JetExpr::atom(Atom::Phi1(0, 0)),
            vphi: JetExpr::atom(Atom::VPhi(0)),
        }
    }

    /// The concrete default instance of each kind for branch `sign`.
    pub fn default_for(kind: FamilyKind, sign: i8) -> Self {
        let mut p = FamilyParams::blank(kind);
        p.sign = sign;
        let e = z(sign as i64);
        let ident = parse_expr("u0-u2").unwrap();
        match kind {
            FamilyKind::T22 => {
                p.eta2 = z(1);
                p.f = ident;
                p.phi1 = JetExpr::u(1);
            }
            FamilyKind::T23 => {
                p.mu3 = Some(z(0));
                p.eta2 = z(1);
                p.eta3 = Some(e);
                p.lambda = z(1);
                p.f = ident;
            }
            FamilyKind::T24 => {
                p.eta2 = z(1);
                p.c1 = z(1);
                p.lambda = z(1);
                p.f = ident;
                p.phi1 = parse_expr("u0*u1^2").unwrap();
            }
            FamilyKind::T25i => {
                p.mu2 = q(3, 4);
                p.eta2 = z(1);
                p.lambda = z(1);
                p.c2 = z(0);
                p.theta = z(1);
                p.nu = z(1);
                p.sigma = z(1);
            }
            FamilyKind::T25ii => {
                p.eta2 = z(1);
                p.nu = z(5);
                p.tau = z(3);
                p.sigma = z(1);
                p.lambda = z(1);
                p.mu3 = Some(q(4, 5));
                p.eta3 = Some(q(-3 * sign as i64, 5));
                p.vphi = JetExpr::one();
            }
            FamilyKind::Sg => {
                p.eta = z(1);
            }
        }
        p
    }

    pub fn eps(&self) -> Rational {
        z(self.sign as i64)
    }

    /// `√(1+μ₂²)`, required to be rational.
    pub fn s(&self) -> Result<Rational> {
        let r = Rational::one() + &self.mu2 * &self.mu2;
        exact_sqrt(&r).ok_or_else(|| {
            Error::Validation(format!(
                "sqrt(1+mu2^2) must be rational for exact checks; mu2 = {} gives 1+mu2^2 = {r}",
                self.mu2
            ))
        })
    }

    pub fn f_prime(&self) -> JetExpr {
        diff_wrt(&self.f, JetVar::U(0))
    }

    /// Named scalar values as strings, for reports.
    pub fn scalar_table(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("kind".to_string(), self.kind.to_string()),
            ("sign".to_string(), self.sign.to_string()),
        ];
        let mut push = |k: &str, v: &Rational| out.push((k.to_string(), v.to_string()));
        match self.kind {
            FamilyKind::Sg => push("eta", &self.eta),
            _ => {
                push("mu2", &self.mu2);
                push("eta2", &self.eta2);
                if let Some(m) = &self.mu3 {
                    push("mu3", m);
                }
                if let Some(e) = &self.eta3 {
                    push("eta3", e);
                }
                push("lambda", &self.lambda);
                match self.kind {
                    FamilyKind::T24 => push("c1", &self.c1),
                    FamilyKind::T25i => {
                        push("c2", &self.c2);
                        push("theta", &self.theta);
                        push("nu", &self.nu);
                        push("sigma", &self.sigma);
                    }
                    FamilyKind::T25ii => {
                        push("nu", &self.nu);
                        push("sigma", &self.sigma);
                        push("tau", &self.tau);
                    }
                    _ => {}
                }
            }
        }
        match self.kind {
            FamilyKind::T22 | FamilyKind::T23 | FamilyKind::T24 => {
                out.push(("f".into(), self.f.to_string()));
                if self.kind != FamilyKind::T23 {
                    out.push(("phi1".into(), self.phi1.to_string()));
                }
            }
            FamilyKind::T25ii => out.push(("vphi".into(), self.vphi.to_string())),
            _ => {}
        }
        out
    }

    pub(crate) fn check_slots(&self) -> Result<()> {
        let only = |e: &JetExpr, allowed: &[JetVar], name: &str| -> Result<()> {
            if let Some(v) = e.vars().into_iter().find(|v| !allowed.contains(v)) {
                return Err(Error::Validation(format!("slot {name} = `{e}` depends on {v}")));
            }
            if e.is_zero() {
                return Err(Error::Validation(format!("slot {name} is identically zero")));
            }
            Ok(())
        };
        match self.kind {
            FamilyKind::T22 | FamilyKind::T23 | FamilyKind::T24 => {
                only(&self.f, &[JetVar::U(0), JetVar::U(2)], "f")?;
                let shift = &diff_wrt(&self.f, JetVar::U(0)) + &diff_wrt(&self.f, JetVar::U(2));
                if !shift.is_zero() {
                    return Err(Error::Validation(format!(
                        "slot f = `{}` is not a function of u0-u2",
                        self.f
                    )));
                }
                let fp = self.f_prime();
                if fp.is_zero() {
                    return Err(Error::Validation("f' vanishes identically".into()));
                }
                if fp.recip().is_err() {
                    return Err(Error::Validation(format!(
                        "f' = `{fp}` must be a single monomial to appear as a denominator"
                    )));
                }
                if self.kind != FamilyKind::T23 {
                    only(&self.phi1, &[JetVar::U(0), JetVar::U(1)], "phi1")?;
                }
            }
            FamilyKind::T25ii => only(&self.vphi, &[JetVar::U(0)], "vphi")?,
            _ => {}
        }
        Ok(())
    }
}

/// A scalar given in a config file: integer, float (read through its decimal
/// text), or a string such as `"3/4"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl ScalarValue {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            ScalarValue::Int(n) => Ok(z(*n)),
            ScalarValue::Float(x) => crate::rational(&format!("{x}")),
            ScalarValue::Text(s) => crate::rational(s),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarConfig {
    pub mu2: Option<ScalarValue>,
    pub mu3: Option<ScalarValue>,
    pub eta2: Option<ScalarValue>,
    pub eta3: Option<ScalarValue>,
    pub lambda: Option<ScalarValue>,
    pub c1: Option<ScalarValue>,
    pub c2: Option<ScalarValue>,
    pub theta: Option<ScalarValue>,
    pub nu: Option<ScalarValue>,
    pub sigma: Option<ScalarValue>,
    pub tau: Option<ScalarValue>,
    pub eta: Option<ScalarValue>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotConfig {
    pub f: Option<String>,
    pub phi1: Option<String>,
    pub vphi: Option<String>,
}

/// File or inline description of a family instance. Unset scalars are zero
/// (η of sine-Gordon defaults to 1); unset slots stay opaque.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub kind: FamilyKind,
    #[serde(default = "default_sign")]
    pub sign: i8,
    #[serde(default)]
    pub scalars: ScalarConfig,
    #[serde(default)]
    pub slots: SlotConfig,
}

fn default_sign() -> i8 {
    1
}

impl FamilyConfig {
    pub fn to_params(&self) -> Result<FamilyParams> {
        let mut p = FamilyParams::blank(self.kind);
        p.sign = self.sign;
        let s = &self.scalars;
        let set = |dst: &mut Rational, v: &Option<ScalarValue>| -> Result<()> {
            if let Some(v) = v {
                *dst = v.to_rational()?;
            }
            Ok(())
        };
        set(&mut p.mu2, &s.mu2)?;
        set(&mut p.eta2, &s.eta2)?;
        set(&mut p.lambda, &s.lambda)?;
        set(&mut p.c1, &s.c1)?;
        set(&mut p.c2, &s.c2)?;
        set(&mut p.theta, &s.theta)?;
        set(&mut p.nu, &s.nu)?;
        set(&mut p.sigma, &s.sigma)?;
        set(&mut p.tau, &s.tau)?;
        set(&mut p.eta, &s.eta)?;
        p.mu3 = s.mu3.as_ref().map(ScalarValue::to_rational).transpose()?;
        p.eta3 = s.eta3.as_ref().map(ScalarValue::to_rational).transpose()?;
        if let Some(f) = &self.slots.f {
            p.f = parse_expr(f)?;
        }
        if let Some(phi) = &self.slots.phi1 {
            p.phi1 = parse_expr(phi)?;
        }
        if let Some(v) = &self.slots.vphi {
            p.vphi = parse_expr(v)?;
        }
        Ok(p)
    }

    /// Config reproducing `p` exactly.
    pub fn from_params(p: &FamilyParams) -> Self {
        let t = |r: &Rational| Some(ScalarValue::Text(r.to_string()));
        let opt = |r: &Option<Rational>| r.as_ref().map(|r| ScalarValue::Text(r.to_string()));
        FamilyConfig {
            kind: p.kind,
            sign: p.sign,
            scalars: ScalarConfig {
                mu2: t(&p.mu2),
                mu3: opt(&p.mu3),
                eta2: t(&p.eta2),
                eta3: opt(&p.eta3),
                lambda: t(&p.lambda),
                c1: t(&p.c1),
                c2: t(&p.c2),
                theta: t(&p.theta),
                nu: t(&p.nu),
                sigma: t(&p.sigma),
                tau: t(&p.tau),
                eta: t(&p.eta),
            },
            slots: SlotConfig {
                f: Some(p.f.to_string()),
                phi1: Some(p.phi1.to_string()),
                vphi: Some(p.vphi.to_string()),
            },
        }
    }
}
