//! Strategies and property bodies shared by the property suites and the
//! acceptance run.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError};
use psskit::jetalg::{diff_wrt, parse_expr, total_dt, total_dx, JetExpr, JetVar, LinForm, PdeSpec};
use psskit::Rational;

/// Recorded seed for every randomized suite.
pub const SEED: u64 = 0x7073_736b_6974;
pub const CASES: u32 = 200;

pub fn config() -> Config {
    Config {
        cases: CASES,
        rng_seed: RngSeed::Fixed(SEED),
        failure_persistence: None,
        ..Config::default()
    }
}

/// `u₀,t − u₂,t = u₁ − u₀²u₂ + 2u₀u₁u₂`, fixed across runs.
pub fn fixed_pde() -> PdeSpec {
    PdeSpec::third_order(Rational::from_integer(1.into()), parse_expr("u1 - u0^2*u2 + 2*u0*u1*u2").unwrap()).unwrap()
}

pub fn small_rational() -> impl Strategy<Value = Rational> {
    (-5i64..=5, 1i64..=4).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

fn exp_atom(a: i64, b: i64) -> JetExpr {
    let l = LinForm::single(JetVar::U(0), Rational::from_integer(a.into()));
    let m = LinForm::single(JetVar::U(1), Rational::from_integer(b.into()));
    &JetExpr::exp(l) * &JetExpr::exp(m)
}

pub fn leaf() -> impl Strategy<Value = JetExpr> {
    prop_oneof![
        small_rational().prop_map(JetExpr::constant),
        (0u8..=3).prop_map(JetExpr::u),
        Just(JetExpr::var(JetVar::X)),
        Just(JetExpr::var(JetVar::T)),
        Just(JetExpr::sin_u0()),
        Just(JetExpr::cos_u0()),
        (-2i64..=2, -1i64..=1).prop_map(|(a, b)| exp_atom(a, b)),
        (0u8..=2).prop_map(|i| JetExpr::u(i).recip().unwrap()),
    ]
}

/// Rational jet functions of bounded size in `x, t, u₀..u₃`, `sin u₀`,
/// `cos u₀` and exponentials.
pub fn expr() -> impl Strategy<Value = JetExpr> {
    leaf().prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a + &b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a - &b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a * &b),
            (inner, 2u32..=3).prop_map(|(a, k)| a.pow(k)),
        ]
    })
}

fn same(lhs: &JetExpr, rhs: &JetExpr, what: &str) -> Result<(), TestCaseError> {
    if (lhs - rhs).is_zero() {
        Ok(())
    } else {
        Err(TestCaseError::fail(format!("{what}: {lhs} != {rhs}")))
    }
}

fn ok<T>(r: psskit::Result<T>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

pub fn linearity(a: &JetExpr, b: &JetExpr, p: &Rational, q: &Rational) -> Result<(), TestCaseError> {
    let pde = fixed_pde();
    let comb = &a.scale(p) + &b.scale(q);
    same(
        &ok(total_dx(&comb))?,
        &(&ok(total_dx(a))?.scale(p) + &ok(total_dx(b))?.scale(q)),
        "D_x linearity",
    )?;
    same(
        &ok(total_dt(&comb, &pde))?,
        &(&ok(total_dt(a, &pde))?.scale(p) + &ok(total_dt(b, &pde))?.scale(q)),
        "D_t linearity",
    )?;
    let v = JetVar::U(1);
    same(&diff_wrt(&comb, v), &(&diff_wrt(a, v).scale(p) + &diff_wrt(b, v).scale(q)), "∂/∂u₁ linearity")
}

pub fn leibniz(a: &JetExpr, b: &JetExpr) -> Result<(), TestCaseError> {
    let pde = fixed_pde();
    let ab = a * b;
    let dx = &(&ok(total_dx(a))? * b) + &(a * &ok(total_dx(b))?);
    same(&ok(total_dx(&ab))?, &dx, "D_x Leibniz")?;
    let dt = &(&ok(total_dt(a, &pde))? * b) + &(a * &ok(total_dt(b, &pde))?);
    same(&ok(total_dt(&ab, &pde))?, &dt, "D_t Leibniz")
}

pub fn commutation(e: &JetExpr) -> Result<(), TestCaseError> {
    let pde = fixed_pde();
    let xt = ok(pde.dx(&ok(pde.dt(e))?))?;
    let tx = ok(pde.dt(&ok(pde.dx(e))?))?;
    same(&xt, &tx, "D_x D_t = D_t D_x")
}

pub fn normalization(e: &JetExpr) -> Result<(), TestCaseError> {
    let n = e.normalize();
    same(&n, e, "normalize preserves value")?;
    prop_assert_eq!(&n.normalize(), &n);
    // Rebuilding from parts must land on the same canonical form.
    let rebuilt = JetExpr::from_parts(e.numerator().clone(), e.denominator().clone()).normalize();
    prop_assert_eq!(rebuilt, n);
    Ok(())
}

pub fn round_trip(e: &JetExpr) -> Result<(), TestCaseError> {
    let text = e.to_string();
    let back = parse_expr(&text).map_err(|err| TestCaseError::fail(format!("`{text}`: {err}")))?;
    prop_assert_eq!(&back, e, "text `{}`", text);
    prop_assert_eq!(back.to_string(), text);
    Ok(())
}
