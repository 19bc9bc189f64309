//! Coefficient matching of a target equation `u₀,t − u₂,t = F` against the
//! first-order-in-`φ₁` families.
//!
//! With `f = k(u₀−u₂) + m` and `φ₁` a polynomial of total degree ≤ 3 in
//! `(u₀, u₁)`, the right-hand side depends on `μ₂, η₂, C₁` only through
//! `E = εη₂/s` and `D = εC₁/s`, so `μ₂ = 0` loses nothing. For fixed `(E, D)`
//! the relation `k·G = …` is linear in the coefficients of `φ₁` and in
//! `(k, m)`; it is solved exactly with `k = 1` over a fixed grid of `(E, D)`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;

use super::params::{q, z};
use super::{build_family, verify_pss, FamilyKind, FamilyParams};
use crate::error::{Error, Result};
use crate::jetalg::{diff_wrt, parse_expr, Atom, JetExpr, JetVar, Monomial};
use crate::Rational;

/// A successful match.
#[derive(Clone, Debug)]
pub struct MatchOutcome {
    pub params: FamilyParams,
    /// `E = εη₂/s`.
    pub e: Rational,
    /// `D = εC₁/s`.
    pub d: Rational,
    /// Built right-hand side minus the target; zero on success.
    pub residual: JetExpr,
}

/// Right-hand side of the generalized Camassa–Holm equation
/// `u_t − u_xxt = u²u_xxx − u²u_xx − 3uu_x² − 2u²u_x + 4uu_xu_xx + u_x³`.
pub fn ch_target() -> JetExpr {
    parse_expr("u0^2*u3 - u0^2*u2 - 3*u0*u1^2 - 2*u0^2*u1 + 4*u0*u1*u2 + u1^3").unwrap()
}

/// Locate the generalized Camassa–Holm equation inside the T24 family.
pub fn match_generalized_ch() -> Result<MatchOutcome> {
    match_target(FamilyKind::T24, &ch_target())
}

/// Grid values ordered by height: `±1, ±2, ±1/2, ±3, ±1/3, ±3/2, ±2/3`.
fn grid() -> Vec<Rational> {
    let mut out = Vec::new();
    for (n, d) in [(1, 1), (2, 1), (1, 2), (3, 1), (1, 3), (3, 2), (2, 3)] {
        out.push(q(n, d));
        out.push(q(-n, d));
    }
    out
}

fn phi_basis() -> Vec<JetExpr> {
    let mut out = Vec::new();
    for deg in 0..=3u32 {
        for j in 0..=deg {
            out.push(&JetExpr::u(0).pow(deg - j) * &JetExpr::u(1).pow(j));
        }
    }
    out
}

/// Solve `A x = b` exactly; free unknowns are set to zero.
fn solve_linear(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>, cols: usize) -> Option<Vec<Rational>> {
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        b.swap(r, p);
        let inv = Rational::one() / &a[r][c];
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        b[r] *= &inv;
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let factor = a[i][c].clone();
                for j in 0..cols {
                    let delta = &factor * &a[r][j];
                    a[i][j] -= delta;
                }
                let delta = &factor * &b[r];
                b[i] -= delta;
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if b[r..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = b[i].clone();
    }
    Some(x)
}

struct Target {
    lambda: Rational,
    g: JetExpr,
}

fn split_target(kind: FamilyKind, target: &JetExpr) -> Result<Target> {
    if !target.denominator().is_empty() {
        return Err(Error::NoMatch(format!("target `{target}` is not polynomial")));
    }
    if let Some(v) = target.vars().into_iter().find(|v| !matches!(v, JetVar::U(0..=3))) {
        return Err(Error::NoMatch(format!("target depends on {v}")));
    }
    if target.numerator().terms().any(|(m, _)| !m.exp_arg().is_empty() || m.atoms().any(|(a, _)| !matches!(a, Atom::Var(_)))) {
        return Err(Error::NoMatch(format!("target `{target}` is not polynomial")));
    }
    let u3 = diff_wrt(target, JetVar::U(3));
    let u0sq = JetExpr::u(0).pow(2);
    let lambda = if kind == FamilyKind::T22 {
        Rational::zero()
    } else {
        u3.div_expr(&u0sq).ok().and_then(|l| l.as_constant()).unwrap_or_default()
    };
    let rest = &u3 - &u0sq.scale(&lambda);
    if !rest.is_zero() {
        return Err(Error::NoMatch(format!(
            "u3 coefficient leaves `{rest}` outside the lambda*u0^2 ansatz"
        )));
    }
    let g = target - &(&u0sq * &JetExpr::u(3)).scale(&lambda);
    Ok(Target { lambda, g })
}

/// Columns of the linear system for fixed `(E, D)`; unknowns are the `φ₁`
/// basis coefficients, then `k`, then `m`.
fn columns(kind: FamilyKind, t: &Target, e: &Rational, d: &Rational) -> Vec<JetExpr> {
    let (u0, u1, u2) = (JetExpr::u(0), JetExpr::u(1), JetExpr::u(2));
    let mut cols: Vec<JetExpr> = phi_basis()
        .into_iter()
        .map(|p| {
            &(&(&u1 * &diff_wrt(&p, JetVar::U(0))) + &(&u2 * &diff_wrt(&p, JetVar::U(1)))) + &p.scale(e)
        })
        .collect();
    let lam = &t.lambda;
    let coeff_f = if kind == FamilyKind::T22 {
        JetExpr::zero()
    } else {
        &(&(&u0 * &u1).scale(&(z(2) * lam)) + &u0.pow(2).scale(&(e * lam))) + &JetExpr::constant(d.clone())
    };
    let col_k = &(&(-&(&u0.pow(2) * &u1).scale(lam)) - &(&coeff_f * &(&u0 - &u2))) - &t.g;
    cols.push(col_k);
    cols.push(-coeff_f);
    cols
}

fn try_point(kind: FamilyKind, t: &Target, sign: i8, e: &Rational, d: &Rational) -> Option<MatchOutcome> {
    let cols = columns(kind, t, e, d);
    let mut index: BTreeMap<Monomial, usize> = BTreeMap::new();
    for c in &cols {
        for (m, _) in c.numerator().terms() {
            let n = index.len();
            index.entry(m.clone()).or_insert(n);
        }
    }
    let n_phi = cols.len() - 2;
    let k_col = n_phi;
    let unknowns: Vec<usize> = (0..cols.len()).filter(|&j| j != k_col).collect();
    let mut a = vec![vec![Rational::zero(); unknowns.len()]; index.len()];
    let mut b = vec![Rational::zero(); index.len()];
    for (j, c) in cols.iter().enumerate() {
        for (m, coef) in c.numerator().terms() {
            let row = index[m];
            if j == k_col {
                b[row] = -coef.clone();
            } else {
                let pos = unknowns.iter().position(|&u| u == j).unwrap();
                a[row][pos] = coef.clone();
            }
        }
    }
    let x = solve_linear(a, b, unknowns.len())?;
    let basis = phi_basis();
    let mut phi = JetExpr::zero();
    for (i, p) in basis.iter().enumerate() {
        phi = &phi + &p.scale(&x[i]);
    }
    let m = x[n_phi].clone();
    let eps = z(sign as i64);
    let mut params = FamilyParams::blank(kind);
    params.sign = sign;
    params.lambda = t.lambda.clone();
    params.eta2 = &eps * e;
    params.c1 = if kind == FamilyKind::T22 { Rational::zero() } else { &eps * d };
    params.f = &(&JetExpr::u(0) - &JetExpr::u(2)) + &JetExpr::constant(m);
    params.phi1 = phi;
    let inst = build_family(params.clone()).ok()?;
    let residual = &inst.pde.f() - &(&t.g + &(&JetExpr::u(0).pow(2) * &JetExpr::u(3)).scale(&t.lambda));
    if !residual.is_zero() || !verify_pss(&inst).ok()?.0 || !inst.signature().matches(kind) {
        return None;
    }
    Some(MatchOutcome {
        params,
        e: e.clone(),
        d: d.clone(),
        residual,
    })
}

/// Search the `kind` ansatz for parameters reproducing `target` exactly.
///
/// Only T22 (`λ = 0`, no `C₁`) and T24 are linear in their free function,
/// so only they are supported. Branches are searched in parallel and the
/// first hit in the order `ε = +1, −1`, then grid order, is returned.
pub fn match_target(kind: FamilyKind, target: &JetExpr) -> Result<MatchOutcome> {
    if !matches!(kind, FamilyKind::T22 | FamilyKind::T24) {
        return Err(Error::Validation(format!("matcher supports t22 and t24, not {kind}")));
    }
    let t = split_target(kind, target)?;
    let ds = if kind == FamilyKind::T22 { vec![Rational::zero()] } else { grid() };
    let es = grid();
    let hits: Vec<Option<MatchOutcome>> = [1i8, -1]
        .par_iter()
        .map(|&sign| {
            es.iter()
                .flat_map(|e| ds.iter().map(move |d| (e, d)))
                .find_map(|(e, d)| try_point(kind, &t, sign, e, d))
        })
        .collect();
    if let Some(hit) = hits.into_iter().flatten().next() {
        return Ok(hit);
    }
    let cols = columns(kind, &t, &Rational::one(), &ds[0]);
    Err(Error::NoMatch(format!(
        "no {kind} parameters reproduce the target; residual with phi1 = 0, f = u0-u2 at E = 1: {}",
        cols[cols.len() - 2]
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_solver() {
        let a = vec![vec![z(1), z(1)], vec![z(1), z(-1)]];
        let x = solve_linear(a, vec![z(3), z(1)], 2).unwrap();
        assert_eq!(x, vec![z(2), z(1)]);
        let a = vec![vec![z(1), z(1)], vec![z(2), z(2)]];
        assert!(solve_linear(a, vec![z(1), z(3)], 2).is_none());
    }

    #[test]
    fn t22_round_trip() {
        let inst = build_family(FamilyParams::default_for(FamilyKind::T22, 1)).unwrap();
        let hit = match_target(FamilyKind::T22, &inst.pde.f()).unwrap();
        assert!(hit.residual.is_zero());
        let rebuilt = build_family(hit.params).unwrap();
        assert_eq!(rebuilt.pde.f(), inst.pde.f());
    }

    #[test]
    fn camassa_holm() {
        let hit = match_generalized_ch().unwrap();
        assert!(hit.residual.is_zero());
        assert_eq!(hit.params.f, parse_expr("u0 - u2").unwrap());
        assert_eq!(hit.params.phi1, parse_expr("u0^3 - 2*u0^2*u1 + u0*u1^2 + u0 - u1").unwrap());
        assert_eq!((hit.params.sign, hit.e.clone(), hit.d.clone()), (1, z(1), z(1)));
    }

    #[test]
    fn outside_class() {
        let r = match_target(FamilyKind::T24, &parse_expr("u3").unwrap());
        assert!(matches!(r, Err(Error::NoMatch(_))));
        let r = match_target(FamilyKind::T22, &parse_expr("u3").unwrap());
        assert!(matches!(r, Err(Error::NoMatch(_))));
    }
}
