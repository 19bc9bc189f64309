mod common;

use common::{config, expr, fixed_pde, small_rational};
use proptest::prelude::*;
use psskit::cartan::{differential, exterior_d, structure_residuals, wedge, OneForm};
use psskit::immersion::{sff_closed_form, strip_domain, CaseId};
use psskit::families::{FamilyKind, FamilyParams};

fn one_form() -> impl Strategy<Value = OneForm> {
    (expr(), expr()).prop_map(|(a, b)| OneForm::new(a, b))
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn total_derivatives_are_linear(a in expr(), b in expr(), p in small_rational(), q in small_rational()) {
        common::linearity(&a, &b, &p, &q)?;
    }

    #[test]
    fn total_derivatives_obey_leibniz(a in expr(), b in expr()) {
        common::leibniz(&a, &b)?;
    }

    #[test]
    fn total_derivatives_commute_on_solutions(e in expr()) {
        common::commutation(&e)?;
    }

    #[test]
    fn normalize_is_idempotent(e in expr()) {
        common::normalization(&e)?;
    }

    #[test]
    fn render_parses_back(e in expr()) {
        common::round_trip(&e)?;
    }

    #[test]
    fn wedge_is_alternating(a in one_form(), b in one_form()) {
        prop_assert!((&wedge(&a, &b).c + &wedge(&b, &a).c).is_zero());
        prop_assert!(wedge(&a, &a).is_zero());
    }

    #[test]
    fn wedge_is_bilinear(a in one_form(), b in one_form(), c in one_form(), h in expr()) {
        let lhs = wedge(&(&a + &b), &c).c;
        prop_assert!((&lhs - &(&wedge(&a, &c).c + &wedge(&b, &c).c)).is_zero());
        let scaled = wedge(&a.scale(&h), &c).c;
        prop_assert!((&scaled - &(&h * &wedge(&a, &c).c)).is_zero());
    }

    #[test]
    fn exterior_derivative_obeys_leibniz(h in expr(), w in one_form()) {
        let pde = fixed_pde();
        let lhs = exterior_d(&w.scale(&h), &pde).unwrap().c;
        let rhs = &wedge(&differential(&h, &pde).unwrap(), &w).c + &(&h * &exterior_d(&w, &pde).unwrap().c);
        prop_assert!((&lhs - &rhs).is_zero());
        // d∘d = 0 on functions.
        prop_assert!(exterior_d(&differential(&h, &pde).unwrap(), &pde).unwrap().is_zero());
    }

    #[test]
    fn structure_residuals_rotate_with_the_coframe(w1 in one_form(), w2 in one_form(), w3 in one_form()) {
        // (ω₁, ω₂) → (ω₂, −ω₁) maps the residual triple (r₁, r₂, r₃) to (r₂, −r₁, r₃).
        let pde = fixed_pde();
        let r = structure_residuals(&w1, &w2, &w3, &pde).unwrap().raw;
        let s = structure_residuals(&w2, &-&w1, &w3, &pde).unwrap().raw;
        prop_assert!((&s[0] - &r[1]).is_zero());
        prop_assert!((&s[1] + &r[0]).is_zero());
        prop_assert!((&s[2] - &r[2]).is_zero());
    }

    #[test]
    fn sign_branches_mirror_in_xi(alpha in 0.5f64..6.0, ratio in -0.95f64..0.95, s in 0.02f64..0.98) {
        let beta = ratio * alpha / 2.0;
        let plus = strip_domain(alpha, beta, 1).unwrap();
        let minus = strip_domain(alpha, beta, -1).unwrap();
        prop_assert!((plus.xi_lo + minus.xi_hi).abs() < 1e-12);
        prop_assert!((plus.e_lo - minus.e_lo).abs() < 1e-12 * plus.e_hi);
        if plus.degenerate {
            return Ok(());
        }
        let xi = plus.xi_lo + s * (plus.xi_hi - plus.xi_lo);
        let p = sff_closed_form(CaseId::P35i, alpha, beta, &FamilyParams::default_for(FamilyKind::T22, 1), 1).unwrap();
        let m = sff_closed_form(CaseId::P35i, alpha, beta, &FamilyParams::default_for(FamilyKind::T22, -1), 1).unwrap();
        let (vp, vm) = (p.eval(xi).unwrap(), m.eval(-xi).unwrap());
        for k in 0..3 {
            prop_assert!((vp[k] - vm[k]).abs() < 1e-9 * (1.0 + vp[k].abs()), "{k}: {vp:?} vs {vm:?}");
        }
    }
}

