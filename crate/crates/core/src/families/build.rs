use num_traits::{One, Signed, Zero};

use super::params::{z, FamilyKind, FamilyParams};
use crate::cartan::OneForm;
use crate::error::{Error, Result};
use crate::jetalg::{diff_wrt, JetExpr, JetVar, LinForm, PdeSpec};
use crate::Rational;

/// Output of a builder: the PDE, the coframe and the `(μ_p, η_p)` with
/// `f_p1 = μ_p f_11 + η_p`.
pub(crate) struct Built {
    pub pde: PdeSpec,
    pub forms: [OneForm; 3],
    pub mu3: Rational,
    pub eta3: Rational,
}

fn k(r: &Rational) -> JetExpr {
    JetExpr::constant(r.clone())
}

fn u(i: u8) -> JetExpr {
    JetExpr::u(i)
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

fn nonzero(r: &Rational, what: &str) -> Result<()> {
    if r.is_zero() {
        Err(invalid(format!("{what} must be nonzero")))
    } else {
        Ok(())
    }
}

pub(crate) fn gamma(mu2: &Rational, mu3: &Rational, eta2: &Rational, eta3: &Rational) -> Rational {
    mu2 * mu3 * eta2 - (Rational::one() + mu2 * mu2) * eta3
}

fn check_derived(given: &Option<Rational>, forced: &Rational, name: &str) -> Result<()> {
    match given {
        Some(g) if g != forced => Err(invalid(format!(
            "{name} = {g} conflicts with the value {forced} forced by the family"
        ))),
        _ => Ok(()),
    }
}

pub(crate) fn build(p: &FamilyParams) -> Result<Built> {
    if p.sign != 1 && p.sign != -1 {
        return Err(invalid(format!("sign must be +1 or -1, got {}", p.sign)));
    }
    p.check_slots()?;
    match p.kind {
        FamilyKind::T22 => t22(p),
        FamilyKind::T23 => t23(p),
        FamilyKind::T24 => t24(p),
        FamilyKind::T25i => t25i(p),
        FamilyKind::T25ii => t25ii(p),
        FamilyKind::Sg => sg(p),
    }
}

fn t22(p: &FamilyParams) -> Result<Built> {
    nonzero(&p.eta2, "eta2")?;
    let s = p.s()?;
    let eps = p.eps();
    let (f, phi) = (&p.f, &p.phi1);
    let fp = p.f_prime();
    let phi_u0 = diff_wrt(phi, JetVar::U(0));
    let phi_u1 = diff_wrt(phi, JetVar::U(1));
    let e = &eps * &p.eta2 / &s;
    let g = (&(&(&phi_u0 * &u(1)) + &(&phi_u1 * &u(2))) + &phi.scale(&e)).div_expr(&fp)?;
    let mu3 = &eps * &s;
    let eta3 = &eps * &p.mu2 * &p.eta2 / &s;
    check_derived(&p.mu3, &mu3, "mu3")?;
    check_derived(&p.eta3, &eta3, "eta3")?;
    let forms = [
        OneForm::new(f.clone(), phi.clone()),
        OneForm::new(&f.scale(&p.mu2) + &k(&p.eta2), phi.scale(&p.mu2)),
        OneForm::new(&f.scale(&mu3) + &k(&eta3), phi.scale(&mu3)),
    ];
    Ok(Built {
        pde: PdeSpec::third_order(Rational::zero(), g)?,
        forms,
        mu3,
        eta3,
    })
}

fn t23(p: &FamilyParams) -> Result<Built> {
    let lambda = &p.lambda;
    nonzero(&(lambda * &p.eta2), "lambda*eta2")?;
    let mu3 = p.mu3.clone().ok_or_else(|| invalid("t23 requires mu3"))?;
    let eta3 = p.eta3.clone().ok_or_else(|| invalid("t23 requires eta3"))?;
    let (mu2, eta2) = (&p.mu2, &p.eta2);
    let cross = mu2 * &eta3 - &mu3 * eta2;
    let constraint = eta2 * eta2 - &eta3 * &eta3 - &cross * &cross;
    if !constraint.is_zero() {
        return Err(invalid(format!(
            "t23 requires eta2^2 - eta3^2 - (mu2*eta3 - mu3*eta2)^2 = 0, got {constraint}"
        )));
    }
    let gam = gamma(mu2, &mu3, eta2, &eta3);
    nonzero(&gam, "gamma = mu2*mu3*eta2 - (1+mu2^2)*eta3")?;
    let f = &p.f;
    let fp = p.f_prime();
    let u0u1 = &u(0) * &u(1);
    let u0sq = u(0).pow(2);
    let two_over_g = z(2) / &gam;
    // (2η₂/γ)(u₁² + u₀u₂ + (μ₃η₂ − μ₂η₃)u₀u₁)
    let quad = (&(&u(1).pow(2) + &(&u(0) * &u(2))) + &u0u1.scale(&(&mu3 * eta2 - mu2 * &eta3)))
        .scale(&(&two_over_g * eta2));
    let bracket = &(&(&u0u1 * f).scale(&z(2)) + &(&(&u0sq * &u(1)) * &fp)) + &quad;
    let g = -bracket.div_expr(&fp)?.scale(lambda);
    let dt_part = |fi1: &JetExpr, m: &Rational| -> JetExpr {
        -(&(&u0sq * fi1) + &u0u1.scale(&(&two_over_g * m * eta2))).scale(lambda)
    };
    let f21 = &f.scale(mu2) + &k(eta2);
    let f31 = &f.scale(&mu3) + &k(&eta3);
    let forms = [
        OneForm::new(f.clone(), dt_part(f, &Rational::one())),
        OneForm::new(f21.clone(), dt_part(&f21, mu2)),
        OneForm::new(f31.clone(), dt_part(&f31, &mu3)),
    ];
    Ok(Built {
        pde: PdeSpec::third_order(lambda.clone(), g)?,
        forms,
        mu3,
        eta3,
    })
}

fn t24(p: &FamilyParams) -> Result<Built> {
    let lambda = &p.lambda;
    let le = lambda * &p.eta2;
    if (&le * &le + &p.c1 * &p.c1).is_zero() {
        return Err(invalid("t24 requires (lambda*eta2)^2 + C1^2 != 0"));
    }
    let s = p.s()?;
    let eps = p.eps();
    let (mu2, eta2, c1) = (&p.mu2, &p.eta2, &p.c1);
    let (f, phi) = (&p.f, &p.phi1);
    let fp = p.f_prime();
    let phi_u0 = diff_wrt(phi, JetVar::U(0));
    let phi_u1 = diff_wrt(phi, JetVar::U(1));
    let u0sq = u(0).pow(2);
    let es = &eps * eta2 / &s;
    // 2λu₀u₁ ± η₂/s·λu₀² ± C₁/s
    let coeff_f = &(&(&u(0) * &u(1)).scale(&(z(2) * lambda)) + &u0sq.scale(&(&es * lambda))) + &k(&(&eps * c1 / &s));
    let bracket = &(&(&(&(&u(1) * &phi_u0) + &(&u(2) * &phi_u1)) - &(&(&u0sq * &u(1)) * &fp).scale(lambda))
        + &phi.scale(&es))
        - &(&coeff_f * f);
    let g = bracket.div_expr(&fp)?;
    let mu3 = &eps * &s;
    let eta3 = &eps * mu2 * eta2 / &s;
    check_derived(&p.mu3, &mu3, "mu3")?;
    check_derived(&p.eta3, &eta3, "eta3")?;
    let lu0f = (&u0sq * f).scale(lambda);
    let one_plus = Rational::one() + mu2 * mu2;
    let forms = [
        OneForm::new(f.clone(), -(&lu0f - phi)),
        OneForm::new(
            &f.scale(mu2) + &k(eta2),
            -(&(&lu0f.scale(mu2) - &phi.scale(mu2)) - &k(c1)),
        ),
        OneForm::new(
            &f.scale(&mu3) + &k(&eta3),
            -(&(&lu0f - phi) - &k(&(mu2 * c1 / &one_plus))).scale(&mu3),
        ),
    ];
    Ok(Built {
        pde: PdeSpec::third_order(lambda.clone(), g)?,
        forms,
        mu3,
        eta3,
    })
}

fn t25i(p: &FamilyParams) -> Result<Built> {
    let (lambda, c2, theta, nu, sigma) = (&p.lambda, &p.c2, &p.theta, &p.nu, &p.sigma);
    nonzero(&(nu * theta), "nu*theta")?;
    if (lambda * lambda + c2 * c2).is_zero() {
        return Err(invalid("t25i requires lambda^2 + C2^2 != 0"));
    }
    let s = p.s()?;
    let eps = p.eps();
    let (mu2, eta2) = (&p.mu2, &p.eta2);
    let one_plus = Rational::one() + mu2 * mu2;
    let zeta1 = z(2) * sigma / nu
        - Rational::one() / theta
        - theta / (nu * nu * &one_plus)
        - eta2 * (z(2) * theta * mu2 - nu * eta2) / (theta * nu * &one_plus);
    let e = JetExpr::exp(LinForm::single(JetVar::U(0), theta.clone()));
    let (u0, u1, u2) = (u(0), u(1), u(2));
    let u0sq = u0.pow(2);
    let lam_part = &(&(&(&(&(&u0sq * &u1).scale(&z(-5)) + &(&(&u0 * &u1) * &u2).scale(&z(4)))
        + &(&u0 * &u1).scale(&(z(2) * &zeta1 - z(4) / theta)))
        - &(&u1 * &u2).scale(&(z(2) / theta)))
        + &u1.scale(&(z(2) * &zeta1 / theta)))
        .scale(lambda);
    let c2_part = (&(&(&u1.pow(3).scale(theta) + &(&u0 * &u1).scale(&z(2))) + &(&u1 * &u2)) - &u1.scale(&zeta1))
        * e.scale(&(theta * c2));
    let g = lam_part + &c2_part;
    // K = 2λ/θ − θC₂e^{θu₀} + 2λu₀
    let kk = &(&k(&(z(2) * lambda / theta)) - &e.scale(&(theta * c2))) + &u0.scale(&(z(2) * lambda));
    let f11 = &(&u0 - &u2).scale(nu) - &k(sigma);
    let f12 = -(&(&(&(&u0sq * &f11).scale(lambda)
        + &(&(&k(&(z(2) * lambda)) - &e.scale(&(theta * theta * c2))) * &u1.pow(2)).scale(&(nu / theta)))
        + &(&kk * &(&(&u0.scale(nu) - &k(sigma)).scale(&(Rational::one() / theta))
            + &u1.scale(&(&eps * (mu2 - nu * eta2 / theta) / &s))))));
    let f21 = &f11.scale(mu2) + &k(eta2);
    let f22 = &(&f12.scale(mu2) - &u0sq.scale(&(lambda * eta2)))
        + &(&kk * &(&u1.scale(&(&eps * &s)) - &k(&(eta2 / theta))));
    let mu3 = &eps * &s;
    let eta3 = &eps * (theta / nu + mu2 * eta2) / &s;
    check_derived(&p.mu3, &mu3, "mu3")?;
    check_derived(&p.eta3, &eta3, "eta3")?;
    let f31 = &f11.scale(&mu3) + &k(&eta3);
    let f32 = &(&f12.scale(&mu3) - &u0sq.scale(&(lambda * &eta3)))
        + &(&kk * &(&u1.scale(mu2) - &k(&(&eta3 / theta))));
    Ok(Built {
        pde: PdeSpec::third_order(lambda.clone(), g)?,
        forms: [OneForm::new(f11, f12), OneForm::new(f21, f22), OneForm::new(f31, f32)],
        mu3,
        eta3,
    })
}

fn t25ii(p: &FamilyParams) -> Result<Built> {
    let (lambda, nu, sigma, tau) = (&p.lambda, &p.nu, &p.sigma, &p.tau);
    if !tau.is_positive() {
        return Err(invalid("t25ii requires tau > 0"));
    }
    let (mu2, eta2) = (&p.mu2, &p.eta2);
    nonzero(&(nu * eta2), "nu*eta2")?;
    let mu3 = p.mu3.clone().ok_or_else(|| invalid("t25ii requires mu3"))?;
    let eta3 = p.eta3.clone().ok_or_else(|| invalid("t25ii requires eta3"))?;
    let eps = p.eps();
    let one_plus = Rational::one() + mu2 * mu2;
    // A = σ/ν − ζ₂ = ε(μ₃η₂ − μ₂η₃)/τ
    let a = &eps * (&mu3 * eta2 - mu2 * &eta3) / tau;
    let eta3_forced = &eps * tau * (&a * mu2 - eta2 / nu);
    let mu3_forced = &eps * tau * (&a * &one_plus / eta2 - mu2 / nu);
    if eta3 != eta3_forced || mu3 != mu3_forced {
        return Err(invalid(format!(
            "t25ii requires eta3 = eps*tau*(A*mu2 - eta2/nu) and mu3 = eps*tau*(A*(1+mu2^2)/eta2 - mu2/nu) \
             with A = eps*(mu3*eta2 - mu2*eta3)/tau; got eta3 = {eta3} (needs {eta3_forced}), mu3 = {mu3} (needs {mu3_forced})"
        )));
    }
    let zeta2 = sigma / nu - &a;
    let phi = &p.vphi;
    let phi1 = diff_wrt(phi, JetVar::U(0));
    let phi2 = diff_wrt(&phi1, JetVar::U(0));
    let e = JetExpr::exp(LinForm::single(JetVar::U(1), &eps * tau));
    let (u0, u1, u2) = (u(0), u(1), u(2));
    let u0sq = u0.pow(2);
    let lam_part = (&(&(&(&u0sq * &u1).scale(&z(-3)) + &(&(&u0 * &u1) * &u2).scale(&z(2)))
        + &(&u0 * &u1).scale(&(z(2) * &zeta2)))
        - &(&u1.pow(2) + &(&u0 * &u2)).scale(&(&eps * z(2) / tau)))
        .scale(lambda);
    let t1 = (&(&(&u0 * &u2).scale(tau) + &u1.scale(&eps)) - &u2.scale(&(&zeta2 * tau))).scale(tau);
    let t3 = (&(&(&(&u0 * &u1).scale(tau) + &(&u1 * &u2).scale(tau)) + &u2.scale(&eps)) - &u1.scale(&(&zeta2 * tau)))
        .scale(&eps);
    let g = &lam_part + &(&(&(&(&t1 * phi) + &(&phi2 * &u1.pow(2))) + &(&t3 * &phi1)) * &e);
    let f11 = &(&u0 - &u2).scale(nu) - &k(sigma);
    let inner = &(&(&u0.scale(nu) - &k(sigma)) * phi).scale(&(&eps * tau)) + &(&phi1 * &u1).scale(nu);
    let f12 = -(&(&(&u0sq * &f11).scale(lambda) - &(&inner * &e))
        + &(&u0 * &u1).scale(&(&eps * z(2) * lambda * nu / tau)));
    let phi_e = &(phi * &e).scale(&(&eps * tau));
    let f21 = &f11.scale(mu2) + &k(eta2);
    let f22 = &(&f12.scale(mu2) - &u0sq.scale(&(lambda * eta2))) + &phi_e.scale(eta2);
    let etau = &eps * tau;
    let inv_nu = Rational::one() / nu;
    let ratio = &one_plus / eta2;
    let f31 = (&(&f11.scale(&ratio) + &k(mu2)).scale(&a) - &f21.scale(&inv_nu)).scale(&etau);
    let lam_phi = &u0sq.scale(lambda) - phi_e;
    let f32 = (&(&f12.scale(&ratio) - &lam_phi.scale(mu2)).scale(&a) - &f22.scale(&inv_nu)).scale(&etau);
    Ok(Built {
        pde: PdeSpec::third_order(lambda.clone(), g)?,
        forms: [OneForm::new(f11, f12), OneForm::new(f21, f22), OneForm::new(f31, f32)],
        mu3,
        eta3,
    })
}

fn sg(p: &FamilyParams) -> Result<Built> {
    nonzero(&p.eta, "eta")?;
    let inv = Rational::one() / &p.eta;
    let forms = [
        OneForm::new(JetExpr::zero(), JetExpr::sin_u0().scale(&inv)),
        OneForm::new(k(&p.eta), JetExpr::cos_u0().scale(&inv)),
        OneForm::new(u(1), JetExpr::zero()),
    ];
    Ok(Built {
        pde: PdeSpec::sine_gordon(),
        forms,
        mu3: Rational::zero(),
        eta3: Rational::zero(),
    })
}
