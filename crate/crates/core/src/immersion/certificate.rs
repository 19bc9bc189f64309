//! Obstruction certificates for the kinds without universal immersions.
//!
//! Each certificate is a quantity whose nonvanishing forces `a − c = b = 0`
//! (or `Δ₁₃ = Δ₂₃ = 0`), which contradicts `ac − b² = −1`.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{build_family, FamilyKind, FamilyParams};
use crate::jetalg::{JetExpr, JetVar, LinForm};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: FamilyKind,
    /// The certificate quantity, printed exactly.
    pub value: String,
    /// Named parts of the certificate, when it has several.
    pub components: Vec<(String, String)>,
    pub nonzero: bool,
    pub verdict: String,
}

/// Certificate for `params` of kind T23, T25i or T25ii.
///
/// * T23: `η₃² + (μ₃η₂ − μ₂η₃)²`, the determinant of the linear system for
///   `(a − c, b)`; it equals `η₂²` under the T23 constraint.
/// * T25i: `2λ/θ − θC₂e^{θu₀} + 2λu₀`, the common factor of the `u₁`-derivative
///   of the reduced Codazzi equations.
/// * T25ii: the pair `(η₃, μ₂η₃ − μ₃η₂)` and the determinant
///   `2(η₃² + (μ₂η₃ − μ₃η₂)²)` of the system it induces on `(a − c, b)`.
pub fn nonexistence_certificate(params: &FamilyParams) -> Result<Certificate> {
    let kind = params.kind;
    if !matches!(kind, FamilyKind::T23 | FamilyKind::T25i | FamilyKind::T25ii) {
        return Err(Error::Validation(format!("no nonexistence certificate for {kind}")));
    }
    let inst = build_family(params.clone())?;
    let (mu2, mu3) = (&inst.mu[1], &inst.mu[2]);
    let (eta2, eta3) = (&inst.eta[1], &inst.eta[2]);
    let contradiction = "forces a - c = b = 0, contradicting ac - b^2 = -1";
    let cert = match kind {
        FamilyKind::T23 => {
            let cross = mu3 * eta2 - mu2 * eta3;
            let value = eta3 * eta3 + &cross * &cross;
            Certificate {
                kind,
                value: value.to_string(),
                components: vec![("eta2^2".into(), (eta2 * eta2).to_string())],
                nonzero: !value.is_zero(),
                verdict: contradiction.into(),
            }
        }
        FamilyKind::T25i => {
            let (lambda, theta, c2) = (&params.lambda, &params.theta, &params.c2);
            let two = Rational::from_integer(2.into());
            let e = JetExpr::exp(LinForm::single(JetVar::U(0), theta.clone()));
            let k = &(&JetExpr::constant(&two * lambda / theta) - &e.scale(&(theta * c2)))
                + &JetExpr::u(0).scale(&(&two * lambda));
            Certificate {
                kind,
                value: k.to_string(),
                components: vec![],
                nonzero: !k.is_zero(),
                verdict: contradiction.into(),
            }
        }
        _ => {
            let p = mu2 * eta3 - mu3 * eta2;
            let det = Rational::from_integer(2.into()) * (eta3 * eta3 + &p * &p);
            Certificate {
                kind,
                value: det.to_string(),
                components: vec![("eta3".into(), eta3.to_string()), ("mu2*eta3 - mu3*eta2".into(), p.to_string())],
                nonzero: !det.is_zero(),
                verdict: if det.is_zero() {
                    "forces Delta13 = Delta23 = 0".into()
                } else {
                    contradiction.into()
                },
            }
        }
    };
    Ok(cert)
}

fn small(rng: &mut ChaCha8Rng, nonzero: bool) -> Rational {
    loop {
        let n: i64 = rng.random_range(-9..=9);
        let d: i64 = rng.random_range(1..=5);
        if !nonzero || n != 0 {
            return Rational::new(n.into(), d.into());
        }
    }
}

/// `(1−t²)/(1+t²), 2t/(1+t²)`: a rational point on the unit circle.
fn circle(t: &Rational) -> (Rational, Rational) {
    let d = Rational::one() + t * t;
    ((Rational::one() - t * t) / &d, Rational::from_integer(2.into()) * t / &d)
}

/// `μ₂` with `1 + μ₂²` a rational square: `(1 − t²)/(2t)`.
fn pythagorean_mu(t: &Rational) -> Rational {
    (Rational::one() - t * t) / (Rational::from_integer(2.into()) * t)
}

/// Random admissible parameters of `kind`.
pub(crate) fn random_params(kind: FamilyKind, sign: i8, rng: &mut ChaCha8Rng) -> Option<FamilyParams> {
    let mut p = FamilyParams::default_for(kind, sign);
    p.lambda = small(rng, false);
    match kind {
        FamilyKind::T23 => {
            if p.lambda.is_zero() {
                p.lambda = Rational::one();
            }
            p.eta2 = small(rng, true);
            let (c, s) = circle(&small(rng, false));
            let eta3 = &p.eta2 * c;
            let cross = &p.eta2 * s;
            p.mu2 = small(rng, false);
            p.mu3 = Some((&p.mu2 * &eta3 + cross) / &p.eta2);
            p.eta3 = Some(eta3);
        }
        FamilyKind::T25i => {
            p.c2 = small(rng, false);
            p.theta = small(rng, true);
            p.nu = small(rng, true);
            p.sigma = small(rng, false);
            p.eta2 = small(rng, false);
            p.mu2 = pythagorean_mu(&small(rng, true));
        }
        FamilyKind::T25ii => {
            // (Aν)² + (Aνμ₂ − η₂)² = (η₂ν/τ)² via a scaled Pythagorean triple.
            let m: i64 = rng.random_range(1..=6);
            let n: i64 = rng.random_range(0..m);
            let (mut x, mut y, r) = (m * m - n * n, 2 * m * n, m * m + n * n);
            if rng.random_bool(0.5) {
                std::mem::swap(&mut x, &mut y);
            }
            if rng.random_bool(0.5) {
                x = -x;
            }
            if rng.random_bool(0.5) {
                y = -y;
            }
            if x == 0 {
                return None;
            }
            let k = Rational::new(rng.random_range(1..=4i64).into(), rng.random_range(1..=3i64).into());
            let (x, y, r) = (&k * Rational::from_integer(x.into()), &k * Rational::from_integer(y.into()), &k * Rational::from_integer(r.into()));
            p.eta2 = small(rng, true);
            p.nu = small(rng, true).abs();
            p.sigma = small(rng, false);
            p.tau = (&p.eta2 * &p.nu).abs() / &r;
            let a = &x / &p.nu;
            p.mu2 = (&y + &p.eta2) / &x;
            let eps = Rational::from_integer(sign.into());
            let one_plus = Rational::one() + &p.mu2 * &p.mu2;
            p.eta3 = Some(&eps * &p.tau * (&a * &p.mu2 - &p.eta2 / &p.nu));
            p.mu3 = Some(&eps * &p.tau * (&a * &one_plus / &p.eta2 - &p.mu2 / &p.nu));
            p.vphi = JetExpr::constant(small(rng, true));
        }
        _ => return None,
    }
    build_family(p.clone()).ok().map(|_| p)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSummary {
    pub kind: FamilyKind,
    pub seed: u64,
    pub samples: usize,
    pub nonzero: usize,
    /// Parameter draws rejected by validation before reaching `samples`.
    pub rejected_draws: usize,
}

/// Certificates for `n` random admissible parameter sets of `kind`.
pub fn certificate_sweep(kind: FamilyKind, n: usize, seed: u64) -> Result<SweepSummary> {
    if !matches!(kind, FamilyKind::T23 | FamilyKind::T25i | FamilyKind::T25ii) {
        return Err(Error::Validation(format!("no nonexistence certificate for {kind}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(n);
    let mut rejected = 0;
    while draws.len() < n {
        let sign = if rng.random_bool(0.5) { 1 } else { -1 };
        match random_params(kind, sign, &mut rng) {
            Some(p) => draws.push(p),
            None => {
                rejected += 1;
                if rejected > 100 * n + 1000 {
                    return Err(Error::Numeric(format!("could not draw {n} admissible {kind} parameter sets")));
                }
            }
        }
    }
    let certs: Vec<Certificate> = draws.par_iter().map(nonexistence_certificate).collect::<Result<_>>()?;
    Ok(SweepSummary {
        kind,
        seed,
        samples: n,
        nonzero: certs.iter().filter(|c| c.nonzero).count(),
        rejected_draws: rejected,
    })
}
