//! The classified third-order families, the sine-Gordon fixture, the
//! structural condition checker and the Camassa–Holm matcher.
//!
//! A family instance carries its PDE `u₀,t − u₂,t = F` and a coframe
//! `ω_i = f_i1 dx + f_i2 dt` with `f_p1 = μ_p f₁₁ + η_p` (`μ₁ = 1, η₁ = 0`) and
//! `f_i2 = −λu₀² f_i1 + φ_i(u₀, u₁)`.

mod build;
mod conditions;
mod matcher;
mod params;

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cartan::{independence_witness, structure_residuals, OneForm};
use crate::error::{Error, Result};
use crate::jetalg::{JetExpr, PdeSpec};
use crate::Rational;

pub use conditions::{lemma21_check, Condition, ConditionReport};
pub use matcher::{ch_target, match_generalized_ch, match_target, MatchOutcome};
pub use params::{exact_sqrt, FamilyConfig, FamilyKind, FamilyParams, ScalarConfig, ScalarValue, SlotConfig};

/// A built family: PDE, coframe and the derived quantities of the
/// structural conditions.
#[derive(Clone, Debug)]
pub struct FamilyInstance {
    pub params: FamilyParams,
    pub pde: PdeSpec,
    pub forms: [OneForm; 3],
    /// `[1, μ₂, μ₃]`.
    pub mu: [Rational; 3],
    /// `[0, η₂, η₃]`.
    pub eta: [Rational; 3],
}

/// `L₂, L₃, M, N, Q` as expressions in `(u₀, u₁)` plus the scalar `γ`.
#[derive(Clone, Debug)]
pub struct Derived {
    /// `φ_i = f_i2 + λu₀² f_i1`.
    pub phi: [JetExpr; 3],
    pub l2: JetExpr,
    pub l3: JetExpr,
    pub m: JetExpr,
    pub n: JetExpr,
    pub q: JetExpr,
    pub gamma: Rational,
}

/// Which of `Q`, `L₂`, `γ` vanish.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindSignature {
    pub q_zero: bool,
    pub l2_zero: bool,
    pub gamma_zero: bool,
}

impl KindSignature {
    /// Whether the pattern is the one required by the hypotheses of `kind`.
    pub fn matches(&self, kind: FamilyKind) -> bool {
        let s = (self.q_zero, self.l2_zero, self.gamma_zero);
        match kind {
            FamilyKind::T22 => s == (true, true, true),
            FamilyKind::T23 => s == (true, true, false),
            FamilyKind::T24 => s == (true, false, true),
            FamilyKind::T25i | FamilyKind::T25ii => s == (false, false, false),
            FamilyKind::Sg => true,
        }
    }
}

/// Validate `params` and build the PDE and coframe.
pub fn build_family(params: FamilyParams) -> Result<FamilyInstance> {
    let b = build::build(&params)?;
    let mu = [Rational::one(), params.mu2.clone(), b.mu3];
    let eta = [Rational::zero(), params.eta2.clone(), b.eta3];
    Ok(FamilyInstance {
        params,
        pde: b.pde,
        forms: b.forms,
        mu,
        eta,
    })
}

impl FamilyInstance {
    pub fn kind(&self) -> FamilyKind {
        self.params.kind
    }

    /// `f_ij` with 1-based indices, `j ∈ {1, 2}`.
    pub fn f(&self, i: usize, j: usize) -> &JetExpr {
        let w = &self.forms[i - 1];
        if j == 1 {
            &w.cdx
        } else {
            &w.cdt
        }
    }

    pub fn lambda(&self) -> Rational {
        self.pde.lambda().cloned().unwrap_or_else(Rational::zero)
    }

    /// Derived quantities; meaningless for the sine-Gordon fixture.
    pub fn derived(&self) -> Derived {
        let lu0 = JetExpr::u(0).pow(2).scale(&self.lambda());
        let phi: [JetExpr; 3] = std::array::from_fn(|i| &self.forms[i].cdt + &(&lu0 * &self.forms[i].cdx));
        let lp = |p: usize| &phi[p] - &phi[0].scale(&self.mu[p]);
        let l2 = lp(1);
        let l3 = lp(2);
        let m = &phi[2].scale(&self.mu[1]) - &phi[1].scale(&self.mu[2]);
        let n = &phi[2].scale(&self.eta[1]) - &phi[1].scale(&self.eta[2]);
        let q = -(&l3 + &m.scale(&self.mu[1]));
        let gamma = build::gamma(&self.mu[1], &self.mu[2], &self.eta[1], &self.eta[2]);
        Derived {
            phi,
            l2,
            l3,
            m,
            n,
            q,
            gamma,
        }
    }

    pub fn signature(&self) -> KindSignature {
        let d = self.derived();
        KindSignature {
            q_zero: d.q.is_zero(),
            l2_zero: d.l2.is_zero(),
            gamma_zero: d.gamma.is_zero(),
        }
    }

    /// Copy with one coefficient `f_ij` replaced; the PDE is kept.
    pub fn mutated(&self, i: usize, j: usize, replacement: JetExpr) -> FamilyInstance {
        let mut out = self.clone();
        let w = &mut out.forms[i - 1];
        if j == 1 {
            w.cdx = replacement;
        } else {
            w.cdt = replacement;
        }
        out
    }
}

/// Structure-equation residuals of an instance in printable form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub family: String,
    pub params: BTreeMap<String, String>,
    pub residuals: [String; 3],
    pub cleared_denominator: String,
    /// `ω₁∧ω₂` coefficient, which must not vanish.
    pub independence: String,
    pub zero: bool,
}

/// True iff the three structure equations hold modulo the PDE and
/// `ω₁∧ω₂ ≢ 0`.
pub fn verify_pss(inst: &FamilyInstance) -> Result<(bool, ResidualReport)> {
    let [w1, w2, w3] = &inst.forms;
    let r = structure_residuals(w1, w2, w3, &inst.pde)?;
    let witness = independence_witness(w1, w2);
    let zero = r.all_zero() && !witness.is_zero();
    let report = ResidualReport {
        family: inst.kind().to_string(),
        params: inst.params.scalar_table().into_iter().collect(),
        residuals: std::array::from_fn(|i| r.cleared[i].to_string()),
        cleared_denominator: r.cleared_denominator.to_string(),
        independence: witness.to_string(),
        zero,
    };
    Ok((zero, report))
}

/// The sine-Gordon fixture with parameter `η`.
pub fn sine_gordon(eta: Rational) -> Result<FamilyInstance> {
    let mut p = FamilyParams::blank(FamilyKind::Sg);
    p.eta = eta;
    build_family(p)
}

/// The universal `(a, b, c) = (−2ε cot u₀, ε, 0)` of the sine-Gordon fixture,
/// which gives `II = 2ε sin u₀ dx dt`.
pub fn sg_sff(sign: i8) -> Result<[JetExpr; 3]> {
    if sign != 1 && sign != -1 {
        return Err(Error::Validation(format!("sign must be +1 or -1, got {sign}")));
    }
    let e = Rational::from_integer(sign.into());
    let cot = JetExpr::cos_u0().div_expr(&JetExpr::sin_u0())?;
    Ok([cot.scale(&(-Rational::from_integer(2.into()) * &e)), JetExpr::constant(e), JetExpr::zero()])
}

/// Resolve a preset name such as `t24-default` or `t25ii-default-minus`.
pub fn preset(name: &str) -> Result<FamilyParams> {
    let (base, sign) = match name.strip_suffix("-minus") {
        Some(b) => (b, -1),
        None => (name.strip_suffix("-plus").unwrap_or(name), 1),
    };
    let kind = base
        .strip_suffix("-default")
        .ok_or_else(|| Error::Validation(format!("unknown preset `{name}`")))?;
    Ok(FamilyParams::default_for(kind.parse()?, sign))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::fundamental_forms;
    use crate::jetalg::parse_expr;

    fn p(s: &str) -> JetExpr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn t22_example_instance() {
        let inst = build_family(FamilyParams::default_for(FamilyKind::T22, 1)).unwrap();
        assert_eq!(inst.pde.f(), p("u1 + u2"));
        assert_eq!(inst.forms[0], OneForm::new(p("u0 - u2"), p("u1")));
        assert!(verify_pss(&inst).unwrap().0);
    }

    #[test]
    fn defaults_verify_both_signs() {
        for kind in FamilyKind::CLASSIFIED {
            for sign in [1, -1] {
                let inst = build_family(FamilyParams::default_for(kind, sign)).unwrap();
                let (ok, report) = verify_pss(&inst).unwrap();
                assert!(ok, "{kind} sign {sign}: {report:?}");
                assert!(inst.signature().matches(kind), "{kind} sign {sign}: {:?}", inst.signature());
            }
        }
    }

    #[test]
    fn opaque_slots_verify() {
        for kind in [FamilyKind::T22, FamilyKind::T24] {
            let mut params = FamilyParams::default_for(kind, 1);
            params.phi1 = FamilyParams::blank(kind).phi1;
            params.mu2 = Rational::new(3.into(), 4.into());
            let inst = build_family(params).unwrap();
            assert!(verify_pss(&inst).unwrap().0, "{kind}");
        }
    }

    #[test]
    fn sine_gordon_fixture() {
        let inst = sine_gordon(Rational::from_integer(3.into())).unwrap();
        assert!(verify_pss(&inst).unwrap().0);
        let [a, b, c] = sg_sff(1).unwrap();
        let (_, second) = fundamental_forms(&inst.forms, &a, &b, &c);
        assert_eq!(second.dxdt, p("sin(u0)"));
        assert!(second.dxdx.is_zero() && second.dtdt.is_zero());
    }

    #[test]
    fn validation_errors() {
        let mut params = FamilyParams::default_for(FamilyKind::T22, 1);
        params.eta2 = Rational::zero();
        assert!(matches!(build_family(params), Err(Error::Validation(_))));
        let mut params = FamilyParams::default_for(FamilyKind::T23, 1);
        params.eta3 = Some(Rational::from_integer(2.into()));
        assert!(build_family(params).is_err());
        let mut params = FamilyParams::default_for(FamilyKind::T25i, 1);
        params.lambda = Rational::zero();
        assert!(build_family(params).is_err());
        let mut params = FamilyParams::default_for(FamilyKind::T25ii, 1);
        params.tau = Rational::zero();
        assert!(build_family(params).is_err());
    }

    #[test]
    fn mutation_breaks_verification() {
        let inst = build_family(FamilyParams::default_for(FamilyKind::T24, 1)).unwrap();
        let bad = inst.mutated(1, 1, &inst.forms[0].cdx + &p("u1"));
        assert!(!verify_pss(&bad).unwrap().0);
    }

    #[test]
    fn presets_resolve() {
        assert_eq!(preset("t22-default").unwrap(), FamilyParams::default_for(FamilyKind::T22, 1));
        assert_eq!(preset("t25ii-default-minus").unwrap().sign, -1);
        assert!(preset("t22").is_err());
        assert!(preset("t99-default").is_err());
    }
}
