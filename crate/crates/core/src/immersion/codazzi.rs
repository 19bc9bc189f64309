use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SecondFundamentalForm;
use crate::cartan::delta;
use crate::error::Result;
use crate::families::FamilyInstance;
use crate::jetalg::{CompiledExpr, JetPoint};

/// Random jets with `(x, t)` drawn from `xs × ts` and `u₀..u₃` from
/// `[-1, 1]`. The Codazzi residual of a universal form must vanish at every
/// jet, so any sample is a solution sample for this purpose.
pub fn random_jets(seed: u64, n: usize, xs: (f64, f64), ts: (f64, f64)) -> Vec<JetPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut p = JetPoint {
                x: rng.random_range(xs.0..=xs.1),
                t: rng.random_range(ts.0..=ts.1),
                ..JetPoint::default()
            };
            for k in 0..4 {
                p.u[k] = rng.random_range(-1.0..=1.0);
            }
            p
        })
        .collect()
}

/// Pointwise residuals of the two Codazzi equations
///
/// ```text
/// f₁₁a_t + f₂₁b_t − f₁₂a_x − f₂₂b_x − 2bΔ₁₃ + (a−c)Δ₂₃
/// f₁₁b_t + f₂₁c_t − f₁₂b_x − f₂₂c_x + (a−c)Δ₁₃ + 2bΔ₂₃
/// ```
///
/// for a universal `sff`, whose total derivatives are plain `x, t` partials.
pub fn codazzi_residuals(inst: &FamilyInstance, sff: &SecondFundamentalForm, samples: &[JetPoint]) -> Result<Vec<[f64; 2]>> {
    let f: Vec<CompiledExpr> = [(1, 1), (1, 2), (2, 1), (2, 2)]
        .iter()
        .map(|&(i, j)| inst.f(i, j).compile())
        .collect::<Result<_>>()?;
    let d13 = delta(1, 3, &inst.forms)?.compile()?;
    let d23 = delta(2, 3, &inst.forms)?.compile()?;
    let (px, pt) = (sff.xi_map.px, sff.xi_map.pt);
    samples
        .iter()
        .map(|p| {
            let ([a, b, c], [a1, b1, c1]) = sff.eval_with_derivatives(sff.xi_map.xi(p.x, p.t))?;
            let [f11, f12, f21, f22] = [f[0].eval(p), f[1].eval(p), f[2].eval(p), f[3].eval(p)];
            let (d13, d23) = (d13.eval(p), d23.eval(p));
            let r1 = f11 * pt * a1 + f21 * pt * b1 - f12 * px * a1 - f22 * px * b1 - 2.0 * b * d13 + (a - c) * d23;
            let r2 = f11 * pt * b1 + f21 * pt * c1 - f12 * px * b1 - f22 * px * c1 + (a - c) * d13 + 2.0 * b * d23;
            Ok([r1, r2])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{build_family, FamilyKind, FamilyParams};
    use crate::immersion::{sff_closed_form, CaseId};

    #[test]
    fn p35i_vanishes_at_origin() {
        let inst = build_family(FamilyParams::default_for(FamilyKind::T22, 1)).unwrap();
        let sff = sff_closed_form(CaseId::P35i, 2.5, 1.0, &inst.params, 1).unwrap();
        let mut p = JetPoint::default();
        p.u[..3].copy_from_slice(&[0.3, -0.2, 0.9]);
        let r = codazzi_residuals(&inst, &sff, &[p]).unwrap();
        assert!(r[0][0].abs() < 1e-12 && r[0][1].abs() < 1e-12, "{r:?}");
    }

    fn worst(inst: &FamilyInstance, sff: &SecondFundamentalForm, jets: &[JetPoint]) -> f64 {
        codazzi_residuals(inst, sff, jets)
            .unwrap()
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn perturbed_beta_is_detected_by_gauss() {
        // With μ₂ = 0 Codazzi only asks b ∝ e^{2εξ} and c = a − εa_ξ, so a
        // perturbation of β in b alone shows up in Gauss, not Codazzi.
        let inst = build_family(FamilyParams::default_for(FamilyKind::T22, 1)).unwrap();
        let good = sff_closed_form(CaseId::P35i, 2.5, 1.0, &inst.params, 1).unwrap();
        let bad = good.with_b_perturbed(1e-3);
        let jets = random_jets(7, 50, (-0.3, 0.3), (0.0, 1.0));
        assert!(worst(&inst, &good, &jets) < 1e-10);
        assert!(worst(&inst, &bad, &jets) < 1e-10);
        let pts: Vec<f64> = jets.iter().map(|p| p.x).collect();
        let g = crate::immersion::gauss_residual(&bad, &pts).unwrap();
        assert!(g > 1e-4 && g < 1e-2, "{g}");
    }

    #[test]
    fn non_solution_is_detected() {
        let inst = build_family(FamilyParams::default_for(FamilyKind::T22, 1)).unwrap();
        let jets = random_jets(3, 20, (-1.0, 1.0), (0.0, 1.0));
        let w = worst(&inst, &SecondFundamentalForm::constant(0.0, 1.0, 1.0), &jets);
        assert!(w > 0.1, "{w}");
    }

    fn params_for(case: CaseId, sign: i8) -> FamilyParams {
        use crate::Rational;
        let mut p = FamilyParams::default_for(case.family(), sign);
        match case {
            CaseId::P35ii | CaseId::P37iii => p.mu2 = Rational::new(3.into(), 4.into()),
            CaseId::P37i => p.eta2 = Rational::from_integer(0.into()),
            _ => {}
        }
        p
    }

    #[test]
    fn every_case_satisfies_codazzi() {
        use crate::immersion::{solve_b_ode, BOdeProblem};
        for case in CaseId::ALL {
            for sign in [1i8, -1] {
                let inst = build_family(params_for(case, sign)).unwrap();
                let roots: &[i8] = if case.is_ode() { &[1] } else { &[1, -1] };
                for &root in roots {
                    let sff = if case.is_ode() {
                        let mut prob = BOdeProblem::for_params(&inst.params, 0.3, 0.0, 2.0, (-0.2, 0.2)).unwrap();
                        prob.root = sign * root;
                        solve_b_ode(&prob, case).unwrap()
                    } else {
                        sff_closed_form(case, 2.5, 1.0, &inst.params, root).unwrap()
                    };
                    let (lo, hi) = sff.domain();
                    let mut jets = random_jets(5, 40, (-1.0, 1.0), (-1.0, 1.0));
                    // Place every sample inside the domain along ξ.
                    for (k, p) in jets.iter_mut().enumerate() {
                        let target = lo + (hi - lo) * (k as f64 + 0.5) / 40.0;
                        let m = sff.xi_map;
                        if m.px != 0.0 {
                            p.x = (target - m.pt * p.t) / m.px;
                        } else {
                            p.t = target / m.pt;
                        }
                    }
                    let w = worst(&inst, &sff, &jets);
                    let tol = if case.is_ode() { 1e-6 } else { 1e-10 };
                    assert!(w < tol, "{case} sign {sign} root {root}: {w}");
                }
            }
        }
    }
}
