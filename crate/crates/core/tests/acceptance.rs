//! The nine acceptance criteria, one PASS/FAIL line each. Runs without the
//! libtest harness so the lines always reach stdout.

mod common;

use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use proptest::strategy::Strategy;
use proptest::test_runner::{TestCaseError, TestError, TestRunner};
use psskit::bonnet::{integrate_frame, sg_kink, FrameOptions, Grid, SffSource, SurfaceMesh};
use psskit::cartan::{fundamental_forms, structure_residuals};
use psskit::families::{
    build_family, lemma21_check, match_generalized_ch, sg_sff, sine_gordon, verify_pss, FamilyKind, FamilyParams,
};
use psskit::immersion::{
    certificate_sweep, codazzi_residuals, gauss_residual, interior_points, random_jets, sff_closed_form,
    solve_b_ode, strip_domain, BOdeProblem, CaseId, SecondFundamentalForm,
};
use psskit::jetalg::{parse_expr, JetExpr};
use psskit::ode::OdeOptions;
use psskit::Rational;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e(text: &str) -> JetExpr {
    parse_expr(text).unwrap()
}

fn sine_gordon_fixture() -> Outcome {
    for eta in ["1", "2", "1/3", "-5/2"] {
        let eta_q = psskit::rational(eta).map_err(|x| x.to_string())?;
        let inst = sine_gordon(eta_q.clone()).map_err(|x| x.to_string())?;
        let [w1, w2, w3] = &inst.forms;
        let r = structure_residuals(w1, w2, w3, &inst.pde).map_err(|x| x.to_string())?;
        ensure(r.all_zero(), || format!("eta = {eta}: residuals {:?}", r.cleared.map(|c| c.to_string())))?;
        let eta2 = JetExpr::constant(&eta_q * &eta_q);
        let inv2 = JetExpr::constant(Rational::one() / (&eta_q * &eta_q));
        for sign in [1i8, -1] {
            let [a, b, c] = sg_sff(sign).map_err(|x| x.to_string())?;
            let (first, second) = fundamental_forms(&inst.forms, &a, &b, &c);
            let expect_first = [eta2.clone(), JetExpr::cos_u0(), inv2.clone()];
            let got_first = [first.dxdx, first.dxdt, first.dtdt];
            // II = 2ε sin u dx dt, stored as the half coefficient.
            let expect_second = [JetExpr::zero(), JetExpr::sin_u0().scale(&Rational::from_integer(sign.into())), JetExpr::zero()];
            let got_second = [second.dxdx, second.dxdt, second.dtdt];
            for (g, x) in got_first.iter().chain(&got_second).zip(expect_first.iter().chain(&expect_second)) {
                ensure((g - x).is_zero(), || format!("eta = {eta}, sign {sign}: {g} != {x}"))?;
            }
        }
    }
    Ok("exact for eta in {1, 2, 1/3, -5/2}, both signs".into())
}

fn family_verification() -> Outcome {
    let mut n = 0;
    for kind in FamilyKind::CLASSIFIED {
        for sign in [1i8, -1] {
            let inst = build_family(FamilyParams::default_for(kind, sign)).map_err(|x| x.to_string())?;
            let (ok, rep) = verify_pss(&inst).map_err(|x| x.to_string())?;
            ensure(ok && rep.residuals.iter().all(|r| r == "0"), || format!("{kind} sign {sign}: {:?}", rep.residuals))?;
            let cond = lemma21_check(&inst, None);
            ensure(cond.all_pass, || {
                let failed: Vec<_> = cond.conditions.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
                format!("{kind} sign {sign}: conditions {failed:?} fail")
            })?;
            n += 1;
        }
    }
    Ok(format!("{n} instances verified, all structural conditions hold"))
}

fn mutation_sensitivity() -> Outcome {
    let mut kinds: Vec<_> = FamilyKind::CLASSIFIED.to_vec();
    kinds.push(FamilyKind::Sg);
    let planted = [e("u1"), e("u0^2"), e("1"), e("u2")];
    for kind in kinds {
        let inst = build_family(FamilyParams::default_for(kind, 1)).map_err(|x| x.to_string())?;
        let mut caught = None;
        'search: for (i, j) in [(1, 1), (2, 2), (3, 1), (1, 2), (2, 1), (3, 2)] {
            let base = if j == 1 { &inst.forms[i - 1].cdx } else { &inst.forms[i - 1].cdt };
            for term in &planted {
                let (ok, rep) = verify_pss(&inst.mutated(i, j, base + term)).map_err(|x| x.to_string())?;
                if !ok && rep.residuals.iter().any(|r| r != "0") {
                    caught = Some(format!("{kind}: f{i}{j} + {term}"));
                    break 'search;
                }
            }
        }
        ensure(caught.is_some(), || format!("{kind}: no planted mutation was detected"))?;
    }
    Ok("every family rejects a planted single-term mutation".into())
}

fn ch_membership() -> Outcome {
    let hit = match_generalized_ch().map_err(|x| x.to_string())?;
    ensure(hit.residual.is_zero(), || format!("coefficient residual {}", hit.residual))?;
    let inst = build_family(hit.params.clone()).map_err(|x| x.to_string())?;
    let diff = &inst.pde.f() - &psskit::families::ch_target();
    ensure(diff.is_zero(), || format!("expanded right-hand side differs by {diff}"))?;
    let (ok, rep) = verify_pss(&inst).map_err(|x| x.to_string())?;
    ensure(ok, || format!("matched instance fails verification: {:?}", rep.residuals))?;
    Ok(format!("{} with E = {}, D = {}", inst.kind(), hit.e, hit.d))
}

fn place_in_domain(sff: &SecondFundamentalForm, seed: u64, n: usize) -> Vec<psskit::jetalg::JetPoint> {
    let (lo, hi) = sff.domain();
    let m = sff.xi_map;
    let mut jets = random_jets(seed, n, (-1.0, 1.0), (-1.0, 1.0));
    for (k, p) in jets.iter_mut().enumerate() {
        let target = lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
        if m.px != 0.0 {
            p.x = (target - m.pt * p.t) / m.px;
        } else {
            p.t = target / m.pt;
        }
    }
    jets
}

fn closed_form_immersions() -> Outcome {
    for sign in [1i8, -1] {
        let s = strip_domain(2.5, 1.0, sign).map_err(|x| x.to_string())?;
        ensure((s.e_lo - 0.5).abs() <= 1e-14 && (s.e_hi - 2.0).abs() <= 1e-14, || {
            format!("sign {sign}: strip ({}, {})", s.e_lo, s.e_hi)
        })?;
    }
    let mut p37i = FamilyParams::default_for(FamilyKind::T24, 1);
    p37i.eta2 = Rational::zero();
    let cases = [
        (CaseId::P35i, FamilyParams::default_for(FamilyKind::T22, 1), -1.0),
        (CaseId::P37i, p37i, 1.0),
        (CaseId::P37ii, FamilyParams::default_for(FamilyKind::T24, 1), -1.0),
    ];
    let (mut worst_gauss, mut worst_codazzi) = (0.0f64, 0.0f64);
    for (case, params, b_expect) in cases {
        let inst = build_family(params).map_err(|x| x.to_string())?;
        let sff = sff_closed_form(case, 2.5, 1.0, &inst.params, 1).map_err(|x| x.to_string())?;
        let [a, b, c] = sff.eval_xt(0.0, 0.0).map_err(|x| x.to_string())?;
        let err = (a - 0.5f64.sqrt()).abs().max((b - b_expect).abs()).max(c.abs());
        ensure(err <= 1e-12, || format!("{case}: (a, b, c) = ({a}, {b}, {c})"))?;
        let (lo, hi) = sff.domain();
        let pts = interior_points(lo, hi, 1000, 1e-3 * (hi - lo));
        let g = gauss_residual(&sff, &pts).map_err(|x| x.to_string())?;
        ensure(g <= 1e-12, || format!("{case}: Gauss residual {g:e}"))?;
        let jets = place_in_domain(&sff, 11, 200);
        let cz = codazzi_residuals(&inst, &sff, &jets).map_err(|x| x.to_string())?;
        let w = cz.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        ensure(w <= 1e-10, || format!("{case}: Codazzi residual {w:e}"))?;
        worst_gauss = worst_gauss.max(g);
        worst_codazzi = worst_codazzi.max(w);
    }
    Ok(format!("Gauss {worst_gauss:.1e}, Codazzi {worst_codazzi:.1e}, strip (0.5, 2)"))
}

fn ode_problem(tol: f64) -> BOdeProblem {
    BOdeProblem {
        mu2: 1.0,
        eta2: 1.0,
        c1: 0.0,
        beta: 0.0,
        sign: 1,
        root: 1,
        xi0: 0.0,
        b0: 2.0,
        range: (0.0, 1.0),
        opts: OdeOptions::with_tol(tol),
    }
}

fn ode_gauss(tol: f64) -> Result<f64, String> {
    let sff = solve_b_ode(&ode_problem(tol), CaseId::P35ii).map_err(|x| x.to_string())?;
    let (lo, hi) = sff.domain();
    let dense = gauss_residual(&sff, &interior_points(lo, hi, 1000, 0.0)).map_err(|x| x.to_string())?;
    Ok(dense.max(sff.node_gauss_residual().unwrap_or(f64::NAN)))
}

fn ode_immersions() -> Outcome {
    let (_, slope) = ode_problem(1e-10).initial_slope().map_err(|x| x.to_string())?;
    let expect = 2.0 * 6f64.sqrt() / (2.0 + 3f64.sqrt());
    ensure((slope - expect).abs() <= 1e-9, || format!("b'(0) = {slope}, expected {expect}"))?;
    let sff = solve_b_ode(&ode_problem(1e-10), CaseId::P35ii).map_err(|x| x.to_string())?;
    let (lo, hi) = sff.domain();
    ensure(lo <= 0.0 && hi >= 1.0, || format!("integrated only over [{lo}, {hi}]"))?;
    let coarse = ode_gauss(1e-10)?;
    let fine = ode_gauss(1e-11)?;
    ensure(coarse <= 1e-8, || format!("Gauss residual {coarse:e} at tol 1e-10"))?;
    ensure(fine * 5.0 <= coarse, || format!("tol 1e-10 -> 1e-11 moved Gauss {coarse:e} -> {fine:e}"))?;
    Ok(format!("b'(0) error {:.1e}, Gauss {coarse:.1e} -> {fine:.1e}", (slope - expect).abs()))
}

fn certificates() -> Outcome {
    let mut parts = Vec::new();
    for (kind, seed) in [(FamilyKind::T23, 1), (FamilyKind::T25i, 2), (FamilyKind::T25ii, 3)] {
        let s = certificate_sweep(kind, 100, seed).map_err(|x| x.to_string())?;
        ensure(s.samples >= 100 && s.nonzero == s.samples, || format!("{kind}: {}/{} nonzero", s.nonzero, s.samples))?;
        parts.push(format!("{kind} {}/{}", s.nonzero, s.samples));
    }
    Ok(parts.join(", "))
}

fn sg_mesh(h: f64, n: usize) -> Result<SurfaceMesh, String> {
    let inst = sine_gordon(Rational::one()).map_err(|x| x.to_string())?;
    let sampler = sg_kink(1.0, Grid::square(0.25, 0.25, h, n)).map_err(|x| x.to_string())?;
    let sff = SffSource::from_jet_exprs(&sg_sff(1).map_err(|x| x.to_string())?).map_err(|x| x.to_string())?;
    integrate_frame(&sampler, &inst, &sff, &FrameOptions::default()).map_err(|x| x.to_string())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn reconstruction() -> Outcome {
    let coarse = sg_mesh(0.01, 101)?;
    let drift = coarse.max_drift();
    ensure(drift <= 1e-6, || format!("drift {drift:e}"))?;
    let k = median(coarse.interior_curvature());
    ensure((k + 1.0).abs() <= 0.05, || format!("median K = {k}"))?;
    let err = |m: &SurfaceMesh| median(m.interior_curvature().iter().map(|k| (k + 1.0).abs()).collect());
    let fine = sg_mesh(0.005, 201)?;
    let (ec, ef) = (err(&coarse), err(&fine));
    ensure(ef < ec, || format!("median |K+1| {ec:e} -> {ef:e} under refinement"))?;
    Ok(format!("drift {drift:.1e}, median K {k:.6}, |K+1| {ec:.1e} -> {ef:.1e}"))
}

fn suite<S: Strategy>(name: &str, strategy: S, show: impl Fn(&S::Value) -> String, prop: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(common::config());
    runner.run(&strategy, prop).map_err(|err| match err {
        TestError::Abort(why) => format!("{name}: aborted, {why}"),
        TestError::Fail(why, input) => format!("{name}: {why} on {}", show(&input)),
    })
}

fn engine_properties() -> Outcome {
    use common::{expr, small_rational};
    let pair = |(a, b): &(JetExpr, JetExpr)| format!("{a} ; {b}");
    suite(
        "linearity",
        (expr(), expr(), small_rational(), small_rational()),
        |(a, b, p, q)| format!("{a} ; {b} ; {p} ; {q}"),
        |(a, b, p, q)| common::linearity(&a, &b, &p, &q),
    )?;
    suite("Leibniz", (expr(), expr()), pair, |(a, b)| common::leibniz(&a, &b))?;
    suite("commutation", expr(), JetExpr::to_string, |e| common::commutation(&e))?;
    suite("normalization", expr(), JetExpr::to_string, |e| common::normalization(&e))?;
    suite("round trip", expr(), JetExpr::to_string, |e| common::round_trip(&e))?;
    Ok(format!("5 suites x {} cases, seed {:#x}", common::CASES, common::SEED))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 9] = [
        ("sine-Gordon fixture", 1, sine_gordon_fixture),
        ("family verification", 30, family_verification),
        ("mutation sensitivity", 10, mutation_sensitivity),
        ("Camassa-Holm membership", 60, ch_membership),
        ("closed-form immersions", 5, closed_form_immersions),
        ("ODE immersions", 5, ode_immersions),
        ("nonexistence certificates", 5, certificates),
        ("reconstruction", 60, reconstruction),
        ("engine properties", 30, engine_properties),
    ];
    let mut failed = 0;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*limit);
        let (pass, detail) = match outcome {
            Ok(d) if in_time => (true, d),
            Ok(d) => (false, format!("{d}; over the {limit} s budget")),
            Err(d) => (false, d),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {} {:<26} {} ({:.2} s / {limit} s) {detail}",
            k + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
