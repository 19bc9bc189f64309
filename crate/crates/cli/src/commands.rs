use num_traits::ToPrimitive;
use psskit::bonnet::{integrate_frame, mesh_csv, mesh_obj, sg_kink, traveling_wave, FrameOptions, Grid, SffSource};
use psskit::families::{
    build_family, lemma21_check, match_generalized_ch, sg_sff, sine_gordon, verify_pss, FamilyConfig, FamilyKind, FamilyParams,
};
use psskit::immersion::{
    certificate_sweep, codazzi_residuals, gauss_residual, interior_points, nonexistence_certificate, random_jets, sff_closed_form,
    sff_csv, solve_b_ode, solve_b_ode_branches, BOdeProblem, CaseId, SecondFundamentalForm,
};
use psskit::jetalg::JetPoint;
use psskit::ode::OdeOptions;
use psskit::Rational;
use serde_json::{json, Value};

use crate::config::{CommandName, FamilySpec, RunConfig, Solution};
use crate::Failure;

/// What a command produced, before anything touches the disk.
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    pub result: Value,
    /// `(file name, contents)` to write under the output directory.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    fn new(passed: bool, summary: String, result: Value) -> Self {
        Outcome {
            passed,
            summary,
            result,
            files: Vec::new(),
        }
    }
}

fn need_family(p: Option<FamilyParams>, cmd: CommandName) -> Result<FamilyParams, Failure> {
    p.ok_or_else(|| Failure::Config(format!("`{}` needs a family", cmd.as_str())))
}

/// Run `cfg`, resolving it in place so the caller can embed it.
pub fn run(cfg: &mut RunConfig) -> Result<Outcome, Failure> {
    cfg.validate()?;
    let params = cfg.resolve()?;
    match cfg.command {
        CommandName::Verify => verify(need_family(params, cfg.command)?),
        CommandName::Lemma21 => lemma21(need_family(params, cfg.command)?, cfg.delta.as_deref()),
        CommandName::MatchCh => match_ch(cfg),
        CommandName::Immerse => immerse(cfg, need_family(params, cfg.command)?),
        CommandName::Certify => certify(cfg, params),
        CommandName::Reconstruct => reconstruct(cfg, params),
    }
}

fn verify(params: FamilyParams) -> Result<Outcome, Failure> {
    let inst = build_family(params)?;
    let (ok, report) = verify_pss(&inst)?;
    let summary = if ok {
        format!("{}: structure equations hold exactly", report.family)
    } else {
        format!("{}: nonzero residuals {:?}", report.family, report.residuals)
    };
    Ok(Outcome::new(ok, summary, serde_json::to_value(&report).expect("serializable")))
}

fn lemma21(params: FamilyParams, delta: Option<&str>) -> Result<Outcome, Failure> {
    let delta = delta.map(psskit::rational).transpose()?;
    let inst = build_family(params)?;
    let report = lemma21_check(&inst, delta.as_ref());
    let failed: Vec<&str> = report.conditions.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let summary = if report.all_pass {
        format!("{}: all conditions pass", report.family)
    } else {
        format!("{}: failing {}", report.family, failed.join(", "))
    };
    Ok(Outcome::new(report.all_pass, summary, serde_json::to_value(&report).expect("serializable")))
}

fn match_ch(cfg: &mut RunConfig) -> Result<Outcome, Failure> {
    let hit = match match_generalized_ch() {
        Ok(h) => h,
        Err(psskit::Error::NoMatch(m)) => {
            return Ok(Outcome::new(false, format!("no match: {m}"), json!({ "error": m })));
        }
        Err(e) => return Err(e.into()),
    };
    let inst = build_family(hit.params.clone())?;
    let (ok, report) = verify_pss(&inst)?;
    let passed = ok && hit.residual.is_zero();
    // The matched family becomes part of the resolved config.
    cfg.family = Some(FamilySpec::Inline(FamilyConfig::from_params(&hit.params)));
    let result = json!({
        "E": hit.e.to_string(),
        "D": hit.d.to_string(),
        "coefficient_residual": hit.residual.to_string(),
        "f": hit.params.f.to_string(),
        "phi1": hit.params.phi1.to_string(),
        "eta2": hit.params.eta2.to_string(),
        "c1": hit.params.c1.to_string(),
        "sign": hit.params.sign,
        "verify": report,
    });
    Ok(Outcome::new(
        passed,
        format!("Camassa-Holm matched with E = {}, D = {}, residual {}", hit.e, hit.d, hit.residual),
        result,
    ))
}

/// Random jets moved along the level sets of `ξ` into `sff`'s domain.
fn jets_in_domain(sff: &SecondFundamentalForm, seed: u64, n: usize) -> Vec<JetPoint> {
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

fn immerse(cfg: &mut RunConfig, params: FamilyParams) -> Result<Outcome, Failure> {
    let opts = cfg.immerse.get_or_insert_with(Default::default).clone();
    let tol = cfg.tolerances;
    let case = match &opts.case {
        Some(c) => c.parse::<CaseId>()?,
        None => CaseId::for_params(&params)?,
    };
    cfg.immerse.as_mut().unwrap().case = Some(case.name().to_string());
    // Irrational √(1+μ₂²) rules out the exact family, but the b-equation
    // itself is numeric; Codazzi is then skipped and the report says why.
    let inst = build_family(params.clone());
    let mut result = json!({ "case": case.name() });
    let sff = if case.is_ode() {
        let mut prob = BOdeProblem::for_params(&params, opts.beta, opts.xi0, opts.b0, (opts.xi_range[0], opts.xi_range[1]))?;
        prob.root = prob.sign * opts.root;
        prob.opts = OdeOptions::with_tol(tol.ode);
        let (_, slope) = prob.initial_slope()?;
        result["initial_slope"] = json!(slope);
        result["branches"] = serde_json::to_value(solve_b_ode_branches(&prob, case)).expect("serializable");
        let sff = solve_b_ode(&prob, case)?;
        result["stops"] = serde_json::to_value(sff.ode_stops()).expect("serializable");
        result["node_gauss_residual"] = json!(sff.node_gauss_residual());
        sff
    } else {
        let sff = sff_closed_form(case, opts.alpha, opts.beta, &params, opts.root)?;
        if let Some(strip) = sff.strip() {
            result["strip"] = serde_json::to_value(strip).expect("serializable");
        }
        sff
    };
    let (lo, hi) = sff.domain();
    let margin = 1e-3 * (hi - lo);
    let points = interior_points(lo, hi, opts.points, margin);
    let gauss = gauss_residual(&sff, &points)?;
    let codazzi = match &inst {
        Ok(inst) => {
            let jets = jets_in_domain(&sff, cfg.seed, opts.codazzi_samples);
            let worst = codazzi_residuals(inst, &sff, &jets)?
                .iter()
                .flatten()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            Some(worst)
        }
        Err(e) => {
            result["codazzi_skipped"] = json!(e.to_string());
            None
        }
    };
    result["domain"] = json!([lo, hi]);
    result["gauss_residual"] = json!(gauss);
    result["codazzi_residual"] = json!(codazzi);
    let passed = gauss <= tol.gauss && codazzi.is_none_or(|c| c <= tol.codazzi);
    let codazzi_text = codazzi.map_or("skipped".to_string(), |c| format!("{c:.3e}"));
    let mut out = Outcome::new(
        passed,
        format!("{case}: domain ({lo:.6}, {hi:.6}), Gauss {gauss:.3e}, Codazzi {codazzi_text}"),
        result,
    );
    out.files.push(("sff.csv".into(), sff_csv(&sff, &points)?));
    Ok(out)
}

fn certify(cfg: &mut RunConfig, params: Option<FamilyParams>) -> Result<Outcome, Failure> {
    let opts = cfg.certify.get_or_insert_with(Default::default).clone();
    if let Some(n) = opts.sweep {
        let kind = match &params {
            Some(p) => p.kind,
            None => return Err(Failure::Config("a sweep needs a family kind".into())),
        };
        let s = certificate_sweep(kind, n, cfg.seed)?;
        let passed = s.nonzero == s.samples;
        return Ok(Outcome::new(
            passed,
            format!("{kind}: {}/{} certificates nonzero", s.nonzero, s.samples),
            serde_json::to_value(&s).expect("serializable"),
        ));
    }
    let params = need_family(params, cfg.command)?;
    let c = nonexistence_certificate(&params)?;
    Ok(Outcome::new(
        c.nonzero,
        format!("{}: certificate {} ({})", c.kind, c.value, c.verdict),
        serde_json::to_value(&c).expect("serializable"),
    ))
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    v.retain(|x| x.is_finite());
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v[v.len() / 2])
}

fn reconstruct(cfg: &mut RunConfig, params: Option<FamilyParams>) -> Result<Outcome, Failure> {
    let opts = cfg.reconstruct.get_or_insert_with(Default::default).clone();
    let tol = cfg.tolerances;
    let grid = Grid::square(opts.x0, opts.t0, opts.h, opts.n);
    let frame_opts = FrameOptions {
        reorthonormalize: opts.reorthonormalize,
        drift_threshold: Some(tol.drift),
        gauss_tol: tol.gauss,
    };
    let (sampler, inst, sff) = match opts.solution {
        Solution::SgKink => {
            let (eta, sign) = match &params {
                Some(p) if p.kind == FamilyKind::Sg => (p.eta.clone(), p.sign),
                Some(p) => return Err(Failure::Config(format!("the kink solves sine-Gordon, not {}", p.kind))),
                None => (Rational::from_integer(1.into()), 1),
            };
            let inst = sine_gordon(eta)?;
            let sff = SffSource::from_jet_exprs(&sg_sff(sign)?)?;
            (sg_kink(opts.a, grid)?, inst, sff)
        }
        Solution::TravelingWave => {
            let params = match params {
                Some(p) => p,
                None => {
                    let p = match_generalized_ch()?.params;
                    cfg.family = Some(FamilySpec::Inline(FamilyConfig::from_params(&p)));
                    p
                }
            };
            let inst = build_family(params.clone())?;
            let case = match &opts.case {
                Some(c) => c.parse::<CaseId>()?,
                None => CaseId::for_params(&params)?,
            };
            if case.is_ode() {
                return Err(Failure::Config(format!("reconstruction takes a closed-form case, got {case}")));
            }
            cfg.reconstruct.as_mut().unwrap().case = Some(case.name().to_string());
            let sff = sff_closed_form(case, opts.alpha, opts.beta, &params, opts.root)?;
            let sampler = traveling_wave(&inst, opts.c, opts.xi0, opts.initial, grid, &OdeOptions::with_tol(tol.ode))?;
            (sampler, inst, SffSource::Universal(sff))
        }
    };
    let mesh = integrate_frame(&sampler, &inst, &sff, &frame_opts)?;
    let k = median(mesh.interior_curvature());
    let result = json!({
        "grid": grid,
        "provenance": sampler.provenance,
        "pde_residual": sampler.max_residual,
        "max_drift": mesh.max_drift(),
        "commutation_defect": mesh.commutation_defect,
        "median_curvature": k,
        "median_curvature_error": k.map(|k| (k + 1.0).abs()),
        "lambda": inst.lambda().to_f64(),
    });
    let mut out = Outcome::new(
        true,
        format!(
            "{}×{} mesh, drift {:.3e}, commutation defect {:.3e}, median K {}",
            grid.nx,
            grid.nt,
            mesh.max_drift(),
            mesh.commutation_defect,
            k.map_or("n/a".to_string(), |k| format!("{k:.6}"))
        ),
        result,
    );
    out.files.push(("mesh.obj".into(), mesh_obj(&mesh)));
    out.files.push(("mesh.csv".into(), mesh_csv(&mesh)));
    Ok(out)
}
