//! Second fundamental forms `II` of local isometric immersions for the
//! families that admit them, and obstruction certificates for those that do
//! not.
//!
//! All existence cases are universal: `a, b, c` depend on `(x, t)` only,
//! through `ξ = η₂x + C₁t` (with `C₁ = 0` for T22). The closed-form cases
//! share one template with `e = e^{2εξ}`:
//!
//! ```text
//! L = αe − β²e² − 1,   a = ±√L,   b = ∓βe,   c = a − ε a_ξ
//! ```
//!
//! and the `μ₂ ≠ 0` cases reduce to a first-order ODE for `b` (see
//! [`solve_b_ode`]).

mod certificate;
mod codazzi;
mod ode_case;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{FamilyKind, FamilyParams};
use crate::ode::{Stop, Trajectory};

pub use certificate::{certificate_sweep, nonexistence_certificate, Certificate, SweepSummary};
pub use codazzi::{codazzi_residuals, random_jets};
pub use ode_case::{solve_b_ode, solve_b_ode_branches, BOdeProblem, BranchReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    /// T22 with `μ₂ = 0`.
    P35i,
    /// T22 with `μ₂ ≠ 0` (ODE).
    P35ii,
    /// T24 with `μ₂ = η₂ = 0`, `C₁ ≠ 0`.
    P37i,
    /// T24 with `μ₂ = 0`, `η₂ ≠ 0`.
    P37ii,
    /// T24 with `μ₂ ≠ 0` (ODE).
    P37iii,
}

impl CaseId {
    pub const ALL: [CaseId; 5] = [CaseId::P35i, CaseId::P35ii, CaseId::P37i, CaseId::P37ii, CaseId::P37iii];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::P35i => "p35i",
            CaseId::P35ii => "p35ii",
            CaseId::P37i => "p37i",
            CaseId::P37ii => "p37ii",
            CaseId::P37iii => "p37iii",
        }
    }

    pub fn is_ode(self) -> bool {
        matches!(self, CaseId::P35ii | CaseId::P37iii)
    }

    pub fn family(self) -> FamilyKind {
        match self {
            CaseId::P35i | CaseId::P35ii => FamilyKind::T22,
            _ => FamilyKind::T24,
        }
    }

    /// The case that applies to `params`, if any.
    pub fn for_params(p: &FamilyParams) -> Result<CaseId> {
        use num_traits::Zero;
        let case = match p.kind {
            FamilyKind::T22 if p.mu2.is_zero() => CaseId::P35i,
            FamilyKind::T22 => CaseId::P35ii,
            FamilyKind::T24 if !p.mu2.is_zero() => CaseId::P37iii,
            FamilyKind::T24 if p.eta2.is_zero() => CaseId::P37i,
            FamilyKind::T24 => CaseId::P37ii,
            other => {
                return Err(Error::Validation(format!(
                    "{other} admits no immersion with universal coefficients; use a certificate"
                )))
            }
        };
        Ok(case)
    }
}

impl std::fmt::Display for CaseId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CaseId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Validation(format!("unknown case `{s}`")))
    }
}

/// `ξ = px·x + pt·t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiMap {
    pub px: f64,
    pub pt: f64,
}

impl XiMap {
    pub fn from_params(p: &FamilyParams) -> XiMap {
        use num_traits::ToPrimitive;
        let c1 = if p.kind == FamilyKind::T24 { p.c1.to_f64().unwrap() } else { 0.0 };
        XiMap {
            px: p.eta2.to_f64().unwrap(),
            pt: c1,
        }
    }

    pub fn xi(&self, x: f64, t: f64) -> f64 {
        self.px * x + self.pt * t
    }
}

/// Open interval of `ξ` on which the closed form is defined.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    /// Bounds on `e^{2εξ}`.
    pub e_lo: f64,
    pub e_hi: f64,
    pub xi_lo: f64,
    pub xi_hi: f64,
    /// `β = 0`: the positivity set of `L` is a half-line.
    pub degenerate: bool,
}

impl Strip {
    pub fn contains(&self, xi: f64) -> bool {
        self.xi_lo < xi && xi < self.xi_hi
    }

    /// The strip in the case's own coordinate (`x` for P35i, `t` for P37i,
    /// `ξ` otherwise).
    pub fn coordinate_interval(&self, case: CaseId, map: &XiMap) -> (f64, f64) {
        let scale = match case {
            CaseId::P35i => map.px,
            CaseId::P37i => map.pt,
            _ => 1.0,
        };
        let (a, b) = (self.xi_lo / scale, self.xi_hi / scale);
        (a.min(b), a.max(b))
    }
}

fn check_alpha_beta(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha * alpha > 4.0 * beta * beta) {
        return Err(Error::Validation(format!(
            "need alpha > 0 and alpha^2 > 4 beta^2, got alpha = {alpha}, beta = {beta}"
        )));
    }
    Ok(())
}

fn check_sign(sign: i8) -> Result<f64> {
    match sign {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        _ => Err(Error::Validation(format!("sign must be +1 or -1, got {sign}"))),
    }
}

/// Interval of `ξ` where `L = αe^{2εξ} − β²e^{4εξ} − 1 > 0`.
pub fn strip_domain(alpha: f64, beta: f64, sign: i8) -> Result<Strip> {
    check_alpha_beta(alpha, beta)?;
    let eps = check_sign(sign)?;
    let (e_lo, e_hi, degenerate) = if beta == 0.0 {
        (1.0 / alpha, f64::INFINITY, true)
    } else {
        let r = (alpha * alpha - 4.0 * beta * beta).sqrt();
        let d = 2.0 * beta * beta;
        ((alpha - r) / d, (alpha + r) / d, false)
    };
    let (x1, x2) = (e_lo.ln() / (2.0 * eps), e_hi.ln() / (2.0 * eps));
    Ok(Strip {
        e_lo,
        e_hi,
        xi_lo: x1.min(x2),
        xi_hi: x1.max(x2),
        degenerate,
    })
}

#[derive(Clone, Debug)]
pub(crate) struct OdeBody {
    pub mu2: f64,
    pub s: f64,
    pub beta: f64,
    pub traj: Trajectory,
    pub stops: [Stop; 2],
}

#[derive(Clone, Debug)]
enum Body {
    /// `b_beta` is the `β` used in `b`; it differs from `alpha`/`beta` only
    /// in deliberately perturbed forms.
    Closed { b_sign: f64, b_beta: f64, strip: Strip },
    Ode(Box<OdeBody>),
    Constant([f64; 3]),
}

/// Coefficients `a, b, c` of `ω₁₃ = aω₁ + bω₂`, `ω₂₃ = bω₁ + cω₂` as
/// functions of `ξ`.
#[derive(Clone, Debug)]
pub struct SecondFundamentalForm {
    pub case: Option<CaseId>,
    pub alpha: f64,
    pub beta: f64,
    /// Family branch `ε`.
    pub sign: i8,
    /// Sign of the square root in `a`.
    pub root: i8,
    pub xi_map: XiMap,
    body: Body,
}

/// Closed-form second fundamental form for P35i, P37i or P37ii.
///
/// `root` picks `a = root·√L`; both roots satisfy Gauss and Codazzi.
pub fn sff_closed_form(case: CaseId, alpha: f64, beta: f64, params: &FamilyParams, root: i8) -> Result<SecondFundamentalForm> {
    use num_traits::Zero;
    if case.is_ode() {
        return Err(Error::Validation(format!("{case} has no closed form; use solve_b_ode")));
    }
    if params.kind != case.family() {
        return Err(Error::Validation(format!("{case} applies to {}, not {}", case.family(), params.kind)));
    }
    let ok = match case {
        CaseId::P35i => params.mu2.is_zero() && !params.eta2.is_zero(),
        CaseId::P37i => params.mu2.is_zero() && params.eta2.is_zero() && !params.c1.is_zero(),
        _ => params.mu2.is_zero() && !params.eta2.is_zero(),
    };
    if !ok {
        return Err(Error::Validation(format!(
            "{case} requires {}",
            match case {
                CaseId::P35i => "mu2 = 0, eta2 != 0",
                CaseId::P37i => "mu2 = eta2 = 0, C1 != 0",
                _ => "mu2 = 0, eta2 != 0",
            }
        )));
    }
    check_sign(root)?;
    let strip = strip_domain(alpha, beta, params.sign)?;
    let b_sign = if case == CaseId::P37i { 1.0 } else { -1.0 };
    Ok(SecondFundamentalForm {
        case: Some(case),
        alpha,
        beta,
        sign: params.sign,
        root,
        xi_map: XiMap::from_params(params),
        body: Body::Closed {
            b_sign,
            b_beta: beta,
            strip,
        },
    })
}

impl SecondFundamentalForm {
    /// Constant coefficients; no domain restriction.
    pub fn constant(a: f64, b: f64, c: f64) -> Self {
        SecondFundamentalForm {
            case: None,
            alpha: 0.0,
            beta: 0.0,
            sign: 1,
            root: 1,
            xi_map: XiMap { px: 0.0, pt: 0.0 },
            body: Body::Constant([a, b, c]),
        }
    }

    pub(crate) fn from_ode(case: CaseId, sign: i8, root: i8, xi_map: XiMap, body: OdeBody) -> Self {
        SecondFundamentalForm {
            case: Some(case),
            alpha: 0.0,
            beta: body.beta,
            sign,
            root,
            xi_map,
            body: Body::Ode(Box::new(body)),
        }
    }

    /// Copy whose `b` uses `β + delta` while `a, c` keep `β`; no longer a
    /// solution when `delta ≠ 0`. Used to check that residuals detect defects.
    pub fn with_b_perturbed(&self, delta: f64) -> Self {
        let mut out = self.clone();
        if let Body::Closed { b_beta, .. } = &mut out.body {
            *b_beta += delta;
        }
        out
    }

    pub fn eps(&self) -> f64 {
        self.sign as f64
    }

    /// Domain in `ξ` (open for closed forms, closed for ODE trajectories).
    pub fn domain(&self) -> (f64, f64) {
        match &self.body {
            Body::Closed { strip, .. } => (strip.xi_lo, strip.xi_hi),
            Body::Ode(o) => o.traj.span(),
            Body::Constant(_) => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn strip(&self) -> Option<Strip> {
        match &self.body {
            Body::Closed { strip, .. } => Some(*strip),
            _ => None,
        }
    }

    /// Why each direction of an ODE solve ended (backward, forward).
    pub fn ode_stops(&self) -> Option<&[Stop; 2]> {
        match &self.body {
            Body::Ode(o) => Some(&o.stops),
            _ => None,
        }
    }

    /// Accepted ODE nodes as `(ξ, b, a)`.
    pub fn ode_nodes(&self) -> Option<Vec<(f64, f64, f64)>> {
        match &self.body {
            Body::Ode(o) => Some(o.traj.ts.iter().zip(&o.traj.ys).map(|(&t, y)| (t, y[0], y[1])).collect()),
            _ => None,
        }
    }

    fn out_of_domain(&self, xi: f64) -> Error {
        let (lo, hi) = self.domain();
        Error::Domain(format!("xi = {xi} outside the domain ({lo}, {hi})"))
    }

    /// `[a, b, c]` and their `ξ`-derivatives at `ξ`.
    pub fn eval_with_derivatives(&self, xi: f64) -> Result<([f64; 3], [f64; 3])> {
        match &self.body {
            Body::Constant(v) => Ok((*v, [0.0; 3])),
            Body::Closed { b_sign, b_beta, strip } => {
                if !strip.contains(xi) {
                    return Err(self.out_of_domain(xi));
                }
                let eps = self.eps();
                let rho = self.root as f64;
                let (al, be) = (self.alpha, self.beta);
                let e = (2.0 * eps * xi).exp();
                let l = al * e - be * be * e * e - 1.0;
                if l <= 0.0 {
                    return Err(self.out_of_domain(xi));
                }
                let l1 = 2.0 * eps * (al * e - 2.0 * be * be * e * e);
                let l2 = 4.0 * (al * e - 4.0 * be * be * e * e);
                let sq = l.sqrt();
                let a = rho * sq;
                let a1 = rho * l1 / (2.0 * sq);
                let a2 = rho * (l2 / (2.0 * sq) - l1 * l1 / (4.0 * l * sq));
                let b = b_sign * b_beta * e;
                let b1 = 2.0 * eps * b;
                Ok(([a, b, a - eps * a1], [a1, b1, a1 - eps * a2]))
            }
            Body::Ode(o) => {
                let y = o.traj.eval(xi).ok_or_else(|| self.out_of_domain(xi))?;
                let (b, a) = (y[0], y[1]);
                let fx = ode_case::Field::new(o.mu2, o.s, o.beta, self.eps(), self.root as f64);
                let g = fx.g(xi, b).ok_or_else(|| Error::Numeric(format!("b' undefined at xi = {xi}")))?;
                let a1 = fx.a_prime(xi, b, g);
                let phi = fx.phi(xi, b);
                let phi1 = fx.phi_prime(xi, g);
                Ok(([a, b, a + phi], [a1, g, a1 + phi1]))
            }
        }
    }

    pub fn eval(&self, xi: f64) -> Result<[f64; 3]> {
        Ok(self.eval_with_derivatives(xi)?.0)
    }

    /// `[a, b, c]` at `(x, t)`.
    pub fn eval_xt(&self, x: f64, t: f64) -> Result<[f64; 3]> {
        self.eval(self.xi_map.xi(x, t))
    }
}

/// `max |ac − b² + 1|` over `points` (values of `ξ`).
pub fn gauss_residual(sff: &SecondFundamentalForm, points: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &xi in points {
        let [a, b, c] = sff.eval(xi)?;
        worst = worst.max((a * c - b * b + 1.0).abs());
    }
    Ok(worst)
}

/// CSV with columns `xi,a,b,c,gauss_residual`.
pub fn sff_csv(sff: &SecondFundamentalForm, points: &[f64]) -> Result<String> {
    let mut out = String::from("xi,a,b,c,gauss_residual\n");
    for &xi in points {
        let [a, b, c] = sff.eval(xi)?;
        out.push_str(&format!("{xi:.12e},{a:.12e},{b:.12e},{c:.12e},{:.6e}\n", a * c - b * b + 1.0));
    }
    Ok(out)
}

/// `n` evenly spaced interior points of `(lo, hi)`, shrunk by `margin` at
/// each end.
pub fn interior_points(lo: f64, hi: f64, n: usize, margin: f64) -> Vec<f64> {
    let (a, b) = (lo + margin, hi - margin);
    (0..n).map(|i| a + (b - a) * (i as f64 + 0.5) / n as f64).collect()
}
