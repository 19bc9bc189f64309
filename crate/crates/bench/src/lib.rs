//! Fixtures shared by the benchmarks.

use psskit::bonnet::{sg_kink, Grid, SffSource, SolutionSampler};
use psskit::families::{build_family, sg_sff, sine_gordon, FamilyInstance, FamilyKind, FamilyParams};
use psskit::jetalg::{parse_expr, JetExpr, PdeSpec};
use psskit::Rational;

pub fn family(kind: FamilyKind) -> FamilyInstance {
    build_family(FamilyParams::default_for(kind, 1)).expect("default parameters build")
}

/// The generalized Camassa–Holm right-hand side as a third-order PDE.
pub fn ch_pde() -> PdeSpec {
    let g = parse_expr("-u0^2*u2 - 3*u0*u1^2 - 2*u0^2*u1 + 4*u0*u1*u2 + u1^3").unwrap();
    PdeSpec::third_order(Rational::from_integer(1.into()), g).unwrap()
}

/// A rational expression with trigonometric and exponential atoms.
pub fn mixed_expr() -> JetExpr {
    parse_expr("u1^2*sin(u0)/u0 + exp(2*u0)*u2*u3 - cos(u0)^2*u1/(u0^2)").unwrap()
}

/// Sine-Gordon instance, kink sampler on an `n × n` grid and its universal
/// second fundamental form.
pub fn kink_setup(n: usize) -> (FamilyInstance, SolutionSampler, SffSource) {
    let inst = sine_gordon(Rational::from_integer(1.into())).unwrap();
    let h = 0.5 / (n.max(2) - 1) as f64;
    let sampler = sg_kink(1.0, Grid::square(0.25, 0.25, h, n)).unwrap();
    let sff = SffSource::from_jet_exprs(&sg_sff(1).unwrap()).unwrap();
    (inst, sampler, sff)
}
