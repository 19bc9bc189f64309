use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mesh::{discrete_curvature, SurfaceMesh};
use super::sampler::SolutionSampler;
use crate::error::{Error, Result};
use crate::families::FamilyInstance;
use crate::immersion::SecondFundamentalForm;
use crate::jetalg::{CompiledExpr, JetExpr, JetPoint};

type V3 = [f64; 3];

/// Position and orthonormal frame at one point of the surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameState {
    pub r: V3,
    pub e1: V3,
    pub e2: V3,
    pub e3: V3,
}

fn dot(a: &V3, b: &V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl FrameState {
    pub fn identity() -> Self {
        FrameState {
            r: [0.0; 3],
            e1: [1.0, 0.0, 0.0],
            e2: [0.0, 1.0, 0.0],
            e3: [0.0, 0.0, 1.0],
        }
    }

    fn to_array(self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for (k, v) in [self.r, self.e1, self.e2, self.e3].iter().enumerate() {
            out[3 * k..3 * k + 3].copy_from_slice(v);
        }
        out
    }

    fn from_array(a: &[f64; 12]) -> Self {
        let v = |k: usize| [a[3 * k], a[3 * k + 1], a[3 * k + 2]];
        FrameState {
            r: v(0),
            e1: v(1),
            e2: v(2),
            e3: v(3),
        }
    }

    /// `‖G − I‖_max` for the Gram matrix of `(e1, e2, e3)`.
    pub fn gram_drift(&self) -> f64 {
        let e = [self.e1, self.e2, self.e3];
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in i..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(&e[i], &e[j]) - target).abs());
            }
        }
        worst
    }

    /// Gram–Schmidt on `(e1, e2, e3)` in that order.
    pub fn reorthonormalize(&mut self) {
        let unit = |v: V3| {
            let n = dot(&v, &v).sqrt();
            [v[0] / n, v[1] / n, v[2] / n]
        };
        let minus = |v: V3, u: &V3| {
            let k = dot(&v, u);
            [v[0] - k * u[0], v[1] - k * u[1], v[2] - k * u[2]]
        };
        self.e1 = unit(self.e1);
        self.e2 = unit(minus(self.e2, &self.e1));
        self.e3 = unit(minus(minus(self.e3, &self.e1), &self.e2));
    }

    /// Largest componentwise difference to `other`.
    pub fn distance(&self, other: &FrameState) -> f64 {
        let (a, b) = (self.to_array(), other.to_array());
        a.iter().zip(&b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()))
    }
}

/// Where `(a, b, c)` come from: a universal second fundamental form in
/// `(x, t)`, or expressions in the jet such as the sine-Gordon
/// `(−2ε cot u₀, ε, 0)`.
#[derive(Clone, Debug)]
pub enum SffSource {
    Universal(SecondFundamentalForm),
    Jet(Box<[CompiledExpr; 3]>),
}

impl SffSource {
    pub fn constant(a: f64, b: f64, c: f64) -> Self {
        SffSource::Universal(SecondFundamentalForm::constant(a, b, c))
    }

    pub fn from_jet_exprs(abc: &[JetExpr; 3]) -> Result<Self> {
        Ok(SffSource::Jet(Box::new([abc[0].compile()?, abc[1].compile()?, abc[2].compile()?])))
    }

    pub fn eval(&self, p: &JetPoint) -> Result<V3> {
        match self {
            SffSource::Universal(s) => s.eval_xt(p.x, p.t),
            SffSource::Jet(e) => Ok([e[0].eval(p), e[1].eval(p), e[2].eval(p)]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameOptions {
    /// Gram–Schmidt after every step. Off by default so drift stays a
    /// diagnostic of the integration.
    pub reorthonormalize: bool,
    /// Fail when any vertex drifts further than this.
    pub drift_threshold: Option<f64>,
    /// Allowed `|ac − b² + 1|` at the nodes.
    pub gauss_tol: f64,
}

impl Default for FrameOptions {
    fn default() -> Self {
        FrameOptions {
            reorthonormalize: false,
            drift_threshold: Some(1e-6),
            gauss_tol: 1e-8,
        }
    }
}

/// Compiled `f_ij` for one direction plus the `(a, b, c)` source.
struct Coefficients<'a> {
    f: [[CompiledExpr; 2]; 3],
    sff: &'a SffSource,
}

impl Coefficients<'_> {
    /// `[ω₁, ω₂, ω₃, ω₁₃, ω₂₃]` along direction `dir` (0 for x, 1 for t).
    fn at(&self, p: &JetPoint, dir: usize) -> Result<[f64; 5]> {
        let [a, b, c] = self.sff.eval(p)?;
        let (w1, w2, w3) = (self.f[0][dir].eval(p), self.f[1][dir].eval(p), self.f[2][dir].eval(p));
        let out = [w1, w2, w3, a * w1 + b * w2, b * w1 + c * w2];
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite connection coefficients at ({}, {})", p.x, p.t)));
        }
        Ok(out)
    }
}

/// `dr = ω₁e₁ + ω₂e₂`, `de₁ = ω₃e₂ + ω₁₃e₃`, `de₂ = −ω₃e₁ + ω₂₃e₃`,
/// `de₃ = −ω₁₃e₁ − ω₂₃e₂`.
fn rhs(w: &[f64; 5], y: &[f64; 12]) -> [f64; 12] {
    let [w1, w2, w3, w13, w23] = *w;
    let mut out = [0.0; 12];
    for k in 0..3 {
        let (e1, e2, e3) = (y[3 + k], y[6 + k], y[9 + k]);
        out[k] = w1 * e1 + w2 * e2;
        out[3 + k] = w3 * e2 + w13 * e3;
        out[6 + k] = -w3 * e1 + w23 * e3;
        out[9 + k] = -w13 * e1 - w23 * e2;
    }
    out
}

fn rk4(s: &FrameState, h: f64, w: [&[f64; 5]; 3], reortho: bool) -> FrameState {
    let y = s.to_array();
    let add = |k: &[f64; 12], f: f64| {
        let mut o = y;
        for i in 0..12 {
            o[i] += f * k[i];
        }
        o
    };
    let k1 = rhs(w[0], &y);
    let k2 = rhs(w[1], &add(&k1, h / 2.0));
    let k3 = rhs(w[1], &add(&k2, h / 2.0));
    let k4 = rhs(w[2], &add(&k3, h));
    let mut out = y;
    for i in 0..12 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    let mut next = FrameState::from_array(&out);
    if reortho {
        next.reorthonormalize();
    }
    next
}

/// Integrate along a line of `n` nodes from `start`. `point(k)` is the
/// `(x, t)` at parameter `k` (fractional for midpoints), `h` the step.
fn sweep(
    co: &Coefficients,
    sampler: &SolutionSampler,
    start: FrameState,
    n: usize,
    h: f64,
    dir: usize,
    point: impl Fn(f64) -> (f64, f64),
    reortho: bool,
) -> Result<Vec<FrameState>> {
    let coef = |k: f64| {
        let (x, t) = point(k);
        co.at(&sampler.jet_at(x, t)?, dir)
    };
    let mut out = Vec::with_capacity(n);
    out.push(start);
    let mut w0 = coef(0.0)?;
    for k in 1..n {
        let wm = coef(k as f64 - 0.5)?;
        let w1 = coef(k as f64)?;
        let next = rk4(&out[k - 1], h, [&w0, &wm, &w1], reortho);
        if next.to_array().iter().any(|v| !v.is_finite()) {
            let (x, t) = point(k as f64);
            return Err(Error::Numeric(format!("frame became non-finite at ({x}, {t})")));
        }
        out.push(next);
        w0 = w1;
    }
    Ok(out)
}

/// Reconstruct the immersion over the sampler's grid.
///
/// The frame starts at the identity at the grid origin, is carried along
/// `t = t₀` in `x`, then up every `x = const` line in `t` (lines run in
/// parallel). The path-commutation defect compares the far corner with the
/// opposite path order.
pub fn integrate_frame(
    sampler: &SolutionSampler,
    inst: &FamilyInstance,
    sff: &SffSource,
    opts: &FrameOptions,
) -> Result<SurfaceMesh> {
    let g = sampler.grid;
    let f = |i, j| inst.f(i, j).compile();
    let co = Coefficients {
        f: [[f(1, 1)?, f(1, 2)?], [f(2, 1)?, f(2, 2)?], [f(3, 1)?, f(3, 2)?]],
        sff,
    };
    let mut abc = Vec::with_capacity(g.len());
    for i in 0..g.nx {
        for j in 0..g.nt {
            let v = sff.eval(&sampler.jet(i, j))?;
            let gauss = v[0] * v[2] - v[1] * v[1] + 1.0;
            if !(gauss.abs() <= opts.gauss_tol) {
                return Err(Error::Validation(format!(
                    "Gauss equation ac − b² = −1 fails by {gauss:e} at node ({i}, {j})"
                )));
            }
            abc.push(v);
        }
    }
    let reortho = opts.reorthonormalize;
    let base = sweep(&co, sampler, FrameState::identity(), g.nx, g.hx, 0, |k| (g.x0 + k * g.hx, g.t0), reortho)?;
    let columns: Vec<Vec<FrameState>> = base
        .par_iter()
        .enumerate()
        .map(|(i, s)| sweep(&co, sampler, *s, g.nt, g.ht, 1, |k| (g.x(i), g.t0 + k * g.ht), reortho))
        .collect::<Result<_>>()?;
    let frames: Vec<FrameState> = columns.into_iter().flatten().collect();
    let t_end = g.t(g.nt - 1);
    let top_left = frames[g.index(0, g.nt - 1)];
    let other = sweep(&co, sampler, top_left, g.nx, g.hx, 0, |k| (g.x0 + k * g.hx, t_end), reortho)?;
    let commutation_defect = other.last().unwrap().distance(&frames[g.index(g.nx - 1, g.nt - 1)]);
    let drift: Vec<f64> = frames.iter().map(FrameState::gram_drift).collect();
    if let Some(limit) = opts.drift_threshold {
        if let Some((k, d)) = drift.iter().enumerate().find(|(_, d)| !(**d <= limit)) {
            let (i, j) = (k / g.nt, k % g.nt);
            return Err(Error::Numeric(format!(
                "frame drift {d:e} exceeds {limit:e} at node ({i}, {j}) = ({}, {})",
                g.x(i),
                g.t(j)
            )));
        }
    }
    let mut mesh = SurfaceMesh {
        grid: g,
        frames,
        abc,
        drift,
        curvature: vec![f64::NAN; g.len()],
        commutation_defect,
    };
    if g.nx >= 3 && g.nt >= 3 {
        mesh.curvature = discrete_curvature(&mesh)?;
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bonnet::{sg_kink, Grid};
    use crate::families::{sg_sff, sine_gordon};
    use crate::Rational;

    fn sg_mesh(n: usize, h: f64) -> SurfaceMesh {
        let inst = sine_gordon(Rational::from_integer(1.into())).unwrap();
        let sampler = sg_kink(1.0, Grid::square(0.25, 0.25, h, n)).unwrap();
        let sff = SffSource::from_jet_exprs(&sg_sff(1).unwrap()).unwrap();
        let opts = FrameOptions {
            drift_threshold: None,
            ..FrameOptions::default()
        };
        integrate_frame(&sampler, &inst, &sff, &opts).unwrap()
    }

    #[test]
    fn drift_refines_at_fourth_order() {
        let coarse = sg_mesh(11, 0.1).max_drift();
        let fine = sg_mesh(21, 0.05).max_drift();
        assert!(fine * 16.0 < coarse, "{coarse:e} -> {fine:e}");
    }

    #[test]
    fn constant_b_is_not_compatible_with_sine_gordon() {
        // (0, 1, 0) passes Gauss but not Codazzi: the defect does not refine away.
        let inst = sine_gordon(Rational::from_integer(1.into())).unwrap();
        let opts = FrameOptions {
            drift_threshold: None,
            ..FrameOptions::default()
        };
        let sampler = sg_kink(1.0, Grid::square(0.25, 0.25, 0.05, 21)).unwrap();
        let m = integrate_frame(&sampler, &inst, &SffSource::constant(0.0, 1.0, 0.0), &opts).unwrap();
        assert!(m.commutation_defect > 0.5, "{}", m.commutation_defect);
    }

    #[test]
    fn single_node_is_identity() {
        let m = sg_mesh(1, 0.01);
        assert_eq!(m.frames, vec![FrameState::identity()]);
        assert_eq!(m.commutation_defect, 0.0);
    }

    #[test]
    fn violated_gauss_is_rejected() {
        let inst = sine_gordon(Rational::from_integer(1.into())).unwrap();
        let sampler = sg_kink(1.0, Grid::square(0.25, 0.25, 0.1, 3)).unwrap();
        let err = integrate_frame(&sampler, &inst, &SffSource::constant(0.0, 0.0, 0.0), &FrameOptions::default());
        assert!(matches!(err, Err(Error::Validation(_))), "{err:?}");
    }

    #[test]
    fn commutation_defect_shrinks() {
        let coarse = sg_mesh(11, 0.1).commutation_defect;
        let fine = sg_mesh(21, 0.05).commutation_defect;
        assert!(fine < coarse / 8.0, "{coarse:e} -> {fine:e}");
    }

    #[test]
    fn edge_lengths_follow_first_form() {
        // |r_x| = √(f₁₁² + f₂₁²) = η and |r_t| = 1/η for sine-Gordon.
        let h = 0.01;
        let m = sg_mesh(11, h);
        let g = m.grid;
        for i in 0..g.nx - 1 {
            for j in 0..g.nt - 1 {
                let len = |a: V3, b: V3| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
                let (p, qx, qt) = (m.frames[g.index(i, j)].r, m.frames[g.index(i + 1, j)].r, m.frames[g.index(i, j + 1)].r);
                assert!((len(p, qx) - h).abs() < 1e-4 * h, "x edge at ({i}, {j})");
                assert!((len(p, qt) - h).abs() < 1e-4 * h, "t edge at ({i}, {j})");
            }
        }
    }

    #[test]
    fn reorthonormalize_keeps_drift_at_rounding() {
        let inst = sine_gordon(Rational::from_integer(1.into())).unwrap();
        let sampler = sg_kink(1.0, Grid::square(0.25, 0.25, 0.05, 21)).unwrap();
        let sff = SffSource::from_jet_exprs(&sg_sff(-1).unwrap()).unwrap();
        let opts = FrameOptions {
            reorthonormalize: true,
            ..FrameOptions::default()
        };
        let m = integrate_frame(&sampler, &inst, &sff, &opts).unwrap();
        assert!(m.max_drift() < 1e-13, "{}", m.max_drift());
    }
}
