use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::FamilyInstance;
use crate::jetalg::{CompiledExpr, JetPoint, PdeKind, PdeSpec};
use crate::ode::{dopri5, OdeOptions, Stop, Trajectory};

/// Rectangular `(x, t)` lattice; node `(i, j)` sits at `(x0 + i·hx, t0 + j·ht)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub t0: f64,
    pub hx: f64,
    pub ht: f64,
    pub nx: usize,
    pub nt: usize,
}

impl Grid {
    /// `n × n` nodes with spacing `h` in both directions.
    pub fn square(x0: f64, t0: f64, h: f64, n: usize) -> Grid {
        Grid {
            x0,
            t0,
            hx: h,
            ht: h,
            nx: n,
            nt: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.nt == 0 {
            return Err(Error::Validation("grid needs at least one node per direction".into()));
        }
        if !(self.hx > 0.0 && self.ht > 0.0) || !self.x0.is_finite() || !self.t0.is_finite() {
            return Err(Error::Validation("grid spacings must be positive and the origin finite".into()));
        }
        Ok(())
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.ht
    }

    pub fn len(&self) -> usize {
        self.nx * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major in `i`: all of column `i` is contiguous.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nt + j
    }
}

/// Jet values at one node: `u₀..u₃` and `u_{0,t}, u_{1,t}, u_{2,t}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeJet {
    pub u: [f64; 4],
    pub u_t: [f64; 3],
}

impl NodeJet {
    pub fn to_point(&self, x: f64, t: f64) -> JetPoint {
        let mut p = JetPoint {
            x,
            t,
            ..JetPoint::default()
        };
        p.u[..4].copy_from_slice(&self.u);
        p.w[0] = self.u[0];
        p.w[1] = self.u_t[0];
        p.v[0] = self.u[1];
        p.v[1] = self.u_t[1];
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    TravelingWave { c: f64 },
    SgKink { a: f64 },
    Tabulated,
}

/// Off-node evaluation, needed for the RK4 midpoints.
#[derive(Clone, Debug)]
enum Source {
    Kink { a: f64 },
    Wave(Box<Wave>),
    Tabulated,
}

#[derive(Clone, Debug)]
struct Wave {
    c: f64,
    lambda: f64,
    g: CompiledExpr,
    xi0: f64,
    fwd: Trajectory,
    bwd: Trajectory,
}

impl Wave {
    fn third(&self, y: &[f64]) -> Option<f64> {
        let den = self.c - self.lambda * y[0] * y[0];
        let mut p = JetPoint::default();
        p.u[..3].copy_from_slice(&y[..3]);
        let v = (self.c * y[1] + self.g.eval(&p)) / den;
        v.is_finite().then_some(v)
    }

    fn node(&self, xi: f64) -> Result<NodeJet> {
        let tr = if xi >= self.xi0 { &self.fwd } else { &self.bwd };
        let y = tr
            .eval(xi)
            .ok_or_else(|| Error::Domain(format!("ξ = {xi} lies outside the integrated profile")))?;
        let u3 = self.third(&y).ok_or_else(|| Error::Numeric(format!("profile ODE undefined at ξ = {xi}")))?;
        let c = self.c;
        Ok(NodeJet {
            u: [y[0], y[1], y[2], u3],
            u_t: [-c * y[1], -c * y[2], -c * u3],
        })
    }
}

/// Jets of `u = 4·arctan(e^ξ)`, `ξ = ax + t/a`.
fn kink_node(a: f64, x: f64, t: f64) -> NodeJet {
    let xi = a * x + t / a;
    let s = 1.0 / xi.cosh();
    let th = xi.tanh();
    // Profile derivatives in ξ; u_k picks up a^k, ∂_t picks up 1/a.
    let d = [4.0 * xi.exp().atan(), 2.0 * s, -2.0 * s * th, 2.0 * s * th * th - 2.0 * s * s * s];
    NodeJet {
        u: [d[0], a * d[1], a * a * d[2], a * a * a * d[3]],
        u_t: [d[1] / a, d[2], a * d[3]],
    }
}

/// A numeric solution of the family's PDE sampled on a grid.
#[derive(Clone, Debug)]
pub struct SolutionSampler {
    pub grid: Grid,
    pub provenance: Provenance,
    /// Largest PDE residual over the nodes, checked at construction.
    pub max_residual: f64,
    nodes: Vec<NodeJet>,
    source: Source,
}

/// `|u_{0,t} − u_{2,t} − F|` or `|u_{1,t} − sin u₀|`.
fn pde_residual(pde: &PdeSpec, f: &CompiledExpr, n: &NodeJet) -> f64 {
    let mut p = JetPoint::default();
    p.u[..4].copy_from_slice(&n.u);
    match pde.kind() {
        PdeKind::ThirdOrder { .. } => (n.u_t[0] - n.u_t[2] - f.eval(&p)).abs(),
        PdeKind::SineGordon => (n.u_t[1] - f.eval(&p)).abs(),
    }
}

fn max_residual(pde: &PdeSpec, nodes: &[NodeJet], tol: f64) -> Result<f64> {
    let f = pde.f().compile()?;
    let mut worst = 0.0f64;
    for (k, n) in nodes.iter().enumerate() {
        let r = pde_residual(pde, &f, n);
        if !(r <= tol) {
            return Err(Error::Numeric(format!("PDE residual {r:e} exceeds {tol:e} at node {k}")));
        }
        worst = worst.max(r);
    }
    Ok(worst)
}

impl SolutionSampler {
    /// Accept tabulated node jets after checking them against `pde`.
    ///
    /// Off-node jets are bilinear interpolants, so frame integration over a
    /// tabulated sampler is only second-order accurate.
    pub fn tabulated(grid: Grid, nodes: Vec<NodeJet>, pde: &PdeSpec, tol: f64) -> Result<Self> {
        grid.validate()?;
        if nodes.len() != grid.len() {
            return Err(Error::Validation(format!("{} node jets for a {}×{} grid", nodes.len(), grid.nx, grid.nt)));
        }
        let max_residual = max_residual(pde, &nodes, tol)?;
        Ok(SolutionSampler {
            grid,
            provenance: Provenance::Tabulated,
            max_residual,
            nodes,
            source: Source::Tabulated,
        })
    }

    pub fn node(&self, i: usize, j: usize) -> &NodeJet {
        &self.nodes[self.grid.index(i, j)]
    }

    pub fn jet(&self, i: usize, j: usize) -> JetPoint {
        self.node(i, j).to_point(self.grid.x(i), self.grid.t(j))
    }

    /// Jet at an arbitrary point of the grid rectangle.
    pub fn jet_at(&self, x: f64, t: f64) -> Result<JetPoint> {
        let n = match &self.source {
            Source::Kink { a } => kink_node(*a, x, t),
            Source::Wave(w) => w.node(x - w.c * t)?,
            Source::Tabulated => self.interpolate(x, t)?,
        };
        Ok(n.to_point(x, t))
    }

    fn interpolate(&self, x: f64, t: f64) -> Result<NodeJet> {
        let g = &self.grid;
        let locate = |s: f64, n: usize| -> Result<(usize, f64)> {
            if !(-1e-9..=(n - 1) as f64 + 1e-9).contains(&s) {
                return Err(Error::Domain(format!("({x}, {t}) lies outside the tabulated grid")));
            }
            let k = (s.floor().max(0.0) as usize).min(n.saturating_sub(2));
            Ok((k, if n == 1 { 0.0 } else { s - k as f64 }))
        };
        let (i, fx) = locate((x - g.x0) / g.hx, g.nx)?;
        let (j, ft) = locate((t - g.t0) / g.ht, g.nt)?;
        let at = |di: usize, dj: usize| self.node((i + di).min(g.nx - 1), (j + dj).min(g.nt - 1));
        let w = [(1.0 - fx) * (1.0 - ft), fx * (1.0 - ft), (1.0 - fx) * ft, fx * ft];
        let corners = [at(0, 0), at(1, 0), at(0, 1), at(1, 1)];
        let mut out = NodeJet::default();
        for (wk, c) in w.iter().zip(corners) {
            for k in 0..4 {
                out.u[k] += wk * c.u[k];
            }
            for k in 0..3 {
                out.u_t[k] += wk * c.u_t[k];
            }
        }
        Ok(out)
    }
}

/// The sine-Gordon kink `u = 4·arctan(e^{ax+t/a})` on `grid`, validated
/// against `u_{xt} = sin u` to 1e-10 at every node.
pub fn sg_kink(a: f64, grid: Grid) -> Result<SolutionSampler> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::Validation("the kink parameter a must be finite and nonzero".into()));
    }
    grid.validate()?;
    let nodes: Vec<NodeJet> = (0..grid.nx)
        .flat_map(|i| (0..grid.nt).map(move |j| kink_node(a, grid.x(i), grid.t(j))))
        .collect();
    let max_residual = max_residual(&PdeSpec::sine_gordon(), &nodes, 1e-10)?;
    Ok(SolutionSampler {
        grid,
        provenance: Provenance::SgKink { a },
        max_residual,
        nodes,
        source: Source::Kink { a },
    })
}

/// Traveling wave `u = U(x − ct)` of a third-order family.
///
/// The reduced equation `(c − λU²)U‴ = cU′ + G(U, U′, U″)` is integrated
/// from `xi0` with `initial = (U, U′, U″)` in both directions far enough to
/// cover the grid, then sampled. Nodes are checked against the PDE to 1e-8.
pub fn traveling_wave(
    inst: &FamilyInstance,
    c: f64,
    xi0: f64,
    initial: [f64; 3],
    grid: Grid,
    opts: &OdeOptions,
) -> Result<SolutionSampler> {
    grid.validate()?;
    let pde = &inst.pde;
    let (lambda, g) = match pde.kind() {
        PdeKind::ThirdOrder { lambda, g } => (lambda.to_f64().unwrap_or(f64::NAN), g.compile()?),
        PdeKind::SineGordon => return Err(Error::Validation("traveling waves need a third-order family".into())),
    };
    if !c.is_finite() || initial.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("wave speed and initial data must be finite".into()));
    }
    let gap = |u: f64| (c - lambda * u * u).abs();
    let floor = 1e-8 * c.abs().max(1.0);
    if gap(initial[0]) < floor {
        return Err(Error::Validation(format!(
            "c − λU² = {:e} at the initial point; the reduced ODE is singular there",
            c - lambda * initial[0] * initial[0]
        )));
    }
    let corners = [
        grid.x(0) - c * grid.t(0),
        grid.x(grid.nx - 1) - c * grid.t(0),
        grid.x(0) - c * grid.t(grid.nt - 1),
        grid.x(grid.nx - 1) - c * grid.t(grid.nt - 1),
    ];
    let lo = corners.iter().copied().fold(xi0, f64::min);
    let hi = corners.iter().copied().fold(xi0, f64::max);
    let mut wave = Wave {
        c,
        lambda,
        g,
        xi0,
        fwd: empty_trajectory(xi0, &initial),
        bwd: empty_trajectory(xi0, &initial),
    };
    let field = |_: f64, y: &[f64]| wave.third(y).map(|u3| vec![y[1], y[2], u3]);
    let guard = |_: f64, y: &[f64]| (gap(y[0]) < floor).then(|| "coefficient c − λU² crossed zero".to_string());
    let fwd = dopri5(field, xi0, &initial, hi, opts, guard)?;
    let bwd = dopri5(field, xi0, &initial, lo, opts, guard)?;
    for tr in [&fwd, &bwd] {
        match &tr.stop {
            Stop::Completed => {}
            Stop::Guard { t, reason } => return Err(Error::Numeric(format!("{reason} at ξ = {t}"))),
            Stop::StepFailure { t, reason } => return Err(Error::Numeric(format!("profile ODE failed at ξ = {t}: {reason}"))),
        }
    }
    wave.fwd = fwd;
    wave.bwd = bwd;
    let nodes = (0..grid.nx)
        .flat_map(|i| (0..grid.nt).map(move |j| (i, j)))
        .map(|(i, j)| wave.node(grid.x(i) - c * grid.t(j)))
        .collect::<Result<Vec<_>>>()?;
    let max_residual = max_residual(pde, &nodes, 1e-8)?;
    Ok(SolutionSampler {
        grid,
        provenance: Provenance::TravelingWave { c },
        max_residual,
        nodes,
        source: Source::Wave(Box::new(wave)),
    })
}

fn empty_trajectory(t0: f64, y0: &[f64]) -> Trajectory {
    Trajectory {
        ts: vec![t0],
        ys: vec![y0.to_vec()],
        dys: vec![vec![0.0; y0.len()]],
        dense: Vec::new(),
        stop: Stop::Completed,
        rejected: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{build_family, match_generalized_ch};
    use std::f64::consts::PI;

    #[test]
    fn kink_value_at_origin() {
        let s = sg_kink(1.0, Grid::square(0.0, 0.0, 0.01, 3)).unwrap();
        assert!((s.node(0, 0).u[0] - PI).abs() < 1e-15);
        assert!(s.max_residual <= 1e-10);
    }

    #[test]
    fn kink_residual_on_full_grid() {
        for a in [1.0, -0.7, 2.5] {
            let s = sg_kink(a, Grid::square(-0.5, -0.5, 0.01, 101)).unwrap();
            assert!(s.max_residual <= 1e-10, "{a}: {}", s.max_residual);
        }
        assert!(sg_kink(0.0, Grid::square(0.0, 0.0, 0.1, 2)).is_err());
    }

    #[test]
    fn kink_off_node_matches_node() {
        let s = sg_kink(1.3, Grid::square(0.0, 0.0, 0.1, 4)).unwrap();
        let p = s.jet_at(s.grid.x(2), s.grid.t(1)).unwrap();
        assert_eq!(p, s.jet(2, 1));
    }

    fn ch() -> FamilyInstance {
        build_family(match_generalized_ch().unwrap().params).unwrap()
    }

    #[test]
    fn ch_wave_residual() {
        let s = traveling_wave(&ch(), 2.0, 0.0, [0.1, 0.05, 0.0], Grid::square(0.0, 0.0, 0.05, 21), &OdeOptions::default()).unwrap();
        assert!(s.max_residual <= 1e-8, "{}", s.max_residual);
        // u is constant along x − ct.
        let a = s.jet_at(0.5, 0.1).unwrap().u[0];
        let b = s.jet_at(0.7, 0.2).unwrap().u[0];
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn zero_wave_is_exact() {
        let s = traveling_wave(&ch(), 2.0, 0.0, [0.0; 3], Grid::square(0.0, 0.0, 0.1, 5), &OdeOptions::default()).unwrap();
        assert_eq!(s.max_residual, 0.0);
    }

    #[test]
    fn singular_speed_is_rejected() {
        let err = traveling_wave(&ch(), 0.25, 0.0, [0.5, 0.0, 0.0], Grid::square(0.0, 0.0, 0.1, 3), &OdeOptions::default());
        assert!(matches!(err, Err(Error::Validation(_))), "{err:?}");
    }

    #[test]
    fn tabulated_checks_the_pde() {
        let pde = PdeSpec::sine_gordon();
        let grid = Grid::square(0.0, 0.0, 0.5, 2);
        let good = vec![NodeJet::default(); 4];
        let s = SolutionSampler::tabulated(grid, good, &pde, 1e-12).unwrap();
        assert_eq!(s.jet_at(0.25, 0.25).unwrap().u[0], 0.0);
        let mut bad = vec![NodeJet::default(); 4];
        bad[3].u[0] = 1.0;
        assert!(SolutionSampler::tabulated(grid, bad, &pde, 1e-12).is_err());
    }
}
