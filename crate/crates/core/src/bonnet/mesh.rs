use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::frame::FrameState;
use super::sampler::Grid;
use crate::error::{Error, Result};

/// Reconstructed surface over a grid, with per-vertex diagnostics.
/// Boundary vertices carry `NaN` curvature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub grid: Grid,
    pub frames: Vec<FrameState>,
    pub abc: Vec<[f64; 3]>,
    pub drift: Vec<f64>,
    pub curvature: Vec<f64>,
    /// Far-corner difference between the x-then-t and t-then-x paths.
    pub commutation_defect: f64,
}

impl SurfaceMesh {
    /// A mesh from bare positions, for testing curvature on synthetic input.
    pub fn from_positions(grid: Grid, positions: &[[f64; 3]]) -> Result<Self> {
        if positions.len() != grid.len() {
            return Err(Error::Validation(format!("{} positions for a {}×{} grid", positions.len(), grid.nx, grid.nt)));
        }
        let frames = positions
            .iter()
            .map(|&r| FrameState {
                r,
                ..FrameState::identity()
            })
            .collect();
        let mut mesh = SurfaceMesh {
            grid,
            frames,
            abc: vec![[0.0; 3]; grid.len()],
            drift: vec![0.0; grid.len()],
            curvature: vec![f64::NAN; grid.len()],
            commutation_defect: 0.0,
        };
        if grid.nx >= 3 && grid.nt >= 3 {
            mesh.curvature = discrete_curvature(&mesh)?;
        }
        Ok(mesh)
    }

    pub fn vertex(&self, i: usize, j: usize) -> [f64; 3] {
        self.frames[self.grid.index(i, j)].r
    }

    pub fn max_drift(&self) -> f64 {
        self.drift.iter().fold(0.0, |m: f64, d| m.max(*d))
    }

    /// Curvature at vertices with a full 1-ring.
    pub fn interior_curvature(&self) -> Vec<f64> {
        let g = &self.grid;
        (1..g.nx.saturating_sub(1))
            .flat_map(|i| (1..g.nt.saturating_sub(1)).map(move |j| (i, j)))
            .map(|(i, j)| self.curvature[g.index(i, j)])
            .collect()
    }

    /// Triangles as vertex indices; each cell is split along `(i,j)→(i+1,j+1)`.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let g = &self.grid;
        let mut out = Vec::with_capacity(2 * g.nx.saturating_sub(1) * g.nt.saturating_sub(1));
        for i in 0..g.nx.saturating_sub(1) {
            for j in 0..g.nt.saturating_sub(1) {
                let (a, b, c, d) = (g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1), g.index(i, j + 1));
                out.push([a, b, c]);
                out.push([a, c, d]);
            }
        }
        out
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Angle-deficit Gaussian curvature: `(2π − Σθ) / (A/3)` with `A` the total
/// area of the incident triangles. Boundary vertices get `NaN`.
pub fn discrete_curvature(mesh: &SurfaceMesh) -> Result<Vec<f64>> {
    let g = &mesh.grid;
    let n = g.len();
    let mut angle = vec![0.0; n];
    let mut area = vec![0.0; n];
    for tri in mesh.triangles() {
        let p = tri.map(|k| mesh.frames[k].r);
        let a = 0.5 * norm(cross(sub(p[1], p[0]), sub(p[2], p[0])));
        let scale = norm(sub(p[1], p[0])).max(norm(sub(p[2], p[0])));
        if !(a > 1e-14 * scale * scale) {
            let (i, j) = (tri[0] / g.nt, tri[0] % g.nt);
            return Err(Error::Numeric(format!("degenerate triangle at cell ({i}, {j})")));
        }
        for k in 0..3 {
            let (u, v) = (sub(p[(k + 1) % 3], p[k]), sub(p[(k + 2) % 3], p[k]));
            // atan2 of |u×v| and u·v stays accurate for thin triangles.
            let dotp = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
            angle[tri[k]] += norm(cross(u, v)).atan2(dotp);
            area[tri[k]] += a;
        }
    }
    let mut k = vec![f64::NAN; n];
    for i in 1..g.nx.saturating_sub(1) {
        for j in 1..g.nt.saturating_sub(1) {
            let v = g.index(i, j);
            k[v] = (2.0 * PI - angle[v]) / (area[v] / 3.0);
        }
    }
    Ok(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Obj,
    Csv,
}

impl std::str::FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "obj" => Ok(MeshFormat::Obj),
            "csv" => Ok(MeshFormat::Csv),
            _ => Err(Error::Validation(format!("unknown mesh format `{s}`; expected obj or csv"))),
        }
    }
}

/// `v x y z` lines followed by 1-based `f i j k` lines.
pub fn mesh_obj(mesh: &SurfaceMesh) -> String {
    let mut s = String::new();
    for f in &mesh.frames {
        let _ = writeln!(s, "v {:.12e} {:.12e} {:.12e}", f.r[0], f.r[1], f.r[2]);
    }
    for [a, b, c] in mesh.triangles() {
        let _ = writeln!(s, "f {} {} {}", a + 1, b + 1, c + 1);
    }
    s
}

pub const CSV_HEADER: &str = "x,t,rx,ry,rz,a,b,c,K,drift";

/// One row per vertex in the OBJ's vertex order.
pub fn mesh_csv(mesh: &SurfaceMesh) -> String {
    let g = &mesh.grid;
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for i in 0..g.nx {
        for j in 0..g.nt {
            let k = g.index(i, j);
            let r = mesh.frames[k].r;
            let [a, b, c] = mesh.abc[k];
            let _ = writeln!(
                s,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.6e}",
                g.x(i),
                g.t(j),
                r[0],
                r[1],
                r[2],
                a,
                b,
                c,
                mesh.curvature[k],
                mesh.drift[k]
            );
        }
    }
    s
}

/// Write the mesh to `path` in `format`.
pub fn export_mesh(mesh: &SurfaceMesh, format: MeshFormat, path: &Path) -> std::io::Result<()> {
    let text = match format {
        MeshFormat::Obj => mesh_obj(mesh),
        MeshFormat::Csv => mesh_csv(mesh),
    };
    std::fs::write(path, text)
}
