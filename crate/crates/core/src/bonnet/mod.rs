//! Concrete solutions, frame reconstruction and meshes.
//!
//! A [`SolutionSampler`] supplies jets on a grid, [`integrate_frame`] carries
//! the moving frame across it with RK4, and the resulting [`SurfaceMesh`]
//! reports orthonormality drift, path-commutation defect and angle-deficit
//! curvature.

mod frame;
mod mesh;
mod sampler;

pub use frame::{integrate_frame, FrameOptions, FrameState, SffSource};
pub use mesh::{discrete_curvature, export_mesh, mesh_csv, mesh_obj, MeshFormat, SurfaceMesh, CSV_HEADER};
pub use sampler::{sg_kink, traveling_wave, Grid, NodeJet, Provenance, SolutionSampler};
