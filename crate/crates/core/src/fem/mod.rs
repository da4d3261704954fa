//! P1 finite elements on 2D triangulations: meshes with tagged boundaries,
//! assembly of the weak-form operators on the free dofs, and estimates of the
//! spectral constants relative to the H¹ Gram matrix.

mod assembly;
mod mesh;
mod spectral;

use thiserror::Error;

pub use assembly::{
    assemble, assemble_global, element_isotropic, element_laplacian, element_mass, linear_combination,
    p1_gradients, quadratic_form, spmv, spmv_into, AssembledOperators, ContactMap, GlobalOperators, Lame,
    MaterialParams,
};
pub use mesh::{
    build_mesh_rect, triangle_area, BoundaryEdge, BoundaryTag, ContactGeometry, ContactNode, MeshModel, SideTags,
};
pub use spectral::{
    estimate_operator_bounds, estimate_operator_bounds_with, estimate_trace_norm, estimate_trace_norm_with,
    dense_pencil_eigenvalues, pencil_max_eigenvalue, OperatorBounds, SpectralConfig,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("triangle {triangle} is singular or inverted (area {area})")]
    SingularElement { triangle: usize, area: f64 },
    #[error("invalid material parameter `{key}`: {reason}")]
    InvalidMaterial { key: &'static str, reason: String },
    #[error("matrix `{0}` is not positive definite on the free dofs")]
    NotPositiveDefinite(&'static str),
    #[error("eigenvalue iteration for {pencil} did not converge in {steps} steps (residual {residual:e})")]
    EigenNotConverged { pencil: &'static str, steps: usize, residual: f64 },
}
