use std::collections::BTreeMap;

use nalgebra_sparse::CsrMatrix;
use serde::{Deserialize, Serialize};

use super::mesh::{triangle_area, MeshModel};
use super::FemError;

/// Lamé pair `(λ, μ)` of an isotropic fourth-order tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lame {
    pub lambda: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    /// Mass density (kg/m³).
    pub rho: f64,
    /// Viscosity tensor (Pa·s).
    pub viscosity: Lame,
    /// Elasticity tensor (Pa).
    pub elasticity: Lame,
}

impl MaterialParams {
    pub fn validate(&self) -> Result<(), FemError> {
        let bad = |key: &'static str, value: f64, rule: &str| {
            Err(FemError::InvalidMaterial { key, reason: format!("must be {rule}, got {value}") })
        };
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return bad("rho", self.rho, "> 0");
        }
        let pairs = [
            (("viscosity.mu", "viscosity.lambda"), self.viscosity),
            (("elasticity.mu", "elasticity.lambda"), self.elasticity),
        ];
        for ((mu_key, lambda_key), lame) in pairs {
            if !(lame.mu > 0.0) || !lame.mu.is_finite() {
                return bad(mu_key, lame.mu, "> 0");
            }
            if !(lame.lambda >= 0.0) || !lame.lambda.is_finite() {
                return bad(lambda_key, lame.lambda, ">= 0");
            }
        }
        Ok(())
    }
}

/// Gradients of the barycentric coordinates and area of a triangle.
pub fn p1_gradients(p: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let area = triangle_area(p[0], p[1], p[2]);
    let s = 1.0 / (2.0 * area);
    let grads = [
        [(p[1][1] - p[2][1]) * s, (p[2][0] - p[1][0]) * s],
        [(p[2][1] - p[0][1]) * s, (p[0][0] - p[2][0]) * s],
        [(p[0][1] - p[1][1]) * s, (p[1][0] - p[0][0]) * s],
    ];
    (grads, area)
}

/// 6×6 element matrix for `∫ λ div u div v + 2μ ε(u):ε(v)`, local dof
/// `2·node + component`. Only the upper triangle is computed and mirrored so
/// the result is exactly symmetric.
pub fn element_isotropic(p: [[f64; 2]; 3], lame: Lame) -> [[f64; 6]; 6] {
    let (g, area) = p1_gradients(p);
    let mut k = [[0.0; 6]; 6];
    for r in 0..6 {
        for s in r..6 {
            let (i, c) = (r / 2, r % 2);
            let (j, d) = (s / 2, s % 2);
            let dot = g[i][0] * g[j][0] + g[i][1] * g[j][1];
            let delta = if c == d { dot } else { 0.0 };
            let value = lame.lambda * g[i][c] * g[j][d] + lame.mu * (delta + g[i][d] * g[j][c]);
            k[r][s] = area * value;
            k[s][r] = k[r][s];
        }
    }
    k
}

/// Consistent P1 mass, `ρ·area/12·(1 + δ_ij)` per component.
pub fn element_mass(p: [[f64; 2]; 3], rho: f64) -> [[f64; 6]; 6] {
    let area = triangle_area(p[0], p[1], p[2]);
    let mut m = [[0.0; 6]; 6];
    for r in 0..6 {
        for s in 0..6 {
            if r % 2 == s % 2 {
                m[r][s] = rho * area / 12.0 * if r / 2 == s / 2 { 2.0 } else { 1.0 };
            }
        }
    }
    m
}

/// Component-wise scalar Laplacian `∫ ∇u_c·∇v_c`.
pub fn element_laplacian(p: [[f64; 2]; 3]) -> [[f64; 6]; 6] {
    let (g, area) = p1_gradients(p);
    let mut k = [[0.0; 6]; 6];
    for r in 0..6 {
        for s in 0..6 {
            if r % 2 == s % 2 {
                let (i, j) = (r / 2, s / 2);
                k[r][s] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            }
        }
    }
    k
}

/// Row-wise accumulator producing a CSR matrix with sorted columns.
struct Accumulator {
    rows: Vec<BTreeMap<usize, f64>>,
    ncols: usize,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Self { rows: vec![BTreeMap::new(); n], ncols: n }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        *self.rows[i].entry(j).or_insert(0.0) += v;
    }

    fn finish(self) -> CsrMatrix<f64> {
        let mut offsets = Vec::with_capacity(self.rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for row in &self.rows {
            for (&j, &v) in row {
                cols.push(j);
                vals.push(v);
            }
            offsets.push(cols.len());
        }
        CsrMatrix::try_from_csr_data(self.rows.len(), self.ncols, offsets, cols, vals)
            .expect("accumulator produces valid CSR data")
    }
}

/// Matrices over all `2·n_vertices` dofs (global dof `2·vertex + component`),
/// before any constraint is applied.
#[derive(Debug, Clone)]
pub struct GlobalOperators {
    pub mass: CsrMatrix<f64>,
    pub viscosity: CsrMatrix<f64>,
    pub elasticity: CsrMatrix<f64>,
    pub gram: CsrMatrix<f64>,
}

fn element_points(mesh: &MeshModel, t: usize) -> Result<[[f64; 2]; 3], FemError> {
    let tri = mesh.triangles()[t];
    let v = mesh.vertices();
    let p = [v[tri[0]], v[tri[1]], v[tri[2]]];
    let area = triangle_area(p[0], p[1], p[2]);
    if !(area > 0.0) || !area.is_finite() {
        return Err(FemError::SingularElement { triangle: t, area });
    }
    Ok(p)
}

fn assemble_into<F>(mesh: &MeshModel, n: usize, map: F, mat: &MaterialParams) -> Result<[CsrMatrix<f64>; 4], FemError>
where
    F: Fn(usize, usize) -> Option<usize>,
{
    let mut acc = [Accumulator::new(n), Accumulator::new(n), Accumulator::new(n), Accumulator::new(n)];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = element_points(mesh, t)?;
        let lap = element_laplacian(p);
        let mass_unit = element_mass(p, 1.0);
        let locals = [
            element_mass(p, mat.rho),
            element_isotropic(p, mat.viscosity),
            element_isotropic(p, mat.elasticity),
        ];
        let dofs: Vec<Option<usize>> = (0..6).map(|r| map(tri[r / 2], r % 2)).collect();
        for r in 0..6 {
            let Some(gi) = dofs[r] else { continue };
            for s in 0..6 {
                let Some(gj) = dofs[s] else { continue };
                for (a, local) in acc.iter_mut().zip(locals.iter()) {
                    a.add(gi, gj, local[r][s]);
                }
                acc[3].add(gi, gj, mass_unit[r][s] + lap[r][s]);
            }
        }
    }
    let [m, a, b, g] = acc;
    Ok([m.finish(), a.finish(), b.finish(), g.finish()])
}

pub fn assemble_global(mesh: &MeshModel, mat: &MaterialParams) -> Result<GlobalOperators, FemError> {
    mat.validate()?;
    let n = 2 * mesh.vertices().len();
    let [mass, viscosity, elasticity, gram] = assemble_into(mesh, n, |v, c| Some(2 * v + c), mat)?;
    Ok(GlobalOperators { mass, viscosity, elasticity, gram })
}

/// Frictional boundary data in terms of free dofs.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactMap {
    /// Trapezoidal weight per contact node; sums to `|Γ_C|`.
    pub trace_weights: Vec<f64>,
    /// Free tangential dof per contact node.
    pub dofs: Vec<Option<usize>>,
    /// Vertex index per contact node.
    pub vertices: Vec<usize>,
}

impl ContactMap {
    pub fn len(&self) -> usize {
        self.trace_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trace_weights.is_empty()
    }

    /// Tangential speed `|v_t|` at every contact node (zero where clamped).
    pub fn slip_rates(&self, velocity: &[f64]) -> Vec<f64> {
        self.dofs.iter().map(|d| d.map_or(0.0, |i| velocity[i].abs())).collect()
    }
}

/// Operators of the weak form restricted to the free dofs.
#[derive(Debug, Clone)]
pub struct AssembledOperators {
    /// ρ-weighted consistent mass.
    pub mass: CsrMatrix<f64>,
    /// Viscosity stiffness.
    pub viscosity: CsrMatrix<f64>,
    /// Elasticity stiffness.
    pub elasticity: CsrMatrix<f64>,
    /// Gram matrix of the full H¹ norm (unit mass plus component-wise
    /// Laplacian) defining `‖·‖_V`.
    pub gram: CsrMatrix<f64>,
    /// Lumped boundary mass on the free dofs: the trace weight on tangential
    /// contact dofs, zero elsewhere.
    pub contact_mass: Vec<f64>,
    pub contact: ContactMap,
    /// Body-force load vectors `∫ φ_i e_c` for a unit force along x and y.
    pub unit_load: [Vec<f64>; 2],
    pub mesh_label: String,
}

impl AssembledOperators {
    pub fn n_free(&self) -> usize {
        self.contact_mass.len()
    }
}

pub fn assemble(mesh: &MeshModel, mat: &MaterialParams) -> Result<AssembledOperators, FemError> {
    mat.validate()?;
    let n = mesh.n_free();
    let [mass, viscosity, elasticity, gram] = assemble_into(mesh, n, |v, c| mesh.dof(v, c), mat)?;

    let mut unit_load = [vec![0.0; n], vec![0.0; n]];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = element_points(mesh, t)?;
        let share = triangle_area(p[0], p[1], p[2]) / 3.0;
        for &v in tri {
            for (c, load) in unit_load.iter_mut().enumerate() {
                if let Some(i) = mesh.dof(v, c) {
                    load[i] += share;
                }
            }
        }
    }

    let nodes = &mesh.contact().nodes;
    let mut contact_mass = vec![0.0; n];
    for node in nodes {
        if let Some(i) = node.tangential_dof {
            contact_mass[i] += node.weight;
        }
    }
    let contact = ContactMap {
        trace_weights: nodes.iter().map(|c| c.weight).collect(),
        dofs: nodes.iter().map(|c| c.tangential_dof).collect(),
        vertices: nodes.iter().map(|c| c.vertex).collect(),
    };
    Ok(AssembledOperators {
        mass,
        viscosity,
        elasticity,
        gram,
        contact_mass,
        contact,
        unit_load,
        mesh_label: mesh.label().to_string(),
    })
}

/// `y = A x`.
pub fn spmv(a: &CsrMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    spmv_into(a, x, &mut y);
    y
}

pub fn spmv_into(a: &CsrMatrix<f64>, x: &[f64], y: &mut [f64]) {
    for (row, out) in a.row_iter().zip(y.iter_mut()) {
        *out = row.col_indices().iter().zip(row.values()).map(|(&j, &v)| v * x[j]).sum();
    }
}

/// `xᵀ A x`.
pub fn quadratic_form(a: &CsrMatrix<f64>, x: &[f64]) -> f64 {
    a.row_iter()
        .zip(x)
        .map(|(row, &xi)| xi * row.col_indices().iter().zip(row.values()).map(|(&j, &v)| v * x[j]).sum::<f64>())
        .sum()
}

/// Linear combination `Σ cᵢ Aᵢ` of matrices sharing a pattern superset.
pub fn linear_combination(terms: &[(f64, &CsrMatrix<f64>)]) -> CsrMatrix<f64> {
    let n = terms[0].1.nrows();
    let mut acc = Accumulator::new(n);
    for (c, m) in terms {
        for (i, j, v) in m.triplet_iter() {
            acc.add(i, j, c * v);
        }
    }
    acc.finish()
}
