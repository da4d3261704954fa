use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CscMatrix, CsrMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::assembly::{spmv_into, AssembledOperators};
use super::FemError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConfig {
    /// Relative residual `‖G⁻¹Kx − λx‖_G / (λ‖x‖_G)` at which iteration stops.
    pub tol: f64,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { tol: 1e-9, max_steps: 200_000, seed: 0x5eed }
    }
}

/// Extreme generalized eigenvalues of the viscosity and elasticity pencils
/// relative to the Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorBounds {
    #[serde(rename = "m_A")]
    pub m_a: f64,
    #[serde(rename = "M_A")]
    pub max_a: f64,
    #[serde(rename = "m_B")]
    pub m_b: f64,
    #[serde(rename = "M_B")]
    pub max_b: f64,
}

fn factor(m: &CsrMatrix<f64>, name: &'static str) -> Result<CscCholesky<f64>, FemError> {
    CscCholesky::factor(&CscMatrix::from(m)).map_err(|_| FemError::NotPositiveDefinite(name))
}

const BLOCK: usize = 8;

/// Ritz coefficients of `span(Z)` for the pencil, given `K Z` and `G Z`:
/// returns `C` with `CᵀZᵀGZC = I` and `CᵀZᵀKZC` diagonal, descending. Directions
/// along which `Z` is numerically rank deficient are dropped.
fn rayleigh_ritz(z: &DMatrix<f64>, kz: &DMatrix<f64>, gz: &DMatrix<f64>) -> DMatrix<f64> {
    let gs = z.transpose() * gz;
    let gs = (&gs + gs.transpose()) * 0.5;
    let ks = z.transpose() * kz;
    let ks = (&ks + ks.transpose()) * 0.5;
    let eg = gs.symmetric_eigen();
    let top = eg.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..eg.eigenvalues.len()).filter(|&j| eg.eigenvalues[j] > 1e-12 * top).collect();
    let p = DMatrix::from_fn(z.ncols(), keep.len(), |i, c| eg.eigenvectors[(i, keep[c])] / eg.eigenvalues[keep[c]].sqrt());
    let reduced = p.transpose() * ks * &p;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let ek = reduced.symmetric_eigen();
    let mut order: Vec<usize> = (0..ek.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| ek.eigenvalues[b].total_cmp(&ek.eigenvalues[a]));
    let w = DMatrix::from_fn(order.len(), order.len(), |i, c| ek.eigenvectors[(i, order[c])]);
    p * w
}

/// Largest eigenvalue of `K x = λ G x` by block power iteration on `G⁻¹K`
/// with Rayleigh–Ritz extraction, `G` given through its Cholesky factor.
/// `apply_k` writes `K x` into its second argument. Stops when the leading
/// Ritz pair has relative residual `‖G⁻¹Kx − λx‖_G / (λ‖x‖_G) ≤ tol`.
fn power_iteration<F>(
    n: usize,
    apply_k: F,
    g: &CsrMatrix<f64>,
    g_chol: &CscCholesky<f64>,
    pencil: &'static str,
    cfg: &SpectralConfig,
) -> Result<f64, FemError>
where
    F: Fn(&[f64], &mut [f64]),
{
    if n == 0 {
        return Ok(0.0);
    }
    let k = n.min(BLOCK);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut random_block = |cols: usize| DMatrix::from_fn(n, cols, |_, _| rng.random_range(-1.0..1.0));
    let apply = |op: &dyn Fn(&[f64], &mut [f64]), x: &DMatrix<f64>| {
        let mut out = DMatrix::zeros(n, x.ncols());
        for c in 0..x.ncols() {
            let col: Vec<f64> = x.column(c).iter().copied().collect();
            let mut y = vec![0.0; n];
            op(&col, &mut y);
            out.column_mut(c).copy_from_slice(&y);
        }
        out
    };
    let apply_g = |x: &[f64], y: &mut [f64]| spmv_into(g, x, y);
    let mut x = random_block(k);
    let mut kx = apply(&apply_k, &x);
    let mut ritz = false;
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_steps {
        if kx.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        let mut z = kx.clone();
        for mut col in z.column_iter_mut() {
            let mut v = DVector::from_iterator(n, col.iter().copied());
            g_chol.solve_mut(&mut v);
            col.copy_from(&v);
        }
        if ritz {
            let x0: Vec<f64> = x.column(0).iter().copied().collect();
            let mut gx0 = vec![0.0; n];
            spmv_into(g, &x0, &mut gx0);
            let xgx: f64 = x0.iter().zip(&gx0).map(|(a, b)| a * b).sum();
            let lambda = x.column(0).dot(&kx.column(0)) / xgx;
            let r: Vec<f64> = z.column(0).iter().zip(&x0).map(|(zi, xi)| zi - lambda * xi).collect();
            let mut gr = vec![0.0; n];
            spmv_into(g, &r, &mut gr);
            let rgr: f64 = r.iter().zip(&gr).map(|(a, b)| a * b).sum();
            residual = rgr.max(0.0).sqrt() / (lambda.abs() * xgx.sqrt());
            if residual <= cfg.tol || lambda == 0.0 {
                return Ok(lambda);
            }
        }
        let kz = apply(&apply_k, &z);
        let gz = apply(&apply_g, &z);
        let c = rayleigh_ritz(&z, &kz, &gz);
        let m = c.ncols();
        x = &z * &c;
        kx = &kz * &c;
        if m < k {
            // Refill a rank-deficient block with fresh random directions.
            let fresh = random_block(k - m);
            let kf = apply(&apply_k, &fresh);
            x = DMatrix::from_fn(n, k, |i, j| if j < m { x[(i, j)] } else { fresh[(i, j - m)] });
            kx = DMatrix::from_fn(n, k, |i, j| if j < m { kx[(i, j)] } else { kf[(i, j - m)] });
        }
        ritz = m > 0;
    }
    Err(FemError::EigenNotConverged { pencil, steps: cfg.max_steps, residual })
}

/// Largest generalized eigenvalue of the symmetric pencil `(K, G)` with `G`
/// positive definite.
pub fn pencil_max_eigenvalue(
    k: &CsrMatrix<f64>,
    g: &CsrMatrix<f64>,
    cfg: &SpectralConfig,
) -> Result<f64, FemError> {
    let chol = factor(g, "G")?;
    power_iteration(k.nrows(), |x, y| spmv_into(k, x, y), g, &chol, "(K, G)", cfg)
}

fn pencil_bounds(
    k: &CsrMatrix<f64>,
    g: &CsrMatrix<f64>,
    g_chol: &CscCholesky<f64>,
    name: &'static str,
    cfg: &SpectralConfig,
) -> Result<(f64, f64), FemError> {
    let n = k.nrows();
    let upper = power_iteration(n, |x, y| spmv_into(k, x, y), g, g_chol, name, cfg)?;
    let k_chol = factor(k, name)?;
    let inv_lower = power_iteration(n, |x, y| spmv_into(g, x, y), k, &k_chol, name, cfg)?;
    Ok((1.0 / inv_lower, upper))
}

pub fn estimate_operator_bounds(ops: &AssembledOperators) -> Result<OperatorBounds, FemError> {
    estimate_operator_bounds_with(ops, &SpectralConfig::default())
}

pub fn estimate_operator_bounds_with(
    ops: &AssembledOperators,
    cfg: &SpectralConfig,
) -> Result<OperatorBounds, FemError> {
    let g_chol = factor(&ops.gram, "G")?;
    let (m_a, max_a) = pencil_bounds(&ops.viscosity, &ops.gram, &g_chol, "A", cfg)?;
    let (m_b, max_b) = pencil_bounds(&ops.elasticity, &ops.gram, &g_chol, "B", cfg)?;
    Ok(OperatorBounds { m_a, max_a, m_b, max_b })
}

/// Norm of the tangential trace from `(V, ‖·‖_V)` into the lumped `L²(Γ_C)`,
/// `sqrt(λ_max(Mc, G))`. Mesh dependent.
pub fn estimate_trace_norm(ops: &AssembledOperators) -> Result<f64, FemError> {
    estimate_trace_norm_with(ops, &SpectralConfig::default())
}

pub fn estimate_trace_norm_with(ops: &AssembledOperators, cfg: &SpectralConfig) -> Result<f64, FemError> {
    if ops.contact_mass.iter().all(|&w| w == 0.0) {
        return Ok(0.0);
    }
    let g_chol = factor(&ops.gram, "G")?;
    let mc = &ops.contact_mass;
    let lambda = power_iteration(
        mc.len(),
        |x, y| {
            for ((yi, xi), w) in y.iter_mut().zip(x).zip(mc) {
                *yi = w * xi;
            }
        },
        &ops.gram,
        &g_chol,
        "(Mc, G)",
        cfg,
    )?;
    Ok(lambda.max(0.0).sqrt())
}

/// Dense symmetric generalized eigenvalues, ascending. Used as a reference on
/// small problems.
pub fn dense_pencil_eigenvalues(k: &DMatrix<f64>, g: &DMatrix<f64>) -> Option<Vec<f64>> {
    let l = g.clone().cholesky()?.unpack();
    let linv = l.clone().try_inverse()?;
    let c = &linv * k * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Some(ev)
}
