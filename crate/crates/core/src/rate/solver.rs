use nalgebra_sparse::CsrMatrix;

use super::{ExternalLoad, RateError, RateProblemConfig, RateTrajectory, TimeGrid};
use crate::fem::{linear_combination, spmv, spmv_into, AssembledOperators};
use crate::friction::{FrictionContext, FrictionError, FrictionLaw};
use crate::state::StateTrajectory;

/// Minimizer of `½q z² − p z + w φ_α(|z|)` over `z ∈ ℝ`.
///
/// Stick (`z = 0`) iff `|p| ≤ w(μ(0, α)|σ̄_n| + C)`; otherwise `|z|` is the
/// root of `q s + w φ'_α(s) = |p|` on `[0, |p|/q]`, located by bisection to a
/// relative bracket width of `bisect_tol`.
pub fn local_friction_solve(
    q: f64,
    p: f64,
    w: f64,
    law: &dyn FrictionLaw,
    ctx: &FrictionContext,
    alpha: f64,
    bisect_tol: f64,
) -> Result<f64, FrictionError> {
    debug_assert!(q > 0.0 && w > 0.0);
    let target = p.abs();
    if target == 0.0 || target <= w * law.phi_prime(ctx, 0.0, alpha)? {
        return Ok(0.0);
    }
    let mut hi = target / q;
    let at_hi = w * law.phi_prime(ctx, hi, alpha)?;
    if at_hi == 0.0 {
        return Ok(hi.copysign(p));
    }
    let mut lo = 0.0;
    while hi - lo > bisect_tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q * mid + w * law.phi_prime(ctx, mid, alpha)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).copysign(p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Relative stationarity residual after the sweep.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub velocity: Vec<f64>,
    pub sweeps: usize,
    pub residual: f64,
}

/// One backward-Euler step operator: the quadratic part
/// `Q = M/dt + A + dt·B`, the nodal friction data and the solver settings.
pub struct RateProblem<'a> {
    ops: &'a AssembledOperators,
    law: &'a dyn FrictionLaw,
    ctx: FrictionContext,
    cfg: RateProblemConfig,
    q: CsrMatrix<f64>,
    diag: Vec<f64>,
    /// Contact node of each free dof, with its trace weight.
    dof_node: Vec<Option<(usize, f64)>>,
}

impl<'a> RateProblem<'a> {
    pub fn new(
        ops: &'a AssembledOperators,
        law: &'a dyn FrictionLaw,
        ctx: FrictionContext,
        cfg: RateProblemConfig,
    ) -> Result<Self, RateError> {
        cfg.validate()?;
        let dt = cfg.dt;
        let q = linear_combination(&[(1.0 / dt, &ops.mass), (1.0, &ops.viscosity), (dt, &ops.elasticity)]);
        let n = q.nrows();
        let mut diag = vec![0.0; n];
        for (i, j, v) in q.triplet_iter() {
            if i == j {
                diag[i] = *v;
            }
        }
        let mut dof_node = vec![None; n];
        for (node, dof) in ops.contact.dofs.iter().enumerate() {
            if let Some(i) = *dof {
                dof_node[i] = Some((node, ops.contact.trace_weights[node]));
            }
        }
        Ok(Self { ops, law, ctx, cfg, q, diag, dof_node })
    }

    pub fn ops(&self) -> &'a AssembledOperators {
        self.ops
    }

    pub fn law(&self) -> &'a dyn FrictionLaw {
        self.law
    }

    pub fn ctx(&self) -> &FrictionContext {
        &self.ctx
    }

    pub fn config(&self) -> &RateProblemConfig {
        &self.cfg
    }

    pub fn n_free(&self) -> usize {
        self.diag.len()
    }

    pub fn quadratic(&self) -> &CsrMatrix<f64> {
        &self.q
    }

    /// Trace weight of the contact node owning free dof `i`, if any.
    pub fn contact_weight(&self, i: usize) -> Option<f64> {
        self.dof_node[i].map(|(_, w)| w)
    }

    /// Linear term `M v_n/dt + load − B u_n`.
    pub fn rhs(&self, u_n: &[f64], v_n: &[f64], load: &[f64]) -> Vec<f64> {
        let mv = spmv(&self.ops.mass, v_n);
        let bu = spmv(&self.ops.elasticity, u_n);
        let inv_dt = 1.0 / self.cfg.dt;
        mv.iter().zip(&bu).zip(load).map(|((m, b), l)| m * inv_dt + l - b).collect()
    }

    /// Friction functional `Σ_p w_p φ_{α_p}(|v_t(p)|)`.
    pub fn friction_energy(&self, v: &[f64], alpha: &[f64]) -> Result<f64, FrictionError> {
        let mut total = 0.0;
        for (i, slot) in self.dof_node.iter().enumerate() {
            if let Some((node, w)) = *slot {
                total += w * self.law.phi(&self.ctx, v[i].abs(), alpha[node])?;
            }
        }
        Ok(total)
    }

    /// `J(v) = ½vᵀQv − rhsᵀv + Σ_p w_p φ_{α_p}(|v_t(p)|)`.
    pub fn energy(&self, v: &[f64], rhs: &[f64], alpha: &[f64]) -> Result<f64, FrictionError> {
        let qv = spmv(&self.q, v);
        let quad: f64 = v.iter().zip(&qv).zip(rhs).map(|((x, qx), b)| 0.5 * x * qx - b * x).sum();
        Ok(quad + self.friction_energy(v, alpha)?)
    }

    /// Minimum-norm element of `∂J(v)` in the max norm, relative to
    /// `max(‖rhs‖∞, ‖Qv‖∞)`.
    pub fn stationarity_residual(&self, v: &[f64], rhs: &[f64], alpha: &[f64]) -> Result<f64, FrictionError> {
        let n = v.len();
        let mut qv = vec![0.0; n];
        spmv_into(&self.q, v, &mut qv);
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..n {
            let g = qv[i] - rhs[i];
            scale = scale.max(rhs[i].abs()).max(qv[i].abs());
            let r = match self.dof_node[i] {
                None => g.abs(),
                Some((node, w)) => {
                    if v[i] == 0.0 {
                        (g.abs() - w * self.law.phi_prime(&self.ctx, 0.0, alpha[node])?).max(0.0)
                    } else {
                        (g + w * self.law.phi_prime(&self.ctx, v[i].abs(), alpha[node])?.copysign(v[i])).abs()
                    }
                }
            };
            worst = worst.max(r);
        }
        Ok(if scale > 0.0 { worst / scale } else { worst })
    }

    /// One ascending-order sweep of exact coordinate minimizations.
    pub fn gauss_seidel_sweep(&self, v: &mut [f64], rhs: &[f64], alpha: &[f64]) -> Result<SweepResult, FrictionError> {
        for i in 0..v.len() {
            let row = self.q.row(i);
            let mut p = rhs[i];
            for (&j, &qij) in row.col_indices().iter().zip(row.values()) {
                if j != i {
                    p -= qij * v[j];
                }
            }
            let qii = self.diag[i];
            v[i] = match self.dof_node[i] {
                None => p / qii,
                Some((node, w)) => {
                    local_friction_solve(qii, p, w, self.law, &self.ctx, alpha[node], self.cfg.bisect_tol)?
                }
            };
        }
        Ok(SweepResult { residual: self.stationarity_residual(v, rhs, alpha)? })
    }

    /// Minimizes `J` from the starting point `v_n`. `alpha_n1` holds the state
    /// at every contact node at the new time level.
    pub fn solve_time_step(
        &self,
        alpha_n1: &[f64],
        u_n: &[f64],
        v_n: &[f64],
        load_n1: &[f64],
    ) -> Result<StepResult, RateError> {
        self.solve_step_indexed(0, alpha_n1, u_n, v_n, load_n1)
    }

    fn solve_step_indexed(
        &self,
        step: usize,
        alpha_n1: &[f64],
        u_n: &[f64],
        v_n: &[f64],
        load_n1: &[f64],
    ) -> Result<StepResult, RateError> {
        let n = self.n_free();
        if u_n.len() != n || v_n.len() != n || load_n1.len() != n {
            return Err(RateError::Shape(format!("expected {n} free dofs")));
        }
        if alpha_n1.len() != self.ops.contact.len() {
            return Err(RateError::Shape(format!(
                "expected {} contact states, got {}",
                self.ops.contact.len(),
                alpha_n1.len()
            )));
        }
        let friction = |source| RateError::Friction { step, source };
        let rhs = self.rhs(u_n, v_n, load_n1);
        let mut v = v_n.to_vec();
        let mut residual = self.stationarity_residual(&v, &rhs, alpha_n1).map_err(friction)?;
        if residual <= self.cfg.gs_tol {
            return Ok(StepResult { velocity: v, sweeps: 0, residual });
        }
        for sweep in 1..=self.cfg.gs_max_sweeps {
            residual = self.gauss_seidel_sweep(&mut v, &rhs, alpha_n1).map_err(friction)?.residual;
            if residual <= self.cfg.gs_tol {
                return Ok(StepResult { velocity: v, sweeps: sweep, residual });
            }
        }
        Err(RateError::NotConverged { step, sweeps: self.cfg.gs_max_sweeps, residual })
    }

    /// The discrete solution operator: steps through `grid`, taking the state
    /// at `t_{n+1}` from `alpha`.
    pub fn solve_window(
        &self,
        alpha: &StateTrajectory,
        u0: &[f64],
        v0: &[f64],
        load: &ExternalLoad,
        grid: TimeGrid,
    ) -> Result<RateTrajectory, RateError> {
        if alpha.alpha.len() != grid.steps + 1 {
            return Err(RateError::Shape(format!(
                "state trajectory has {} entries for {} steps",
                alpha.alpha.len(),
                grid.steps
            )));
        }
        let mut velocities = Vec::with_capacity(grid.steps + 1);
        let mut displacements = Vec::with_capacity(grid.steps + 1);
        velocities.push(v0.to_vec());
        displacements.push(u0.to_vec());
        let dt = grid.dt;
        for n in 0..grid.steps {
            let load_n1 = load.at(grid.time(n + 1));
            let step = grid.start_step + n + 1;
            let result = self.solve_step_indexed(step, &alpha.alpha[n + 1], &displacements[n], &velocities[n], &load_n1)?;
            let u_next: Vec<f64> = displacements[n].iter().zip(&result.velocity).map(|(u, v)| u + dt * v).collect();
            velocities.push(result.velocity);
            displacements.push(u_next);
        }
        Ok(RateTrajectory { grid, times: grid.times(), velocities, displacements })
    }
}
