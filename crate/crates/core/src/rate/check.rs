use super::{ExternalLoad, RateError, RateProblem, RateTrajectory};
use crate::fem::spmv;
use crate::state::StateTrajectory;

/// Most negative slack of the discrete rate inequality
/// `g·(z − v) + Φ(z) − Φ(v) ≥ 0` with
/// `g = M(v_{n+1} − v_n)/dt + A v_{n+1} + B u_{n+1} − load_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViCheck {
    /// Most negative raw slack (zero if none was negative).
    pub worst_slack: f64,
    /// Most negative slack divided by its problem scale
    /// `Σ|g_i (z − v)_i| + |Φ(z)| + |Φ(v)|`.
    pub worst_relative: f64,
    pub worst_step: usize,
    pub evaluations: usize,
}

/// Residual of the momentum balance at step `n + 1`, before friction.
fn balance_residual(problem: &RateProblem<'_>, traj: &RateTrajectory, load: &ExternalLoad, n: usize) -> Vec<f64> {
    let ops = problem.ops();
    let dt = traj.grid.dt;
    let (v0, v1, u1) = (&traj.velocities[n], &traj.velocities[n + 1], &traj.displacements[n + 1]);
    let dv: Vec<f64> = v1.iter().zip(v0).map(|(a, b)| (a - b) / dt).collect();
    let m_dv = spmv(&ops.mass, &dv);
    let a_v = spmv(&ops.viscosity, v1);
    let b_u = spmv(&ops.elasticity, u1);
    let f = load.at(traj.grid.time(n + 1));
    (0..v1.len()).map(|i| m_dv[i] + a_v[i] + b_u[i] - f[i]).collect()
}

/// Evaluates the inequality at every step against the test vectors returned
/// by `tests(step, v_{n+1})`.
pub fn vi_residual_check<F>(
    problem: &RateProblem<'_>,
    traj: &RateTrajectory,
    alpha: &StateTrajectory,
    load: &ExternalLoad,
    mut tests: F,
) -> Result<ViCheck, RateError>
where
    F: FnMut(usize, &[f64]) -> Vec<Vec<f64>>,
{
    let mut out = ViCheck { worst_slack: 0.0, worst_relative: 0.0, worst_step: 0, evaluations: 0 };
    for n in 0..traj.grid.steps {
        let step = traj.grid.start_step + n + 1;
        let friction = |source| RateError::Friction { step, source };
        let g = balance_residual(problem, traj, load, n);
        let v = &traj.velocities[n + 1];
        let a = &alpha.alpha[n + 1];
        let phi_v = problem.friction_energy(v, a).map_err(friction)?;
        for z in tests(step, v) {
            let phi_z = problem.friction_energy(&z, a).map_err(friction)?;
            let mut linear = 0.0;
            let mut scale = phi_z.abs() + phi_v.abs();
            for i in 0..v.len() {
                let term = g[i] * (z[i] - v[i]);
                linear += term;
                scale += term.abs();
            }
            let slack = linear + phi_z - phi_v;
            out.evaluations += 1;
            if slack < out.worst_slack {
                out.worst_slack = slack;
            }
            let relative = if scale > 0.0 { slack / scale } else { 0.0 };
            if relative < out.worst_relative {
                out.worst_relative = relative;
                out.worst_step = step;
            }
        }
    }
    Ok(out)
}

/// Largest relative excess in the per-step estimate
/// `E_{n+1} ≤ E_n + dt·v_{n+1}ᵀ load_{n+1}`, `E = ½vᵀMv + ½uᵀBu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCheck {
    pub worst_excess: f64,
    pub energies: [f64; 2],
}

pub fn energy_balance(problem: &RateProblem<'_>, traj: &RateTrajectory, load: &ExternalLoad) -> EnergyCheck {
    let ops = problem.ops();
    let energy = |n: usize| {
        let v = &traj.velocities[n];
        let u = &traj.displacements[n];
        let mv = spmv(&ops.mass, v);
        let bu = spmv(&ops.elasticity, u);
        0.5 * v.iter().zip(&mv).map(|(a, b)| a * b).sum::<f64>() + 0.5 * u.iter().zip(&bu).map(|(a, b)| a * b).sum::<f64>()
    };
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut prev = energy(0);
    let first = prev;
    for n in 0..traj.grid.steps {
        let next = energy(n + 1);
        let f = load.at(traj.grid.time(n + 1));
        let work: f64 = traj.grid.dt * f.iter().zip(&traj.velocities[n + 1]).map(|(a, b)| a * b).sum::<f64>();
        let scale = next.abs().max(prev.abs()).max(work.abs());
        let excess = next - prev - work;
        worst = worst.max(if scale > 0.0 { excess / scale } else { 0.0 });
        prev = next;
    }
    EnergyCheck { worst_excess: if traj.grid.steps == 0 { 0.0 } else { worst }, energies: [first, prev] }
}

/// Nodal stick/slip dichotomy at the converged iterate of every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StickSlipCheck {
    /// Largest `(|p| − threshold)/threshold` over sticking nodes.
    pub worst_stick_excess: f64,
    /// Largest `|q s + w φ'(s) − |p|| / |p|` over slipping nodes.
    pub worst_slip_imbalance: f64,
    pub stick_count: usize,
    pub slip_count: usize,
}

pub fn stick_slip_check(
    problem: &RateProblem<'_>,
    traj: &RateTrajectory,
    alpha: &StateTrajectory,
    load: &ExternalLoad,
) -> Result<StickSlipCheck, RateError> {
    let mut out = StickSlipCheck { worst_stick_excess: f64::NEG_INFINITY, worst_slip_imbalance: 0.0, stick_count: 0, slip_count: 0 };
    let q = problem.quadratic();
    let (law, ctx) = (problem.law(), problem.ctx());
    for n in 0..traj.grid.steps {
        let step = traj.grid.start_step + n + 1;
        let friction = |source| RateError::Friction { step, source };
        let rhs = problem.rhs(&traj.displacements[n], &traj.velocities[n], &load.at(traj.grid.time(n + 1)));
        let v = &traj.velocities[n + 1];
        for (node, dof) in problem.ops().contact.dofs.iter().enumerate() {
            let Some(i) = *dof else { continue };
            let w = problem.ops().contact.trace_weights[node];
            let a = alpha.alpha[n + 1][node];
            let row = q.row(i);
            let mut p = rhs[i];
            let mut qii = 0.0;
            for (&j, &qij) in row.col_indices().iter().zip(row.values()) {
                if j == i {
                    qii = qij;
                } else {
                    p -= qij * v[j];
                }
            }
            if v[i] == 0.0 {
                let threshold = w * law.phi_prime(ctx, 0.0, a).map_err(friction)?;
                let excess = if threshold > 0.0 { (p.abs() - threshold) / threshold } else { p.abs() };
                out.worst_stick_excess = out.worst_stick_excess.max(excess);
                out.stick_count += 1;
            } else {
                let s = v[i].abs();
                let balance = qii * s + w * law.phi_prime(ctx, s, a).map_err(friction)?;
                let imbalance = (balance - p.abs()).abs() / p.abs().max(f64::MIN_POSITIVE);
                out.worst_slip_imbalance = out.worst_slip_imbalance.max(imbalance);
                out.slip_count += 1;
            }
        }
    }
    Ok(out)
}

/// Friction traction magnitude `|(Qv − rhs)_i| / w` at each contact node for
/// step `n + 1`; zero at nodes without a tangential dof.
pub fn nodal_tractions(problem: &RateProblem<'_>, traj: &RateTrajectory, load: &ExternalLoad, n: usize) -> Vec<f64> {
    let rhs = problem.rhs(&traj.displacements[n], &traj.velocities[n], &load.at(traj.grid.time(n + 1)));
    let qv = spmv(problem.quadratic(), &traj.velocities[n + 1]);
    let contact = &problem.ops().contact;
    contact
        .dofs
        .iter()
        .zip(&contact.trace_weights)
        .map(|(dof, w)| dof.map_or(0.0, |i| (qv[i] - rhs[i]).abs() / w))
        .collect()
}
