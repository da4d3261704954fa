//! Fixed-point coupling `α ↦ S(R(α))` on time windows, continuation across
//! windows, and empirical checks of the Lipschitz and contraction constants.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::{estimate_operator_bounds, estimate_trace_norm, quadratic_form, ContactMap, FemError};
use crate::rate::{ExternalLoad, RateError, RateProblem, RateTrajectory, TimeGrid};
use crate::state::{integrate_state, StateError, StateTrajectory};

/// Description of the V-norm every reported constant refers to.
pub const V_NORM: &str = "H1: unit mass plus component-wise Laplacian";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoupledError {
    #[error("invalid coupling configuration `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },
    #[error("window {window}: {source}")]
    Rate { window: usize, source: RateError },
    #[error("window {window}: {source}")]
    State { window: usize, source: StateError },
    #[error("window {window}: fixed point not reached in {iterations} iterations (ratios {ratios:?})")]
    FixedPoint { window: usize, iterations: usize, ratios: Vec<f64>, differences: Vec<f64> },
    #[error(transparent)]
    Fem(#[from] FemError),
}

fn default_fp_tol() -> f64 {
    1e-10
}

fn default_fp_max_iters() -> usize {
    50
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupledConfig {
    /// Window length `T_w` (s); a whole multiple of the time step.
    pub window_length: f64,
    /// Relative tolerance on `‖α^{k+1} − α^k‖_{C(0,T_w;X)}`.
    #[serde(default = "default_fp_tol")]
    pub fp_tol: f64,
    #[serde(default = "default_fp_max_iters")]
    pub fp_max_iters: usize,
    pub n_windows: usize,
    /// On a fixed-point failure, retry the window once as two halves.
    #[serde(default)]
    pub retry_halved: bool,
}

impl CoupledConfig {
    pub fn validate(&self) -> Result<(), CoupledError> {
        let invalid = |key, reason: String| Err(CoupledError::InvalidConfig { key, reason });
        if !(self.window_length > 0.0) || !self.window_length.is_finite() {
            return invalid("window_length", format!("must be > 0, got {}", self.window_length));
        }
        if !(self.fp_tol > 0.0 && self.fp_tol < 1.0) {
            return invalid("fp_tol", format!("must lie in (0, 1), got {}", self.fp_tol));
        }
        if self.fp_max_iters == 0 {
            return invalid("fp_max_iters", "must be >= 1".into());
        }
        if self.n_windows == 0 {
            return invalid("n_windows", "must be >= 1".into());
        }
        Ok(())
    }

    /// Number of steps of size `dt` in a window.
    pub fn window_steps(&self, dt: f64) -> Result<usize, CoupledError> {
        window_steps(self.window_length, dt)
    }
}

pub fn window_steps(window_length: f64, dt: f64) -> Result<usize, CoupledError> {
    let steps = (window_length / dt).round();
    if steps < 1.0 || (steps * dt - window_length).abs() > 1e-9 * window_length {
        return Err(CoupledError::InvalidConfig {
            key: "window_length",
            reason: format!("{window_length} is not a positive multiple of dt = {dt}"),
        });
    }
    Ok(steps as usize)
}

/// Initial data of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
    pub alpha0: Vec<f64>,
}

/// `max_n sqrt(Σ_p w_p d_{n,p}²)`.
pub fn norm_cx(a: &[Vec<f64>], b: &[Vec<f64>], weights: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).zip(weights).map(|((p, q), w)| w * (p - q) * (p - q)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// `sqrt(Σ_{n≥1} dt·dₙᵀ G dₙ)`.
pub fn norm_l2v(a: &[Vec<f64>], b: &[Vec<f64>], gram: &nalgebra_sparse::CsrMatrix<f64>, dt: f64) -> f64 {
    a.iter()
        .zip(b)
        .skip(1)
        .map(|(x, y)| {
            let d: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
            dt * quadratic_form(gram, &d)
        })
        .sum::<f64>()
        .sqrt()
}

/// `sqrt(Σ_{n≥1} dt Σ_p w_p (γdₙ)_p²)` for the tangential traces.
pub fn norm_l2x_trace(a: &[Vec<f64>], b: &[Vec<f64>], contact: &ContactMap, dt: f64) -> f64 {
    a.iter()
        .zip(b)
        .skip(1)
        .map(|(x, y)| {
            dt * contact
                .dofs
                .iter()
                .zip(&contact.trace_weights)
                .map(|(dof, w)| dof.map_or(0.0, |i| w * (x[i] - y[i]) * (x[i] - y[i])))
                .sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

/// Constants entering the Lipschitz bounds, relative to [`V_NORM`] on the
/// mesh named in `mesh`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingConstants {
    #[serde(rename = "L_mu")]
    pub l_mu: f64,
    #[serde(rename = "L_f")]
    pub l_f: f64,
    pub trace_norm: f64,
    #[serde(rename = "m_A")]
    pub m_a: f64,
    pub sigma_n_inf: f64,
    #[serde(skip)]
    pub mesh: String,
}

impl CouplingConstants {
    pub fn estimate(problem: &RateProblem<'_>) -> Result<Self, FemError> {
        let ops = problem.ops();
        let bounds = estimate_operator_bounds(ops)?;
        Ok(Self {
            l_mu: problem.law().lipschitz_mu(),
            l_f: problem.law().lipschitz_f(),
            trace_norm: estimate_trace_norm(ops)?,
            m_a: bounds.m_a,
            sigma_n_inf: problem.ctx().sigma_n_bar,
            mesh: ops.mesh_label.clone(),
        })
    }

    /// `L_R/√T = L_μ‖γ‖‖σ̄_n‖_∞/m_A`.
    pub fn rate_factor(&self) -> f64 {
        self.l_mu * self.trace_norm * self.sigma_n_inf / self.m_a
    }

    /// `L_S/√T = ‖γ‖L_f`.
    pub fn state_factor(&self) -> f64 {
        self.trace_norm * self.l_f
    }

    /// `L_RS = T·(L_R/√T)(L_S/√T)`, exactly linear in `T`.
    pub fn l_rs(&self, window: f64) -> f64 {
        window * (self.rate_factor() * self.state_factor())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConstants {
    #[serde(flatten)]
    pub coupling: CouplingConstants,
    #[serde(rename = "T_w")]
    pub window_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub window_length: f64,
    /// `‖Δα^{k+1}‖/‖Δα^k‖` per iteration.
    pub ratios: Vec<f64>,
    #[serde(rename = "theoretical_L_RS")]
    pub theoretical_l_rs: f64,
    pub constants: ReportConstants,
    pub mesh: String,
    pub v_norm: String,
    pub window_index: usize,
    pub start_time: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `‖α^{k+1} − α^k‖_{C(0,T_w;X)}` per iteration.
    pub differences: Vec<f64>,
    pub retried_halved: bool,
}

impl ContractionReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSolution {
    pub rate: RateTrajectory,
    pub state: StateTrajectory,
    pub report: ContractionReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub rate: RateTrajectory,
    pub state: StateTrajectory,
    pub reports: Vec<ContractionReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzSCheck {
    pub lhs: f64,
    /// `√T L_f ‖γΔv‖_{L²(0,T;X)}`.
    pub rhs: f64,
    /// `√T L_f ‖γ‖ ‖Δv‖_{L²(0,T;V)}`.
    pub rhs_v: f64,
    pub slack: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub window_length: f64,
    pub steps: usize,
    pub max_ratio: f64,
    #[serde(rename = "theoretical_L_RS")]
    pub theoretical_l_rs: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionStudy {
    pub rows: Vec<StudyRow>,
    pub reports: Vec<ContractionReport>,
}

/// The coupled problem on a fixed assembly, law and load.
pub struct CoupledProblem<'a> {
    rate: &'a RateProblem<'a>,
    load: &'a ExternalLoad,
    constants: CouplingConstants,
}

impl<'a> CoupledProblem<'a> {
    pub fn new(rate: &'a RateProblem<'a>, load: &'a ExternalLoad) -> Result<Self, CoupledError> {
        let constants = CouplingConstants::estimate(rate)?;
        Ok(Self { rate, load, constants })
    }

    pub fn with_constants(rate: &'a RateProblem<'a>, load: &'a ExternalLoad, constants: CouplingConstants) -> Self {
        Self { rate, load, constants }
    }

    pub fn constants(&self) -> &CouplingConstants {
        &self.constants
    }

    pub fn rate_problem(&self) -> &RateProblem<'a> {
        self.rate
    }

    pub fn load(&self) -> &ExternalLoad {
        self.load
    }

    pub fn dt(&self) -> f64 {
        self.rate.config().dt
    }

    fn weights(&self) -> &[f64] {
        &self.rate.ops().contact.trace_weights
    }

    /// `R(α)` over `grid`.
    pub fn apply_r(&self, alpha: &StateTrajectory, u0: &[f64], v0: &[f64], grid: TimeGrid) -> Result<RateTrajectory, RateError> {
        self.rate.solve_window(alpha, u0, v0, self.load, grid)
    }

    /// `S(v)` from `alpha0`.
    pub fn apply_s(&self, v: &RateTrajectory, alpha0: &[f64]) -> Result<StateTrajectory, StateError> {
        integrate_state(self.rate.law(), alpha0, v, &self.rate.ops().contact)
    }

    fn report(&self, grid: TimeGrid, window: usize, ratios: Vec<f64>, differences: Vec<f64>, converged: bool) -> ContractionReport {
        let length = grid.length();
        ContractionReport {
            window_length: length,
            theoretical_l_rs: self.constants.l_rs(length),
            constants: ReportConstants { coupling: self.constants.clone(), window_length: length },
            mesh: self.constants.mesh.clone(),
            v_norm: V_NORM.to_string(),
            window_index: window,
            start_time: grid.time(0),
            iterations: differences.len(),
            converged,
            ratios,
            differences,
            retried_halved: false,
        }
    }

    /// Banach iteration `α^{k+1} = S(R(α^k))` on one window. Without a
    /// `guess`, iteration starts from the constant extension of `alpha0`.
    pub fn fixed_point_window(
        &self,
        init: &InitialData,
        grid: TimeGrid,
        cfg: &CoupledConfig,
        guess: Option<&StateTrajectory>,
        window: usize,
    ) -> Result<WindowSolution, CoupledError> {
        let mut alpha = match guess {
            Some(g) => g.clone(),
            None => StateTrajectory::constant(grid, &init.alpha0),
        };
        let mut differences: Vec<f64> = Vec::new();
        let mut ratios = Vec::new();
        for _ in 0..cfg.fp_max_iters {
            let rate = self.apply_r(&alpha, &init.u0, &init.v0, grid).map_err(|source| CoupledError::Rate { window, source })?;
            let next = self.apply_s(&rate, &init.alpha0).map_err(|source| CoupledError::State { window, source })?;
            let diff = norm_cx(&next.alpha, &alpha.alpha, self.weights());
            if let Some(&prev) = differences.last() {
                ratios.push(if prev > 0.0 { diff / prev } else { 0.0 });
            }
            differences.push(diff);
            let size = norm_cx(&next.alpha, &vec![vec![0.0; init.alpha0.len()]; next.alpha.len()], self.weights());
            if diff <= cfg.fp_tol * size.max(1.0) {
                let report = self.report(grid, window, ratios, differences, true);
                return Ok(WindowSolution { rate, state: next, report });
            }
            alpha = next;
        }
        Err(CoupledError::FixedPoint { window, iterations: cfg.fp_max_iters, ratios, differences })
    }

    /// Consecutive windows with exact handoff of the final `(u, u̇, α)`.
    pub fn run_simulation(&self, init: &InitialData, cfg: &CoupledConfig) -> Result<Simulation, CoupledError> {
        cfg.validate()?;
        let steps = cfg.window_steps(self.dt())?;
        let mut grid = TimeGrid::new(0, steps, self.dt());
        let mut data = init.clone();
        let mut total: Option<Simulation> = None;
        for window in 0..cfg.n_windows {
            let pieces = match self.fixed_point_window(&data, grid, cfg, None, window) {
                Ok(sol) => vec![sol],
                Err(CoupledError::FixedPoint { .. }) if cfg.retry_halved && steps >= 2 => {
                    let first = TimeGrid::new(grid.start_step, steps / 2, grid.dt);
                    let second = first.next(steps - steps / 2);
                    let mut a = self.fixed_point_window(&data, first, cfg, None, window)?;
                    let mid = InitialData {
                        u0: a.rate.final_displacement().to_vec(),
                        v0: a.rate.final_velocity().to_vec(),
                        alpha0: a.state.final_state().to_vec(),
                    };
                    let mut b = self.fixed_point_window(&mid, second, cfg, None, window)?;
                    a.report.retried_halved = true;
                    b.report.retried_halved = true;
                    vec![a, b]
                }
                Err(e) => return Err(e),
            };
            for sol in pieces {
                data = InitialData {
                    u0: sol.rate.final_displacement().to_vec(),
                    v0: sol.rate.final_velocity().to_vec(),
                    alpha0: sol.state.final_state().to_vec(),
                };
                match total.as_mut() {
                    None => total = Some(Simulation { rate: sol.rate, state: sol.state, reports: vec![sol.report] }),
                    Some(sim) => {
                        sim.rate.extend_with(&sol.rate);
                        sim.state.extend_with(&sol.state);
                        sim.reports.push(sol.report);
                    }
                }
            }
            grid = grid.next(steps);
        }
        Ok(total.expect("at least one window"))
    }

    /// Compares `‖R(β) − R(α)‖_{L²(0,T;V)}` with
    /// `√T (L_μ‖γ‖‖σ̄_n‖_∞/m_A) ‖β − α‖_{C(0,T;X)}`.
    pub fn verify_lipschitz_r(
        &self,
        alpha: &StateTrajectory,
        beta: &StateTrajectory,
        u0: &[f64],
        v0: &[f64],
        slack: f64,
    ) -> Result<LipschitzCheck, RateError> {
        let grid = alpha.grid;
        let ra = self.apply_r(alpha, u0, v0, grid)?;
        let rb = self.apply_r(beta, u0, v0, grid)?;
        let lhs = norm_l2v(&ra.velocities, &rb.velocities, &self.rate.ops().gram, grid.dt);
        let rhs = grid.length().sqrt() * self.constants.rate_factor() * norm_cx(&alpha.alpha, &beta.alpha, self.weights());
        Ok(LipschitzCheck { lhs, rhs, slack, passed: lhs <= rhs * (1.0 + slack) })
    }

    /// Compares `‖S(v) − S(w)‖_{C(0,T;X)}` with `√T L_f ‖γv − γw‖_{L²(0,T;X)}`
    /// and with its V-norm relaxation.
    pub fn verify_lipschitz_s(
        &self,
        v: &RateTrajectory,
        w: &RateTrajectory,
        alpha0: &[f64],
        slack: f64,
    ) -> Result<LipschitzSCheck, StateError> {
        let sv = self.apply_s(v, alpha0)?;
        let sw = self.apply_s(w, alpha0)?;
        let lhs = norm_cx(&sv.alpha, &sw.alpha, self.weights());
        let dt = v.grid.dt;
        let root_t = v.grid.length().sqrt();
        let l_f = self.constants.l_f;
        let rhs = root_t * l_f * norm_l2x_trace(&v.velocities, &w.velocities, &self.rate.ops().contact, dt);
        let rhs_v = root_t * l_f * self.constants.trace_norm * norm_l2v(&v.velocities, &w.velocities, &self.rate.ops().gram, dt);
        let passed = lhs <= rhs * (1.0 + slack) && lhs <= rhs_v * (1.0 + slack);
        Ok(LipschitzSCheck { lhs, rhs, rhs_v, slack, passed })
    }

    /// One fixed-point solve per window length from the same initial data.
    /// Non-converged windows are recorded rather than reported as errors.
    pub fn contraction_study(
        &self,
        init: &InitialData,
        windows: &[f64],
        cfg: &CoupledConfig,
    ) -> Result<ContractionStudy, CoupledError> {
        let mut rows = Vec::new();
        let mut reports = Vec::new();
        for (k, &length) in windows.iter().enumerate() {
            let steps = window_steps(length, self.dt())?;
            let grid = TimeGrid::new(0, steps, self.dt());
            let report = match self.fixed_point_window(init, grid, cfg, None, k) {
                Ok(sol) => sol.report,
                Err(CoupledError::FixedPoint { ratios, differences, .. }) => self.report(grid, k, ratios, differences, false),
                Err(e) => return Err(e),
            };
            rows.push(StudyRow {
                window_length: report.window_length,
                steps,
                max_ratio: report.max_ratio(),
                theoretical_l_rs: report.theoretical_l_rs,
                iterations: report.iterations,
                converged: report.converged,
            });
            reports.push(report);
        }
        Ok(ContractionStudy { rows, reports })
    }
}
