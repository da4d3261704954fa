//! The velocity problem: backward Euler in time, and at every step the
//! strictly convex minimization of the discrete rate inequality by nonlinear
//! Gauss–Seidel with exact nodal solves.

mod check;
mod solver;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::AssembledOperators;
use crate::friction::FrictionError;

pub use check::{energy_balance, nodal_tractions, stick_slip_check, vi_residual_check, EnergyCheck, StickSlipCheck, ViCheck};
pub use solver::{local_friction_solve, RateProblem, StepResult, SweepResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("invalid rate configuration `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },
    #[error("step {step}: Gauss–Seidel not converged after {sweeps} sweeps (residual {residual:e})")]
    NotConverged { step: usize, sweeps: usize, residual: f64 },
    #[error("step {step}: {source}")]
    Friction { step: usize, source: FrictionError },
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

fn default_gs_tol() -> f64 {
    1e-12
}

fn default_gs_max_sweeps() -> usize {
    10_000
}

fn default_bisect_tol() -> f64 {
    1e-14
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateProblemConfig {
    /// Time step (s).
    pub dt: f64,
    /// Relative stationarity residual at which sweeping stops.
    #[serde(default = "default_gs_tol")]
    pub gs_tol: f64,
    #[serde(default = "default_gs_max_sweeps")]
    pub gs_max_sweeps: usize,
    /// Relative bracket width of the nodal bisection.
    #[serde(default = "default_bisect_tol")]
    pub bisect_tol: f64,
}

impl RateProblemConfig {
    pub fn new(dt: f64) -> Self {
        Self { dt, gs_tol: default_gs_tol(), gs_max_sweeps: default_gs_max_sweeps(), bisect_tol: default_bisect_tol() }
    }

    pub fn validate(&self) -> Result<(), RateError> {
        let invalid = |key, reason: String| Err(RateError::InvalidConfig { key, reason });
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return invalid("dt", format!("must be > 0, got {}", self.dt));
        }
        if !(self.gs_tol > 0.0 && self.gs_tol < 1.0) {
            return invalid("gs_tol", format!("must lie in (0, 1), got {}", self.gs_tol));
        }
        if !(self.bisect_tol > 0.0 && self.bisect_tol < 1.0) {
            return invalid("bisect_tol", format!("must lie in (0, 1), got {}", self.bisect_tol));
        }
        if self.gs_max_sweeps == 0 {
            return invalid("gs_max_sweeps", "must be >= 1".into());
        }
        Ok(())
    }
}

/// Uniform grid `t_n = (start_step + n)·dt`, `n = 0..=steps`. Expressing
/// times through a global step index makes window boundaries coincide
/// bit-exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start_step: usize,
    pub steps: usize,
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(start_step: usize, steps: usize, dt: f64) -> Self {
        Self { start_step, steps, dt }
    }

    pub fn time(&self, n: usize) -> f64 {
        (self.start_step + n) as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|n| self.time(n)).collect()
    }

    /// Window length `steps·dt`.
    pub fn length(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    /// Grid of the following window with the given number of steps.
    pub fn next(&self, steps: usize) -> Self {
        Self { start_step: self.start_step + self.steps, steps, dt: self.dt }
    }
}

/// Time dependence of a spatially uniform body force (N/m³).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LoadProfile {
    Zero,
    Constant { amplitude: [f64; 2] },
    /// Linear rise from zero to `amplitude` over `ramp_time`, constant after.
    Ramp { amplitude: [f64; 2], ramp_time: f64 },
    /// `amplitude·sin(2πt/period)`.
    Sinusoid { amplitude: [f64; 2], period: f64 },
}

impl LoadProfile {
    pub fn force(&self, t: f64) -> [f64; 2] {
        match *self {
            LoadProfile::Zero => [0.0, 0.0],
            LoadProfile::Constant { amplitude } => amplitude,
            LoadProfile::Ramp { amplitude, ramp_time } => {
                let s = (t / ramp_time).clamp(0.0, 1.0);
                [s * amplitude[0], s * amplitude[1]]
            }
            LoadProfile::Sinusoid { amplitude, period } => {
                let s = (std::f64::consts::TAU * t / period).sin();
                [s * amplitude[0], s * amplitude[1]]
            }
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = |a: [f64; 2]| a.iter().all(|x| x.is_finite());
        match *self {
            LoadProfile::Zero => Ok(()),
            LoadProfile::Constant { amplitude } if finite(amplitude) => Ok(()),
            LoadProfile::Ramp { amplitude, ramp_time } if finite(amplitude) && ramp_time > 0.0 && ramp_time.is_finite() => Ok(()),
            LoadProfile::Sinusoid { amplitude, period } if finite(amplitude) && period > 0.0 && period.is_finite() => Ok(()),
            _ => Err("amplitudes must be finite and ramp_time/period > 0".into()),
        }
    }
}

/// Body-force load `∫ ⟨b(t), φ_i⟩` on the free dofs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalLoad {
    basis: [Vec<f64>; 2],
    pub profile: LoadProfile,
}

impl ExternalLoad {
    pub fn new(ops: &AssembledOperators, profile: LoadProfile) -> Self {
        Self { basis: ops.unit_load.clone(), profile }
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        let [fx, fy] = self.profile.force(t);
        self.basis[0].iter().zip(&self.basis[1]).map(|(bx, by)| fx * bx + fy * by).collect()
    }
}

/// Nodal velocities and displacements on the free dofs, entry `n` at
/// `grid.time(n)`; entry 0 is the initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTrajectory {
    pub grid: TimeGrid,
    pub times: Vec<f64>,
    pub velocities: Vec<Vec<f64>>,
    pub displacements: Vec<Vec<f64>>,
}

impl RateTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_velocity(&self) -> &[f64] {
        self.velocities.last().expect("trajectory holds initial data")
    }

    pub fn final_displacement(&self) -> &[f64] {
        self.displacements.last().expect("trajectory holds initial data")
    }

    /// Appends a following window whose first entry repeats this one's last.
    pub fn extend_with(&mut self, next: &RateTrajectory) {
        debug_assert_eq!(next.grid.start_step, self.grid.start_step + self.grid.steps);
        self.grid.steps += next.grid.steps;
        self.times.extend_from_slice(&next.times[1..]);
        self.velocities.extend_from_slice(&next.velocities[1..]);
        self.displacements.extend_from_slice(&next.displacements[1..]);
    }
}
