//! The boundary state equation `α̇ + A(α) = f(r)`, integrated per contact
//! node by backward Euler.

use rayon::prelude::*;
use thiserror::Error;

use crate::fem::ContactMap;
use crate::friction::{FrictionError, FrictionLaw, RateStateParams};
use crate::rate::{RateTrajectory, TimeGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("no bracket for the implicit state update from α = {alpha_n} at rate {rate} (dt = {dt}); A may violate monotonicity")]
    Bracket { alpha_n: f64, rate: f64, dt: f64 },
    #[error("state update from α = {alpha_n} did not converge")]
    NotConverged { alpha_n: f64 },
    #[error("node {node}, step {step}: {source}")]
    AtNode { node: usize, step: usize, source: Box<StateError> },
    #[error(transparent)]
    Friction(#[from] FrictionError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// State at every contact node, entry `n` at `grid.time(n)`; entry 0 is the
/// initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTrajectory {
    pub grid: TimeGrid,
    pub times: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
}

impl StateTrajectory {
    /// The constant-in-time extension of `alpha0` over `grid`.
    pub fn constant(grid: TimeGrid, alpha0: &[f64]) -> Self {
        Self { grid, times: grid.times(), alpha: vec![alpha0.to_vec(); grid.steps + 1] }
    }

    pub fn final_state(&self) -> &[f64] {
        self.alpha.last().expect("trajectory holds initial data")
    }

    pub fn extend_with(&mut self, next: &StateTrajectory) {
        debug_assert_eq!(next.grid.start_step, self.grid.start_step + self.grid.steps);
        self.grid.steps += next.grid.steps;
        self.times.extend_from_slice(&next.times[1..]);
        self.alpha.extend_from_slice(&next.alpha[1..]);
    }
}

/// Root of `g(x) = x + dt·A(x) − α_n − dt·f(r)`, which is strictly increasing
/// when `A` is nondecreasing.
pub fn implicit_euler_step(law: &dyn FrictionLaw, alpha_n: f64, rate: f64, dt: f64) -> Result<f64, StateError> {
    if !(dt > 0.0) {
        return Err(StateError::InvalidInput(format!("dt must be > 0, got {dt}")));
    }
    let target = alpha_n + dt * law.state_source(rate)?;
    let g = |x: f64| -> Result<f64, StateError> { Ok(x + dt * law.state_decay(x)? - target) };
    let g0 = g(alpha_n)?;
    if g0 == 0.0 {
        return Ok(alpha_n);
    }
    // g(x) − x is nondecreasing, so the root lies between α_n and
    // α_n − g(α_n). If g cannot be evaluated at the far end (for instance
    // e^{−x} out of range), pull that end back towards α_n.
    let (mut a, mut ga) = (alpha_n, g0);
    let mut b = alpha_n - g0;
    let mut at_b = g(b);
    while let Err(err) = at_b {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            return Err(err);
        }
        match g(mid) {
            Ok(gm) if gm != 0.0 && gm.signum() == ga.signum() => {
                a = mid;
                ga = gm;
                at_b = Err(err);
            }
            other => {
                b = mid;
                at_b = other;
            }
        }
    }
    let mut gb = at_b?;
    if gb == 0.0 {
        return Ok(b);
    }
    if gb.signum() == ga.signum() {
        return Err(StateError::Bracket { alpha_n, rate, dt });
    }
    // Illinois variant of regula falsi.
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * gb - b * ga) / (gb - ga);
        let c = if c.is_finite() && c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
        let gc = g(c)?;
        let tol = 1e-12 * c.abs().max(1.0);
        if gc == 0.0 || (b - a).abs() <= tol {
            return Ok(c);
        }
        if gc.signum() == gb.signum() {
            b = c;
            gb = gc;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            ga = gc;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        }
        if (b - a).abs() <= tol {
            return Ok(if ga.abs() < gb.abs() { a } else { b });
        }
    }
    Err(StateError::NotConverged { alpha_n })
}

/// Integrates every node independently from `alpha0` under the slip rates
/// `rates[n][node]` (entry 0 unused).
pub fn integrate_state_rates(
    law: &dyn FrictionLaw,
    alpha0: &[f64],
    rates: &[Vec<f64>],
    grid: TimeGrid,
) -> Result<StateTrajectory, StateError> {
    if rates.len() != grid.steps + 1 {
        return Err(StateError::InvalidInput(format!("{} rate entries for {} steps", rates.len(), grid.steps)));
    }
    let nodes = alpha0.len();
    let per_node = |node: usize| -> Result<Vec<f64>, StateError> {
        let mut history = Vec::with_capacity(grid.steps + 1);
        let mut a = alpha0[node];
        history.push(a);
        for n in 0..grid.steps {
            a = implicit_euler_step(law, a, rates[n + 1][node], grid.dt).map_err(|e| StateError::AtNode {
                node,
                step: grid.start_step + n + 1,
                source: Box::new(e),
            })?;
            history.push(a);
        }
        Ok(history)
    };
    let columns: Vec<Vec<f64>> = (0..nodes).into_par_iter().map(per_node).collect::<Result<_, _>>()?;
    let alpha = (0..=grid.steps).map(|n| columns.iter().map(|c| c[n]).collect()).collect();
    Ok(StateTrajectory { grid, times: grid.times(), alpha })
}

/// The discrete solution operator: integrates the state driven by the nodal
/// tangential speeds of `rates`.
pub fn integrate_state(
    law: &dyn FrictionLaw,
    alpha0: &[f64],
    rates: &RateTrajectory,
    contact: &ContactMap,
) -> Result<StateTrajectory, StateError> {
    if alpha0.len() != contact.len() {
        return Err(StateError::InvalidInput(format!("{} initial states for {} contact nodes", alpha0.len(), contact.len())));
    }
    let slip: Vec<Vec<f64>> = rates.velocities.iter().map(|v| contact.slip_rates(v)).collect();
    integrate_state_rates(law, alpha0, &slip, rates.grid)
}

/// `log(r*/r)`, the state at which constant sliding at `r` is stationary.
pub fn steady_state_alpha(params: &RateStateParams, rate: f64) -> Result<f64, StateError> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(StateError::InvalidInput(format!("steady state needs a positive rate, got {rate}")));
    }
    Ok((params.r_star / rate).ln())
}

/// Exact ageing-law state after time `t` at constant rate `r` from `alpha0`.
/// With `θ = e^α`: `θ̇ = (r* − rθ)/L`.
pub fn ageing_closed_form(params: &RateStateParams, alpha0: f64, rate: f64, t: f64) -> f64 {
    let theta0 = alpha0.exp();
    if rate == 0.0 {
        (theta0 + params.r_star * t / params.l_dc).ln()
    } else {
        let ss = params.r_star / rate;
        (ss + (theta0 - ss) * (-rate * t / params.l_dc).exp()).ln()
    }
}
