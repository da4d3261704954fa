use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use super::config::{Scenario, ScenarioConfig};
use super::output::{write_contact_csv, write_json, write_reports, write_state_csv, write_trajectory_csv};
use super::CliError;
use crate::coupled::{window_steps, CoupledError, CoupledProblem, InitialData, StudyRow};
use crate::friction::{asinh_log_inequality, validate_assumptions, FrictionLaw, FrictionVariant, WithoutSource};
use crate::rate::{energy_balance, stick_slip_check, vi_residual_check, RateError, RateProblem, RateTrajectory, TimeGrid};
use crate::state::{ageing_closed_form, implicit_euler_step, integrate_state_rates, steady_state_alpha, StateTrajectory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_RATE: i32 = 2;
pub const EXIT_STATE: i32 = 3;
pub const EXIT_FIXED_POINT: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Cli(#[from] CliError),
    #[error(transparent)]
    Coupled(#[from] CoupledError),
    #[error("rate solver: {0}")]
    Rate(#[from] RateError),
    #[error("state solver: {0}")]
    State(#[from] crate::state::StateError),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Cli(CliError::Io(_)) => EXIT_IO,
            CommandError::Cli(_) => EXIT_FAILURE,
            CommandError::Coupled(CoupledError::Rate { .. }) | CommandError::Rate(_) => EXIT_RATE,
            CommandError::Coupled(CoupledError::State { .. }) | CommandError::State(_) => EXIT_STATE,
            CommandError::Coupled(CoupledError::FixedPoint { .. }) => EXIT_FIXED_POINT,
            CommandError::Coupled(_) => EXIT_FAILURE,
        }
    }
}

/// Files written by `run`.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutputs {
    pub trajectory: PathBuf,
    pub contact: PathBuf,
    pub state: PathBuf,
    pub reports: Vec<PathBuf>,
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

/// Runs the coupled simulation and writes the CSV and JSON outputs.
pub fn cmd_run(cfg: &ScenarioConfig) -> Result<RunOutputs, CommandError> {
    let sc = Scenario::build(cfg)?;
    let rp = RateProblem::new(&sc.ops, &sc.law, sc.ctx, cfg.rate)?;
    let cp = CoupledProblem::new(&rp, &sc.load)?;
    let sim = cp.run_simulation(&sc.init, &cfg.coupled)?;
    let dir = &cfg.output.dir;
    prepare_dir(dir)?;
    let out = RunOutputs {
        trajectory: dir.join("trajectory.csv"),
        contact: dir.join("contact.csv"),
        state: dir.join("state.csv"),
        reports: (0..sim.reports.len()).map(|k| dir.join(format!("contraction_window_{k:03}.json"))).collect(),
    };
    write_trajectory_csv(&out.trajectory, &sc.mesh, &sim.rate)?;
    write_contact_csv(&out.contact, &rp, &sim.rate, &sc.load)?;
    write_state_csv(&out.state, &rp, &sim.rate, &sim.state)?;
    write_reports(dir, &sim.reports)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Friction,
    Ode,
    Vi,
    Lipschitz,
    Contraction,
    All,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "friction" => Suite::Friction,
            "ode" => Suite::Ode,
            "vi" => Suite::Vi,
            "lipschitz" => Suite::Lipschitz,
            "contraction" => Suite::Contraction,
            "all" => Suite::All,
            other => return Err(format!("unknown suite `{other}` (friction|ode|vi|lipschitz|contraction|all)")),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub details: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub mesh: String,
    pub checks: Vec<CheckResult>,
}

fn check(suite: &'static str, name: impl Into<String>, passed: bool, details: Value) -> CheckResult {
    CheckResult { suite, name: name.into(), passed, details }
}

/// Max-norm errors of backward Euler against the exact ageing solution,
/// halving `dt` from `horizon/base_steps` `halvings` times.
pub fn ageing_order_errors(
    law: &dyn FrictionLaw,
    params: &crate::friction::RateStateParams,
    alpha0: f64,
    rate: f64,
    horizon: f64,
    base_steps: usize,
    halvings: usize,
) -> Result<Vec<f64>, crate::state::StateError> {
    (0..=halvings)
        .map(|k| {
            let steps = base_steps << k;
            let dt = horizon / steps as f64;
            let mut a = alpha0;
            let mut worst: f64 = 0.0;
            for n in 1..=steps {
                a = implicit_euler_step(law, a, rate, dt)?;
                worst = worst.max((a - ageing_closed_form(params, alpha0, rate, n as f64 * dt)).abs());
            }
            Ok(worst)
        })
        .collect()
}

fn friction_suite(cfg: &ScenarioConfig, out: &mut Vec<CheckResult>) {
    let p = cfg.friction.params;
    for variant in [FrictionVariant::Regularized, FrictionVariant::Truncated] {
        let name = format!("assumptions_{}", serde_json::to_value(variant).unwrap().as_str().unwrap_or("law"));
        match validate_assumptions(variant, &p, cfg.verify.friction_samples, cfg.rng_seed) {
            Ok(report) => out.push(check("friction", name, report.passed(), serde_json::to_value(&report).unwrap())),
            Err(e) => out.push(check("friction", name, false, json!({ "error": e.to_string() }))),
        }
    }
    let (worst, witness) = asinh_log_inequality(cfg.verify.friction_samples, 12.0, cfg.rng_seed);
    out.push(check(
        "friction",
        "asinh_log_inequality",
        worst <= 1e-12,
        json!({ "max_violation": worst, "witness": witness }),
    ));
}

fn ode_suite(sc: &Scenario, out: &mut Vec<CheckResult>) -> Result<(), CommandError> {
    let p = sc.law.params;
    let time_scale = p.l_dc / p.r_star;
    let cases = [("constant_rate", 1.0, p.r_star * std::f64::consts::E, 3.0 / std::f64::consts::E), ("zero_rate", 0.0, 0.0, 10.0)];
    for (name, alpha0, rate, horizon_scale) in cases {
        let errors = ageing_order_errors(&sc.law, &p, alpha0, rate, horizon_scale * time_scale, 40, 4)?;
        let factors: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
        let passed = factors.iter().all(|f| (1.8..=2.2).contains(f));
        out.push(check("ode", format!("order_{name}"), passed, json!({ "errors": errors, "factors": factors })));
    }
    // Steady state under constant sliding at every contact node.
    let rate = 5.0 * p.r_star;
    let target = steady_state_alpha(&p, rate)?;
    let nodes = sc.ops.contact.len().max(1);
    let dt = p.l_dc / rate / 10.0;
    let grid = TimeGrid::new(0, 500, dt);
    let alpha0: Vec<f64> = (0..nodes).map(|k| -2.0 + 5.0 * k as f64 / nodes as f64).collect();
    let traj = integrate_state_rates(&sc.law, &alpha0, &vec![vec![rate; nodes]; grid.steps + 1], grid)?;
    let worst = traj.final_state().iter().map(|a| (a - target).abs()).fold(0.0, f64::max);
    out.push(check(
        "ode",
        "steady_state",
        worst <= 1e-6,
        json!({ "rate": rate, "horizon": grid.length(), "target": target, "max_error": worst }),
    ));
    Ok(())
}

fn vi_suite(cfg: &ScenarioConfig, rp: &RateProblem<'_>, cp: &CoupledProblem<'_>, init: &InitialData, out: &mut Vec<CheckResult>) -> Result<(), CommandError> {
    let sim = cp.run_simulation(init, &cfg.coupled)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let k = cfg.verify.vi_directions;
    let vi = vi_residual_check(rp, &sim.rate, &sim.state, cp.load(), |_, v| random_tests(&mut rng, v, k))?;
    out.push(check(
        "vi",
        "vi_residual",
        vi.worst_relative >= -1e-8,
        json!({ "worst_relative_slack": vi.worst_relative, "worst_slack": vi.worst_slack, "worst_step": vi.worst_step, "evaluations": vi.evaluations }),
    ));
    let energy = energy_balance(rp, &sim.rate, cp.load());
    out.push(check("vi", "energy_estimate", energy.worst_excess <= 1e-9, json!({ "worst_relative_excess": energy.worst_excess })));
    let ss = stick_slip_check(rp, &sim.rate, &sim.state, cp.load())?;
    let stick_ok = ss.stick_count == 0 || ss.worst_stick_excess <= 1e-8;
    out.push(check(
        "vi",
        "stick_slip_dichotomy",
        stick_ok && ss.worst_slip_imbalance <= 1e-8,
        json!({ "stick_nodes": ss.stick_count, "slip_nodes": ss.slip_count, "worst_stick_excess": if ss.stick_count == 0 { 0.0 } else { ss.worst_stick_excess }, "worst_slip_imbalance": ss.worst_slip_imbalance }),
    ));
    Ok(())
}

/// Random test vectors around `v` spanning several magnitudes.
pub fn random_tests(rng: &mut ChaCha8Rng, v: &[f64], count: usize) -> Vec<Vec<f64>> {
    let base = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-3);
    (0..count)
        .map(|_| {
            let scale = base * 10f64.powf(rng.random_range(-3.0..1.0));
            v.iter().map(|x| x + scale * rng.random_range(-1.0..1.0)).collect()
        })
        .collect()
}

/// A state trajectory `α0 + δ` with independent uniform perturbations of
/// amplitude `amp` after the initial entry.
pub fn perturbed_state(rng: &mut ChaCha8Rng, grid: TimeGrid, alpha0: &[f64], amp: f64) -> StateTrajectory {
    let mut s = StateTrajectory::constant(grid, alpha0);
    for row in s.alpha.iter_mut().skip(1) {
        for a in row.iter_mut() {
            *a += amp * rng.random_range(-1.0..1.0);
        }
    }
    s
}

fn perturbed_rate(rng: &mut ChaCha8Rng, traj: &RateTrajectory, rel: f64) -> RateTrajectory {
    let mut t = traj.clone();
    let scale = rel * traj.velocities.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-6);
    for row in t.velocities.iter_mut().skip(1) {
        for x in row.iter_mut() {
            *x += scale * rng.random_range(-1.0..1.0);
        }
    }
    t
}

fn lipschitz_suite(cfg: &ScenarioConfig, sc: &Scenario, cp: &CoupledProblem<'_>, out: &mut Vec<CheckResult>) -> Result<(), CommandError> {
    let steps = window_steps(cfg.coupled.window_length, cfg.rate.dt)?;
    let grid = TimeGrid::new(0, steps, cfg.rate.dt);
    let init = &sc.init;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ 0x11);
    let amp = cfg.verify.perturbation;
    let (mut r_ok, mut s_ok) = (true, true);
    let (mut r_rows, mut s_rows) = (Vec::new(), Vec::new());
    for _ in 0..cfg.verify.lipschitz_pairs {
        let a = perturbed_state(&mut rng, grid, &init.alpha0, amp);
        let b = perturbed_state(&mut rng, grid, &init.alpha0, amp);
        let r = cp.verify_lipschitz_r(&a, &b, &init.u0, &init.v0, 0.05)?;
        r_ok &= r.passed;
        r_rows.push(r);
        let v = cp.apply_r(&a, &init.u0, &init.v0, grid)?;
        let w = perturbed_rate(&mut rng, &v, 0.1);
        let s = cp.verify_lipschitz_s(&v, &w, &init.alpha0, 0.05)?;
        s_ok &= s.passed;
        s_rows.push(s);
    }
    out.push(check("lipschitz", "lipschitz_R", r_ok, serde_json::to_value(&r_rows).unwrap()));
    out.push(check("lipschitz", "lipschitz_S", s_ok, serde_json::to_value(&s_rows).unwrap()));

    // Decoupled limits: b = 0 makes R constant, f ≡ 0 makes S constant.
    let frozen_mu = sc.law.without_state_effect();
    let rp0 = RateProblem::new(&sc.ops, &frozen_mu, sc.ctx, cfg.rate)?;
    let cp0 = CoupledProblem::with_constants(&rp0, cp.load(), cp.constants().clone());
    let a = perturbed_state(&mut rng, grid, &init.alpha0, amp);
    let b = perturbed_state(&mut rng, grid, &init.alpha0, amp);
    let r0 = cp0.verify_lipschitz_r(&a, &b, &init.u0, &init.v0, 0.05)?;
    out.push(check("lipschitz", "R_difference_without_state_effect", r0.lhs == 0.0, serde_json::to_value(r0).unwrap()));
    let no_source = WithoutSource(sc.law);
    let rp1 = RateProblem::new(&sc.ops, &no_source, sc.ctx, cfg.rate)?;
    let cp1 = CoupledProblem::with_constants(&rp1, cp.load(), cp.constants().clone());
    let v = cp.apply_r(&a, &init.u0, &init.v0, grid)?;
    let w = cp.apply_r(&b, &init.u0, &init.v0, grid)?;
    let s0 = cp1.verify_lipschitz_s(&v, &w, &init.alpha0, 0.05)?;
    out.push(check("lipschitz", "S_difference_without_source", s0.lhs == 0.0, serde_json::to_value(s0).unwrap()));
    Ok(())
}

/// Acceptance conditions on a contraction table.
pub fn assess_study(rows: &[StudyRow]) -> (bool, Value) {
    let halving_pairs: Vec<bool> = rows
        .windows(2)
        .filter(|w| w[1].steps * 2 == w[0].steps)
        .map(|w| w[1].theoretical_l_rs == w[0].theoretical_l_rs / 2.0)
        .collect();
    let halving = halving_pairs.iter().all(|&b| b);
    let bounded = rows.iter().filter(|r| r.theoretical_l_rs < 1.0).all(|r| r.max_ratio <= r.theoretical_l_rs * 1.05);
    let smallest = rows.iter().min_by(|a, b| a.window_length.total_cmp(&b.window_length));
    let converged = smallest.is_some_and(|r| r.converged);
    let mut sorted: Vec<&StudyRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.window_length.total_cmp(&b.window_length));
    let monotone = sorted.windows(2).all(|w| w[0].max_ratio <= w[1].max_ratio * 1.05 + 1e-12);
    (
        halving && bounded && converged,
        json!({
            "rows": rows,
            "exact_halving": halving,
            "ratios_within_bound": bounded,
            "smallest_window_converged": converged,
            "monotone_trend": monotone,
        }),
    )
}

fn contraction_suite(cfg: &ScenarioConfig, cp: &CoupledProblem<'_>, init: &InitialData, out: &mut Vec<CheckResult>) -> Result<(), CommandError> {
    let study = cp.contraction_study(init, &cfg.contraction_windows(), &cfg.coupled)?;
    let (passed, details) = assess_study(&study.rows);
    out.push(check("contraction", "contraction_study", passed, details));
    Ok(())
}

/// Runs the selected suites; the report passes iff every check does.
pub fn cmd_verify(cfg: &ScenarioConfig, suite: Suite) -> Result<VerifyReport, CommandError> {
    let sc = Scenario::build(cfg)?;
    let rp = RateProblem::new(&sc.ops, &sc.law, sc.ctx, cfg.rate)?;
    let cp = CoupledProblem::new(&rp, &sc.load)?;
    let mut checks = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Friction {
        friction_suite(cfg, &mut checks);
    }
    if all || suite == Suite::Ode {
        ode_suite(&sc, &mut checks)?;
    }
    if all || suite == Suite::Vi {
        vi_suite(cfg, &rp, &cp, &sc.init, &mut checks)?;
    }
    if all || suite == Suite::Lipschitz {
        lipschitz_suite(cfg, &sc, &cp, &mut checks)?;
    }
    if all || suite == Suite::Contraction {
        contraction_suite(cfg, &cp, &sc.init, &mut checks)?;
    }
    Ok(VerifyReport { passed: checks.iter().all(|c| c.passed), mesh: sc.ops.mesh_label.clone(), checks })
}

/// Contraction table for explicit window lengths; reports go to the output
/// directory as `study_window_XXX.json`.
pub fn cmd_contract_study(cfg: &ScenarioConfig, windows: &[f64]) -> Result<Vec<StudyRow>, CommandError> {
    for &w in windows {
        window_steps(w, cfg.rate.dt).map_err(|e| CliError::Config { key: "--windows".into(), reason: e.to_string() })?;
    }
    let sc = Scenario::build(cfg)?;
    let rp = RateProblem::new(&sc.ops, &sc.law, sc.ctx, cfg.rate)?;
    let cp = CoupledProblem::new(&rp, &sc.load)?;
    let study = cp.contraction_study(&sc.init, windows, &cfg.coupled)?;
    let dir = &cfg.output.dir;
    prepare_dir(dir)?;
    for (k, report) in study.reports.iter().enumerate() {
        write_json(&dir.join(format!("study_window_{k:03}.json")), report)?;
    }
    Ok(study.rows)
}
