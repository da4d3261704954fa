use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;

use rsf_core::cli::{slab_driven, Scenario};
use rsf_core::fem::{assemble, build_mesh_rect, quadratic_form, spmv, AssembledOperators, Lame, MaterialParams, SideTags};
use rsf_core::friction::{AgeingLaw, FrictionContext, FrictionVariant, RateStateParams};
use rsf_core::rate::{ExternalLoad, LoadProfile, RateProblem, RateProblemConfig, TimeGrid};
use rsf_core::state::StateTrajectory;

fn law(b: f64) -> AgeingLaw {
    AgeingLaw::new(FrictionVariant::Regularized, RateStateParams::new(0.01, b, 0.6, 1e-3, 0.01).unwrap()).unwrap()
}

fn coarse_ops() -> AssembledOperators {
    let mesh = build_mesh_rect(1.0, 0.5, 4, 2, &SideTags::slab()).unwrap();
    let material = MaterialParams {
        rho: 1.0,
        viscosity: Lame { lambda: 0.05, mu: 0.05 },
        elasticity: Lame { lambda: 1.0, mu: 1.0 },
    };
    assemble(&mesh, &material).unwrap()
}

fn dense(m: &CsrMatrix<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, j, v) in m.triplet_iter() {
        d[(i, j)] = *v;
    }
    d
}

#[test]
fn zero_load_from_rest_stays_at_rest() {
    let ops = coarse_ops();
    let l = law(0.015);
    let rp = RateProblem::new(&ops, &l, FrictionContext { sigma_n_bar: 1.0, cohesion: 0.0 }, RateProblemConfig::new(0.01)).unwrap();
    let load = ExternalLoad::new(&ops, LoadProfile::Zero);
    let grid = TimeGrid::new(0, 20, 0.01);
    let n = ops.n_free();
    let alpha = StateTrajectory::constant(grid, &vec![0.3; ops.contact.len()]);
    let traj = rp.solve_window(&alpha, &vec![0.0; n], &vec![0.0; n], &load, grid).unwrap();
    assert!(traj.velocities.iter().chain(&traj.displacements).flatten().all(|&x| x == 0.0));
}

#[test]
fn frictionless_step_matches_linear_solve() {
    let ops = coarse_ops();
    let l = law(0.015);
    let dt = 0.01;
    let rp = RateProblem::new(&ops, &l, FrictionContext { sigma_n_bar: 0.0, cohesion: 0.0 }, RateProblemConfig::new(dt)).unwrap();
    let n = ops.n_free();
    let u: Vec<f64> = (0..n).map(|i| 0.01 * ((i * 7) % 5) as f64).collect();
    let v: Vec<f64> = (0..n).map(|i| 0.02 * ((i * 3) % 4) as f64 - 0.03).collect();
    let f: Vec<f64> = (0..n).map(|i| ((i % 3) as f64 - 1.0) * 0.5).collect();
    let step = rp.solve_time_step(&vec![0.0; ops.contact.len()], &u, &v, &f).unwrap();
    let q = dense(&ops.mass) / dt + dense(&ops.viscosity) + dense(&ops.elasticity) * dt;
    let rhs = dense(&ops.mass) * DVector::from_vec(v.clone()) / dt + DVector::from_vec(f) - dense(&ops.elasticity) * DVector::from_vec(u);
    let exact = q.lu().solve(&rhs).unwrap();
    let scale = exact.amax();
    for (x, y) in step.velocity.iter().zip(exact.iter()) {
        assert!((x - y).abs() <= 1e-9 * scale, "{x} vs {y}");
    }
}

#[test]
fn converged_step_is_a_fixed_point_of_the_sweep() {
    let ops = coarse_ops();
    let l = law(0.015);
    let rp = RateProblem::new(&ops, &l, FrictionContext { sigma_n_bar: 0.05, cohesion: 0.01 }, RateProblemConfig::new(0.01)).unwrap();
    let n = ops.n_free();
    let f = vec![0.3; n];
    let zeros = vec![0.0; n];
    let alpha = vec![0.5; ops.contact.len()];
    let step = rp.solve_time_step(&alpha, &zeros, &zeros, &f).unwrap();
    let rhs = rp.rhs(&zeros, &zeros, &f);
    let mut again = step.velocity.clone();
    rp.gauss_seidel_sweep(&mut again, &rhs, &alpha).unwrap();
    let scale = step.velocity.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for (a, b) in again.iter().zip(&step.velocity) {
        assert!((a - b).abs() <= 1e-10 * scale);
    }
    assert!(rp.stationarity_residual(&step.velocity, &rhs, &alpha).unwrap() <= 1e-12);
}

#[test]
fn state_is_irrelevant_without_state_effect() {
    let ops = coarse_ops();
    let l = law(0.0);
    let rp = RateProblem::new(&ops, &l, FrictionContext { sigma_n_bar: 0.05, cohesion: 0.0 }, RateProblemConfig::new(0.01)).unwrap();
    let load = ExternalLoad::new(&ops, LoadProfile::Ramp { amplitude: [0.2, 0.0], ramp_time: 0.1 });
    let grid = TimeGrid::new(0, 15, 0.01);
    let n = ops.n_free();
    let nodes = ops.contact.len();
    let a = StateTrajectory::constant(grid, &vec![-2.0; nodes]);
    let mut b = StateTrajectory::constant(grid, &vec![3.0; nodes]);
    b.alpha[7][1] = 9.0;
    let v0 = vec![0.01; n];
    let ta = rp.solve_window(&a, &vec![0.0; n], &v0, &load, grid).unwrap();
    let tb = rp.solve_window(&b, &vec![0.0; n], &v0, &load, grid).unwrap();
    assert_eq!(ta, tb);
}

#[test]
fn window_solve_is_deterministic() {
    let cfg = slab_driven();
    let sc = Scenario::build(&cfg).unwrap();
    let rp = RateProblem::new(&sc.ops, &sc.law, sc.ctx, cfg.rate).unwrap();
    let grid = TimeGrid::new(0, 10, cfg.rate.dt);
    let alpha = StateTrajectory::constant(grid, &sc.init.alpha0);
    let first = rp.solve_window(&alpha, &sc.init.u0, &sc.init.v0, &sc.load, grid).unwrap();
    let second = rp.solve_window(&alpha, &sc.init.u0, &sc.init.v0, &sc.load, grid).unwrap();
    for (x, y) in first.velocities.iter().flatten().zip(second.velocities.iter().flatten()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

/// Lowest generalized eigenvector of `(B, M)` with `M` positive definite.
fn eigenmode(b: &DMatrix<f64>, m: &DMatrix<f64>) -> DVector<f64> {
    let l = m.clone().cholesky().unwrap().l();
    let linv = l.clone().try_inverse().unwrap();
    let c = &linv * b * linv.transpose();
    let eig = ((&c + c.transpose()) * 0.5).symmetric_eigen();
    let k = (0..eig.eigenvalues.len()).min_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j])).unwrap();
    linv.transpose() * eig.eigenvectors.column(k)
}

#[test]
fn frictionless_eigenmode_energy_is_nonincreasing() {
    let ops = coarse_ops();
    let l = law(0.0);
    let dt = 0.02;
    let rp = RateProblem::new(&ops, &l, FrictionContext { sigma_n_bar: 0.0, cohesion: 0.0 }, RateProblemConfig::new(dt)).unwrap();
    let load = ExternalLoad::new(&ops, LoadProfile::Zero);
    let grid = TimeGrid::new(0, 200, dt);
    let n = ops.n_free();
    let u0: Vec<f64> = eigenmode(&dense(&ops.elasticity), &dense(&ops.mass)).iter().map(|x| 0.1 * x).collect();
    let alpha = StateTrajectory::constant(grid, &vec![0.0; ops.contact.len()]);
    let traj = rp.solve_window(&alpha, &u0, &vec![0.0; n], &load, grid).unwrap();
    let energy = |k: usize| 0.5 * quadratic_form(&ops.mass, &traj.velocities[k]) + 0.5 * quadratic_form(&ops.elasticity, &traj.displacements[k]);
    let e0 = energy(0);
    assert!(e0 > 0.0);
    for k in 1..=grid.steps {
        assert!(energy(k) <= energy(k - 1) * (1.0 + 1e-12), "step {k}: {} > {}", energy(k), energy(k - 1));
    }
    assert!(energy(grid.steps) < 0.5 * e0, "viscous damping should dissipate the mode");
    // The mode oscillates: the velocity changes sign along the trajectory.
    let probe: Vec<f64> = traj.velocities.iter().map(|v| spmv(&ops.mass, v).iter().zip(&u0).map(|(a, b)| a * b).sum()).collect();
    assert!(probe.iter().any(|&p| p > 0.0) && probe.iter().any(|&p| p < 0.0));
}
