//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rsf_core::cli::{single_dof, slab_driven, stick, Scenario, ScenarioConfig};
use rsf_core::coupled::{norm_cx, CoupledConfig, CoupledProblem};
use rsf_core::fem::spmv;
use rsf_core::friction::{asinh_nonneg, mu, FrictionLaw, FrictionVariant, RateStateParams, WithoutSource};
use rsf_core::rate::{vi_residual_check, RateProblem, TimeGrid};
use rsf_core::state::{implicit_euler_step, integrate_state_rates, StateTrajectory};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn lab() -> RateStateParams {
    RateStateParams { a: 0.01, b: 0.015, mu_star: 0.6, r_star: 1e-3, l_dc: 0.01 }
}

// Reference formulas written out independently of the library.

fn ref_r_min(p: &RateStateParams, alpha: f64) -> f64 {
    p.r_star * (-(p.mu_star + p.b * alpha) / p.a).exp()
}

fn ref_mu(variant: FrictionVariant, p: &RateStateParams, r: f64, alpha: f64) -> f64 {
    let rm = ref_r_min(p, alpha);
    match variant {
        FrictionVariant::Regularized => p.a * (r / (2.0 * rm)).asinh(),
        FrictionVariant::Truncated => {
            if r <= rm {
                0.0
            } else {
                p.a * (r / rm).ln()
            }
        }
    }
}

/// θ = e^α solves θ' = (r* − rθ)/L exactly.
fn ref_ageing(p: &RateStateParams, alpha0: f64, r: f64, t: f64) -> f64 {
    let theta0 = alpha0.exp();
    let theta = if r == 0.0 {
        theta0 + p.r_star * t / p.l_dc
    } else {
        let ss = p.r_star / r;
        ss + (theta0 - ss) * (-r * t / p.l_dc).exp()
    };
    theta.ln()
}

fn rel_excess(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs) / rhs.abs().max(lhs.abs()).max(1e-300)
}

fn criterion_1() -> Outcome {
    let p = lab();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut worst_ref: f64 = 0.0;
    let mut errors = 0usize;
    let sample_rate = |rng: &mut ChaCha8Rng| {
        // Half uniform, half log-uniform so the small-rate regime is covered.
        if rng.random_bool(0.5) {
            rng.random_range(0.0..=1e3 * p.r_star)
        } else {
            1e3 * p.r_star * 10f64.powf(rng.random_range(-12.0..0.0))
        }
    };
    for variant in [FrictionVariant::Regularized, FrictionVariant::Truncated] {
        for _ in 0..10_000 {
            let (r1, r2) = (sample_rate(&mut rng), sample_rate(&mut rng));
            let (lo, hi) = (r1.min(r2), r1.max(r2));
            let a1 = rng.random_range(-20.0..=20.0);
            let a2 = rng.random_range(-20.0..=20.0);
            let (Ok(m_lo), Ok(m_hi), Ok(m_a2), Ok(mt), Ok(mr)) = (
                mu(variant, &p, lo, a1),
                mu(variant, &p, hi, a1),
                mu(variant, &p, lo, a2),
                mu(FrictionVariant::Truncated, &p, lo, a1),
                mu(FrictionVariant::Regularized, &p, lo, a1),
            ) else {
                errors += 1;
                continue;
            };
            worst_ref = worst_ref.max((m_lo - ref_mu(variant, &p, lo, a1)).abs() / m_lo.abs().max(1e-3));
            // Nonnegativity, monotonicity in r, α-Lipschitz with constant b.
            worst = worst.max(-m_lo / m_lo.abs().max(1.0));
            worst = worst.max(rel_excess(m_lo, m_hi));
            let lip = p.b * (a1 - a2).abs();
            worst = worst.max(((m_lo - m_a2).abs() - lip) / lip.max(m_lo.abs()).max(1e-300));
            // Growth bounds.
            worst = worst.max(rel_excess(mt, p.a * lo / p.r_star + p.mu_star + p.b * a1.abs()));
            worst = worst.max(rel_excess(mr, p.a * std::f64::consts::LN_2 + mt));
        }
    }
    let passed = errors == 0 && worst <= 1e-10 && worst_ref <= 1e-10;
    outcome(
        passed,
        format!("worst relative excess {worst:.3e}, worst deviation from reference {worst_ref:.3e}, evaluation errors {errors}"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let x = 10f64.powf(rng.random_range(-6.0..6.0));
        let y = 10f64.powf(rng.random_range(-6.0..6.0));
        let bound = (x.ln() - y.ln()).abs();
        for d in [(x.asinh() - y.asinh()).abs(), (asinh_nonneg(x) - asinh_nonneg(y)).abs()] {
            worst = worst.max(d - bound);
        }
    }
    outcome(worst <= 1e-12, format!("max(|asinh x − asinh y| − |log x − log y|) = {worst:.3e}"))
}

fn criterion_3() -> Outcome {
    let p = lab();
    let law = rsf_core::friction::AgeingLaw::new(FrictionVariant::Regularized, p).unwrap();
    let time_scale = p.l_dc / p.r_star;
    let cases = [
        ("constant rate", 1.0, std::f64::consts::E * p.r_star, 3.0 / std::f64::consts::E * time_scale),
        ("zero rate", 0.0, 0.0, 10.0 * time_scale),
    ];
    let mut passed = true;
    let mut detail = Vec::new();
    for (name, alpha0, r, horizon) in cases {
        let mut errors = Vec::new();
        for k in 0..5 {
            let steps = 40usize << k;
            let dt = horizon / steps as f64;
            let mut a = alpha0;
            let mut worst: f64 = 0.0;
            for n in 1..=steps {
                a = match implicit_euler_step(&law, a, r, dt) {
                    Ok(a) => a,
                    Err(e) => return outcome(false, format!("{name}: {e}")),
                };
                worst = worst.max((a - ref_ageing(&p, alpha0, r, n as f64 * dt)).abs());
            }
            errors.push(worst);
        }
        let factors: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
        passed &= factors.iter().all(|f| (1.8..=2.2).contains(f));
        detail.push(format!("{name} factors {}", fmt_list(&factors)));
    }
    outcome(passed, detail.join("; "))
}

fn criterion_4() -> Outcome {
    let p = lab();
    let law = rsf_core::friction::AgeingLaw::new(FrictionVariant::Regularized, p).unwrap();
    let nodes = 21;
    let alpha0: Vec<f64> = (0..nodes).map(|k| -5.0 + 0.5 * k as f64).collect();
    let mut worst: f64 = 0.0;
    for r in [1e-2 * p.r_star, p.r_star, 5.0 * p.r_star, 1e2 * p.r_star] {
        let horizon = 50.0 * p.l_dc / r;
        let grid = TimeGrid::new(0, 1000, horizon / 1000.0);
        let rates = vec![vec![r; nodes]; grid.steps + 1];
        let traj = match integrate_state_rates(&law, &alpha0, &rates, grid) {
            Ok(t) => t,
            Err(e) => return outcome(false, e.to_string()),
        };
        let target = (p.r_star / r).ln();
        worst = worst.max(traj.final_state().iter().map(|a| (a - target).abs()).fold(0.0, f64::max));
    }
    outcome(worst <= 1e-6, format!("max |α − log(r*/r)| = {worst:.3e} over 4 rates, {nodes} nodes"))
}

fn criterion_5() -> Outcome {
    let cfg = single_dof();
    let sc = Scenario::build(&cfg).unwrap();
    if sc.ops.n_free() != 1 {
        return outcome(false, format!("preset has {} free dofs", sc.ops.n_free()));
    }
    let rp = RateProblem::new(&sc.ops, &sc.law, sc.ctx, cfg.rate).unwrap();
    let p = sc.law.params;
    let ctx = sc.ctx;
    let dt = cfg.rate.dt;
    let entry = |m: &nalgebra_sparse::CsrMatrix<f64>| spmv(m, &[1.0])[0];
    let (m, a, b) = (entry(&sc.ops.mass), entry(&sc.ops.viscosity), entry(&sc.ops.elasticity));
    let q = m / dt + a + dt * b;
    let node = sc.ops.contact.dofs.iter().position(|d| *d == Some(0)).expect("free dof is a contact dof");
    let w = sc.ops.contact.trace_weights[node];
    let traction = |r: f64, alpha: f64| ref_mu(FrictionVariant::Truncated, &p, r, alpha) * ctx.sigma_n_bar + ctx.cohesion;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut sticks = 0;
    for _ in 0..100 {
        let alpha = rng.random_range(-5.0..5.0);
        let alphas = vec![alpha; sc.ops.contact.len()];
        let scale = 10f64.powf(rng.random_range(-4.0..0.5));
        let u_n = scale * rng.random_range(-1.0..1.0);
        let v_n = scale * rng.random_range(-1.0..1.0);
        let load = rng.random_range(-3.0..3.0) * scale;
        let rhs = m * v_n / dt + load - b * u_n;

        let phi = |s: f64| integrate_graded(|r| traction(r, alpha), s);
        let j = |x: f64| 0.5 * q * x * x - rhs * x + w * phi(x.abs());
        // D(δ): derivative of J off the origin.
        let d = |x: f64| q * x - rhs + w * traction(x.abs(), alpha).copysign(x);

        let bound = rhs.abs() / q * 1.01 + 1e-12;
        let n = 400;
        let grid_x = |i: usize| -bound + 2.0 * bound * i as f64 / n as f64;
        let best = (0..=n).min_by(|&i, &k| j(grid_x(i)).total_cmp(&j(grid_x(k)))).unwrap();
        let (mut lo, mut hi) = (grid_x(best.saturating_sub(1)), grid_x((best + 1).min(n)));
        golden_section(&j, &mut lo, &mut hi, 1e-6 * bound);
        let oracle = if rhs.abs() <= w * traction(0.0, alpha) {
            sticks += 1;
            0.0
        } else {
            // The minimizer has the sign of rhs; bisect D on that side.
            let s = rhs.signum();
            let (mut a0, mut b0) = (lo.min(hi) - 1e-6 * bound, lo.max(hi) + 1e-6 * bound);
            if s > 0.0 {
                a0 = a0.max(0.0)
            } else {
                b0 = b0.min(0.0)
            }
            bisect(&d, a0, b0)
        };
        let solved = match rp.solve_time_step(&alphas, &[u_n], &[v_n], &[load]) {
            Ok(s) => s.velocity[0],
            Err(e) => return outcome(false, e.to_string()),
        };
        worst = worst.max((solved - oracle).abs());
    }
    outcome(worst <= 1e-8, format!("max |Δv| = {worst:.3e} over 100 draws ({sticks} stick)"))
}

/// ∫₀ˢ f on geometrically graded panels with 5-point Gauss–Legendre.
fn integrate_graded(f: impl Fn(f64) -> f64, s: f64) -> f64 {
    const X: [f64; 5] = [0.0, 0.538_469_310_105_683, -0.538_469_310_105_683, 0.906_179_845_938_664, -0.906_179_845_938_664];
    const W: [f64; 5] = [0.568_888_888_888_889, 0.478_628_670_499_366, 0.478_628_670_499_366, 0.236_926_885_056_189, 0.236_926_885_056_189];
    if s <= 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut hi = s;
    for _ in 0..60 {
        let lo = 0.125 * hi;
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        total += half * X.iter().zip(W).map(|(x, w)| w * f(mid + half * x)).sum::<f64>();
        hi = lo;
    }
    total + hi * f(0.5 * hi)
}

fn golden_section(f: &impl Fn(f64) -> f64, lo: &mut f64, hi: &mut f64, tol: f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (*hi - g * (*hi - *lo), *lo + g * (*hi - *lo));
    let (mut fc, mut fd) = (f(c), f(d));
    while *hi - *lo > tol {
        if fc <= fd {
            *hi = d;
            d = c;
            fd = fc;
            c = *hi - g * (*hi - *lo);
            fc = f(c);
        } else {
            *lo = c;
            c = d;
            fc = fd;
            d = *lo + g * (*hi - *lo);
            fd = f(d);
        }
    }
}

/// Root of an increasing function bracketed by `[lo, hi]`.
fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_6() -> Outcome {
    let cfg = slab_driven();
    if cfg.mesh.nx > 20 || cfg.mesh.ny > 10 {
        return outcome(false, "mesh larger than 20×10");
    }
    let sc = Scenario::build(&cfg).unwrap();
    let rp = RateProblem::new(&sc.ops, &sc.law, sc.ctx, cfg.rate).unwrap();
    let cp = CoupledProblem::new(&rp, &sc.load).unwrap();
    let sim = match cp.run_simulation(&sc.init, &cfg.coupled) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    if sim.rate.grid.steps != 100 {
        return outcome(false, format!("{} steps", sim.rate.grid.steps));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let directions = |_: usize, v: &[f64]| -> Vec<Vec<f64>> {
        let size = v.iter().fold(1e-3f64, |m, x| m.max(x.abs()));
        (0..50)
            .map(|_| {
                let amp = size * 10f64.powf(rng.random_range(-4.0..1.0));
                v.iter().map(|x| x + amp * rng.random_range(-1.0..1.0)).collect()
            })
            .collect()
    };
    match vi_residual_check(&rp, &sim.rate, &sim.state, &sc.load, directions) {
        Ok(vi) => outcome(
            vi.worst_relative >= -1e-8 && vi.evaluations == 100 * 50,
            format!("worst relative slack {:.3e} ({} evaluations)", vi.worst_relative, vi.evaluations),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn coarse_slab() -> ScenarioConfig {
    let mut cfg = slab_driven();
    cfg.mesh.nx = 8;
    cfg.mesh.ny = 4;
    cfg
}

fn random_state(rng: &mut ChaCha8Rng, grid: TimeGrid, alpha0: &[f64], amp: f64) -> StateTrajectory {
    let mut s = StateTrajectory::constant(grid, alpha0);
    for row in s.alpha.iter_mut().skip(1) {
        for a in row.iter_mut() {
            *a += amp * rng.random_range(-1.0..1.0);
        }
    }
    s
}

fn criterion_7() -> Outcome {
    let cfg = coarse_slab();
    let sc = Scenario::build(&cfg).unwrap();
    let rp = RateProblem::new(&sc.ops, &sc.law, sc.ctx, cfg.rate).unwrap();
    let cp = CoupledProblem::new(&rp, &sc.load).unwrap();
    let grid = TimeGrid::new(0, cfg.coupled.window_steps(cfg.rate.dt).unwrap(), cfg.rate.dt);
    let init = &sc.init;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut run = || -> Result<(bool, f64, f64, f64, f64), String> {
        let (mut ok, mut rw, mut sw) = (true, 0.0f64, 0.0f64);
        for _ in 0..20 {
            let a = random_state(&mut rng, grid, &init.alpha0, 0.5);
            let b = random_state(&mut rng, grid, &init.alpha0, 0.5);
            let r = cp.verify_lipschitz_r(&a, &b, &init.u0, &init.v0, 0.05).map_err(|e| e.to_string())?;
            ok &= r.lhs <= r.rhs * 1.05;
            rw = rw.max(r.lhs / r.rhs);
            let v = cp.apply_r(&a, &init.u0, &init.v0, grid).map_err(|e| e.to_string())?;
            let mut w = v.clone();
            for row in w.velocities.iter_mut().skip(1) {
                for x in row.iter_mut() {
                    *x *= 1.0 + 0.2 * rng.random_range(-1.0..1.0);
                }
            }
            let s = cp.verify_lipschitz_s(&v, &w, &init.alpha0, 0.05).map_err(|e| e.to_string())?;
            ok &= s.lhs <= s.rhs * 1.05 && s.lhs <= s.rhs_v * 1.05;
            sw = sw.max(s.lhs / s.rhs);
        }
        // Decoupled limits.
        let frozen = sc.law.without_state_effect();
        let rp0 = RateProblem::new(&sc.ops, &frozen, sc.ctx, cfg.rate).map_err(|e| e.to_string())?;
        let cp0 = CoupledProblem::with_constants(&rp0, &sc.load, cp.constants().clone());
        let a = random_state(&mut rng, grid, &init.alpha0, 0.5);
        let b = random_state(&mut rng, grid, &init.alpha0, 0.5);
        let r0 = cp0.verify_lipschitz_r(&a, &b, &init.u0, &init.v0, 0.05).map_err(|e| e.to_string())?;
        let sourceless = WithoutSource(sc.law);
        let rp1 = RateProblem::new(&sc.ops, &sourceless, sc.ctx, cfg.rate).map_err(|e| e.to_string())?;
        let cp1 = CoupledProblem::with_constants(&rp1, &sc.load, cp.constants().clone());
        let v = cp.apply_r(&a, &init.u0, &init.v0, grid).map_err(|e| e.to_string())?;
        let w = cp.apply_r(&b, &init.u0, &init.v0, grid).map_err(|e| e.to_string())?;
        let s0 = cp1.verify_lipschitz_s(&v, &w, &init.alpha0, 0.05).map_err(|e| e.to_string())?;
        Ok((ok, rw, sw, r0.lhs, s0.lhs))
    };
    match run() {
        Ok((ok, rw, sw, r0, s0)) => outcome(
            ok && r0 == 0.0 && s0 == 0.0,
            format!("max lhs/rhs R {rw:.3e}, S {sw:.3e}; b = 0 difference {r0:e}; f ≡ 0 difference {s0:e}"),
        ),
        Err(e) => outcome(false, e),
    }
}

fn criterion_8() -> Outcome {
    let cfg = slab_driven();
    let sc = Scenario::build(&cfg).unwrap();
    let rp = RateProblem::new(&sc.ops, &sc.law, sc.ctx, cfg.rate).unwrap();
    let cp = CoupledProblem::new(&rp, &sc.load).unwrap();
    let t0 = cfg.contraction_windows()[0];
    let windows = [t0, t0 / 2.0, t0 / 4.0];
    let fp = CoupledConfig { fp_max_iters: 50, ..cfg.coupled };
    let study = match cp.contraction_study(&sc.init, &windows, &fp) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let rows = &study.rows;
    let halving = rows.windows(2).all(|w| w[1].theoretical_l_rs == 0.5 * w[0].theoretical_l_rs);
    let bounded = rows.iter().filter(|r| r.theoretical_l_rs < 1.0).all(|r| r.max_ratio <= 1.05 * r.theoretical_l_rs);
    let converged = rows.last().is_some_and(|r| r.converged);
    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("T={} L_RS={:.4} ratio={:.3e} it={}", r.window_length, r.theoretical_l_rs, r.max_ratio, r.iterations))
        .collect();
    outcome(
        halving && bounded && converged,
        format!("halving {halving}, bounded {bounded}, smallest converged {converged} [{}]", table.join(", ")),
    )
}

fn criterion_9() -> Outcome {
    let cfg = slab_driven();
    let sc = Scenario::build(&cfg).unwrap();
    let rp = RateProblem::new(&sc.ops, &sc.law, sc.ctx, cfg.rate).unwrap();
    let cp = CoupledProblem::new(&rp, &sc.load).unwrap();
    let weights = &sc.ops.contact.trace_weights;
    let tol = cfg.coupled.fp_tol;
    let dt = cfg.rate.dt;
    let steps = cfg.coupled.window_steps(dt).unwrap();
    let grid = TimeGrid::new(0, steps, dt);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let guess = random_state(&mut rng, grid, &sc.init.alpha0, 2.0);
    let run = || -> Result<(f64, f64), String> {
        let a = cp.fixed_point_window(&sc.init, grid, &cfg.coupled, None, 0).map_err(|e| e.to_string())?;
        let b = cp.fixed_point_window(&sc.init, grid, &cfg.coupled, Some(&guess), 0).map_err(|e| e.to_string())?;
        let uniqueness = norm_cx(&a.state.alpha, &b.state.alpha, weights);
        let two = CoupledConfig { n_windows: 2, ..cfg.coupled };
        let one = CoupledConfig { n_windows: 1, window_length: 2.0 * cfg.coupled.window_length, ..cfg.coupled };
        let s2 = cp.run_simulation(&sc.init, &two).map_err(|e| e.to_string())?;
        let s1 = cp.run_simulation(&sc.init, &one).map_err(|e| e.to_string())?;
        if s1.state.alpha.len() != s2.state.alpha.len() {
            return Err("trajectory lengths differ".into());
        }
        Ok((uniqueness, norm_cx(&s1.state.alpha, &s2.state.alpha, weights)))
    };
    match run() {
        Ok((u, h)) => outcome(
            u <= 10.0 * tol && h <= 5.0 * tol,
            format!("initial-guess difference {u:.3e} (≤ {:.0e}), handoff difference {h:.3e} (≤ {:.0e})", 10.0 * tol, 5.0 * tol),
        ),
        Err(e) => outcome(false, e),
    }
}

fn criterion_10() -> Outcome {
    let cfg = stick();
    let sc = Scenario::build(&cfg).unwrap();
    let rp = RateProblem::new(&sc.ops, &sc.law, sc.ctx, cfg.rate).unwrap();
    let cp = CoupledProblem::new(&rp, &sc.load).unwrap();
    // Aggregate threshold Σ_p w_p (μ(0, α)σ̄_n + C) over the contact nodes free
    // to slip, against the aggregate load.
    let contact = &sc.ops.contact;
    let threshold: f64 = (0..contact.len())
        .filter(|&p| contact.dofs[p].is_some())
        .map(|p| {
            let a = sc.init.alpha0[p];
            contact.trace_weights[p] * (sc.law.mu(0.0, a).unwrap() * sc.ctx.sigma_n_bar + sc.ctx.cohesion)
        })
        .sum();
    let load = sc.load.at(cfg.rate.dt);
    let aggregate: f64 = load.iter().map(|x| x.abs()).sum();
    let fraction = aggregate / threshold;
    let sim = match cp.run_simulation(&sc.init, &cfg.coupled) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let nonzero = sim.rate.velocities.iter().flatten().filter(|&&v| v != 0.0).count();
    outcome(
        (fraction - 0.9).abs() <= 1e-12 && nonzero == 0,
        format!("load/threshold = {fraction:.12}, nonzero velocity entries {nonzero} over {} steps", sim.rate.grid.steps),
    )
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn main() -> ExitCode {
    type Criterion = (u32, &'static str, fn() -> Outcome, Option<Duration>);
    let criteria: [Criterion; 10] = [
        (1, "friction-law assumptions", criterion_1, Some(Duration::from_secs(1))),
        (2, "asinh/log inequality", criterion_2, None),
        (3, "state integrator order", criterion_3, Some(Duration::from_secs(1))),
        (4, "steady state", criterion_4, None),
        (5, "single-dof rate oracle", criterion_5, Some(Duration::from_secs(5))),
        (6, "VI residual", criterion_6, Some(Duration::from_secs(60))),
        (7, "Lipschitz bounds", criterion_7, None),
        (8, "contraction study", criterion_8, Some(Duration::from_secs(300))),
        (9, "uniqueness and handoff", criterion_9, None),
        (10, "stick preset", criterion_10, None),
    ];
    let mut failures = 0;
    for (id, name, run, budget) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let passed = result.passed && in_time;
        if !passed {
            failures += 1;
        }
        let timing = match budget {
            Some(b) => format!("{:.2}s of {}s", elapsed.as_secs_f64(), b.as_secs()),
            None => format!("{:.2}s", elapsed.as_secs_f64()),
        };
        println!("criterion {id:>2} {}: {name}: {} ({timing})", if passed { "PASS" } else { "FAIL" }, result.detail);
    }
    if failures == 0 {
        println!("all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
