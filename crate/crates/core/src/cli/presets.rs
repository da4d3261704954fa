use super::config::{FrictionSpec, InitialSpec, MeshSpec, OutputSpec, ScenarioConfig, VerifySpec};
use crate::coupled::CoupledConfig;
use crate::fem::{BoundaryTag, Lame, MaterialParams, SideTags};
use crate::friction::{FrictionContext, FrictionVariant, RateStateParams};
use crate::rate::{LoadProfile, RateProblemConfig};

pub const PRESET_NAMES: [&str; 3] = ["stick", "slab-driven", "single-dof"];

fn lab_params() -> RateStateParams {
    RateStateParams { a: 0.01, b: 0.015, mu_star: 0.6, r_star: 1e-3, l_dc: 0.01 }
}

fn config(
    mesh: MeshSpec,
    material: MaterialParams,
    friction: FrictionSpec,
    load: LoadProfile,
    dt: f64,
    coupled: CoupledConfig,
    name: &str,
) -> ScenarioConfig {
    ScenarioConfig {
        mesh,
        material,
        friction,
        load,
        initial: InitialSpec { u0: [0.0, 0.0], v0: [0.0, 0.0], alpha0: 0.0 },
        rate: RateProblemConfig::new(dt),
        coupled,
        output: OutputSpec { dir: format!("output/{name}").into() },
        rng_seed: 20240611,
        verify: VerifySpec::default(),
    }
}

/// Ramped shear body force on a slab already sliding along its bottom.
pub fn slab_driven() -> ScenarioConfig {
    let mut cfg = config(
        MeshSpec { width: 1.0, height: 0.5, nx: 20, ny: 10, tags: SideTags::slab() },
        MaterialParams {
            rho: 1.0,
            viscosity: Lame { lambda: 0.01, mu: 0.01 },
            elasticity: Lame { lambda: 1.0, mu: 1.0 },
        },
        FrictionSpec {
            variant: FrictionVariant::Regularized,
            params: lab_params(),
            context: FrictionContext { sigma_n_bar: 0.01, cohesion: 0.0 },
        },
        LoadProfile::Ramp { amplitude: [0.1, 0.0], ramp_time: 0.5 },
        0.01,
        CoupledConfig { window_length: 0.1, fp_tol: 1e-10, fp_max_iters: 50, n_windows: 10, retry_halved: false },
        "slab-driven",
    );
    cfg.initial.v0 = [0.01, 0.0];
    cfg.verify.windows = Some(vec![1.0, 0.5, 0.25]);
    cfg
}

/// A thin strip clamped on three sides whose only free dofs are tangential
/// contact dofs, loaded to 90% of the cohesive stick threshold.
pub fn stick() -> ScenarioConfig {
    let height = 0.25;
    let cohesion = 1.0;
    // Per node: load/weight = f·h/2, threshold/weight = C.
    let force = 0.9 * 2.0 * cohesion / height;
    config(
        MeshSpec {
            width: 1.0,
            height,
            nx: 8,
            ny: 1,
            tags: SideTags {
                bottom: BoundaryTag::Contact,
                right: BoundaryTag::Dirichlet,
                top: BoundaryTag::Dirichlet,
                left: BoundaryTag::Dirichlet,
            },
        },
        MaterialParams {
            rho: 1.0,
            viscosity: Lame { lambda: 0.1, mu: 0.1 },
            elasticity: Lame { lambda: 1.0, mu: 1.0 },
        },
        FrictionSpec {
            variant: FrictionVariant::Regularized,
            params: lab_params(),
            context: FrictionContext { sigma_n_bar: 1.0, cohesion },
        },
        LoadProfile::Constant { amplitude: [force, 0.0] },
        0.01,
        CoupledConfig { window_length: 0.2, fp_tol: 1e-10, fp_max_iters: 50, n_windows: 5, retry_halved: false },
        "stick",
    )
}

/// A unit square with one free dof: the tangential dof of the bottom-right
/// corner.
pub fn single_dof() -> ScenarioConfig {
    config(
        MeshSpec {
            width: 1.0,
            height: 1.0,
            nx: 1,
            ny: 1,
            tags: SideTags {
                bottom: BoundaryTag::Contact,
                right: BoundaryTag::Neumann,
                top: BoundaryTag::Dirichlet,
                left: BoundaryTag::Dirichlet,
            },
        },
        MaterialParams {
            rho: 1.0,
            viscosity: Lame { lambda: 0.5, mu: 1.0 },
            elasticity: Lame { lambda: 1.0, mu: 2.0 },
        },
        FrictionSpec {
            variant: FrictionVariant::Truncated,
            params: RateStateParams { r_star: 1e-6, ..lab_params() },
            context: FrictionContext { sigma_n_bar: 1.0, cohesion: 0.05 },
        },
        LoadProfile::Sinusoid { amplitude: [3.0, 0.0], period: 0.4 },
        0.01,
        CoupledConfig { window_length: 0.04, fp_tol: 1e-10, fp_max_iters: 50, n_windows: 5, retry_halved: false },
        "single-dof",
    )
}

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    match name {
        "stick" => Some(stick()),
        "slab-driven" => Some(slab_driven()),
        "single-dof" => Some(single_dof()),
        _ => None,
    }
}
