use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::coupled::{window_steps, CoupledConfig, CoupledError, InitialData};
use crate::fem::{assemble, build_mesh_rect, AssembledOperators, FemError, MaterialParams, MeshModel, SideTags};
use crate::friction::{AgeingLaw, FrictionContext, FrictionError, FrictionVariant, RateStateParams};
use crate::rate::{ExternalLoad, LoadProfile, RateError, RateProblemConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub width: f64,
    pub height: f64,
    pub nx: usize,
    pub ny: usize,
    pub tags: SideTags,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrictionSpec {
    pub variant: FrictionVariant,
    pub params: RateStateParams,
    pub context: FrictionContext,
}

/// Spatially constant initial fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub u0: [f64; 2],
    pub v0: [f64; 2],
    pub alpha0: f64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_output_dir")]
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_output_dir() }
    }
}

fn default_samples() -> usize {
    10_000
}

fn default_pairs() -> usize {
    20
}

fn default_directions() -> usize {
    50
}

fn default_perturbation() -> f64 {
    0.5
}

/// Sizes of the randomized verification suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default = "default_samples")]
    pub friction_samples: usize,
    #[serde(default = "default_pairs")]
    pub lipschitz_pairs: usize,
    /// Amplitude of the random state perturbations in the Lipschitz suite.
    #[serde(default = "default_perturbation")]
    pub perturbation: f64,
    #[serde(default = "default_directions")]
    pub vi_directions: usize,
    /// Window lengths of the contraction suite; defaults to `T_w`, `T_w/2`,
    /// `T_w/4`.
    #[serde(default)]
    pub windows: Option<Vec<f64>>,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            friction_samples: default_samples(),
            lipschitz_pairs: default_pairs(),
            perturbation: default_perturbation(),
            vi_directions: default_directions(),
            windows: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mesh: MeshSpec,
    pub material: MaterialParams,
    pub friction: FrictionSpec,
    pub load: LoadProfile,
    pub initial: InitialSpec,
    pub rate: RateProblemConfig,
    pub coupled: CoupledConfig,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub verify: VerifySpec,
}

fn invalid(key: impl Into<String>, reason: impl Into<String>) -> CliError {
    CliError::Config { key: key.into(), reason: reason.into() }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every invariant and names the offending key.
    pub fn validate(&self) -> Result<(), CliError> {
        let m = &self.mesh;
        for (key, value) in [("mesh.width", m.width), ("mesh.height", m.height)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(invalid(key, format!("must be > 0, got {value}")));
            }
        }
        for (key, value) in [("mesh.nx", m.nx), ("mesh.ny", m.ny)] {
            if value == 0 {
                return Err(invalid(key, "must be >= 1"));
            }
        }
        if let Err(FemError::InvalidMaterial { key, reason }) = self.material.validate() {
            return Err(invalid(format!("material.{key}"), reason));
        }
        if let Err(FrictionError::InvalidParameter { name, reason }) = self.friction.params.validate() {
            return Err(invalid(format!("friction.params.{name}"), reason));
        }
        if let Err(FrictionError::InvalidParameter { name, reason }) = self.friction.context.validate() {
            return Err(invalid(format!("friction.context.{name}"), reason));
        }
        self.load.validate().map_err(|reason| invalid("load", reason))?;
        let i = &self.initial;
        if !i.u0.iter().chain(&i.v0).chain([&i.alpha0]).all(|x| x.is_finite()) {
            return Err(invalid("initial", "values must be finite"));
        }
        if let Err(RateError::InvalidConfig { key, reason }) = self.rate.validate() {
            return Err(invalid(format!("rate.{key}"), reason));
        }
        if let Err(CoupledError::InvalidConfig { key, reason }) = self.coupled.validate() {
            return Err(invalid(format!("coupled.{key}"), reason));
        }
        if let Err(CoupledError::InvalidConfig { reason, .. }) = window_steps(self.coupled.window_length, self.rate.dt) {
            return Err(invalid("coupled.window_length", reason));
        }
        if let Some(windows) = &self.verify.windows {
            if windows.is_empty() {
                return Err(invalid("verify.windows", "must not be empty"));
            }
            for &w in windows {
                if let Err(CoupledError::InvalidConfig { reason, .. }) = window_steps(w, self.rate.dt) {
                    return Err(invalid("verify.windows", reason));
                }
            }
        }
        if self.verify.friction_samples == 0 {
            return Err(invalid("verify.friction_samples", "must be >= 1"));
        }
        if !(self.verify.perturbation > 0.0) || !self.verify.perturbation.is_finite() {
            return Err(invalid("verify.perturbation", "must be > 0"));
        }
        Ok(())
    }

    pub fn contraction_windows(&self) -> Vec<f64> {
        self.verify.windows.clone().unwrap_or_else(|| {
            let t = self.coupled.window_length;
            vec![t, t / 2.0, t / 4.0]
        })
    }
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    ScenarioConfig::from_json(&text)
}

/// Mesh, operators, law and load built from a validated configuration.
pub struct Scenario {
    pub mesh: MeshModel,
    pub ops: AssembledOperators,
    pub law: AgeingLaw,
    pub ctx: FrictionContext,
    pub load: ExternalLoad,
    pub init: InitialData,
}

impl Scenario {
    pub fn build(cfg: &ScenarioConfig) -> Result<Self, CliError> {
        let m = &cfg.mesh;
        let mesh = build_mesh_rect(m.width, m.height, m.nx, m.ny, &m.tags).map_err(|e| invalid("mesh", e.to_string()))?;
        let ops = assemble(&mesh, &cfg.material).map_err(|e| invalid("material", e.to_string()))?;
        let law = AgeingLaw::new(cfg.friction.variant, cfg.friction.params).map_err(|e| invalid("friction.params", e.to_string()))?;
        let load = ExternalLoad::new(&ops, cfg.load);
        let init = initial_data(&mesh, &ops, &cfg.initial);
        Ok(Self { mesh, ops, law, ctx: cfg.friction.context, load, init })
    }
}

/// Expands constant fields onto the free dofs and contact nodes.
pub fn initial_data(mesh: &MeshModel, ops: &AssembledOperators, spec: &InitialSpec) -> InitialData {
    let n = mesh.n_free();
    let mut u0 = vec![0.0; n];
    let mut v0 = vec![0.0; n];
    for dofs in mesh.dof_map() {
        for (c, dof) in dofs.iter().enumerate() {
            if let Some(i) = *dof {
                u0[i] = spec.u0[c];
                v0[i] = spec.v0[c];
            }
        }
    }
    InitialData { u0, v0, alpha0: vec![spec.alpha0; ops.contact.len()] }
}
