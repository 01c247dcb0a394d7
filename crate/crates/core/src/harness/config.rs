use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::contact::ContactParams;
use crate::error::{Error, Result};
use crate::instructions::Direction;
use crate::mpm::{Material, SimConfig};
use crate::planner::{AugmentRanges, CutState, CutStyle, CutTask, ObjectKind, PlannerParams, SceneSpec};

/// Episode-level controls that sit above the simulator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessParams {
    /// Simulated-time cap (s).
    pub max_time: f64,
    /// Particles per grid cell along each axis.
    pub particles_per_cell: usize,
    /// Material the knife resistance coefficients are expressed against.
    pub reference_material: Material,
    pub k2_youngs_exponent: f64,
    pub k2_yield_exponent: f64,
    /// Stop once the last cut is done and the edge has cleared the object top.
    pub finish_on_clear: bool,
    /// Height above the object top the edge must reach to count as clear (m).
    pub clear_margin: f64,
}

impl Default for HarnessParams {
    fn default() -> Self {
        Self {
            max_time: 2.0,
            particles_per_cell: 2,
            reference_material: Material::default(),
            k2_youngs_exponent: 0.5,
            k2_yield_exponent: 0.5,
            finish_on_clear: true,
            clear_margin: 0.005,
        }
    }
}

/// Everything needed to run, and re-run, one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSpec {
    pub seed: u64,
    pub scene: SceneSpec,
    pub task: CutTask,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub contact: ContactParams,
    #[serde(default)]
    pub planner: PlannerParams,
    #[serde(default)]
    pub harness: HarnessParams,
    /// Cap on commanded knife speed from the safety module (m/s).
    #[serde(default)]
    pub velocity_limit: Option<f64>,
    /// Direction phrase used when wording the instruction.
    #[serde(default)]
    pub direction: Option<Direction>,
}

impl EpisodeSpec {
    pub fn new(scene: SceneSpec, task: CutTask) -> Self {
        Self {
            seed: scene.seed,
            scene,
            task,
            sim: SimConfig::default(),
            contact: ContactParams::default(),
            planner: PlannerParams::default(),
            harness: HarnessParams::default(),
            velocity_limit: None,
            direction: None,
        }
    }
}

/// Safety-module settings in a run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SafetyParams {
    /// Force limit (N).
    pub f_max: f64,
    /// Velocities probed when collecting fit samples (m/s).
    pub probe_velocities: Vec<f64>,
    /// Young's moduli probed when collecting fit samples (Pa).
    pub probe_youngs: Vec<f64>,
    /// Velocity search interval for the safe-speed query (m/s).
    pub v_range: (f64, f64),
    /// Subtract the largest fit residual from the limit before solving.
    pub residual_margin: bool,
    /// Commanded speed of the unlimited runs in the ablation (m/s).
    pub aggressive_speed: f64,
}

impl Default for SafetyParams {
    fn default() -> Self {
        Self {
            f_max: 100.0,
            probe_velocities: vec![0.5, 1.0, 2.0, 4.0, 6.0, 8.0],
            probe_youngs: vec![0.2e6, 0.5e6, 0.8e6],
            v_range: (0.05, 10.0),
            residual_margin: true,
            aggressive_speed: 10.0,
        }
    }
}

/// Top-level configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub sim: SimConfig,
    pub contact: ContactParams,
    pub material: Material,
    pub task: CutTask,
    pub scene: SceneOverrides,
    pub planner: PlannerParams,
    pub harness: HarnessParams,
    pub safety: SafetyParams,
    pub augment: AugmentRanges,
    pub sweep: SweepParams,
    pub dataset: DatasetParams,
}

/// Scene placement fields that are not derived from the task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneOverrides {
    pub position: [f64; 2],
    pub scale: f64,
    pub rotation: f64,
    pub board_height: f64,
}

impl Default for SceneOverrides {
    fn default() -> Self {
        let s = SceneSpec::new(ObjectKind::Block, Material::default());
        Self {
            position: s.position,
            scale: s.scale,
            rotation: s.rotation,
            board_height: s.board_height,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParams {
    pub youngs: Vec<f64>,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            youngs: (1..=9).map(|i| i as f64 * 0.1e6).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetParams {
    pub count: usize,
    /// Styles in the task grid; empty means all.
    pub styles: Vec<CutStyle>,
    /// States in the task grid; empty means the thirteen dataset states.
    pub states: Vec<CutState>,
    /// Plan and word episodes without simulating them.
    pub plan_only: bool,
}

impl Default for DatasetParams {
    fn default() -> Self {
        Self {
            count: 5,
            styles: Vec::new(),
            states: Vec::new(),
            plan_only: false,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            sim: SimConfig::default(),
            contact: ContactParams::default(),
            material: Material::default(),
            task: CutTask::default(),
            scene: SceneOverrides::default(),
            planner: PlannerParams::default(),
            harness: HarnessParams::default(),
            safety: SafetyParams::default(),
            augment: AugmentRanges::fixed(AugmentRanges::default().workspace),
            sweep: SweepParams::default(),
            dataset: DatasetParams::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn scene(&self) -> SceneSpec {
        SceneSpec {
            kind: self.task.object,
            position: self.scene.position,
            scale: self.scene.scale,
            rotation: self.scene.rotation,
            board_height: self.scene.board_height,
            material: self.material.clone(),
            seed: self.seed,
        }
    }

    pub fn episode(&self) -> EpisodeSpec {
        EpisodeSpec {
            seed: self.seed,
            scene: self.scene(),
            task: self.task.clone(),
            sim: self.sim.clone(),
            contact: self.contact.clone(),
            planner: self.planner.clone(),
            harness: self.harness.clone(),
            velocity_limit: None,
            direction: None,
        }
    }
}
