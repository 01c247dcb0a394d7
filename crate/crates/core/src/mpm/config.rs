use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpm::Material;
use crate::Vec3;

/// How scattered contributions are reduced into grid nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionMode {
    /// Fixed particle ordering; bit-reproducible.
    Deterministic,
    /// Parallel partial grids merged in scheduler order.
    Fast,
}

/// What happens to `F` when `det(F)` leaves `[j_min, j_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JClampMode {
    /// Isotropic rescale so that `det(F)` equals the violated bound.
    NearestBound,
    /// Isotropic rescale to `det(F) = 1`.
    Unit,
}

/// Damage growth law inside the gated blade band.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DamageLaw {
    /// `dD/dt = damage_rate * c_hat`.
    Proportional,
    /// `dD/dt = damage_rate` whenever the gates pass.
    Constant,
}

/// Over which span the approach-speed accumulator behind `c_hat` is summed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproachAccumulation {
    PerStep,
    Window,
}

/// Numerical and cutting parameters of one simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Cells per axis of the cubic domain.
    pub grid_res: usize,
    /// Grid spacing (m).
    pub dx: f64,
    /// Time step (s).
    pub dt: f64,
    /// Force output-accumulation window (s); an integer multiple of `dt`.
    pub dt_acc: f64,
    pub gravity: Vec3,
    /// Per-second damping applied to grid velocities.
    pub damping_grid: f64,
    /// Per-second damping applied to particle velocities in G2P.
    pub damping_particle: f64,
    pub j_min: f64,
    pub j_max: f64,
    pub j_clamp: JClampMode,
    /// Particle speed cap as a fraction of `dx / dt`.
    pub speed_cap: f64,
    pub enable_stress: bool,
    /// Perzyna relaxation factor for the J2 return (0 = rate independent).
    pub viscoplastic: f64,
    pub cfl_factor: f64,
    pub reduction: ReductionMode,
    pub seed: u64,

    /// Reference grid spacing for band scaling (m).
    pub dx_ref: f64,
    /// Band scaling exponent.
    pub gamma: f64,
    /// Blade band half-width at the reference spacing (m).
    pub band0: f64,
    /// Normalized approach speed threshold (cells per step).
    pub v_hat: f64,
    /// Minimum contact strength for damage growth.
    pub c_min: f64,
    /// Damage rate (1/s).
    pub damage_rate: f64,
    pub damage_law: DamageLaw,
    /// Residual stiffness fraction of a fully damaged particle.
    pub soft_floor: f64,
    pub approach_accumulation: ApproachAccumulation,
    /// Lateral separation force per particle near the edge (N).
    pub tip_force: f64,
    /// Edge band radius for the tip force, as a multiple of `dx`.
    pub tip_band_cells: f64,
    /// Damage at or above which a particle no longer connects segments.
    pub damage_cut: f64,
    /// Connectivity link radius as a multiple of the particle spacing.
    pub link_factor: f64,
    /// Run segmentation every this many force windows.
    pub seg_every: usize,
    /// Segments smaller than this fraction of the body are reported as debris.
    pub min_segment_frac: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let grid_res = 64;
        let dx = 0.5 / grid_res as f64;
        Self {
            grid_res,
            dx,
            dt: 1.0 / 1024.0 / 25.0,
            dt_acc: 1.0 / 1024.0,
            gravity: Vec3::new(0.0, -9.81, 0.0),
            damping_grid: 0.5,
            damping_particle: 0.1,
            j_min: 0.4,
            j_max: 1.4,
            j_clamp: JClampMode::NearestBound,
            speed_cap: 0.5,
            enable_stress: true,
            viscoplastic: 0.0,
            cfl_factor: 0.2,
            reduction: ReductionMode::Deterministic,
            seed: 0,
            dx_ref: dx,
            gamma: 1.0,
            band0: 0.75 * dx,
            v_hat: 1e-4,
            c_min: 0.05,
            damage_rate: 200.0,
            damage_law: DamageLaw::Proportional,
            soft_floor: 1e-3,
            approach_accumulation: ApproachAccumulation::Window,
            tip_force: 0.0,
            tip_band_cells: 1.0,
            damage_cut: 0.5,
            link_factor: 1.5,
            seg_every: 10,
            min_segment_frac: 0.01,
        }
    }
}

impl SimConfig {
    pub fn domain_size(&self) -> f64 {
        self.dx * self.grid_res as f64
    }

    /// Number of steps per force window.
    pub fn steps_per_window(&self) -> Result<usize> {
        if !(self.dt_acc > 0.0) {
            return Err(Error::Config(format!(
                "dt_acc must be positive, got {}",
                self.dt_acc
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        let n = (self.dt_acc / self.dt).round();
        if n < 1.0 || ((n * self.dt - self.dt_acc).abs() > 1e-9 * self.dt_acc) {
            return Err(Error::Config(format!(
                "dt_acc = {} is not an integer multiple of dt = {}",
                self.dt_acc, self.dt
            )));
        }
        Ok(n as usize)
    }

    /// Checks internal consistency and the CFL bound against `materials`.
    pub fn validate(&self, materials: &[Material]) -> Result<()> {
        if self.grid_res < 8 {
            return Err(Error::Config("grid_res must be at least 8".into()));
        }
        if !(self.dx > 0.0) {
            return Err(Error::Config("dx must be positive".into()));
        }
        self.steps_per_window()?;
        if !(self.j_min > 0.0 && self.j_min <= 1.0 && self.j_max >= 1.0) {
            return Err(Error::Config(format!(
                "J interval [{}, {}] must bracket 1 with j_min > 0",
                self.j_min, self.j_max
            )));
        }
        if !(0.0..=1.0).contains(&self.c_min) {
            return Err(Error::Config("c_min must lie in [0, 1]".into()));
        }
        if !(self.damage_cut > 0.0 && self.damage_cut <= 1.0) {
            return Err(Error::Config("damage_cut must lie in (0, 1]".into()));
        }
        if !(self.soft_floor > 0.0 && self.soft_floor <= 1.0) {
            return Err(Error::Config("soft_floor must lie in (0, 1]".into()));
        }
        for m in materials {
            m.validate()?;
        }
        let dt_max = cfl_timestep(self, materials)?;
        if !(dt_max > 0.0) {
            return Err(Error::Config("CFL bound is zero".into()));
        }
        if self.dt > dt_max * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "dt = {:e} s exceeds the CFL limit {:e} s",
                self.dt, dt_max
            )));
        }
        Ok(())
    }
}

/// Largest stable step `cfl_factor * dx / max_m c_m`.
pub fn cfl_timestep(config: &SimConfig, materials: &[Material]) -> Result<f64> {
    if materials.is_empty() {
        return Err(Error::Config("CFL bound needs at least one material".into()));
    }
    let mut c_max = 0.0f64;
    for m in materials {
        c_max = c_max.max(m.wave_speed()?);
    }
    Ok(config.cfl_factor * config.dx / c_max)
}
