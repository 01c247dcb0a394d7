//! MLS-MPM time-stepping core.
//!
//! A step is `p2g` → `grid_update` → (contact resolution) → `g2p`. Stress is
//! fused into the APIC momentum transfer, so no separate force pass exists.

pub mod config;
pub mod constitutive;
pub mod grid;
pub mod kernel;
pub mod material;
pub mod particle;
pub mod transfer;

pub use config::{
    cfl_timestep, ApproachAccumulation, DamageLaw, JClampMode, ReductionMode, SimConfig,
};
pub use constitutive::{
    cauchy_stress, corotated_energy, corotated_piola, hencky_deviatoric_norm, j2_radial_return, kirchhoff_stress,
    polar_rotation, ReturnResult,
};
pub use grid::{Grid, GridNode};
pub use kernel::bspline_weights;
pub use material::{compute_lame, Material};
pub use particle::{total_mass, total_momentum, Particle};
pub use transfer::{clamp_determinant, g2p, grid_update, p2g, G2pStats, BOUNDARY_CELLS};
