//! Knife trajectories for every cut style and state, plus scene
//! randomization, style transfer and success checks.

mod augment;
mod geometry;
mod object;
mod success;
mod task;
mod trajectory;
mod transfer;

pub use augment::{augment, AugmentRanges, SceneSpec};
pub use geometry::{compute_aabb, cut_planes, plane_fractions, CutAxis};
pub use object::{ObjectKind, ObjectShape, Primitive};
pub use success::{evaluate_success, Verdict, DEFAULT_TOLERANCE};
pub use task::{CutState, CutStyle, CutTask, Side};
pub use trajectory::{
    base_rotation, generate_trajectory, read_trajectory_csv, write_trajectory_csv, BladeGeometry, Phase,
    PlanContext, PlannerParams, Trajectory, Waypoint,
};
pub use transfer::{detect_contact_phase, normal_skeleton, style_transfer};
