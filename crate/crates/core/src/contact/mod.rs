//! Signed-distance-field tools, node contact with Coulomb friction, and force
//! accounting from pre/post-contact node velocities.

pub mod force;
pub mod resolve;
pub mod sdf;

pub use force::{accumulate_force, node_impulse, ForceRecord, ForceWindow};
pub use resolve::{
    contact_strength, resolve_grid_contact, resolve_node_contact, ContactParams, ContactPass,
    ContactTool,
};
pub use sdf::{Aabb, Pose, SdfShape, ShapeKind};
