//! Damage-gated cutting: blade-band damage, softening, knife drag, tip
//! separation and post-cut segmentation.

mod damage;
mod knife;
mod resistance;
mod segment;

pub use damage::{
    damage_update, effective_moduli, resolution_scaled_thresholds, CutThresholds, GateInput,
    C_NORM_FACTOR, DOWNWARD_STROKE_MIN,
};
pub use knife::{tip_force, KnifeTool};
pub use resistance::{k2_scale, speed_resistance, K2Exponents};
pub use segment::{
    label_components, segment_connectivity, segment_connectivity_with_history, Segmentation,
    UNLABELED,
};
