//! Force-surface fitting and velocity limiting.

mod clamp;
mod model;

pub use clamp::clamp_trajectory;
pub use model::{
    fit_model, read_samples_csv, safe_velocity, write_samples_csv, FitDiagnostics, ForceModel, MaterialFeatures,
    ModelKind, SafetySample,
};
