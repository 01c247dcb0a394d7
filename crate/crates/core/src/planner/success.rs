use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec3;

/// Default tolerance as a fraction of the object length (and of a quarter turn).
pub const DEFAULT_TOLERANCE: f64 = 0.1;

/// Outcome of comparing achieved cuts against their targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub success: bool,
    /// `achieved - target` per plane (m), empty on a count mismatch.
    pub plane_errors: Vec<f64>,
    /// Angle between blade-plane normal and target normal (rad).
    pub angle_error: f64,
    pub reason: Option<String>,
}

impl Verdict {
    pub fn failure(reason: impl Into<String>) -> Self {
        Self {
            success: false,
            plane_errors: Vec::new(),
            angle_error: f64::NAN,
            reason: Some(reason.into()),
        }
    }
}

/// Unsigned angle between two plane normals, in `[0, π/2]`.
fn normal_angle(a: &Vec3, b: &Vec3) -> f64 {
    let c = (a.dot(b) / (a.norm() * b.norm())).abs().min(1.0);
    c.acos()
}

/// Success iff every plane lands within `tol_frac * length` and the blade plane
/// is within `tol_frac` of a quarter turn of the target orientation.
pub fn evaluate_success(
    achieved: &[f64],
    target: &[f64],
    length: f64,
    blade_normal: &Vec3,
    target_normal: &Vec3,
    tol_frac: f64,
) -> Result<Verdict> {
    if !(length > 0.0) {
        return Err(Error::DegenerateObject(format!("object length must be positive, got {length}")));
    }
    if achieved.len() != target.len() {
        return Ok(Verdict::failure(format!(
            "count mismatch: {} achieved vs {} target planes",
            achieved.len(),
            target.len()
        )));
    }
    let plane_errors: Vec<f64> = achieved.iter().zip(target).map(|(a, t)| a - t).collect();
    let angle_error = normal_angle(blade_normal, target_normal);
    let pos_tol = tol_frac * length;
    let ang_tol = tol_frac * std::f64::consts::FRAC_PI_2;
    let worst = plane_errors.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let reason = if worst > pos_tol {
        Some(format!("plane error {worst:.4} m exceeds {pos_tol:.4} m"))
    } else if !(angle_error <= ang_tol) {
        Some(format!(
            "blade angle error {:.2} deg exceeds {:.2} deg",
            angle_error.to_degrees(),
            ang_tol.to_degrees()
        ))
    } else {
        None
    };
    Ok(Verdict {
        success: reason.is_none(),
        plane_errors,
        angle_error,
        reason,
    })
}
