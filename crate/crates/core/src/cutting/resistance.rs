use crate::error::{Error, Result};
use crate::mpm::Material;

/// Exponents applied to the stiffness and yield ratios in [`k2_scale`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct K2Exponents {
    pub youngs: f64,
    pub yield_stress: f64,
}

impl Default for K2Exponents {
    fn default() -> Self {
        Self {
            youngs: 0.5,
            yield_stress: 0.5,
        }
    }
}

/// Quadratic drag on the normalized knife speed: `u / (1 + k2 c u dt)`.
pub fn speed_resistance(u: f64, c_hat: f64, k2: f64, dt: f64) -> f64 {
    let u = u.max(0.0);
    u / (1.0 + k2 * c_hat * u * dt)
}

/// Material-dependent resistance coefficient.
///
/// Infinite yield stresses on both materials contribute a ratio of one.
pub fn k2_scale(mat: &Material, reference: &Material, exps: K2Exponents) -> Result<f64> {
    for (name, value) in [
        ("material E", mat.youngs_modulus),
        ("reference E", reference.youngs_modulus),
        ("material yield stress", mat.yield_stress),
        ("reference yield stress", reference.yield_stress),
    ] {
        if !(value > 0.0) {
            return Err(Error::Config(format!("{name} must be positive, got {value}")));
        }
    }
    let e_ratio = mat.youngs_modulus / reference.youngs_modulus;
    let y_ratio = match (mat.yield_stress.is_finite(), reference.yield_stress.is_finite()) {
        (true, true) => mat.yield_stress / reference.yield_stress,
        (false, false) => 1.0,
        _ => {
            return Err(Error::Config(
                "cannot compare a finite and an infinite yield stress".into(),
            ))
        }
    };
    Ok(mat.k2_ref * e_ratio.powf(exps.youngs) * y_ratio.powf(exps.yield_stress))
}
