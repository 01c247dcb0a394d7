use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Continuum parameters of one deformable material.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Material {
    /// Density (kg/m³).
    pub density: f64,
    /// Young's modulus (Pa).
    pub youngs_modulus: f64,
    /// Poisson ratio, strictly inside (-1, 0.5).
    pub poisson_ratio: f64,
    /// Yield stress (Pa). `f64::INFINITY` disables plasticity.
    #[serde(with = "crate::mpm::material::serde_inf")]
    pub yield_stress: f64,
    /// Knife speed-resistance coefficient at the reference stiffness.
    pub k2_ref: f64,
}

impl Material {
    pub fn new(density: f64, youngs_modulus: f64, poisson_ratio: f64, yield_stress: f64) -> Self {
        Self {
            density,
            youngs_modulus,
            poisson_ratio,
            yield_stress,
            k2_ref: 12.0,
        }
    }

    /// Shear and first Lamé moduli `(mu, lambda)`.
    pub fn lame(&self) -> Result<(f64, f64)> {
        compute_lame(self.youngs_modulus, self.poisson_ratio)
    }

    /// Dilatational wave speed `sqrt((lambda + 2 mu) / rho)`.
    pub fn wave_speed(&self) -> Result<f64> {
        let (mu, lambda) = self.lame()?;
        if !(self.density > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "density must be positive, got {}",
                self.density
            )));
        }
        Ok(((lambda + 2.0 * mu) / self.density).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        let (mu, lambda) = self.lame()?;
        if !(mu > 0.0) || !lambda.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "derived moduli mu = {mu}, lambda = {lambda} are not admissible"
            )));
        }
        if !(self.density > 0.0) {
            return Err(Error::ParameterDomain("density must be positive".into()));
        }
        if !(self.yield_stress > 0.0) {
            return Err(Error::ParameterDomain("yield stress must be positive".into()));
        }
        if !(self.k2_ref >= 0.0) {
            return Err(Error::ParameterDomain("k2_ref must be non-negative".into()));
        }
        Ok(())
    }
}

impl Default for Material {
    fn default() -> Self {
        Material::new(1000.0, 0.5e6, 0.3, 2.0e4)
    }
}

/// Lamé parameters from Young's modulus and Poisson ratio.
pub fn compute_lame(youngs_modulus: f64, poisson_ratio: f64) -> Result<(f64, f64)> {
    if !(youngs_modulus > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "Young's modulus must be positive, got {youngs_modulus}"
        )));
    }
    if !(poisson_ratio > -1.0 && poisson_ratio < 0.5) {
        return Err(Error::ParameterDomain(format!(
            "Poisson ratio must lie in (-1, 0.5), got {poisson_ratio}"
        )));
    }
    let mu = youngs_modulus / (2.0 * (1.0 + poisson_ratio));
    let lambda =
        youngs_modulus * poisson_ratio / ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
    Ok((mu, lambda))
}

/// Infinite yield stress is written as the string `"inf"` in text configs.
pub(crate) mod serde_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
        if value.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*value)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s.eq_ignore_ascii_case("inf") => Ok(f64::INFINITY),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
