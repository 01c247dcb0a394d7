use serde::{Deserialize, Serialize};

use crate::{Mat3, Vec3};

/// Lagrangian material sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub x: Vec3,
    pub v: Vec3,
    /// Deformation gradient.
    pub f: Mat3,
    /// APIC affine velocity matrix.
    pub c: Mat3,
    pub mass: f64,
    /// Rest volume.
    pub vol0: f64,
    /// Accumulated plastic strain.
    pub alpha: f64,
    /// Damage in `[0, 1]`, never decreasing.
    pub damage: f64,
    pub material: usize,
    pub segment: u32,
    /// Rest position, used to measure where cuts landed.
    pub x0: Vec3,
}

impl Particle {
    pub fn at_rest(x: Vec3, mass: f64, vol0: f64, material: usize) -> Self {
        Self {
            x,
            v: Vec3::zeros(),
            f: Mat3::identity(),
            c: Mat3::zeros(),
            mass,
            vol0,
            alpha: 0.0,
            damage: 0.0,
            material,
            segment: 0,
            x0: x,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().all(|v| v.is_finite())
            && self.v.iter().all(|v| v.is_finite())
            && self.f.iter().all(|v| v.is_finite())
            && self.c.iter().all(|v| v.is_finite())
    }
}

/// Sum of particle masses.
pub fn total_mass(particles: &[Particle]) -> f64 {
    particles.iter().map(|p| p.mass).sum()
}

/// Sum of particle linear momenta.
pub fn total_momentum(particles: &[Particle]) -> Vec3 {
    particles.iter().fold(Vec3::zeros(), |acc, p| acc + p.v * p.mass)
}
