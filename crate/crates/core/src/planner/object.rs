use std::fmt;

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::contact::Aabb;
use crate::error::{Error, Result};
use crate::Vec3;

/// Object categories. `Block` is a plain box used for calibration scenes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Banana,
    Cucumber,
    Apple,
    Peach,
    Melon,
    Orange,
    Strawberry,
    Block,
}

impl ObjectKind {
    pub const FOODS: [ObjectKind; 7] = [
        ObjectKind::Banana,
        ObjectKind::Cucumber,
        ObjectKind::Apple,
        ObjectKind::Peach,
        ObjectKind::Melon,
        ObjectKind::Orange,
        ObjectKind::Strawberry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectKind::Banana => "banana",
            ObjectKind::Cucumber => "cucumber",
            ObjectKind::Apple => "apple",
            ObjectKind::Peach => "peach",
            ObjectKind::Melon => "melon",
            ObjectKind::Orange => "orange",
            ObjectKind::Strawberry => "strawberry",
            ObjectKind::Block => "block",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::FOODS
            .into_iter()
            .chain([ObjectKind::Block])
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Format(format!("unknown object '{s}'")))
    }

    /// Unscaled geometry of the category.
    pub fn primitive(self) -> Primitive {
        match self {
            ObjectKind::Banana => Primitive::Capsule {
                radius: 0.018,
                half_length: 0.055,
            },
            ObjectKind::Cucumber => Primitive::Capsule {
                radius: 0.02,
                half_length: 0.06,
            },
            ObjectKind::Apple => Primitive::Sphere { radius: 0.04 },
            ObjectKind::Peach => Primitive::Sphere { radius: 0.035 },
            ObjectKind::Melon => Primitive::Sphere { radius: 0.06 },
            ObjectKind::Orange => Primitive::Sphere { radius: 0.038 },
            ObjectKind::Strawberry => Primitive::Ellipsoid {
                radii: Vec3::new(0.022, 0.018, 0.018),
            },
            ObjectKind::Block => Primitive::Block {
                half_extents: Vec3::new(0.06, 0.02, 0.02),
            },
        }
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Analytic solid in its local frame. Elongated shapes lie along local x.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    Sphere { radius: f64 },
    Capsule { radius: f64, half_length: f64 },
    Ellipsoid { radii: Vec3 },
    Block { half_extents: Vec3 },
}

impl Primitive {
    pub fn scaled(&self, s: f64) -> Primitive {
        match *self {
            Primitive::Sphere { radius } => Primitive::Sphere { radius: radius * s },
            Primitive::Capsule { radius, half_length } => Primitive::Capsule {
                radius: radius * s,
                half_length: half_length * s,
            },
            Primitive::Ellipsoid { radii } => Primitive::Ellipsoid { radii: radii * s },
            Primitive::Block { half_extents } => Primitive::Block {
                half_extents: half_extents * s,
            },
        }
    }

    fn contains_local(&self, p: &Vec3) -> bool {
        match *self {
            Primitive::Sphere { radius } => p.norm_squared() <= radius * radius,
            Primitive::Capsule { radius, half_length } => {
                let axial = p.x.clamp(-half_length, half_length);
                (p - Vec3::new(axial, 0.0, 0.0)).norm_squared() <= radius * radius
            }
            Primitive::Ellipsoid { radii } => p.component_div(&radii).norm_squared() <= 1.0,
            Primitive::Block { half_extents } => (0..3).all(|a| p[a].abs() <= half_extents[a]),
        }
    }

    /// Local half extents after a rotation of `yaw` about the vertical axis.
    fn rotated_half_extents(&self, yaw: f64) -> Vec3 {
        let (s, c) = yaw.sin_cos();
        match *self {
            Primitive::Sphere { radius } => Vec3::repeat(radius),
            Primitive::Capsule { radius, half_length } => Vec3::new(
                half_length * c.abs() + radius,
                radius,
                half_length * s.abs() + radius,
            ),
            Primitive::Ellipsoid { radii } => Vec3::new(
                ((radii.x * c).powi(2) + (radii.z * s).powi(2)).sqrt(),
                radii.y,
                ((radii.x * s).powi(2) + (radii.z * c).powi(2)).sqrt(),
            ),
            Primitive::Block { half_extents } => Vec3::new(
                half_extents.x * c.abs() + half_extents.z * s.abs(),
                half_extents.y,
                half_extents.x * s.abs() + half_extents.z * c.abs(),
            ),
        }
    }
}

/// A posed object primitive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectShape {
    pub primitive: Primitive,
    pub center: Vec3,
    /// Rotation about the vertical axis (rad).
    pub yaw: f64,
}

impl ObjectShape {
    fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_axis_angle(&Vector3::y_axis(), self.yaw)
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        let local = self.rotation().inverse() * (x - self.center);
        self.primitive.contains_local(&local)
    }

    pub fn aabb(&self) -> Aabb {
        let h = self.primitive.rotated_half_extents(self.yaw);
        Aabb {
            min: self.center - h,
            max: self.center + h,
        }
    }

    /// Half of the vertical extent.
    pub fn half_height(&self) -> f64 {
        self.primitive.rotated_half_extents(self.yaw).y
    }

    /// Lattice points with spacing `spacing` that lie inside the solid.
    pub fn lattice_points(&self, spacing: f64) -> Vec<Vec3> {
        let b = self.aabb();
        let n: Vec<usize> = (0..3)
            .map(|a| ((b.max[a] - b.min[a]) / spacing).floor() as usize + 1)
            .collect();
        let mut out = Vec::new();
        for i in 0..n[0] {
            for j in 0..n[1] {
                for k in 0..n[2] {
                    let x = b.min + Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * spacing;
                    if self.contains(&x) {
                        out.push(x);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotated_aabb_bounds_every_lattice_point() {
        for kind in ObjectKind::FOODS.into_iter().chain([ObjectKind::Block]) {
            for yaw in [0.0, 0.3, 1.2, 2.5] {
                let shape = ObjectShape {
                    primitive: kind.primitive(),
                    center: Vec3::new(0.25, 0.1, 0.25),
                    yaw,
                };
                let b = shape.aabb();
                let pts = shape.lattice_points(0.004);
                assert!(!pts.is_empty(), "{kind}");
                assert!(pts.iter().all(|p| b.contains(p)), "{kind} yaw {yaw}");
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for kind in ObjectKind::FOODS {
            assert_eq!(ObjectKind::from_name(kind.name()).unwrap(), kind);
        }
        assert!(ObjectKind::from_name("pizza").is_err());
    }

    #[test]
    fn capsule_extent_follows_yaw() {
        let p = Primitive::Capsule {
            radius: 0.01,
            half_length: 0.05,
        };
        let h = p.rotated_half_extents(std::f64::consts::FRAC_PI_2);
        assert!((h.x - 0.01).abs() < 1e-12);
        assert!((h.z - 0.06).abs() < 1e-12);
    }
}
