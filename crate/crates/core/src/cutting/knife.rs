use rayon::prelude::*;

use crate::contact::{ContactTool, SdfShape};
use crate::mpm::Particle;
use crate::Vec3;

/// The kinematically driven knife and its speed-resistance state.
#[derive(Clone, Debug, PartialEq)]
pub struct KnifeTool {
    /// Posed wedge blade.
    pub shape: SdfShape,
    /// Linear velocity of the blade frame origin (m/s).
    pub v_tool: Vec3,
    /// Angular velocity about `pivot` (rad/s).
    pub omega: Vec3,
    pub pivot: Vec3,
    /// Normalized speed; the commanded speed is `u * s0`.
    pub u: f64,
    /// Reference speed of the current trajectory segment (m/s).
    pub s0: f64,
    pub k2: f64,
    /// Unit direction of commanded motion, zero when idle.
    pub stroke_dir: Vec3,
}

impl KnifeTool {
    pub fn new(shape: SdfShape, k2: f64) -> Self {
        Self {
            shape,
            v_tool: Vec3::zeros(),
            omega: Vec3::zeros(),
            pivot: Vec3::zeros(),
            u: 1.0,
            s0: 0.0,
            k2,
            stroke_dir: Vec3::zeros(),
        }
    }

    pub fn speed(&self) -> f64 {
        self.u * self.s0
    }

    pub fn velocity_at(&self, x: &Vec3) -> Vec3 {
        self.v_tool + self.omega.cross(&(x - self.pivot))
    }

    pub fn contact_tool(&self) -> ContactTool {
        ContactTool {
            shape: self.shape.clone(),
            linear: self.v_tool,
            angular: self.omega,
            origin: self.pivot,
        }
    }
}

fn segment_distance(x: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((x - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (x - (a + ab * t)).norm()
}

/// Lateral separation impulses for particles near the blade edge.
///
/// Returns `(index, Δv)` pairs in ascending index order. Particles exactly on
/// the blade mid-plane are not pushed.
pub fn tip_force(
    particles: &[Particle],
    blade: &SdfShape,
    edge_band: f64,
    magnitude: f64,
    dt: f64,
) -> Vec<(usize, Vec3)> {
    if magnitude <= 0.0 {
        return Vec::new();
    }
    let Some((a, b)) = blade.edge_segment() else {
        return Vec::new();
    };
    let n = blade.lateral_normal();
    let mid = 0.5 * (a + b);
    particles
        .par_iter()
        .enumerate()
        .filter_map(|(i, p)| {
            if segment_distance(&p.x, &a, &b) >= edge_band {
                return None;
            }
            let side = (p.x - mid).dot(&n);
            if side == 0.0 {
                return None;
            }
            let dv = n * (side.signum() * magnitude * dt / p.mass);
            Some((i, dv))
        })
        .collect()
}
