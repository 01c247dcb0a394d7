//! Analytic signed distance fields for the knife blade and the cutting board.

use nalgebra::{Isometry3, Point3, Vector2};
use serde::{Deserialize, Serialize};

use crate::Vec3;

/// Rigid pose of a tool: rotation followed by translation.
pub type Pose = Isometry3<f64>;

/// Geometry of a shape in its local frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    /// `{ x : normal · x <= offset }` is solid.
    HalfSpace { normal: Vec3, offset: f64 },
    /// Axis-aligned box centred on the local origin.
    Box { half_extents: Vec3 },
    /// Knife blade prism: length along local x (centred), height along local y
    /// with the cutting edge at `y = 0`, thickness along local z.
    WedgeBlade {
        length: f64,
        height: f64,
        spine_thickness: f64,
        edge_half_angle: f64,
    },
}

/// Axis-aligned box in world coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn contains(&self, x: &Vec3) -> bool {
        (0..3).all(|a| x[a] >= self.min[a] && x[a] <= self.max[a])
    }

    pub fn padded(&self, pad: f64) -> Self {
        Self {
            min: self.min.add_scalar(-pad),
            max: self.max.add_scalar(pad),
        }
    }
}

/// A posed signed distance field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdfShape {
    pub kind: ShapeKind,
    pub pose: Pose,
}

impl SdfShape {
    pub fn new(kind: ShapeKind, pose: Pose) -> Self {
        Self { kind, pose }
    }

    pub fn halfspace(normal: Vec3, offset: f64) -> Self {
        Self::new(
            ShapeKind::HalfSpace {
                normal: normal.normalize(),
                offset,
            },
            Pose::identity(),
        )
    }

    pub fn wedge_blade(length: f64, height: f64, spine_thickness: f64, edge_half_angle: f64) -> Self {
        Self::new(
            ShapeKind::WedgeBlade {
                length,
                height,
                spine_thickness,
                edge_half_angle,
            },
            Pose::identity(),
        )
    }

    /// Signed distance (negative inside) and outward unit normal at `x`.
    pub fn sample(&self, x: &Vec3) -> (f64, Vec3) {
        let local = self.pose.inverse_transform_point(&Point3::from(*x)).coords;
        let (phi, n_local) = match &self.kind {
            ShapeKind::HalfSpace { normal, offset } => (normal.dot(&local) - offset, *normal),
            ShapeKind::Box { half_extents } => box_sdf(&local, half_extents),
            ShapeKind::WedgeBlade {
                length,
                height,
                spine_thickness,
                edge_half_angle,
            } => wedge_sdf(&local, *length, *height, *spine_thickness, *edge_half_angle),
        };
        (phi, self.pose.rotation * n_local)
    }

    pub fn distance(&self, x: &Vec3) -> f64 {
        self.sample(x).0
    }

    /// World AABB of the solid, or `None` when unbounded.
    pub fn aabb(&self) -> Option<Aabb> {
        let half = match &self.kind {
            ShapeKind::HalfSpace { .. } => return None,
            ShapeKind::Box { half_extents } => {
                (-half_extents, *half_extents)
            }
            ShapeKind::WedgeBlade {
                length,
                height,
                spine_thickness,
                ..
            } => (
                Vec3::new(-0.5 * length, 0.0, -0.5 * spine_thickness),
                Vec3::new(0.5 * length, *height, 0.5 * spine_thickness),
            ),
        };
        let (lo, hi) = half;
        let mut min = Vec3::repeat(f64::INFINITY);
        let mut max = Vec3::repeat(f64::NEG_INFINITY);
        for corner in 0..8 {
            let c = Vec3::new(
                if corner & 1 == 0 { lo.x } else { hi.x },
                if corner & 2 == 0 { lo.y } else { hi.y },
                if corner & 4 == 0 { lo.z } else { hi.z },
            );
            let w = self.pose.transform_point(&Point3::from(c)).coords;
            min = min.inf(&w);
            max = max.sup(&w);
        }
        Some(Aabb { min, max })
    }

    /// End points `(handle end, tip)` of the cutting edge in world coordinates.
    pub fn edge_segment(&self) -> Option<(Vec3, Vec3)> {
        match &self.kind {
            ShapeKind::WedgeBlade { length, .. } => {
                let a = self.pose * Point3::new(-0.5 * length, 0.0, 0.0);
                let b = self.pose * Point3::new(0.5 * length, 0.0, 0.0);
                Some((a.coords, b.coords))
            }
            _ => None,
        }
    }

    /// Normal of the blade mid-plane (local z) in world coordinates.
    pub fn lateral_normal(&self) -> Vec3 {
        self.pose.rotation * Vec3::z()
    }
}

fn box_sdf(p: &Vec3, h: &Vec3) -> (f64, Vec3) {
    let q = p.abs() - h;
    let outside = q.sup(&Vec3::zeros());
    let out_len = outside.norm();
    let sign = |v: f64| if v < 0.0 { -1.0 } else { 1.0 };
    if out_len > 0.0 {
        let n = Vec3::new(
            sign(p.x) * outside.x,
            sign(p.y) * outside.y,
            sign(p.z) * outside.z,
        ) / out_len;
        return (out_len, n);
    }
    // Inside: nearest face; ties resolved in x, y, z order.
    let mut axis = 0;
    for a in 1..3 {
        if q[a] > q[axis] {
            axis = a;
        }
    }
    let mut n = Vec3::zeros();
    n[axis] = sign(p[axis]);
    (q[axis], n)
}

/// Cross-section of the blade in the local (z, y) plane as a convex polygon.
fn blade_polygon(height: f64, spine_thickness: f64, edge_half_angle: f64) -> Vec<Vector2<f64>> {
    let half_t = 0.5 * spine_thickness;
    let y_w = (half_t / edge_half_angle.tan()).min(height);
    let w = (y_w * edge_half_angle.tan()).min(half_t);
    let mut poly = vec![Vector2::new(0.0, 0.0), Vector2::new(w, y_w)];
    if y_w < height {
        poly.push(Vector2::new(w, height));
        poly.push(Vector2::new(-w, height));
    } else {
        poly.push(Vector2::new(-w, height));
    }
    poly.push(Vector2::new(-w, y_w));
    poly.dedup();
    poly
}

/// Exact signed distance to a convex counter-clockwise polygon with its gradient.
fn convex_polygon_sdf(p: &Vector2<f64>, poly: &[Vector2<f64>]) -> (f64, Vector2<f64>) {
    let n = poly.len();
    let mut max_plane = f64::NEG_INFINITY;
    let mut max_normal = Vector2::zeros();
    let mut best_d2 = f64::INFINITY;
    let mut best_point = poly[0];
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let e = b - a;
        // Outward normal of a CCW polygon edge.
        let normal = Vector2::new(e.y, -e.x).normalize();
        let plane = normal.dot(&(p - a));
        if plane > max_plane {
            max_plane = plane;
            max_normal = normal;
        }
        let t = ((p - a).dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
        let c = a + e * t;
        let d2 = (p - c).norm_squared();
        if d2 < best_d2 {
            best_d2 = d2;
            best_point = c;
        }
    }
    if max_plane <= 0.0 {
        return (max_plane, max_normal);
    }
    let d = best_d2.sqrt();
    if d == 0.0 {
        return (0.0, max_normal);
    }
    (d, (p - best_point) / d)
}

fn wedge_sdf(p: &Vec3, length: f64, height: f64, spine_thickness: f64, half_angle: f64) -> (f64, Vec3) {
    let poly = ccw(blade_polygon(height, spine_thickness, half_angle));
    let (d2, g2) = convex_polygon_sdf(&Vector2::new(p.z, p.y), &poly);
    let w0 = d2;
    let w1 = p.x.abs() - 0.5 * length;
    let sx = if p.x < 0.0 { -1.0 } else { 1.0 };
    let from_section = Vec3::new(0.0, g2.y, g2.x);
    let from_caps = Vec3::new(sx, 0.0, 0.0);
    if w0 > 0.0 && w1 > 0.0 {
        let phi = (w0 * w0 + w1 * w1).sqrt();
        let n = (from_section * w0 + from_caps * w1) / phi;
        (phi, n)
    } else if w0 >= w1 {
        (w0, from_section)
    } else {
        (w1, from_caps)
    }
}

/// Orders the (z, y) polygon counter-clockwise.
fn ccw(mut poly: Vec<Vector2<f64>>) -> Vec<Vector2<f64>> {
    let mut area = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        area += a.x * b.y - b.x * a.y;
    }
    if area < 0.0 {
        poly.reverse();
    }
    poly
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{Translation3, UnitQuaternion};
    use proptest::prelude::*;

    fn blade() -> SdfShape {
        SdfShape::wedge_blade(0.12, 0.05, 0.002, 10f64.to_radians())
    }

    #[test]
    fn halfspace_distance() {
        let hs = SdfShape::halfspace(Vec3::y(), 0.0);
        let (phi, n) = hs.sample(&Vec3::new(0.0, 0.2, 0.0));
        assert_relative_eq!(phi, 0.2);
        assert_eq!(n, Vec3::y());
    }

    #[test]
    fn box_center_breaks_ties_on_x() {
        let b = SdfShape::new(
            ShapeKind::Box {
                half_extents: Vec3::new(1.0, 1.0, 1.0),
            },
            Pose::identity(),
        );
        let (phi, n) = b.sample(&Vec3::zeros());
        assert_eq!(phi, -1.0);
        assert_eq!(n, Vec3::x());
    }

    #[test]
    fn box_matches_brute_force_nearest_face() {
        let h = Vec3::new(0.3, 0.2, 0.5);
        let b = SdfShape::new(ShapeKind::Box { half_extents: h }, Pose::identity());
        for i in 0..200 {
            let t = i as f64;
            let p = Vec3::new(
                0.8 * ((t * 0.37).sin()),
                0.6 * ((t * 0.71).cos()),
                1.2 * ((t * 0.13).sin()),
            );
            // Brute force: sample the surface densely.
            let phi = b.distance(&p);
            let inside = (0..3).all(|a| p[a].abs() <= h[a]);
            if inside {
                let face = (0..3).map(|a| h[a] - p[a].abs()).fold(f64::INFINITY, f64::min);
                assert_relative_eq!(phi, -face, epsilon = 1e-12);
            } else {
                let c = p.sup(&-h).inf(&h);
                assert_relative_eq!(phi, (p - c).norm(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cutting_edge_is_on_the_surface() {
        let b = blade();
        for x in [-0.06, -0.02, 0.0, 0.031, 0.06] {
            let (phi, _) = b.sample(&Vec3::new(x, 0.0, 0.0));
            assert!(phi.abs() < 1e-9, "phi = {phi} at x = {x}");
        }
    }

    #[test]
    fn below_the_edge_normal_points_down() {
        let b = blade();
        let (phi, n) = b.sample(&Vec3::new(0.0, -0.01, 0.0));
        assert_relative_eq!(phi, 0.01, epsilon = 1e-12);
        assert_relative_eq!(n, -Vec3::y(), epsilon = 1e-12);
    }

    #[test]
    fn flank_and_spine() {
        let b = blade();
        let (phi, n) = b.sample(&Vec3::new(0.0, 0.03, 0.01));
        assert_relative_eq!(phi, 0.01 - 0.001, epsilon = 1e-12);
        assert_relative_eq!(n, Vec3::z(), epsilon = 1e-12);
        let (phi, _) = b.sample(&Vec3::new(0.0, 0.03, 0.0));
        assert!(phi < 0.0);
    }

    #[test]
    fn posed_blade_edge_segment() {
        let mut b = blade();
        b.pose = Pose::from_parts(
            Translation3::new(0.1, 0.2, 0.3),
            UnitQuaternion::from_axis_angle(&Vec3::y_axis(), 0.5),
        );
        let (a, tip) = b.edge_segment().unwrap();
        assert!(b.distance(&a).abs() < 1e-9);
        assert!(b.distance(&tip).abs() < 1e-9);
        assert!(b.distance(&((a + tip) * 0.5)).abs() < 1e-9);
    }

    fn arb_point() -> impl Strategy<Value = Vec3> {
        (-0.1f64..0.1, -0.05f64..0.1, -0.05f64..0.05).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn blade_is_one_lipschitz(a in arb_point(), b in arb_point()) {
            let s = blade();
            let d = (s.distance(&a) - s.distance(&b)).abs();
            prop_assert!(d <= (a - b).norm() * (1.0 + 1e-6) + 1e-15);
        }

        #[test]
        fn blade_normal_is_unit(p in arb_point()) {
            let (_, n) = blade().sample(&p);
            prop_assert!((n.norm() - 1.0).abs() < 1e-6);
        }

        #[test]
        fn blade_normal_matches_finite_difference(p in arb_point()) {
            let s = blade();
            let (_, n) = s.sample(&p);
            let h = 1e-7;
            let mut g = Vec3::zeros();
            for a in 0..3 {
                let mut e = Vec3::zeros();
                e[a] = h;
                g[a] = (s.distance(&(p + e)) - s.distance(&(p - e))) / (2.0 * h);
            }
            // Away from the medial axis the gradient is unique.
            prop_assume!((g.norm() - 1.0).abs() < 1e-4);
            prop_assert!((g - n).norm() < 1e-4);
        }

        #[test]
        fn box_is_one_lipschitz(a in arb_point(), b in arb_point()) {
            let s = SdfShape::new(ShapeKind::Box { half_extents: Vec3::new(0.03, 0.02, 0.01) }, Pose::identity());
            let d = (s.distance(&a) - s.distance(&b)).abs();
            prop_assert!(d <= (a - b).norm() * (1.0 + 1e-6) + 1e-15);
        }
    }
}
