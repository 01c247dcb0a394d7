use serde::{Deserialize, Serialize};

use crate::contact::sdf::{Aabb, SdfShape};
use crate::error::{Error, Result};
use crate::mpm::Grid;
use crate::Vec3;

/// Contact law parameters shared by the knife and the board.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContactParams {
    /// Normal restitution in `[0, 1]`.
    pub restitution: f64,
    /// Coulomb friction coefficient.
    pub friction_mu: f64,
    /// Padding added to tool AABBs before culling node queries (m).
    pub query_aabb_pad: f64,
    /// Fraction of `dx` below which a node counts as in contact.
    pub activation_cells: f64,
    /// Skip SDF queries for nodes outside the padded tool AABB.
    pub aabb_cull: bool,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            restitution: 0.0,
            friction_mu: 0.4,
            query_aabb_pad: 0.02,
            activation_cells: 0.5,
            aabb_cull: true,
        }
    }
}

/// Velocity-level contact between one node and a moving tool surface.
///
/// `n` is the tool's outward unit normal at the node.
pub fn resolve_node_contact(
    v_node: &Vec3,
    v_tool: &Vec3,
    n: &Vec3,
    params: &ContactParams,
) -> Result<Vec3> {
    if (n.norm() - 1.0).abs() > 1e-6 {
        return Err(Error::Invariant(format!(
            "contact normal must be unit length, got |n| = {}",
            n.norm()
        )));
    }
    let u = v_node - v_tool;
    let un = u.dot(n);
    if un >= 0.0 {
        return Ok(*v_node);
    }
    let ut = u - n * un;
    let un_new = -params.restitution * un;
    let dun = (un_new - un).abs();
    let ut_len = ut.norm();
    let ut_new = if ut_len > 0.0 {
        ut * (1.0 - params.friction_mu * dun / ut_len).max(0.0)
    } else {
        ut
    };
    Ok(v_tool + n * un_new + ut_new)
}

/// A kinematically driven SDF tool with rigid-body velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactTool {
    pub shape: SdfShape,
    pub linear: Vec3,
    pub angular: Vec3,
    /// Point about which `angular` acts.
    pub origin: Vec3,
}

impl ContactTool {
    pub fn fixed(shape: SdfShape) -> Self {
        Self {
            shape,
            linear: Vec3::zeros(),
            angular: Vec3::zeros(),
            origin: Vec3::zeros(),
        }
    }

    pub fn velocity_at(&self, x: &Vec3) -> Vec3 {
        self.linear + self.angular.cross(&(x - self.origin))
    }
}

/// Per-tool outcome of one contact pass over the grid.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ContactPass {
    /// `sum_i m_i (v_after - v_before)` for this tool, in node order.
    pub impulse: Vec3,
    /// Sum of `|u_n|` over approaching nodes within the approach band.
    pub approach: f64,
    pub contacted: usize,
}

/// Resolves contact of `tool` against every active node, in ascending node order.
///
/// Nodes within `approach_band` of the tool that are approaching it contribute
/// to the approach accumulator, whether or not they end up in contact.
pub fn resolve_grid_contact(
    grid: &mut Grid,
    tool: &ContactTool,
    params: &ContactParams,
    approach_band: f64,
) -> Result<ContactPass> {
    let threshold = params.activation_cells * grid.dx();
    let reach = threshold.max(approach_band);
    let cull: Option<Aabb> = if params.aabb_cull {
        tool.shape
            .aabb()
            .map(|b| b.padded(params.query_aabb_pad.max(reach)))
    } else {
        None
    };
    let mut pass = ContactPass::default();
    let active: Vec<usize> = grid.active().to_vec();
    for idx in active {
        let x = grid.node_position(idx);
        if let Some(b) = &cull {
            if !b.contains(&x) {
                continue;
            }
        }
        let (phi, n) = tool.shape.sample(&x);
        if phi >= reach {
            continue;
        }
        let v_tool = tool.velocity_at(&x);
        let node = grid.node_mut(idx);
        let before = node.vel;
        let un = (node.v_before - v_tool).dot(&n);
        if un < 0.0 && phi < approach_band {
            pass.approach += -un;
        }
        if phi < threshold {
            let after = resolve_node_contact(&before, &v_tool, &n, params)?;
            if after != before {
                pass.contacted += 1;
                pass.impulse += (after - before) * node.mass;
            }
            node.vel = after;
            node.v_after = after;
        }
    }
    Ok(pass)
}

/// Normalized contact strength `min(1, accumulator / c_norm)`.
pub fn contact_strength(approach_accumulator: f64, c_norm: f64) -> f64 {
    if !(c_norm > 0.0) || !(approach_accumulator > 0.0) {
        return 0.0;
    }
    (approach_accumulator / c_norm).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn inelastic_frictionless() -> ContactParams {
        ContactParams {
            restitution: 0.0,
            friction_mu: 0.0,
            ..ContactParams::default()
        }
    }

    #[test]
    fn separating_node_is_untouched() {
        let v = Vec3::new(0.3, 1.0, 0.0);
        let out = resolve_node_contact(&v, &Vec3::zeros(), &Vec3::y(), &ContactParams::default()).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn inelastic_normal_kill() {
        let out = resolve_node_contact(
            &Vec3::new(0.0, -1.0, 0.0),
            &Vec3::zeros(),
            &Vec3::y(),
            &inelastic_frictionless(),
        )
        .unwrap();
        assert_eq!(out, Vec3::zeros());
    }

    #[test]
    fn coulomb_cap_reaches_full_stick() {
        let params = ContactParams {
            restitution: 0.0,
            friction_mu: 2.0,
            ..ContactParams::default()
        };
        let out = resolve_node_contact(&Vec3::new(1.0, -1.0, 0.0), &Vec3::zeros(), &Vec3::y(), &params).unwrap();
        assert_eq!(out, Vec3::zeros());
    }

    #[test]
    fn partial_slip() {
        let params = ContactParams {
            restitution: 0.0,
            friction_mu: 0.25,
            ..ContactParams::default()
        };
        let out = resolve_node_contact(&Vec3::new(1.0, -1.0, 0.0), &Vec3::zeros(), &Vec3::y(), &params).unwrap();
        assert_relative_eq!(out, Vec3::new(0.75, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn moving_tool_frame() {
        let out = resolve_node_contact(
            &Vec3::new(0.0, 0.0, 0.0),
            &Vec3::new(0.0, -2.0, 0.0),
            &(-Vec3::y()),
            &inelastic_frictionless(),
        )
        .unwrap();
        assert_relative_eq!(out, Vec3::new(0.0, -2.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn non_unit_normal_is_rejected() {
        let r = resolve_node_contact(&Vec3::zeros(), &Vec3::zeros(), &Vec3::new(0.0, 2.0, 0.0), &ContactParams::default());
        assert!(matches!(r, Err(Error::Invariant(_))));
    }

    #[test]
    fn contact_strength_saturates() {
        assert_eq!(contact_strength(0.0, 5.0), 0.0);
        assert_eq!(contact_strength(5.0, 5.0), 1.0);
        assert_eq!(contact_strength(2.5, 5.0), 0.5);
        assert_eq!(contact_strength(50.0, 5.0), 1.0);
    }

    fn arb_vec(s: f64) -> impl Strategy<Value = Vec3> {
        (-s..s, -s..s, -s..s).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    fn arb_unit() -> impl Strategy<Value = Vec3> {
        arb_vec(1.0).prop_filter("nonzero", |v| v.norm() > 1e-3).prop_map(|v| v.normalize())
    }

    proptest! {
        #[test]
        fn inelastic_contact_never_penetrates(v in arb_vec(3.0), vt in arb_vec(3.0), n in arb_unit(), mu in 0.0f64..2.0) {
            let params = ContactParams { restitution: 0.0, friction_mu: mu, ..ContactParams::default() };
            let out = resolve_node_contact(&v, &vt, &n, &params).unwrap();
            prop_assert!((out - vt).dot(&n) >= -1e-12);
        }

        #[test]
        fn tool_frame_energy_never_grows(v in arb_vec(3.0), vt in arb_vec(3.0), n in arb_unit(), mu in 0.0f64..2.0, e in 0.0f64..=1.0) {
            let params = ContactParams { restitution: e, friction_mu: mu, ..ContactParams::default() };
            let out = resolve_node_contact(&v, &vt, &n, &params).unwrap();
            prop_assert!((out - vt).norm_squared() <= (v - vt).norm_squared() * (1.0 + 1e-12) + 1e-15);
        }
    }
}
