use crate::contact::SdfShape;
use crate::error::{Error, Result};
use crate::planner::task::CutStyle;
use crate::planner::trajectory::{generate_trajectory, Trajectory};
use crate::Vec3;

fn regenerate(traj: &Trajectory, style: CutStyle) -> Result<Trajectory> {
    let plan = traj
        .plan
        .as_ref()
        .ok_or_else(|| Error::Planning("trajectory carries no plan to restyle".into()))?;
    let mut task = plan.task.clone();
    task.style = style;
    generate_trajectory(&task, &plan.planes, &plan.aabb, &plan.params)
}

/// The Normal-style trajectory a (possibly restyled) trajectory was planned from.
pub fn normal_skeleton(traj: &Trajectory) -> Result<Trajectory> {
    if traj.style == CutStyle::Normal {
        return Ok(traj.clone());
    }
    regenerate(traj, CutStyle::Normal)
}

/// Replaces everything from `contact_start` on with the target style's motion.
///
/// The suffix comes from the target-style plan, offset by the same number of
/// waypoints past its own first contact and shifted in time to join the prefix.
pub fn style_transfer(traj: &Trajectory, target: CutStyle, contact_start: usize) -> Result<Trajectory> {
    if traj.style != CutStyle::Normal {
        return Err(Error::UnsupportedSourceStyle(traj.style.name().into()));
    }
    let n = traj.waypoints.len();
    if contact_start >= n {
        return Err(Error::Planning(format!(
            "contact start {contact_start} outside a {n}-waypoint trajectory"
        )));
    }
    if target == CutStyle::Normal {
        return Ok(traj.clone());
    }
    let styled = regenerate(traj, target)?;
    let src_contact = traj.first_contact_index().unwrap_or(contact_start);
    let dst_contact = styled
        .first_contact_index()
        .ok_or_else(|| Error::Planning("restyled plan has no contact phase".into()))?;
    let j = (dst_contact + contact_start)
        .saturating_sub(src_contact)
        .min(styled.waypoints.len() - 1);
    let join_t = traj.waypoints[contact_start].t;
    let shift = join_t - styled.waypoints[j].t;
    let mut waypoints = traj.waypoints[..contact_start].to_vec();
    waypoints.extend(styled.waypoints[j..].iter().cloned().map(|mut w| {
        w.t += shift;
        w
    }));
    let mut out = Trajectory {
        style: target,
        waypoints,
        reference_offset: styled.reference_offset,
        plan: styled.plan,
    };
    // The prefix keeps its own speeds.
    let keep: Vec<f64> = out.waypoints[..contact_start].iter().map(|w| w.v_cmd).collect();
    out.recompute_speeds();
    for (w, v) in out.waypoints.iter_mut().zip(keep) {
        w.v_cmd = v;
    }
    out.validate()?;
    Ok(out)
}

/// First waypoint where the blade overlaps any of `object_points`.
pub fn detect_contact_phase(traj: &Trajectory, blade: &SdfShape, object_points: &[Vec3]) -> Option<usize> {
    traj.waypoints.iter().position(|w| {
        let posed = SdfShape::new(blade.kind.clone(), w.pose);
        let reach = posed.aabb();
        object_points.iter().any(|p| {
            if let Some(b) = &reach {
                if !b.contains(p) {
                    return false;
                }
            }
            posed.distance(p) <= 0.0
        })
    })
}
