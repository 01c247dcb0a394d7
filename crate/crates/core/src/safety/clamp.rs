use crate::planner::Trajectory;

/// Slows every segment commanded above `v_safe` down to `v_safe` by
/// stretching its duration. Poses and phases are untouched.
pub fn clamp_trajectory(traj: &Trajectory, v_safe: f64) -> Trajectory {
    let mut out = traj.clone();
    let n = out.waypoints.len();
    if n == 0 || !(v_safe > 0.0) {
        return out;
    }
    let mut shift = 0.0;
    for i in 0..n {
        let old_t = traj.waypoints[i].t;
        out.waypoints[i].t = old_t + shift;
        if i + 1 == n {
            break;
        }
        let v = traj.waypoints[i].v_cmd;
        if v > v_safe {
            let dt = traj.waypoints[i + 1].t - old_t;
            let stretched = dt * (v / v_safe);
            shift += stretched - dt;
            out.waypoints[i].v_cmd = (v * dt / stretched).min(v_safe);
        }
    }
    out
}
