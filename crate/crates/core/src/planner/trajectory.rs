use std::io::{Read, Write};

use nalgebra::{Matrix3, Point3, Rotation3, Translation3, Unit, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::contact::{Aabb, Pose, SdfShape};
use crate::error::{Error, Result};
use crate::planner::geometry::CutAxis;
use crate::planner::task::{CutStyle, CutTask};
use crate::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Approach,
    Contact,
    Retract,
}

impl Phase {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "approach" => Ok(Phase::Approach),
            "contact" => Ok(Phase::Contact),
            "retract" => Ok(Phase::Retract),
            other => Err(Error::Format(format!("unknown phase '{other}'"))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Phase::Approach => "approach",
            Phase::Contact => "contact",
            Phase::Retract => "retract",
        }
    }
}

/// Knife blade dimensions (m, rad).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BladeGeometry {
    pub length: f64,
    pub height: f64,
    pub spine_thickness: f64,
    pub edge_half_angle: f64,
}

impl Default for BladeGeometry {
    fn default() -> Self {
        Self {
            length: 0.24,
            height: 0.05,
            spine_thickness: 0.002,
            edge_half_angle: 0.15,
        }
    }
}

impl BladeGeometry {
    /// Blade SDF at the identity pose.
    pub fn shape(&self) -> SdfShape {
        SdfShape::wedge_blade(self.length, self.height, self.spine_thickness, self.edge_half_angle)
    }
}

/// Style parameters and sampling resolution of the planner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerParams {
    /// Blade tilt of bias cuts from vertical (rad).
    pub bias_angle: f64,
    pub saw_amplitude: f64,
    /// Range the per-episode saw frequency is drawn from (Hz).
    pub saw_frequency_range: (f64, f64),
    /// Waypoint spacing in time (s).
    pub waypoint_dt: f64,
    /// Depth the edge travels below the object's base (m).
    pub overcut: f64,
    /// Horizontal gap between the object and the pinned guillotine tip (m).
    pub tip_margin: f64,
    pub blade: BladeGeometry,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            bias_angle: 30f64.to_radians(),
            saw_amplitude: 0.01,
            saw_frequency_range: (2.0, 6.0),
            waypoint_dt: 1.0 / 512.0,
            overcut: 0.001,
            tip_margin: 0.012,
            blade: BladeGeometry::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub t: f64,
    /// Pose of the blade frame: origin at the edge midpoint, x along the
    /// blade towards the tip, y up from the edge, z along the blade normal.
    pub pose: Pose,
    /// Speed of the reference edge point over the segment starting here (m/s).
    pub v_cmd: f64,
    pub phase: Phase,
}

/// Inputs a trajectory was generated from, kept so it can be restyled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanContext {
    pub task: CutTask,
    pub aabb: Aabb,
    pub axis: CutAxis,
    pub planes: Vec<f64>,
    pub params: PlannerParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub style: CutStyle,
    pub waypoints: Vec<Waypoint>,
    /// Blade-local x coordinate of the edge point whose speed `v_cmd` tracks.
    pub reference_offset: f64,
    pub plan: Option<PlanContext>,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        match (self.waypoints.first(), self.waypoints.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    pub fn start_time(&self) -> f64 {
        self.waypoints.first().map_or(0.0, |w| w.t)
    }

    pub fn end_time(&self) -> f64 {
        self.waypoints.last().map_or(0.0, |w| w.t)
    }

    /// Index of the waypoint segment containing `t`, clamped to the path.
    pub fn segment_at(&self, t: f64) -> usize {
        let n = self.waypoints.len();
        if n < 2 {
            return 0;
        }
        let i = self.waypoints.partition_point(|w| w.t <= t);
        i.saturating_sub(1).min(n - 2)
    }

    /// Interpolated pose at time `t`; linear in translation, slerp in rotation.
    pub fn pose_at(&self, t: f64) -> Pose {
        let n = self.waypoints.len();
        if n == 1 || t <= self.start_time() {
            return self.waypoints[0].pose;
        }
        if t >= self.end_time() {
            return self.waypoints[n - 1].pose;
        }
        let i = self.segment_at(t);
        let (a, b) = (&self.waypoints[i], &self.waypoints[i + 1]);
        let s = (t - a.t) / (b.t - a.t);
        a.pose.lerp_slerp(&b.pose, s)
    }

    pub fn phase_at(&self, t: f64) -> Phase {
        if t >= self.end_time() {
            return self.waypoints.last().map_or(Phase::Retract, |w| w.phase);
        }
        self.waypoints[self.segment_at(t)].phase
    }

    pub fn reference_point(&self, pose: &Pose) -> Vec3 {
        (pose * Point3::new(self.reference_offset, 0.0, 0.0)).coords
    }

    /// First waypoint whose segment is a contact segment.
    pub fn first_contact_index(&self) -> Option<usize> {
        self.waypoints.iter().position(|w| w.phase == Phase::Contact)
    }

    pub fn max_speed(&self) -> f64 {
        self.waypoints.iter().map(|w| w.v_cmd).fold(0.0, f64::max)
    }

    /// Recomputes each `v_cmd` from the reference-point path.
    pub fn recompute_speeds(&mut self) {
        let n = self.waypoints.len();
        for i in 0..n {
            self.waypoints[i].v_cmd = if i + 1 < n {
                let a = self.reference_point(&self.waypoints[i].pose);
                let b = self.reference_point(&self.waypoints[i + 1].pose);
                (b - a).norm() / (self.waypoints[i + 1].t - self.waypoints[i].t)
            } else {
                0.0
            };
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.waypoints.is_empty() {
            return Err(Error::Planning("trajectory has no waypoints".into()));
        }
        for w in &self.waypoints {
            let finite = w.t.is_finite()
                && w.v_cmd.is_finite()
                && w.pose.translation.vector.iter().all(|c| c.is_finite())
                && w.pose.rotation.coords.iter().all(|c| c.is_finite());
            if !finite {
                return Err(Error::Planning(format!("non-finite waypoint at t = {}", w.t)));
            }
        }
        if let Some(pair) = self.waypoints.windows(2).find(|p| !(p[1].t > p[0].t)) {
            return Err(Error::Planning(format!(
                "timestamps must increase strictly ({} then {})",
                pair[0].t, pair[1].t
            )));
        }
        Ok(())
    }
}

/// Blade orientation for straight cuts along `axis`, before style tilts.
pub fn base_rotation(axis: CutAxis) -> UnitQuaternion<f64> {
    let normal = axis.unit();
    let up = Vec3::y();
    let length_dir = up.cross(&normal);
    let m = Matrix3::from_columns(&[length_dir, up, normal]);
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(m))
}

fn pose(rotation: UnitQuaternion<f64>, origin: Vec3) -> Pose {
    Pose::from_parts(Translation3::from(origin), rotation)
}

struct Builder {
    waypoints: Vec<Waypoint>,
    t: f64,
    dt: f64,
}

impl Builder {
    /// Appends the samples of `path` over `[0, 1)` spread over `duration`.
    fn phase(&mut self, phase: Phase, duration: f64, path: impl Fn(f64, f64) -> Pose) {
        let n = ((duration / self.dt).ceil() as usize).max(1);
        for k in 0..n {
            let s = k as f64 / n as f64;
            self.waypoints.push(Waypoint {
                t: self.t + s * duration,
                pose: path(s, s * duration),
                v_cmd: 0.0,
                phase,
            });
        }
        self.t += duration;
    }
}

struct Frame {
    axis: CutAxis,
    rot0: UnitQuaternion<f64>,
    /// Horizontal centre of the object across the cut axis.
    across_center: f64,
    y_top: f64,
    y_bot: f64,
    y_start: f64,
    y_end: f64,
}

impl Frame {
    fn point(&self, cut: f64, across: f64, y: f64) -> Vec3 {
        let mut p = Vec3::zeros();
        p[self.axis.index()] = cut;
        p[self.axis.across().index()] = across;
        p.y = y;
        p
    }
}

/// Plans approach, contact and retract for every plane of `task`.
pub fn generate_trajectory(task: &CutTask, planes: &[f64], aabb: &Aabb, params: &PlannerParams) -> Result<Trajectory> {
    task.validate()?;
    if planes.is_empty() {
        return Err(Error::Planning("no cut planes".into()));
    }
    if !(params.waypoint_dt > 0.0) {
        return Err(Error::Planning("waypoint_dt must be positive".into()));
    }
    let axis = CutAxis::longest(aabb);
    let a = axis.index();
    if let Some(p) = planes.iter().find(|&&p| !(p >= aabb.min[a] && p <= aabb.max[a])) {
        return Err(Error::Planning(format!(
            "plane {p} lies outside the object extent {}..{}",
            aabb.min[a], aabb.max[a]
        )));
    }
    let mut sorted = planes.to_vec();
    sorted.sort_by(f64::total_cmp);

    let b = axis.across().index();
    let frame = Frame {
        axis,
        rot0: base_rotation(axis),
        across_center: 0.5 * (aabb.min[b] + aabb.max[b]),
        y_top: aabb.max.y,
        y_bot: aabb.min.y,
        y_start: aabb.max.y + task.height,
        y_end: aabb.min.y - params.overcut,
    };
    let mut builder = Builder {
        waypoints: Vec::new(),
        t: 0.0,
        dt: params.waypoint_dt,
    };

    let mut reference_offset = 0.0;
    for &plane in &sorted {
        reference_offset = plan_cut(&mut builder, task, params, &frame, aabb, plane)?;
    }
    let mut traj = Trajectory {
        style: task.style,
        waypoints: builder.waypoints,
        reference_offset,
        plan: Some(PlanContext {
            task: task.clone(),
            aabb: *aabb,
            axis,
            planes: sorted,
            params: params.clone(),
        }),
    };
    traj.recompute_speeds();
    traj.validate()?;
    Ok(traj)
}

/// Emits one cut and returns the blade-local offset of its reference point.
fn plan_cut(
    builder: &mut Builder,
    task: &CutTask,
    params: &PlannerParams,
    frame: &Frame,
    aabb: &Aabb,
    plane: f64,
) -> Result<f64> {
    let v = task.speed;
    let f = frame;
    let offset = match task.style {
        CutStyle::Normal | CutStyle::Saw => {
            let at = |y: f64| pose(f.rot0, f.point(plane, f.across_center, y));
            transit(builder, &at(f.y_start), v);
            builder.phase(Phase::Approach, (f.y_start - f.y_top) / v, |s, _| at(lerp(f.y_start, f.y_top, s)));
            let contact_len = f.y_top - f.y_end;
            let length_dir = f.rot0 * Vec3::x();
            let (amp, freq) = (params.saw_amplitude, task.saw_frequency);
            let saw = task.style == CutStyle::Saw;
            let contact_pose = move |s: f64, tau: f64| {
                let mut p = at(lerp(f.y_top, f.y_end, s));
                if saw {
                    p.translation.vector += length_dir * (amp * (std::f64::consts::TAU * freq * tau).sin());
                }
                p
            };
            builder.phase(Phase::Contact, contact_len / v, contact_pose);
            let end = contact_pose(1.0, contact_len / v);
            retract(builder, f, &end, v);
            0.0
        }
        CutStyle::Bias => {
            let tan = params.bias_angle.tan();
            let axis_world = f.axis.unit();
            let tilt = UnitQuaternion::from_axis_angle(&Vec3::x_axis(), -params.bias_angle);
            let rot = f.rot0 * tilt;
            let y_mid = 0.5 * (f.y_top + f.y_bot);
            let at = |y: f64| {
                let mut o = f.point(plane, f.across_center, y);
                o += axis_world * ((y_mid - y) * tan);
                pose(rot, o)
            };
            transit(builder, &at(f.y_start), v);
            let approach_len = (f.y_start - f.y_top) / params.bias_angle.cos();
            builder.phase(Phase::Approach, approach_len / v, |s, _| at(lerp(f.y_start, f.y_top, s)));
            let contact_len = (f.y_top - f.y_end) / params.bias_angle.cos();
            builder.phase(Phase::Contact, contact_len / v, |s, _| at(lerp(f.y_top, f.y_end, s)));
            retract(builder, f, &at(f.y_end), v);
            0.0
        }
        CutStyle::Guillotine => {
            let half = 0.5 * params.blade.length;
            let length_dir = f.rot0 * Vec3::x();
            let b = f.axis.across().index();
            // Object extent in the blade-length coordinate.
            let (s_lo, s_hi) = if length_dir[b] > 0.0 {
                (aabb.min[b], aabb.max[b])
            } else {
                (-aabb.max[b], -aabb.min[b])
            };
            let sign = length_dir[b].signum();
            let s_tip = s_hi + params.tip_margin;
            if s_tip - 2.0 * half > s_lo - params.tip_margin {
                return Err(Error::Planning(format!(
                    "blade length {} too short for a tip-pinned cut across {} m",
                    params.blade.length,
                    s_hi - s_lo
                )));
            }
            let depth = f.y_top - f.y_bot;
            let theta0 = ((depth + 0.25 * task.height) / params.tip_margin).atan();
            let s_center = 0.5 * (s_lo + s_hi);
            let lever = s_tip - s_center;
            let at = |tip_y: f64, theta: f64| {
                let rot = f.rot0 * UnitQuaternion::from_axis_angle(&Unit::new_unchecked(Vec3::z()), -theta);
                let tip = f.point(plane, sign * s_tip, tip_y);
                pose(rot, tip - rot * Vec3::new(half, 0.0, 0.0))
            };
            transit(builder, &at(f.y_start, theta0), v);
            builder.phase(Phase::Approach, (f.y_start - f.y_bot) / v, |s, _| at(lerp(f.y_start, f.y_bot, s), theta0));
            // The reference edge point sweeps an arc of radius `lever` about the tip.
            let contact_len = lever * theta0;
            builder.phase(Phase::Contact, contact_len / v, |s, _| at(f.y_bot, theta0 * (1.0 - s)));
            retract(builder, f, &at(f.y_bot, 0.0), v);
            half - lever
        }
    };
    Ok(offset)
}

fn lerp(a: f64, b: f64, s: f64) -> f64 {
    a + (b - a) * s
}

/// Moves from the end of the previous cut to `target` at start height.
fn transit(builder: &mut Builder, target: &Pose, v: f64) {
    // The previous retract left its end sample as the last waypoint; the
    // next phase re-emits it as its first sample.
    let Some(from) = builder.waypoints.pop().map(|w| w.pose) else {
        return;
    };
    let dist = (target.translation.vector - from.translation.vector).norm();
    if dist == 0.0 && from.rotation == target.rotation {
        return;
    }
    let duration = (dist / v).max(builder.dt);
    builder.phase(Phase::Retract, duration, |s, _| from.lerp_slerp(target, s));
}

/// Lifts the blade from `from` straight up to start height. The final sample
/// is left as the last waypoint so the next cut can transit from it.
fn retract(builder: &mut Builder, frame: &Frame, from: &Pose, v: f64) {
    let target = retract_target_from(frame, from);
    let rise = target.translation.vector.y - from.translation.vector.y;
    let duration = (rise / v).max(builder.dt);
    builder.phase(Phase::Retract, duration, |s, _| from.lerp_slerp(&target, s));
    builder.waypoints.push(Waypoint {
        t: builder.t,
        pose: target,
        v_cmd: 0.0,
        phase: Phase::Retract,
    });
}

fn retract_target_from(frame: &Frame, from: &Pose) -> Pose {
    let mut origin = from.translation.vector;
    origin.y = frame.y_start;
    pose(from.rotation, origin)
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    t: f64,
    px: f64,
    py: f64,
    pz: f64,
    qw: f64,
    qx: f64,
    qy: f64,
    qz: f64,
    v_cmd: f64,
    phase: String,
    style: String,
}

/// Writes `t,px,py,pz,qw,qx,qy,qz,v_cmd,phase,style` rows.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for wp in &traj.waypoints {
        let p = wp.pose.translation.vector;
        let q = wp.pose.rotation.quaternion();
        w.serialize(CsvRow {
            t: wp.t,
            px: p.x,
            py: p.y,
            pz: p.z,
            qw: q.w,
            qx: q.i,
            qy: q.j,
            qz: q.k,
            v_cmd: wp.v_cmd,
            phase: wp.phase.name().into(),
            style: traj.style.name().into(),
        })
        .map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

/// Reads a trajectory written by [`write_trajectory_csv`]. Plan metadata is not stored.
pub fn read_trajectory_csv<R: Read>(input: R, reference_offset: f64) -> Result<Trajectory> {
    let mut r = csv::Reader::from_reader(input);
    let mut waypoints = Vec::new();
    let mut style = None;
    for row in r.deserialize::<CsvRow>() {
        let row = row.map_err(|e| Error::Format(e.to_string()))?;
        let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(row.qw, row.qx, row.qy, row.qz));
        waypoints.push(Waypoint {
            t: row.t,
            pose: pose(q, Vec3::new(row.px, row.py, row.pz)),
            v_cmd: row.v_cmd,
            phase: Phase::parse(&row.phase)?,
        });
        style.get_or_insert(CutStyle::from_name(&row.style)?);
    }
    let traj = Trajectory {
        style: style.ok_or_else(|| Error::Format("empty trajectory file".into()))?,
        waypoints,
        reference_offset,
        plan: None,
    };
    traj.validate()?;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::object::ObjectKind;
    use crate::planner::task::{CutState, Side};
    use approx::assert_relative_eq;

    fn box_aabb(depth: f64) -> Aabb {
        Aabb {
            min: Vec3::new(0.15, 0.05, 0.22),
            max: Vec3::new(0.35, 0.05 + depth, 0.28),
        }
    }

    fn task(style: CutStyle, state: CutState) -> CutTask {
        CutTask::new(style, state, ObjectKind::Block)
    }

    fn contact(traj: &Trajectory) -> Vec<&Waypoint> {
        let first = traj.first_contact_index().unwrap();
        let last = traj.waypoints.iter().rposition(|w| w.phase == Phase::Contact).unwrap();
        traj.waypoints[first..=last + 1].iter().collect()
    }

    #[test]
    fn frame_puts_blade_normal_on_cut_axis() {
        let r = base_rotation(CutAxis::X);
        assert_relative_eq!(r * Vec3::z(), Vec3::x(), epsilon = 1e-12);
        assert_relative_eq!(r * Vec3::y(), Vec3::y(), epsilon = 1e-12);
        assert_relative_eq!(r * Vec3::x(), -Vec3::z(), epsilon = 1e-12);
    }

    #[test]
    fn normal_cut_has_no_lateral_motion() {
        let aabb = box_aabb(0.04);
        let traj = generate_trajectory(&task(CutStyle::Normal, CutState::Middle), &[0.25], &aabb, &PlannerParams::default()).unwrap();
        let c = contact(&traj);
        let p0 = c[0].pose.translation.vector;
        for w in &c {
            let p = w.pose.translation.vector;
            assert_eq!(p.x, p0.x);
            assert_eq!(p.z, p0.z);
        }
        assert_relative_eq!(p0.x, 0.25);
        let phases: Vec<Phase> = traj.waypoints.iter().map(|w| w.phase).collect();
        assert_eq!(phases.first(), Some(&Phase::Approach));
        assert_eq!(phases.last(), Some(&Phase::Retract));
    }

    #[test]
    fn bias_drift_matches_tangent() {
        let aabb = box_aabb(0.06);
        let params = PlannerParams {
            overcut: 0.0,
            ..PlannerParams::default()
        };
        let traj = generate_trajectory(&task(CutStyle::Bias, CutState::Middle), &[0.25], &aabb, &params).unwrap();
        let c = contact(&traj);
        let drift = c.last().unwrap().pose.translation.vector.x - c[0].pose.translation.vector.x;
        assert_relative_eq!(drift, 0.06 * 30f64.to_radians().tan(), epsilon = 1e-12);
        assert_relative_eq!(drift, 0.0346, epsilon = 1e-4);
    }

    #[test]
    fn saw_oscillation_sign_changes() {
        let aabb = box_aabb(0.5);
        let mut t = task(CutStyle::Saw, CutState::Middle);
        t.speed = 0.5;
        t.saw_frequency = 4.0;
        let params = PlannerParams {
            overcut: 0.0,
            ..PlannerParams::default()
        };
        let traj = generate_trajectory(&t, &[0.25], &aabb, &params).unwrap();
        let c = contact(&traj);
        assert_relative_eq!(c.last().unwrap().t - c[0].t, 1.0, epsilon = 1e-9);
        let lateral: Vec<f64> = c.iter().map(|w| w.pose.translation.vector.z).collect();
        let vel: Vec<f64> = lateral.windows(2).map(|p| p[1] - p[0]).collect();
        let flips = vel.windows(2).filter(|p| p[0] * p[1] < 0.0).count();
        assert!(flips >= 7, "{flips} sign changes");
        for w in &c {
            assert_eq!(w.pose.translation.vector.x, c[0].pose.translation.vector.x);
        }
    }

    #[test]
    fn guillotine_tip_stays_pinned() {
        let aabb = box_aabb(0.04);
        let params = PlannerParams::default();
        let traj = generate_trajectory(&task(CutStyle::Guillotine, CutState::Middle), &[0.25], &aabb, &params).unwrap();
        let c = contact(&traj);
        let tip = |w: &Waypoint| (w.pose * Point3::new(0.5 * params.blade.length, 0.0, 0.0)).coords;
        let t0 = tip(c[0]);
        for w in &c {
            assert_relative_eq!(tip(w), t0, epsilon = 1e-12);
        }
        assert!(t0.z < aabb.min.z || t0.z > aabb.max.z);
        assert!(c[0].pose.translation.vector.y > c.last().unwrap().pose.translation.vector.y);
    }

    #[test]
    fn split_visits_planes_in_ascending_order() {
        let aabb = box_aabb(0.04);
        let planes = [0.3, 0.2, 0.25];
        let traj = generate_trajectory(&task(CutStyle::Normal, CutState::Split { k: 4 }), &planes, &aabb, &PlannerParams::default()).unwrap();
        let mut visited: Vec<f64> = Vec::new();
        for pair in traj.waypoints.windows(2) {
            if pair[1].phase == Phase::Contact && pair[0].phase != Phase::Contact {
                visited.push(pair[1].pose.translation.vector.x);
            }
        }
        assert_eq!(visited, vec![0.2, 0.25, 0.3]);
        traj.validate().unwrap();
    }

    #[test]
    fn plane_outside_object_is_rejected() {
        let aabb = box_aabb(0.04);
        let r = generate_trajectory(&task(CutStyle::Normal, CutState::Middle), &[0.5], &aabb, &PlannerParams::default());
        assert!(matches!(r, Err(Error::Planning(_))));
    }

    #[test]
    fn contact_speed_matches_task() {
        let aabb = box_aabb(0.04);
        for style in CutStyle::ALL {
            let st = CutState::Ratio { r: 0.3, side: Side::Right };
            let traj = generate_trajectory(&task(style, st), &[0.29], &aabb, &PlannerParams::default()).unwrap();
            let k = traj.first_contact_index().unwrap();
            let v = traj.waypoints[k].v_cmd;
            let expect = if style == CutStyle::Saw { v.max(0.5) } else { 0.5 };
            // Guillotine samples are chords of an arc.
            assert_relative_eq!(v, expect, max_relative = 1e-4);
        }
    }

    #[test]
    fn csv_round_trip() {
        let aabb = box_aabb(0.04);
        let traj = generate_trajectory(&task(CutStyle::Saw, CutState::Middle), &[0.25], &aabb, &PlannerParams::default()).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let header = String::from_utf8(buf.clone()).unwrap();
        assert!(header.starts_with("t,px,py,pz,qw,qx,qy,qz,v_cmd,phase,style"));
        let back = read_trajectory_csv(buf.as_slice(), traj.reference_offset).unwrap();
        assert_eq!(back.waypoints, traj.waypoints);
        assert_eq!(back.style, CutStyle::Saw);
    }
}
