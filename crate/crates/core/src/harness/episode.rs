use nalgebra::{Translation3, UnitQuaternion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contact::{Aabb, ForceRecord, ForceWindow};
use crate::cutting::{k2_scale, segment_connectivity_with_history, K2Exponents, KnifeTool, Segmentation};
use crate::error::{Error, Result};
use crate::harness::config::EpisodeSpec;
use crate::harness::engine::{Engine, KnifeMotion};
use crate::instructions::{generate_instruction, ratio_side, CutSpec, Direction};
use crate::mpm::{Particle, SimConfig};
use crate::planner::{
    base_rotation, compute_aabb, cut_planes, evaluate_success, generate_trajectory, CutAxis, CutState, CutStyle,
    Phase, Trajectory, Verdict, DEFAULT_TOLERANCE,
};
use crate::safety::clamp_trajectory;
use crate::Vec3;

/// Knife state logged every step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnifeSample {
    pub t: f64,
    pub speed: f64,
    pub u: f64,
    pub c_hat: f64,
}

/// Deformation-gradient statistics over one force window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JSample {
    pub t: f64,
    pub j_min: f64,
    pub j_max: f64,
    pub clamps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentSample {
    pub t: f64,
    /// All connected components of intact particles.
    pub segments: usize,
    /// Components above the debris threshold.
    pub pieces: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum EpisodeStatus {
    Completed,
    /// Simulated-time cap hit before the trajectory finished.
    Timeout,
    Diverged(String),
}

/// Scalar results of one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub status: EpisodeStatus,
    pub particle_count: usize,
    pub steps: usize,
    pub duration: f64,
    pub peak_force: f64,
    /// Index into the force series of the peak.
    pub peak_index: Option<usize>,
    /// Lowest knife speed during contact after first touch (m/s).
    pub min_contact_speed: Option<f64>,
    /// Index into the knife series of that minimum.
    pub min_speed_index: Option<usize>,
    pub first_contact_time: Option<f64>,
    /// Largest commanded reference-point speed of the executed trajectory (m/s).
    pub max_commanded_speed: f64,
    pub board_impulse: Vec3,
    pub target_planes: Vec<f64>,
    pub achieved_planes: Vec<f64>,
    pub final_pieces: usize,
    pub verdict: Verdict,
}

/// Complete, replayable output of one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub spec: EpisodeSpec,
    pub instruction: Option<String>,
    pub summary: EpisodeSummary,
    pub forces: Vec<ForceRecord>,
    pub knife: Vec<KnifeSample>,
    pub j_stats: Vec<JSample>,
    pub segments: Vec<SegmentSample>,
    pub trajectory: Trajectory,
    /// Particles as handed to the final segmentation pass; empty once reloaded.
    #[serde(skip)]
    pub final_particles: Vec<Particle>,
    /// Result of the final segmentation pass; empty once reloaded.
    #[serde(skip)]
    pub final_segmentation: Segmentation,
}

impl EpisodeRecord {
    pub fn succeeded(&self) -> bool {
        self.summary.status != EpisodeStatus::Timeout
            && !matches!(self.summary.status, EpisodeStatus::Diverged(_))
            && self.summary.verdict.success
    }

    pub fn diverged(&self) -> bool {
        matches!(self.summary.status, EpisodeStatus::Diverged(_))
    }
}

/// `|Σ window impulses - Σ F_avg dt_acc|`, summed per component.
pub fn momentum_audit(forces: &[ForceRecord], dt_acc: f64) -> f64 {
    let logged = forces.iter().fold(Vec3::zeros(), |acc, r| acc + r.window_impulse);
    let from_force = forces.iter().fold(Vec3::zeros(), |acc, r| acc + r.force * dt_acc);
    (logged - from_force).abs().sum()
}

/// Particles, bounds and cut geometry of a scene before any stepping.
#[derive(Clone, Debug)]
pub struct PreparedScene {
    pub particles: Vec<Particle>,
    pub aabb: Aabb,
    pub axis: CutAxis,
    pub planes: Vec<f64>,
    pub spacing: f64,
}

/// Samples the object on a lattice of `dx / particles_per_cell` and computes its cut planes.
pub fn prepare_scene(spec: &EpisodeSpec) -> Result<PreparedScene> {
    let ppc = spec.harness.particles_per_cell.max(1);
    let spacing = spec.sim.dx / ppc as f64;
    let points = spec.scene.shape().lattice_points(spacing);
    if points.is_empty() {
        return Err(Error::DegenerateObject(format!(
            "{} at scale {} holds no lattice point at spacing {spacing}",
            spec.scene.kind.name(),
            spec.scene.scale
        )));
    }
    let vol = spacing.powi(3);
    let mass = spec.scene.material.density * vol;
    let particles: Vec<Particle> = points.iter().map(|x| Particle::at_rest(*x, mass, vol, 0)).collect();
    let aabb = compute_aabb(points.iter())?;
    let axis = CutAxis::longest(&aabb);
    let planes = cut_planes(&aabb, &spec.task.state, axis)?;
    Ok(PreparedScene {
        particles,
        aabb,
        axis,
        planes,
        spacing,
    })
}

/// The trajectory an episode executes, after the optional safety clamp.
pub fn plan_episode(spec: &EpisodeSpec, scene: &PreparedScene) -> Result<Trajectory> {
    let traj = generate_trajectory(&spec.task, &scene.planes, &scene.aabb, &spec.planner)?;
    Ok(match spec.velocity_limit {
        Some(v) => clamp_trajectory(&traj, v),
        None => traj,
    })
}

/// Words the task as an instruction, or `None` for objects without vocabulary.
pub fn episode_instruction(spec: &EpisodeSpec) -> Option<String> {
    let direction = match spec.task.state {
        CutState::Ratio { side, .. } => {
            if ratio_side(spec.direction) == side {
                spec.direction
            } else if side == crate::planner::Side::Right {
                Some(Direction::Right)
            } else {
                None
            }
        }
        _ => spec.direction,
    };
    let cut = CutSpec::new(spec.task.object, spec.task.style, spec.task.state, direction);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    generate_instruction(&cut, &mut rng).ok()
}

/// Where each achieved cut landed, measured on rest positions along `axis`.
///
/// Pieces are ordered by centroid; each boundary sits halfway between the
/// facing extremes of neighbouring pieces.
pub fn achieved_planes(particles: &[Particle], seg: &Segmentation, min_size: usize, axis: CutAxis) -> Vec<f64> {
    let a = axis.index();
    let mut pieces: Vec<(f64, f64, f64)> = Vec::new();
    for (label, &size) in seg.sizes.iter().enumerate() {
        if size < min_size {
            continue;
        }
        let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for (p, &l) in particles.iter().zip(&seg.labels) {
            if l as usize == label {
                lo = lo.min(p.x0[a]);
                hi = hi.max(p.x0[a]);
                sum += p.x0[a];
            }
        }
        pieces.push((sum / size as f64, lo, hi));
    }
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    pieces.windows(2).map(|w| 0.5 * (w[0].2 + w[1].1)).collect()
}

/// Normal of the plane the style is meant to cut along.
pub fn target_normal(style: CutStyle, axis: CutAxis, bias_angle: f64) -> Vec3 {
    let rot = match style {
        CutStyle::Bias => base_rotation(axis) * UnitQuaternion::from_axis_angle(&Vec3::x_axis(), -bias_angle),
        _ => base_rotation(axis),
    };
    rot * Vec3::z()
}

fn blade_normal_in_contact(traj: &Trajectory) -> Option<Vec3> {
    let contact: Vec<usize> = (0..traj.waypoints.len())
        .filter(|&i| traj.waypoints[i].phase == Phase::Contact)
        .collect();
    let i = *contact.get(contact.len() / 2)?;
    Some(traj.waypoints[i].pose.rotation * Vec3::z())
}

fn lowest_edge(knife: &KnifeTool) -> f64 {
    knife
        .shape
        .edge_segment()
        .map_or(f64::INFINITY, |(a, b)| a.y.min(b.y))
}

fn segment(particles: &mut [Particle], config: &SimConfig, spacing: f64) -> Segmentation {
    let previous: Vec<u32> = particles.iter().map(|p| p.segment).collect();
    let seg = segment_connectivity_with_history(particles, config.link_factor * spacing, config.damage_cut, &previous);
    for (p, &l) in particles.iter_mut().zip(&seg.labels) {
        p.segment = l;
    }
    seg
}

fn min_piece_size(config: &SimConfig, n: usize) -> usize {
    ((config.min_segment_frac * n as f64).ceil() as usize).max(1)
}

/// Runs the full pipeline for `spec`: sample, plan, clamp, simulate, segment, evaluate.
pub fn run_episode(spec: &EpisodeSpec) -> Result<EpisodeRecord> {
    let scene = prepare_scene(spec)?;
    let traj = plan_episode(spec, &scene)?;
    run_with_trajectory(spec, scene, traj)
}

/// Runs `traj` against a prepared scene.
pub fn run_with_trajectory(spec: &EpisodeSpec, scene: PreparedScene, traj: Trajectory) -> Result<EpisodeRecord> {
    traj.validate()?;
    let config = &spec.sim;
    let dt = config.dt;
    let steps_per_window = config.steps_per_window()?;
    let exps = K2Exponents {
        youngs: spec.harness.k2_youngs_exponent,
        yield_stress: spec.harness.k2_yield_exponent,
    };
    let k2 = k2_scale(&spec.scene.material, &spec.harness.reference_material, exps)?;
    let knife = KnifeTool::new(spec.planner.blade.shape(), k2);
    let n_particles = scene.particles.len();
    let mut engine = Engine::new(
        config.clone(),
        spec.contact.clone(),
        vec![spec.scene.material.clone()],
        scene.particles,
        knife,
        Some(spec.scene.board_height),
    )?;

    let last_contact_t = traj
        .waypoints
        .iter()
        .enumerate()
        .filter(|(_, w)| w.phase == Phase::Contact)
        .map(|(i, w)| traj.waypoints.get(i + 1).map_or(w.t, |n| n.t))
        .fold(f64::NEG_INFINITY, f64::max);
    let top = scene.aabb.max.y;

    let mut window = ForceWindow::new(config.dt_acc)?;
    let mut forces = Vec::new();
    let mut knife_log = Vec::new();
    let mut j_stats = Vec::new();
    let mut segments = Vec::new();
    let mut board_impulse = Vec3::zeros();
    let mut j_window = JSample {
        t: 0.0,
        j_min: f64::INFINITY,
        j_max: f64::NEG_INFINITY,
        clamps: 0,
    };
    let mut first_contact: Option<f64> = None;
    let mut min_speed: Option<(f64, usize)> = None;
    let mut tau = traj.start_time();
    let mut phase = traj.phase_at(tau);
    let mut status = EpisodeStatus::Completed;
    let mut seg = Segmentation::default();
    let max_steps = (spec.harness.max_time / dt).ceil() as usize;

    loop {
        let now_phase = traj.phase_at(tau);
        if now_phase != phase {
            engine.knife.u = 1.0;
            phase = now_phase;
        }
        let i = traj.segment_at(tau);
        let s0 = traj.waypoints[i].v_cmd;
        let dtau = engine.knife.u * dt;
        let from = traj.pose_at(tau);
        let to = traj.pose_at(tau + dtau);
        let stroke = traj.reference_point(&to) - traj.reference_point(&from);
        engine.set_knife_motion(&KnifeMotion::between(&from, &to, dt, s0, stroke));

        let report = match engine.step() {
            Ok(r) => r,
            Err(e @ (Error::Divergence { .. } | Error::OutOfDomain { .. } | Error::InvertedElement { .. })) => {
                status = EpisodeStatus::Diverged(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        tau += dtau;
        board_impulse += report.board_impulse;
        window.add(&report.knife_impulse);
        j_window.j_min = j_window.j_min.min(report.stats.j_min);
        j_window.j_max = j_window.j_max.max(report.stats.j_max);
        j_window.clamps += report.stats.clamps;

        let sample = KnifeSample {
            t: engine.time,
            speed: engine.knife.speed(),
            u: engine.knife.u,
            c_hat: report.c_hat,
        };
        if first_contact.is_none() && report.knife_contacts > 0 {
            first_contact = Some(engine.time);
        }
        if first_contact.is_some() && phase == Phase::Contact && min_speed.is_none_or(|(v, _)| sample.speed < v) {
            min_speed = Some((sample.speed, knife_log.len()));
        }
        knife_log.push(sample);

        if engine.steps % steps_per_window == 0 {
            forces.push(window.close(engine.time));
            j_window.t = engine.time;
            j_stats.push(j_window);
            j_window = JSample {
                t: 0.0,
                j_min: f64::INFINITY,
                j_max: f64::NEG_INFINITY,
                clamps: 0,
            };
            if forces.len() % config.seg_every.max(1) == 0 {
                seg = segment(&mut engine.particles, config, scene.spacing);
                segments.push(SegmentSample {
                    t: engine.time,
                    segments: seg.count(),
                    pieces: seg.count_at_least(min_piece_size(config, n_particles)),
                });
            }
            let finished = tau >= traj.end_time();
            let cleared = spec.harness.finish_on_clear
                && tau >= last_contact_t
                && phase != Phase::Contact
                && lowest_edge(&engine.knife) > top + spec.harness.clear_margin;
            if finished || cleared {
                break;
            }
            if engine.steps >= max_steps {
                status = EpisodeStatus::Timeout;
                break;
            }
        }
    }

    let mut final_particles = Vec::new();
    if !matches!(status, EpisodeStatus::Diverged(_)) {
        final_particles = engine.particles.clone();
        seg = segment(&mut engine.particles, config, scene.spacing);
        segments.push(SegmentSample {
            t: engine.time,
            segments: seg.count(),
            pieces: seg.count_at_least(min_piece_size(config, n_particles)),
        });
    }

    let (peak_force, peak_index) = forces
        .iter()
        .enumerate()
        .fold((0.0f64, None), |(best, idx), (i, r)| if r.magnitude > best { (r.magnitude, Some(i)) } else { (best, idx) });

    let min_size = min_piece_size(config, n_particles);
    let final_pieces = if seg.labels.is_empty() { 0 } else { seg.count_at_least(min_size) };
    let achieved = if seg.labels.is_empty() {
        Vec::new()
    } else {
        achieved_planes(&engine.particles, &seg, min_size, scene.axis)
    };
    let a = scene.axis.index();
    let length = scene.aabb.max[a] - scene.aabb.min[a];
    let verdict = match &status {
        EpisodeStatus::Diverged(d) => Verdict::failure(format!("diverged: {d}")),
        _ if first_contact.is_none() => Verdict::failure("knife never touched the object"),
        _ => {
            let blade = blade_normal_in_contact(&traj).unwrap_or_else(|| scene.axis.unit());
            let target = target_normal(spec.task.style, scene.axis, spec.planner.bias_angle);
            let mut v = evaluate_success(&achieved, &scene.planes, length, &blade, &target, DEFAULT_TOLERANCE)?;
            if status == EpisodeStatus::Timeout && v.success {
                v.success = false;
                v.reason = Some("timed out before the trajectory finished".into());
            }
            v
        }
    };

    let summary = EpisodeSummary {
        status,
        particle_count: n_particles,
        steps: engine.steps,
        duration: engine.time,
        peak_force,
        peak_index,
        min_contact_speed: min_speed.map(|m| m.0),
        min_speed_index: min_speed.map(|m| m.1),
        first_contact_time: first_contact,
        max_commanded_speed: traj.max_speed(),
        board_impulse,
        target_planes: scene.planes.clone(),
        achieved_planes: achieved,
        final_pieces,
        verdict,
    };
    Ok(EpisodeRecord {
        spec: spec.clone(),
        instruction: episode_instruction(spec),
        summary,
        forces,
        knife: knife_log,
        j_stats,
        segments,
        trajectory: traj,
        final_particles,
        final_segmentation: seg,
    })
}

/// Lifts every waypoint by `dy`; used to build trajectories that miss the object.
pub fn lifted(traj: &Trajectory, dy: f64) -> Trajectory {
    let mut out = traj.clone();
    for w in &mut out.waypoints {
        w.pose = Translation3::new(0.0, dy, 0.0) * w.pose;
    }
    out
}
