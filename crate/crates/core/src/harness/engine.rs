use serde::{Deserialize, Serialize};

use crate::contact::{contact_strength, resolve_grid_contact, ContactParams, ContactTool, Pose, SdfShape};
use crate::cutting::{damage_update, resolution_scaled_thresholds, speed_resistance, tip_force, CutThresholds, GateInput, KnifeTool};
use crate::error::{Error, Result};
use crate::mpm::{g2p, grid_update, p2g, ApproachAccumulation, G2pStats, Grid, Material, Particle, SimConfig};
use crate::Vec3;

/// Rigid motion the knife performs over one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KnifeMotion {
    pub pose: Pose,
    pub linear: Vec3,
    pub angular: Vec3,
    /// Reference speed of the active trajectory segment (m/s).
    pub s0: f64,
    pub stroke_dir: Vec3,
}

impl KnifeMotion {
    /// Motion that carries the blade from `from` to `to` in `dt`.
    pub fn between(from: &Pose, to: &Pose, dt: f64, s0: f64, stroke: Vec3) -> Self {
        let linear = (to.translation.vector - from.translation.vector) / dt;
        let rel = to.rotation * from.rotation.inverse();
        let angular = rel.scaled_axis() / dt;
        let stroke_dir = stroke.try_normalize(1e-12).unwrap_or_else(Vec3::zeros);
        Self {
            pose: *from,
            linear,
            angular,
            s0,
            stroke_dir,
        }
    }
}

/// What one step did, for logging.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    /// Momentum the knife imparted to the grid this step.
    pub knife_impulse: Vec3,
    pub board_impulse: Vec3,
    pub c_hat: f64,
    /// Grid nodes the knife resolved contact on.
    pub knife_contacts: usize,
    pub stats: G2pStats,
    pub damaged: usize,
}

/// Per-step summary of contact and damage, serialized into episode records.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineState {
    pub time: f64,
    pub steps: usize,
    pub u: f64,
    pub c_hat: f64,
}

/// One simulation instance: particles, grid, knife and board.
pub struct Engine {
    pub config: SimConfig,
    pub contact: ContactParams,
    pub materials: Vec<Material>,
    pub particles: Vec<Particle>,
    pub grid: Grid,
    pub knife: KnifeTool,
    pub board: Option<ContactTool>,
    pub thresholds: CutThresholds,
    approach: f64,
    pub c_hat: f64,
    pub time: f64,
    pub steps: usize,
}

impl Engine {
    pub fn new(
        config: SimConfig,
        contact: ContactParams,
        materials: Vec<Material>,
        particles: Vec<Particle>,
        knife: KnifeTool,
        board_height: Option<f64>,
    ) -> Result<Self> {
        config.validate(&materials)?;
        if let Some(p) = particles.iter().find(|p| p.material >= materials.len()) {
            return Err(Error::Config(format!("particle references missing material {}", p.material)));
        }
        let grid = Grid::new(config.grid_res, config.dx);
        let thresholds = resolution_scaled_thresholds(&config);
        let board = board_height.map(|h| ContactTool::fixed(SdfShape::halfspace(Vec3::y(), h)));
        Ok(Self {
            config,
            contact,
            materials,
            particles,
            grid,
            knife,
            board,
            thresholds,
            approach: 0.0,
            c_hat: 0.0,
            time: 0.0,
            steps: 0,
        })
    }

    pub fn set_knife_motion(&mut self, m: &KnifeMotion) {
        self.knife.shape.pose = m.pose;
        self.knife.v_tool = m.linear;
        self.knife.omega = m.angular;
        self.knife.pivot = m.pose.translation.vector;
        self.knife.s0 = m.s0;
        self.knife.stroke_dir = m.stroke_dir;
    }

    pub fn state(&self) -> EngineState {
        EngineState {
            time: self.time,
            steps: self.steps,
            u: self.knife.u,
            c_hat: self.c_hat,
        }
    }

    fn update_contact_strength(&mut self, step_approach: f64) {
        self.approach = match self.config.approach_accumulation {
            ApproachAccumulation::PerStep => step_approach,
            // Leaky sum with a memory of one output window.
            ApproachAccumulation::Window => {
                let keep = (1.0 - self.config.dt / self.config.dt_acc).max(0.0);
                self.approach * keep + step_approach
            }
        };
        self.c_hat = contact_strength(self.approach, self.thresholds.c_norm);
    }

    /// Advances the simulation by one step with the current knife motion.
    pub fn step(&mut self) -> Result<StepReport> {
        let dt = self.config.dt;
        p2g(&self.particles, &self.materials, &mut self.grid, &self.config, dt)?;
        grid_update(&mut self.grid, &self.config, dt);

        let tool = self.knife.contact_tool();
        let knife_pass = resolve_grid_contact(&mut self.grid, &tool, &self.contact, self.thresholds.band)?;
        let board_impulse = match &self.board {
            Some(board) => resolve_grid_contact(&mut self.grid, board, &self.contact, 0.0)?.impulse,
            None => Vec3::zeros(),
        };
        self.update_contact_strength(knife_pass.approach);

        let stats = g2p(&self.grid, &mut self.particles, &self.materials, &self.config, dt)?;

        if self.config.tip_force > 0.0 && self.c_hat > 0.0 {
            let band = self.config.tip_band_cells * self.config.dx;
            for (i, dv) in tip_force(&self.particles, &self.knife.shape, band, self.config.tip_force, dt) {
                self.particles[i].v += dv;
            }
        }

        let mut damaged = 0;
        if self.c_hat > 0.0 {
            let reach = self.thresholds.band;
            let cull = self.knife.shape.aabb().map(|b| b.padded(reach));
            let th = self.thresholds;
            let c_hat = self.c_hat;
            let knife = &self.knife;
            for p in self.particles.iter_mut() {
                if p.damage >= 1.0 || cull.as_ref().is_some_and(|b| !b.contains(&p.x)) {
                    continue;
                }
                let (phi, n) = knife.shape.sample(&p.x);
                if phi.abs() >= reach {
                    continue;
                }
                let gate = GateInput {
                    phi,
                    c_hat,
                    v_n: (p.v - knife.velocity_at(&p.x)).dot(&n),
                    stroke_dir: knife.stroke_dir,
                };
                let d = damage_update(p.damage, &gate, &th, dt);
                if d > p.damage {
                    damaged += 1;
                    p.damage = d;
                }
            }
        }

        self.knife.u = speed_resistance(self.knife.u, self.c_hat, self.knife.k2, dt);
        self.time += dt;
        self.steps += 1;

        if let Some((index, p)) = self.particles.iter().enumerate().find(|(_, p)| !p.is_finite()) {
            return Err(Error::Divergence {
                step: self.steps,
                detail: format!("particle {index} has non-finite state at {:?}", p.x.as_slice()),
            });
        }
        Ok(StepReport {
            knife_impulse: knife_pass.impulse,
            board_impulse,
            c_hat: self.c_hat,
            knife_contacts: knife_pass.contacted,
            stats,
            damaged,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::SdfShape;
    use nalgebra::{Translation3, UnitQuaternion};

    fn cube(n: usize, spacing: f64, origin: Vec3) -> Vec<Particle> {
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let x = origin + Vec3::new(i as f64, j as f64, k as f64) * spacing;
                    out.push(Particle::at_rest(x, 1000.0 * spacing.powi(3), spacing.powi(3), 0));
                }
            }
        }
        out
    }

    fn engine(particles: Vec<Particle>) -> Engine {
        let config = SimConfig {
            grid_res: 32,
            dx: 0.5 / 32.0,
            dx_ref: 0.5 / 32.0,
            band0: 0.5 / 32.0,
            ..SimConfig::default()
        };
        let knife = KnifeTool::new(SdfShape::wedge_blade(0.2, 0.05, 0.002, 0.15), 10.0);
        let mat = Material::new(1000.0, 1e5, 0.3, f64::INFINITY);
        let mut e = Engine::new(config, ContactParams::default(), vec![mat], particles, knife, Some(0.05)).unwrap();
        // Park the knife far above the domain.
        e.set_knife_motion(&KnifeMotion {
            pose: Pose::from_parts(Translation3::new(0.25, 0.45, 0.25), UnitQuaternion::identity()),
            linear: Vec3::zeros(),
            angular: Vec3::zeros(),
            s0: 0.0,
            stroke_dir: Vec3::zeros(),
        });
        e
    }

    #[test]
    fn free_fall_without_contact() {
        let mut e = engine(cube(4, 0.004, Vec3::new(0.24, 0.3, 0.24)));
        let mut y0 = e.particles[0].x.y;
        for _ in 0..50 {
            let r = e.step().unwrap();
            assert_eq!(r.knife_impulse, Vec3::zeros());
            assert_eq!(r.c_hat, 0.0);
        }
        assert!(e.particles[0].x.y < y0);
        assert_eq!(e.knife.u, 1.0);
        y0 = e.particles[0].x.y;
        assert!(y0.is_finite());
    }

    #[test]
    fn board_supports_resting_block() {
        let mut e = engine(cube(5, 0.004, Vec3::new(0.24, 0.052, 0.24)));
        let mut board = Vec3::zeros();
        for _ in 0..400 {
            board += e.step().unwrap().board_impulse;
        }
        assert!(board.y > 0.0);
        let lowest = e.particles.iter().map(|p| p.x.y).fold(f64::INFINITY, f64::min);
        assert!(lowest > 0.05 - e.config.dx, "sank to {lowest}");
    }

    #[test]
    fn motion_between_poses() {
        let a = Pose::from_parts(Translation3::new(0.0, 1.0, 0.0), UnitQuaternion::identity());
        let b = Pose::from_parts(
            Translation3::new(0.0, 0.9, 0.0),
            UnitQuaternion::from_axis_angle(&Vec3::z_axis(), 0.01),
        );
        let m = KnifeMotion::between(&a, &b, 0.1, 1.0, Vec3::new(0.0, -2.0, 0.0));
        assert!((m.linear - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-12);
        assert!((m.angular - Vec3::new(0.0, 0.0, 0.1)).norm() < 1e-12);
        assert_eq!(m.stroke_dir, Vec3::new(0.0, -1.0, 0.0));
    }
}
