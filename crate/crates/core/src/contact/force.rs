use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec3;

/// Average contact force over one output window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceRecord {
    /// Window end time (s).
    pub t: f64,
    /// `window_impulse / dt_acc` (N).
    pub force: Vec3,
    pub magnitude: f64,
    /// Summed node impulse over the window (kg·m/s).
    pub window_impulse: Vec3,
}

/// Accumulates per-step impulses into windowed average forces.
#[derive(Clone, Debug)]
pub struct ForceWindow {
    dt_acc: f64,
    impulse: Vec3,
    steps: usize,
}

impl ForceWindow {
    pub fn new(dt_acc: f64) -> Result<Self> {
        if !(dt_acc > 0.0) {
            return Err(Error::Config(format!("dt_acc must be positive, got {dt_acc}")));
        }
        Ok(Self {
            dt_acc,
            impulse: Vec3::zeros(),
            steps: 0,
        })
    }

    pub fn add(&mut self, step_impulse: &Vec3) {
        self.impulse += step_impulse;
        self.steps += 1;
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Emits the record for the window ending at `t` and starts a new window.
    pub fn close(&mut self, t: f64) -> ForceRecord {
        let record = accumulate_force(&self.impulse, self.dt_acc, t)
            .expect("dt_acc validated at construction");
        self.impulse = Vec3::zeros();
        self.steps = 0;
        record
    }
}

/// Turns a window impulse into its average force.
pub fn accumulate_force(window_impulse: &Vec3, dt_acc: f64, t: f64) -> Result<ForceRecord> {
    if !(dt_acc > 0.0) {
        return Err(Error::Config(format!("dt_acc must be positive, got {dt_acc}")));
    }
    let force = window_impulse / dt_acc;
    Ok(ForceRecord {
        t,
        force,
        magnitude: force.norm(),
        window_impulse: *window_impulse,
    })
}

/// Impulse of a set of node velocity jumps, summed in the given order.
pub fn node_impulse<'a>(changes: impl IntoIterator<Item = (f64, &'a Vec3, &'a Vec3)>) -> Vec3 {
    changes
        .into_iter()
        .fold(Vec3::zeros(), |acc, (m, before, after)| acc + (after - before) * m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_contact_window_is_zero() {
        let mut w = ForceWindow::new(0.01).unwrap();
        w.add(&Vec3::zeros());
        let r = w.close(0.01);
        assert_eq!(r.force, Vec3::zeros());
        assert_eq!(r.magnitude, 0.0);
    }

    #[test]
    fn single_node_force() {
        let before = Vec3::zeros();
        let after = Vec3::new(0.0, -1.0, 0.0);
        let j = node_impulse([(1.0, &before, &after)]);
        let r = accumulate_force(&j, 0.01, 0.01).unwrap();
        assert!((r.force - Vec3::new(0.0, -100.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn window_identity_is_exact_for_power_of_two_windows() {
        let dt_acc = 1.0 / 1024.0;
        let mut w = ForceWindow::new(dt_acc).unwrap();
        for k in 0..25 {
            w.add(&Vec3::new(0.1 * k as f64, -0.37, 1e-3 / (k as f64 + 1.0)));
        }
        let r = w.close(dt_acc);
        assert_eq!(r.force * dt_acc, r.window_impulse);
    }

    #[test]
    fn rejects_nonpositive_window() {
        assert!(ForceWindow::new(0.0).is_err());
        assert!(accumulate_force(&Vec3::zeros(), -1.0, 0.0).is_err());
    }
}
