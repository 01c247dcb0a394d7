use serde::{Deserialize, Serialize};

use crate::mpm::{DamageLaw, SimConfig};
use crate::Vec3;

/// Minimum downward component of the stroke direction for damage to grow.
pub const DOWNWARD_STROKE_MIN: f64 = 0.1;

/// Fraction of `dx / dt` used to normalize the approach accumulator.
pub const C_NORM_FACTOR: f64 = 0.35;

/// Resolution-dependent cutting thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutThresholds {
    /// Half-width of the damage band around the blade surface (m).
    pub band: f64,
    /// Approach speed needed for damage (m/s).
    pub v_th: f64,
    /// Normalization of the approach accumulator (m/s).
    pub c_norm: f64,
    pub damage_rate: f64,
    pub c_min: f64,
    pub law: DamageLaw,
}

/// Rescales band, speed threshold and contact normalization to `config.dx`, `config.dt`.
pub fn resolution_scaled_thresholds(config: &SimConfig) -> CutThresholds {
    let cells_per_step = config.dx / config.dt;
    CutThresholds {
        band: config.band0 * (config.dx_ref / config.dx).powf(config.gamma),
        v_th: cells_per_step * config.v_hat,
        c_norm: C_NORM_FACTOR * cells_per_step,
        damage_rate: config.damage_rate,
        c_min: config.c_min,
        law: config.damage_law,
    }
}

/// Inputs of the damage gate for one particle.
#[derive(Clone, Copy, Debug)]
pub struct GateInput {
    /// Blade signed distance at the particle (m).
    pub phi: f64,
    pub c_hat: f64,
    /// Relative normal velocity `(v_p - v_tool) · n` (m/s); negative when approaching.
    pub v_n: f64,
    /// Unit direction of commanded knife motion.
    pub stroke_dir: Vec3,
}

impl GateInput {
    pub fn passes(&self, th: &CutThresholds) -> bool {
        self.phi.abs() < th.band
            && self.c_hat >= th.c_min
            && self.v_n <= -th.v_th
            && -self.stroke_dir.y > DOWNWARD_STROKE_MIN
    }
}

/// Grows damage when all gates hold; never decreases it.
pub fn damage_update(damage: f64, gate: &GateInput, th: &CutThresholds, dt: f64) -> f64 {
    if !gate.passes(th) {
        return damage;
    }
    let rate = match th.law {
        DamageLaw::Proportional => th.damage_rate * gate.c_hat,
        DamageLaw::Constant => th.damage_rate,
    };
    (damage + rate * dt).min(1.0).max(damage)
}

/// Damage-softened Lamé moduli, floored at `soft_floor` of the intact values.
pub fn effective_moduli(mu: f64, lambda: f64, damage: f64, soft_floor: f64) -> (f64, f64) {
    let scale = (1.0 - damage).max(soft_floor);
    (mu * scale, lambda * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn thresholds() -> CutThresholds {
        CutThresholds {
            band: 0.01,
            v_th: 0.1,
            c_norm: 1.0,
            damage_rate: 50.0,
            c_min: 0.05,
            law: DamageLaw::Proportional,
        }
    }

    fn passing() -> GateInput {
        GateInput {
            phi: 0.002,
            c_hat: 1.0,
            v_n: -0.5,
            stroke_dir: Vec3::new(0.0, -1.0, 0.0),
        }
    }

    #[test]
    fn reference_resolution_keeps_band() {
        let cfg = SimConfig::default();
        let th = resolution_scaled_thresholds(&cfg);
        assert_eq!(th.band, cfg.band0);
    }

    #[test]
    fn halving_dx_doubles_band() {
        let base = SimConfig {
            dx: 1.0 / 64.0,
            dx_ref: 1.0 / 64.0,
            band0: 0.01,
            gamma: 1.0,
            ..SimConfig::default()
        };
        let fine = SimConfig {
            dx: base.dx / 2.0,
            ..base.clone()
        };
        let a = resolution_scaled_thresholds(&base);
        let b = resolution_scaled_thresholds(&fine);
        assert_relative_eq!(b.band, 2.0 * a.band, max_relative = 1e-15);
        assert_relative_eq!(b.v_th * fine.dt, 0.5 * a.v_th * base.dt, max_relative = 1e-15);
    }

    #[test]
    fn speed_threshold_arithmetic() {
        let cfg = SimConfig {
            dx: 1.0 / 64.0,
            dt: 1e-4,
            v_hat: 0.01,
            ..SimConfig::default()
        };
        let th = resolution_scaled_thresholds(&cfg);
        assert_relative_eq!(th.v_th, 1.5625, max_relative = 1e-12);
        assert_relative_eq!(th.c_norm, 0.35 * 156.25, max_relative = 1e-12);
    }

    #[test]
    fn zero_contact_leaves_damage() {
        let g = GateInput {
            c_hat: 0.0,
            ..passing()
        };
        assert_eq!(damage_update(0.3, &g, &thresholds(), 1e-3), 0.3);
    }

    #[test]
    fn saturated_damage_stays_at_one() {
        assert_eq!(damage_update(1.0, &passing(), &thresholds(), 1e-3), 1.0);
    }

    #[test]
    fn rate_law_arithmetic() {
        let d = damage_update(0.0, &passing(), &thresholds(), 1e-3);
        assert_relative_eq!(d, 0.05, max_relative = 1e-12);
    }

    #[test]
    fn constant_law_ignores_contact_magnitude() {
        let th = CutThresholds {
            law: DamageLaw::Constant,
            ..thresholds()
        };
        let g = GateInput {
            c_hat: 0.5,
            ..passing()
        };
        assert_relative_eq!(damage_update(0.0, &g, &th, 1e-3), 0.05, max_relative = 1e-12);
    }

    #[test]
    fn moduli_soften_linearly_with_floor() {
        assert_eq!(effective_moduli(2.0, 3.0, 0.0, 1e-3), (2.0, 3.0));
        assert_eq!(effective_moduli(2.0, 3.0, 0.5, 1e-3), (1.0, 1.5));
        let (mu, la) = effective_moduli(2.0, 3.0, 1.0, 1e-3);
        assert_relative_eq!(mu, 2e-3);
        assert_relative_eq!(la, 3e-3);
    }
}
