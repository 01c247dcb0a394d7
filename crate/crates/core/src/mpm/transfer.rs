//! One MLS-MPM step split into its three transfer phases.

use rayon::prelude::*;

use crate::cutting::effective_moduli;
use crate::error::{Error, Result};
use crate::mpm::constitutive::{j2_radial_return, kirchhoff_stress};
use crate::mpm::kernel::{outer, Stencil};
use crate::mpm::{Grid, JClampMode, Material, Particle, ReductionMode, SimConfig};
use crate::{Mat3, Vec3};

/// Smallest particle batch handed to one rayon task.
const MIN_BATCH: usize = 512;

/// Particles must stay this many cells away from every domain wall.
pub const BOUNDARY_CELLS: usize = 2;

struct Scatter {
    stencil: Stencil,
    mass: f64,
    mv: Vec3,
    affine: Mat3,
}

/// Particle-to-grid transfer of mass, APIC momentum and the fused stress force.
pub fn p2g(
    particles: &[Particle],
    materials: &[Material],
    grid: &mut Grid,
    config: &SimConfig,
    dt: f64,
) -> Result<()> {
    let dx = grid.dx();
    let inv_dx = 1.0 / dx;
    let res = grid.res();
    let lo_lim = BOUNDARY_CELLS as f64;
    let hi_lim = (res - BOUNDARY_CELLS) as f64;

    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    for (index, p) in particles.iter().enumerate() {
        for a in 0..3 {
            let s = p.x[a] * inv_dx;
            if !(s >= lo_lim && s <= hi_lim) {
                return Err(Error::OutOfDomain {
                    index,
                    position: [p.x.x, p.x.y, p.x.z],
                });
            }
            let b = (s - 0.5).floor() as usize;
            lo[a] = lo[a].min(b);
            hi[a] = hi[a].max(b + 2);
        }
    }
    if particles.is_empty() {
        lo = [0; 3];
        hi = [0; 3];
    }
    grid.reset_box(lo, hi);

    let lame: Vec<(f64, f64)> = materials
        .iter()
        .map(Material::lame)
        .collect::<Result<_>>()?;
    let d_inv = 4.0 * inv_dx * inv_dx;

    let prepared: Vec<Scatter> = particles
        .par_iter()
        .with_min_len(MIN_BATCH)
        .map(|p| {
            let stencil = Stencil::new(&p.x, inv_dx);
            let mut affine = p.c * p.mass;
            if config.enable_stress {
                let (mu, lambda) = lame
                    .get(p.material)
                    .copied()
                    .ok_or_else(|| Error::Config(format!("unknown material {}", p.material)))?;
                let (mu, lambda) = effective_moduli(mu, lambda, p.damage, config.soft_floor);
                let tau = kirchhoff_stress(&p.f, mu, lambda)?;
                affine -= tau * (dt * p.vol0 * d_inv);
            }
            Ok(Scatter {
                stencil,
                mass: p.mass,
                mv: p.v * p.mass,
                affine,
            })
        })
        .collect::<Result<_>>()?;

    match config.reduction {
        ReductionMode::Deterministic => {
            for s in &prepared {
                scatter_one(s, dx, |idx, m, mom| {
                    let node = grid.node_mut(idx);
                    node.mass += m;
                    node.mom += mom;
                }, grid_index(res));
            }
        }
        ReductionMode::Fast => {
            let dims = [hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1];
            let len = dims[0] * dims[1] * dims[2];
            let local_index = move |i: usize, j: usize, k: usize| {
                (i - lo[0]) + dims[0] * ((j - lo[1]) + dims[1] * (k - lo[2]))
            };
            let partial = prepared
                .par_chunks(1024)
                .fold(
                    || vec![(0.0, Vec3::zeros()); len],
                    |mut acc, chunk| {
                        for s in chunk {
                            scatter_one(s, dx, |idx, m, mom| {
                                acc[idx].0 += m;
                                acc[idx].1 += mom;
                            }, local_index);
                        }
                        acc
                    },
                )
                .reduce(
                    || vec![(0.0, Vec3::zeros()); len],
                    |mut a, b| {
                        for (x, y) in a.iter_mut().zip(b) {
                            x.0 += y.0;
                            x.1 += y.1;
                        }
                        a
                    },
                );
            for k in lo[2]..=hi[2] {
                for j in lo[1]..=hi[1] {
                    for i in lo[0]..=hi[0] {
                        let (m, mom) = partial[local_index(i, j, k)];
                        let idx = grid.index(i, j, k);
                        let node = grid.node_mut(idx);
                        node.mass = m;
                        node.mom = mom;
                    }
                }
            }
        }
    }
    Ok(())
}

fn grid_index(res: usize) -> impl Fn(usize, usize, usize) -> usize {
    let n = res + 1;
    move |i, j, k| i + n * (j + n * k)
}

#[inline]
fn scatter_one(
    s: &Scatter,
    dx: f64,
    mut add: impl FnMut(usize, f64, Vec3),
    index: impl Fn(usize, usize, usize) -> usize,
) {
    let [bi, bj, bk] = s.stencil.base;
    for k in 0..3 {
        for j in 0..3 {
            for i in 0..3 {
                let w = s.stencil.weight(i, j, k);
                let dpos = s.stencil.dpos(i, j, k, dx);
                let mom = (s.mv + s.affine * dpos) * w;
                add(index(bi + i, bj + j, bk + k), w * s.mass, mom);
            }
        }
    }
}

/// Momentum to velocity, gravity, damping and wall conditions.
///
/// Records `v_before` on every active node; contact resolution runs after this.
pub fn grid_update(grid: &mut Grid, config: &SimConfig, dt: f64) {
    let res = grid.res();
    let damping = (1.0 - config.damping_grid * dt).max(0.0);
    let mut active = Vec::new();
    for idx in grid.box_indices() {
        let coords = grid.coords(idx);
        let node = grid.node_mut(idx);
        if node.mass <= 0.0 {
            node.mass = 0.0;
            node.mom = Vec3::zeros();
            node.vel = Vec3::zeros();
            node.v_before = Vec3::zeros();
            node.v_after = Vec3::zeros();
            continue;
        }
        let mut v = node.mom / node.mass + config.gravity * dt;
        v *= damping;
        for a in 0..3 {
            if coords[a] < BOUNDARY_CELLS || coords[a] > res - BOUNDARY_CELLS {
                v[a] = 0.0;
            }
        }
        node.vel = v;
        node.v_before = v;
        node.v_after = v;
        active.push(idx);
    }
    grid.set_active(active);
}

/// Summary of the deformation-gradient state after G2P.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct G2pStats {
    pub j_min: f64,
    pub j_max: f64,
    pub clamps: usize,
    pub yielded: usize,
}

impl Default for G2pStats {
    fn default() -> Self {
        Self {
            j_min: f64::INFINITY,
            j_max: f64::NEG_INFINITY,
            clamps: 0,
            yielded: 0,
        }
    }
}

impl G2pStats {
    fn merge(self, other: Self) -> Self {
        Self {
            j_min: self.j_min.min(other.j_min),
            j_max: self.j_max.max(other.j_max),
            clamps: self.clamps + other.clamps,
            yielded: self.yielded + other.yielded,
        }
    }
}

/// Isotropically rescales `f` when its determinant leaves `[j_min, j_max]`.
///
/// Returns whether a clamp happened.
pub fn clamp_determinant(f: &mut Mat3, j_min: f64, j_max: f64, mode: JClampMode) -> bool {
    let j = f.determinant();
    if j >= j_min && j <= j_max {
        return false;
    }
    let target = match mode {
        JClampMode::NearestBound => j.clamp(j_min, j_max),
        JClampMode::Unit => 1.0,
    };
    *f *= (target / j).cbrt();
    true
}

/// Grid-to-particle transfer: velocity, affine field, `F` update and advection.
pub fn g2p(
    grid: &Grid,
    particles: &mut [Particle],
    materials: &[Material],
    config: &SimConfig,
    dt: f64,
) -> Result<G2pStats> {
    let dx = grid.dx();
    let inv_dx = 1.0 / dx;
    let d_inv = 4.0 * inv_dx * inv_dx;
    let damping = (1.0 - config.damping_particle * dt).max(0.0);
    let v_cap = config.speed_cap * dx / dt;
    let mus: Vec<f64> = materials
        .iter()
        .map(|m| m.lame().map(|l| l.0))
        .collect::<Result<_>>()?;
    let index = grid_index(grid.res());
    let nodes = grid.nodes();

    particles
        .par_iter_mut()
        .with_min_len(MIN_BATCH)
        .enumerate()
        .map(|(pi, p)| {
            let stencil = Stencil::new(&p.x, inv_dx);
            let [bi, bj, bk] = stencil.base;
            let mut v = Vec3::zeros();
            let mut b = Mat3::zeros();
            for k in 0..3 {
                for j in 0..3 {
                    for i in 0..3 {
                        let w = stencil.weight(i, j, k);
                        let vi = nodes[index(bi + i, bj + j, bk + k)].vel;
                        v += vi * w;
                        b += outer(&vi, &stencil.dpos(i, j, k, dx)) * w;
                    }
                }
            }
            let c = b * d_inv;
            let mut f = (Mat3::identity() + c * dt) * p.f;
            let mut stats = G2pStats::default();
            if clamp_determinant(&mut f, config.j_min, config.j_max, config.j_clamp) {
                stats.clamps += 1;
            }
            let yield_stress = materials[p.material].yield_stress;
            if yield_stress.is_finite() && f.determinant() > 0.0 {
                let out = j2_radial_return(&f, mus[p.material], yield_stress, p.alpha, config.viscoplastic)?;
                if out.yielded {
                    stats.yielded += 1;
                }
                f = out.f;
                p.alpha = out.alpha;
            }
            v *= damping;
            let speed = v.norm();
            if speed > v_cap {
                v *= v_cap / speed;
            }
            p.v = v;
            p.c = c;
            p.f = f;
            p.x += v * dt;
            if !p.is_finite() {
                return Err(Error::Divergence {
                    step: 0,
                    detail: format!("particle {pi} state became non-finite"),
                });
            }
            let j = f.determinant();
            stats.j_min = stats.j_min.min(j);
            stats.j_max = stats.j_max.max(j);
            Ok(stats)
        })
        .try_reduce(G2pStats::default, |a, b| Ok(a.merge(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpm::particle::{total_mass, total_momentum};
    use approx::assert_relative_eq;

    fn quiet_config() -> SimConfig {
        SimConfig {
            grid_res: 32,
            dx: 1.0 / 32.0,
            gravity: Vec3::zeros(),
            damping_grid: 0.0,
            damping_particle: 0.0,
            enable_stress: false,
            ..SimConfig::default()
        }
    }

    #[test]
    fn single_particle_momentum() {
        let cfg = quiet_config();
        let mut grid = Grid::new(cfg.grid_res, cfg.dx);
        let mut p = Particle::at_rest(Vec3::new(0.41, 0.52, 0.37), 0.25, 1e-6, 0);
        p.v = Vec3::new(1.0, 0.0, 0.0);
        p2g(&[p], &[Material::default()], &mut grid, &cfg, 1e-4).unwrap();
        let mom = grid.total_momentum();
        assert_relative_eq!(mom, Vec3::new(0.25, 0.0, 0.0), epsilon = 1e-14);
        assert_relative_eq!(grid.total_mass(), 0.25, max_relative = 1e-14);
    }

    #[test]
    fn out_of_domain_names_the_particle() {
        let cfg = quiet_config();
        let mut grid = Grid::new(cfg.grid_res, cfg.dx);
        let ps = vec![
            Particle::at_rest(Vec3::new(0.5, 0.5, 0.5), 1.0, 1e-6, 0),
            Particle::at_rest(Vec3::new(0.5, 0.01, 0.5), 1.0, 1e-6, 0),
        ];
        let err = p2g(&ps, &[Material::default()], &mut grid, &cfg, 1e-4).unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { index: 1, .. }));
    }

    #[test]
    fn gravity_only_update() {
        let cfg = SimConfig {
            gravity: Vec3::new(0.0, -9.8, 0.0),
            ..quiet_config()
        };
        let mut grid = Grid::new(cfg.grid_res, cfg.dx);
        let p = Particle::at_rest(Vec3::new(0.5, 0.5, 0.5), 1.0, 1e-6, 0);
        p2g(&[p], &[Material::default()], &mut grid, &cfg, 1e-3).unwrap();
        grid_update(&mut grid, &cfg, 1e-3);
        for &idx in grid.active() {
            assert_relative_eq!(grid.node(idx).vel, Vec3::new(0.0, -0.0098, 0.0), epsilon = 1e-15);
            assert_eq!(grid.node(idx).v_before, grid.node(idx).vel);
        }
    }

    #[test]
    fn no_forces_gives_mom_over_mass() {
        let cfg = quiet_config();
        let mut grid = Grid::new(cfg.grid_res, cfg.dx);
        let mut p = Particle::at_rest(Vec3::new(0.5, 0.5, 0.5), 2.0, 1e-6, 0);
        p.v = Vec3::new(0.3, -0.2, 0.1);
        p2g(&[p], &[Material::default()], &mut grid, &cfg, 1e-3).unwrap();
        grid_update(&mut grid, &cfg, 1e-3);
        for &idx in grid.active() {
            let n = grid.node(idx);
            assert_eq!(n.vel, n.mom / n.mass);
        }
    }

    #[test]
    fn wall_node_loses_normal_component_only() {
        let cfg = quiet_config();
        let mut grid = Grid::new(cfg.grid_res, cfg.dx);
        // Particle right at the lower x limit touches node i = 1.
        let mut p = Particle::at_rest(Vec3::new(2.0 * cfg.dx, 0.5, 0.5), 1.0, 1e-6, 0);
        p.v = Vec3::new(-1.0, 0.5, 0.0);
        p2g(&[p], &[Material::default()], &mut grid, &cfg, 1e-3).unwrap();
        grid_update(&mut grid, &cfg, 1e-3);
        let mut saw_wall = false;
        for &idx in grid.active() {
            let [i, _, _] = grid.coords(idx);
            let n = grid.node(idx);
            if i < BOUNDARY_CELLS {
                saw_wall = true;
                assert_eq!(n.vel.x, 0.0);
                assert_relative_eq!(n.vel.y, n.mom.y / n.mass, max_relative = 1e-14);
            }
        }
        assert!(saw_wall);
    }

    #[test]
    fn zero_affine_field_keeps_f() {
        let cfg = quiet_config();
        let mut grid = Grid::new(cfg.grid_res, cfg.dx);
        let mut p = Particle::at_rest(Vec3::new(0.5, 0.5, 0.5), 1.0, 1e-6, 0);
        p.f = Mat3::new(1.1, 0.1, 0.0, 0.0, 0.9, 0.0, 0.05, 0.0, 1.0);
        let f0 = p.f;
        let mut ps = vec![p];
        p2g(&ps, &[Material::default()], &mut grid, &cfg, 1e-3).unwrap();
        grid_update(&mut grid, &cfg, 1e-3);
        let stats = g2p(&grid, &mut ps, &[Material::new(1000.0, 1e5, 0.3, f64::INFINITY)], &cfg, 1e-3).unwrap();
        assert_relative_eq!(ps[0].c, Mat3::zeros(), epsilon = 1e-13);
        assert_relative_eq!(ps[0].f, f0, epsilon = 1e-13);
        assert_eq!(stats.clamps, 0);
    }

    #[test]
    fn determinant_clamp_to_nearest_bound() {
        let mut f = Mat3::from_diagonal(&Vec3::new(2.0, 2.0, 1.0));
        assert!(clamp_determinant(&mut f, 0.4, 1.4, JClampMode::NearestBound));
        assert_relative_eq!(f.determinant(), 1.4, max_relative = 1e-10);

        let mut f = Mat3::from_diagonal(&Vec3::new(0.5, 0.5, 1.0));
        assert!(clamp_determinant(&mut f, 0.4, 1.4, JClampMode::NearestBound));
        assert_relative_eq!(f.determinant(), 0.4, max_relative = 1e-10);

        let mut f = Mat3::from_diagonal(&Vec3::new(2.0, 2.0, 1.0));
        assert!(clamp_determinant(&mut f, 0.4, 1.4, JClampMode::Unit));
        assert_relative_eq!(f.determinant(), 1.0, max_relative = 1e-10);

        let mut f = Mat3::identity() * 1.05;
        let before = f;
        assert!(!clamp_determinant(&mut f, 0.4, 1.4, JClampMode::NearestBound));
        assert_eq!(f, before);
    }

    #[test]
    fn affine_step_multiplies_f() {
        // F' = (I + dt C) F with dt C = diag(0.01, 0, 0)
        let f = Mat3::new(1.0, 0.2, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        let dt_c = Mat3::from_diagonal(&Vec3::new(0.01, 0.0, 0.0));
        let expected = Mat3::from_diagonal(&Vec3::new(1.01, 1.0, 1.0)) * f;
        assert_relative_eq!((Mat3::identity() + dt_c) * f, expected, epsilon = 1e-15);
    }

    #[test]
    fn mass_is_conserved_for_a_cloud() {
        let cfg = quiet_config();
        let mut grid = Grid::new(cfg.grid_res, cfg.dx);
        let ps: Vec<Particle> = (0..500)
            .map(|i| {
                let t = i as f64;
                let x = Vec3::new(
                    0.3 + 0.4 * ((t * 0.618).fract()),
                    0.3 + 0.4 * ((t * 0.414).fract()),
                    0.3 + 0.4 * ((t * 0.732).fract()),
                );
                Particle::at_rest(x, 0.1 + 0.001 * t, 1e-6, 0)
            })
            .collect();
        p2g(&ps, &[Material::default()], &mut grid, &cfg, 1e-4).unwrap();
        assert_relative_eq!(grid.total_mass(), total_mass(&ps), max_relative = 1e-12);
        assert_relative_eq!(grid.total_momentum(), total_momentum(&ps), epsilon = 1e-12);
    }
}
