//! Corotated elasticity with optional J2 plasticity.
//!
//! The elastic energy is `mu * sum (sigma_i - 1)^2 + lambda / 2 * (J - 1)^2`
//! over the singular values `sigma_i` of the deformation gradient. Plastic
//! flow is returned radially in principal Hencky-strain space, which leaves
//! the volumetric part of `F` untouched.

use crate::error::{Error, Result};
use crate::Mat3;

const POLAR_MAX_ITERS: usize = 64;
const POLAR_TOL: f64 = 1e-15;

/// Polar decomposition `F = R S` by scaled Newton iteration on the rotation.
///
/// Requires `det(F) > 0`; returns a proper rotation and a symmetric stretch.
pub fn polar_rotation(f: &Mat3) -> Result<(Mat3, Mat3)> {
    let det = f.determinant();
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::InvertedElement { det });
    }
    let mut x = *f;
    for _ in 0..POLAR_MAX_ITERS {
        let inv = x
            .try_inverse()
            .ok_or(Error::InvertedElement { det: x.determinant() })?;
        let inv_t = inv.transpose();
        let gamma = (inv.norm() / x.norm()).sqrt();
        let next = (x * gamma + inv_t / gamma) * 0.5;
        let delta = (next - x).norm();
        x = next;
        if delta <= POLAR_TOL * x.norm() {
            break;
        }
    }
    // One unscaled step to land exactly on the orthogonal manifold.
    if let Some(inv) = x.try_inverse() {
        x = (x + inv.transpose()) * 0.5;
    }
    let s = x.transpose() * f;
    let s = (s + s.transpose()) * 0.5;
    Ok((x, s))
}

/// Strain energy density of the corotated model, using `|F - R|² = sum (sigma_i - 1)²`.
pub fn corotated_energy(f: &Mat3, mu: f64, lambda: f64) -> Result<f64> {
    let (r, _) = polar_rotation(f)?;
    let j = f.determinant();
    Ok(mu * (f - r).norm_squared() + 0.5 * lambda * (j - 1.0).powi(2))
}

/// First Piola-Kirchhoff stress of the corotated model.
pub fn corotated_piola(f: &Mat3, mu: f64, lambda: f64) -> Result<Mat3> {
    let (r, _) = polar_rotation(f)?;
    let j = f.determinant();
    let inv_t = f
        .try_inverse()
        .ok_or(Error::InvertedElement { det: j })?
        .transpose();
    Ok((f - r) * (2.0 * mu) + inv_t * (lambda * (j - 1.0) * j))
}

/// Cauchy stress `J⁻¹ P Fᵀ`.
pub fn cauchy_stress(f: &Mat3, mu: f64, lambda: f64) -> Result<Mat3> {
    let j = f.determinant();
    Ok(kirchhoff_stress(f, mu, lambda)? / j)
}

/// Kirchhoff stress `P Fᵀ`, computed without inverting `F`.
pub fn kirchhoff_stress(f: &Mat3, mu: f64, lambda: f64) -> Result<Mat3> {
    let (r, _) = polar_rotation(f)?;
    let j = f.determinant();
    Ok((f - r) * f.transpose() * (2.0 * mu) + Mat3::identity() * (lambda * (j - 1.0) * j))
}

/// Plasticity state after a return-mapping call.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReturnResult {
    pub f: Mat3,
    pub alpha: f64,
    pub yielded: bool,
}

/// Magnitude of the deviatoric stress used by the yield check: `2 mu |dev(ln sigma)|`.
pub fn hencky_deviatoric_norm(f: &Mat3, mu: f64) -> Result<f64> {
    let (_, sigma, _) = proper_svd(f)?;
    let eps = sigma.map(f64::ln);
    let mean = eps.sum() / 3.0;
    let dev = eps.add_scalar(-mean);
    Ok(2.0 * mu * dev.norm())
}

/// J2 radial return of a trial deformation gradient.
///
/// `viscosity` is a dimensionless Perzyna relaxation factor; zero gives the
/// rate-independent return onto the yield surface.
pub fn j2_radial_return(
    f_trial: &Mat3,
    mu: f64,
    yield_stress: f64,
    alpha: f64,
    viscosity: f64,
) -> Result<ReturnResult> {
    let det = f_trial.determinant();
    if !(det > 0.0) {
        return Err(Error::InvertedElement { det });
    }
    let unchanged = ReturnResult {
        f: *f_trial,
        alpha,
        yielded: false,
    };
    if !yield_stress.is_finite() {
        return Ok(unchanged);
    }
    let radius = (2.0f64 / 3.0).sqrt() * yield_stress;
    // Closed-form check first; the SVD only runs near or past the surface.
    if let Some(eps) = hencky_principal_estimate(f_trial) {
        let mean = eps.sum() / 3.0;
        if 2.0 * mu * eps.add_scalar(-mean).norm() <= 0.99 * radius {
            return Ok(unchanged);
        }
    }
    let (u, sigma, v_t) = proper_svd(f_trial)?;
    let eps = sigma.map(f64::ln);
    let mean = eps.sum() / 3.0;
    let dev = eps.add_scalar(-mean);
    let dev_norm = dev.norm();
    if 2.0 * mu * dev_norm <= radius * (1.0 + 1e-12) {
        return Ok(unchanged);
    }
    let excess = dev_norm - radius / (2.0 * mu);
    let step = excess / (1.0 + viscosity.max(0.0));
    let eps_new = eps - dev * (step / dev_norm);
    let f = u * Mat3::from_diagonal(&eps_new.map(f64::exp)) * v_t;
    Ok(ReturnResult {
        f,
        alpha: alpha + step,
        yielded: true,
    })
}

/// Principal Hencky strains `ln sigma_i` from the eigenvalues of `FᵀF`.
///
/// Uses the trigonometric solution of the characteristic cubic, so it is
/// accurate only to a few ulps of the largest eigenvalue.
fn hencky_principal_estimate(f: &Mat3) -> Option<crate::Vec3> {
    let c = f.transpose() * f;
    let q = c.trace() / 3.0;
    let off = c[(0, 1)].powi(2) + c[(0, 2)].powi(2) + c[(1, 2)].powi(2);
    let p2 = (c[(0, 0)] - q).powi(2) + (c[(1, 1)] - q).powi(2) + (c[(2, 2)] - q).powi(2) + 2.0 * off;
    let lambdas = if p2 <= 1e-30 * q * q {
        crate::Vec3::repeat(q)
    } else {
        let p = (p2 / 6.0).sqrt();
        let b = (c - Mat3::identity() * q) / p;
        let phi = (b.determinant() / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
        let l1 = q + 2.0 * p * phi.cos();
        let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
        crate::Vec3::new(l1, 3.0 * q - l1 - l3, l3)
    };
    if lambdas.iter().all(|&l| l > 0.0 && l.is_finite()) {
        Some(lambdas.map(|l| 0.5 * l.ln()))
    } else {
        None
    }
}

/// SVD with `U` and `V` both proper rotations and nonnegative singular values.
pub(crate) fn proper_svd(f: &Mat3) -> Result<(Mat3, crate::Vec3, Mat3)> {
    let svd = f.svd(true, true);
    let (mut u, mut v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Invariant("SVD failed to converge".into())),
    };
    let sigma = svd.singular_values;
    // det(F) > 0 forces det(U) and det(V) to share a sign; flipping the same
    // column of both leaves the product unchanged.
    if u.determinant() < 0.0 {
        u.column_mut(2).neg_mut();
        v_t.row_mut(2).neg_mut();
    }
    if sigma.iter().any(|&s| s <= 0.0) || v_t.determinant() < 0.0 {
        return Err(Error::InvertedElement {
            det: f.determinant(),
        });
    }
    Ok((u, sigma, v_t))
}
