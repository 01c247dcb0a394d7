//! Quadratic B-spline interpolation over a 3-node stencil per axis.

use crate::error::{Error, Result};
use crate::{Mat3, Vec3};

/// Quadratic B-spline weights for the three stencil nodes along one axis.
///
/// `fx` is the distance from the particle to the lowest stencil node in cell
/// units and must lie in `[0.5, 1.5]`.
pub fn bspline_weights(fx: f64) -> Result<[f64; 3]> {
    if !(0.5..=1.5).contains(&fx) {
        return Err(Error::Invariant(format!(
            "particle outside its stencil: normalized offset {fx}"
        )));
    }
    Ok(weights_unchecked(fx))
}

#[inline]
pub(crate) fn weights_unchecked(fx: f64) -> [f64; 3] {
    let a = 1.5 - fx;
    let b = fx - 1.0;
    let c = fx - 0.5;
    [0.5 * a * a, 0.75 - b * b, 0.5 * c * c]
}

/// Stencil of one particle: lowest node index and per-axis weights.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Stencil {
    pub base: [usize; 3],
    /// Offset of the particle from the base node, in cell units.
    pub fx: Vec3,
    pub w: [[f64; 3]; 3],
}

impl Stencil {
    /// Builds the stencil; the caller guarantees the particle is in the interior.
    #[inline]
    pub fn new(x: &Vec3, inv_dx: f64) -> Self {
        let mut base = [0usize; 3];
        let mut fx = Vec3::zeros();
        let mut w = [[0.0; 3]; 3];
        for a in 0..3 {
            let xs = x[a] * inv_dx;
            let b = (xs - 0.5).floor();
            base[a] = b as usize;
            fx[a] = xs - b;
            w[a] = weights_unchecked(fx[a]);
        }
        Self { base, fx, w }
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize, k: usize) -> f64 {
        self.w[0][i] * self.w[1][j] * self.w[2][k]
    }

    /// Node position relative to the particle, in metres.
    #[inline]
    pub fn dpos(&self, i: usize, j: usize, k: usize, dx: f64) -> Vec3 {
        Vec3::new(
            (i as f64 - self.fx.x) * dx,
            (j as f64 - self.fx.y) * dx,
            (k as f64 - self.fx.z) * dx,
        )
    }
}

/// Outer product `a bᵀ`.
#[inline]
pub(crate) fn outer(a: &Vec3, b: &Vec3) -> Mat3 {
    a * b.transpose()
}
