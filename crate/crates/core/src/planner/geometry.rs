use serde::{Deserialize, Serialize};

use crate::contact::Aabb;
use crate::error::{Error, Result};
use crate::planner::task::{CutState, Side};
use crate::Vec3;

/// Horizontal world axis the cut planes are stacked along.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutAxis {
    X,
    Z,
}

impl CutAxis {
    pub fn index(self) -> usize {
        match self {
            CutAxis::X => 0,
            CutAxis::Z => 2,
        }
    }

    pub fn unit(self) -> Vec3 {
        match self {
            CutAxis::X => Vec3::x(),
            CutAxis::Z => Vec3::z(),
        }
    }

    /// The other horizontal axis, along which the blade length lies.
    pub fn across(self) -> CutAxis {
        match self {
            CutAxis::X => CutAxis::Z,
            CutAxis::Z => CutAxis::X,
        }
    }

    /// Longest horizontal extent of `aabb`; ties go to x.
    pub fn longest(aabb: &Aabb) -> CutAxis {
        let ext = aabb.max - aabb.min;
        if ext.z > ext.x {
            CutAxis::Z
        } else {
            CutAxis::X
        }
    }
}

/// Componentwise bounds of a point set.
pub fn compute_aabb<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Result<Aabb> {
    let mut it = points.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::DegenerateObject("cannot bound an empty point set".into()))?;
    let (min, max) = it.fold((*first, *first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
    Ok(Aabb { min, max })
}

/// Snaps a length fraction to a fixed binary grid so that equivalent state
/// descriptions (e.g. `r` from the left, `1 - r` from the right) give
/// identical planes.
fn snap_fraction(f: f64) -> f64 {
    const SCALE: f64 = (1u64 << 40) as f64;
    (f * SCALE).round() / SCALE
}

/// Length fractions of the target planes, ascending.
pub fn plane_fractions(state: &CutState) -> Vec<f64> {
    match *state {
        CutState::Middle => vec![0.5],
        CutState::Ratio { r, side: Side::Left } => vec![snap_fraction(r)],
        CutState::Ratio { r, side: Side::Right } => vec![snap_fraction(1.0 - r)],
        CutState::Split { k } => (1..k).map(|i| snap_fraction(i as f64 / k as f64)).collect(),
    }
}

/// Plane offsets along `axis` for `state`, ascending.
pub fn cut_planes(aabb: &Aabb, state: &CutState, axis: CutAxis) -> Result<Vec<f64>> {
    state.validate()?;
    let a = axis.index();
    let (lo, hi) = (aabb.min[a], aabb.max[a]);
    let len = hi - lo;
    if !(len > 0.0) {
        return Err(Error::DegenerateObject(format!(
            "object has zero extent along the cut axis ({lo}..{hi})"
        )));
    }
    Ok(plane_fractions(state).into_iter().map(|f| lo + f * len).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn span(lo: f64, hi: f64) -> Aabb {
        Aabb {
            min: Vec3::new(lo, 0.0, 0.0),
            max: Vec3::new(hi, 1.0, 0.5),
        }
    }

    #[test]
    fn two_point_box() {
        let pts = [Vec3::zeros(), Vec3::new(1.0, 2.0, 3.0)];
        let b = compute_aabb(&pts).unwrap();
        assert_eq!(b.min, Vec3::zeros());
        assert_eq!(b.max, Vec3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn single_point_box() {
        let p = Vec3::new(0.1, -0.2, 0.3);
        let b = compute_aabb([&p]).unwrap();
        assert_eq!((b.min, b.max), (p, p));
    }

    #[test]
    fn empty_set_is_degenerate() {
        assert!(matches!(compute_aabb(&[]), Err(Error::DegenerateObject(_))));
    }

    #[test]
    fn plane_examples() {
        assert_eq!(cut_planes(&span(0.0, 1.0), &CutState::Middle, CutAxis::X).unwrap(), vec![0.5]);
        let right = CutState::Ratio { r: 0.3, side: Side::Right };
        assert_relative_eq!(cut_planes(&span(2.0, 4.0), &right, CutAxis::X).unwrap()[0], 3.4, epsilon = 1e-12);
        let split = cut_planes(&span(0.0, 1.0), &CutState::Split { k: 4 }, CutAxis::X).unwrap();
        assert_eq!(split, vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn zero_extent_is_degenerate() {
        let flat = Aabb {
            min: Vec3::new(1.0, 0.0, 0.0),
            max: Vec3::new(1.0, 1.0, 0.0),
        };
        assert!(matches!(
            cut_planes(&flat, &CutState::Middle, CutAxis::X),
            Err(Error::DegenerateObject(_))
        ));
    }

    #[test]
    fn longest_axis_choice() {
        let b = Aabb {
            min: Vec3::zeros(),
            max: Vec3::new(0.1, 0.5, 0.2),
        };
        assert_eq!(CutAxis::longest(&b), CutAxis::Z);
    }

    proptest! {
        #[test]
        fn aabb_matches_scan(pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 1..1000)) {
            let pts: Vec<Vec3> = pts.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).collect();
            let b = compute_aabb(&pts).unwrap();
            for a in 0..3 {
                let lo = pts.iter().map(|p| p[a]).fold(f64::INFINITY, f64::min);
                let hi = pts.iter().map(|p| p[a]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert_eq!(b.min[a], lo);
                prop_assert_eq!(b.max[a], hi);
            }
            prop_assert!(pts.iter().all(|p| b.contains(p)));
        }
    }
}
