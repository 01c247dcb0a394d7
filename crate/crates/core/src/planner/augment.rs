use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contact::Aabb;
use crate::error::{Error, Result};
use crate::mpm::Material;
use crate::planner::object::{ObjectKind, ObjectShape};
use crate::planner::task::CutTask;
use crate::Vec3;

/// Placement of one object on the board.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub kind: ObjectKind,
    /// Horizontal position of the object centre (m); the height follows the board.
    pub position: [f64; 2],
    pub scale: f64,
    /// Rotation about the vertical axis (rad).
    pub rotation: f64,
    /// Height of the board surface (m).
    pub board_height: f64,
    pub material: Material,
    pub seed: u64,
}

impl SceneSpec {
    pub fn new(kind: ObjectKind, material: Material) -> Self {
        Self {
            kind,
            position: [0.25, 0.25],
            scale: 1.0,
            rotation: 0.0,
            board_height: 0.05,
            material,
            seed: 0,
        }
    }

    pub fn shape(&self) -> ObjectShape {
        let mut shape = ObjectShape {
            primitive: self.kind.primitive().scaled(self.scale),
            center: Vec3::zeros(),
            yaw: self.rotation,
        };
        shape.center = Vec3::new(self.position[0], self.board_height + shape.half_height(), self.position[1]);
        shape
    }

    pub fn aabb(&self) -> Aabb {
        self.shape().aabb()
    }

    pub fn validate(&self, workspace: &Aabb) -> Result<()> {
        if !(self.scale > 0.0) {
            return Err(Error::Planning(format!("scale must be positive, got {}", self.scale)));
        }
        let b = self.aabb();
        // Objects rest exactly on the board, which may coincide with the workspace floor.
        let room = workspace.padded(1e-9);
        if !(room.contains(&b.min) && room.contains(&b.max)) {
            return Err(Error::Planning(format!(
                "object bounds {:?}..{:?} leave the workspace",
                b.min.as_slice(),
                b.max.as_slice()
            )));
        }
        Ok(())
    }
}

/// Sampling ranges applied around a base scene and task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentRanges {
    /// Offsets added to the horizontal position (m).
    pub offset_x: (f64, f64),
    pub offset_z: (f64, f64),
    /// Factor applied to the scale.
    pub scale: (f64, f64),
    /// Offset added to the rotation (rad).
    pub rotation: (f64, f64),
    /// Offset added to the knife start height (m).
    pub height: (f64, f64),
    /// Factor applied to the approach speed.
    pub speed: (f64, f64),
    pub saw_frequency: (f64, f64),
    /// Candidate object kinds; empty keeps the base kind.
    pub kinds: Vec<ObjectKind>,
    pub workspace: Aabb,
}

impl Default for AugmentRanges {
    fn default() -> Self {
        Self {
            offset_x: (-0.03, 0.03),
            offset_z: (-0.03, 0.03),
            scale: (0.9, 1.1),
            rotation: (-0.2, 0.2),
            height: (0.0, 0.01),
            speed: (0.8, 1.2),
            saw_frequency: (2.0, 6.0),
            kinds: Vec::new(),
            workspace: Aabb {
                min: Vec3::repeat(0.05),
                max: Vec3::repeat(0.45),
            },
        }
    }
}

impl AugmentRanges {
    /// Ranges that reproduce the base scene.
    pub fn fixed(workspace: Aabb) -> Self {
        Self {
            offset_x: (0.0, 0.0),
            offset_z: (0.0, 0.0),
            scale: (1.0, 1.0),
            rotation: (0.0, 0.0),
            height: (0.0, 0.0),
            speed: (1.0, 1.0),
            saw_frequency: (4.0, 4.0),
            kinds: Vec::new(),
            workspace,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("offset_x", self.offset_x),
            ("offset_z", self.offset_z),
            ("scale", self.scale),
            ("rotation", self.rotation),
            ("height", self.height),
            ("speed", self.speed),
            ("saw_frequency", self.saw_frequency),
        ] {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Planning(format!("range {name} is malformed: {lo}..{hi}")));
            }
        }
        if !(self.scale.0 > 0.0 && self.speed.0 > 0.0 && self.saw_frequency.0 > 0.0) {
            return Err(Error::Planning("scale, speed and saw frequency ranges must be positive".into()));
        }
        Ok(())
    }
}

const MAX_ATTEMPTS: usize = 64;

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        // Keep the draw count fixed so later fields see the same stream.
        let _: f64 = rng.gen();
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Samples a randomized scene and task around the base ones, deterministically in `seed`.
///
/// Draws that leave the workspace are rejected and redrawn.
pub fn augment(base_scene: &SceneSpec, base_task: &CutTask, ranges: &AugmentRanges, seed: u64) -> Result<(SceneSpec, CutTask)> {
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = None;
    for _ in 0..MAX_ATTEMPTS {
        let mut scene = base_scene.clone();
        scene.seed = seed;
        scene.position[0] += draw(&mut rng, ranges.offset_x);
        scene.position[1] += draw(&mut rng, ranges.offset_z);
        scene.scale *= draw(&mut rng, ranges.scale);
        scene.rotation += draw(&mut rng, ranges.rotation);
        if !ranges.kinds.is_empty() {
            scene.kind = ranges.kinds[rng.gen_range(0..ranges.kinds.len())];
        }
        let mut task = base_task.clone();
        task.object = scene.kind;
        task.height += draw(&mut rng, ranges.height);
        task.speed *= draw(&mut rng, ranges.speed);
        task.saw_frequency = draw(&mut rng, ranges.saw_frequency);
        match scene.validate(&ranges.workspace).and_then(|_| task.validate()) {
            Ok(()) => return Ok((scene, task)),
            Err(e) => last = Some(e),
        }
    }
    Err(Error::Planning(format!(
        "no feasible scene after {MAX_ATTEMPTS} draws; last rejection: {}",
        last.map_or_else(String::new, |e| e.to_string())
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::task::{CutState, CutStyle};

    fn base() -> (SceneSpec, CutTask) {
        let scene = SceneSpec::new(ObjectKind::Banana, Material::default());
        let task = CutTask::new(CutStyle::Normal, CutState::Middle, ObjectKind::Banana);
        (scene, task)
    }

    #[test]
    fn fixed_ranges_reproduce_base() {
        let (scene, task) = base();
        let ranges = AugmentRanges::fixed(AugmentRanges::default().workspace);
        let (s, t) = augment(&scene, &task, &ranges, 42).unwrap();
        assert_eq!(s, SceneSpec { seed: 42, ..scene });
        assert_eq!(t, task);
    }

    #[test]
    fn same_seed_same_sample() {
        let (scene, task) = base();
        let ranges = AugmentRanges::default();
        assert_eq!(augment(&scene, &task, &ranges, 7).unwrap(), augment(&scene, &task, &ranges, 7).unwrap());
        assert_ne!(augment(&scene, &task, &ranges, 7).unwrap(), augment(&scene, &task, &ranges, 8).unwrap());
    }

    #[test]
    fn five_hundred_samples_stay_inside() {
        let (scene, task) = base();
        let ranges = AugmentRanges {
            kinds: ObjectKind::FOODS.to_vec(),
            ..AugmentRanges::default()
        };
        let mut seen = Vec::new();
        for seed in 0..500 {
            let (s, _) = augment(&scene, &task, &ranges, seed).unwrap();
            let b = s.aabb();
            let room = ranges.workspace.padded(1e-9);
            assert!(room.contains(&b.min) && room.contains(&b.max));
            seen.push(s);
        }
        for i in 1..seen.len() {
            assert_ne!(seen[i], seen[i - 1]);
        }
    }

    #[test]
    fn infeasible_workspace_is_error() {
        let (scene, task) = base();
        let ranges = AugmentRanges {
            workspace: Aabb {
                min: Vec3::repeat(0.24),
                max: Vec3::repeat(0.26),
            },
            ..AugmentRanges::default()
        };
        assert!(matches!(augment(&scene, &task, &ranges, 1), Err(Error::Planning(_))));
    }

    #[test]
    fn malformed_range_is_error() {
        let (scene, task) = base();
        let ranges = AugmentRanges {
            scale: (1.2, 0.8),
            ..AugmentRanges::default()
        };
        assert!(augment(&scene, &task, &ranges, 1).is_err());
    }
}
