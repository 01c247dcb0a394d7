use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::mpm::Particle;
use crate::Vec3;

/// Label given to particles excluded from segmentation.
pub const UNLABELED: u32 = u32::MAX;

/// Connected components of intact particles.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    /// Per-particle label, `UNLABELED` for damaged particles.
    pub labels: Vec<u32>,
    /// Particle count per label.
    pub sizes: Vec<usize>,
}

impl Segmentation {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Number of segments holding at least `min_size` particles.
    pub fn count_at_least(&self, min_size: usize) -> usize {
        self.sizes.iter().filter(|&&s| s >= min_size).count()
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Groups particles with damage below `damage_cut` by transitive adjacency
/// within `link_radius`.
pub fn segment_connectivity(particles: &[Particle], link_radius: f64, damage_cut: f64) -> Segmentation {
    let positions: Vec<Vec3> = particles.iter().map(|p| p.x).collect();
    let connectors: Vec<bool> = particles.iter().map(|p| p.damage < damage_cut).collect();
    label_components(&positions, &connectors, link_radius, None)
}

/// Like [`segment_connectivity`], but particles only link when they shared a
/// label in `previous`, so a split never heals.
pub fn segment_connectivity_with_history(
    particles: &[Particle],
    link_radius: f64,
    damage_cut: f64,
    previous: &[u32],
) -> Segmentation {
    let positions: Vec<Vec3> = particles.iter().map(|p| p.x).collect();
    let connectors: Vec<bool> = particles
        .iter()
        .zip(previous)
        .map(|(p, &l)| p.damage < damage_cut && l != UNLABELED)
        .collect();
    label_components(&positions, &connectors, link_radius, Some(previous))
}

/// Spatial-hash union-find over the points flagged in `connectors`.
///
/// Labels are assigned in order of each component's smallest index.
pub fn label_components(
    positions: &[Vec3],
    connectors: &[bool],
    link_radius: f64,
    previous: Option<&[u32]>,
) -> Segmentation {
    let n = positions.len();
    let r2 = link_radius * link_radius;
    let inv = 1.0 / link_radius;
    let cell_of = |x: &Vec3| -> [i64; 3] {
        [
            (x.x * inv).floor() as i64,
            (x.y * inv).floor() as i64,
            (x.z * inv).floor() as i64,
        ]
    };
    let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for i in (0..n).filter(|&i| connectors[i]) {
        buckets.entry(cell_of(&positions[i])).or_default().push(i);
    }
    let mut sets = DisjointSet::new(n);
    for i in (0..n).filter(|&i| connectors[i]) {
        let c = cell_of(&positions[i]);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(bucket) = buckets.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) else {
                        continue;
                    };
                    for &j in bucket {
                        if j <= i || (positions[i] - positions[j]).norm_squared() > r2 {
                            continue;
                        }
                        if previous.is_some_and(|prev| prev[i] != prev[j]) {
                            continue;
                        }
                        sets.union(i, j);
                    }
                }
            }
        }
    }
    let mut labels = vec![UNLABELED; n];
    let mut root_label: HashMap<usize, u32> = HashMap::new();
    let mut sizes = Vec::new();
    for i in (0..n).filter(|&i| connectors[i]) {
        let root = sets.find(i);
        let label = *root_label.entry(root).or_insert_with(|| {
            sizes.push(0);
            (sizes.len() - 1) as u32
        });
        labels[i] = label;
        sizes[label as usize] += 1;
    }
    Segmentation { labels, sizes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::VecDeque;

    /// Breadth-first search over the brute-force adjacency graph.
    fn bfs_oracle(positions: &[Vec3], connectors: &[bool], r: f64) -> Vec<u32> {
        let n = positions.len();
        let mut labels = vec![UNLABELED; n];
        let mut next = 0;
        for s in 0..n {
            if !connectors[s] || labels[s] != UNLABELED {
                continue;
            }
            labels[s] = next;
            let mut queue = VecDeque::from([s]);
            while let Some(i) = queue.pop_front() {
                for j in 0..n {
                    if connectors[j] && labels[j] == UNLABELED && (positions[i] - positions[j]).norm() <= r {
                        labels[j] = next;
                        queue.push_back(j);
                    }
                }
            }
            next += 1;
        }
        labels
    }

    fn lattice(nx: usize, spacing: f64) -> Vec<Vec3> {
        let mut out = Vec::new();
        for i in 0..nx {
            for j in 0..nx {
                for k in 0..nx {
                    out.push(Vec3::new(i as f64, j as f64, k as f64) * spacing);
                }
            }
        }
        out
    }

    #[test]
    fn separated_clusters() {
        let mut pts = lattice(3, 0.01);
        pts.extend(lattice(3, 0.01).iter().map(|p| p + Vec3::new(0.1, 0.0, 0.0)));
        let s = label_components(&pts, &vec![true; pts.len()], 0.015, None);
        assert_eq!(s.count(), 2);
        assert_eq!(s.labels[0], 0);
        assert_eq!(s.labels[27], 1);
    }

    #[test]
    fn dense_blob_is_one_segment() {
        let pts = lattice(6, 0.01);
        let s = label_components(&pts, &vec![true; pts.len()], 0.015, None);
        assert_eq!(s.count(), 1);
        assert_eq!(s.sizes, vec![216]);
    }

    #[test]
    fn damaged_plane_bisects_blob() {
        let mut ps: Vec<Particle> = lattice(8, 0.01)
            .into_iter()
            .map(|x| Particle::at_rest(x, 1.0, 1.0, 0))
            .collect();
        for p in &mut ps {
            if (p.x.x - 0.04).abs() < 1e-9 {
                p.damage = 1.0;
            }
        }
        let s = segment_connectivity(&ps, 0.015, 0.5);
        assert_eq!(s.count(), 2);
        let pos: Vec<Vec3> = ps.iter().map(|p| p.x).collect();
        let conn: Vec<bool> = ps.iter().map(|p| p.damage < 0.5).collect();
        assert_eq!(s.labels, bfs_oracle(&pos, &conn, 0.015));
    }

    #[test]
    fn history_prevents_healing() {
        let pts = lattice(4, 0.01);
        let previous: Vec<u32> = pts.iter().map(|p| if p[0] < 0.015 { 0 } else { 1 }).collect();
        let s = label_components(&pts, &vec![true; pts.len()], 0.015, Some(&previous));
        assert_eq!(s.count(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn matches_bfs_oracle(
            pts in prop::collection::vec((0.0f64..0.2, 0.0f64..0.2, 0.0f64..0.2, prop::bool::weighted(0.9)), 1..400),
            r in 0.005f64..0.04,
        ) {
            let positions: Vec<Vec3> = pts.iter().map(|&(x, y, z, _)| Vec3::new(x, y, z)).collect();
            let connectors: Vec<bool> = pts.iter().map(|p| p.3).collect();
            let s = label_components(&positions, &connectors, r, None);
            prop_assert_eq!(s.labels, bfs_oracle(&positions, &connectors, r));
        }
    }
}
