use crate::Vec3;

/// Eulerian node state for one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GridNode {
    pub mass: f64,
    pub mom: Vec3,
    /// Current velocity; updated in place by contact resolution.
    pub vel: Vec3,
    /// Velocity before contact resolution.
    pub v_before: Vec3,
    /// Velocity after contact resolution.
    pub v_after: Vec3,
}

/// Dense node lattice with an active sub-box touched by the current step.
#[derive(Clone, Debug)]
pub struct Grid {
    res: usize,
    dx: f64,
    nodes: Vec<GridNode>,
    lo: [usize; 3],
    hi: [usize; 3],
    active: Vec<usize>,
}

impl Grid {
    /// `res` cells per axis, i.e. `res + 1` nodes per axis.
    pub fn new(res: usize, dx: f64) -> Self {
        let n = res + 1;
        Self {
            res,
            dx,
            nodes: vec![GridNode::default(); n * n * n],
            lo: [0; 3],
            hi: [0; 3],
            active: Vec::new(),
        }
    }

    pub fn res(&self) -> usize {
        self.res
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let n = self.res + 1;
        i + n * (j + n * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.res + 1;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }

    pub fn node_position(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.coords(idx);
        Vec3::new(i as f64, j as f64, k as f64) * self.dx
    }

    pub fn node(&self, idx: usize) -> &GridNode {
        &self.nodes[idx]
    }

    pub fn node_mut(&mut self, idx: usize) -> &mut GridNode {
        &mut self.nodes[idx]
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    /// Nodes with positive mass after the last grid update, in ascending index order.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn active_box(&self) -> ([usize; 3], [usize; 3]) {
        (self.lo, self.hi)
    }

    /// Zeroes every node of the previous active box and adopts a new one.
    pub(crate) fn reset_box(&mut self, lo: [usize; 3], hi: [usize; 3]) {
        self.for_each_in_box(|node| *node = GridNode::default());
        self.active.clear();
        self.lo = lo;
        self.hi = hi;
    }

    fn for_each_in_box(&mut self, mut f: impl FnMut(&mut GridNode)) {
        let n = self.res + 1;
        if self.hi[0] < self.lo[0] {
            return;
        }
        for k in self.lo[2]..=self.hi[2].min(self.res) {
            for j in self.lo[1]..=self.hi[1].min(self.res) {
                let row = n * (j + n * k);
                for i in self.lo[0]..=self.hi[0].min(self.res) {
                    f(&mut self.nodes[row + i]);
                }
            }
        }
    }

    /// Indices of all nodes in the active box, ascending.
    pub(crate) fn box_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for k in self.lo[2]..=self.hi[2] {
            for j in self.lo[1]..=self.hi[1] {
                for i in self.lo[0]..=self.hi[0] {
                    out.push(self.index(i, j, k));
                }
            }
        }
        out
    }

    pub(crate) fn set_active(&mut self, active: Vec<usize>) {
        self.active = active;
    }

    pub fn total_mass(&self) -> f64 {
        self.box_indices().iter().map(|&i| self.nodes[i].mass).sum()
    }

    pub fn total_momentum(&self) -> Vec3 {
        self.box_indices()
            .iter()
            .fold(Vec3::zeros(), |acc, &i| acc + self.nodes[i].mom)
    }
}
