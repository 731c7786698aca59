//! Fixed-radius neighbor queries over a static kd-tree.

use crate::cloud::{Point3, PointCloud};
use crate::error::{Error, Result};

/// Ranges shorter than this are scanned linearly instead of split further.
const LEAF_SIZE: usize = 16;

enum Node {
    /// A contiguous range of `slots`.
    Leaf { start: u32, end: u32 },
    /// An axis-aligned split: slots left of the pivot have
    /// `coord[axis] <= value`, slots right of it have `coord[axis] >= value`.
    Split {
        axis: u8,
        value: f64,
        left: u32,
        right: u32,
    },
}

/// A static spatial index over a snapshot of a cloud's coordinates.
///
/// Building copies the coordinates, so the index stays valid (and answers
/// queries about the original positions) even if the cloud is modified or
/// dropped afterwards. Queries return original point indices.
pub struct SpatialIndex {
    /// Point coordinates, permuted during construction.
    coords: Vec<[f64; 3]>,
    /// Original cloud index of each slot in `coords`.
    slots: Vec<u32>,
    nodes: Vec<Node>,
    root: u32,
}

impl SpatialIndex {
    /// Builds an index over all points of `cloud`.
    pub fn build(cloud: &PointCloud) -> Self {
        let coords: Vec<[f64; 3]> = cloud.points().iter().map(|p| [p.x, p.y, p.z]).collect();
        Self::from_coords(coords)
    }

    fn from_coords(coords: Vec<[f64; 3]>) -> Self {
        let n = coords.len();
        let mut index = SpatialIndex {
            coords,
            slots: (0..n as u32).collect(),
            nodes: Vec::new(),
            root: 0,
        };
        if n > 0 {
            index.root = index.build_range(0, n);
        }
        index
    }

    /// Number of indexed points.
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    /// True when the index covers no points.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    fn build_range(&mut self, start: usize, end: usize) -> u32 {
        let id = self.nodes.len() as u32;
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf {
                start: start as u32,
                end: end as u32,
            });
            return id;
        }

        // Split along the widest extent of the range's bounding box; ties go
        // to the lower axis so construction is fully deterministic.
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for i in start..end {
            let c = self.coords[self.slots[i] as usize];
            for a in 0..3 {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
        let mut axis = 0;
        for a in 1..3 {
            if hi[a] - lo[a] > hi[axis] - lo[axis] {
                axis = a;
            }
        }

        let mid = start + (end - start) / 2;
        self.slots[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            let ca = self.coords[a as usize][axis];
            let cb = self.coords[b as usize][axis];
            ca.partial_cmp(&cb).expect("finite coordinates")
        });
        let value = self.coords[self.slots[mid] as usize][axis];

        // Reserve the split node before recursing so child ids are known.
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build_range(start, mid);
        let right = self.build_range(mid, end);
        self.nodes[id as usize] = Node::Split {
            axis: axis as u8,
            value,
            left,
            right,
        };
        id
    }

    /// Indices of every indexed point `p` with `|p - center| <= radius`
    /// (boundary inclusive), sorted ascending.
    ///
    /// Fails with [`Error::InvalidRadius`] unless `radius` is positive and
    /// finite. A query center that is itself an indexed point is reported
    /// like any other point.
    pub fn radius_search(&self, center: Point3, radius: f64) -> Result<Vec<usize>> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidRadius(radius));
        }
        let mut out = Vec::new();
        if self.coords.is_empty() {
            return Ok(out);
        }
        let q = [center.x, center.y, center.z];
        let r2 = radius * radius;

        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            match self.nodes[id as usize] {
                Node::Leaf { start, end } => {
                    for slot in start..end {
                        let c = self.coords[self.slots[slot as usize] as usize];
                        let dx = c[0] - q[0];
                        let dy = c[1] - q[1];
                        let dz = c[2] - q[2];
                        if dx * dx + dy * dy + dz * dz <= r2 {
                            out.push(self.slots[slot as usize] as usize);
                        }
                    }
                }
                Node::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    // Left slots have coord <= value, right slots >= value;
                    // both comparisons keep the boundary inclusive.
                    if q[axis as usize] - radius <= value {
                        stack.push(left);
                    }
                    if q[axis as usize] + radius >= value {
                        stack.push(right);
                    }
                }
            }
        }

        out.sort_unstable();
        Ok(out)
    }
}
