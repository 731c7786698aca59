//! Voxel-grid downsampling that keeps original points.

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::cloud::{Point3, PointCloud};
use crate::error::{Error, Result};

/// Geometry of an axis-aligned voxel grid: cubic cells of edge `voxel_len`
/// anchored at `origin`. A point belongs to the cell
/// `floor((p - origin) / voxel_len)` per axis, so cell boundaries are
/// half-open: a coordinate exactly on a boundary belongs to the upper cell.
#[derive(Clone, Copy, Debug)]
pub struct VoxelGridSpec {
    voxel_len: f64,
    origin: Point3,
}

impl VoxelGridSpec {
    /// Creates a grid spec. Fails with [`Error::InvalidRadius`] unless
    /// `voxel_len` is positive and finite.
    pub fn new(voxel_len: f64, origin: Point3) -> Result<Self> {
        if !(voxel_len > 0.0 && voxel_len.is_finite()) {
            return Err(Error::InvalidRadius(voxel_len));
        }
        Ok(VoxelGridSpec { voxel_len, origin })
    }

    /// Grid anchored at the minimum corner of the cloud's bounding box
    /// (the origin of an empty cloud is `(0, 0, 0)`).
    pub fn anchored_at_min(cloud: &PointCloud, voxel_len: f64) -> Result<Self> {
        let origin = cloud.bounds().map(|(min, _)| min).unwrap_or(Point3 {
            x: 0.0,
            y: 0.0,
            z: 0.0,
        });
        VoxelGridSpec::new(voxel_len, origin)
    }

    /// Cell edge length.
    pub fn voxel_len(&self) -> f64 {
        self.voxel_len
    }

    /// Grid anchor point.
    pub fn origin(&self) -> Point3 {
        self.origin
    }

    /// Integer cell coordinates of a point.
    pub fn cell_of(&self, p: Point3) -> [i64; 3] {
        [
            ((p.x - self.origin.x) / self.voxel_len).floor() as i64,
            ((p.y - self.origin.y) / self.voxel_len).floor() as i64,
            ((p.z - self.origin.z) / self.voxel_len).floor() as i64,
        ]
    }
}

/// Downsamples a cloud to at most one point per occupied voxel.
///
/// Each occupied cell is represented by an *input* point — the member
/// closest to the centroid of the cell's members, ties broken by the lowest
/// original index — never by a synthesized average, so every output point
/// carries real measured geometry. Attributes are carried along with the
/// chosen points. The output is ordered by original index, making the result
/// independent of any hashing or iteration order.
pub fn voxel_downsample(cloud: &PointCloud, spec: &VoxelGridSpec) -> PointCloud {
    // Pass 1: per-cell centroid of the member points.
    struct Cell {
        sum: Vector3<f64>,
        count: usize,
        best: usize,
        best_d2: f64,
    }
    let mut cells: HashMap<[i64; 3], Cell> = HashMap::new();
    for p in cloud.points() {
        let cell = cells.entry(spec.cell_of(*p)).or_insert(Cell {
            sum: Vector3::zeros(),
            count: 0,
            best: usize::MAX,
            best_d2: f64::INFINITY,
        });
        cell.sum += p.coords();
        cell.count += 1;
    }

    // Pass 2: pick the member nearest the centroid. Scanning in index order
    // means strict `<` keeps the lowest index on ties.
    for (i, p) in cloud.points().iter().enumerate() {
        let cell = cells
            .get_mut(&spec.cell_of(*p))
            .expect("every point was binned in pass 1");
        let centroid = cell.sum / cell.count as f64;
        let d2 = (p.coords() - centroid).norm_squared();
        if d2 < cell.best_d2 {
            cell.best_d2 = d2;
            cell.best = i;
        }
    }

    let mut keep: Vec<usize> = cells.values().map(|c| c.best).collect();
    keep.sort_unstable();
    cloud
        .select(&keep)
        .expect("representatives come from the input cloud")
}
