//! Surface normal estimation over fixed-radius neighborhoods.
//!
//! The normal at a query point is the direction of least variance of the
//! neighboring points: the eigenvector of the neighborhood covariance matrix
//! associated with its smallest eigenvalue. The support radius — not a
//! neighbor count — fixes the spatial scale of the estimate, which is what
//! makes comparing normals *across* scales meaningful.
//!
//! For large clouds the neighborhood searches dominate. The decimated
//! variant runs the same queries (at every original point) against a
//! voxel-downsampled copy of the cloud whose cell edge is `radius / d`,
//! trading a bounded amount of accuracy for a large constant-factor speedup.

use nalgebra::{Matrix3, Vector3};

use crate::cloud::{Point3, PointCloud};
use crate::error::{Error, Result};
use crate::par;
use crate::spatial::SpatialIndex;
use crate::stats;
use crate::voxel::{voxel_downsample, VoxelGridSpec};

/// A neighborhood needs at least this many points to define a plane.
pub const MIN_NEIGHBORS: usize = 3;

/// Relative eigenvalue-gap tolerance below which the smallest-variance
/// direction is considered ambiguous and the estimate degenerate.
const DEGENERACY_REL_TOL: f64 = 1e-9;

/// A unit surface normal, or an explicit "could not be estimated" marker.
///
/// Invalid normals arise from neighborhoods with fewer than
/// [`MIN_NEIGHBORS`] points or with no unique least-variance direction
/// (collinear, coincident, or isotropically spread neighbors). They flow
/// through the rest of the pipeline as first-class values so downstream
/// stages can skip the affected points instead of crashing or guessing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitNormal {
    v: Vector3<f64>,
    valid: bool,
}

impl UnitNormal {
    /// The marker for a normal that could not be estimated.
    pub fn invalid() -> Self {
        UnitNormal {
            v: Vector3::zeros(),
            valid: false,
        }
    }

    /// A valid normal pointing along `v`, normalized to unit length.
    ///
    /// Fails with [`Error::InvalidParams`] if `v` is zero or non-finite.
    pub fn from_vector(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "normal direction must be a nonzero finite vector, got {v:?}"
            )));
        }
        Ok(UnitNormal {
            v: v / n,
            valid: true,
        })
    }

    /// True unless this is the could-not-estimate marker.
    pub fn is_valid(&self) -> bool {
        self.valid
    }

    /// The unit direction, or `None` for an invalid normal.
    pub fn vector(&self) -> Option<Vector3<f64>> {
        self.valid.then_some(self.v)
    }

    /// The same normal pointing the other way (invalid stays invalid).
    pub fn flipped(&self) -> Self {
        UnitNormal {
            v: -self.v,
            valid: self.valid,
        }
    }
}

/// Whether neighborhood searches run against the full cloud or a
/// voxel-downsampled stand-in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecimationSpec {
    factor: Option<u32>,
}

impl DecimationSpec {
    /// Search the full cloud (no approximation).
    pub fn exact() -> Self {
        DecimationSpec { factor: None }
    }

    /// Search a downsampled cloud with voxel edge `radius / d`.
    ///
    /// Larger `d` means finer voxels: more retained points, less error,
    /// less speedup. Fails with [`Error::InvalidParams`] for `d == 0`.
    pub fn with_factor(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParams(
                "decimation factor must be at least 1".to_string(),
            ));
        }
        Ok(DecimationSpec { factor: Some(d) })
    }

    /// The factor `d`, or `None` when searching the full cloud.
    pub fn factor(&self) -> Option<u32> {
        self.factor
    }

    /// True when no downsampling is applied.
    pub fn is_exact(&self) -> bool {
        self.factor.is_none()
    }
}

/// Per-point normals of one cloud at one support radius, index-aligned with
/// the cloud they were estimated from.
#[derive(Clone, Debug)]
pub struct NormalMap {
    normals: Vec<UnitNormal>,
    radius: f64,
}

impl NormalMap {
    /// Wraps precomputed normals. Fails with [`Error::InvalidRadius`] unless
    /// `radius` is positive and finite.
    pub fn from_normals(normals: Vec<UnitNormal>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidRadius(radius));
        }
        Ok(NormalMap { normals, radius })
    }

    /// The support radius the normals were estimated at.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Number of entries (equals the source cloud size).
    pub fn len(&self) -> usize {
        self.normals.len()
    }

    /// True for a map over an empty cloud.
    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    /// The normal for point `index`.
    ///
    /// # Panics
    /// Panics if `index` is out of range, like slice indexing.
    pub fn get(&self, index: usize) -> UnitNormal {
        self.normals[index]
    }

    /// All normals, in point order.
    pub fn normals(&self) -> &[UnitNormal] {
        &self.normals
    }

    /// How many entries are valid.
    pub fn valid_count(&self) -> usize {
        self.normals.iter().filter(|n| n.is_valid()).count()
    }
}

/// Sign convention for estimated normals: the first nonzero component is
/// positive. PCA only determines the normal up to sign; pinning the sign
/// here makes estimates reproducible and comparable across scales.
fn canonical_sign(v: Vector3<f64>) -> Vector3<f64> {
    let lead = if v.x != 0.0 {
        v.x
    } else if v.y != 0.0 {
        v.y
    } else {
        v.z
    };
    if lead < 0.0 {
        -v
    } else {
        v
    }
}

/// PCA normal from the points selected by `ids`.
///
/// `ids` must be in ascending order; callers get that for free from
/// [`SpatialIndex::radius_search`]. Keeping the accumulation order fixed
/// makes the result bit-reproducible.
fn pca_normal(points: &[Point3], ids: &[usize]) -> UnitNormal {
    let n = ids.len();
    if n < MIN_NEIGHBORS {
        return UnitNormal::invalid();
    }

    let mut centroid = Vector3::zeros();
    for &i in ids {
        centroid += points[i].coords();
    }
    centroid /= n as f64;

    let (mut xx, mut xy, mut xz, mut yy, mut yz, mut zz) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for &i in ids {
        let d = points[i].coords() - centroid;
        xx += d.x * d.x;
        xy += d.x * d.y;
        xz += d.x * d.z;
        yy += d.y * d.y;
        yz += d.y * d.z;
        zz += d.z * d.z;
    }
    let inv = 1.0 / n as f64;
    let cov = Matrix3::new(
        xx * inv,
        xy * inv,
        xz * inv,
        xy * inv,
        yy * inv,
        yz * inv,
        xz * inv,
        yz * inv,
        zz * inv,
    );

    let eig = cov.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let (l0, l1, l2) = (
        eig.eigenvalues[order[0]],
        eig.eigenvalues[order[1]],
        eig.eigenvalues[order[2]],
    );

    // No spread at all, or no unique least-variance direction (the two
    // smallest eigenvalues coincide up to numerical noise): degenerate.
    // Written so that a NaN eigenvalue also lands on the invalid branch.
    if !(l2.is_finite() && l2 > 0.0) || (l1 - l0) <= DEGENERACY_REL_TOL * l2 {
        return UnitNormal::invalid();
    }

    let v = eig.eigenvectors.column(order[0]).into_owned();
    let norm = v.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return UnitNormal::invalid();
    }
    UnitNormal {
        v: canonical_sign(v / norm),
        valid: true,
    }
}

/// Estimates the normal at one query position from the points of `cloud`
/// within `radius` (boundary inclusive), by linear scan.
///
/// The query position need not be a cloud member. Degenerate neighborhoods
/// yield [`UnitNormal::invalid`]; the only error is an invalid radius. For
/// per-point normals over a whole cloud use [`estimate_normal_map`], which
/// amortizes the neighbor searches over a spatial index.
pub fn estimate_normal(cloud: &PointCloud, query: Point3, radius: f64) -> Result<UnitNormal> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidRadius(radius));
    }
    let r2 = radius * radius;
    let ids: Vec<usize> = cloud
        .points()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.distance_squared(query) <= r2)
        .map(|(i, _)| i)
        .collect();
    Ok(pca_normal(cloud.points(), &ids))
}

/// Estimates a normal for every point of `cloud` at the given support
/// radius.
///
/// With an exact [`DecimationSpec`] the neighborhoods come from the cloud
/// itself. With a decimation factor `d`, the cloud is first voxel-downsampled
/// at cell edge `radius / d` (grid anchored at the cloud's minimum corner)
/// and neighborhoods are gathered from that smaller cloud instead — but a
/// normal is still estimated *at every original point*, so the result stays
/// index-aligned with `cloud`.
///
/// Points are processed independently, each writing its own output slot, so
/// the result is identical for any thread count.
pub fn estimate_normal_map(
    cloud: &PointCloud,
    radius: f64,
    decimation: DecimationSpec,
) -> Result<NormalMap> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidRadius(radius));
    }

    let downsampled;
    let search_cloud: &PointCloud = match decimation.factor() {
        None => cloud,
        Some(d) => {
            let spec = VoxelGridSpec::anchored_at_min(cloud, radius / d as f64)?;
            downsampled = voxel_downsample(cloud, &spec);
            &downsampled
        }
    };

    let index = SpatialIndex::build(search_cloud);
    let normals = par::map_range(cloud.len(), |i| {
        let ids = index
            .radius_search(cloud.point(i), radius)
            .expect("radius already validated");
        pca_normal(search_cloud.points(), &ids)
    });
    Ok(NormalMap { normals, radius })
}

/// Returns a copy of `map` with every valid normal flipped, where needed, to
/// point toward `viewpoint` — the usual convention for sensor data, where a
/// surface seen by the sensor must face it. A normal exactly perpendicular
/// to the line of sight is left as is.
///
/// # Panics
/// Panics if `map` and `cloud` have different lengths.
pub fn orient_to_viewpoint(map: &NormalMap, cloud: &PointCloud, viewpoint: Point3) -> NormalMap {
    assert_eq!(
        map.len(),
        cloud.len(),
        "normal map and cloud must be index-aligned"
    );
    let normals = map
        .normals
        .iter()
        .enumerate()
        .map(|(i, n)| match n.vector() {
            Some(v) => {
                let to_view = viewpoint.coords() - cloud.point(i).coords();
                if v.dot(&to_view) < 0.0 {
                    n.flipped()
                } else {
                    *n
                }
            }
            None => *n,
        })
        .collect();
    NormalMap {
        normals,
        radius: map.radius,
    }
}

/// Unsigned angle, in degrees, between two valid normals, treating a normal
/// and its negation as the same direction. `None` if either is invalid.
pub fn angular_deviation_deg(a: UnitNormal, b: UnitNormal) -> Option<f64> {
    let va = a.vector()?;
    let vb = b.vector()?;
    Some(va.dot(&vb).abs().clamp(0.0, 1.0).acos().to_degrees())
}

/// Distribution of angular deviations between two index-aligned normal maps.
#[derive(Clone, Copy, Debug)]
pub struct DeviationSummary {
    /// Number of points valid in both maps.
    pub count: usize,
    pub median_deg: f64,
    pub p95_deg: f64,
    pub max_deg: f64,
}

/// Compares two normal maps point by point (typically an exact and a
/// decimated estimate at the same radius). Only points valid in both maps
/// contribute; returns `None` when there are no such points.
///
/// # Panics
/// Panics if the maps have different lengths.
pub fn deviation_summary(a: &NormalMap, b: &NormalMap) -> Option<DeviationSummary> {
    assert_eq!(a.len(), b.len(), "normal maps must be index-aligned");
    let mut devs: Vec<f64> = (0..a.len())
        .filter_map(|i| angular_deviation_deg(a.get(i), b.get(i)))
        .collect();
    if devs.is_empty() {
        return None;
    }
    devs.sort_unstable_by(f64::total_cmp);
    Some(DeviationSummary {
        count: devs.len(),
        median_deg: stats::median_sorted(&devs).expect("nonempty"),
        p95_deg: stats::percentile_sorted(&devs, 95.0).expect("nonempty"),
        max_deg: *devs.last().expect("nonempty"),
    })
}
