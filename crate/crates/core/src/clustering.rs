//! Euclidean cluster extraction over filtered point subsets.
//!
//! Clusters are the connected components of the "within `tolerance` of each
//! other" graph on the selected points: two points belong to the same
//! cluster exactly when a chain of selected points links them with every hop
//! no longer than the tolerance. Components outside the configured size
//! window are discarded.

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::spatial::SpatialIndex;

/// Clustering controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClusterParams {
    tolerance: f64,
    min_points: usize,
    max_points: usize,
}

impl ClusterParams {
    /// Validates `tolerance > 0` (finite) and `1 <= min_points <= max_points`.
    pub fn new(tolerance: f64, min_points: usize, max_points: usize) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::InvalidRadius(tolerance));
        }
        if min_points == 0 || min_points > max_points {
            return Err(Error::InvalidParams(format!(
                "cluster size window must satisfy 1 <= min <= max, got min = {min_points}, max = {max_points}"
            )));
        }
        Ok(ClusterParams {
            tolerance,
            min_points,
            max_points,
        })
    }

    /// Neighbor distance that connects two points.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Smallest cluster kept.
    pub fn min_points(&self) -> usize {
        self.min_points
    }

    /// Largest cluster kept (bigger components are dropped, not split).
    pub fn max_points(&self) -> usize {
        self.max_points
    }
}

/// One extracted cluster: original cloud indices, ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    indices: Vec<usize>,
}

impl Cluster {
    /// Member indices into the original cloud, ascending.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Number of member points.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    /// Clusters are never empty, but the conventional pair to `len`.
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Smallest member index — the tie-breaking identity of the cluster.
    pub fn min_index(&self) -> usize {
        self.indices[0]
    }
}

/// Extracts Euclidean clusters from the points of `cloud` selected by
/// `subset`.
///
/// Only selected points participate: an unselected point can neither join a
/// cluster nor bridge two of them. `subset` entries may repeat and come in
/// any order; they are deduplicated first. Returned clusters carry original
/// cloud indices and are ordered by size (largest first), ties by smallest
/// member index — so the output is fully deterministic.
///
/// Fails with [`Error::IndexOutOfRange`] if `subset` mentions a point the
/// cloud does not have.
pub fn euclidean_clusters(
    cloud: &PointCloud,
    subset: &[usize],
    params: ClusterParams,
) -> Result<Vec<Cluster>> {
    let mut chosen: Vec<usize> = subset.to_vec();
    chosen.sort_unstable();
    chosen.dedup();
    if let Some(&bad) = chosen.last().filter(|&&i| i >= cloud.len()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: cloud.len(),
        });
    }

    // Index only the selected points; search results use positions within
    // `chosen`, mapped back to original indices at the end.
    let sub_cloud = cloud.select(&chosen)?;
    let index = SpatialIndex::build(&sub_cloud);

    let mut visited = vec![false; chosen.len()];
    let mut clusters = Vec::new();
    let mut queue: Vec<usize> = Vec::new();

    for seed in 0..chosen.len() {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        queue.clear();
        queue.push(seed);
        let mut members = vec![seed];
        while let Some(cur) = queue.pop() {
            let neighbors = index
                .radius_search(sub_cloud.point(cur), params.tolerance)
                .expect("tolerance validated at ClusterParams construction");
            for n in neighbors {
                if !visited[n] {
                    visited[n] = true;
                    members.push(n);
                    queue.push(n);
                }
            }
        }
        if (params.min_points..=params.max_points).contains(&members.len()) {
            let mut indices: Vec<usize> = members.iter().map(|&m| chosen[m]).collect();
            indices.sort_unstable();
            clusters.push(Cluster { indices });
        }
    }

    clusters.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then(a.min_index().cmp(&b.min_index()))
    });
    Ok(clusters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Point3;

    fn line_blob(x0: f64, n: usize, spacing: f64) -> Vec<Point3> {
        (0..n)
            .map(|i| Point3::new(x0 + i as f64 * spacing, 0.0, 0.0))
            .collect()
    }

    #[test]
    fn separates_well_spaced_blobs() {
        // Three chains at x = 0, 10, 20; in-chain spacing 0.1.
        let mut pts = line_blob(0.0, 5, 0.1);
        pts.extend(line_blob(10.0, 8, 0.1));
        pts.extend(line_blob(20.0, 3, 0.1));
        let cloud = PointCloud::from_points(pts);
        let subset: Vec<usize> = (0..cloud.len()).collect();
        let params = ClusterParams::new(0.2, 1, 1000).unwrap();
        let clusters = euclidean_clusters(&cloud, &subset, params).unwrap();

        // Largest first, ties impossible here.
        assert_eq!(clusters.len(), 3);
        assert_eq!(clusters[0].len(), 8);
        assert_eq!(clusters[1].len(), 5);
        assert_eq!(clusters[2].len(), 3);
        assert_eq!(clusters[1].indices(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn tolerance_is_inclusive() {
        let cloud =
            PointCloud::from_points(vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)]);
        let one =
            euclidean_clusters(&cloud, &[0, 1], ClusterParams::new(1.0, 1, 10).unwrap()).unwrap();
        assert_eq!(one.len(), 1);
        let two =
            euclidean_clusters(&cloud, &[0, 1], ClusterParams::new(0.99, 1, 10).unwrap()).unwrap();
        assert_eq!(two.len(), 2);
    }

    #[test]
    fn unselected_points_do_not_bridge() {
        // A bridge point at x = 1 connects x = 0 and x = 2 only if selected.
        let cloud = PointCloud::from_points(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
        ]);
        let params = ClusterParams::new(1.2, 1, 10).unwrap();
        let bridged = euclidean_clusters(&cloud, &[0, 1, 2], params).unwrap();
        assert_eq!(bridged.len(), 1);
        let split = euclidean_clusters(&cloud, &[0, 2], params).unwrap();
        assert_eq!(split.len(), 2);
    }

    #[test]
    fn size_window_drops_small_and_large() {
        let mut pts = line_blob(0.0, 2, 0.1); // too small
        pts.extend(line_blob(10.0, 5, 0.1)); // kept
        pts.extend(line_blob(20.0, 9, 0.1)); // too large
        let cloud = PointCloud::from_points(pts);
        let subset: Vec<usize> = (0..cloud.len()).collect();
        let params = ClusterParams::new(0.2, 3, 8).unwrap();
        let clusters = euclidean_clusters(&cloud, &subset, params).unwrap();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].len(), 5);
        assert_eq!(clusters[0].min_index(), 2);
    }

    #[test]
    fn subset_duplicates_and_bounds() {
        let cloud = PointCloud::from_points(line_blob(0.0, 3, 0.1));
        let params = ClusterParams::new(0.2, 1, 10).unwrap();
        let clusters = euclidean_clusters(&cloud, &[2, 0, 0, 1, 2], params).unwrap();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].indices(), &[0, 1, 2]);
        assert!(matches!(
            euclidean_clusters(&cloud, &[0, 3], params),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn empty_subset_is_fine() {
        let cloud = PointCloud::from_points(line_blob(0.0, 3, 0.1));
        let params = ClusterParams::new(0.2, 1, 10).unwrap();
        assert!(euclidean_clusters(&cloud, &[], params).unwrap().is_empty());
    }

    #[test]
    fn equal_sizes_order_by_min_index() {
        let mut pts = line_blob(10.0, 4, 0.1);
        pts.extend(line_blob(0.0, 4, 0.1));
        let cloud = PointCloud::from_points(pts);
        let subset: Vec<usize> = (0..cloud.len()).collect();
        let params = ClusterParams::new(0.2, 1, 10).unwrap();
        let clusters = euclidean_clusters(&cloud, &subset, params).unwrap();
        assert_eq!(clusters.len(), 2);
        // Same size: the cluster containing original index 0 (at x = 10)
        // comes first because its smallest member index is 0.
        assert_eq!(clusters[0].min_index(), 0);
        assert_eq!(clusters[1].min_index(), 4);
    }

    #[test]
    fn params_are_validated() {
        assert!(ClusterParams::new(0.0, 1, 10).is_err());
        assert!(ClusterParams::new(-1.0, 1, 10).is_err());
        assert!(ClusterParams::new(1.0, 0, 10).is_err());
        assert!(ClusterParams::new(1.0, 11, 10).is_err());
        assert!(ClusterParams::new(1.0, 10, 10).is_ok());
    }
}
