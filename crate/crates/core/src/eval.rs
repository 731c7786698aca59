//! Scoring extracted clusters against ground-truth object boxes.
//!
//! Ground truth is a list of yaw-rotated boxes per frame. A box's reference
//! point set is every cloud point inside it (boundary inclusive); each box
//! is matched to the extracted cluster sharing the most points with that
//! set, and scored by precision (cluster purity) and recall (coverage of
//! the box's points).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::cloud::{Point3, PointCloud};
use crate::clustering::{euclidean_clusters, Cluster, ClusterParams};
use crate::don::{compute_don_field, filter_by_magnitude, DoNParams};
use crate::error::{Error, Result};
use crate::normals::DecimationSpec;
use crate::par;

/// An oriented ground-truth box: axis-aligned dimensions rotated by `yaw`
/// about the vertical (`z`) axis around its center.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthBox {
    frame_id: String,
    class_name: String,
    center: Point3,
    length: f64,
    width: f64,
    height: f64,
    yaw: f64,
}

impl GroundTruthBox {
    /// Validates dimensions (positive, finite) and a finite yaw, which is
    /// normalized into `(-pi, pi]`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        frame_id: impl Into<String>,
        class_name: impl Into<String>,
        center: Point3,
        length: f64,
        width: f64,
        height: f64,
        yaw: f64,
    ) -> Result<Self> {
        for d in [length, width, height] {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "box dimensions must be positive and finite, got {length} x {width} x {height}"
                )));
            }
        }
        if !yaw.is_finite() {
            return Err(Error::InvalidParams(format!(
                "yaw must be finite, got {yaw}"
            )));
        }
        Ok(GroundTruthBox {
            frame_id: frame_id.into(),
            class_name: class_name.into(),
            center,
            length,
            width,
            height,
            yaw: normalize_yaw(yaw),
        })
    }

    pub fn frame_id(&self) -> &str {
        &self.frame_id
    }

    pub fn class_name(&self) -> &str {
        &self.class_name
    }

    pub fn center(&self) -> Point3 {
        self.center
    }

    /// `(length, width, height)`: extents along the box axes.
    pub fn dimensions(&self) -> (f64, f64, f64) {
        (self.length, self.width, self.height)
    }

    /// Rotation about `z`, normalized into `(-pi, pi]`.
    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    /// Whether `p` lies inside the box, boundary inclusive: the point is
    /// expressed in the box frame (translate to the center, rotate by
    /// `-yaw`) and compared against the half-extents.
    pub fn contains(&self, p: Point3) -> bool {
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        let dz = p.z - self.center.z;
        let (sin, cos) = self.yaw.sin_cos();
        let bx = cos * dx + sin * dy;
        let by = -sin * dx + cos * dy;
        bx.abs() <= self.length / 2.0
            && by.abs() <= self.width / 2.0
            && dz.abs() <= self.height / 2.0
    }
}

/// Wraps an angle into `(-pi, pi]`.
fn normalize_yaw(yaw: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut y = yaw % TAU;
    if y <= -PI {
        y += TAU;
    } else if y > PI {
        y -= TAU;
    }
    y
}

/// Indices (ascending) of the cloud points inside the box.
pub fn points_in_box(cloud: &PointCloud, b: &GroundTruthBox) -> Vec<usize> {
    cloud
        .points()
        .iter()
        .enumerate()
        .filter(|(_, p)| b.contains(**p))
        .map(|(i, _)| i)
        .collect()
}

/// Size of the intersection of two ascending index slices.
fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let mut n = 0;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Picks the cluster sharing the most points with the ground-truth set
/// `gt` (ascending indices), returning its position in `clusters`.
///
/// Ties fall to the higher precision (the smaller cluster), then to the
/// cluster with the lowest member index. `None` when no cluster shares any
/// point.
pub fn match_cluster(clusters: &[Cluster], gt: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, usize, usize, usize)> = None; // (inter, len, min_idx, pos)
    for (pos, c) in clusters.iter().enumerate() {
        let inter = intersection_size(c.indices(), gt);
        if inter == 0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((bi, blen, bmin, _)) => {
                (inter > bi)
                    || (inter == bi && c.len() < blen)
                    || (inter == bi && c.len() == blen && c.min_index() < bmin)
            }
        };
        if better {
            best = Some((inter, c.len(), c.min_index(), pos));
        }
    }
    best.map(|(_, _, _, pos)| pos)
}

/// Precision and recall of a cluster against a ground-truth point set:
/// `(|c ∩ gt| / |c|, |c ∩ gt| / |gt|)`.
///
/// Fails with [`Error::EmptyInput`] if `gt` is empty.
pub fn precision_recall(cluster: &Cluster, gt: &[usize]) -> Result<(f64, f64)> {
    if gt.is_empty() {
        return Err(Error::EmptyInput("ground-truth point set"));
    }
    let inter = intersection_size(cluster.indices(), gt) as f64;
    Ok((inter / cluster.len() as f64, inter / gt.len() as f64))
}

/// Pipeline settings for sequence evaluation.
#[derive(Clone, Copy, Debug)]
pub struct EvalConfig {
    don_params: DoNParams,
    threshold: f64,
    cluster_params: ClusterParams,
    min_gt_points: usize,
    decimation: DecimationSpec,
}

impl EvalConfig {
    /// Validates the magnitude threshold (`[0, 1]`). Ground-truth objects
    /// need at least 100 in-box points by default; searches are exact
    /// unless a decimation is set.
    pub fn new(
        don_params: DoNParams,
        threshold: f64,
        cluster_params: ClusterParams,
    ) -> Result<Self> {
        if !(threshold.is_finite() && (0.0..=1.0).contains(&threshold)) {
            return Err(Error::InvalidThreshold(threshold));
        }
        Ok(EvalConfig {
            don_params,
            threshold,
            cluster_params,
            min_gt_points: 100,
            decimation: DecimationSpec::exact(),
        })
    }

    /// Changes the minimum in-box point count for a box to be scored.
    /// Fails with [`Error::InvalidParams`] for zero.
    pub fn with_min_gt_points(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams(
                "minimum ground-truth point count must be at least 1".to_string(),
            ));
        }
        self.min_gt_points = n;
        Ok(self)
    }

    /// Runs the per-frame fields with the given decimation.
    pub fn with_decimation(mut self, decimation: DecimationSpec) -> Self {
        self.decimation = decimation;
        self
    }

    pub fn don_params(&self) -> DoNParams {
        self.don_params
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn cluster_params(&self) -> ClusterParams {
        self.cluster_params
    }

    pub fn min_gt_points(&self) -> usize {
        self.min_gt_points
    }
}

/// Outcome for one scored ground-truth box.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalRecord {
    pub frame_id: String,
    pub class_name: String,
    /// Cloud points inside the box.
    pub gt_point_count: usize,
    /// Precision and recall of the matched cluster, or `None` when no
    /// cluster shared a point with the box.
    pub score: Option<(f64, f64)>,
}

impl EvalRecord {
    pub fn matched(&self) -> bool {
        self.score.is_some()
    }
}

/// Runs the full pipeline (field, magnitude filter, clustering, matching)
/// over a sequence of frames and scores every ground-truth box that holds
/// at least `min_gt_points` cloud points; smaller boxes are omitted from
/// the output entirely.
///
/// Frames are independent and processed in parallel; records keep frame
/// order, then box order within the frame, so output is deterministic.
pub fn evaluate_sequence(
    frames: &[(PointCloud, Vec<GroundTruthBox>)],
    config: &EvalConfig,
) -> Vec<EvalRecord> {
    let per_frame = par::map_range(frames.len(), |fi| {
        let (cloud, boxes) = &frames[fi];
        let field = compute_don_field(cloud, config.don_params, config.decimation);
        let kept = filter_by_magnitude(&field, config.threshold)
            .expect("threshold validated at EvalConfig construction");
        let clusters = euclidean_clusters(cloud, &kept, config.cluster_params)
            .expect("filter indices are in range");
        let mut records = Vec::new();
        for b in boxes {
            let gt = points_in_box(cloud, b);
            if gt.len() < config.min_gt_points {
                continue;
            }
            let score = match_cluster(&clusters, &gt).map(|pos| {
                precision_recall(&clusters[pos], &gt).expect("gt nonempty by the size gate")
            });
            records.push(EvalRecord {
                frame_id: b.frame_id.clone(),
                class_name: b.class_name.clone(),
                gt_point_count: gt.len(),
                score,
            });
        }
        records
    });
    per_frame.into_iter().flatten().collect()
}

/// Aggregate view of a record list.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalSummary {
    /// Scored boxes.
    pub records: usize,
    /// Boxes with a matched cluster.
    pub matched: usize,
    /// Mean precision over matched boxes (`None` if nothing matched).
    pub mean_precision: Option<f64>,
    /// Mean recall over *all* scored boxes, unmatched counting as zero
    /// (`None` if nothing was scored).
    pub mean_recall: Option<f64>,
}

/// Summarizes records produced by [`evaluate_sequence`].
pub fn summarize_records(records: &[EvalRecord]) -> EvalSummary {
    let matched: Vec<&EvalRecord> = records.iter().filter(|r| r.matched()).collect();
    let mean_precision = if matched.is_empty() {
        None
    } else {
        Some(matched.iter().map(|r| r.score.unwrap().0).sum::<f64>() / matched.len() as f64)
    };
    let mean_recall = if records.is_empty() {
        None
    } else {
        Some(
            records
                .iter()
                .map(|r| r.score.map_or(0.0, |(_, rec)| rec))
                .sum::<f64>()
                / records.len() as f64,
        )
    };
    EvalSummary {
        records: records.len(),
        matched: matched.len(),
        mean_precision,
        mean_recall,
    }
}

/// Writes records as CSV: `frame_id,class,gt_points,matched,precision,recall`.
/// Unmatched rows leave precision and recall empty.
pub fn write_records<W: Write>(records: &[EvalRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "frame_id,class,gt_points,matched,precision,recall")?;
    for r in records {
        match r.score {
            Some((p, rec)) => writeln!(
                w,
                "{},{},{},true,{:.6},{:.6}",
                r.frame_id, r.class_name, r.gt_point_count, p, rec
            )?,
            None => writeln!(
                w,
                "{},{},{},false,,",
                r.frame_id, r.class_name, r.gt_point_count
            )?,
        }
    }
    Ok(())
}

/// Parses a ground-truth file: one box per line as
/// `frame_id class cx cy cz length width height yaw` (whitespace-separated,
/// `#` comments and blank lines skipped, yaw in radians).
pub fn parse_ground_truth(path: impl AsRef<Path>) -> Result<Vec<GroundTruthBox>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut boxes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 9 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 9 columns, found {}", tokens.len()),
            ));
        }
        let mut nums = [0.0_f64; 7];
        for (slot, token) in nums.iter_mut().zip(&tokens[2..]) {
            *slot = token
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("invalid number {token:?}")))?;
        }
        let center = Point3::try_new(nums[0], nums[1], nums[2])
            .ok_or_else(|| Error::parse(path, lineno, "non-finite box center"))?;
        let b = GroundTruthBox::new(
            tokens[0], tokens[1], center, nums[3], nums[4], nums[5], nums[6],
        )
        .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        boxes.push(b);
    }
    Ok(boxes)
}
