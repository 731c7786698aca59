//! Multi-scale point-cloud filtering and segmentation.
//!
//! The crate is organized around one idea: estimating surface normals at two
//! different support radii and looking at how much they disagree. Flat,
//! large-scale structure (roads, walls) looks the same at both scales, while
//! objects whose geometry lives between the two radii (poles, pedestrians,
//! cars) produce a large difference. Thresholding that difference and
//! clustering what survives yields object candidates.
//!
//! The pipeline stages are:
//!
//! * [`cloud`] — point and cloud containers with named scalar attributes;
//! * [`io`] — XYZ / PCD / PLY readers and writers;
//! * [`spatial`] — fixed-radius neighbor queries over a kd-tree;
//! * [`voxel`] — voxel-grid downsampling that keeps original points;
//! * [`normals`] — PCA surface normals at a fixed support radius, with an
//!   optional decimated approximation for large clouds;
//! * [`don`] — the two-scale normal difference, its magnitude, and filters;
//! * [`clustering`] — Euclidean cluster extraction on filtered subsets;
//! * [`param_select`] — per-class response statistics over a grid of scale
//!   pairs, and a recommendation of scales plus threshold;
//! * [`eval`] — precision/recall scoring against ground-truth boxes.
//!
//! Every stage is deterministic: the same input produces byte-identical
//! output regardless of thread count or whether the `parallel` feature is
//! enabled.

pub mod cloud;
pub mod clustering;
pub mod don;
pub mod error;
pub mod eval;
pub mod io;
pub mod normals;
mod par;
pub mod param_select;
pub mod spatial;
pub mod stats;
pub mod voxel;

pub use cloud::{Point3, PointCloud};
pub use clustering::{euclidean_clusters, Cluster, ClusterParams};
pub use don::{
    compute_don_field, don_pair, filter_by_component, filter_by_magnitude, Axis, DoNField,
    DoNParams,
};
pub use error::{Error, Result};
pub use eval::{evaluate_sequence, EvalConfig, EvalRecord, GroundTruthBox};
pub use normals::{estimate_normal_map, DecimationSpec, NormalMap, UnitNormal};
pub use param_select::{class_response_stats, select_params, ClassSample, ClassStats, ParamGrid};
pub use spatial::SpatialIndex;
pub use voxel::{voxel_downsample, VoxelGridSpec};
