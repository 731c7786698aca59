//! Property tests for the library's structural guarantees: the bound on the
//! multi-scale response magnitude, its invariance to normal sign flips,
//! voxel-grid bookkeeping, and lossless text/binary round-trips.

use std::collections::HashSet;

use don_core::don::{compute_don_field, don_pair, DoNParams};
use don_core::io::{load_cloud, save_cloud, CloudFormat};
use don_core::normals::{DecimationSpec, UnitNormal};
use don_core::voxel::{voxel_downsample, VoxelGridSpec};
use don_core::{Point3, PointCloud};
use nalgebra::Vector3;
use proptest::prelude::*;

fn unit_vector() -> impl Strategy<Value = Vector3<f64>> {
    ((-1.0..1.0f64), (-1.0..1.0f64), (-1.0..1.0f64)).prop_filter_map(
        "too short to normalize",
        |(x, y, z)| {
            let v = Vector3::new(x, y, z);
            let n = v.norm();
            if n > 1e-3 {
                Some(v / n)
            } else {
                None
            }
        },
    )
}

// ---------------------------------------------------------------------------
// Pairwise response: bound, symmetry, sign invariance.
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn response_magnitude_never_exceeds_half_sqrt_two(
        a in unit_vector(),
        b in unit_vector(),
    ) {
        let na = UnitNormal::from_vector(a).unwrap();
        let nb = UnitNormal::from_vector(b).unwrap();
        let d = don_pair(na, nb).unwrap();
        let bound = 0.5f64.sqrt();
        prop_assert!(d.norm() <= bound + 1e-12, "magnitude {} over bound", d.norm());
    }

    #[test]
    fn response_magnitude_is_half_angle_sine(
        a in unit_vector(),
        b in unit_vector(),
    ) {
        let na = UnitNormal::from_vector(a).unwrap();
        let nb = UnitNormal::from_vector(b).unwrap();
        let d = don_pair(na, nb).unwrap();
        // Angle after disambiguation, i.e. between a and ±b, whichever is
        // in the same hemisphere.
        let cos = a.dot(&b).abs().clamp(0.0, 1.0);
        let theta = cos.acos();
        prop_assert!(
            (d.norm() - (theta / 2.0).sin()).abs() < 1e-9,
            "magnitude {} vs sin(theta/2) {}",
            d.norm(),
            (theta / 2.0).sin()
        );
    }

    #[test]
    fn response_magnitude_ignores_sign_of_either_input(
        a in unit_vector(),
        b in unit_vector(),
        flip_a in any::<bool>(),
        flip_b in any::<bool>(),
    ) {
        let na = UnitNormal::from_vector(a).unwrap();
        let nb = UnitNormal::from_vector(b).unwrap();
        let fa = UnitNormal::from_vector(if flip_a { -a } else { a }).unwrap();
        let fb = UnitNormal::from_vector(if flip_b { -b } else { b }).unwrap();
        let base = don_pair(na, nb).unwrap();
        let flipped = don_pair(fa, fb).unwrap();
        prop_assert!(
            (base.norm() - flipped.norm()).abs() < 1e-12,
            "flip changed magnitude: {} vs {}",
            base.norm(),
            flipped.norm()
        );
    }

    #[test]
    fn response_is_invalid_only_when_an_input_is(
        a in unit_vector(),
        drop_first in any::<bool>(),
    ) {
        let good = UnitNormal::from_vector(a).unwrap();
        let bad = UnitNormal::invalid();
        let (n1, n2) = if drop_first { (bad, good) } else { (good, bad) };
        prop_assert!(don_pair(n1, n2).is_none());
        prop_assert!(don_pair(good, good).is_some());
    }
}

// ---------------------------------------------------------------------------
// Field-level invariants on a synthetic scene.
// ---------------------------------------------------------------------------

#[test]
fn field_magnitudes_respect_bound_on_synthetic_scene() {
    let mut rng = don_synth::seeded_rng(7);
    let ground = don_synth::noisy_ground(4.0, 4.0, 0.08, 0.005, &[], &mut rng);
    let walls = don_synth::box_walls(Point3::new(0.5, 0.5, 0.4), (0.8, 0.8, 0.8), 0.3, 0.06, true);
    let cloud = don_synth::merge(&[&ground, &walls]);
    let params = DoNParams::new(0.15, 0.6).unwrap();
    let field = compute_don_field(&cloud, params, DecimationSpec::exact());
    assert_eq!(field.len(), cloud.len());
    let bound = 0.5f64.sqrt() + 1e-12;
    let mut seen_valid = false;
    for i in 0..field.len() {
        match field.magnitude(i) {
            Some(m) => {
                seen_valid = true;
                assert!((0.0..=bound).contains(&m), "index {i}: magnitude {m}");
            }
            None => {
                // Invalid entries expose no vector either.
                assert!(field.vector(i).is_none());
            }
        }
    }
    assert!(seen_valid, "scene produced no valid responses at all");
}

// ---------------------------------------------------------------------------
// Voxel grid properties.
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn downsample_keeps_one_input_point_per_occupied_cell(
        raw in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64), 1..120),
        len in 0.2..2.0f64,
    ) {
        let cloud: PointCloud = raw.iter().map(|&(x, y, z)| Point3::new(x, y, z)).collect();
        let spec = VoxelGridSpec::anchored_at_min(&cloud, len).unwrap();
        let down = voxel_downsample(&cloud, &spec);

        // Count occupied cells independently.
        let occupied: HashSet<[i64; 3]> =
            cloud.points().iter().map(|p| spec.cell_of(*p)).collect();
        prop_assert_eq!(down.len(), occupied.len());

        // Every output point is one of the inputs, each from a distinct cell.
        let inputs: HashSet<(u64, u64, u64)> = cloud
            .points()
            .iter()
            .map(|p| (p.x.to_bits(), p.y.to_bits(), p.z.to_bits()))
            .collect();
        let mut cells_seen = HashSet::new();
        for p in down.points() {
            prop_assert!(inputs.contains(&(p.x.to_bits(), p.y.to_bits(), p.z.to_bits())));
            prop_assert!(cells_seen.insert(spec.cell_of(*p)));
        }

        // Downsampling twice at the same resolution changes nothing.
        let again = voxel_downsample(&down, &spec);
        prop_assert_eq!(again.len(), down.len());
        for (a, b) in again.points().iter().zip(down.points()) {
            prop_assert_eq!(a.x.to_bits(), b.x.to_bits());
            prop_assert_eq!(a.y.to_bits(), b.y.to_bits());
            prop_assert_eq!(a.z.to_bits(), b.z.to_bits());
        }
    }

    #[test]
    fn representative_minimizes_distance_to_cell_centroid(
        raw in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64), 1..80),
        len in 0.3..1.5f64,
    ) {
        let cloud: PointCloud = raw.iter().map(|&(x, y, z)| Point3::new(x, y, z)).collect();
        let spec = VoxelGridSpec::anchored_at_min(&cloud, len).unwrap();
        let down = voxel_downsample(&cloud, &spec);

        for rep in down.points() {
            let cell = spec.cell_of(*rep);
            let members: Vec<Point3> = cloud
                .points()
                .iter()
                .copied()
                .filter(|p| spec.cell_of(*p) == cell)
                .collect();
            let n = members.len() as f64;
            let cx = members.iter().map(|p| p.x).sum::<f64>() / n;
            let cy = members.iter().map(|p| p.y).sum::<f64>() / n;
            let cz = members.iter().map(|p| p.z).sum::<f64>() / n;
            let centroid = Point3::new(cx, cy, cz);
            let d_rep = rep.distance_squared(centroid);
            for m in &members {
                prop_assert!(
                    d_rep <= m.distance_squared(centroid) + 1e-15,
                    "cell {:?}: representative is not nearest to centroid",
                    cell
                );
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Storage round-trips.
// ---------------------------------------------------------------------------

fn finite_coord() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e4..1e4f64,
        -1.0..1.0f64,
        Just(0.0),
        Just(-0.0),
        Just(1.25e-30),
        Just(-9.875e20),
        Just(f64::MIN_POSITIVE),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn every_format_round_trips_bit_for_bit(
        raw in prop::collection::vec((finite_coord(), finite_coord(), finite_coord()), 0..40),
        attr in prop::collection::vec(-1e6..1e6f64, 0..40),
        format_pick in 0..4usize,
    ) {
        let mut cloud: PointCloud = raw.iter().map(|&(x, y, z)| Point3::new(x, y, z)).collect();
        let format = [
            CloudFormat::Xyz,
            CloudFormat::Pcd,
            CloudFormat::PlyAscii,
            CloudFormat::PlyBinary,
        ][format_pick];
        // Plain xyz text has no named fields: its reader takes the first
        // three columns and ignores the rest, so attributes survive a round
        // trip only in the self-describing formats.
        let keeps_attributes = !matches!(format, CloudFormat::Xyz);
        if keeps_attributes && attr.len() == cloud.len() && !attr.is_empty() {
            cloud.set_attribute("intensity", attr).unwrap();
        }

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cloud.dat");
        save_cloud(&cloud, &path, format).unwrap();
        let back = load_cloud(&path, format).unwrap();

        prop_assert_eq!(back.len(), cloud.len());
        for (a, b) in back.points().iter().zip(cloud.points()) {
            prop_assert_eq!(a.x.to_bits(), b.x.to_bits());
            prop_assert_eq!(a.y.to_bits(), b.y.to_bits());
            prop_assert_eq!(a.z.to_bits(), b.z.to_bits());
        }
        let names: Vec<&str> = back.attribute_names().collect();
        let expect_names: Vec<&str> = cloud.attribute_names().collect();
        prop_assert_eq!(names, expect_names);
        for name in cloud.attribute_names() {
            let a = back.attribute(name).unwrap();
            let b = cloud.attribute(name).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(b) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }

        // Saving the loaded cloud again reproduces the file byte for byte.
        let path2 = dir.path().join("cloud2.dat");
        save_cloud(&back, &path2, format).unwrap();
        let bytes1 = std::fs::read(&path).unwrap();
        let bytes2 = std::fs::read(&path2).unwrap();
        prop_assert_eq!(bytes1, bytes2);
    }
}
