//! End-to-end behavior on synthetic scenes: normal quality on analytic
//! surfaces, agreement between the exact and decimated paths, scale
//! selectivity of the response field, parameter selection, and the full
//! detect-cluster-score loop.

use don_core::clustering::ClusterParams;
use don_core::don::{compute_don_field, filter_by_magnitude, DoNParams};
use don_core::eval::{
    evaluate_sequence, parse_ground_truth, summarize_records, write_records, EvalConfig,
};
use don_core::normals::{
    angular_deviation_deg, deviation_summary, estimate_normal_map, DecimationSpec, UnitNormal,
};
use don_core::param_select::{class_response_stats, select_params, ClassSample, ParamGrid};
use don_core::{Point3, PointCloud};
use nalgebra::Vector3;

fn up() -> UnitNormal {
    UnitNormal::from_vector(Vector3::new(0.0, 0.0, 1.0)).unwrap()
}

// ---------------------------------------------------------------------------
// Normal quality on analytic surfaces.
// ---------------------------------------------------------------------------

#[test]
fn plane_normals_point_straight_up() {
    let mut rng = don_synth::seeded_rng(11);
    let cloud = don_synth::noisy_ground(3.0, 3.0, 0.05, 0.002, &[], &mut rng);
    let map = estimate_normal_map(&cloud, 0.2, DecimationSpec::exact()).unwrap();
    assert_eq!(map.len(), cloud.len());
    let mut devs: Vec<f64> = (0..map.len())
        .filter_map(|i| angular_deviation_deg(map.get(i), up()))
        .collect();
    assert!(
        devs.len() > cloud.len() * 9 / 10,
        "too many invalid normals"
    );
    devs.sort_by(f64::total_cmp);
    let median = devs[devs.len() / 2];
    assert!(median < 1.0, "median tilt {median} deg");
}

#[test]
fn sphere_normals_are_radial() {
    let center = Point3::new(0.0, 0.0, 0.0);
    let cloud = don_synth::sphere(center, 1.0, 3000);
    let map = estimate_normal_map(&cloud, 0.25, DecimationSpec::exact()).unwrap();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (i, p) in cloud.points().iter().enumerate() {
        let radial = UnitNormal::from_vector(p.coords() - center.coords()).unwrap();
        if let Some(dev) = angular_deviation_deg(map.get(i), radial) {
            worst = worst.max(dev);
            count += 1;
        }
    }
    assert!(count > cloud.len() * 9 / 10, "too many invalid normals");
    assert!(worst < 3.0, "worst radial deviation {worst} deg");
}

// ---------------------------------------------------------------------------
// Exact vs decimated estimation.
// ---------------------------------------------------------------------------

#[test]
fn decimated_map_stays_close_to_exact() {
    let mut rng = don_synth::seeded_rng(23);
    let ground = don_synth::noisy_ground(6.0, 6.0, 0.05, 0.01, &[], &mut rng);
    let walls = don_synth::box_walls(
        Point3::new(1.0, -0.5, 0.5),
        (1.2, 0.9, 1.0),
        0.4,
        0.05,
        true,
    );
    let cloud = don_synth::merge(&[&ground, &walls]);

    let radius = 0.6;
    let exact = estimate_normal_map(&cloud, radius, DecimationSpec::exact()).unwrap();
    let approx =
        estimate_normal_map(&cloud, radius, DecimationSpec::with_factor(3).unwrap()).unwrap();
    assert_eq!(exact.len(), cloud.len());
    assert_eq!(approx.len(), cloud.len());

    let summary = deviation_summary(&exact, &approx).expect("both maps mostly valid");
    assert!(
        summary.count > cloud.len() * 8 / 10,
        "only {} comparable normals",
        summary.count
    );
    assert!(
        summary.median_deg < 2.0,
        "median {} deg",
        summary.median_deg
    );
    assert!(summary.p95_deg < 15.0, "p95 {} deg", summary.p95_deg);
}

#[test]
fn voxels_finer_than_spacing_collapse_to_exact() {
    // radius / factor = 0.3 / 8 = 0.0375 < the 0.05 grid spacing, so every
    // voxel holds a single point and downsampling keeps the whole cloud in
    // index order: the approximate path must reproduce the exact one bit
    // for bit.
    let mut rng = don_synth::seeded_rng(31);
    let cloud = don_synth::noisy_ground(2.0, 2.0, 0.05, 0.01, &[], &mut rng);
    let exact = estimate_normal_map(&cloud, 0.3, DecimationSpec::exact()).unwrap();
    let fine = estimate_normal_map(&cloud, 0.3, DecimationSpec::with_factor(8).unwrap()).unwrap();
    for i in 0..exact.len() {
        match (exact.get(i).vector(), fine.get(i).vector()) {
            (Some(a), Some(b)) => {
                assert_eq!(a.x.to_bits(), b.x.to_bits());
                assert_eq!(a.y.to_bits(), b.y.to_bits());
                assert_eq!(a.z.to_bits(), b.z.to_bits());
            }
            (None, None) => {}
            _ => panic!("validity mismatch at {i}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Scale selectivity of the response field.
// ---------------------------------------------------------------------------

#[test]
fn flat_plane_yields_near_zero_response() {
    let cloud = don_synth::plane_grid(4.0, 4.0, 0.05);
    let params = DoNParams::new(0.15, 0.9).unwrap();
    let field = compute_don_field(&cloud, params, DecimationSpec::exact());
    let mut max_mag: f64 = 0.0;
    let mut valid = 0;
    for i in 0..field.len() {
        if let Some(m) = field.magnitude(i) {
            max_mag = max_mag.max(m);
            valid += 1;
        }
    }
    assert!(valid > cloud.len() * 9 / 10);
    assert!(
        max_mag < 1e-6,
        "plane response should vanish, got {max_mag}"
    );
}

#[test]
fn corrugation_responds_at_small_scale_only() {
    // Ripples with a 0.4 m wavelength: a 0.1 m neighborhood rides the local
    // slope while a 1.2 m neighborhood averages several periods flat.
    let sheet = don_synth::corrugated(4.0, 4.0, 0.05, 0.4, 0.05);
    let params = DoNParams::new(0.1, 1.2).unwrap();
    let field = compute_don_field(&sheet, params, DecimationSpec::exact());
    let mut mags: Vec<f64> = (0..field.len())
        .filter_map(|i| field.magnitude(i))
        .collect();
    mags.sort_by(f64::total_cmp);
    let median = mags[mags.len() / 2];
    assert!(median > 0.05, "corrugation median response {median}");

    // The same pair on a plain flat sheet stays quiet.
    let flat = don_synth::plane_grid(4.0, 4.0, 0.05);
    let flat_field = compute_don_field(&flat, params, DecimationSpec::exact());
    let kept = filter_by_magnitude(&flat_field, 0.05).unwrap();
    assert!(
        kept.len() < flat.len() / 100,
        "{} of {} flat points over threshold",
        kept.len(),
        flat.len()
    );
}

// ---------------------------------------------------------------------------
// Parameter selection.
// ---------------------------------------------------------------------------

#[test]
fn selection_separates_small_structure_from_flat_ground() {
    // "clutter": fist-sized spheres, strongly curved at 10 cm scales.
    let clutter: Vec<PointCloud> = (0..3)
        .map(|k| don_synth::sphere(Point3::new(k as f64, 0.0, 0.2), 0.18, 700))
        .collect();
    // "ground": flat patches, quiet at every scale.
    let ground: Vec<PointCloud> = (0..3)
        .map(|_| don_synth::plane_grid(1.6, 1.6, 0.05))
        .collect();

    let samples = vec![
        ClassSample::new("clutter", clutter),
        ClassSample::new("ground", ground),
    ];
    let grid = ParamGrid::cross(&[0.1, 0.2], &[0.5, 1.0]).unwrap();
    let stats = class_response_stats(&samples, &grid, None, DecimationSpec::exact()).unwrap();

    // Every (class, pair) cell should have data.
    for (ci, _) in stats.classes().iter().enumerate() {
        for (pi, _) in stats.pairs().iter().enumerate() {
            let cell = stats.cell(ci, pi).expect("populated cell");
            assert!(cell.valid_count > 0);
        }
    }

    let choice = select_params(&stats, "clutter").unwrap();
    assert!(choice.margin > 0.05, "weak separation: {}", choice.margin);
    assert!(
        grid.pairs().contains(&choice.params),
        "choice must come from the candidate grid"
    );
    // Threshold sits strictly between the two class medians for that pair.
    let pi = stats
        .pairs()
        .iter()
        .position(|p| *p == choice.params)
        .unwrap();
    let ci_obj = stats.class_index("clutter").unwrap();
    let ci_other = stats.class_index("ground").unwrap();
    let obj_med = stats.cell(ci_obj, pi).unwrap().median;
    let other_med = stats.cell(ci_other, pi).unwrap().median;
    assert!(other_med < choice.threshold && choice.threshold < obj_med);
    let mut csv_bytes = Vec::new();
    stats.to_csv(&mut csv_bytes).unwrap();
    let csv = String::from_utf8(csv_bytes).unwrap();
    assert!(csv.starts_with("class,r1,r2,mean,median,variance,valid_count\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * grid.pairs().len());
}

// ---------------------------------------------------------------------------
// Full detect-cluster-score loop.
// ---------------------------------------------------------------------------

#[test]
fn objects_in_synthetic_frames_are_found_and_scored() {
    let frames: Vec<_> = (0..2)
        .map(|k| don_synth::eval_frame(&format!("frame{k:03}"), k))
        .collect();
    let config = EvalConfig::new(
        DoNParams::new(0.2, 2.0).unwrap(),
        0.25,
        ClusterParams::new(0.2, 60, 1_000_000).unwrap(),
    )
    .unwrap()
    .with_decimation(DecimationSpec::with_factor(4).unwrap());

    let records = evaluate_sequence(&frames, &config);
    assert_eq!(records.len(), frames.len() * frames[0].1.len());
    // Record order follows frame order, then box order within the frame.
    assert!(records[0].frame_id == "frame000" && records.last().unwrap().frame_id == "frame001");

    let summary = summarize_records(&records);
    assert_eq!(summary.records, records.len());
    assert!(
        summary.matched >= records.len() - 1,
        "only {}/{} boxes matched",
        summary.matched,
        records.len()
    );
    let precision = summary.mean_precision.expect("at least one match");
    let recall = summary.mean_recall.expect("non-empty records");
    assert!(precision > 0.8, "mean precision {precision}");
    assert!(recall > 0.4, "mean recall {recall}");

    // The CSV writer emits one line per record plus the header.
    let mut out = Vec::new();
    write_records(&records, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 1 + records.len());
    assert!(text.lines().nth(1).unwrap().starts_with("frame000,object,"));
}

#[test]
fn ground_truth_text_round_trips_through_parser() {
    let (_, boxes) = don_synth::eval_frame("f0", 0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gt.txt");
    let mut text = String::from("# frame class cx cy cz length width height yaw\n\n");
    for b in &boxes {
        let (length, width, height) = b.dimensions();
        text.push_str(&format!(
            "{} {} {} {} {} {} {} {} {}\n",
            b.frame_id(),
            b.class_name(),
            b.center().x,
            b.center().y,
            b.center().z,
            length,
            width,
            height,
            b.yaw()
        ));
    }
    std::fs::write(&path, text).unwrap();
    let parsed = parse_ground_truth(&path).unwrap();
    assert_eq!(parsed.len(), boxes.len());
    for (a, b) in parsed.iter().zip(&boxes) {
        assert_eq!(a.frame_id(), b.frame_id());
        assert_eq!(a.class_name(), b.class_name());
        assert_eq!(a.center().x.to_bits(), b.center().x.to_bits());
        assert_eq!(a.yaw().to_bits(), b.yaw().to_bits());
        assert_eq!(a.dimensions().0.to_bits(), b.dimensions().0.to_bits());
    }
}

// ---------------------------------------------------------------------------
// Determinism.
// ---------------------------------------------------------------------------

#[test]
fn repeated_field_computation_is_bit_identical() {
    let mut rng = don_synth::seeded_rng(47);
    let ground = don_synth::noisy_ground(4.0, 4.0, 0.06, 0.01, &[], &mut rng);
    let pole = don_synth::column(Point3::new(0.8, 0.3, 0.0), 0.08, 1.5, 0.05);
    let cloud = don_synth::merge(&[&ground, &pole]);
    let params = DoNParams::new(0.15, 0.8).unwrap();

    let a = compute_don_field(&cloud, params, DecimationSpec::with_factor(2).unwrap());
    let b = compute_don_field(&cloud, params, DecimationSpec::with_factor(2).unwrap());
    assert_eq!(a.len(), b.len());
    for i in 0..a.len() {
        match (a.vector(i), b.vector(i)) {
            (Some(va), Some(vb)) => {
                assert_eq!(va.x.to_bits(), vb.x.to_bits());
                assert_eq!(va.y.to_bits(), vb.y.to_bits());
                assert_eq!(va.z.to_bits(), vb.z.to_bits());
            }
            (None, None) => {}
            _ => panic!("validity mismatch at {i}"),
        }
    }
}
