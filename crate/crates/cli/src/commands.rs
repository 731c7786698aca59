//! The five subcommands. Each takes the resolved [`Settings`] plus whatever
//! extra arguments it alone understands, and reports human chatter on
//! stderr, machine-readable output on stdout or in files.

use std::collections::HashMap;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use don_core::don::{compute_don_field, filter_by_magnitude, DoNField};
use don_core::eval::{
    evaluate_sequence, parse_ground_truth, summarize_records, write_records, EvalConfig,
};
use don_core::io::{load_cloud, save_cloud, CloudFormat};
use don_core::normals::{
    angular_deviation_deg, deviation_summary, estimate_normal_map, DecimationSpec, NormalMap,
};
use don_core::param_select::{class_response_stats, select_params, ClassSample, ParamGrid};
use don_core::{euclidean_clusters, stats, PointCloud};

use crate::args::{parse_grid, EvaluateArgs, ParamsearchArgs};
use crate::config::{usage, CliResult, Settings};

/// Opens `path` for buffered writing, or wraps stdout when `path` is `None`.
fn writer_to(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        Some(p) => {
            let file = std::fs::File::create(p)
                .map_err(|e| anyhow::anyhow!("creating {}: {e}", p.display()))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(std::io::stdout()))),
    }
}

/// Adds the field to the cloud as don_x/don_y/don_z/don_mag columns.
/// Points with no valid response carry a zero vector and magnitude -1,
/// keeping every column aligned with the points.
fn annotate_field(cloud: &mut PointCloud, field: &DoNField) {
    let n = cloud.len();
    let mut xs = vec![0.0; n];
    let mut ys = vec![0.0; n];
    let mut zs = vec![0.0; n];
    let mut mags = vec![-1.0; n];
    for i in 0..n {
        if let Some(v) = field.vector(i) {
            xs[i] = v.x;
            ys[i] = v.y;
            zs[i] = v.z;
            mags[i] = v.norm();
        }
    }
    cloud
        .set_attribute("don_x", xs)
        .expect("aligned by construction");
    cloud
        .set_attribute("don_y", ys)
        .expect("aligned by construction");
    cloud
        .set_attribute("don_z", zs)
        .expect("aligned by construction");
    cloud
        .set_attribute("don_mag", mags)
        .expect("aligned by construction");
}

pub fn cmd_don(settings: &Settings) -> CliResult<()> {
    let input = settings.input()?;
    let output = settings.output()?.to_path_buf();
    let in_format = settings.format_for(input)?;
    let out_format = settings.format_for(&output)?;
    let params = settings.don_params()?;
    let decimation = settings.decimation()?;

    let mut cloud = load_cloud(input, in_format)?;
    let field = compute_don_field(&cloud, params, decimation);
    let valid = field.valid_count();
    annotate_field(&mut cloud, &field);
    save_cloud(&cloud, &output, out_format)?;
    eprintln!(
        "wrote {} ({} points, {} with a valid response)",
        output.display(),
        cloud.len(),
        valid
    );
    Ok(())
}

pub fn cmd_segment(settings: &Settings, clusters_csv: Option<&Path>) -> CliResult<()> {
    let input = settings.input()?;
    let output = settings.output()?.to_path_buf();
    let in_format = settings.format_for(input)?;
    let out_format = settings.format_for(&output)?;
    let params = settings.don_params()?;
    let decimation = settings.decimation()?;
    let threshold = settings.threshold()?;
    let cluster_params = settings.cluster_params()?;

    let mut cloud = load_cloud(input, in_format)?;
    let field = compute_don_field(&cloud, params, decimation);
    let kept = filter_by_magnitude(&field, threshold)
        .expect("threshold validated during settings resolution");
    let clusters = euclidean_clusters(&cloud, &kept, cluster_params)?;

    let mut ids = vec![-1.0; cloud.len()];
    for (id, cluster) in clusters.iter().enumerate() {
        for &i in cluster.indices() {
            ids[i] = id as f64;
        }
    }
    cloud
        .set_attribute("cluster_id", ids)
        .expect("aligned by construction");
    save_cloud(&cloud, &output, out_format)?;

    let mut w = writer_to(clusters_csv)?;
    writeln!(w, "cluster_id,size,cx,cy,cz")?;
    for (id, cluster) in clusters.iter().enumerate() {
        let n = cluster.len() as f64;
        let (mut cx, mut cy, mut cz) = (0.0, 0.0, 0.0);
        for &i in cluster.indices() {
            let p = cloud.point(i);
            cx += p.x;
            cy += p.y;
            cz += p.z;
        }
        writeln!(
            w,
            "{},{},{},{},{}",
            id,
            cluster.len(),
            cx / n,
            cy / n,
            cz / n
        )?;
    }
    w.flush()?;
    eprintln!(
        "wrote {}; {} of {} points kept, {} clusters",
        output.display(),
        kept.len(),
        cloud.len(),
        clusters.len()
    );
    Ok(())
}

/// Loads every cloud file in `dir` (recognized extensions only), sorted by
/// file name so runs are reproducible.
fn load_class_dir(dir: &Path, settings: &Settings) -> CliResult<Vec<PointCloud>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| anyhow::anyhow!("reading directory {}: {e}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && CloudFormat::from_extension(p).is_some())
        .collect();
    paths.sort();
    let mut clouds = Vec::with_capacity(paths.len());
    for p in &paths {
        clouds.push(load_cloud(p, settings.format_for(p)?)?);
    }
    Ok(clouds)
}

pub fn cmd_paramsearch(args: &ParamsearchArgs, settings: &Settings) -> CliResult<()> {
    let (r1s, r2s) = parse_grid(&args.grid).map_err(usage)?;
    let grid = ParamGrid::cross(&r1s, &r2s).map_err(|e| usage(e.to_string()))?;

    let mut samples = Vec::new();
    for dir in &args.classes {
        let name = dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| usage(format!("class path `{}` has no usable name", dir.display())))?
            .to_string();
        samples.push(ClassSample::new(name, load_class_dir(dir, settings)?));
    }
    let objective = match &args.objective {
        Some(name) => {
            if !samples.iter().any(|s| s.class_name() == name) {
                return Err(usage(format!(
                    "--objective `{name}` matches no class directory"
                )));
            }
            name.clone()
        }
        None => samples[0].class_name().to_string(),
    };

    let context = match &args.context {
        Some(p) => Some(load_cloud(p, settings.format_for(p)?)?),
        None => None,
    };
    let stats = class_response_stats(&samples, &grid, context.as_ref(), settings.decimation()?)?;

    let mut w = writer_to(settings.output_or_none())?;
    stats.to_csv(&mut w)?;
    w.flush()?;

    let choice = select_params(&stats, &objective)?;
    println!(
        "recommendation r1={} r2={} threshold={} margin={}",
        choice.params.r1(),
        choice.params.r2(),
        choice.threshold,
        choice.margin
    );
    Ok(())
}

/// Maps file stems to paths for every recognized cloud file in `dir`.
/// When two files share a stem the alphabetically first file name wins.
fn frame_files(dir: &Path) -> CliResult<HashMap<String, PathBuf>> {
    let mut names: Vec<(String, PathBuf)> = std::fs::read_dir(dir)
        .map_err(|e| anyhow::anyhow!("reading directory {}: {e}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && CloudFormat::from_extension(p).is_some())
        .filter_map(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| (n.to_string(), p.clone()))
        })
        .collect();
    names.sort();
    let mut by_stem = HashMap::new();
    for (_, path) in names {
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            by_stem.entry(stem.to_string()).or_insert(path);
        }
    }
    Ok(by_stem)
}

pub fn cmd_evaluate(args: &EvaluateArgs, settings: &Settings) -> CliResult<()> {
    let params = settings.don_params()?;
    let threshold = settings.threshold()?;
    let cluster_params = settings.cluster_params()?;
    let mut config = EvalConfig::new(params, threshold, cluster_params)
        .expect("threshold validated during settings resolution")
        .with_decimation(settings.decimation()?);
    if let Some(n) = args.min_gt_points {
        config = config
            .with_min_gt_points(n)
            .map_err(|e| usage(e.to_string()))?;
    }

    let boxes = parse_ground_truth(&args.ground_truth)?;
    let files = frame_files(&args.frames)?;

    // Group boxes by frame in order of first appearance in the file.
    let mut order: Vec<String> = Vec::new();
    let mut grouped: HashMap<String, Vec<don_core::eval::GroundTruthBox>> = HashMap::new();
    for b in boxes {
        let id = b.frame_id().to_string();
        if !grouped.contains_key(&id) {
            order.push(id.clone());
        }
        grouped.entry(id).or_default().push(b);
    }

    let mut frames = Vec::new();
    for id in &order {
        let frame_boxes = grouped.remove(id).expect("grouped above");
        match files.get(id) {
            Some(path) => {
                let cloud = load_cloud(path, settings.format_for(path)?)?;
                frames.push((cloud, frame_boxes));
            }
            None => eprintln!(
                "warning: no cloud file for frame `{}` under {}; skipping {} box(es)",
                id,
                args.frames.display(),
                frame_boxes.len()
            ),
        }
    }

    let records = evaluate_sequence(&frames, &config);
    let mut w = writer_to(settings.output_or_none())?;
    write_records(&records, &mut w)?;
    w.flush()?;

    let summary = summarize_records(&records);
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6}"));
    println!(
        "summary records={} matched={} mean_precision={} mean_recall={}",
        summary.records,
        summary.matched,
        fmt(summary.mean_precision),
        fmt(summary.mean_recall)
    );
    Ok(())
}

pub fn cmd_bench(settings: &Settings) -> CliResult<()> {
    let input = settings.input()?;
    let in_format = settings.format_for(input)?;
    let params = settings.don_params()?;
    let factor = settings.decimation_factor();

    let cloud = load_cloud(input, in_format)?;

    let start = Instant::now();
    let field = compute_don_field(&cloud, params, DecimationSpec::exact());
    let exact_ms = start.elapsed().as_secs_f64() * 1e3;
    drop(field);
    println!(
        "timing exact r1={} r2={} points={} total_ms={exact_ms:.3}",
        params.r1(),
        params.r2(),
        cloud.len()
    );
    if factor == 0 {
        return Ok(());
    }

    let decimation = settings.decimation()?;
    let start = Instant::now();
    let field = compute_don_field(&cloud, params, decimation);
    let decimated_ms = start.elapsed().as_secs_f64() * 1e3;
    drop(field);
    println!(
        "timing decimated d={factor} total_ms={decimated_ms:.3} speedup={:.2}",
        exact_ms / decimated_ms
    );

    // Accuracy of the shortcut: per-radius and pooled angular deviation of
    // the decimated normal maps against the exact ones.
    let mut pooled: Vec<f64> = Vec::new();
    for radius in [params.r1(), params.r2()] {
        let exact = estimate_normal_map(&cloud, radius, DecimationSpec::exact())
            .expect("radius validated with the scale pair");
        let dec = estimate_normal_map(&cloud, radius, decimation)
            .expect("radius validated with the scale pair");
        pooled.extend(
            (0..exact.len()).filter_map(|i| angular_deviation_deg(exact.get(i), dec.get(i))),
        );
        report_deviation(&format!("radius={radius}"), &exact, &dec);
    }
    pooled.sort_by(f64::total_cmp);
    if let (Some(median), Some(p95)) = (
        stats::median_sorted(&pooled),
        stats::percentile_sorted(&pooled, 95.0),
    ) {
        println!(
            "deviation pooled count={} median_deg={median:.4} p95_deg={p95:.4} max_deg={:.4}",
            pooled.len(),
            pooled.last().copied().unwrap_or(0.0)
        );
    }
    Ok(())
}

fn report_deviation(label: &str, exact: &NormalMap, dec: &NormalMap) {
    if let Some(s) = deviation_summary(exact, dec) {
        println!(
            "deviation {label} count={} median_deg={:.4} p95_deg={:.4} max_deg={:.4}",
            s.count, s.median_deg, s.p95_deg, s.max_deg
        );
    } else {
        println!("deviation {label} count=0");
    }
}
