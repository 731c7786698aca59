//! Data-driven choice of the two support radii and the magnitude threshold.
//!
//! Given labeled sample clouds per object class, this module computes the
//! distribution of difference magnitudes for every class under every
//! candidate scale pair. A good pair makes the class of interest respond
//! strongly while everything else stays quiet; the recommended threshold
//! then sits midway between the two medians.

use std::io::Write;

use crate::cloud::PointCloud;
use crate::don::{compute_don_field, DoNParams};
use crate::error::{Error, Result};
use crate::normals::DecimationSpec;
use crate::spatial::SpatialIndex;
use crate::stats;

/// When samples are evaluated inside a context scene, an object point is
/// identified with a scene point only if they coincide to within this
/// distance — sample clouds are expected to be cut-outs of the scene, not
/// resampled geometry.
const CONTEXT_MATCH_RADIUS: f64 = 1e-6;

/// Ready-made scale pairs for two common object families, expressed in
/// meters. They assume outdoor clouds with roughly centimeter-level point
/// spacing; treat them as starting points, not truths.
pub mod presets {
    use super::DoNParams;

    /// Pedestrian-scale structure: small radius 0.1 m, large radius 0.4 m.
    pub fn pedestrian() -> DoNParams {
        DoNParams::new(0.1, 0.4).expect("static radii are valid")
    }

    /// Car-scale structure: small radius 0.4 m, large radius 2.0 m.
    pub fn car() -> DoNParams {
        DoNParams::new(0.4, 2.0).expect("static radii are valid")
    }
}

/// Labeled example clouds of one object class.
#[derive(Clone, Debug)]
pub struct ClassSample {
    class_name: String,
    clouds: Vec<PointCloud>,
}

impl ClassSample {
    pub fn new(class_name: impl Into<String>, clouds: Vec<PointCloud>) -> Self {
        ClassSample {
            class_name: class_name.into(),
            clouds,
        }
    }

    pub fn class_name(&self) -> &str {
        &self.class_name
    }

    pub fn clouds(&self) -> &[PointCloud] {
        &self.clouds
    }
}

/// The candidate scale pairs to evaluate.
#[derive(Clone, Debug)]
pub struct ParamGrid {
    pairs: Vec<DoNParams>,
}

impl ParamGrid {
    /// Wraps an explicit list of pairs; fails on an empty list.
    pub fn new(pairs: Vec<DoNParams>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyInput("parameter grid has no scale pairs"));
        }
        Ok(ParamGrid { pairs })
    }

    /// Cross product of candidate small and large radii, keeping only the
    /// combinations with `r1 < r2`. Every radius must be positive and
    /// finite; fails if no valid combination remains.
    pub fn cross(r1_candidates: &[f64], r2_candidates: &[f64]) -> Result<Self> {
        for &r in r1_candidates.iter().chain(r2_candidates) {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidRadius(r));
            }
        }
        let mut pairs = Vec::new();
        for &r1 in r1_candidates {
            for &r2 in r2_candidates {
                if r1 < r2 {
                    pairs.push(DoNParams::new(r1, r2).expect("checked above"));
                }
            }
        }
        if pairs.is_empty() {
            return Err(Error::EmptyInput("no radius combination satisfies r1 < r2"));
        }
        Ok(ParamGrid { pairs })
    }

    pub fn pairs(&self) -> &[DoNParams] {
        &self.pairs
    }
}

/// Distribution summary of difference magnitudes for one (class, pair) cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResponseStats {
    pub mean: f64,
    pub median: f64,
    /// Population variance (division by the count, not count minus one).
    pub variance: f64,
    /// Number of magnitudes that entered the statistics.
    pub valid_count: usize,
}

/// The full class-by-pair table of response statistics.
#[derive(Clone, Debug)]
pub struct ClassStats {
    classes: Vec<String>,
    pairs: Vec<DoNParams>,
    /// Class-major: cell `(ci, pi)` lives at `ci * pairs.len() + pi`.
    /// `None` when no valid magnitudes existed for that combination.
    cells: Vec<Option<ResponseStats>>,
}

impl ClassStats {
    /// Assembles a table from parts — mainly useful to tools that load a
    /// previously exported table. `cells` is class-major.
    pub fn from_parts(
        classes: Vec<String>,
        pairs: Vec<DoNParams>,
        cells: Vec<Option<ResponseStats>>,
    ) -> Result<Self> {
        if cells.len() != classes.len() * pairs.len() {
            return Err(Error::InvalidParams(format!(
                "expected {} cells for {} classes x {} pairs, got {}",
                classes.len() * pairs.len(),
                classes.len(),
                pairs.len(),
                cells.len()
            )));
        }
        Ok(ClassStats {
            classes,
            pairs,
            cells,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn pairs(&self) -> &[DoNParams] {
        &self.pairs
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    /// The cell for class index `ci` and pair index `pi`.
    pub fn cell(&self, ci: usize, pi: usize) -> Option<&ResponseStats> {
        self.cells[ci * self.pairs.len() + pi].as_ref()
    }

    /// Writes the table as CSV: `class,r1,r2,mean,median,variance,valid_count`,
    /// one row per (class, pair) in class-major order. Cells with no valid
    /// magnitudes leave the three statistics empty and report count 0.
    pub fn to_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "class,r1,r2,mean,median,variance,valid_count")?;
        for (ci, class) in self.classes.iter().enumerate() {
            for (pi, pair) in self.pairs.iter().enumerate() {
                match self.cell(ci, pi) {
                    Some(s) => writeln!(
                        w,
                        "{},{},{},{},{},{},{}",
                        class,
                        pair.r1(),
                        pair.r2(),
                        s.mean,
                        s.median,
                        s.variance,
                        s.valid_count
                    )?,
                    None => writeln!(w, "{},{},{},,,,0", class, pair.r1(), pair.r2())?,
                }
            }
        }
        Ok(())
    }
}

fn summarize(mut mags: Vec<f64>) -> Option<ResponseStats> {
    if mags.is_empty() {
        return None;
    }
    mags.sort_unstable_by(f64::total_cmp);
    Some(ResponseStats {
        mean: stats::mean(&mags).expect("nonempty"),
        median: stats::median_sorted(&mags).expect("nonempty"),
        variance: stats::population_variance(&mags).expect("nonempty"),
        valid_count: mags.len(),
    })
}

/// Computes response statistics for every class under every scale pair.
///
/// Without a context scene, each sample cloud is processed on its own: its
/// difference field is computed in isolation and the valid magnitudes of all
/// clouds of a class are pooled per pair.
///
/// With a context scene, the samples are interpreted as cut-outs of that
/// scene. The field is computed once per pair *on the scene*, so every
/// object keeps its real surroundings (the large-radius neighborhoods see
/// ground and nearby structure, exactly as they would in production). Each
/// class then pools the magnitudes at the scene points its sample points
/// coincide with; sample points with no scene twin are skipped.
///
/// Fails with [`Error::EmptyClass`] for a class with no points at all, and
/// with [`Error::InvalidParams`] for duplicate class names.
pub fn class_response_stats(
    samples: &[ClassSample],
    grid: &ParamGrid,
    context: Option<&PointCloud>,
    decimation: DecimationSpec,
) -> Result<ClassStats> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no class samples"));
    }
    for (i, s) in samples.iter().enumerate() {
        if samples[..i].iter().any(|t| t.class_name == s.class_name) {
            return Err(Error::InvalidParams(format!(
                "duplicate class name {:?}",
                s.class_name
            )));
        }
        if s.clouds.iter().all(|c| c.is_empty()) {
            return Err(Error::EmptyClass(s.class_name.clone()));
        }
    }

    let n_pairs = grid.pairs.len();
    let mut pooled: Vec<Vec<f64>> = vec![Vec::new(); samples.len() * n_pairs];

    match context {
        None => {
            for (ci, sample) in samples.iter().enumerate() {
                for cloud in &sample.clouds {
                    if cloud.is_empty() {
                        continue;
                    }
                    for (pi, &pair) in grid.pairs.iter().enumerate() {
                        let field = compute_don_field(cloud, pair, decimation);
                        let sink = &mut pooled[ci * n_pairs + pi];
                        sink.extend((0..field.len()).filter_map(|i| field.magnitude(i)));
                    }
                }
            }
        }
        Some(scene) => {
            // Identify each sample point with its coincident scene point
            // once; the matching is scale-independent.
            let scene_index = SpatialIndex::build(scene);
            let mut matched: Vec<Vec<usize>> = Vec::with_capacity(samples.len());
            for sample in samples {
                let mut ids = Vec::new();
                for cloud in &sample.clouds {
                    let mut cloud_ids: Vec<usize> = Vec::new();
                    for p in cloud.points() {
                        let candidates = scene_index
                            .radius_search(*p, CONTEXT_MATCH_RADIUS)
                            .expect("constant radius is valid");
                        // Nearest candidate; ties at equal distance resolve
                        // to the lowest index because the list is ascending.
                        let best = candidates.into_iter().min_by(|&a, &b| {
                            scene
                                .point(a)
                                .distance_squared(*p)
                                .total_cmp(&scene.point(b).distance_squared(*p))
                        });
                        if let Some(b) = best {
                            cloud_ids.push(b);
                        }
                    }
                    cloud_ids.sort_unstable();
                    cloud_ids.dedup();
                    ids.extend(cloud_ids);
                }
                matched.push(ids);
            }

            for (pi, &pair) in grid.pairs.iter().enumerate() {
                let field = compute_don_field(scene, pair, decimation);
                for (ci, ids) in matched.iter().enumerate() {
                    let sink = &mut pooled[ci * n_pairs + pi];
                    sink.extend(ids.iter().filter_map(|&i| field.magnitude(i)));
                }
            }
        }
    }

    let cells = pooled.into_iter().map(summarize).collect();
    ClassStats::from_parts(
        samples.iter().map(|s| s.class_name.clone()).collect(),
        grid.pairs.clone(),
        cells,
    )
}

/// A recommended operating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamChoice {
    pub params: DoNParams,
    /// Magnitude threshold placed midway between the objective's median
    /// response and the strongest competing median, clamped to `[0, 1]`.
    pub threshold: f64,
    /// Separation `objective median - strongest other median`; larger is
    /// better, negative means the objective is not the strongest responder.
    pub margin: f64,
}

/// Picks the scale pair that best separates `objective_class` from all other
/// classes: the pair maximizing the margin between the objective's median
/// magnitude and the largest median among the other classes (classes with no
/// valid response count as zero, so a lone class competes against silence).
///
/// Ties fall to the larger objective median, then the smaller `r2`, then the
/// smaller `r1`. Pairs where the objective class itself has no valid
/// magnitudes are skipped.
pub fn select_params(stats: &ClassStats, objective_class: &str) -> Result<ParamChoice> {
    let oi = stats
        .class_index(objective_class)
        .ok_or_else(|| Error::UnknownClass(objective_class.to_string()))?;

    // Best-so-far plus its comparison key: margin and objective median
    // descending, then r2 and r1 ascending. Negating the radii turns the
    // whole key into a single descending lexicographic comparison.
    let mut best: Option<(ParamChoice, [f64; 4])> = None;
    for (pi, &pair) in stats.pairs().iter().enumerate() {
        let Some(obj) = stats.cell(oi, pi) else {
            continue;
        };
        let other_max = (0..stats.classes().len())
            .filter(|&ci| ci != oi)
            .filter_map(|ci| stats.cell(ci, pi).map(|s| s.median))
            .fold(0.0_f64, f64::max);
        let margin = obj.median - other_max;
        let key = [margin, obj.median, -pair.r2(), -pair.r1()];
        let better = match &best {
            None => true,
            // Lexicographic: the first unequal component decides; a fully
            // equal key keeps the earlier pair.
            Some((_, cur_key)) => key
                .iter()
                .zip(cur_key)
                .find_map(|(a, b)| match a.total_cmp(b) {
                    std::cmp::Ordering::Equal => None,
                    ord => Some(ord == std::cmp::Ordering::Greater),
                })
                .unwrap_or(false),
        };
        if better {
            let choice = ParamChoice {
                params: pair,
                threshold: ((obj.median + other_max) / 2.0).clamp(0.0, 1.0),
                margin,
            };
            best = Some((choice, key));
        }
    }
    best.map(|(choice, _)| choice).ok_or(Error::EmptyInput(
        "objective class has no valid responses in any grid cell",
    ))
}
