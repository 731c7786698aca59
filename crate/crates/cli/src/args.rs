//! Command-line surface: clap types and the small parsers for values that
//! clap cannot express directly (the scale grid).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "don",
    version,
    about = "Multi-scale point-cloud segmentation driven by normal differences",
    propagate_version = true
)]
pub struct Cli {
    /// Worker threads for the parallel stages; 0 means all cores. Never
    /// affects numeric output, only wall time.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// TOML file with pipeline settings; explicit flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the per-point field and write the annotated cloud.
    Don(DonArgs),
    /// Threshold the field and extract clusters.
    Segment(SegmentArgs),
    /// Sweep a scale grid over labeled sample clouds and recommend params.
    Paramsearch(ParamsearchArgs),
    /// Score segmentation against ground-truth boxes over a frame set.
    Evaluate(EvaluateArgs),
    /// Time exact vs decimated computation and report normal deviations.
    Bench(BenchArgs),
}

/// Settings shared by every pipeline command; all optional here so a config
/// file can supply them, with flags taking precedence.
#[derive(Args, Clone, Debug, Default)]
pub struct PipelineArgs {
    /// Small support radius, meters.
    #[arg(long, value_name = "M")]
    pub r1: Option<f64>,

    /// Large support radius, meters; must exceed --r1.
    #[arg(long, value_name = "M")]
    pub r2: Option<f64>,

    /// Magnitude threshold in [0, 1] for keeping points.
    #[arg(long, value_name = "T")]
    pub threshold: Option<f64>,

    /// Decimation factor for large-radius estimation; 0 = exact.
    #[arg(long, value_name = "D")]
    pub decimation: Option<u32>,

    /// Clustering distance tolerance, meters; defaults to --r1.
    #[arg(long, value_name = "M")]
    pub tolerance: Option<f64>,

    /// Smallest cluster size kept.
    #[arg(long, value_name = "N")]
    pub min_cluster: Option<usize>,

    /// Largest cluster size kept.
    #[arg(long, value_name = "N")]
    pub max_cluster: Option<usize>,

    /// Cloud format (xyz | pcd | ply | ply-ascii | ply-binary); overrides
    /// file-extension detection for both input and output.
    #[arg(long, value_name = "FMT")]
    pub format: Option<String>,

    /// Output path.
    #[arg(long, short = 'o', value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DonArgs {
    /// Input cloud; may also come from the config file.
    pub input: Option<PathBuf>,

    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Args, Debug)]
pub struct SegmentArgs {
    /// Input cloud; may also come from the config file.
    pub input: Option<PathBuf>,

    #[command(flatten)]
    pub pipeline: PipelineArgs,

    /// Where to write the per-cluster summary CSV (default: stdout).
    #[arg(long, value_name = "FILE")]
    pub clusters_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ParamsearchArgs {
    /// One directory of sample clouds per class; the directory name is the
    /// class name.
    #[arg(required = true, value_name = "CLASS_DIR")]
    pub classes: Vec<PathBuf>,

    /// Candidate scales as "R1[,R1...]xR2[,R2...]", e.g. "0.1,0.2x0.5,1,2".
    /// Pairs with r1 >= r2 are dropped.
    #[arg(long, value_name = "GRID")]
    pub grid: String,

    /// Class to tune for (default: the first class directory).
    #[arg(long, value_name = "CLASS")]
    pub objective: Option<String>,

    /// Scene cloud providing surrounding context during estimation.
    #[arg(long, value_name = "FILE")]
    pub context: Option<PathBuf>,

    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Directory of frame clouds; file stems are frame ids.
    pub frames: PathBuf,

    /// Ground-truth box file (one "frame_id class cx cy cz length width
    /// height yaw" row per box).
    pub ground_truth: PathBuf,

    /// Ground-truth boxes containing fewer points are not scored.
    #[arg(long, value_name = "N")]
    pub min_gt_points: Option<usize>,

    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Input cloud; may also come from the config file.
    pub input: Option<PathBuf>,

    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

/// Parses the grid syntax: comma-separated r1 candidates, an `x`, then
/// comma-separated r2 candidates.
pub fn parse_grid(spec: &str) -> Result<(Vec<f64>, Vec<f64>), String> {
    let (left, right) = spec
        .split_once('x')
        .ok_or_else(|| format!("grid `{spec}` lacks the `x` separating r1 and r2 candidates"))?;
    let parse_side = |side: &str, name: &str| -> Result<Vec<f64>, String> {
        let values: Vec<f64> = side
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<f64>()
                    .map_err(|_| format!("grid {name} candidate `{tok}` is not a number"))
            })
            .collect::<Result<_, _>>()?;
        if values.is_empty() {
            return Err(format!("grid has no {name} candidates"));
        }
        Ok(values)
    };
    Ok((parse_side(left, "r1")?, parse_side(right, "r2")?))
}
