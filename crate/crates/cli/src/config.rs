//! Settings resolution: optional config file, flag overrides, defaults, and
//! the error split that drives exit codes (2 for bad parameters, 1 for
//! runtime failures).

use std::path::{Path, PathBuf};

use don_core::clustering::ClusterParams;
use don_core::don::DoNParams;
use don_core::io::CloudFormat;
use don_core::normals::DecimationSpec;
use serde::Deserialize;

use crate::args::PipelineArgs;

/// Errors split by exit status: `Usage` means the invocation itself is wrong
/// (status 2), `Runtime` means the work failed (status 1).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl<E> From<E> for CliError
where
    E: Into<anyhow::Error>,
{
    fn from(e: E) -> Self {
        CliError::Runtime(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// The subset of settings a TOML config file may provide. Unknown keys are
/// rejected so typos do not silently fall back to defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub threshold: Option<f64>,
    pub decimation: Option<u32>,
    pub tolerance: Option<f64>,
    pub min_cluster: Option<usize>,
    pub max_cluster: Option<usize>,
    pub format: Option<String>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl FileConfig {
    /// Reads and parses the file. An unreadable file is a runtime failure;
    /// unparseable content is a usage error.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(anyhow::anyhow!("reading {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
    }
}

/// Flag and file settings merged (flags win), with defaults not yet applied
/// for values whose defaults depend on other values.
#[derive(Clone, Debug)]
pub struct Settings {
    r1: Option<f64>,
    r2: Option<f64>,
    threshold: Option<f64>,
    decimation: Option<u32>,
    tolerance: Option<f64>,
    min_cluster: Option<usize>,
    max_cluster: Option<usize>,
    format: Option<String>,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
}

pub const DEFAULT_THRESHOLD: f64 = 0.25;
pub const DEFAULT_MIN_CLUSTER: usize = 100;
pub const DEFAULT_MAX_CLUSTER: usize = 100_000;

impl Settings {
    pub fn merge(flags: &PipelineArgs, input_flag: Option<&Path>, file: &FileConfig) -> Self {
        Settings {
            r1: flags.r1.or(file.r1),
            r2: flags.r2.or(file.r2),
            threshold: flags.threshold.or(file.threshold),
            decimation: flags.decimation.or(file.decimation),
            tolerance: flags.tolerance.or(file.tolerance),
            min_cluster: flags.min_cluster.or(file.min_cluster),
            max_cluster: flags.max_cluster.or(file.max_cluster),
            format: flags.format.clone().or_else(|| file.format.clone()),
            input: input_flag
                .map(Path::to_path_buf)
                .or_else(|| file.input.clone()),
            output: flags.output.clone().or_else(|| file.output.clone()),
        }
    }

    /// Both support radii, validated. Missing or inconsistent radii are
    /// usage errors.
    pub fn don_params(&self) -> CliResult<DoNParams> {
        let r1 = self
            .r1
            .ok_or_else(|| usage("missing --r1 (or `r1` in the config file)"))?;
        let r2 = self
            .r2
            .ok_or_else(|| usage("missing --r2 (or `r2` in the config file)"))?;
        DoNParams::new(r1, r2).map_err(|e| usage(e.to_string()))
    }

    pub fn threshold(&self) -> CliResult<f64> {
        let t = self.threshold.unwrap_or(DEFAULT_THRESHOLD);
        if !(t.is_finite() && (0.0..=1.0).contains(&t)) {
            return Err(usage(format!("threshold must lie in [0, 1], got {t}")));
        }
        Ok(t)
    }

    pub fn decimation(&self) -> CliResult<DecimationSpec> {
        match self.decimation.unwrap_or(0) {
            0 => Ok(DecimationSpec::exact()),
            d => DecimationSpec::with_factor(d).map_err(|e| usage(e.to_string())),
        }
    }

    /// Raw decimation factor for commands that report it (0 = exact).
    pub fn decimation_factor(&self) -> u32 {
        self.decimation.unwrap_or(0)
    }

    /// Clustering settings; the distance tolerance defaults to the small
    /// support radius.
    pub fn cluster_params(&self) -> CliResult<ClusterParams> {
        let tolerance = match self.tolerance {
            Some(t) => t,
            None => self.don_params()?.r1(),
        };
        let min = self.min_cluster.unwrap_or(DEFAULT_MIN_CLUSTER);
        let max = self.max_cluster.unwrap_or(DEFAULT_MAX_CLUSTER);
        ClusterParams::new(tolerance, min, max).map_err(|e| usage(e.to_string()))
    }

    pub fn input(&self) -> CliResult<&Path> {
        self.input.as_deref().ok_or_else(|| {
            usage("missing input cloud (positional argument or `input` in the config file)")
        })
    }

    pub fn output(&self) -> CliResult<&Path> {
        self.output
            .as_deref()
            .ok_or_else(|| usage("missing --output (or `output` in the config file)"))
    }

    /// Output path for commands where omitting it means stdout.
    pub fn output_or_none(&self) -> Option<&Path> {
        self.output.as_deref()
    }

    /// Format for reading or writing `path`: the explicit override wins,
    /// otherwise the file extension decides.
    pub fn format_for(&self, path: &Path) -> CliResult<CloudFormat> {
        if let Some(name) = &self.format {
            return CloudFormat::parse_name(name)
                .ok_or_else(|| usage(format!("unknown cloud format `{name}`")));
        }
        CloudFormat::from_extension(path).ok_or_else(|| {
            usage(format!(
                "cannot infer a cloud format from `{}`; pass --format",
                path.display()
            ))
        })
    }
}
