//! Cloud readers and writers: XYZ text, ASCII PCD, and PLY.
//!
//! All writers emit floats with `f64`'s `Display`, which produces the
//! shortest decimal string that parses back to the identical bit pattern —
//! so a save/load round trip reproduces coordinates exactly, and repeated
//! saves of the same cloud are byte-identical.
//!
//! Named per-point scalar attributes survive PCD and PLY round trips. The
//! XYZ writer appends them as extra columns (in attribute-name order), but
//! the XYZ reader has no names to recover them by, so it keeps only the
//! coordinates.

mod pcd;
mod ply;
mod xyz;

use std::path::Path;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// On-disk cloud encodings.
///
/// For loading, `PlyAscii` and `PlyBinary` are interchangeable: the reader
/// always believes the file's own header. For saving they select the
/// encoding written.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloudFormat {
    /// Whitespace-separated `x y z [extra...]` per line, `#` comments.
    Xyz,
    /// ASCII PCD with `x`, `y`, `z` and optional extra scalar fields.
    Pcd,
    /// PLY, `format ascii 1.0`.
    PlyAscii,
    /// PLY, `format binary_little_endian 1.0`.
    PlyBinary,
}

impl CloudFormat {
    /// Guesses the format from a file extension (case-insensitive):
    /// `xyz`/`txt`, `pcd`, `ply` (PLY defaults to the ASCII encoding for
    /// writing). `None` for anything else.
    pub fn from_extension(path: &Path) -> Option<CloudFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "xyz" | "txt" => Some(CloudFormat::Xyz),
            "pcd" => Some(CloudFormat::Pcd),
            "ply" => Some(CloudFormat::PlyAscii),
            _ => None,
        }
    }

    /// Parses a user-supplied format name: `xyz`, `pcd`, `ply`,
    /// `ply-ascii`, or `ply-binary`.
    pub fn parse_name(name: &str) -> Option<CloudFormat> {
        match name.to_ascii_lowercase().as_str() {
            "xyz" => Some(CloudFormat::Xyz),
            "pcd" => Some(CloudFormat::Pcd),
            "ply" | "ply-ascii" => Some(CloudFormat::PlyAscii),
            "ply-binary" => Some(CloudFormat::PlyBinary),
            _ => None,
        }
    }
}

/// Loads a cloud from `path` in the given format.
///
/// Malformed content fails with [`Error::Parse`] carrying the 1-based line
/// number; non-finite coordinates are malformed content, not data.
pub fn load_cloud(path: impl AsRef<Path>, format: CloudFormat) -> Result<PointCloud> {
    let path = path.as_ref();
    match format {
        CloudFormat::Xyz => xyz::load(path),
        CloudFormat::Pcd => pcd::load(path),
        CloudFormat::PlyAscii | CloudFormat::PlyBinary => ply::load(path),
    }
}

/// Loads a cloud, inferring the format from the file extension.
pub fn load_cloud_auto(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let format = CloudFormat::from_extension(path).ok_or_else(|| {
        Error::parse(
            path,
            0,
            "cannot infer cloud format from the file extension; expected .xyz, .txt, .pcd, or .ply",
        )
    })?;
    load_cloud(path, format)
}

/// Writes a cloud (points plus all its attributes) to `path`.
pub fn save_cloud(cloud: &PointCloud, path: impl AsRef<Path>, format: CloudFormat) -> Result<()> {
    let path = path.as_ref();
    match format {
        CloudFormat::Xyz => xyz::save(cloud, path),
        CloudFormat::Pcd => pcd::save(cloud, path),
        CloudFormat::PlyAscii => ply::save(cloud, path, false),
        CloudFormat::PlyBinary => ply::save(cloud, path, true),
    }
}
