//! Plain-text XYZ format: one point per line, whitespace-separated columns,
//! `#` starts a comment line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::cloud::{Point3, PointCloud};
use crate::error::{Error, Result};

pub(super) fn load(path: &Path) -> Result<PointCloud> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut points = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut coords = [0.0_f64; 3];
        for (k, slot) in coords.iter_mut().enumerate() {
            let token = tokens.next().ok_or_else(|| {
                Error::parse(
                    path,
                    lineno,
                    format!("expected at least 3 numeric columns, found {k}"),
                )
            })?;
            *slot = token
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("invalid number {token:?}")))?;
        }
        // Columns beyond the first three are ignored: this reader has no
        // field names to attach them to.
        let point = Point3::try_new(coords[0], coords[1], coords[2])
            .ok_or_else(|| Error::parse(path, lineno, "non-finite coordinate"))?;
        points.push(point);
    }
    Ok(PointCloud::from_points(points))
}

pub(super) fn save(cloud: &PointCloud, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let attrs: Vec<&[f64]> = cloud.attributes().map(|(_, v)| v).collect();
    for i in 0..cloud.len() {
        let p = cloud.point(i);
        write!(w, "{} {} {}", p.x, p.y, p.z).map_err(|e| Error::io(path, e))?;
        for values in &attrs {
            write!(w, " {}", values[i]).map_err(|e| Error::io(path, e))?;
        }
        writeln!(w).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
