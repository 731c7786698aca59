//! ASCII PCD, restricted to scalar float fields including `x`, `y`, `z`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::cloud::{Point3, PointCloud};
use crate::error::{Error, Result};

pub(super) fn load(path: &Path) -> Result<PointCloud> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let mut fields: Vec<String> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut types: Vec<String> = Vec::new();
    let mut width: Option<usize> = None;
    let mut height: Option<usize> = None;
    let mut points_declared: Option<usize> = None;
    let mut data_line = 0;

    // Header: KEY value... lines up to and including DATA.
    for (i, line) in lines.by_ref() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let key = tokens.next().expect("nonempty line has a first token");
        let rest: Vec<&str> = tokens.collect();
        match key {
            "FIELDS" => fields = rest.iter().map(|s| s.to_string()).collect(),
            "TYPE" => types = rest.iter().map(|s| s.to_string()).collect(),
            "COUNT" => {
                counts = rest
                    .iter()
                    .map(|s| s.parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::parse(path, lineno, "invalid COUNT"))?;
            }
            "WIDTH" => {
                width = Some(parse_usize(rest.first(), path, lineno, "WIDTH")?);
            }
            "HEIGHT" => {
                height = Some(parse_usize(rest.first(), path, lineno, "HEIGHT")?);
            }
            "POINTS" => {
                points_declared = Some(parse_usize(rest.first(), path, lineno, "POINTS")?);
            }
            "DATA" => {
                match rest.first() {
                    Some(&"ascii") => {}
                    other => {
                        return Err(Error::parse(
                            path,
                            lineno,
                            format!("unsupported DATA mode {other:?}; only ascii is supported"),
                        ))
                    }
                }
                data_line = lineno;
                break;
            }
            // VERSION, SIZE, VIEWPOINT, and anything else: accepted, unused.
            _ => {}
        }
    }
    if data_line == 0 {
        return Err(Error::parse(path, 0, "missing DATA line"));
    }
    if fields.is_empty() {
        return Err(Error::parse(path, 0, "missing FIELDS line"));
    }
    for (k, field) in fields.iter().enumerate() {
        if let Some(t) = types.get(k) {
            if t != "F" {
                return Err(Error::parse(
                    path,
                    0,
                    format!("field {field:?} has TYPE {t}; only float (F) fields are supported"),
                ));
            }
        }
        if let Some(&c) = counts.get(k) {
            if c != 1 {
                return Err(Error::parse(
                    path,
                    0,
                    format!("field {field:?} has COUNT {c}; only scalar fields are supported"),
                ));
            }
        }
    }
    let expected = match (points_declared, width, height) {
        (Some(n), _, _) => n,
        (None, Some(w), Some(h)) => w * h,
        (None, Some(w), None) => w,
        _ => return Err(Error::parse(path, 0, "missing POINTS (or WIDTH) line")),
    };

    let ix = field_index(&fields, "x", path)?;
    let iy = field_index(&fields, "y", path)?;
    let iz = field_index(&fields, "z", path)?;
    let extra: Vec<(usize, &str)> = fields
        .iter()
        .enumerate()
        .filter(|(_, f)| *f != "x" && *f != "y" && *f != "z")
        .map(|(k, f)| (k, f.as_str()))
        .collect();

    let mut points = Vec::with_capacity(expected);
    let mut attrs: Vec<Vec<f64>> = extra.iter().map(|_| Vec::with_capacity(expected)).collect();
    let mut row = vec![0.0_f64; fields.len()];
    for (i, line) in lines {
        if points.len() == expected {
            break;
        }
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != fields.len() {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {} values, found {}", fields.len(), tokens.len()),
            ));
        }
        for (slot, token) in row.iter_mut().zip(&tokens) {
            *slot = token
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("invalid number {token:?}")))?;
        }
        let p = Point3::try_new(row[ix], row[iy], row[iz])
            .ok_or_else(|| Error::parse(path, lineno, "non-finite coordinate"))?;
        points.push(p);
        for (values, (k, _)) in attrs.iter_mut().zip(&extra) {
            values.push(row[*k]);
        }
    }
    if points.len() != expected {
        return Err(Error::parse(
            path,
            0,
            format!("expected {} data rows, found {}", expected, points.len()),
        ));
    }

    let mut cloud = PointCloud::from_points(points);
    for (values, (_, name)) in attrs.into_iter().zip(&extra) {
        cloud.set_attribute(*name, values)?;
    }
    Ok(cloud)
}

fn parse_usize(token: Option<&&str>, path: &Path, lineno: usize, key: &str) -> Result<usize> {
    token
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(path, lineno, format!("invalid {key}")))
}

fn field_index(fields: &[String], name: &str, path: &Path) -> Result<usize> {
    fields
        .iter()
        .position(|f| f == name)
        .ok_or_else(|| Error::parse(path, 0, format!("missing required field {name:?}")))
}

pub(super) fn save(cloud: &PointCloud, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let names: Vec<&str> = cloud.attribute_names().collect();
    let attrs: Vec<&[f64]> = cloud.attributes().map(|(_, v)| v).collect();
    let n_fields = 3 + names.len();

    let mut header = String::new();
    header.push_str("# .PCD v0.7 - Point Cloud Data file format\nVERSION 0.7\nFIELDS x y z");
    for name in &names {
        header.push(' ');
        header.push_str(name);
    }
    header.push_str("\nSIZE");
    for _ in 0..n_fields {
        header.push_str(" 8");
    }
    header.push_str("\nTYPE");
    for _ in 0..n_fields {
        header.push_str(" F");
    }
    header.push_str("\nCOUNT");
    for _ in 0..n_fields {
        header.push_str(" 1");
    }
    header.push_str(&format!(
        "\nWIDTH {}\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS {}\nDATA ascii\n",
        cloud.len(),
        cloud.len()
    ));
    w.write_all(header.as_bytes())
        .map_err(|e| Error::io(path, e))?;

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
