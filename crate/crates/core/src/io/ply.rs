//! PLY clouds, ASCII or binary little-endian, restricted to a leading
//! `vertex` element with scalar numeric properties.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::cloud::{Point3, PointCloud};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PropType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl PropType {
    fn parse(token: &str) -> Option<PropType> {
        match token {
            "char" | "int8" => Some(PropType::I8),
            "uchar" | "uint8" => Some(PropType::U8),
            "short" | "int16" => Some(PropType::I16),
            "ushort" | "uint16" => Some(PropType::U16),
            "int" | "int32" => Some(PropType::I32),
            "uint" | "uint32" => Some(PropType::U32),
            "float" | "float32" => Some(PropType::F32),
            "double" | "float64" => Some(PropType::F64),
            _ => None,
        }
    }

    fn size(self) -> usize {
        match self {
            PropType::I8 | PropType::U8 => 1,
            PropType::I16 | PropType::U16 => 2,
            PropType::I32 | PropType::U32 | PropType::F32 => 4,
            PropType::F64 => 8,
        }
    }

    fn read_le(self, bytes: &[u8]) -> f64 {
        match self {
            PropType::I8 => bytes[0] as i8 as f64,
            PropType::U8 => bytes[0] as f64,
            PropType::I16 => i16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            PropType::U16 => u16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            PropType::I32 => i32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            PropType::U32 => u32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            PropType::F32 => f32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            PropType::F64 => f64::from_le_bytes(bytes[..8].try_into().unwrap()),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Encoding {
    Ascii,
    BinaryLe,
}

/// Pulls header lines off the raw file bytes one at a time, tracking the
/// byte position so the (possibly binary) body can be sliced afterwards.
/// PLY headers are ASCII text regardless of the body encoding.
struct HeaderLines<'a> {
    bytes: &'a [u8],
    path: &'a Path,
    pos: usize,
    lineno: usize,
}

impl<'a> HeaderLines<'a> {
    fn next_line(&mut self) -> Result<(usize, String)> {
        if self.pos >= self.bytes.len() {
            return Err(Error::parse(
                self.path,
                self.lineno,
                "unexpected end of header",
            ));
        }
        let nl = self.bytes[self.pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|k| self.pos + k)
            .unwrap_or(self.bytes.len());
        let raw = &self.bytes[self.pos..nl];
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        let line = std::str::from_utf8(raw)
            .map_err(|_| Error::parse(self.path, self.lineno + 1, "header is not valid ASCII"))?
            .to_string();
        self.pos = nl + 1;
        self.lineno += 1;
        Ok((self.lineno, line))
    }
}

pub(super) fn load(path: &Path) -> Result<PointCloud> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut header = HeaderLines {
        bytes: &bytes,
        path,
        pos: 0,
        lineno: 0,
    };

    let (magic_line, magic) = header.next_line()?;
    if magic.trim() != "ply" {
        return Err(Error::parse(path, magic_line, "missing ply magic line"));
    }

    let mut encoding: Option<Encoding> = None;
    let mut vertex_count: Option<usize> = None;
    let mut props: Vec<(String, PropType)> = Vec::new();
    // Which element declarations we are inside of: None before any element,
    // Some(true) inside vertex, Some(false) inside a later element.
    let mut in_vertex: Option<bool> = None;
    let header_end;
    loop {
        let (ln, line) = header.next_line()?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with("comment") || trimmed.starts_with("obj_info") {
            continue;
        }
        if trimmed == "end_header" {
            header_end = header.pos;
            break;
        }
        let mut tokens = trimmed.split_whitespace();
        match tokens.next() {
            Some("format") => {
                encoding = match tokens.next() {
                    Some("ascii") => Some(Encoding::Ascii),
                    Some("binary_little_endian") => Some(Encoding::BinaryLe),
                    other => {
                        return Err(Error::parse(
                            path,
                            ln,
                            format!("unsupported format {other:?}"),
                        ))
                    }
                };
            }
            Some("element") => {
                let name = tokens.next().unwrap_or("");
                if name == "vertex" {
                    if vertex_count.is_some() {
                        return Err(Error::parse(path, ln, "duplicate vertex element"));
                    }
                    let n = tokens
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| Error::parse(path, ln, "invalid vertex count"))?;
                    vertex_count = Some(n);
                    in_vertex = Some(true);
                } else {
                    if vertex_count.is_none() {
                        return Err(Error::parse(
                            path,
                            ln,
                            format!("element {name:?} precedes vertex; only vertex-first files are supported"),
                        ));
                    }
                    in_vertex = Some(false);
                }
            }
            Some("property") => match in_vertex {
                Some(true) => {
                    let ty_token = tokens.next().unwrap_or("");
                    if ty_token == "list" {
                        return Err(Error::parse(
                            path,
                            ln,
                            "list properties on vertex elements are not supported",
                        ));
                    }
                    let ty = PropType::parse(ty_token).ok_or_else(|| {
                        Error::parse(path, ln, format!("unknown property type {ty_token:?}"))
                    })?;
                    let name = tokens
                        .next()
                        .ok_or_else(|| Error::parse(path, ln, "property missing a name"))?;
                    props.push((name.to_string(), ty));
                }
                Some(false) => {} // properties of trailing elements: ignored
                None => return Err(Error::parse(path, ln, "property before any element")),
            },
            _ => {} // unknown header lines: ignored
        }
    }

    let encoding = encoding.ok_or_else(|| Error::parse(path, 0, "missing format line"))?;
    let count = vertex_count.ok_or_else(|| Error::parse(path, 0, "missing vertex element"))?;
    let prop_index = |name: &str| -> Result<usize> {
        props
            .iter()
            .position(|(n, t)| n == name && matches!(t, PropType::F32 | PropType::F64))
            .ok_or_else(|| Error::parse(path, 0, format!("missing float vertex property {name:?}")))
    };
    let ix = prop_index("x")?;
    let iy = prop_index("y")?;
    let iz = prop_index("z")?;
    let extra: Vec<(usize, &str)> = props
        .iter()
        .enumerate()
        .filter(|(_, (n, _))| n != "x" && n != "y" && n != "z")
        .map(|(k, (n, _))| (k, n.as_str()))
        .collect();

    let mut points = Vec::with_capacity(count);
    let mut attrs: Vec<Vec<f64>> = extra.iter().map(|_| Vec::with_capacity(count)).collect();
    let mut row = vec![0.0_f64; props.len()];

    match encoding {
        Encoding::Ascii => {
            let text = std::str::from_utf8(&bytes[header_end..]).map_err(|_| {
                Error::parse(path, header.lineno + 1, "ascii body is not valid text")
            })?;
            let mut data_lines = text.lines().enumerate();
            while points.len() < count {
                let (k, line) = data_lines.next().ok_or_else(|| {
                    Error::parse(
                        path,
                        0,
                        format!("expected {} vertex rows, found {}", count, points.len()),
                    )
                })?;
                let data_lineno = header.lineno + k + 1;
                let trimmed = line.trim();
                if trimmed.is_empty() {
                    continue;
                }
                let tokens: Vec<&str> = trimmed.split_whitespace().collect();
                if tokens.len() != props.len() {
                    return Err(Error::parse(
                        path,
                        data_lineno,
                        format!("expected {} values, found {}", props.len(), tokens.len()),
                    ));
                }
                for (slot, token) in row.iter_mut().zip(&tokens) {
                    *slot = token.parse().map_err(|_| {
                        Error::parse(path, data_lineno, format!("invalid number {token:?}"))
                    })?;
                }
                push_vertex(
                    path,
                    data_lineno,
                    &row,
                    ix,
                    iy,
                    iz,
                    &extra,
                    &mut points,
                    &mut attrs,
                )?;
            }
            // Data for trailing elements (faces and the like) is ignored.
        }
        Encoding::BinaryLe => {
            let stride: usize = props.iter().map(|(_, t)| t.size()).sum();
            let body = &bytes[header_end..];
            if body.len() < stride * count {
                return Err(Error::parse(
                    path,
                    0,
                    format!(
                        "binary body too short: need {} bytes for {} vertices, found {}",
                        stride * count,
                        count,
                        body.len()
                    ),
                ));
            }
            for v in 0..count {
                let mut off = v * stride;
                for (slot, (_, ty)) in row.iter_mut().zip(&props) {
                    *slot = ty.read_le(&body[off..]);
                    off += ty.size();
                }
                push_vertex(
                    path,
                    header.lineno,
                    &row,
                    ix,
                    iy,
                    iz,
                    &extra,
                    &mut points,
                    &mut attrs,
                )
                .map_err(|e| match e {
                    Error::Parse {
                        path,
                        line,
                        message,
                    } => Error::Parse {
                        path,
                        line,
                        message: format!("vertex {v}: {message}"),
                    },
                    other => other,
                })?;
            }
        }
    }

    let mut cloud = PointCloud::from_points(points);
    for (values, (_, name)) in attrs.into_iter().zip(&extra) {
        cloud.set_attribute(*name, values)?;
    }
    Ok(cloud)
}

#[allow(clippy::too_many_arguments)]
fn push_vertex(
    path: &Path,
    lineno: usize,
    row: &[f64],
    ix: usize,
    iy: usize,
    iz: usize,
    extra: &[(usize, &str)],
    points: &mut Vec<Point3>,
    attrs: &mut [Vec<f64>],
) -> Result<()> {
    let p = Point3::try_new(row[ix], row[iy], row[iz])
        .ok_or_else(|| Error::parse(path, lineno, "non-finite coordinate"))?;
    points.push(p);
    for (values, (k, _)) in attrs.iter_mut().zip(extra) {
        values.push(row[*k]);
    }
    Ok(())
}

pub(super) fn save(cloud: &PointCloud, path: &Path, binary: bool) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let names: Vec<&str> = cloud.attribute_names().collect();
    let attrs: Vec<&[f64]> = cloud.attributes().map(|(_, v)| v).collect();

    let format = if binary {
        "binary_little_endian"
    } else {
        "ascii"
    };
    let mut header = format!(
        "ply\nformat {} 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\n",
        format,
        cloud.len()
    );
    for name in &names {
        header.push_str(&format!("property double {name}\n"));
    }
    header.push_str("end_header\n");
    w.write_all(header.as_bytes())
        .map_err(|e| Error::io(path, e))?;

    if binary {
        for i in 0..cloud.len() {
            let p = cloud.point(i);
            for v in [p.x, p.y, p.z] {
                w.write_all(&v.to_le_bytes())
                    .map_err(|e| Error::io(path, e))?;
            }
            for values in &attrs {
                w.write_all(&values[i].to_le_bytes())
                    .map_err(|e| Error::io(path, e))?;
            }
        }
    } else {
        for i in 0..cloud.len() {
            let p = cloud.point(i);
            write!(w, "{} {} {}", p.x, p.y, p.z).map_err(|e| Error::io(path, e))?;
            for values in &attrs {
                write!(w, " {}", values[i]).map_err(|e| Error::io(path, e))?;
            }
            writeln!(w).map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
