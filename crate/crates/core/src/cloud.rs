//! Point and point-cloud containers.

use std::collections::BTreeMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// A single 3D point with finite `f64` coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    /// Creates a point from coordinates.
    ///
    /// # Panics
    /// Panics if any coordinate is NaN or infinite; loaders reject such
    /// values with a proper error before they ever reach this type.
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        assert!(
            x.is_finite() && y.is_finite() && z.is_finite(),
            "point coordinates must be finite, got ({x}, {y}, {z})"
        );
        Point3 { x, y, z }
    }

    /// Creates a point, returning `None` if any coordinate is non-finite.
    pub fn try_new(x: f64, y: f64, z: f64) -> Option<Self> {
        if x.is_finite() && y.is_finite() && z.is_finite() {
            Some(Point3 { x, y, z })
        } else {
            None
        }
    }

    /// The coordinates as a nalgebra vector.
    pub fn coords(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    /// Builds a point from a nalgebra vector (must be finite).
    pub fn from_coords(v: Vector3<f64>) -> Self {
        Point3::new(v.x, v.y, v.z)
    }

    /// Squared Euclidean distance to another point.
    pub fn distance_squared(self, other: Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }

    /// Euclidean distance to another point.
    pub fn distance(self, other: Point3) -> f64 {
        self.distance_squared(other).sqrt()
    }
}

/// An unordered-in-meaning, ordered-in-storage collection of points with
/// optional named per-point scalar attributes.
///
/// Point order is preserved exactly as given; all indices handed out by the
/// rest of the crate refer to this order. Attributes always have exactly one
/// `f64` per point. Attribute storage is a `BTreeMap` so that iteration
/// order (and therefore every serialized byte) is independent of insertion
/// history and hashing.
#[derive(Clone, Debug, Default)]
pub struct PointCloud {
    points: Vec<Point3>,
    attributes: BTreeMap<String, Vec<f64>>,
}

impl PointCloud {
    /// An empty cloud.
    pub fn new() -> Self {
        PointCloud::default()
    }

    /// Builds a cloud from points, with no attributes.
    pub fn from_points(points: Vec<Point3>) -> Self {
        PointCloud {
            points,
            attributes: BTreeMap::new(),
        }
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// True when the cloud holds no points.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The point at `index`.
    ///
    /// # Panics
    /// Panics if `index` is out of range, like slice indexing.
    pub fn point(&self, index: usize) -> Point3 {
        self.points[index]
    }

    /// All points, in storage order.
    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    /// Appends a point. Existing attributes are extended with `0.0` so the
    /// one-value-per-point invariant holds.
    pub fn push(&mut self, p: Point3) {
        self.points.push(p);
        for values in self.attributes.values_mut() {
            values.push(0.0);
        }
    }

    /// Sets (or replaces) a named attribute.
    ///
    /// Fails with [`Error::AttributeLength`] unless `values` has exactly one
    /// entry per point.
    pub fn set_attribute(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.points.len() {
            return Err(Error::AttributeLength {
                name,
                expected: self.points.len(),
                actual: values.len(),
            });
        }
        self.attributes.insert(name, values);
        Ok(())
    }

    /// Looks up an attribute by name.
    pub fn attribute(&self, name: &str) -> Result<&[f64]> {
        self.attributes
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    /// Attribute names in lexicographic order, with their values.
    pub fn attributes(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.attributes
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Attribute names in lexicographic order.
    pub fn attribute_names(&self) -> impl Iterator<Item = &str> {
        self.attributes.keys().map(String::as_str)
    }

    /// A new cloud holding the selected points (attributes carried along).
    ///
    /// Fails with [`Error::IndexOutOfRange`] on any invalid index. Indices
    /// may repeat and appear in any order; the output follows `indices`.
    pub fn select(&self, indices: &[usize]) -> Result<PointCloud> {
        let len = self.points.len();
        if let Some(&bad) = indices.iter().find(|&&i| i >= len) {
            return Err(Error::IndexOutOfRange { index: bad, len });
        }
        let points = indices.iter().map(|&i| self.points[i]).collect();
        let attributes = self
            .attributes
            .iter()
            .map(|(name, values)| {
                let sel = indices.iter().map(|&i| values[i]).collect();
                (name.clone(), sel)
            })
            .collect();
        Ok(PointCloud { points, attributes })
    }

    /// Axis-aligned bounding box as `(min, max)`, or `None` for an empty cloud.
    pub fn bounds(&self) -> Option<(Point3, Point3)> {
        let first = *self.points.first()?;
        let mut min = first;
        let mut max = first;
        for p in &self.points[1..] {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            min.z = min.z.min(p.z);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
            max.z = max.z.max(p.z);
        }
        Some((min, max))
    }
}

impl FromIterator<Point3> for PointCloud {
    fn from_iter<I: IntoIterator<Item = Point3>>(iter: I) -> Self {
        PointCloud::from_points(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_keeps_attributes_aligned() {
        let mut cloud = PointCloud::from_points(vec![Point3::new(0.0, 0.0, 0.0)]);
        cloud.set_attribute("w", vec![2.5]).unwrap();
        cloud.push(Point3::new(1.0, 0.0, 0.0));
        assert_eq!(cloud.attribute("w").unwrap(), &[2.5, 0.0]);
    }

    #[test]
    fn attribute_length_is_checked() {
        let mut cloud = PointCloud::from_points(vec![Point3::new(0.0, 0.0, 0.0)]);
        let err = cloud.set_attribute("w", vec![1.0, 2.0]).unwrap_err();
        assert!(matches!(
            err,
            Error::AttributeLength {
                actual: 2,
                expected: 1,
                ..
            }
        ));
    }

    #[test]
    fn select_carries_attributes_and_checks_bounds() {
        let mut cloud = PointCloud::from_points(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
        ]);
        cloud.set_attribute("w", vec![0.0, 1.0, 2.0]).unwrap();
        let sub = cloud.select(&[2, 0]).unwrap();
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.point(0).x, 2.0);
        assert_eq!(sub.attribute("w").unwrap(), &[2.0, 0.0]);
        assert!(matches!(
            cloud.select(&[3]),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn bounds_cover_all_points() {
        let cloud = PointCloud::from_points(vec![
            Point3::new(-1.0, 2.0, 0.5),
            Point3::new(3.0, -4.0, 0.25),
        ]);
        let (min, max) = cloud.bounds().unwrap();
        assert_eq!((min.x, min.y, min.z), (-1.0, -4.0, 0.25));
        assert_eq!((max.x, max.y, max.z), (3.0, 2.0, 0.5));
        assert!(PointCloud::new().bounds().is_none());
    }

    #[test]
    fn non_finite_points_are_rejected() {
        assert!(Point3::try_new(f64::NAN, 0.0, 0.0).is_none());
        assert!(Point3::try_new(0.0, f64::INFINITY, 0.0).is_none());
        assert!(Point3::try_new(0.0, 0.0, 1.0).is_some());
    }
}
