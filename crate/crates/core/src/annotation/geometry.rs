use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

/// A point in normalized image space, `[0,1] x [0,1]`, origin top-left.
///
/// Serialized as a two-element array `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        Point2::new(lerp(self.x, other.x, t), lerp(self.y, other.y, t))
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2 { x, y }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

pub(crate) fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Which geometry a spatiotemporal label draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    BoundingBox,
    Point,
    Segment,
    Polygon,
    Polyline,
}

impl ShapeKind {
    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::BoundingBox => "bounding_box",
            ShapeKind::Point => "point",
            ShapeKind::Segment => "segment",
            ShapeKind::Polygon => "polygon",
            ShapeKind::Polyline => "polyline",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("coordinate {value} is outside [0, 1]")]
    OutOfRange { value: f64 },
    #[error("bounding box corners are inverted")]
    InvertedBox,
    #[error("{kind} needs at least {min} vertices, got {got}")]
    TooFewVertices { kind: &'static str, min: usize, got: usize },
    #[error("vertex {index} duplicates its predecessor")]
    DuplicateVertex { index: usize },
    #[error("malformed {kind} coordinates")]
    Malformed { kind: &'static str },
}

/// Keyframe geometry in normalized coordinates.
///
/// The serde representation (`{"kind": ..., "coords": ...}`) is the one used
/// by the HTTP API; the canonical interchange document uses the untagged
/// coordinate arrays from [`ShapeGeometry::to_coords`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "coords", rename_all = "snake_case")]
pub enum ShapeGeometry {
    BoundingBox { x_min: f64, y_min: f64, x_max: f64, y_max: f64 },
    Point(Point2),
    Segment(Point2, Point2),
    Polygon(Vec<Point2>),
    Polyline(Vec<Point2>),
}

impl ShapeGeometry {
    pub fn bbox(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        ShapeGeometry::BoundingBox { x_min, y_min, x_max, y_max }
    }

    pub fn kind(&self) -> ShapeKind {
        match self {
            ShapeGeometry::BoundingBox { .. } => ShapeKind::BoundingBox,
            ShapeGeometry::Point(_) => ShapeKind::Point,
            ShapeGeometry::Segment(..) => ShapeKind::Segment,
            ShapeGeometry::Polygon(_) => ShapeKind::Polygon,
            ShapeGeometry::Polyline(_) => ShapeKind::Polyline,
        }
    }

    /// Every scalar coordinate in a fixed order (box corners, then vertex x/y pairs).
    pub fn scalars(&self) -> Vec<f64> {
        match self {
            ShapeGeometry::BoundingBox { x_min, y_min, x_max, y_max } => {
                vec![*x_min, *y_min, *x_max, *y_max]
            }
            ShapeGeometry::Point(p) => vec![p.x, p.y],
            ShapeGeometry::Segment(a, b) => vec![a.x, a.y, b.x, b.y],
            ShapeGeometry::Polygon(v) | ShapeGeometry::Polyline(v) => {
                v.iter().flat_map(|p| [p.x, p.y]).collect()
            }
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        for value in self.scalars() {
            if !(0.0..=1.0).contains(&value) {
                return Err(GeometryError::OutOfRange { value });
            }
        }
        match self {
            ShapeGeometry::BoundingBox { x_min, y_min, x_max, y_max } => {
                if x_min > x_max || y_min > y_max {
                    return Err(GeometryError::InvertedBox);
                }
            }
            ShapeGeometry::Polygon(v) => {
                if v.len() < 3 {
                    return Err(GeometryError::TooFewVertices { kind: "polygon", min: 3, got: v.len() });
                }
                // The closing edge counts too: last vertex precedes the first.
                for i in 0..v.len() {
                    let prev = v[(i + v.len() - 1) % v.len()];
                    if v[i] == prev {
                        return Err(GeometryError::DuplicateVertex { index: i });
                    }
                }
            }
            ShapeGeometry::Polyline(v) => {
                if v.len() < 2 {
                    return Err(GeometryError::TooFewVertices { kind: "polyline", min: 2, got: v.len() });
                }
            }
            ShapeGeometry::Point(_) | ShapeGeometry::Segment(..) => {}
        }
        Ok(())
    }

    /// Canonical coordinate encoding: bbox `[x_min,y_min,x_max,y_max]`,
    /// point `[x,y]`, segment `[[x1,y1],[x2,y2]]`, polygon/polyline `[[x,y],...]`.
    pub fn to_coords(&self) -> Value {
        match self {
            ShapeGeometry::BoundingBox { x_min, y_min, x_max, y_max } => {
                json!([x_min, y_min, x_max, y_max])
            }
            ShapeGeometry::Point(p) => json!([p.x, p.y]),
            ShapeGeometry::Segment(a, b) => json!([[a.x, a.y], [b.x, b.y]]),
            ShapeGeometry::Polygon(v) | ShapeGeometry::Polyline(v) => {
                Value::Array(v.iter().map(|p| json!([p.x, p.y])).collect())
            }
        }
    }

    /// Inverse of [`to_coords`](Self::to_coords). The encoding is ambiguous
    /// without the label's shape kind (a 2-vertex polyline looks like a segment).
    pub fn from_coords(kind: ShapeKind, value: &Value) -> Result<Self, GeometryError> {
        let malformed = || GeometryError::Malformed { kind: kind.name() };
        let point = |v: &Value| -> Option<Point2> {
            let arr = v.as_array()?;
            match arr.as_slice() {
                [x, y] => Some(Point2::new(x.as_f64()?, y.as_f64()?)),
                _ => None,
            }
        };
        let points = |v: &Value| -> Option<Vec<Point2>> {
            v.as_array()?.iter().map(point).collect()
        };
        let shape = match kind {
            ShapeKind::BoundingBox => {
                let arr = value.as_array().ok_or_else(malformed)?;
                let nums: Option<Vec<f64>> = arr.iter().map(Value::as_f64).collect();
                match nums.as_deref() {
                    Some(&[a, b, c, d]) => ShapeGeometry::bbox(a, b, c, d),
                    _ => return Err(malformed()),
                }
            }
            ShapeKind::Point => ShapeGeometry::Point(point(value).ok_or_else(malformed)?),
            ShapeKind::Segment => match points(value).as_deref() {
                Some(&[a, b]) => ShapeGeometry::Segment(a, b),
                _ => return Err(malformed()),
            },
            ShapeKind::Polygon => ShapeGeometry::Polygon(points(value).ok_or_else(malformed)?),
            ShapeKind::Polyline => ShapeGeometry::Polyline(points(value).ok_or_else(malformed)?),
        };
        Ok(shape)
    }
}
