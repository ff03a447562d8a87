//! Plain 2D geometry over `f64` world units, y-up.
//!
//! Everything downstream (territory cells, spline bands, combat hulls)
//! is built from these few primitives. All operations are deterministic:
//! point ordering uses `f64::total_cmp`, never hashing.

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A point (or free vector) in world coordinates. Serializes as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ZERO: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product; positive when `other` is
    /// counterclockwise of `self` in a y-up frame.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn distance_sq(self, other: Point) -> f64 {
        let d = self - other;
        d.x * d.x + d.y * d.y
    }

    /// Unit vector in the same direction, or `ZERO` for (near-)zero input.
    pub fn normalized(self) -> Point {
        let n = self.norm();
        if n < 1e-12 {
            Point::ZERO
        } else {
            self / n
        }
    }

    /// Rotation by +90 degrees (counterclockwise in a y-up frame).
    pub fn rot90ccw(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
    }

    /// Total order by `(x, y)`; the tie-break order used everywhere.
    pub fn cmp_xy(&self, other: &Point) -> std::cmp::Ordering {
        self.x
            .total_cmp(&other.x)
            .then_with(|| self.y.total_cmp(&other.y))
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Div<f64> for Point {
    type Output = Point;
    fn div(self, rhs: f64) -> Point {
        Point::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut tup = serializer.serialize_tuple(2)?;
        tup.serialize_element(&self.x)?;
        tup.serialize_element(&self.y)?;
        tup.end()
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PointVisitor;
        impl<'de> Visitor<'de> for PointVisitor {
            type Value = Point;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a [x, y] pair")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Point, A::Error> {
                let x = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let y = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(Point::new(x, y))
            }
        }
        deserializer.deserialize_tuple(2, PointVisitor)
    }
}

/// Axis-aligned rectangle `[min, max]` in world units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Self {
        Rect {
            min: Point::new(xmin, ymin),
            max: Point::new(xmax, ymax),
        }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    /// Inclusive containment (boundary points count as inside).
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Nearest point of the rectangle (projection onto the box).
    pub fn clamp(&self, p: Point) -> Point {
        Point::new(
            p.x.clamp(self.min.x, self.max.x),
            p.y.clamp(self.min.y, self.max.y),
        )
    }

    /// Rectangle grown by `dx` and `dy` on each side.
    pub fn inflated(&self, dx: f64, dy: f64) -> Rect {
        Rect {
            min: Point::new(self.min.x - dx, self.min.y - dy),
            max: Point::new(self.max.x + dx, self.max.y + dy),
        }
    }

    /// Smallest rectangle covering both `self` and `p`.
    pub fn including(&self, p: Point) -> Rect {
        Rect {
            min: Point::new(self.min.x.min(p.x), self.min.y.min(p.y)),
            max: Point::new(self.max.x.max(p.x), self.max.y.max(p.y)),
        }
    }

    /// Corners in counterclockwise order (y-up), starting at `min`.
    pub fn corners(&self) -> [Point; 4] {
        [
            self.min,
            Point::new(self.max.x, self.min.y),
            self.max,
            Point::new(self.min.x, self.max.y),
        ]
    }
}

/// Closed polygon as a vertex list; the edge from the last vertex back to
/// the first is implicit.
pub type Polygon = Vec<Point>;

/// Even-odd ray-casting containment test for arbitrary simple polygons.
pub fn polygon_contains(poly: &[Point], p: Point) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let x_at = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_at {
                inside = !inside;
            }
        }
    }
    inside
}

/// Containment test for a counterclockwise convex polygon with a signed
/// tolerance: `tol >= 0` accepts points up to `tol` outside, `tol < 0`
/// requires the point to be strictly inside by `|tol|`.
pub fn convex_contains(poly: &[Point], p: Point, tol: f64) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let edge = b - a;
        let len = edge.norm();
        if len < 1e-12 {
            continue;
        }
        // signed distance of p left of edge ab (inside for CCW polygons)
        if edge.cross(p - a) / len < -tol {
            return false;
        }
    }
    true
}

/// Clips a convex polygon against the half-plane `signed(q) >= 0`,
/// Sutherland-Hodgman style. Points within `1e-12` of the boundary are
/// kept so that adjacent clipped cells share their border vertices.
pub fn clip_halfplane(poly: &[Point], signed: impl Fn(Point) -> f64) -> Polygon {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let sa = signed(a);
        let sb = signed(b);
        let a_in = sa >= -1e-12;
        let b_in = sb >= -1e-12;
        if a_in {
            out.push(a);
        }
        if a_in != b_in {
            let t = sa / (sa - sb);
            out.push(a.lerp(b, t));
        }
    }
    out
}

/// Convex hull by Andrew's monotone chain; collinear points are dropped.
/// Returns vertices in counterclockwise order (y-up). Degenerate inputs
/// yield fewer than 3 vertices.
pub fn convex_hull(points: &[Point]) -> Polygon {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(Point::cmp_xy);
    pts.dedup_by(|a, b| a == b);
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * n);
    // lower hull
    for &p in &pts {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            if (a - o).cross(p - o) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    // upper hull
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            if (a - o).cross(p - o) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Mean of a nonempty point set.
pub fn centroid(points: &[Point]) -> Point {
    let mut sum = Point::ZERO;
    for &p in points {
        sum = sum + p;
    }
    sum / points.len() as f64
}

/// Total polyline length.
pub fn polyline_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}
