//! Planar geometry kernel: points, simple polygons, triangulation,
//! visibility, geodesic distances, area regions and geodesic offsets.

mod geodesic;
mod offset;
mod polygon;
mod region;
mod triangulation;
mod visibility;

use core::ops::{Add, Mul, Neg, Sub};

use alloc::vec::Vec;

use crate::math;

pub use geodesic::{Anchors, GeodesicMap, GeodesicPath, SetDistance};
pub(crate) use offset::level_chains;
pub use offset::{geodesic_buffer, geodesic_offset, GeodesicBuffer, OffsetError, OffsetOptions};
pub use polygon::{validate_polygon, PolygonError, SimplePolygon};
pub use region::{region_boolean, AreaRegion, BooleanOp, RegionKernel};
pub use triangulation::{triangulate, LocateError, TriId, Triangulation};
pub use visibility::{point_visibility, ray_first_hit, star_region, star_sector};

/// A point (or vector) in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        math::hypot(self.x, self.y)
    }

    #[inline]
    pub fn norm2(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    #[inline]
    pub fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }

    #[inline]
    pub fn midpoint(self, o: Point) -> Point {
        self.lerp(o, 0.5)
    }

    /// Rotates by +90 degrees.
    #[inline]
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            Point::new(self.x / n, self.y / n)
        }
    }

    #[inline]
    pub fn from_angle(a: f64) -> Point {
        Point::new(math::cos(a), math::sin(a))
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from(p: [f64; 2]) -> Self {
        Point::new(p[0], p[1])
    }
}

impl From<(f64, f64)> for Point {
    fn from(p: (f64, f64)) -> Self {
        Point::new(p.0, p.1)
    }
}

impl i_float::float::compatible::FloatPointCompatible for Point {
    type Scalar = f64;

    fn from_xy(x: f64, y: f64) -> Self {
        Point::new(x, y)
    }

    fn x(&self) -> f64 {
        self.x
    }

    fn y(&self) -> f64 {
        self.y
    }
}

/// Sign of the turn `a -> b -> c`, evaluated exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
    Collinear,
}

pub fn orient(a: Point, b: Point, c: Point) -> Orientation {
    let d = robust::orient2d(
        robust::Coord { x: a.x, y: a.y },
        robust::Coord { x: b.x, y: b.y },
        robust::Coord { x: c.x, y: c.y },
    );
    if d > 0.0 {
        Orientation::CounterClockwise
    } else if d < 0.0 {
        Orientation::Clockwise
    } else {
        Orientation::Collinear
    }
}

/// Twice the signed area of triangle `abc` (plain float evaluation).
#[inline]
pub fn cross3(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Closest point to `p` on segment `ab`, with its parameter in `[0, 1]`.
pub fn closest_on_segment(p: Point, a: Point, b: Point) -> (Point, f64) {
    let ab = b - a;
    let len2 = ab.norm2();
    if len2 == 0.0 {
        return (a, 0.0);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    (a + ab * t, t)
}

#[inline]
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    closest_on_segment(p, a, b).0.dist(p)
}

/// Whether `p` lies on the closed segment `ab` within `eps`.
pub fn on_segment(p: Point, a: Point, b: Point, eps: f64) -> bool {
    point_segment_distance(p, a, b) <= eps
}

/// Proper crossing of the open segments `ab` and `cd` (exact predicates).
pub fn segments_cross_properly(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 != Orientation::Collinear
        && o2 != Orientation::Collinear
        && o3 != Orientation::Collinear
        && o4 != Orientation::Collinear
        && o1 != o2
        && o3 != o4
}

/// Whether the closed segments `ab` and `cd` share at least one point.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    use Orientation::Collinear;
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 != o2 && o3 != o4 && o1 != Collinear && o2 != Collinear && o3 != Collinear && o4 != Collinear {
        return true;
    }
    (o1 == Collinear && within_box(c, a, b))
        || (o2 == Collinear && within_box(d, a, b))
        || (o3 == Collinear && within_box(a, c, d))
        || (o4 == Collinear && within_box(b, c, d))
        || (o1 != o2 && o3 != o4)
}

fn within_box(p: Point, a: Point, b: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Parameter `t` along `ab` of the intersection with the line through `cd`,
/// if the lines are not parallel.
pub fn line_intersection_param(a: Point, b: Point, c: Point, d: Point) -> Option<f64> {
    let r = b - a;
    let s = d - c;
    let den = r.cross(s);
    if den == 0.0 {
        return None;
    }
    Some((c - a).cross(s) / den)
}

/// Euclidean distance between segments `ab` and `cd` and a closest pair.
pub fn segment_segment_closest(a: Point, b: Point, c: Point, d: Point) -> (f64, Point, Point) {
    if segments_intersect(a, b, c, d) {
        if let Some(t) = line_intersection_param(a, b, c, d) {
            let p = a.lerp(b, t.clamp(0.0, 1.0));
            return (0.0, p, p);
        }
        // Collinear overlap: any shared point.
        for p in [a, b] {
            if on_segment(p, c, d, 0.0) {
                return (0.0, p, p);
            }
        }
        return (0.0, c, c);
    }
    let mut best = (f64::INFINITY, a, c);
    for (p, s0, s1, first) in [(a, c, d, true), (b, c, d, true), (c, a, b, false), (d, a, b, false)] {
        let (q, _) = closest_on_segment(p, s0, s1);
        let dd = p.dist(q);
        if dd < best.0 {
            best = if first { (dd, p, q) } else { (dd, q, p) };
        }
    }
    best
}

/// An ordered chain of points, open or closed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polyline {
    pub points: Vec<Point>,
    pub closed: bool,
}

impl Polyline {
    pub fn open(points: Vec<Point>) -> Self {
        Self { points, closed: false }
    }

    pub fn closed(points: Vec<Point>) -> Self {
        Self { points, closed: true }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Segments as point pairs (includes the closing segment for closed chains).
    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.points.len();
        let count = if self.closed && n > 1 { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.dist(b)).sum()
    }

    /// Point at arc-length fraction `t ∈ [0, 1]`.
    pub fn point_at(&self, t: f64) -> Point {
        let total = self.length();
        if self.points.len() == 1 || total == 0.0 {
            return self.points[0];
        }
        let mut target = t.clamp(0.0, 1.0) * total;
        let mut last = self.points[0];
        for (a, b) in self.segments() {
            let l = a.dist(b);
            if target <= l {
                return a.lerp(b, if l > 0.0 { target / l } else { 0.0 });
            }
            target -= l;
            last = b;
        }
        last
    }

    /// Euclidean distance from `p` to the chain.
    pub fn distance_to(&self, p: Point) -> f64 {
        if self.points.len() == 1 {
            return self.points[0].dist(p);
        }
        self.segments()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }
}
