use alloc::vec::Vec;
use core::fmt;

use super::{closest_on_segment, orient, segments_intersect, Orientation, Point};

#[derive(Clone, Debug, PartialEq)]
pub enum PolygonError {
    TooFewVertices(usize),
    /// Repeated, collinear or non-finite vertex at this index.
    DegenerateVertex(usize),
    /// Edges starting at these two indices intersect.
    SelfIntersecting(usize, usize),
}

impl fmt::Display for PolygonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolygonError::TooFewVertices(n) => write!(f, "polygon needs at least 3 vertices, got {n}"),
            PolygonError::DegenerateVertex(i) => write!(f, "degenerate vertex at index {i}"),
            PolygonError::SelfIntersecting(i, j) => write!(f, "edges {i} and {j} intersect"),
        }
    }
}

impl core::error::Error for PolygonError {}

/// A simple polygon with counter-clockwise vertex order.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplePolygon {
    vertices: Vec<Point>,
    area: f64,
    diameter: f64,
    bbox: (Point, Point),
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        s += v[i].cross(v[(i + 1) % n]);
    }
    0.5 * s
}

/// Checks simplicity and returns the polygon in counter-clockwise order.
pub fn validate_polygon(raw: &[Point]) -> Result<SimplePolygon, PolygonError> {
    let n = raw.len();
    if n < 3 {
        return Err(PolygonError::TooFewVertices(n));
    }
    for (i, p) in raw.iter().enumerate() {
        if !p.is_finite() {
            return Err(PolygonError::DegenerateVertex(i));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if raw[i] == raw[j] {
                return Err(PolygonError::DegenerateVertex(j));
            }
        }
    }
    for i in 0..n {
        let prev = raw[(i + n - 1) % n];
        let next = raw[(i + 1) % n];
        if orient(prev, raw[i], next) == Orientation::Collinear {
            // A spike folding back on itself is an intersection, a straight
            // pass-through is a redundant vertex.
            let (_, t) = closest_on_segment(raw[i], prev, next);
            if t <= 0.0 || t >= 1.0 || (raw[i] - prev).dot(next - raw[i]) < 0.0 {
                return Err(PolygonError::SelfIntersecting((i + n - 1) % n, i));
            }
            return Err(PolygonError::DegenerateVertex(i));
        }
    }
    for i in 0..n {
        let (a, b) = (raw[i], raw[(i + 1) % n]);
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (raw[j], raw[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return Err(PolygonError::SelfIntersecting(i, j));
            }
        }
    }
    let mut vertices = raw.to_vec();
    let mut area = signed_area(&vertices);
    if area < 0.0 {
        vertices.reverse();
        area = -area;
    }
    if area <= 0.0 {
        return Err(PolygonError::DegenerateVertex(0));
    }
    Ok(SimplePolygon::from_ccw_unchecked(vertices, area))
}

impl SimplePolygon {
    fn from_ccw_unchecked(vertices: Vec<Point>, area: f64) -> Self {
        let mut lo = vertices[0];
        let mut hi = vertices[0];
        for p in &vertices {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let mut diameter: f64 = 0.0;
        for (i, p) in vertices.iter().enumerate() {
            for q in &vertices[i + 1..] {
                diameter = diameter.max(p.dist(*q));
            }
        }
        Self { vertices, area, diameter, bbox: (lo, hi) }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i]
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Largest vertex-to-vertex distance.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn bbox(&self) -> (Point, Point) {
        self.bbox
    }

    /// Coincidence tolerance used throughout the kernel.
    pub fn eps(&self) -> f64 {
        1e-9 * self.diameter
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    pub fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        (0..self.vertices.len()).map(move |i| self.edge(i))
    }

    pub fn is_reflex(&self, i: usize) -> bool {
        let n = self.vertices.len();
        orient(self.vertices[(i + n - 1) % n], self.vertices[i], self.vertices[(i + 1) % n])
            == Orientation::Clockwise
    }

    pub fn reflex_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&i| self.is_reflex(i)).collect()
    }

    /// Whether `p` lies on the boundary within `eps`.
    pub fn on_boundary(&self, p: Point, eps: f64) -> bool {
        self.edges().any(|(a, b)| super::on_segment(p, a, b, eps))
    }

    /// Closed point-in-polygon test (boundary within `eps` counts as inside).
    pub fn contains(&self, p: Point, eps: f64) -> bool {
        self.on_boundary(p, eps) || self.contains_strict(p)
    }

    /// Crossing-number test; boundary behaviour is unspecified.
    pub fn contains_strict(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Nearest point of the closed polygon to `p`.
    pub fn clamp_point(&self, p: Point) -> Point {
        if self.contains_strict(p) {
            return p;
        }
        let mut best = (f64::INFINITY, p);
        for (a, b) in self.edges() {
            let (q, _) = closest_on_segment(p, a, b);
            let d = q.dist(p);
            if d < best.0 {
                best = (d, q);
            }
        }
        best.1
    }

    /// Same polygon with all coordinates multiplied by `k > 0`.
    pub fn scaled(&self, k: f64) -> SimplePolygon {
        let v = self.vertices.iter().map(|&p| p * k).collect();
        SimplePolygon::from_ccw_unchecked(v, self.area * k * k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&p| p.into()).collect()
    }

    #[test]
    fn square_orientations() {
        let ccw = pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let p = validate_polygon(&ccw).unwrap();
        assert_eq!(p.area(), 1.0);
        let mut cw = ccw.clone();
        cw.reverse();
        let q = validate_polygon(&cw).unwrap();
        assert_eq!(q.area(), 1.0);
        assert!(signed_area(q.vertices()) > 0.0);
    }

    #[test]
    fn bowtie_rejected() {
        let b = pts(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!(matches!(validate_polygon(&b), Err(PolygonError::SelfIntersecting(..))));
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(validate_polygon(&pts(&[(0.0, 0.0), (1.0, 0.0)])), Err(PolygonError::TooFewVertices(2)));
        let rep = pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!(matches!(validate_polygon(&rep), Err(PolygonError::DegenerateVertex(_))));
        let col = pts(&[(0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        assert_eq!(validate_polygon(&col), Err(PolygonError::DegenerateVertex(1)));
        let nan = vec![Point::new(f64::NAN, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert_eq!(validate_polygon(&nan), Err(PolygonError::DegenerateVertex(0)));
    }

    #[test]
    fn touching_vertex_rejected() {
        // Vertex 4 touches edge 1 from inside.
        let v = pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (1.0, 2.0), (2.0, 1.0), (0.0, 2.0)]);
        assert!(matches!(validate_polygon(&v), Err(PolygonError::SelfIntersecting(..))));
    }

    #[test]
    fn reflex_and_contains() {
        let l = validate_polygon(&pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)])).unwrap();
        assert_eq!(l.reflex_vertices(), vec![3]);
        assert!(l.contains(Point::new(0.5, 1.5), 0.0));
        assert!(!l.contains(Point::new(1.5, 1.5), 1e-12));
        assert!(l.contains(Point::new(1.5, 1.0), 1e-12));
        assert_eq!(l.clamp_point(Point::new(1.5, 1.5)), Point::new(1.5, 1.0));
        assert!((l.diameter() - 8f64.sqrt()).abs() < 1e-15);
    }
}
