use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use super::{cross3, orient, Orientation, Point, SimplePolygon};
use crate::math;

pub type TriId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocateError {
    OutsidePolygon,
}

impl fmt::Display for LocateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("point lies outside the polygon")
    }
}

impl core::error::Error for LocateError {}

/// Triangle decomposition of a simple polygon with its dual graph.
#[derive(Clone, Debug)]
pub struct Triangulation {
    poly: SimplePolygon,
    /// Vertex indices, counter-clockwise.
    triangles: Vec<[usize; 3]>,
    diagonals: Vec<(usize, usize)>,
    /// Sorted vertex pair -> triangles having it as an edge.
    edge_tris: BTreeMap<(usize, usize), Vec<TriId>>,
    adjacency: Vec<Vec<TriId>>,
    incident: Vec<Vec<TriId>>,
}

#[inline]
fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn min_angle(a: Point, b: Point, c: Point) -> f64 {
    let ang = |p: Point, q: Point, r: Point| {
        let u = q - p;
        let v = r - p;
        math::atan2(u.cross(v).abs(), u.dot(v))
    };
    ang(a, b, c).min(ang(b, c, a)).min(ang(c, a, b))
}

fn in_closed_triangle(p: Point, a: Point, b: Point, c: Point) -> bool {
    orient(a, b, p) != Orientation::Clockwise
        && orient(b, c, p) != Orientation::Clockwise
        && orient(c, a, p) != Orientation::Clockwise
}

/// Ear-clipping triangulation. At each step the valid ear with the largest
/// minimum angle is cut (ties to the lowest remaining position), so the
/// result is deterministic and avoids needless slivers.
pub fn triangulate(poly: &SimplePolygon) -> Triangulation {
    let v = poly.vertices();
    let mut rest: Vec<usize> = (0..v.len()).collect();
    let mut triangles = Vec::with_capacity(v.len() - 2);
    while rest.len() > 3 {
        let m = rest.len();
        let mut best: Option<(usize, f64)> = None;
        for k in 0..m {
            let (ia, ib, ic) = (rest[(k + m - 1) % m], rest[k], rest[(k + 1) % m]);
            let (a, b, c) = (v[ia], v[ib], v[ic]);
            if orient(a, b, c) != Orientation::CounterClockwise {
                continue;
            }
            let blocked = rest
                .iter()
                .any(|&j| j != ia && j != ib && j != ic && in_closed_triangle(v[j], a, b, c));
            if blocked {
                continue;
            }
            let q = min_angle(a, b, c);
            if best.map_or(true, |(_, bq)| q > bq) {
                best = Some((k, q));
            }
        }
        // A simple polygon always has an ear; fall back to the first convex
        // corner only if rounding hides it.
        let k = best.map(|(k, _)| k).unwrap_or_else(|| {
            (0..m)
                .find(|&k| cross3(v[rest[(k + m - 1) % m]], v[rest[k]], v[rest[(k + 1) % m]]) > 0.0)
                .unwrap_or(0)
        });
        triangles.push([rest[(k + m - 1) % m], rest[k], rest[(k + 1) % m]]);
        rest.remove(k);
    }
    triangles.push([rest[0], rest[1], rest[2]]);
    Triangulation::from_triangles(poly.clone(), triangles)
}

impl Triangulation {
    fn from_triangles(poly: SimplePolygon, triangles: Vec<[usize; 3]>) -> Self {
        let n = poly.len();
        let mut edge_tris: BTreeMap<(usize, usize), Vec<TriId>> = BTreeMap::new();
        let mut incident = alloc::vec![Vec::new(); n];
        for (t, tri) in triangles.iter().enumerate() {
            for e in 0..3 {
                edge_tris.entry(key(tri[e], tri[(e + 1) % 3])).or_default().push(t);
                incident[tri[e]].push(t);
            }
        }
        let mut adjacency = alloc::vec![Vec::new(); triangles.len()];
        let mut diagonals = Vec::new();
        for (&(a, b), ts) in &edge_tris {
            if ts.len() == 2 {
                adjacency[ts[0]].push(ts[1]);
                adjacency[ts[1]].push(ts[0]);
                diagonals.push((a, b));
            }
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        Self { poly, triangles, diagonals, edge_tris, adjacency, incident }
    }

    pub fn polygon(&self) -> &SimplePolygon {
        &self.poly
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, t: TriId) -> [usize; 3] {
        self.triangles[t]
    }

    pub fn corners(&self, t: TriId) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.poly.vertex(a), self.poly.vertex(b), self.poly.vertex(c)]
    }

    pub fn centroid(&self, t: TriId) -> Point {
        let [a, b, c] = self.corners(t);
        Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    pub fn triangle_area(&self, t: TriId) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * cross3(a, b, c)
    }

    /// Internal diagonals as sorted vertex pairs.
    pub fn diagonals(&self) -> &[(usize, usize)] {
        &self.diagonals
    }

    /// Triangles sharing an edge with `t`, ascending.
    pub fn neighbors(&self, t: TriId) -> &[TriId] {
        &self.adjacency[t]
    }

    /// Triangles having vertex `v` as a corner.
    pub fn incident(&self, v: usize) -> &[TriId] {
        &self.incident[v]
    }

    /// Triangles having `(a, b)` as an edge; empty if it is not a
    /// triangulation edge.
    pub fn edge_triangles(&self, a: usize, b: usize) -> &[TriId] {
        self.edge_tris.get(&key(a, b)).map_or(&[], |v| v.as_slice())
    }

    pub fn is_edge(&self, a: usize, b: usize) -> bool {
        !self.edge_triangles(a, b).is_empty()
    }

    pub fn has_vertex(&self, t: TriId, v: usize) -> bool {
        self.triangles[t].contains(&v)
    }

    pub fn has_edge(&self, t: TriId, a: usize, b: usize) -> bool {
        self.has_vertex(t, a) && self.has_vertex(t, b)
    }

    /// Shared edge of two adjacent triangles.
    pub fn shared_edge(&self, s: TriId, t: TriId) -> Option<(usize, usize)> {
        let ts = self.triangles[t];
        let common: Vec<usize> = self.triangles[s].iter().copied().filter(|v| ts.contains(v)).collect();
        (common.len() == 2).then(|| key(common[0], common[1]))
    }

    pub fn contains_point(&self, t: TriId, p: Point, eps: f64) -> bool {
        let [a, b, c] = self.corners(t);
        if in_closed_triangle(p, a, b, c) {
            return true;
        }
        eps > 0.0
            && (super::on_segment(p, a, b, eps) || super::on_segment(p, b, c, eps) || super::on_segment(p, c, a, eps))
    }

    /// Lowest-id triangle containing `p` (closed, within the kernel tolerance).
    pub fn locate(&self, p: Point) -> Result<TriId, LocateError> {
        let eps = self.poly.eps();
        (0..self.triangles.len())
            .find(|&t| self.contains_point(t, p, 0.0))
            .or_else(|| (0..self.triangles.len()).find(|&t| self.contains_point(t, p, eps)))
            .ok_or(LocateError::OutsidePolygon)
    }

    /// Same triangulation on a uniformly scaled polygon.
    pub fn scaled(&self, k: f64) -> Triangulation {
        Triangulation::from_triangles(self.poly.scaled(k), self.triangles.clone())
    }
}
