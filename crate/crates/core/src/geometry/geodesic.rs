use alloc::vec;
use alloc::vec::Vec;

use super::{closest_on_segment, point_visibility, Point, SimplePolygon};

/// Shortest-path oracle inside a simple polygon. Paths bend only at reflex
/// vertices, so all-pairs distances over the reflex visibility graph plus
/// per-query visibility give exact geodesics.
#[derive(Clone, Debug)]
pub struct GeodesicMap {
    poly: SimplePolygon,
    reflex: Vec<Point>,
    /// Row-major reflex-to-reflex geodesic distances.
    dist: Vec<f64>,
    /// `next[i * r + j]`: next reflex vertex on the path from `i` to `j`.
    next: Vec<usize>,
}

/// A polygonal shortest path and its length.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GeodesicPath {
    pub points: Vec<Point>,
    pub length: f64,
}

/// Closest pair between two point sets with the realizing path.
#[derive(Clone, Debug, PartialEq)]
pub struct SetDistance {
    pub distance: f64,
    pub path: GeodesicPath,
}

/// Per-query geodesic distances from one point to every reflex vertex.
#[derive(Clone, Debug)]
pub struct Anchors {
    origin: Point,
    to_reflex: Vec<f64>,
    /// Reflex vertex preceding the target on the path (`usize::MAX` when
    /// the target is directly visible).
    via: Vec<usize>,
}

impl GeodesicMap {
    pub fn new(poly: &SimplePolygon) -> Self {
        let reflex: Vec<Point> = poly.reflex_vertices().into_iter().map(|i| poly.vertex(i)).collect();
        let r = reflex.len();
        let mut dist = vec![f64::INFINITY; r * r];
        let mut next = vec![usize::MAX; r * r];
        for i in 0..r {
            dist[i * r + i] = 0.0;
            next[i * r + i] = i;
            for j in i + 1..r {
                if point_visibility(poly, reflex[i], reflex[j]) {
                    let d = reflex[i].dist(reflex[j]);
                    dist[i * r + j] = d;
                    dist[j * r + i] = d;
                    next[i * r + j] = j;
                    next[j * r + i] = i;
                }
            }
        }
        for k in 0..r {
            for i in 0..r {
                let dik = dist[i * r + k];
                if !dik.is_finite() {
                    continue;
                }
                for j in 0..r {
                    let cand = dik + dist[k * r + j];
                    if cand < dist[i * r + j] {
                        dist[i * r + j] = cand;
                        next[i * r + j] = next[i * r + k];
                    }
                }
            }
        }
        Self { poly: poly.clone(), reflex, dist, next }
    }

    pub fn polygon(&self) -> &SimplePolygon {
        &self.poly
    }

    pub fn reflex_points(&self) -> &[Point] {
        &self.reflex
    }

    pub fn visible(&self, a: Point, b: Point) -> bool {
        point_visibility(&self.poly, a, b)
    }

    /// Geodesic distances from `p` to every reflex vertex.
    pub fn anchors(&self, p: Point) -> Anchors {
        let r = self.reflex.len();
        let direct: Vec<Option<f64>> =
            self.reflex.iter().map(|&w| self.visible(p, w).then(|| p.dist(w))).collect();
        let mut to_reflex = vec![f64::INFINITY; r];
        let mut via = vec![usize::MAX; r];
        for j in 0..r {
            if let Some(d) = direct[j] {
                to_reflex[j] = d;
                via[j] = usize::MAX;
            }
        }
        for (i, d) in direct.iter().enumerate() {
            let Some(d) = d else { continue };
            for j in 0..r {
                let cand = d + self.dist[i * r + j];
                if cand < to_reflex[j] {
                    to_reflex[j] = cand;
                    via[j] = i;
                }
            }
        }
        Anchors { origin: p, to_reflex, via }
    }

    fn reflex_path(&self, i: usize, j: usize, out: &mut Vec<Point>) {
        let r = self.reflex.len();
        let mut k = i;
        while k != j {
            k = self.next[k * r + j];
            out.push(self.reflex[k]);
        }
    }

    /// Path from the anchors' origin to reflex vertex `j`.
    fn path_to_reflex(&self, an: &Anchors, j: usize) -> Vec<Point> {
        let mut pts = vec![an.origin];
        let first = an.via[j];
        if first == usize::MAX {
            pts.push(self.reflex[j]);
        } else {
            pts.push(self.reflex[first]);
            self.reflex_path(first, j, &mut pts);
        }
        pts
    }

    pub fn distance(&self, a: Point, b: Point) -> f64 {
        self.path(a, b).length
    }

    /// Shortest path from `a` to `b`.
    pub fn path(&self, a: Point, b: Point) -> GeodesicPath {
        if self.visible(a, b) {
            return GeodesicPath { points: vec![a, b], length: a.dist(b) };
        }
        let an = self.anchors(a);
        let mut best = (f64::INFINITY, usize::MAX);
        for (j, &w) in self.reflex.iter().enumerate() {
            let base = an.to_reflex[j];
            if base.is_finite() && base + w.dist(b) < best.0 && self.visible(w, b) {
                best = (base + w.dist(b), j);
            }
        }
        if best.1 == usize::MAX {
            // Only reachable through numerical trouble at the boundary.
            return GeodesicPath { points: vec![a, b], length: a.dist(b) };
        }
        let mut points = self.path_to_reflex(&an, best.1);
        points.push(b);
        GeodesicPath { points, length: best.0 }
    }

    /// Geodesic distance from `p` to the union of segments.
    pub fn distance_to_segments(&self, p: Point, segs: &[(Point, Point)]) -> f64 {
        self.closest_on_segments(p, segs).map_or(f64::INFINITY, |s| s.distance)
    }

    /// Shortest path from `p` to the union of segments.
    pub fn closest_on_segments(&self, p: Point, segs: &[(Point, Point)]) -> Option<SetDistance> {
        if segs.is_empty() {
            return None;
        }
        let an = self.anchors(p);
        self.closest_with_anchors(&an, segs)
    }

    pub fn closest_with_anchors(&self, an: &Anchors, segs: &[(Point, Point)]) -> Option<SetDistance> {
        let p = an.origin;
        // (value, anchor: usize::MAX for p itself, closest point)
        let mut cands: Vec<(f64, usize, Point)> = Vec::with_capacity(segs.len() * (1 + self.reflex.len()));
        for &(a, b) in segs {
            let (q, _) = closest_on_segment(p, a, b);
            cands.push((p.dist(q), usize::MAX, q));
            for (j, &w) in self.reflex.iter().enumerate() {
                let g = an.to_reflex[j];
                if g.is_finite() {
                    let (q, _) = closest_on_segment(w, a, b);
                    cands.push((g + w.dist(q), j, q));
                }
            }
        }
        cands.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (value, anchor, q) in cands {
            let from = if anchor == usize::MAX { p } else { self.reflex[anchor] };
            if self.visible(from, q) {
                let mut points = if anchor == usize::MAX { vec![p] } else { self.path_to_reflex(an, anchor) };
                if points.last() != Some(&q) {
                    points.push(q);
                }
                return Some(SetDistance { distance: value, path: GeodesicPath { points, length: value } });
            }
        }
        None
    }

    /// Geodesic distance between two unions of segments.
    pub fn set_distance(&self, a_segs: &[(Point, Point)], b_segs: &[(Point, Point)]) -> Option<SetDistance> {
        if a_segs.is_empty() || b_segs.is_empty() {
            return None;
        }
        let mut cands: Vec<(f64, Point, Point)> = Vec::with_capacity(a_segs.len() * b_segs.len() * 4);
        for &(a0, a1) in a_segs {
            for &(b0, b1) in b_segs {
                if super::segments_intersect(a0, a1, b0, b1) {
                    let (_, p, q) = super::segment_segment_closest(a0, a1, b0, b1);
                    cands.push((0.0, p, q));
                    continue;
                }
                for p in [a0, a1] {
                    let (q, _) = closest_on_segment(p, b0, b1);
                    cands.push((p.dist(q), p, q));
                }
                for q in [b0, b1] {
                    let (p, _) = closest_on_segment(q, a0, a1);
                    cands.push((p.dist(q), p, q));
                }
            }
        }
        cands.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut best: Option<SetDistance> = None;
        for (value, p, q) in cands {
            if self.visible(p, q) {
                best = Some(SetDistance { distance: value, path: GeodesicPath { points: vec![p, q], length: value } });
                break;
            }
        }
        for &w in &self.reflex {
            let bound = best.as_ref().map_or(f64::INFINITY, |b| b.distance);
            let Some(da) = self.closest_on_segments(w, a_segs) else { continue };
            if da.distance >= bound {
                continue;
            }
            let Some(db) = self.closest_on_segments(w, b_segs) else { continue };
            let total = da.distance + db.distance;
            if total < bound {
                let mut points: Vec<Point> = da.path.points.iter().rev().copied().collect();
                points.extend(db.path.points.iter().skip(1).copied());
                best = Some(SetDistance { distance: total, path: GeodesicPath { points, length: total } });
            }
        }
        best
    }
}

impl Anchors {
    pub fn origin(&self) -> Point {
        self.origin
    }
}
