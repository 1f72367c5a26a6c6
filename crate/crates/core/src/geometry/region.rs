use alloc::vec;
use alloc::vec::Vec;

use i_float::adapter::FloatPointAdapter;
use i_float::float::rect::FloatRect;
use i_overlay::core::fill_rule::FillRule;
use i_overlay::core::overlay_rule::OverlayRule;
use i_overlay::float::overlay::{FloatOverlay, OverlayOptions};
use i_overlay::core::overlay::ShapeType;
use i_overlay::core::solver::Solver;

use super::{on_segment, Point, Polyline, SimplePolygon};

/// A regularized planar area: a list of shapes, each an outer loop
/// (counter-clockwise) followed by its holes (clockwise).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AreaRegion {
    shapes: Vec<Vec<Vec<Point>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BooleanOp {
    Union,
    Intersection,
    Difference,
}

/// Boolean engine bound to one polygon's coordinate frame, so every
/// operation snaps to the same integer grid.
#[derive(Clone, Debug)]
pub struct RegionKernel {
    rect: (f64, f64, f64, f64),
    /// Integer grid units per length unit.
    scale: f64,
}

fn loop_area(l: &[Point]) -> f64 {
    let n = l.len();
    let mut s = 0.0;
    for i in 0..n {
        s += l[i].cross(l[(i + 1) % n]);
    }
    0.5 * s
}

impl RegionKernel {
    pub fn new(poly: &SimplePolygon) -> Self {
        let (lo, hi) = poly.bbox();
        let pad = 0.25 * poly.diameter().max(1e-300);
        // A grid of diameter / 2^36 absorbs float noise in coordinates that
        // should coincide, while staying far below every tolerance in use.
        let scale = libm::ldexp(1.0, 36) / poly.diameter();
        Self { rect: (lo.x - pad, hi.x + pad, lo.y - pad, hi.y + pad), scale }
    }

    fn overlay(&self, capacity: usize) -> FloatOverlay<Point, i64> {
        let (x0, x1, y0, y1) = self.rect;
        let rect = FloatRect { min_x: x0, max_x: x1, min_y: y0, max_y: y1 };
        let adapter = FloatPointAdapter::<Point, i64>::try_with_scale_conservative(rect, self.scale)
            .expect("grid scale fits the integer range");
        let options = OverlayOptions::<f64, i64>::default();
        FloatOverlay::new_custom(adapter, options, Solver::default(), capacity)
    }

    fn clamp(&self, p: Point) -> Point {
        let (x0, x1, y0, y1) = self.rect;
        Point::new(p.x.clamp(x0, x1), p.y.clamp(y0, y1))
    }

    fn run(&self, subj: &[&[Point]], clip: &[&[Point]], rule: OverlayRule, fill: FillRule) -> AreaRegion {
        let cap: usize = subj.iter().chain(clip.iter()).map(|c| c.len()).sum();
        let mut ov = self.overlay(cap.max(4));
        let mut buf: Vec<Point> = Vec::new();
        for (set, ty) in [(subj, ShapeType::Subject), (clip, ShapeType::Clip)] {
            for c in set.iter() {
                if c.len() < 3 {
                    continue;
                }
                buf.clear();
                buf.extend(c.iter().map(|&p| self.clamp(p)));
                ov = ov.unsafe_add_contour(&buf, ty);
            }
        }
        let shapes = ov.overlay(rule, fill);
        AreaRegion::from_shapes(shapes)
    }

    /// Region bounded by one simple loop (either orientation).
    pub fn from_loop(&self, pts: &[Point]) -> AreaRegion {
        self.run(&[pts], &[], OverlayRule::Subject, FillRule::NonZero)
    }

    /// Union of many simple loops. Large batches are merged as a balanced
    /// tree over consecutive chunks: heavily overlapping loops in a single
    /// pass split into quadratically many fragments.
    pub fn union_loops(&self, loops: &[Vec<Point>]) -> AreaRegion {
        const CHUNK: usize = 16;
        if loops.len() <= 2 * CHUNK {
            let refs: Vec<&[Point]> = loops.iter().map(|l| l.as_slice()).collect();
            return self.run(&refs, &[], OverlayRule::Subject, FillRule::NonZero);
        }
        let mut level: Vec<AreaRegion> = loops.chunks(CHUNK).map(|c| self.union_loops(c)).collect();
        while level.len() > 1 {
            level = level.chunks(2).map(|p| if p.len() == 2 { self.union(&p[0], &p[1]) } else { p[0].clone() }).collect();
        }
        level.pop().unwrap_or_default()
    }

    pub fn union_all<'a, I: IntoIterator<Item = &'a AreaRegion>>(&self, regions: I) -> AreaRegion {
        let mut refs: Vec<&[Point]> = Vec::new();
        for r in regions {
            for s in &r.shapes {
                for c in s {
                    refs.push(c.as_slice());
                }
            }
        }
        if refs.is_empty() {
            return AreaRegion::empty();
        }
        self.run(&refs, &[], OverlayRule::Subject, FillRule::NonZero)
    }

    pub fn boolean(&self, a: &AreaRegion, b: &AreaRegion, op: BooleanOp) -> AreaRegion {
        match op {
            BooleanOp::Intersection if a.is_empty() || b.is_empty() => return AreaRegion::empty(),
            BooleanOp::Difference if a.is_empty() => return AreaRegion::empty(),
            BooleanOp::Difference if b.is_empty() => return a.clone(),
            BooleanOp::Union if a.is_empty() => return b.clone(),
            BooleanOp::Union if b.is_empty() => return a.clone(),
            _ => {}
        }
        let sa: Vec<&[Point]> = a.contours().collect();
        let sb: Vec<&[Point]> = b.contours().collect();
        let rule = match op {
            BooleanOp::Union => OverlayRule::Union,
            BooleanOp::Intersection => OverlayRule::Intersect,
            BooleanOp::Difference => OverlayRule::Difference,
        };
        self.run(&sa, &sb, rule, FillRule::NonZero)
    }

    /// Drops pieces and holes of area at most `min_area` and thins every
    /// contour to within `tol`.
    pub fn clean(&self, r: &AreaRegion, tol: f64, min_area: f64) -> AreaRegion {
        let mut loops: Vec<Vec<Point>> = Vec::new();
        for s in &r.shapes {
            if loop_area(&s[0]) <= min_area {
                continue;
            }
            for (k, c) in s.iter().enumerate() {
                if k == 0 || -loop_area(c) > min_area {
                    loops.push(simplify_closed(c, tol));
                }
            }
        }
        let refs: Vec<&[Point]> = loops.iter().map(|l| l.as_slice()).collect();
        self.run(&refs, &[], OverlayRule::Subject, FillRule::NonZero)
    }

    pub fn union(&self, a: &AreaRegion, b: &AreaRegion) -> AreaRegion {
        self.boolean(a, b, BooleanOp::Union)
    }

    pub fn intersection(&self, a: &AreaRegion, b: &AreaRegion) -> AreaRegion {
        self.boolean(a, b, BooleanOp::Intersection)
    }

    pub fn difference(&self, a: &AreaRegion, b: &AreaRegion) -> AreaRegion {
        self.boolean(a, b, BooleanOp::Difference)
    }
}

/// Regularized boolean of two regions in the frame of `poly`.
pub fn region_boolean(poly: &SimplePolygon, a: &AreaRegion, b: &AreaRegion, op: BooleanOp) -> AreaRegion {
    RegionKernel::new(poly).boolean(a, b, op)
}

/// Douglas-Peucker on a closed contour, keeping the vertex farthest from
/// vertex 0 as a second anchor.
pub(crate) fn simplify_closed(c: &[Point], tol: f64) -> Vec<Point> {
    let n = c.len();
    if n <= 8 {
        return c.to_vec();
    }
    let far = (1..n).max_by(|&i, &j| c[0].dist(c[i]).total_cmp(&c[0].dist(c[j]))).unwrap_or(n / 2);
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[far] = true;
    let mut stack = vec![(0usize, far), (far, n)];
    while let Some((i, j)) = stack.pop() {
        let (a, b) = (c[i], c[j % n]);
        let mut best = (0.0, 0usize);
        for k in i + 1..j {
            let d = super::point_segment_distance(c[k], a, b);
            if d > best.0 {
                best = (d, k);
            }
        }
        if best.0 > tol {
            keep[best.1] = true;
            stack.push((i, best.1));
            stack.push((best.1, j));
        }
    }
    c.iter().zip(keep).filter(|&(_, k)| k).map(|(&p, _)| p).collect()
}

impl AreaRegion {
    pub fn empty() -> Self {
        Self { shapes: Vec::new() }
    }

    fn from_shapes(shapes: Vec<Vec<Vec<Point>>>) -> Self {
        let shapes = shapes
            .into_iter()
            .filter(|s| !s.is_empty() && s[0].len() >= 3 && loop_area(&s[0]).abs() > 0.0)
            .collect();
        Self { shapes }
    }

    /// The closed polygon as a region.
    pub fn from_polygon(poly: &SimplePolygon) -> Self {
        Self { shapes: vec![vec![poly.vertices().to_vec()]] }
    }

    /// A single counter-clockwise simple loop, taken as is.
    pub fn from_simple_loop(mut pts: Vec<Point>) -> Self {
        if pts.len() < 3 {
            return Self::empty();
        }
        if loop_area(&pts) < 0.0 {
            pts.reverse();
        }
        Self { shapes: vec![vec![pts]] }
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn shapes(&self) -> &[Vec<Vec<Point>>] {
        &self.shapes
    }

    pub fn contours(&self) -> impl Iterator<Item = &[Point]> + '_ {
        self.shapes.iter().flat_map(|s| s.iter().map(|c| c.as_slice()))
    }

    /// Boundary loops as closed polylines (outer loops and holes).
    pub fn loops(&self) -> Vec<Polyline> {
        self.contours().map(|c| Polyline::closed(c.to_vec())).collect()
    }

    pub fn area(&self) -> f64 {
        self.contours().map(loop_area).sum()
    }

    /// One region per connected component (outer loop plus its holes).
    pub fn components(&self) -> Vec<AreaRegion> {
        self.shapes.iter().map(|s| AreaRegion { shapes: vec![s.clone()] }).collect()
    }

    pub fn boundary_segments(&self) -> Vec<(Point, Point)> {
        let mut out = Vec::new();
        for c in self.contours() {
            let n = c.len();
            for i in 0..n {
                out.push((c[i], c[(i + 1) % n]));
            }
        }
        out
    }

    pub fn on_boundary(&self, p: Point, eps: f64) -> bool {
        self.contours().any(|c| {
            let n = c.len();
            (0..n).any(|i| on_segment(p, c[i], c[(i + 1) % n], eps))
        })
    }

    /// Even-odd interior test; boundary points within `eps` count as inside.
    pub fn contains(&self, p: Point, eps: f64) -> bool {
        if self.is_empty() {
            return false;
        }
        (eps > 0.0 && self.on_boundary(p, eps)) || self.contains_strict(p)
    }

    pub fn contains_strict(&self, p: Point) -> bool {
        let mut inside = false;
        for c in self.contours() {
            let n = c.len();
            for i in 0..n {
                let (a, b) = (c[i], c[(i + 1) % n]);
                if (a.y > p.y) != (b.y > p.y) {
                    let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                    if p.x < x {
                        inside = !inside;
                    }
                }
            }
        }
        inside
    }

    /// Euclidean distance from `p` to the region (0 inside).
    pub fn distance_to(&self, p: Point) -> f64 {
        if self.contains_strict(p) {
            return 0.0;
        }
        self.boundary_segments()
            .into_iter()
            .map(|(a, b)| super::point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn bbox(&self) -> Option<(Point, Point)> {
        let mut it = self.contours().flat_map(|c| c.iter());
        let first = *it.next()?;
        let (mut lo, mut hi) = (first, first);
        for p in it {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        Some((lo, hi))
    }

    /// Component with the largest area.
    pub fn largest_component(&self) -> Option<AreaRegion> {
        self.components()
            .into_iter()
            .max_by(|a, b| a.area().total_cmp(&b.area()))
    }

    /// Area centroid (of all shapes together).
    pub fn centroid(&self) -> Option<Point> {
        let mut a = 0.0;
        let mut cx = 0.0;
        let mut cy = 0.0;
        for c in self.contours() {
            let n = c.len();
            for i in 0..n {
                let (p, q) = (c[i], c[(i + 1) % n]);
                let w = p.cross(q);
                a += w;
                cx += (p.x + q.x) * w;
                cy += (p.y + q.y) * w;
            }
        }
        (a != 0.0).then(|| Point::new(cx / (3.0 * a), cy / (3.0 * a)))
    }

    /// A point strictly inside the region: the centroid when it is inside,
    /// otherwise the middle of the widest horizontal chord through the
    /// vertical middle of the bounding box.
    pub fn interior_point(&self) -> Option<Point> {
        let c = self.centroid()?;
        if self.contains_strict(c) && !self.on_boundary(c, 0.0) {
            return Some(c);
        }
        let (lo, hi) = self.bbox()?;
        let mut best: Option<(f64, Point)> = None;
        for k in 1..8 {
            let y = lo.y + (hi.y - lo.y) * (k as f64) / 8.0;
            let mut xs: Vec<f64> = Vec::new();
            for cont in self.contours() {
                let n = cont.len();
                for i in 0..n {
                    let (a, b) = (cont[i], cont[(i + 1) % n]);
                    if (a.y > y) != (b.y > y) {
                        xs.push(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
                    }
                }
            }
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks(2) {
                if pair.len() == 2 {
                    let w = pair[1] - pair[0];
                    if best.map_or(true, |(bw, _)| w > bw) {
                        best = Some((w, Point::new(0.5 * (pair[0] + pair[1]), y)));
                    }
                }
            }
        }
        best.map(|(_, p)| p)
    }

    /// Same region scaled about the origin.
    pub fn scaled(&self, k: f64) -> AreaRegion {
        AreaRegion {
            shapes: self.shapes.iter().map(|s| s.iter().map(|c| c.iter().map(|&p| p * k).collect()).collect()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::validate_polygon;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point> {
        vec![Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)]
    }

    fn kernel() -> RegionKernel {
        RegionKernel::new(&validate_polygon(&rect(-1.0, -1.0, 3.0, 3.0)).unwrap())
    }

    #[test]
    fn basic_booleans() {
        let k = kernel();
        let a = AreaRegion::from_simple_loop(rect(0.0, 0.0, 1.0, 1.0));
        let b = AreaRegion::from_simple_loop(rect(0.5, 0.0, 1.5, 1.0));
        let i = k.intersection(&a, &b);
        assert!((i.area() - 0.5).abs() < 1e-9);
        let u = k.union(&a, &b);
        assert!((u.area() - 1.5).abs() < 1e-9);
        assert!((k.intersection(&a, &a).area() - 1.0).abs() < 1e-9);
        let far = AreaRegion::from_simple_loop(rect(2.0, 2.0, 2.5, 2.5));
        assert!(k.intersection(&a, &far).is_empty());
        assert_eq!(k.union(&a, &far).components().len(), 2);
        let d = k.difference(&a, &b);
        assert!((d.area() - 0.5).abs() < 1e-9);
        // Touching squares: regularized intersection is empty.
        let t = AreaRegion::from_simple_loop(rect(1.0, 0.0, 2.0, 1.0));
        assert!(k.intersection(&a, &t).is_empty());
    }

    #[test]
    fn holes_and_points() {
        let k = kernel();
        let outer = AreaRegion::from_simple_loop(rect(0.0, 0.0, 2.0, 2.0));
        let inner = AreaRegion::from_simple_loop(rect(0.5, 0.5, 1.5, 1.5));
        let ring = k.difference(&outer, &inner);
        assert!((ring.area() - 3.0).abs() < 1e-9);
        assert_eq!(ring.components().len(), 1);
        assert!(!ring.contains(Point::new(1.0, 1.0), 0.0));
        assert!(ring.contains(Point::new(0.25, 1.0), 0.0));
        let ip = ring.interior_point().unwrap();
        assert!(ring.contains_strict(ip));
    }
}
