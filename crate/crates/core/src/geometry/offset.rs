use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::visibility::star_sector;
use super::{ray_first_hit, AreaRegion, GeodesicMap, Point, Polyline, RegionKernel, SimplePolygon};
use crate::math;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OffsetError {
    /// Nothing of the polygon on the requested side lies at the offset
    /// distance: the whole side is within reach.
    OffsetEscapesPolygon,
    NonPositiveDistance,
}

impl fmt::Display for OffsetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OffsetError::OffsetEscapesPolygon => f.write_str("offset level set is empty inside the polygon"),
            OffsetError::NonPositiveDistance => f.write_str("offset distance must be positive"),
        }
    }
}

impl core::error::Error for OffsetError {}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OffsetOptions {
    /// Maximum chord error of discretized arcs (absolute length).
    pub arc_tol: f64,
}

impl OffsetOptions {
    /// Default tolerance: 1e-6 of the polygon diameter.
    pub fn for_polygon(poly: &SimplePolygon) -> Self {
        Self { arc_tol: 1e-6 * poly.diameter() }
    }
}

// Shares of `arc_tol` spent on arc chords and on each of the two thinning
// passes (source contours, result cleanup); they sum below one.
const CHORD_SHARE: f64 = 0.5;
const THIN_SHARE: f64 = 0.2;

/// Radians added on both sides of a corner sector.
const CONE_OVERLAP: f64 = 1e-6;

/// Geodesic neighbourhood of a protected area inside the polygon.
#[derive(Clone, Debug)]
pub struct GeodesicBuffer {
    pub distance: f64,
    /// Points within `distance` of the protected area, including it.
    pub reach: AreaRegion,
    /// `reach` minus the protected area.
    pub region: AreaRegion,
    /// Boundary chains of `region` lying strictly inside the polygon and off
    /// the protected area: the offset level set.
    pub s_ext: Vec<Polyline>,
    /// True when the level set is empty.
    pub saturated: bool,
}

/// Loop over segment `ab` sweeping its `normal` side up to `d`, cut where
/// perpendiculars hit the polygon boundary.
fn perpendicular_envelope(poly: &SimplePolygon, a: Point, b: Point, normal: Point, d: f64) -> Vec<Point> {
    let len = a.dist(b);
    let eps = poly.eps();
    if len <= eps {
        return Vec::new();
    }
    let u = (b - a) * (1.0 / len);
    let local = |p: Point| ((p - a).dot(u), (p - a).dot(normal));
    let mut cuts: Vec<f64> = vec![0.0, len];
    let n = poly.len();
    for i in 0..n {
        let (p, q) = poly.edge(i);
        let (pu, pv) = local(p);
        let (qu, qv) = local(q);
        if pu > 0.0 && pu < len && pv > -eps {
            cuts.push(pu);
        }
        for level in [0.0, d] {
            if (pv - level) * (qv - level) < 0.0 {
                let t = (level - pv) / (qv - pv);
                let x = pu + t * (qu - pu);
                if x > 0.0 && x < len {
                    cuts.push(x);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= eps * 1e-3);
    let tiny = eps * 1e-3;
    // Heights at the left and right ends of each interval.
    let mut tops: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(cuts.len());
    let mut any = false;
    for w in cuts.windows(2) {
        let (u0, u1) = (w[0], w[1]);
        if u1 - u0 <= 0.0 {
            continue;
        }
        let base = a + u * (0.5 * (u0 + u1));
        let hit = ray_first_hit(poly, base, normal, tiny);
        let reach = hit.map_or(d, |(t, _)| t.min(d));
        if !poly.contains(base + normal * (0.5 * reach), eps * 0.01) {
            tops.push((u0, 0.0, u1, 0.0));
            continue;
        }
        any = true;
        match hit {
            Some((t, e)) if t < d => {
                let (p, q) = poly.edge(e);
                let (pu, pv) = local(p);
                let (qu, qv) = local(q);
                let height = |x: f64| {
                    if (qu - pu).abs() <= f64::EPSILON * len {
                        t
                    } else {
                        pv + (x - pu) / (qu - pu) * (qv - pv)
                    }
                };
                tops.push((u0, height(u0).clamp(0.0, d), u1, height(u1).clamp(0.0, d)));
            }
            _ => tops.push((u0, d, u1, d)),
        }
    }
    if !any {
        return Vec::new();
    }
    let mut out = vec![a, b];
    for &(u0, h0, u1, h1) in tops.iter().rev() {
        for (x, h) in [(u1, h1), (u0, h0)] {
            let p = a + u * x + normal * h;
            if out.last().map_or(true, |l| l.dist(p) > 0.0) {
                out.push(p);
            }
        }
    }
    out
}

/// Outward normal cone at a convex corner `b` of a loop `a -> b -> c`
/// whose interior lies on the left; `None` at reflex or straight corners.
fn corner_cone(a: Point, b: Point, c: Point) -> Option<(f64, f64)> {
    let e0 = (b - a).normalized();
    let e1 = (c - b).normalized();
    if e0.cross(e1) <= 0.0 {
        return None;
    }
    // Outward normals are to the right of each directed edge.
    let n0 = Point::new(e0.y, -e0.x);
    let n1 = Point::new(e1.y, -e1.x);
    let from = math::atan2(n0.y, n0.x);
    let mut to = math::atan2(n1.y, n1.x);
    while to <= from {
        to += math::TAU;
    }
    Some((from, to))
}

struct Pieces {
    loops: Vec<Vec<Point>>,
}

impl Pieces {
    /// Stores the loop counter-clockwise so non-zero filling unions it.
    fn push(&mut self, mut l: Vec<Point>) {
        if l.len() < 3 {
            return;
        }
        let n = l.len();
        let twice: f64 = (0..n).map(|i| l[i].cross(l[(i + 1) % n])).sum();
        if twice < 0.0 {
            l.reverse();
        }
        self.loops.push(l);
    }
}

fn reflex_pieces(geo: &GeodesicMap, segs: &[(Point, Point)], inside: impl Fn(Point) -> bool, d: f64, opts: &OffsetOptions, out: &mut Pieces) {
    let poly = geo.polygon();
    for &w in geo.reflex_points() {
        if inside(w) {
            continue;
        }
        let dw = geo.distance_to_segments(w, segs);
        if dw < d {
            out.push(star_sector(poly, w, d - dw, CHORD_SHARE * opts.arc_tol, None));
        }
    }
}

/// Geodesic `d`-neighbourhood of `protected` inside the polygon, with the
/// critical strip around it and its outer level set.
pub fn geodesic_buffer(
    geo: &GeodesicMap,
    kernel: &RegionKernel,
    protected: &AreaRegion,
    d: f64,
    opts: &OffsetOptions,
) -> GeodesicBuffer {
    let poly = geo.polygon();
    let eps = poly.eps();
    let whole = AreaRegion::from_polygon(poly);
    if protected.is_empty() || d <= 0.0 {
        return GeodesicBuffer {
            distance: d,
            reach: protected.clone(),
            region: AreaRegion::empty(),
            s_ext: Vec::new(),
            saturated: protected.is_empty(),
        };
    }
    let mut pieces = Pieces { loops: Vec::new() };
    let segs = protected.boundary_segments();
    // Contours made of many short chords (arcs inherited from other
    // regions) give thousands of overlapping pieces; thinning them within the
    // arc tolerance keeps the piece count proportional to the real corners.
    for c in protected.contours().map(|c| super::region::simplify_closed(c, THIN_SHARE * opts.arc_tol)) {
        let c = c.as_slice();
        let m = c.len();
        for i in 0..m {
            let (a, b, nx) = (c[i], c[(i + 1) % m], c[(i + 2) % m]);
            let mid = a.midpoint(b);
            if !poly.on_boundary(mid, 10.0 * eps) {
                let e = (b - a).normalized();
                pieces.push(perpendicular_envelope(poly, a, b, Point::new(e.y, -e.x), d));
            }
            if let Some((from, to)) = corner_cone(a, b, nx) {
                // Overlap the neighbouring envelopes instead of abutting them,
                // so grid snapping cannot leave a slit along the shared edge.
                let (from, to) = (from - CONE_OVERLAP, to + CONE_OVERLAP);
                pieces.push(star_sector(poly, b, d, CHORD_SHARE * opts.arc_tol, Some((from, to))));
            }
        }
    }
    reflex_pieces(geo, &segs, |w| protected.contains_strict(w) && !protected.on_boundary(w, eps), d, opts, &mut pieces);
    let mut all: Vec<&AreaRegion> = vec![protected];
    let grown = kernel.union_loops(&pieces.loops);
    all.push(&grown);
    let reach = kernel.intersection(&kernel.union_all(all), &whole);
    // Overlapping discretized arcs leave zig-zag chains of tiny edges and
    // pinhole gaps; both are below the arc tolerance and are removed here.
    let reach = kernel.clean(&reach, THIN_SHARE * opts.arc_tol, 1e-8 * poly.area());
    let region = kernel.difference(&reach, protected);
    let s_ext = level_chains(&region, |p| poly.on_boundary(p, 10.0 * eps) || protected.on_boundary(p, 10.0 * eps));
    let saturated = s_ext.is_empty();
    GeodesicBuffer { distance: d, reach, region, s_ext, saturated }
}

/// Offset of curve `c` at geodesic distance `d` on the side `side_region`:
/// the chains of the level set lying inside that side.
pub fn geodesic_offset(
    geo: &GeodesicMap,
    kernel: &RegionKernel,
    c: &Polyline,
    d: f64,
    side_region: &AreaRegion,
    opts: &OffsetOptions,
) -> Result<Vec<Polyline>, OffsetError> {
    if d <= 0.0 {
        return Err(OffsetError::NonPositiveDistance);
    }
    let poly = geo.polygon();
    let eps = poly.eps();
    let segs: Vec<(Point, Point)> = c.segments().collect();
    let mut pieces = Pieces { loops: Vec::new() };
    for &(a, b) in &segs {
        let e = (b - a).normalized();
        for normal in [e.perp(), -e.perp()] {
            pieces.push(perpendicular_envelope(poly, a, b, normal, d));
        }
    }
    for &p in &c.points {
        pieces.push(star_sector(poly, p, d, opts.arc_tol, None));
    }
    reflex_pieces(geo, &segs, |_| false, d, opts, &mut pieces);
    let grown = kernel.union_loops(&pieces.loops);
    let near = kernel.intersection(&kernel.intersection(&grown, &AreaRegion::from_polygon(poly)), side_region);
    let chains = level_chains(&near, |p| {
        poly.on_boundary(p, 10.0 * eps) || side_region.on_boundary(p, 10.0 * eps) || c.distance_to(p) <= 10.0 * eps
    });
    if chains.is_empty() {
        Err(OffsetError::OffsetEscapesPolygon)
    } else {
        Ok(chains)
    }
}

/// Maximal runs of boundary segments whose midpoints are not excluded.
pub(crate) fn level_chains(region: &AreaRegion, excluded: impl Fn(Point) -> bool) -> Vec<Polyline> {
    let mut out = Vec::new();
    for c in region.contours() {
        let m = c.len();
        let keep: Vec<bool> = (0..m).map(|i| !excluded(c[i].midpoint(c[(i + 1) % m]))).collect();
        if keep.iter().all(|&k| k) {
            out.push(Polyline::closed(c.to_vec()));
            continue;
        }
        let Some(start) = (0..m).find(|&i| !keep[i]) else { continue };
        let mut run: Vec<Point> = Vec::new();
        for k in 1..=m {
            let i = (start + k) % m;
            if keep[i] {
                if run.is_empty() {
                    run.push(c[i]);
                }
                run.push(c[(i + 1) % m]);
            } else if !run.is_empty() {
                out.push(Polyline::open(core::mem::take(&mut run)));
            }
        }
        if !run.is_empty() {
            out.push(Polyline::open(run));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::validate_polygon;

    fn poly(v: &[(f64, f64)]) -> SimplePolygon {
        let p: Vec<Point> = v.iter().map(|&p| p.into()).collect();
        validate_polygon(&p).unwrap()
    }

    #[test]
    fn square_buffer_area() {
        let sq = poly(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]);
        let geo = GeodesicMap::new(&sq);
        let k = RegionKernel::new(&sq);
        let s = AreaRegion::from_simple_loop(vec![
            Point::new(4.0, 4.0),
            Point::new(6.0, 4.0),
            Point::new(6.0, 6.0),
            Point::new(4.0, 6.0),
        ]);
        let opts = OffsetOptions { arc_tol: 1e-8 };
        let b = geodesic_buffer(&geo, &k, &s, 1.0, &opts);
        let expect = 4.0 + 8.0 + math::PI;
        assert!((b.reach.area() - expect).abs() < 1e-6, "{}", b.reach.area());
        assert!((b.region.area() - (expect - 4.0)).abs() < 1e-6);
        assert!(!b.saturated);
        assert_eq!(b.s_ext.len(), 1);
        for pl in &b.s_ext {
            for &p in &pl.points {
                assert!((s.distance_to(p) - 1.0).abs() < 1e-7);
            }
        }
        let big = geodesic_buffer(&geo, &k, &s, 20.0, &opts);
        assert!(big.saturated);
        assert!((big.reach.area() - 100.0).abs() < 1e-7);
    }

    #[test]
    fn vertical_segment_offset() {
        let sq = poly(&[(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)]);
        let geo = GeodesicMap::new(&sq);
        let k = RegionKernel::new(&sq);
        let c = Polyline::open(vec![Point::new(2.0, 1.0), Point::new(2.0, 3.0)]);
        let side = AreaRegion::from_polygon(&sq);
        let opts = OffsetOptions { arc_tol: 1e-7 };
        let chains = geodesic_offset(&geo, &k, &c, 0.25, &side, &opts).unwrap();
        assert_eq!(chains.len(), 1);
        let total: f64 = chains.iter().map(|p| p.length()).sum();
        assert!((total - (4.0 + 2.0 * math::PI * 0.25)).abs() < 1e-5);
        assert_eq!(
            geodesic_offset(&geo, &k, &c, 100.0, &side, &opts),
            Err(OffsetError::OffsetEscapesPolygon)
        );
    }

    #[test]
    fn wraps_reflex_corner() {
        let l = poly(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]);
        let geo = GeodesicMap::new(&l);
        let k = RegionKernel::new(&l);
        // Protected: the right end of the bottom arm.
        let s = AreaRegion::from_simple_loop(vec![
            Point::new(1.5, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.5, 1.0),
        ]);
        let opts = OffsetOptions { arc_tol: 1e-7 };
        let b = geodesic_buffer(&geo, &k, &s, 1.0, &opts);
        assert!(!b.saturated);
        let segs = s.boundary_segments();
        for pl in &b.s_ext {
            for i in 0..=50 {
                let p = pl.point_at(i as f64 / 50.0);
                let d = geo.distance_to_segments(p, &segs);
                assert!((d - 1.0).abs() < 1e-6, "{p:?} {d}");
            }
        }
        // Part of the top arm is reached around the corner.
        assert!(b.reach.contains(Point::new(0.9, 1.2), 0.0));
        assert!(!b.reach.contains(Point::new(0.9, 1.6), 0.0));
    }
}
