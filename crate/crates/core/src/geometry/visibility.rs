use alloc::vec::Vec;

use super::{line_intersection_param, orient, point_segment_distance, segments_cross_properly, Orientation, Point, SimplePolygon};
use crate::math;

/// Whether the closed segment `ab` lies in the closed polygon. Grazing the
/// boundary counts as visible.
pub fn point_visibility(poly: &SimplePolygon, a: Point, b: Point) -> bool {
    let eps = poly.eps();
    let len = a.dist(b);
    if len <= eps {
        return true;
    }
    let mut touches: Vec<f64> = Vec::with_capacity(8);
    touches.push(0.0);
    touches.push(1.0);
    let vs = poly.vertices();
    for (i, &c) in vs.iter().enumerate() {
        let d = vs[(i + 1) % vs.len()];
        // Running along an edge is grazing, whatever rounding says about
        // crossing it.
        let along = point_segment_distance(a, c, d) <= eps && point_segment_distance(b, c, d) <= eps
            || point_segment_distance(c, a, b) <= eps && point_segment_distance(d, a, b) <= eps;
        if !along && segments_cross_properly(a, b, c, d) {
            let t = line_intersection_param(a, b, c, d).unwrap_or(0.5);
            let s = line_intersection_param(c, d, a, b).unwrap_or(0.5);
            let el = c.dist(d);
            let near_end = t * len <= eps || (1.0 - t) * len <= eps;
            let near_vertex = s * el <= eps || (1.0 - s) * el <= eps;
            if !near_end && !near_vertex {
                return false;
            }
            touches.push(t.clamp(0.0, 1.0));
        }
    }
    for &c in vs {
        if orient(a, b, c) == Orientation::Collinear || point_segment_distance(c, a, b) <= eps {
            let t = (c - a).dot(b - a) / (len * len);
            if (0.0..=1.0).contains(&t) {
                touches.push(t);
            }
        }
    }
    touches.sort_by(f64::total_cmp);
    touches.dedup_by(|x, y| (*x - *y) * len <= eps);
    touches.windows(2).all(|w| poly.contains(a.lerp(b, 0.5 * (w[0] + w[1])), eps))
}

/// First boundary hit of the ray `origin + t·dir` with `t > t_min`.
/// Returns the ray parameter and the edge index.
pub fn ray_first_hit(poly: &SimplePolygon, origin: Point, dir: Point, t_min: f64) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    let n = poly.len();
    for i in 0..n {
        let (c, d) = poly.edge(i);
        let e = d - c;
        let den = dir.cross(e);
        if den == 0.0 {
            continue;
        }
        let w = c - origin;
        let t = w.cross(e) / den;
        let s = w.cross(dir) / den;
        if t > t_min && (-1e-12..=1.0 + 1e-12).contains(&s) && best.map_or(true, |(bt, _)| t < bt) {
            best = Some((t, i));
        }
    }
    best
}

/// Polygonal approximation of `disk(center, radius) ∩ Vis(center)` as a
/// star-shaped loop around `center`. Arcs are inscribed with chord error at
/// most `arc_tol`. Returns an empty vector when the region has no area.
pub fn star_region(poly: &SimplePolygon, center: Point, radius: f64, arc_tol: f64) -> Vec<Point> {
    star_sector(poly, center, radius, arc_tol, None)
}

/// Like [`star_region`] but limited to directions in `[from, to]`
/// (radians, `from < to ≤ from + 2π`). The loop then starts at `center`.
pub fn star_sector(
    poly: &SimplePolygon,
    center: Point,
    radius: f64,
    arc_tol: f64,
    range: Option<(f64, f64)>,
) -> Vec<Point> {
    let eps = poly.eps();
    if radius <= eps {
        return Vec::new();
    }
    let mut raw: Vec<f64> = Vec::new();
    for &v in poly.vertices() {
        if v.dist(center) > eps {
            raw.push(math::atan2(v.y - center.y, v.x - center.x));
        }
    }
    for (c, d) in poly.edges() {
        for p in circle_segment_crossings(center, radius, c, d) {
            raw.push(math::atan2(p.y - center.y, p.x - center.x));
        }
    }
    let mut angles: Vec<f64> = Vec::new();
    match range {
        None => {
            angles.extend(raw.iter().map(|&a| math::wrap_angle(a)));
            angles.sort_by(f64::total_cmp);
            angles.dedup_by(|x, y| (*x - *y).abs() <= 1e-13);
            if angles.is_empty() {
                angles.push(0.0);
            }
            let first = angles[0];
            angles.push(first + math::TAU);
        }
        Some((from, to)) => {
            angles.push(from);
            angles.push(to);
            for a in raw {
                let rel = math::wrap_angle(a - from);
                if rel > 0.0 && from + rel < to {
                    angles.push(from + rel);
                }
            }
            angles.sort_by(f64::total_cmp);
            angles.dedup_by(|x, y| (*x - *y).abs() <= 1e-13);
        }
    }

    // A center on the boundary (within eps) would otherwise hit its own
    // edges first.
    let tiny = if poly.on_boundary(center, eps) { 10.0 * eps } else { eps * 1e-3 };
    let mut out: Vec<Point> = Vec::new();
    if range.is_some() {
        out.push(center);
    }
    let mut any_area = false;
    for w in angles.windows(2) {
        let (a0, a1) = (w[0], w[1]);
        if a1 - a0 <= 1e-13 {
            continue;
        }
        let mid = 0.5 * (a0 + a1);
        let dir = Point::from_angle(mid);
        let hit = ray_first_hit(poly, center, dir, tiny);
        let reach = hit.map_or(radius, |(t, _)| t.min(radius));
        if !poly.contains(center + dir * (0.5 * reach), eps * 0.01) {
            // Ray leaves the polygon straight away.
            push_point(&mut out, center);
            continue;
        }
        any_area = true;
        match hit {
            Some((t, e)) if t < radius => {
                let (c, d) = poly.edge(e);
                for ang in [a0, a1] {
                    let u = Point::from_angle(ang);
                    let tt = line_intersection_param(center, center + u, c, d).unwrap_or(t);
                    push_point(&mut out, center + u * tt.clamp(0.0, radius));
                }
            }
            _ => {
                let span = a1 - a0;
                let max_step = if arc_tol >= radius {
                    math::PI / 2.0
                } else {
                    (2.0 * math::acos(1.0 - arc_tol / radius)).min(math::PI / 2.0)
                };
                let steps = math::ceil(span / max_step).max(1.0) as usize;
                for k in 0..=steps {
                    let ang = a0 + span * (k as f64) / (steps as f64);
                    push_point(&mut out, center + Point::from_angle(ang) * radius);
                }
            }
        }
    }
    if !any_area || out.len() < 3 {
        return Vec::new();
    }
    if out.len() > 1 && out[0].dist(out[out.len() - 1]) <= 1e-15 * (1.0 + radius) {
        out.pop();
    }
    out
}

fn push_point(out: &mut Vec<Point>, p: Point) {
    if out.last().map_or(true, |q| q.dist(p) > 0.0) {
        out.push(p);
    }
}

/// Points where segment `cd` crosses the circle.
pub(crate) fn circle_segment_crossings(center: Point, radius: f64, c: Point, d: Point) -> Vec<Point> {
    let e = d - c;
    let f = c - center;
    let a = e.norm2();
    let b = 2.0 * f.dot(e);
    let cc = f.norm2() - radius * radius;
    let disc = b * b - 4.0 * a * cc;
    let mut out = Vec::new();
    if a == 0.0 || disc < 0.0 {
        return out;
    }
    let sq = math::sqrt(disc);
    for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
        if (0.0..=1.0).contains(&t) {
            out.push(c + e * t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::validate_polygon;

    fn l_poly() -> SimplePolygon {
        let v: Vec<Point> = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]
            .iter()
            .map(|&p| p.into())
            .collect();
        validate_polygon(&v).unwrap()
    }

    fn shoelace(v: &[Point]) -> f64 {
        let n = v.len();
        (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>() * 0.5
    }

    #[test]
    fn visibility_cases() {
        let l = l_poly();
        // The diagonal through the reflex corner only grazes it.
        assert!(point_visibility(&l, Point::new(1.5, 0.5), Point::new(0.5, 1.5)));
        assert!(!point_visibility(&l, Point::new(1.5, 0.5), Point::new(0.5, 1.7)));
        assert!(!point_visibility(&l, Point::new(1.6, 0.5), Point::new(0.5, 1.5)));
        assert!(point_visibility(&l, Point::new(1.5, 0.5), Point::new(0.5, 0.5)));
        // Grazing the reflex corner.
        assert!(point_visibility(&l, Point::new(2.0, 0.0), Point::new(0.0, 2.0)));
        assert!(point_visibility(&l, Point::new(1.5, 1.0), Point::new(0.5, 1.0)));
        // Along the boundary.
        assert!(point_visibility(&l, Point::new(2.0, 1.0), Point::new(1.0, 1.0)));
        // Outside chord between boundary points.
        assert!(!point_visibility(&l, Point::new(2.0, 1.0), Point::new(1.0, 2.0)));
        assert!(point_visibility(&l, Point::new(0.3, 0.3), Point::new(0.3, 0.3)));
    }

    #[test]
    fn star_region_areas() {
        let sq: Vec<Point> = [(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)].iter().map(|&p| p.into()).collect();
        let sq = validate_polygon(&sq).unwrap();
        let disk = star_region(&sq, Point::new(2.0, 2.0), 1.0, 1e-9);
        assert!((shoelace(&disk) - math::PI).abs() < 1e-6);
        let whole = star_region(&sq, Point::new(2.0, 2.0), 10.0, 1e-6);
        assert!((shoelace(&whole) - 16.0).abs() < 1e-9);
        let corner = star_region(&sq, Point::new(0.0, 0.0), 1.0, 1e-9);
        assert!((shoelace(&corner) - math::PI / 4.0).abs() < 1e-6);
        let edge = star_region(&sq, Point::new(2.0, 0.0), 1.0, 1e-9);
        assert!((shoelace(&edge) - math::PI / 2.0).abs() < 1e-6);
        // From the reflex corner of the L everything is visible.
        let l = l_poly();
        let all = star_region(&l, Point::new(1.0, 1.0), 5.0, 1e-6);
        assert!((shoelace(&all) - 3.0).abs() < 1e-9);
        // From (1.5, 0.5) the top arm is partly hidden.
        let part = shoelace(&star_region(&l, Point::new(1.5, 0.5), 5.0, 1e-6));
        assert!(part < 3.0 - 0.1 && part > 2.0);
    }
}
