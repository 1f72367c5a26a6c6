//! Largest intruder/guard speed ratio for which the reactive strategy keeps
//! every triangle covered.
//!
//! Two independent routes:
//!
//! * constructive: for each non-safe triangle, minimise over its points the
//!   largest ratio at which some cover option still holds. An option held by
//!   a guard moving away from a protected area `S` holds while
//!   `dist(x, S) ≥ ratio · length`, so its threshold is `dist(x, S) / length`.
//!   Distances are exact geodesics; the minimisation is a trust-region linear
//!   programme over the distance gradients.
//! * bisection on the witness predicate, which only uses region booleans.

use alloc::vec;
use alloc::vec::Vec;

use crate::curves::{CriticalRegion, CurveError, GuardStrategy, Strategy};
use crate::geometry::{Anchors, AreaRegion, GeodesicPath, Point, SetDistance, TriId};
use crate::guards::{Classification, CoverOption, Guard, GuardType, TriangleClass};
use crate::reachability::{uncovered_above, uncovered_region};
use crate::scenario::Environment;

/// Closest pair between the two unsafe sides of one guard.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCertificate {
    pub guard: usize,
    pub ratio: f64,
    pub path: GeodesicPath,
}

/// Ratio at which a triangle first loses coverage, with the point where it
/// happens and the paths to the protected areas that pin it.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleRatio {
    pub triangle: TriId,
    pub ratio: f64,
    pub point: Point,
    pub options: Vec<CoverOption>,
    /// Options attaining the maximum at `point`.
    pub active: Vec<CoverOption>,
    pub paths: Vec<GeodesicPath>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpeedRatioResult {
    /// Bound from guards with unsafe zones at both endpoints.
    pub r_unsafe_pairs: f64,
    pub pairs: Vec<PairCertificate>,
    pub triangles: Vec<TriangleRatio>,
    /// Constructive maximum ratio (infinite when unbounded).
    pub r_max: f64,
    /// Bisection estimate on the witness predicate.
    pub r_bis: f64,
    /// Bisection brackets `(lo, hi)` after each step.
    pub bracket: Vec<(f64, f64)>,
    /// The two estimates differ by more than 1e-4 relative.
    pub discrepancy: bool,
    /// The uncovered area just above the threshold is tiny: the active
    /// constraint is (nearly) tangent.
    pub degenerate: bool,
}

/// Upper end of the ratio bracket: past it every region saturates.
pub fn ratio_upper_bound(env: &Environment, guards: &[Guard]) -> f64 {
    let l = guards.iter().map(|g| g.length).fold(f64::INFINITY, f64::min);
    if l.is_finite() && l > 0.0 {
        env.poly.diameter() / l
    } else {
        1.0
    }
}

/// Value of one cover option at `x`: the largest ratio at which it still
/// covers `x`, with its gradient and realizing path.
struct OptionValue {
    value: f64,
    grad: Point,
    path: Option<GeodesicPath>,
}

impl OptionValue {
    fn constant(value: f64) -> Self {
        Self { value, grad: Point::default(), path: None }
    }
}

fn distance_value(env: &Environment, an: &Anchors, region: &CriticalRegion, length: f64) -> OptionValue {
    let x = an.origin();
    let segs = region.s_int_segments();
    let Some(SetDistance { distance, path }) = env.geo.closest_with_anchors(an, &segs) else {
        return OptionValue::constant(f64::INFINITY);
    };
    let grad = match path.points.get(1) {
        Some(&p1) if p1.dist(x) > 0.0 => (x - p1) * (1.0 / (p1.dist(x) * length)),
        _ => Point::default(),
    };
    OptionValue { value: distance / length, grad, path: Some(path) }
}

/// `probe` decides protected-area membership; it is `x` pulled slightly into
/// the triangle so values on triangle edges are limits from inside.
fn option_value(env: &Environment, an: &Anchors, probe: Point, gs: &GuardStrategy, length: f64, end: usize) -> OptionValue {
    let x = probe;
    if let GuardType::Zero { end: pinned, .. } = gs.kind {
        return OptionValue::constant(if pinned == end { f64::INFINITY } else { 0.0 });
    }
    match (&gs.regions[0], &gs.regions[1]) {
        (None, None) => OptionValue::constant(if end == 0 { f64::INFINITY } else { 0.0 }),
        (Some(r), None) | (None, Some(r)) => {
            if r.end == end {
                OptionValue::constant(if r.inside(env, x) { f64::INFINITY } else { 0.0 })
            } else if r.inside(env, x) {
                OptionValue::constant(0.0)
            } else {
                distance_value(env, an, r, length)
            }
        }
        (Some(r0), Some(r1)) => {
            let (own, other) = if end == 0 { (r0, r1) } else { (r1, r0) };
            if !own.inside(env, x) || other.inside(env, x) {
                OptionValue::constant(0.0)
            } else {
                distance_value(env, an, other, length)
            }
        }
    }
}

struct Objective<'a> {
    env: &'a Environment,
    guards: &'a [Guard],
    strategy: &'a Strategy,
    options: &'a [CoverOption],
    corners: [Point; 3],
}

impl Objective<'_> {
    fn eval(&self, x: Point) -> Vec<OptionValue> {
        let an = self.env.geo.anchors(x);
        let [a, b, c] = self.corners;
        let center = (a + b + c) * (1.0 / 3.0);
        let probe = x.lerp(center, 1e-6);
        self.options
            .iter()
            .map(|o| option_value(self.env, &an, probe, &self.strategy.guards[o.guard], self.guards[o.guard].length, o.end))
            .collect()
    }

    fn value(vals: &[OptionValue]) -> f64 {
        vals.iter().map(|v| v.value).fold(0.0, f64::max)
    }

    fn inside(&self, x: Point) -> bool {
        let [a, b, c] = self.corners;
        let tol = 1e-12 * self.env.poly.diameter();
        [(a, b), (b, c), (c, a)].iter().all(|&(p, q)| (q - p).cross(x - p) >= -tol * p.dist(q))
    }

    /// Trust-region descent from `x` on the max of the option values.
    fn descend(&self, mut x: Point) -> (Point, f64) {
        let diam = self.env.poly.diameter();
        let [a, b, c] = self.corners;
        let size = a.dist(b).max(b.dist(c)).max(c.dist(a));
        let mut vals = self.eval(x);
        let mut f = Self::value(&vals);
        if !f.is_finite() {
            return (x, f);
        }
        let mut h = 0.1 * size;
        for _ in 0..400 {
            let Some((y, z)) = lp_step(x, h, &vals, self.corners) else { break };
            let predicted = f - z;
            if predicted <= 1e-15 * (1.0 + f) {
                break;
            }
            let y = if self.inside(y) { y } else { x };
            let new_vals = self.eval(y);
            let fy = Self::value(&new_vals);
            if fy.is_finite() && f - fy >= 0.1 * predicted {
                x = y;
                f = fy;
                vals = new_vals;
                h = (2.0 * h).min(size);
            } else {
                h *= 0.25;
            }
            if h < 1e-13 * diam {
                break;
            }
        }
        (x, f)
    }
}

/// Minimises `z` subject to `value_i + grad_i·(p − x) ≤ z`, `p` in the
/// triangle and in the box of half-width `h` around `x`, by enumerating
/// vertices of the three-variable linear programme.
fn lp_step(x: Point, h: f64, vals: &[OptionValue], corners: [Point; 3]) -> Option<(Point, f64)> {
    // Rows: a·X + b·Y + c·z ≤ d.
    let mut rows: Vec<[f64; 4]> = Vec::new();
    for v in vals {
        if !v.value.is_finite() {
            return None;
        }
        rows.push([v.grad.x, v.grad.y, -1.0, v.grad.dot(x) - v.value]);
    }
    let nf = rows.len();
    rows.push([1.0, 0.0, 0.0, x.x + h]);
    rows.push([-1.0, 0.0, 0.0, -(x.x - h)]);
    rows.push([0.0, 1.0, 0.0, x.y + h]);
    rows.push([0.0, -1.0, 0.0, -(x.y - h)]);
    for k in 0..3 {
        let (p, q) = (corners[k], corners[(k + 1) % 3]);
        let e = q - p;
        rows.push([e.y, -e.x, 0.0, e.y * p.x - e.x * p.y]);
    }
    let scale = 1.0 + x.x.abs().max(x.y.abs()) + h;
    let mut best: Option<(Point, f64)> = None;
    let n = rows.len();
    for i in 0..nf {
        for j in 0..n {
            for k in j + 1..n {
                if j == i || k == i {
                    continue;
                }
                let Some(sol) = solve3(rows[i], rows[j], rows[k]) else { continue };
                let feasible = rows.iter().all(|r| {
                    r[0] * sol[0] + r[1] * sol[1] + r[2] * sol[2] <= r[3] + 1e-11 * scale * (1.0 + r[3].abs())
                });
                if feasible && best.as_ref().is_none_or(|b| sol[2] < b.1) {
                    best = Some((Point::new(sol[0], sol[1]), sol[2]));
                }
            }
        }
    }
    best
}

fn solve3(r0: [f64; 4], r1: [f64; 4], r2: [f64; 4]) -> Option<[f64; 3]> {
    let det = |a: [f64; 3], b: [f64; 3], c: [f64; 3]| {
        a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
    };
    let (a, b, c) = ([r0[0], r0[1], r0[2]], [r1[0], r1[1], r1[2]], [r2[0], r2[1], r2[2]]);
    let d = det(a, b, c);
    let norm = a.iter().chain(&b).chain(&c).fold(0.0f64, |m, v| m.max(v.abs()));
    if d.abs() <= 1e-12 * norm * norm * norm {
        return None;
    }
    let rhs = [r0[3], r1[3], r2[3]];
    let col = |k: usize| -> [[f64; 3]; 3] {
        let mut m = [a, b, c];
        for (row, r) in m.iter_mut().zip(rhs) {
            row[k] = r;
        }
        m
    };
    let s: [f64; 3] = core::array::from_fn(|k| {
        let m = col(k);
        det(m[0], m[1], m[2]) / d
    });
    Some(s)
}

/// Closest points between protected areas of two options, split in the
/// ratio of their guard lengths.
fn pair_points(env: &Environment, guards: &[Guard], strategy: &Strategy, options: &[CoverOption]) -> Vec<Point> {
    let away = |o: &CoverOption| -> Option<&CriticalRegion> {
        let gs = &strategy.guards[o.guard];
        gs.regions.iter().flatten().find(|r| r.end != o.end)
    };
    let mut out = Vec::new();
    for (i, a) in options.iter().enumerate() {
        for b in &options[i + 1..] {
            let (Some(ra), Some(rb)) = (away(a), away(b)) else { continue };
            let Some(sd) = env.geo.set_distance(&ra.s_int_segments(), &rb.s_int_segments()) else { continue };
            let (la, lb) = (guards[a.guard].length, guards[b.guard].length);
            let path = crate::geometry::Polyline::open(sd.path.points.clone());
            if sd.distance > 0.0 {
                out.push(path.point_at(la / (la + lb)));
            }
        }
    }
    out
}

/// Constructive ratio of one non-safe triangle at the regions of `strategy`.
pub fn triangle_ratio(
    env: &Environment,
    guards: &[Guard],
    cls: &Classification,
    strategy: &Strategy,
    t: TriId,
) -> Option<TriangleRatio> {
    if cls.triangles.classes[t] == TriangleClass::Safe {
        return None;
    }
    let options = &cls.triangles.options[t];
    let corners = env.tri.corners(t);
    let obj = Objective { env, guards, strategy, options, corners };
    let n = 16;
    let mut samples: Vec<(f64, Point)> = Vec::new();
    for i in 0..=n {
        for j in 0..=n - i {
            let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
            let p = corners[0] + (corners[1] - corners[0]) * u + (corners[2] - corners[0]) * v;
            samples.push((Objective::value(&obj.eval(p)), p));
        }
    }
    for q in pair_points(env, guards, strategy, options) {
        if obj.inside(q) {
            samples.push((Objective::value(&obj.eval(q)), q));
        }
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = (f64::INFINITY, corners[0]);
    for &(v, p) in samples.iter().take(6) {
        if !v.is_finite() {
            break;
        }
        let (x, f) = obj.descend(p);
        if f < best.0 {
            best = (f, x);
        }
    }
    let (ratio, point) = best;
    let vals = obj.eval(point);
    let mut active = Vec::new();
    let mut paths = Vec::new();
    for (o, v) in options.iter().zip(vals) {
        if ratio.is_finite() && v.value >= ratio - 1e-9 * (1.0 + ratio) {
            active.push(*o);
            if let Some(p) = v.path {
                paths.push(p);
            }
        }
    }
    Some(TriangleRatio { triangle: t, ratio, point, options: options.clone(), active, paths })
}

/// Unsafe-pair bound: for each guard with regions on both sides, distance
/// between its two internal curves over its length.
pub fn ratio_unsafe_pairs(env: &Environment, guards: &[Guard], strategy: &Strategy) -> (f64, Vec<PairCertificate>) {
    let mut r = f64::INFINITY;
    let mut certs = Vec::new();
    for g in guards {
        let gs = &strategy.guards[g.id];
        let (Some(r0), Some(r1)) = (&gs.regions[0], &gs.regions[1]) else { continue };
        let (Some(s0), Some(s1)) = (r0.side.as_ref(), r1.side.as_ref()) else { continue };
        let a: Vec<_> = s0.s_int.iter().flat_map(|c| c.segments()).collect();
        let b: Vec<_> = s1.s_int.iter().flat_map(|c| c.segments()).collect();
        if let Some(sd) = env.geo.set_distance(&a, &b) {
            let ratio = sd.distance / g.length;
            r = r.min(ratio);
            certs.push(PairCertificate { guard: g.id, ratio, path: sd.path });
        }
    }
    (r, certs)
}

/// Ratio between the internal curves of two regions: their geodesic
/// distance over the sum of the guard lengths.
pub fn pairwise_ratio(
    env: &Environment,
    guards: &[Guard],
    strategy: &Strategy,
    a: (usize, usize),
    b: (usize, usize),
) -> Result<(f64, GeodesicPath), CurveError> {
    let ra = strategy.guards[a.0].region(a.1)?;
    let rb = strategy.guards[b.0].region(b.1)?;
    let sd = env
        .geo
        .set_distance(&ra.s_int_segments(), &rb.s_int_segments())
        .ok_or(CurveError::NoCriticalRegion(a.0))?;
    Ok((sd.distance / (guards[a.0].length + guards[b.0].length), sd.path))
}

/// Pairwise ratio when the curves depend on the ratio: bisection for the
/// fixed point `distance(r) = r · (l_a + l_b)`.
pub fn pairwise_ratio_fixed_point(
    env: &Environment,
    guards: &[Guard],
    cls: &Classification,
    a: (usize, usize),
    b: (usize, usize),
) -> Result<(f64, GeodesicPath), CurveError> {
    let total = guards[a.0].length + guards[b.0].length;
    let mut hi = ratio_upper_bound(env, guards);
    let at = |r: f64| -> Result<(f64, GeodesicPath), CurveError> {
        let s = Strategy::build(env, guards, cls, r)?;
        let (q, p) = pairwise_ratio(env, guards, &s, a, b)?;
        Ok((q * total, p))
    };
    let (d_hi, p_hi) = at(hi)?;
    if d_hi >= hi * total {
        return Ok((hi, p_hi));
    }
    let mut lo = 0.0;
    let mut path = p_hi;
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        match at(mid) {
            Ok((d, p)) if d >= mid * total => {
                lo = mid;
                path = p;
            }
            _ => hi = mid,
        }
    }
    Ok((lo, path))
}

fn involves_type2(cls: &Classification, t: TriId) -> bool {
    cls.triangles.options[t].iter().any(|o| cls.guards[o.guard].kind == GuardType::Two)
}

fn min_ratio(rs: &[TriangleRatio]) -> f64 {
    rs.iter().map(|t| t.ratio).fold(f64::INFINITY, f64::min)
}

/// Constructive maximum ratio and per-triangle certificates. Triangles
/// whose options involve type-2 guards depend on the ratio through the
/// regions; for those the largest `r` with `ratio_at(r) ≥ r` is bisected.
pub fn constructive_ratio(
    env: &Environment,
    guards: &[Guard],
    cls: &Classification,
) -> Result<(f64, f64, Vec<PairCertificate>, Vec<TriangleRatio>), CurveError> {
    let r_hi = ratio_upper_bound(env, guards);
    let base = Strategy::build(env, guards, cls, r_hi)?;
    let (r_pairs, pairs) = ratio_unsafe_pairs(env, guards, &base);
    let (dependent, fixed): (Vec<TriId>, Vec<TriId>) = (0..env.tri.len())
        .filter(|&t| cls.triangles.classes[t] != TriangleClass::Safe)
        .partition(|&t| involves_type2(cls, t));
    let mut tris: Vec<TriangleRatio> =
        fixed.iter().filter_map(|&t| triangle_ratio(env, guards, cls, &base, t)).collect();
    let bound = r_pairs.min(min_ratio(&tris));
    if dependent.is_empty() {
        tris.sort_by_key(|t| t.triangle);
        return Ok((bound, r_pairs, pairs, tris));
    }
    let eval = |r: f64| -> Result<Vec<TriangleRatio>, CurveError> {
        let s = Strategy::build(env, guards, cls, r)?;
        Ok(dependent.iter().filter_map(|&t| triangle_ratio(env, guards, cls, &s, t)).collect())
    };
    // On the boundary of a type-2 protected area the neighbour's value equals
    // `r` up to the chord error of the discretized reach, so the comparison
    // allows that much.
    let min_len = guards.iter().map(|g| g.length).fold(f64::INFINITY, f64::min);
    let slack = 4.0 * env.offset.arc_tol / min_len;
    let holds = |v: &[TriangleRatio], r: f64| min_ratio(v) >= r - slack;
    let top = bound.min(r_hi);
    let at_top = eval(top)?;
    let r = if holds(&at_top, top) {
        tris.extend(at_top);
        top
    } else {
        let (mut lo, mut hi) = (0.0, top);
        let mut last = at_top;
        while hi - lo > 1e-9 * hi {
            let mid = 0.5 * (lo + hi);
            let v = eval(mid)?;
            if holds(&v, mid) {
                lo = mid;
            } else {
                hi = mid;
                last = v;
            }
        }
        // Certificates from just above the threshold, where the binding
        // triangle shows itself.
        for mut t in last {
            t.ratio = t.ratio.max(lo);
            tris.push(t);
        }
        lo
    };
    tris.sort_by_key(|t| t.triangle);
    Ok((r.min(bound), r_pairs, pairs, tris))
}

/// Witness predicate at ratio `r`. The area floor is far below the one used
/// for reporting witnesses: near a vertex the uncovered wedge grows only
/// quadratically in the excess ratio and would otherwise show up late.
/// Components thinner than `eps` (twice area over perimeter) are boolean
/// noise.
pub fn has_witness(env: &Environment, guards: &[Guard], cls: &Classification, r: f64) -> Result<bool, CurveError> {
    let s = Strategy::build(env, guards, cls, r)?;
    let floor = 1e-12 * env.poly.area();
    let thick = |c: &AreaRegion| {
        let perimeter: f64 = c.boundary_segments().iter().map(|(a, b)| a.dist(*b)).sum();
        perimeter > 0.0 && 2.0 * c.area() / perimeter > env.eps()
    };
    Ok((0..env.tri.len()).any(|t| uncovered_above(env, cls, &s, t, floor).components().iter().any(thick)))
}

/// Supremum of ratios without witnesses, by bisection over
/// `(0, diameter / shortest guard]` to `1e-7` relative.
pub fn bisection_ratio(
    env: &Environment,
    guards: &[Guard],
    cls: &Classification,
) -> Result<(f64, Vec<(f64, f64)>), CurveError> {
    let r_hi = ratio_upper_bound(env, guards);
    if !has_witness(env, guards, cls, r_hi)? {
        return Ok((f64::INFINITY, vec![(r_hi, f64::INFINITY)]));
    }
    let (mut lo, mut hi) = (0.0, r_hi);
    let mut history = vec![(lo, hi)];
    while hi - lo > 1e-7 * hi {
        let mid = 0.5 * (lo + hi);
        if has_witness(env, guards, cls, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        history.push((lo, hi));
    }
    Ok((0.5 * (lo + hi), history))
}

/// Both routes plus consistency flags.
pub fn max_speed_ratio(env: &Environment, guards: &[Guard], cls: &Classification) -> Result<SpeedRatioResult, CurveError> {
    let (r_max, r_unsafe_pairs, pairs, triangles) = constructive_ratio(env, guards, cls)?;
    let (r_bis, bracket) = bisection_ratio(env, guards, cls)?;
    let discrepancy = match (r_max.is_finite(), r_bis.is_finite()) {
        (true, true) => (r_max - r_bis).abs() > 1e-4 * r_max.max(r_bis),
        (a, b) => a != b,
    };
    let mut degenerate = false;
    if r_bis.is_finite() && r_bis > 0.0 {
        let s = Strategy::build(env, guards, cls, r_bis * 1.001)?;
        let area: f64 = (0..env.tri.len()).map(|t| uncovered_region(env, cls, &s, t).area()).sum();
        degenerate = area < 1e-6 * env.poly.area();
    }
    Ok(SpeedRatioResult { r_unsafe_pairs, pairs, triangles, r_max, r_bis, bracket, discrepancy, degenerate })
}
