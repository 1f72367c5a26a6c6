//! Critical curves and regions of moving guards, the reactive station map,
//! and the leave regions it induces.
//!
//! Every region endpoint `e` of a guard has components, each a protected area
//! `S` (the unsafe side of the guard, or the part of its regular triangles no
//! other guard covers) grown by the geodesic distance `d_M = length · ratio`.
//! Inside a component the level is `(d_M − dist(x, S)) / d_M`, 1 on `S` and 0
//! past the outer curve; the endpoint level is the maximum over components.
//! Stations run from 0 at `endpoints[0]` to 1 at `endpoints[1]`:
//!
//! * region at endpoint 0 only: `1 − level0`
//! * region at endpoint 1 only: `level1`
//! * regions at both: `(1 − level0 + level1) / 2`
//! * no region: 0; static guards keep their endpoint.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{
    geodesic_buffer, geodesic_offset, AreaRegion, GeodesicBuffer, OffsetError, Point, Polyline, TriId,
};
use crate::guards::{Classification, Guard, GuardType};
use crate::scenario::Environment;

#[derive(Clone, Debug, PartialEq)]
pub enum CurveError {
    EmptyUnsafeZone { guard: usize, end: usize },
    NeighborRegionUndefined { guard: usize, neighbor: usize },
    NoCriticalRegion(usize),
    InvalidRatio,
    Offset(OffsetError),
}

impl fmt::Display for CurveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveError::EmptyUnsafeZone { guard, end } => write!(f, "guard {guard} has no unsafe zone at endpoint {end}"),
            CurveError::NeighborRegionUndefined { guard, neighbor } => {
                write!(f, "guard {guard} needs the regions of guard {neighbor} first")
            }
            CurveError::NoCriticalRegion(g) => write!(f, "guard {g} has no critical region"),
            CurveError::InvalidRatio => f.write_str("speed ratio must be finite and non-negative"),
            CurveError::Offset(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for CurveError {}

impl From<OffsetError> for CurveError {
    fn from(e: OffsetError) -> Self {
        CurveError::Offset(e)
    }
}

/// The unsafe side of a guard at one endpoint: its unsafe triangles plus
/// everything only reachable through them.
#[derive(Clone, Debug, PartialEq)]
pub struct UnsafeSide {
    pub zone: Vec<TriId>,
    pub side: Vec<TriId>,
    /// Triangulation edges separating the side from the guard's other
    /// triangles.
    pub edges: Vec<(usize, usize)>,
    pub s_int: Vec<Polyline>,
    pub region: AreaRegion,
}

/// Flood fill from the unsafe zone at `end`, blocked by every other triangle
/// incident to the guard's endpoints.
pub fn unsafe_side(env: &Environment, guard: &Guard, zone: &[TriId], end: usize) -> Result<UnsafeSide, CurveError> {
    if zone.is_empty() {
        return Err(CurveError::EmptyUnsafeZone { guard: guard.id, end });
    }
    let tri = &env.tri;
    let blocked: BTreeSet<TriId> = tri
        .incident(guard.endpoints[0])
        .iter()
        .chain(tri.incident(guard.endpoints[1]))
        .copied()
        .filter(|t| !zone.contains(t))
        .collect();
    let mut side: BTreeSet<TriId> = zone.iter().copied().collect();
    let mut stack: Vec<TriId> = zone.to_vec();
    while let Some(t) = stack.pop() {
        for &u in tri.neighbors(t) {
            if !blocked.contains(&u) && side.insert(u) {
                stack.push(u);
            }
        }
    }
    let mut edges = Vec::new();
    for &t in &side {
        for &u in tri.neighbors(t) {
            if !side.contains(&u) {
                if let Some(e) = tri.shared_edge(t, u) {
                    edges.push(e);
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let side: Vec<TriId> = side.into_iter().collect();
    let s_int = chain_edges(env, &edges);
    let region = env.triangles_region(&side);
    Ok(UnsafeSide { zone: zone.to_vec(), side, edges, s_int, region })
}

/// Joins vertex-index edges into maximal polylines.
fn chain_edges(env: &Environment, edges: &[(usize, usize)]) -> Vec<Polyline> {
    let mut used = vec![false; edges.len()];
    let degree = |v: usize| edges.iter().filter(|e| e.0 == v || e.1 == v).count();
    let mut out = Vec::new();
    // Start from chain ends first so open chains come out whole.
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by_key(|&k| usize::from(degree(edges[k].0) != 1 && degree(edges[k].1) != 1));
    for k in order {
        if used[k] {
            continue;
        }
        used[k] = true;
        let (a, b) = edges[k];
        let (first, mut last) = if degree(b) == 1 && degree(a) != 1 { (b, a) } else { (a, b) };
        let mut verts = vec![first, last];
        loop {
            let next = (0..edges.len()).find(|&m| !used[m] && (edges[m].0 == last || edges[m].1 == last));
            let Some(m) = next else { break };
            used[m] = true;
            last = if edges[m].0 == last { edges[m].1 } else { edges[m].0 };
            verts.push(last);
        }
        let closed = verts.len() > 2 && first == last;
        if closed {
            verts.pop();
        }
        let pts = verts.iter().map(|&v| env.poly.vertex(v)).collect();
        out.push(if closed { Polyline::closed(pts) } else { Polyline::open(pts) });
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum ComponentSource {
    /// The guard's unsafe side; triangles of the unsafe zone.
    UnsafeSide(Vec<TriId>),
    /// Merged uncovered parts of these regular triangles.
    Uncovered(Vec<TriId>),
}

#[derive(Clone, Debug)]
pub struct RegionComponent {
    pub source: ComponentSource,
    pub protected: AreaRegion,
    pub s_int: Vec<Polyline>,
    s_int_segments: Vec<(Point, Point)>,
    pub buffer: GeodesicBuffer,
}

impl RegionComponent {
    fn new(env: &Environment, source: ComponentSource, protected: AreaRegion, d_max: f64) -> Self {
        let eps = env.eps();
        let s_int = crate::geometry::level_chains(&protected, |p| env.poly.on_boundary(p, 10.0 * eps));
        let s_int_segments = s_int.iter().flat_map(|c| c.segments()).collect();
        let buffer = geodesic_buffer(&env.geo, &env.kernel, &protected, d_max, &env.offset);
        Self { source, protected, s_int, s_int_segments, buffer }
    }

    pub fn s_ext(&self) -> &[Polyline] {
        &self.buffer.s_ext
    }

    /// Internal curve as segments: the part of the protected area's
    /// boundary inside the polygon.
    pub fn s_int_segments(&self) -> &[(Point, Point)] {
        &self.s_int_segments
    }

    pub fn region(&self) -> &AreaRegion {
        &self.buffer.region
    }

    /// Level of `x` for this component alone.
    pub fn level(&self, env: &Environment, x: Point) -> f64 {
        let eps = env.eps();
        if self.protected.contains(x, eps) {
            return 1.0;
        }
        let d_max = self.buffer.distance;
        if d_max <= 0.0 || !self.buffer.reach.contains(x, eps) {
            return 0.0;
        }
        let d = env.geo.distance_to_segments(x, &self.s_int_segments);
        ((d_max - d) / d_max).clamp(0.0, 1.0)
    }
}

/// All components of one guard at one endpoint.
#[derive(Clone, Debug)]
pub struct CriticalRegion {
    pub guard: usize,
    pub end: usize,
    pub d_max: f64,
    pub components: Vec<RegionComponent>,
    /// Union of the protected areas.
    pub protected: AreaRegion,
    /// Union of the grown areas (protected area included).
    pub reach: AreaRegion,
    /// `reach` minus `protected`: the critical region proper.
    pub region: AreaRegion,
    /// Unsafe side used as the flood-fill side of the internal curve.
    pub side: Option<UnsafeSide>,
}

impl CriticalRegion {
    fn assemble(env: &Environment, guard: usize, end: usize, d_max: f64, components: Vec<RegionComponent>, side: Option<UnsafeSide>) -> Self {
        let k = &env.kernel;
        let protected = k.union_all(components.iter().map(|c| &c.protected));
        let reach = k.union_all(components.iter().map(|c| &c.buffer.reach));
        let region = k.difference(&reach, &protected);
        Self { guard, end, d_max, components, protected, reach, region, side }
    }

    /// 1 at the protected area, falling linearly with geodesic distance to 0
    /// at the outer curve.
    pub fn level(&self, env: &Environment, x: Point) -> f64 {
        let eps = env.eps();
        if self.protected.contains(x, eps) {
            return 1.0;
        }
        if !self.reach.contains(x, eps) {
            return 0.0;
        }
        self.components.iter().map(|c| c.level(env, x)).fold(0.0, f64::max)
    }

    /// Open membership in the protected area.
    pub fn inside(&self, env: &Environment, x: Point) -> bool {
        self.protected.contains_strict(x) && !self.protected.on_boundary(x, env.eps())
    }

    /// Internal curves of all components as segments.
    pub fn s_int_segments(&self) -> Vec<(Point, Point)> {
        self.components.iter().flat_map(|c| c.s_int_segments.iter().copied()).collect()
    }

    pub fn s_int(&self) -> impl Iterator<Item = &Polyline> {
        self.components.iter().flat_map(|c| c.s_int.iter())
    }

    pub fn s_ext(&self) -> impl Iterator<Item = &Polyline> {
        self.components.iter().flat_map(|c| c.buffer.s_ext.iter())
    }
}

/// Reactive behaviour of one guard at a fixed ratio.
#[derive(Clone, Debug)]
pub struct GuardStrategy {
    pub guard: usize,
    pub kind: GuardType,
    pub regions: [Option<CriticalRegion>; 2],
    /// `leave[e]`: where the station is not endpoint `e`.
    pub leave: [AreaRegion; 2],
}

impl GuardStrategy {
    fn fixed(env: &Environment, guard: usize, kind: GuardType, end: usize) -> Self {
        let mut leave = [AreaRegion::empty(), AreaRegion::empty()];
        leave[1 - end] = env.whole.clone();
        Self { guard, kind, regions: [None, None], leave }
    }

    fn moving(env: &Environment, guard: usize, kind: GuardType, regions: [Option<CriticalRegion>; 2]) -> Self {
        let k = &env.kernel;
        let outside = |r: &CriticalRegion| k.difference(&env.whole, &r.protected);
        let leave = match (&regions[0], &regions[1]) {
            (None, None) => return Self::fixed(env, guard, kind, 0).with_regions(regions),
            (Some(r0), None) => [outside(r0), r0.reach.clone()],
            (None, Some(r1)) => [r1.reach.clone(), outside(r1)],
            (Some(r0), Some(r1)) => [k.union(&outside(r0), &r1.reach), k.union(&outside(r1), &r0.reach)],
        };
        Self { guard, kind, regions, leave }
    }

    fn with_regions(mut self, regions: [Option<CriticalRegion>; 2]) -> Self {
        self.regions = regions;
        self
    }

    pub fn is_static(&self) -> bool {
        matches!(self.kind, GuardType::Zero { .. }) || self.regions.iter().all(Option::is_none)
    }

    /// Station in `[0, 1]` commanded for intruder position `x`.
    pub fn station(&self, env: &Environment, x: Point) -> f64 {
        if let GuardType::Zero { end, .. } = self.kind {
            return end as f64;
        }
        let level = |e: usize| self.regions[e].as_ref().map(|r| r.level(env, x));
        match (level(0), level(1)) {
            (None, None) => 0.0,
            (Some(a0), None) => 1.0 - a0,
            (None, Some(a1)) => a1,
            (Some(a0), Some(a1)) => (1.0 - a0 + a1) / 2.0,
        }
    }

    pub fn region(&self, end: usize) -> Result<&CriticalRegion, CurveError> {
        self.regions[end].as_ref().ok_or(CurveError::NoCriticalRegion(self.guard))
    }
}

/// Reactive strategy of all guards at one speed ratio.
#[derive(Clone, Debug)]
pub struct Strategy {
    pub ratio: f64,
    pub guards: Vec<GuardStrategy>,
}

impl Strategy {
    /// Builds every critical region: type 1 first, then type 2 in
    /// classification order (each needs its neighbours' leave regions).
    pub fn build(env: &Environment, guards: &[Guard], cls: &Classification, ratio: f64) -> Result<Self, CurveError> {
        if !(ratio.is_finite() && ratio >= 0.0) {
            return Err(CurveError::InvalidRatio);
        }
        let mut built: Vec<Option<GuardStrategy>> = vec![None; guards.len()];
        for g in guards {
            let info = &cls.guards[g.id];
            match info.kind {
                GuardType::Zero { end, .. } => built[g.id] = Some(GuardStrategy::fixed(env, g.id, info.kind, end)),
                GuardType::One => {
                    let d_max = g.length * ratio;
                    let mut regions = [None, None];
                    for (end, slot) in regions.iter_mut().enumerate() {
                        let zone = &info.zones.unsafe_zone[end];
                        if zone.is_empty() {
                            continue;
                        }
                        let side = unsafe_side(env, g, zone, end)?;
                        let comp = RegionComponent::new(
                            env,
                            ComponentSource::UnsafeSide(zone.clone()),
                            side.region.clone(),
                            d_max,
                        );
                        *slot = Some(CriticalRegion::assemble(env, g.id, end, d_max, vec![comp], Some(side)));
                    }
                    if regions.iter().all(Option::is_none) {
                        return Err(CurveError::EmptyUnsafeZone { guard: g.id, end: 0 });
                    }
                    built[g.id] = Some(GuardStrategy::moving(env, g.id, info.kind, regions));
                }
                GuardType::Two => {}
            }
        }
        for &i in &cls.type2_order {
            let g = &guards[i];
            let regions = type2_regions(env, g, cls, &built, ratio)?;
            built[i] = Some(GuardStrategy::moving(env, i, GuardType::Two, regions));
        }
        let guards = built
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or(CurveError::NoCriticalRegion(i)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { ratio, guards })
    }

    pub fn stations(&self, env: &Environment, x: Point) -> Vec<f64> {
        self.guards.iter().map(|g| g.station(env, x)).collect()
    }

    pub fn leave(&self, guard: usize, end: usize) -> &AreaRegion {
        &self.guards[guard].leave[end]
    }

    pub fn regions(&self) -> impl Iterator<Item = &CriticalRegion> {
        self.guards.iter().flat_map(|g| g.regions.iter().flatten())
    }
}

/// Uncovered part of a regular triangle once every other covering guard is
/// away from the covering endpoint.
pub fn uncovered_part(
    env: &Environment,
    guard: usize,
    t: TriId,
    cls: &Classification,
    built: &[Option<GuardStrategy>],
) -> Result<AreaRegion, CurveError> {
    let mut part = env.triangle_region(t);
    for o in &cls.triangles.options[t] {
        if o.guard == guard {
            continue;
        }
        let other = built[o.guard]
            .as_ref()
            .ok_or(CurveError::NeighborRegionUndefined { guard, neighbor: o.guard })?;
        part = env.kernel.intersection(&part, &other.leave[o.end]);
        if part.area() <= env.eps_area() {
            return Ok(AreaRegion::empty());
        }
    }
    Ok(part)
}

/// Components of a type-2 guard: one per connected union of uncovered parts
/// of its regular triangles, plus its unsafe side where it has one.
pub fn type2_regions(
    env: &Environment,
    g: &Guard,
    cls: &Classification,
    built: &[Option<GuardStrategy>],
    ratio: f64,
) -> Result<[Option<CriticalRegion>; 2], CurveError> {
    let info = &cls.guards[g.id];
    let d_max = g.length * ratio;
    let mut regions = [None, None];
    for (end, slot) in regions.iter_mut().enumerate() {
        let mut comps = Vec::new();
        let mut side = None;
        let zone = &info.zones.unsafe_zone[end];
        if !zone.is_empty() {
            let s = unsafe_side(env, g, zone, end)?;
            comps.push(RegionComponent::new(env, ComponentSource::UnsafeSide(zone.clone()), s.region.clone(), d_max));
            side = Some(s);
        }
        let mut parts: Vec<(TriId, AreaRegion)> = Vec::new();
        for &t in &info.zones.regular[end] {
            let p = uncovered_part(env, g.id, t, cls, built)?;
            if p.area() > env.eps_area() {
                parts.push((t, p));
            }
        }
        let merged = env.kernel.union_all(parts.iter().map(|(_, p)| p));
        for c in merged.components() {
            if c.area() <= env.eps_area() {
                continue;
            }
            let tris: Vec<TriId> = parts
                .iter()
                .filter(|(_, p)| env.kernel.intersection(p, &c).area() > env.eps_area())
                .map(|(t, _)| *t)
                .collect();
            comps.push(RegionComponent::new(env, ComponentSource::Uncovered(tris), c, d_max));
        }
        if !comps.is_empty() {
            *slot = Some(CriticalRegion::assemble(env, g.id, end, d_max, comps, side));
        }
    }
    Ok(regions)
}

/// Outer curve of an unsafe side at geodesic distance `d_max`, on the far
/// side of the internal curve.
pub fn external_curve(env: &Environment, side: &UnsafeSide, d_max: f64) -> Result<Vec<Polyline>, CurveError> {
    let far = env.kernel.difference(&env.whole, &side.region);
    let mut out = Vec::new();
    for c in &side.s_int {
        out.extend(geodesic_offset(&env.geo, &env.kernel, c, d_max, &far, &env.offset)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::validate_polygon;
    use crate::guards::{classify_guards, validate_guard_set};

    fn env_of(v: &[(f64, f64)]) -> Environment {
        let p: Vec<Point> = v.iter().map(|&p| p.into()).collect();
        Environment::new(validate_polygon(&p).unwrap())
    }

    fn corridor() -> Environment {
        env_of(&[(0.0, 0.0), (2.0, -0.3), (4.0, 0.0), (4.0, 1.0), (2.0, 1.3), (0.0, 1.0)])
    }

    fn setup(env: &Environment, d: &[(usize, usize)]) -> (Vec<Guard>, Classification) {
        let (g, _) = validate_guard_set(&env.tri, d).unwrap();
        let c = classify_guards(&env.tri, &g).unwrap();
        (g, c)
    }

    fn first_type1(env: &Environment) -> Option<(Vec<Guard>, Classification, usize)> {
        for &d in env.tri.diagonals() {
            let Ok((g, _)) = validate_guard_set(&env.tri, &[d]) else { continue };
            let c = classify_guards(&env.tri, &g).unwrap();
            if c.guards[0].kind == GuardType::One {
                return Some((g, c, 0));
            }
        }
        None
    }

    #[test]
    fn unsafe_side_and_station_landmarks() {
        let env = corridor();
        let (g, c, i) = first_type1(&env).expect("some single diagonal gives a type-1 guard");
        let s = Strategy::build(&env, &g, &c, 0.5).unwrap();
        let gs = &s.guards[i];
        let (end, reg) = gs.regions.iter().enumerate().find_map(|(e, r)| r.as_ref().map(|r| (e, r))).unwrap();
        let side = reg.side.as_ref().unwrap();
        assert!(!side.edges.is_empty());
        // Internal curve points: guard at the protecting endpoint.
        for c in &side.s_int {
            let p = c.point_at(0.5);
            assert!((gs.station(&env, p) - end as f64).abs() < 1e-12);
        }
        // Outer curve points: level 0, so the region no longer pulls the
        // guard toward its endpoint.
        for c in reg.s_ext() {
            let p = c.point_at(0.37);
            assert!(reg.level(&env, p) < 1e-5);
            let other = gs.regions[1 - end].as_ref().map_or(0.0, |r| r.level(&env, p));
            let st = gs.station(&env, p);
            let expect = if gs.regions[1 - end].is_some() { 0.5 + other / 2.0 } else { 1.0 };
            let expect = if end == 0 { expect } else { 1.0 - expect };
            assert!((st - expect).abs() < 1e-5, "{st} {expect}");
        }
        // Half depth gives half station.
        let d_max = reg.d_max;
        let comp = &reg.components[0];
        let inner = side.s_int[0].point_at(0.5);
        let outer = reg.s_ext().next().unwrap();
        let mut best = (f64::INFINITY, inner);
        for k in 0..=200 {
            let p = inner.lerp(outer.point_at(k as f64 / 200.0), 0.5);
            let d = env.geo.distance_to_segments(p, &comp.s_int_segments);
            if (d - d_max / 2.0).abs() < best.0 {
                best = ((d - d_max / 2.0).abs(), p);
            }
        }
        let lvl = reg.level(&env, best.1);
        let expect = (d_max - env.geo.distance_to_segments(best.1, &comp.s_int_segments)) / d_max;
        assert!((lvl - expect).abs() < 1e-12);
    }

    #[test]
    fn leave_regions_complement_station() {
        let env = corridor();
        let (g, c, i) = first_type1(&env).unwrap();
        let s = Strategy::build(&env, &g, &c, 0.3).unwrap();
        let gs = &s.guards[i];
        let eps = env.eps();
        for k in 0..400 {
            let p = Point::new(0.01 + 3.98 * ((k * 37 % 400) as f64 / 400.0), -0.29 + 1.58 * (k as f64 / 400.0));
            if !env.poly.contains_strict(p) {
                continue;
            }
            let st = gs.station(&env, p);
            for end in 0..2 {
                let away = (st - end as f64).abs() > 1e-12;
                let l = &gs.leave[end];
                if l.on_boundary(p, 1e-6) {
                    continue;
                }
                assert_eq!(away, l.contains(p, eps), "p={p:?} end={end} st={st}");
            }
        }
    }

    #[test]
    fn regions_grow_with_ratio() {
        let env = corridor();
        let (g, c, i) = first_type1(&env).unwrap();
        let mut prev: Option<AreaRegion> = None;
        for r in [0.0, 0.1, 0.4, 1.0, 10.0] {
            let s = Strategy::build(&env, &g, &c, r).unwrap();
            let reg = s.guards[i].regions.iter().flatten().next().unwrap();
            if let Some(p) = &prev {
                assert!(env.kernel.difference(p, &reg.region).area() < 1e-9);
            }
            if r == 0.0 {
                assert!(reg.region.is_empty());
            }
            prev = Some(reg.region.clone());
        }
    }

    #[test]
    fn errors() {
        let env = corridor();
        let (g, c, _) = first_type1(&env).unwrap();
        assert_eq!(Strategy::build(&env, &g, &c, f64::NAN).unwrap_err(), CurveError::InvalidRatio);
        assert!(matches!(unsafe_side(&env, &g[0], &[], 0), Err(CurveError::EmptyUnsafeZone { .. })));
        let sq = env_of(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let d = sq.tri.diagonals()[0];
        let (g, c) = setup(&sq, &[d]);
        let s = Strategy::build(&sq, &g, &c, 1.0).unwrap();
        assert!(s.guards[0].is_static());
        assert!(matches!(s.guards[0].region(0), Err(CurveError::NoCriticalRegion(0))));
    }

    #[test]
    fn external_curve_matches_buffer() {
        let env = corridor();
        let (g, c, i) = first_type1(&env).unwrap();
        let s = Strategy::build(&env, &g, &c, 0.4).unwrap();
        let reg = s.guards[i].regions.iter().flatten().next().unwrap();
        let side = reg.side.as_ref().unwrap();
        let curves = external_curve(&env, side, reg.d_max).unwrap();
        let segs: Vec<(Point, Point)> = side.s_int.iter().flat_map(|c| c.segments()).collect();
        for c in &curves {
            for k in 0..50 {
                let p = c.point_at(k as f64 / 49.0);
                let d = env.geo.distance_to_segments(p, &segs);
                assert!((d - reg.d_max).abs() < 1e-5, "{d}");
            }
        }
    }
}
