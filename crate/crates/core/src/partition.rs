//! Faces cut out of the polygon by the critical regions, and the hybrid
//! automaton with one mode per face.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::curves::Strategy;
use crate::geometry::{on_segment, AreaRegion, Point};
use crate::scenario::Environment;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartitionError {
    OutsidePolygon,
}

impl fmt::Display for PartitionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("point lies outside the polygon")
    }
}

impl core::error::Error for PartitionError {}

/// Identifies a critical region: guard and endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RegionKey {
    pub guard: usize,
    pub end: usize,
}

#[derive(Clone, Debug)]
pub struct Face {
    pub id: usize,
    pub region: AreaRegion,
    /// Critical regions containing the face (empty for the external face).
    pub inside: Vec<RegionKey>,
}

impl Face {
    pub fn active_guards(&self) -> Vec<usize> {
        let mut g: Vec<usize> = self.inside.iter().map(|k| k.guard).collect();
        g.dedup();
        g
    }
}

#[derive(Clone, Debug)]
pub struct RegionPartition {
    pub faces: Vec<Face>,
    /// Id of the face outside every critical region; it may have several
    /// components and is always the last face.
    pub external: usize,
    /// Sorted neighbour lists: faces sharing boundary of positive length.
    pub adjacency: Vec<Vec<usize>>,
}

/// Venn cells of all critical regions, split into connected components.
/// Points in no critical region form one external face.
pub fn build_partition(env: &Environment, strategy: &Strategy) -> RegionPartition {
    let k = &env.kernel;
    let min_area = env.eps_area();
    let keyed: Vec<(RegionKey, &AreaRegion)> = strategy
        .regions()
        .filter(|r| r.region.area() > min_area)
        .map(|r| (RegionKey { guard: r.guard, end: r.end }, &r.region))
        .collect();
    let mut cells: Vec<(Vec<RegionKey>, AreaRegion)> = vec![(Vec::new(), env.whole.clone())];
    for (key, c) in &keyed {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for (label, cell) in cells {
            let inside = k.intersection(&cell, c);
            if inside.area() > min_area {
                let mut l = label.clone();
                l.push(*key);
                next.push((l, inside));
                let outside = k.difference(&cell, c);
                if outside.area() > min_area {
                    next.push((label, outside));
                }
            } else {
                next.push((label, cell));
            }
        }
        cells = next;
    }
    let mut faces: Vec<Face> = Vec::new();
    let mut external = AreaRegion::empty();
    for (label, cell) in cells {
        if label.is_empty() {
            external = cell;
            continue;
        }
        for comp in cell.components() {
            if comp.area() > min_area {
                faces.push(Face { id: 0, region: comp, inside: label.clone() });
            }
        }
    }
    faces = merge_touching(env, faces);
    faces.sort_by(|a, b| {
        a.inside.cmp(&b.inside).then_with(|| {
            let (ca, cb) = (a.region.centroid().unwrap_or_default(), b.region.centroid().unwrap_or_default());
            ca.x.total_cmp(&cb.x).then(ca.y.total_cmp(&cb.y))
        })
    });
    faces.push(Face { id: 0, region: external, inside: Vec::new() });
    for (i, f) in faces.iter_mut().enumerate() {
        f.id = i;
    }
    let adjacency = face_adjacency(env, &faces);
    let external = faces.len() - 1;
    RegionPartition { faces, external, adjacency }
}

/// Components of one cell split only by a dropped sliver still share
/// boundary; they are merged back into one face.
fn merge_touching(env: &Environment, mut faces: Vec<Face>) -> Vec<Face> {
    loop {
        let adj = face_adjacency(env, &faces);
        let pair = (0..faces.len()).find_map(|i| adj[i].iter().find(|&&j| j > i && faces[j].inside == faces[i].inside).map(|&j| (i, j)));
        let Some((i, j)) = pair else { return faces };
        let gone = faces.swap_remove(j);
        faces[i].region = env.kernel.union(&faces[i].region, &gone.region);
    }
}

/// Faces sharing boundary of length above `1e-7 · diameter`. Segments are
/// bucketed on a grid so each boundary segment only meets nearby ones.
fn face_adjacency(env: &Environment, faces: &[Face]) -> Vec<Vec<usize>> {
    let diam = env.poly.diameter();
    let tol = 1e-8 * diam + 10.0 * env.eps();
    let cell = diam / 128.0;
    let (lo, _) = env.poly.bbox();
    let key = |p: Point| (((p.x - lo.x) / cell) as i64, ((p.y - lo.y) / cell) as i64);
    let mut grid: BTreeMap<(i64, i64), Vec<(usize, Point, Point)>> = BTreeMap::new();
    let segs: Vec<Vec<(Point, Point)>> = faces.iter().map(|f| f.region.boundary_segments()).collect();
    for (fi, ss) in segs.iter().enumerate() {
        for &(a, b) in ss {
            let (ka, kb) = (key(a), key(b));
            for x in ka.0.min(kb.0) - 1..=ka.0.max(kb.0) + 1 {
                for y in ka.1.min(kb.1) - 1..=ka.1.max(kb.1) + 1 {
                    grid.entry((x, y)).or_default().push((fi, a, b));
                }
            }
        }
    }
    let n = faces.len();
    let mut shared = vec![0.0f64; n * n];
    for (fi, ss) in segs.iter().enumerate() {
        for &(a, b) in ss {
            let m = a.midpoint(b);
            let Some(bucket) = grid.get(&key(m)) else { continue };
            let mut seen: Vec<usize> = Vec::new();
            for &(fj, c, d) in bucket {
                if fj != fi && !seen.contains(&fj) && on_segment(m, c, d, tol) {
                    seen.push(fj);
                    shared[fi * n + fj] += a.dist(b);
                }
            }
        }
    }
    let min_len = 1e-7 * diam;
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i && shared[i * n + j].max(shared[j * n + i]) > min_len).collect())
        .collect()
}

impl RegionPartition {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.faces.iter().map(|f| f.region.area()).sum()
    }

    /// Face containing `p`; boundary points go to the lowest id. Points in
    /// none of the faces (dropped slivers) go to the nearest face.
    pub fn mode_of(&self, env: &Environment, p: Point) -> Result<usize, PartitionError> {
        let eps = env.eps();
        if !env.poly.contains(p, eps) {
            return Err(PartitionError::OutsidePolygon);
        }
        if let Some(f) = self.faces.iter().find(|f| f.region.contains(p, eps)) {
            return Ok(f.id);
        }
        let nearest = self
            .faces
            .iter()
            .map(|f| (f.region.distance_to(p), f.id))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map_or(self.external, |x| x.1);
        Ok(nearest)
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(&b)
    }
}

/// Discrete state plus continuous state.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState {
    pub mode: usize,
    pub intruder: Point,
    pub stations: Vec<f64>,
}

/// Modes, inputs and transitions induced by a partition. Continuous inputs
/// and discrete disturbances are empty; the flow is the station map.
#[derive(Clone, Debug)]
pub struct HybridAutomaton {
    pub modes: Vec<usize>,
    /// `inputs[j]`: `j` itself followed by its adjacent modes.
    pub inputs: Vec<Vec<usize>>,
    /// Directed transitions, both directions for each adjacency.
    pub transitions: Vec<(usize, usize)>,
    pub external: usize,
    /// Guards whose critical region contains the mode's face.
    pub active: Vec<Vec<usize>>,
    pub guard_count: usize,
}

pub fn build_automaton(partition: &RegionPartition, guard_count: usize) -> HybridAutomaton {
    let modes: Vec<usize> = (0..partition.len()).collect();
    let inputs = modes
        .iter()
        .map(|&j| core::iter::once(j).chain(partition.adjacency[j].iter().copied()).collect())
        .collect();
    let transitions = modes
        .iter()
        .flat_map(|&j| partition.adjacency[j].iter().map(move |&k| (j, k)))
        .collect();
    let active = partition.faces.iter().map(Face::active_guards).collect();
    HybridAutomaton { modes, inputs, transitions, external: partition.external, active, guard_count }
}

impl HybridAutomaton {
    /// Initial state for an intruder at `p`: stations from the station map.
    pub fn initial_state(
        &self,
        env: &Environment,
        partition: &RegionPartition,
        strategy: &Strategy,
        p: Point,
    ) -> Result<SystemState, PartitionError> {
        let mode = partition.mode_of(env, p)?;
        Ok(SystemState { mode, intruder: p, stations: strategy.stations(env, p) })
    }

    /// Whether the mode graph is connected.
    pub fn is_connected(&self) -> bool {
        if self.modes.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.modes.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(j) = stack.pop() {
            for &k in &self.inputs[j][1..] {
                if !seen[k] {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::validate_polygon;
    use crate::guards::{classify_guards, validate_guard_set};

    fn strip() -> Environment {
        let v: Vec<Point> =
            [(0.0, 0.0), (2.0, -0.3), (4.0, 0.0), (4.0, 1.0), (2.0, 1.3), (0.0, 1.0)].iter().map(|&p| p.into()).collect();
        Environment::new(validate_polygon(&v).unwrap())
    }

    fn strategy(env: &Environment, d: (usize, usize), r: f64) -> Strategy {
        let (g, _) = validate_guard_set(&env.tri, &[d]).unwrap();
        let c = classify_guards(&env.tri, &g).unwrap();
        Strategy::build(env, &g, &c, r).unwrap()
    }

    #[test]
    fn static_guard_single_face() {
        let sq: Vec<Point> = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)].iter().map(|&p| p.into()).collect();
        let env = Environment::new(validate_polygon(&sq).unwrap());
        let s = strategy(&env, env.tri.diagonals()[0], 1.0);
        let p = build_partition(&env, &s);
        assert_eq!(p.len(), 1);
        assert_eq!(p.external, 0);
        let a = build_automaton(&p, 1);
        assert_eq!(a.modes, vec![0]);
        assert!(a.transitions.is_empty());
        assert_eq!(p.mode_of(&env, Point::new(0.5, 0.5)), Ok(0));
        assert_eq!(p.mode_of(&env, Point::new(2.0, 0.5)), Err(PartitionError::OutsidePolygon));
    }

    #[test]
    fn two_sided_guard_tiles_polygon() {
        let env = strip();
        let s = strategy(&env, (1, 4), 0.2);
        let p = build_partition(&env, &s);
        assert!((p.total_area() - env.poly.area()).abs() < 1e-6 * env.poly.area());
        // Two disjoint critical regions plus the outside.
        assert_eq!(p.len(), 3);
        for j in 0..p.len() {
            for &k in &p.adjacency[j] {
                assert!(p.adjacency[k].contains(&j));
            }
        }
        assert_eq!(p.adjacency[p.external], vec![0, 1]);
        assert!(!p.are_adjacent(0, 1));
        let a = build_automaton(&p, 1);
        assert!(a.is_connected());
        assert_eq!(a.transitions.len(), 4);
        assert_eq!(a.inputs[p.external], vec![2, 0, 1]);
        // Each critical region face has exactly one active guard.
        assert_eq!(a.active[0], vec![0]);
        assert!(a.active[p.external].is_empty());
    }

    #[test]
    fn boundary_points_take_lowest_face() {
        let env = strip();
        let s = strategy(&env, (1, 4), 0.2);
        let p = build_partition(&env, &s);
        for f in &p.faces[..p.external] {
            let (a, b) = f.region.boundary_segments().into_iter().find(|&(a, b)| {
                let m = a.midpoint(b);
                !env.poly.on_boundary(m, 1e-6) && p.faces[p.external].region.on_boundary(m, 1e-6)
            }).unwrap();
            let m = a.midpoint(b);
            assert_eq!(p.mode_of(&env, m), Ok(f.id.min(p.external)));
        }
    }
}
