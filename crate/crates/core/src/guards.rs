//! Guards on triangulation diagonals: validation, a greedy deployment,
//! triangle classes, neighbour structure and the guard typing procedure.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{TriId, Triangulation};

/// A guard confined to the segment between two polygon vertices.
///
/// Positions along the diagonal are stations `t ∈ [0, 1]`, with `t = 0` at
/// `endpoints[0]` and `t = 1` at `endpoints[1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Guard {
    pub id: usize,
    pub endpoints: [usize; 2],
    pub length: f64,
}

impl Guard {
    /// Distance the intruder covers while the guard crosses its diagonal.
    pub fn reach(&self, ratio: f64) -> f64 {
        self.length * ratio
    }

    /// Station value of an endpoint side (0 or 1).
    pub fn station_at(end: usize) -> f64 {
        end as f64
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GuardError {
    VertexOutOfRange(usize),
    NotATriangulationEdge(usize, usize),
    UncoverableTriangle(Vec<TriId>),
    HeuristicFailed,
    NonTerminating,
}

impl fmt::Display for GuardError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuardError::VertexOutOfRange(v) => write!(f, "vertex index {v} out of range"),
            GuardError::NotATriangulationEdge(a, b) => write!(f, "({a}, {b}) is not a triangulation edge"),
            GuardError::UncoverableTriangle(ts) => write!(f, "triangles {ts:?} touch no guard"),
            GuardError::HeuristicFailed => f.write_str("greedy deployment needs more than floor(n/4) guards"),
            GuardError::NonTerminating => f.write_str("guard typing did not reach a fixpoint"),
        }
    }
}

impl core::error::Error for GuardError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GuardWarning {
    /// More guards than the floor(n/4) budget.
    OverBudget { guards: usize, budget: usize },
}

/// Checks that every diagonal is a triangulation edge and every triangle can
/// be covered by some guard.
pub fn validate_guard_set(
    tri: &Triangulation,
    diagonals: &[(usize, usize)],
) -> Result<(Vec<Guard>, Vec<GuardWarning>), GuardError> {
    let n = tri.polygon().len();
    let mut guards = Vec::with_capacity(diagonals.len());
    for (id, &(a, b)) in diagonals.iter().enumerate() {
        for v in [a, b] {
            if v >= n {
                return Err(GuardError::VertexOutOfRange(v));
            }
        }
        if a == b || !tri.is_edge(a, b) {
            return Err(GuardError::NotATriangulationEdge(a, b));
        }
        let length = tri.polygon().vertex(a).dist(tri.polygon().vertex(b));
        guards.push(Guard { id, endpoints: [a, b], length });
    }
    let uncovered: Vec<TriId> = (0..tri.len())
        .filter(|&t| !guards.iter().any(|g| tri.has_vertex(t, g.endpoints[0]) || tri.has_vertex(t, g.endpoints[1])))
        .collect();
    if !uncovered.is_empty() {
        return Err(GuardError::UncoverableTriangle(uncovered));
    }
    let mut warnings = Vec::new();
    if guards.len() > n / 4 {
        warnings.push(GuardWarning::OverBudget { guards: guards.len(), budget: n / 4 });
    }
    Ok((guards, warnings))
}

/// Picks at most floor(n/4) internal diagonals whose endpoints touch every
/// triangle. Greedy set cover first (most newly touched triangles, then most
/// touched overall, then lowest vertex pair); when greedy overshoots the
/// budget, a bounded depth-first search branches on the uncovered triangle
/// with the fewest candidate diagonals.
pub fn deploy_heuristic(tri: &Triangulation) -> Result<Vec<Guard>, GuardError> {
    let budget = tri.polygon().len() / 4;
    let cands: Vec<((usize, usize), Vec<TriId>)> = tri
        .diagonals()
        .iter()
        .map(|&(a, b)| {
            let ts: BTreeSet<TriId> = tri.incident(a).iter().chain(tri.incident(b).iter()).copied().collect();
            ((a, b), ts.into_iter().collect())
        })
        .collect();
    let chosen = greedy_cover(tri.len(), &cands, budget)
        .or_else(|| {
            let mut stack = Vec::new();
            search_cover(&cands, &mut vec![0usize; tri.len()], budget, &mut stack).then_some(stack)
        })
        .ok_or(GuardError::HeuristicFailed)?;
    let pairs: Vec<(usize, usize)> = chosen.iter().map(|&c| cands[c].0).collect();
    validate_guard_set(tri, &pairs).map(|(g, _)| g)
}

fn greedy_cover(ntri: usize, cands: &[((usize, usize), Vec<TriId>)], budget: usize) -> Option<Vec<usize>> {
    let mut covered = vec![false; ntri];
    let mut chosen = Vec::new();
    while covered.iter().any(|c| !c) {
        let (fresh, _, _, c) = cands
            .iter()
            .enumerate()
            .filter(|(c, _)| !chosen.contains(c))
            .map(|(c, (pair, ts))| {
                let fresh = ts.iter().filter(|&&t| !covered[t]).count();
                (fresh, ts.len(), core::cmp::Reverse(*pair), c)
            })
            .max()?;
        if fresh == 0 || chosen.len() >= budget {
            return None;
        }
        for &t in &cands[c].1 {
            covered[t] = true;
        }
        chosen.push(c);
    }
    Some(chosen)
}

fn search_cover(
    cands: &[((usize, usize), Vec<TriId>)],
    cover_count: &mut Vec<usize>,
    budget: usize,
    stack: &mut Vec<usize>,
) -> bool {
    let open: Vec<TriId> = (0..cover_count.len()).filter(|&t| cover_count[t] == 0).collect();
    if open.is_empty() {
        return true;
    }
    if stack.len() >= budget {
        return false;
    }
    let options = |t: TriId| -> Vec<usize> {
        (0..cands.len()).filter(|c| !stack.contains(c) && cands[*c].1.contains(&t)).collect()
    };
    let Some(t) = open.iter().copied().min_by_key(|&t| options(t).len()) else { return false };
    let mut opts = options(t);
    opts.sort_by_key(|&c| core::cmp::Reverse(cands[c].1.iter().filter(|&&u| cover_count[u] == 0).count()));
    for c in opts {
        for &u in &cands[c].1 {
            cover_count[u] += 1;
        }
        stack.push(c);
        if search_cover(cands, cover_count, budget, stack) {
            return true;
        }
        stack.pop();
        for &u in &cands[c].1 {
            cover_count[u] -= 1;
        }
    }
    false
}

/// Def.-style neighbour relation: guards whose incident triangle sets meet.
pub fn neighbors(guards: &[Guard], tri: &Triangulation) -> Vec<Vec<usize>> {
    let sets: Vec<BTreeSet<TriId>> = guards.iter().map(|g| incident_set(tri, g)).collect();
    (0..guards.len())
        .map(|i| (0..guards.len()).filter(|&k| k != i && !sets[i].is_disjoint(&sets[k])).collect())
        .collect()
}

fn incident_set(tri: &Triangulation, g: &Guard) -> BTreeSet<TriId> {
    tri.incident(g.endpoints[0]).iter().chain(tri.incident(g.endpoints[1]).iter()).copied().collect()
}

/// A way of covering a triangle: guard `guard` standing at `endpoints[end]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CoverOption {
    pub guard: usize,
    pub end: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriangleClass {
    /// Always covered: a guard diagonal is an edge, or a static guard sits
    /// on a corner.
    Safe,
    /// Exactly one option covers it (possibly by conversion).
    Unsafe(CoverOption),
    /// Two or more options, none guaranteed.
    Regular,
}

/// A type-3 guard's choice: regular triangles at `end` handed to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conversion {
    pub guard: usize,
    pub end: usize,
    pub triangles: Vec<TriId>,
}

/// Triangle classes under a set of static guards and conversions.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleClasses {
    pub classes: Vec<TriangleClass>,
    /// Cover options of moving guards, sorted.
    pub options: Vec<Vec<CoverOption>>,
}

/// Classifies every triangle. `pinned[g] = Some(e)` keeps guard `g` at
/// `endpoints[e]` for good.
pub fn classify_triangles(
    tri: &Triangulation,
    guards: &[Guard],
    pinned: &[Option<usize>],
    conversions: &[Conversion],
) -> TriangleClasses {
    let mut classes = Vec::with_capacity(tri.len());
    let mut options = Vec::with_capacity(tri.len());
    for t in 0..tri.len() {
        let in_a = guards.iter().any(|g| tri.has_edge(t, g.endpoints[0], g.endpoints[1]));
        let pinned_here = guards
            .iter()
            .any(|g| pinned[g.id].is_some_and(|e| tri.has_vertex(t, g.endpoints[e])));
        let mut opts: Vec<CoverOption> = Vec::new();
        for g in guards {
            if pinned[g.id].is_some() {
                continue;
            }
            for end in 0..2 {
                if tri.has_vertex(t, g.endpoints[end]) {
                    opts.push(CoverOption { guard: g.id, end });
                }
            }
        }
        let converted = conversions.iter().find(|c| c.triangles.contains(&t));
        let class = if in_a || pinned_here {
            TriangleClass::Safe
        } else if let Some(c) = converted {
            TriangleClass::Unsafe(CoverOption { guard: c.guard, end: c.end })
        } else if opts.len() == 1 {
            TriangleClass::Unsafe(opts[0])
        } else {
            TriangleClass::Regular
        };
        classes.push(class);
        options.push(opts);
    }
    TriangleClasses { classes, options }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuardType {
    /// Static. `free` when every incident triangle is safe either way.
    Zero { end: usize, free: bool },
    One,
    Two,
}

/// Triangle zones of one guard, indexed by endpoint side where relevant.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Zones {
    /// Triangles having the diagonal as an edge.
    pub safe_zone: Vec<TriId>,
    /// Triangles incident to each endpoint.
    pub incident: [Vec<TriId>; 2],
    /// Unsafe triangles owned by this guard at each endpoint.
    pub unsafe_zone: [Vec<TriId>; 2],
    /// Safe zone plus safe incident triangles adjacent to it.
    pub augmented: Vec<TriId>,
    /// Regular triangles at each endpoint.
    pub regular: [Vec<TriId>; 2],
    /// Other guards able to cover the regular triangles at each endpoint.
    pub regular_neighbors: [Vec<usize>; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct GuardInfo {
    pub kind: GuardType,
    /// Set when the guard was type 3 and took over the regular triangles at
    /// this endpoint.
    pub converted_at: Option<usize>,
    pub zones: Zones,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub triangles: TriangleClasses,
    pub guards: Vec<GuardInfo>,
    pub conversions: Vec<Conversion>,
    /// Type-2 guards in the order their regions can be built.
    pub type2_order: Vec<usize>,
    /// Number of full passes (one more than the number of conversions).
    pub passes: usize,
}

impl Classification {
    pub fn pinned(&self, g: usize) -> Option<usize> {
        match self.guards[g].kind {
            GuardType::Zero { end, .. } => Some(end),
            _ => None,
        }
    }
}

fn safe_for(class: TriangleClass, guard: usize) -> bool {
    match class {
        TriangleClass::Safe => true,
        TriangleClass::Unsafe(o) => o.guard != guard,
        TriangleClass::Regular => false,
    }
}

fn zones_of(tri: &Triangulation, g: &Guard, tc: &TriangleClasses) -> Zones {
    let [v1, v2] = g.endpoints;
    let safe_zone: Vec<TriId> = tri.edge_triangles(v1, v2).to_vec();
    let incident = [tri.incident(v1).to_vec(), tri.incident(v2).to_vec()];
    let mut unsafe_zone: [Vec<TriId>; 2] = Default::default();
    let mut regular: [Vec<TriId>; 2] = Default::default();
    let mut regular_neighbors: [Vec<usize>; 2] = Default::default();
    for end in 0..2 {
        for &t in &incident[end] {
            match tc.classes[t] {
                TriangleClass::Unsafe(o) if o.guard == g.id && o.end == end => unsafe_zone[end].push(t),
                TriangleClass::Regular if tc.options[t].iter().any(|o| o.guard == g.id && o.end == end) => {
                    regular[end].push(t);
                    for o in &tc.options[t] {
                        if o.guard != g.id && !regular_neighbors[end].contains(&o.guard) {
                            regular_neighbors[end].push(o.guard);
                        }
                    }
                }
                _ => {}
            }
        }
        regular_neighbors[end].sort_unstable();
    }
    let mut augmented = safe_zone.clone();
    for end in 0..2 {
        for &t in &incident[end] {
            if tc.classes[t] == TriangleClass::Safe
                && !augmented.contains(&t)
                && safe_zone.iter().any(|&a| tri.neighbors(a).contains(&t))
            {
                augmented.push(t);
            }
        }
    }
    augmented.sort_unstable();
    Zones { safe_zone, incident, unsafe_zone, augmented, regular, regular_neighbors }
}

/// Side `end` qualifies for a static guard when every triangle there (other
/// than the safe zone) stays covered with the guard away at the other end.
fn static_side(tri: &Triangulation, g: &Guard, tc: &TriangleClasses, end: usize) -> bool {
    tri.incident(g.endpoints[end])
        .iter()
        .filter(|&&t| !tri.has_edge(t, g.endpoints[0], g.endpoints[1]))
        .all(|&t| safe_for(tc.classes[t], g.id))
}

fn is_type_one(tri: &Triangulation, z: &Zones) -> bool {
    let sides: Vec<usize> = (0..2).filter(|&e| !z.unsafe_zone[e].is_empty()).collect();
    !sides.is_empty()
        && sides.iter().all(|&e| {
            z.regular[e]
                .iter()
                .all(|&t| !z.augmented.iter().any(|&b| tri.neighbors(b).contains(&t)))
        })
}

/// Runs the typing procedure: static guards to a fixpoint, then type 1,
/// then type 2 in rounds; leftover guards are converted one at a time
/// (lowest id first, side with fewer regular triangles, ties to side 0) and
/// everything is recomputed.
pub fn classify_guards(tri: &Triangulation, guards: &[Guard]) -> Result<Classification, GuardError> {
    let mut conversions: Vec<Conversion> = Vec::new();
    let max_passes = tri.len() + 1;
    for pass in 1..=max_passes {
        let m = guards.len();
        let mut pinned: Vec<Option<usize>> = vec![None; m];
        let mut free = vec![false; m];
        let mut tc = classify_triangles(tri, guards, &pinned, &conversions);
        loop {
            let mut changed = false;
            for g in guards {
                if pinned[g.id].is_some() {
                    continue;
                }
                let s0 = static_side(tri, g, &tc, 0);
                let s1 = static_side(tri, g, &tc, 1);
                // Triangles at a qualifying side are covered by others, so
                // the guard parks at the opposite endpoint.
                let end = match (s0, s1) {
                    (true, true) => {
                        free[g.id] = true;
                        Some(0)
                    }
                    (true, false) => Some(1),
                    (false, true) => Some(0),
                    (false, false) => None,
                };
                if let Some(e) = end {
                    pinned[g.id] = Some(e);
                    tc = classify_triangles(tri, guards, &pinned, &conversions);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let zones: Vec<Zones> = guards.iter().map(|g| zones_of(tri, g, &tc)).collect();
        let mut kinds: Vec<Option<GuardType>> = (0..m)
            .map(|i| pinned[i].map(|end| GuardType::Zero { end, free: free[i] }))
            .collect();
        for i in 0..m {
            if kinds[i].is_none() && is_type_one(tri, &zones[i]) {
                kinds[i] = Some(GuardType::One);
            }
        }
        let mut type2_order = Vec::new();
        loop {
            let ready: Vec<usize> = (0..m)
                .filter(|&i| {
                    kinds[i].is_none()
                        && zones[i].regular_neighbors.iter().flatten().all(|&k| {
                            matches!(kinds[k], Some(GuardType::One) | Some(GuardType::Two))
                        })
                })
                .collect();
            if ready.is_empty() {
                break;
            }
            for i in ready {
                kinds[i] = Some(GuardType::Two);
                type2_order.push(i);
            }
        }
        if let Some(i) = (0..m).find(|&i| kinds[i].is_none()) {
            let z = &zones[i];
            let end = match (z.regular[0].len(), z.regular[1].len()) {
                (0, 0) => return Err(GuardError::NonTerminating),
                (0, _) => 1,
                (_, 0) => 0,
                (a, b) => usize::from(b < a),
            };
            conversions.push(Conversion { guard: i, end, triangles: z.regular[end].clone() });
            continue;
        }
        let infos = (0..m)
            .map(|i| GuardInfo {
                kind: kinds[i].expect("all guards typed"),
                converted_at: conversions.iter().rev().find(|c| c.guard == i).map(|c| c.end),
                zones: zones[i].clone(),
            })
            .collect();
        return Ok(Classification { triangles: tc, guards: infos, conversions, type2_order, passes: pass });
    }
    Err(GuardError::NonTerminating)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{triangulate, validate_polygon, Point};

    fn tri(v: &[(f64, f64)]) -> Triangulation {
        let p: Vec<Point> = v.iter().map(|&p| p.into()).collect();
        triangulate(&validate_polygon(&p).unwrap())
    }

    fn square() -> Triangulation {
        tri(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    }

    fn octagon() -> Triangulation {
        let v: Vec<(f64, f64)> = (0..8)
            .map(|k| {
                let a = k as f64 * core::f64::consts::PI / 4.0;
                (libm::cos(a), libm::sin(a))
            })
            .collect();
        tri(&v)
    }

    #[test]
    fn square_guard_is_static() {
        let t = square();
        let d = t.diagonals()[0];
        let (g, w) = validate_guard_set(&t, &[d]).unwrap();
        assert!(w.is_empty());
        let c = classify_guards(&t, &g).unwrap();
        assert_eq!(c.triangles.classes, vec![TriangleClass::Safe; 2]);
        assert_eq!(c.guards[0].kind, GuardType::Zero { end: 0, free: true });
        assert_eq!(c.guards[0].zones.safe_zone, vec![0, 1]);
    }

    #[test]
    fn validation_errors() {
        let t = square();
        let (a, b) = t.diagonals()[0];
        let other = if (a, b) == (0, 2) { (1, 3) } else { (0, 2) };
        assert_eq!(validate_guard_set(&t, &[other]), Err(GuardError::NotATriangulationEdge(other.0, other.1)));
        assert_eq!(validate_guard_set(&t, &[(0, 9)]), Err(GuardError::VertexOutOfRange(9)));
        let o = octagon();
        // A boundary edge touches few triangles; some stay uncoverable.
        assert!(matches!(validate_guard_set(&o, &[(0, 1)]), Err(GuardError::UncoverableTriangle(_))));
    }

    #[test]
    fn heuristic_cases() {
        let o = octagon();
        let g = deploy_heuristic(&o).unwrap();
        assert!(g.len() <= 2);
        assert!(validate_guard_set(&o, &g.iter().map(|g| (g.endpoints[0], g.endpoints[1])).collect::<Vec<_>>()).is_ok());
        assert_eq!(deploy_heuristic(&square()).unwrap().len(), 1);
        let t3 = tri(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        assert_eq!(deploy_heuristic(&t3), Err(GuardError::HeuristicFailed));
    }

    #[test]
    fn classes_match_option_counts() {
        for n in [8usize, 12, 16] {
            let v: Vec<(f64, f64)> = (0..n)
                .map(|k| {
                    let a = k as f64 * core::f64::consts::TAU / n as f64;
                    (libm::cos(a), 0.7 * libm::sin(a))
                })
                .collect();
            let t = tri(&v);
            let g = deploy_heuristic(&t).unwrap();
            let tc = classify_triangles(&t, &g, &vec![None; g.len()], &[]);
            for (k, class) in tc.classes.iter().enumerate() {
                let in_a = g.iter().any(|g| t.has_edge(k, g.endpoints[0], g.endpoints[1]));
                match class {
                    TriangleClass::Safe => assert!(in_a),
                    TriangleClass::Unsafe(o) => assert_eq!(tc.options[k], vec![*o]),
                    TriangleClass::Regular => assert!(tc.options[k].len() >= 2),
                }
            }
            let nb = neighbors(&g, &t);
            for i in 0..g.len() {
                for &k in &nb[i] {
                    assert!(nb[k].contains(&i));
                }
            }
            let c = classify_guards(&t, &g).unwrap();
            for (i, info) in c.guards.iter().enumerate() {
                if let GuardType::Zero { end, .. } = info.kind {
                    assert_eq!(c.pinned(i), Some(end));
                }
            }
        }
    }

    #[test]
    fn typing_is_idempotent() {
        let o = octagon();
        let g = deploy_heuristic(&o).unwrap();
        let a = classify_guards(&o, &g).unwrap();
        let b = classify_guards(&o, &g).unwrap();
        assert_eq!(a, b);
    }
}
