//! Unsafe intruder locations and the maximal controlled invariant set over
//! the face abstraction of the hybrid automaton.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::curves::Strategy;
use crate::geometry::{AreaRegion, Point, TriId};
use crate::guards::{Classification, TriangleClass};
use crate::partition::{HybridAutomaton, RegionPartition};
use crate::scenario::Environment;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessCause {
    /// A guard's critical region reaches into its own unsafe zone at the
    /// other endpoint.
    UnsafePairOverlap,
    /// Every guard able to cover a regular triangle can be away at once.
    RegularTriangleOverlap,
}

impl WitnessCause {
    pub fn as_str(self) -> &'static str {
        match self {
            WitnessCause::UnsafePairOverlap => "UnsafePairOverlap",
            WitnessCause::RegularTriangleOverlap => "RegularTriangleOverlap",
        }
    }
}

/// An intruder location left uncovered by the reactive strategy.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub point: Point,
    pub cause: WitnessCause,
    pub triangle: TriId,
    pub guards: Vec<usize>,
    /// Area of the uncovered part of the triangle.
    pub area: f64,
}

/// Uncovered part of triangle `t`: the triangle intersected with the leave
/// region of every option covering it. Empty for safe triangles.
pub fn uncovered_region(env: &Environment, cls: &Classification, strategy: &Strategy, t: TriId) -> AreaRegion {
    uncovered_above(env, cls, strategy, t, env.eps_area())
}

/// As [`uncovered_region`] with an explicit area floor.
pub fn uncovered_above(env: &Environment, cls: &Classification, strategy: &Strategy, t: TriId, floor: f64) -> AreaRegion {
    if cls.triangles.classes[t] == TriangleClass::Safe {
        return AreaRegion::empty();
    }
    let mut part = env.triangle_region(t);
    for o in &cls.triangles.options[t] {
        part = env.kernel.intersection(&part, strategy.leave(o.guard, o.end));
        if part.area() <= floor {
            return AreaRegion::empty();
        }
    }
    part
}

/// Witness point of a region: centroid of its largest component when that
/// lies inside, otherwise an interior point.
pub fn witness_point(region: &AreaRegion) -> Option<Point> {
    let big = region.largest_component()?;
    match big.centroid() {
        Some(c) if big.contains_strict(c) && !big.on_boundary(c, 1e-12) => Some(c),
        _ => big.interior_point(),
    }
}

/// All triangles with an uncovered part of positive area. Leave regions are
/// relatively open, so a nonempty uncovered part always has positive area.
pub fn find_unsafe_points(env: &Environment, cls: &Classification, strategy: &Strategy) -> Vec<Witness> {
    let mut out = Vec::new();
    for t in 0..env.tri.len() {
        let class = cls.triangles.classes[t];
        let cause = match class {
            TriangleClass::Safe => continue,
            TriangleClass::Unsafe(_) => WitnessCause::UnsafePairOverlap,
            TriangleClass::Regular => WitnessCause::RegularTriangleOverlap,
        };
        let part = uncovered_region(env, cls, strategy, t);
        if part.is_empty() {
            continue;
        }
        let Some(point) = witness_point(&part) else { continue };
        let mut guards: Vec<usize> = cls.triangles.options[t].iter().map(|o| o.guard).collect();
        guards.sort_unstable();
        guards.dedup();
        out.push(Witness { point, cause, triangle: t, guards, area: part.area() });
    }
    out
}

/// States of the face abstraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum AbstractState {
    /// Intruder inside a face, away from witnesses.
    Interior(usize),
    /// Intruder on the shared boundary of two faces (lower id first).
    Boundary(usize, usize),
    /// Intruder at a witness location inside a face.
    Unsafe(usize),
}

pub type StateSet = BTreeSet<AbstractState>;

/// Finite abstraction: one interior state per face, one boundary state per
/// adjacency, one unsafe state per forbidden face.
#[derive(Clone, Debug)]
pub struct Abstraction {
    pub states: StateSet,
    pub forbidden: Vec<usize>,
    faces: usize,
}

impl Abstraction {
    pub fn new(automaton: &HybridAutomaton, forbidden: &[usize]) -> Self {
        let mut states = StateSet::new();
        for &j in &automaton.modes {
            states.insert(AbstractState::Interior(j));
            for &k in &automaton.inputs[j][1..] {
                if j < k {
                    states.insert(AbstractState::Boundary(j, k));
                }
            }
        }
        let mut forbidden = forbidden.to_vec();
        forbidden.sort_unstable();
        forbidden.dedup();
        for &f in &forbidden {
            states.insert(AbstractState::Unsafe(f));
        }
        Self { states, forbidden, faces: automaton.modes.len() }
    }

    /// Drops the states of faces the intruder cannot occupy (empty faces,
    /// such as the external face when the regions cover everything).
    pub fn without_faces(mut self, absent: &[usize]) -> Self {
        self.states.retain(|s| match *s {
            AbstractState::Interior(j) | AbstractState::Unsafe(j) => !absent.contains(&j),
            AbstractState::Boundary(a, b) => !absent.contains(&a) && !absent.contains(&b),
        });
        self
    }

    pub fn safe_states(&self) -> StateSet {
        self.states.iter().copied().filter(|s| !matches!(s, AbstractState::Unsafe(_))).collect()
    }

    /// States one intruder move away from `s`.
    fn successors(&self, s: AbstractState) -> Vec<AbstractState> {
        match s {
            AbstractState::Interior(j) => self
                .states
                .iter()
                .copied()
                .filter(|&t| match t {
                    AbstractState::Boundary(a, b) => a == j || b == j,
                    AbstractState::Unsafe(f) => f == j,
                    AbstractState::Interior(_) => false,
                })
                .collect(),
            AbstractState::Boundary(a, b) => alloc::vec![AbstractState::Interior(a), AbstractState::Interior(b)],
            AbstractState::Unsafe(f) => alloc::vec![AbstractState::Interior(f)],
        }
    }

    /// Boundary states whose every transition lands in `w`.
    pub fn pre1(&self, w: &StateSet) -> StateSet {
        self.states
            .iter()
            .copied()
            .filter(|&s| match s {
                AbstractState::Boundary(a, b) => {
                    w.contains(&s)
                        && w.contains(&AbstractState::Interior(a))
                        && w.contains(&AbstractState::Interior(b))
                }
                _ => false,
            })
            .collect()
    }

    /// Unsafe states plus boundary states with a transition leaving `w`
    /// (`wc` is the complement of `w`).
    pub fn pre2(&self, wc: &StateSet) -> StateSet {
        self.states
            .iter()
            .copied()
            .filter(|&s| match s {
                AbstractState::Unsafe(_) => true,
                AbstractState::Boundary(a, b) => {
                    wc.contains(&s)
                        || wc.contains(&AbstractState::Interior(a))
                        || wc.contains(&AbstractState::Interior(b))
                }
                AbstractState::Interior(_) => false,
            })
            .collect()
    }

    /// States from which the intruder can reach `g` without passing through
    /// `e`.
    pub fn reach(&self, g: &StateSet, e: &StateSet) -> StateSet {
        let mut out: StateSet = g.iter().copied().filter(|s| !e.contains(s)).collect();
        loop {
            let grow: Vec<AbstractState> = self
                .states
                .iter()
                .copied()
                .filter(|s| !out.contains(s) && !e.contains(s))
                .filter(|&s| self.successors(s).iter().any(|t| out.contains(t)))
                .collect();
            if grow.is_empty() {
                return out;
            }
            out.extend(grow);
        }
    }

    pub fn face_count(&self) -> usize {
        self.faces
    }
}

#[derive(Clone, Debug)]
pub struct TrackabilityReport {
    pub trackable: bool,
    pub witnesses: Vec<Witness>,
    pub forbidden: Vec<usize>,
    /// Faces whose interior state survives in the invariant set.
    pub invariant_faces: Vec<usize>,
    /// Size of the candidate set after each iteration (first entry: start).
    pub trace: Vec<usize>,
    pub iterations: usize,
}

/// Runs `W ← W ∖ Reach(Pre2(Wᶜ), Pre1(W))` from the safe states to a fixpoint.
pub fn maximal_invariant_set(abs: &Abstraction) -> (StateSet, Vec<usize>) {
    let mut w = abs.safe_states();
    let mut trace = alloc::vec![w.len()];
    loop {
        let wc: StateSet = abs.states.difference(&w).copied().collect();
        let bad = abs.reach(&abs.pre2(&wc), &abs.pre1(&w));
        let next: StateSet = w.difference(&bad).copied().collect();
        trace.push(next.len());
        if next == w {
            return (w, trace);
        }
        w = next;
    }
}

/// Witness search plus the invariant-set computation on the partition.
pub fn analyze_trackability(
    env: &Environment,
    cls: &Classification,
    strategy: &Strategy,
    partition: &RegionPartition,
    automaton: &HybridAutomaton,
) -> TrackabilityReport {
    let witnesses = find_unsafe_points(env, cls, strategy);
    let forbidden: Vec<usize> = witnesses.iter().filter_map(|w| partition.mode_of(env, w.point).ok()).collect();
    let empty: Vec<usize> =
        partition.faces.iter().filter(|f| f.region.area() <= env.eps_area()).map(|f| f.id).collect();
    let abs = Abstraction::new(automaton, &forbidden).without_faces(&empty);
    let (w, trace) = maximal_invariant_set(&abs);
    let invariant_faces: Vec<usize> = w
        .iter()
        .filter_map(|s| match s {
            AbstractState::Interior(j) => Some(*j),
            _ => None,
        })
        .collect();
    TrackabilityReport {
        trackable: !invariant_faces.is_empty(),
        witnesses,
        forbidden: abs.forbidden.clone(),
        invariant_faces,
        iterations: trace.len() - 1,
        trace,
    }
}
