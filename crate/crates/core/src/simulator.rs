//! Discrete-time pursuit: the intruder follows a policy, every guard chases
//! its commanded station at bounded speed, and coverage is checked each step.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::curves::Strategy;
use crate::geometry::{point_segment_distance, Point, TriId};
use crate::guards::{Classification, Guard, TriangleClass};
use crate::partition::RegionPartition;
use crate::reachability::Witness;
use crate::scenario::Environment;

#[derive(Clone, Debug, PartialEq)]
pub enum SimError {
    TargetOutsidePolygon(Point),
    NoWitness,
    InvalidConfig,
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::TargetOutsidePolygon(p) => write!(f, "target ({}, {}) is outside the polygon", p.x, p.y),
            SimError::NoWitness => f.write_str("no unsafe location to steer to"),
            SimError::InvalidConfig => f.write_str("time step must be positive and speeds non-negative"),
        }
    }
}

impl core::error::Error for SimError {}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub guard_speed: f64,
    /// Intruder speed over guard speed.
    pub ratio: f64,
    pub max_steps: usize,
    pub seed: u64,
    pub start: Option<Point>,
}

impl SimConfig {
    /// Default step `1e-3 · diameter / guard speed`, 10⁴ steps, seed 0.
    pub fn for_environment(env: &Environment, ratio: f64) -> Self {
        Self { dt: 1e-3 * env.poly.diameter(), guard_speed: 1.0, ratio, max_steps: 10_000, seed: 0, start: None }
    }

    pub fn intruder_speed(&self) -> f64 {
        self.ratio * self.guard_speed
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub intruder: Point,
    pub stations: Vec<f64>,
    pub mode: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub intruder: Point,
    pub stations: Vec<f64>,
    pub mode: usize,
    pub covered: bool,
    /// Guards covering the intruder.
    pub guards: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Tracked,
    Breach { t: f64, point: Point },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub policy: String,
    pub records: Vec<TraceRecord>,
    pub verdict: Verdict,
}

/// Everything a step needs, fixed for one ratio.
pub struct Simulation<'a> {
    pub env: &'a Environment,
    pub guards: &'a [Guard],
    pub classification: &'a Classification,
    pub strategy: &'a Strategy,
    pub partition: &'a RegionPartition,
    pub config: SimConfig,
}

/// Picks the intruder's next target.
pub trait Policy {
    fn name(&self) -> String;
    fn target(&mut self, sim: &Simulation<'_>, state: &SimState) -> Point;
}

impl<'a> Simulation<'a> {
    pub fn new(
        env: &'a Environment,
        guards: &'a [Guard],
        classification: &'a Classification,
        strategy: &'a Strategy,
        partition: &'a RegionPartition,
        config: SimConfig,
    ) -> Result<Self, SimError> {
        if !(config.dt > 0.0 && config.guard_speed >= 0.0 && config.ratio >= 0.0) {
            return Err(SimError::InvalidConfig);
        }
        Ok(Self { env, guards, classification, strategy, partition, config })
    }

    /// Default start: centroid of the largest safe triangle, else of
    /// triangle 0.
    pub fn default_start(&self) -> Point {
        let tri = &self.env.tri;
        (0..tri.len())
            .filter(|&t| self.classification.triangles.classes[t] == TriangleClass::Safe)
            .max_by(|&a, &b| tri.triangle_area(a).total_cmp(&tri.triangle_area(b)).then(b.cmp(&a)))
            .map_or_else(|| tri.centroid(0), |t| tri.centroid(t))
    }

    /// Guards on their commanded stations for an intruder at `p`.
    pub fn initial_state(&self, p: Point) -> Result<SimState, SimError> {
        let mode = self.partition.mode_of(self.env, p).map_err(|_| SimError::TargetOutsidePolygon(p))?;
        Ok(SimState { t: 0.0, intruder: p, stations: self.strategy.stations(self.env, p), mode })
    }

    pub fn guard_position(&self, g: usize, station: f64) -> Point {
        let [a, b] = self.guards[g].endpoints;
        self.env.poly.vertex(a).lerp(self.env.poly.vertex(b), station)
    }

    /// Guards standing on the boundary of a triangle containing `p`.
    pub fn covering_guards(&self, p: Point, stations: &[f64]) -> Vec<usize> {
        let eps = self.env.eps();
        let tri = &self.env.tri;
        let tris: Vec<TriId> = (0..tri.len()).filter(|&t| tri.contains_point(t, p, eps)).collect();
        (0..self.guards.len())
            .filter(|&g| {
                let q = self.guard_position(g, stations[g]);
                tris.iter().any(|&t| {
                    let [a, b, c] = tri.corners(t);
                    [(a, b), (b, c), (c, a)].iter().any(|&(u, v)| point_segment_distance(q, u, v) <= eps)
                })
            })
            .collect()
    }

    fn move_intruder(&self, from: Point, target: Point, budget: f64) -> Point {
        let path = self.env.geo.path(from, target);
        let mut left = budget;
        let mut at = from;
        for w in path.points.windows(2) {
            let d = w[0].dist(w[1]);
            if d >= left {
                return if d > 0.0 { w[0].lerp(w[1], left / d) } else { w[1] };
            }
            left -= d;
            at = w[1];
        }
        at
    }

    fn advance(&self, state: &SimState, target: Point, dt: f64) -> SimState {
        let p = self.move_intruder(state.intruder, target, self.config.intruder_speed() * dt);
        let wanted = self.strategy.stations(self.env, p);
        let stations = state
            .stations
            .iter()
            .zip(&wanted)
            .enumerate()
            .map(|(g, (&s, &w))| {
                let max = self.config.guard_speed * dt / self.guards[g].length;
                s + (w - s).clamp(-max, max)
            })
            .collect();
        let mode = self.partition.mode_of(self.env, p).unwrap_or(state.mode);
        SimState { t: state.t + dt, intruder: p, stations, mode }
    }

    /// One step toward `target`, with the covering guards afterwards.
    pub fn step(&self, state: &SimState, target: Point) -> Result<(SimState, Vec<usize>), SimError> {
        if !self.env.poly.contains(target, self.env.eps()) {
            return Err(SimError::TargetOutsidePolygon(target));
        }
        let next = self.advance(state, target, self.config.dt);
        let cov = self.covering_guards(next.intruder, &next.stations);
        Ok((next, cov))
    }

    pub fn record(state: &SimState, guards: Vec<usize>) -> TraceRecord {
        TraceRecord {
            t: state.t,
            intruder: state.intruder,
            stations: state.stations.clone(),
            mode: state.mode,
            covered: !guards.is_empty(),
            guards,
        }
    }

    /// Step number `k` toward `target`. An uncovered step is replayed in ten
    /// sub-steps; it counts as a breach only if a sub-step is uncovered too,
    /// and then the record is taken at that sub-step.
    pub fn tick(&self, state: &SimState, target: Point, k: usize) -> Result<(SimState, TraceRecord), SimError> {
        let (mut next, mut cov) = self.step(state, target)?;
        if cov.is_empty() {
            let mut sub = state.clone();
            for _ in 0..10 {
                sub = self.advance(&sub, target, self.config.dt / 10.0);
                if self.covering_guards(sub.intruder, &sub.stations).is_empty() {
                    let rec = Self::record(&sub, Vec::new());
                    return Ok((sub, rec));
                }
            }
            cov = self.covering_guards(sub.intruder, &sub.stations);
            next = sub;
        }
        next.t = k as f64 * self.config.dt;
        let rec = Self::record(&next, cov);
        Ok((next, rec))
    }

    /// Runs up to `max_steps` ticks from the configured start.
    pub fn run(&self, policy: &mut dyn Policy) -> Result<Trace, SimError> {
        let start = self.config.start.unwrap_or_else(|| self.default_start());
        let mut state = self.initial_state(start)?;
        let cov = self.covering_guards(state.intruder, &state.stations);
        let mut records = vec![Self::record(&state, cov.clone())];
        if cov.is_empty() {
            return Ok(Trace { policy: policy.name(), records, verdict: Verdict::Breach { t: 0.0, point: start } });
        }
        for k in 1..=self.config.max_steps {
            let target = policy.target(self, &state);
            let (next, rec) = self.tick(&state, target, k)?;
            let covered = rec.covered;
            records.push(rec);
            if !covered {
                let verdict = Verdict::Breach { t: next.t, point: next.intruder };
                return Ok(Trace { policy: policy.name(), records, verdict });
            }
            state = next;
        }
        Ok(Trace { policy: policy.name(), records, verdict: Verdict::Tracked })
    }
}

/// Follows a fixed list of targets, then stays at the last one.
#[derive(Clone, Debug)]
pub struct ScriptPolicy {
    targets: Vec<Point>,
    next: usize,
}

impl ScriptPolicy {
    pub fn new(targets: Vec<Point>) -> Self {
        Self { targets, next: 0 }
    }
}

impl Policy for ScriptPolicy {
    fn name(&self) -> String {
        String::from("script")
    }

    fn target(&mut self, sim: &Simulation<'_>, state: &SimState) -> Point {
        let reach = sim.config.intruder_speed() * sim.config.dt;
        while self.next + 1 < self.targets.len() && state.intruder.dist(self.targets[self.next]) <= 1e-12 + reach * 1e-9 {
            self.next += 1;
        }
        self.targets.get(self.next).copied().unwrap_or(state.intruder)
    }
}

/// Heads for the candidate where the covering guards need the most time
/// beyond the intruder's arrival time. Candidates are fixed points (triangle
/// centroids and pressure points); a seeded coin sometimes picks a random
/// one instead. Re-plans on arrival or every `replan` steps.
pub struct GreedyPolicy {
    candidates: Vec<(Point, TriId)>,
    rng: ChaCha8Rng,
    current: Option<Point>,
    since: usize,
    replan: usize,
}

impl GreedyPolicy {
    pub fn new(sim: &Simulation<'_>, extra: &[Point], seed: u64) -> Self {
        let env = sim.env;
        let mut candidates: Vec<(Point, TriId)> = (0..env.tri.len())
            .filter(|&t| sim.classification.triangles.classes[t] != TriangleClass::Safe)
            .map(|t| (env.tri.centroid(t), t))
            .collect();
        for &p in extra {
            if let Ok(t) = env.tri.locate(p) {
                candidates.push((p, t));
            }
        }
        if candidates.is_empty() {
            candidates = (0..env.tri.len()).map(|t| (env.tri.centroid(t), t)).collect();
        }
        Self { candidates, rng: ChaCha8Rng::seed_from_u64(seed), current: None, since: 0, replan: 25 }
    }

    fn score(sim: &Simulation<'_>, state: &SimState, p: Point, t: TriId) -> f64 {
        let ve = sim.config.intruder_speed();
        let arrive = if ve > 0.0 { sim.env.geo.distance(state.intruder, p) / ve } else { f64::INFINITY };
        let need = sim.classification.triangles.options[t]
            .iter()
            .map(|o| (state.stations[o.guard] - o.end as f64).abs() * sim.guards[o.guard].length / sim.config.guard_speed)
            .fold(f64::INFINITY, f64::min);
        let need = if sim.classification.triangles.classes[t] == TriangleClass::Safe { 0.0 } else { need };
        need - arrive
    }
}

impl Policy for GreedyPolicy {
    fn name(&self) -> String {
        String::from("greedy")
    }

    fn target(&mut self, sim: &Simulation<'_>, state: &SimState) -> Point {
        let step = sim.config.intruder_speed() * sim.config.dt;
        self.since += 1;
        let arrived = self.current.is_none_or(|c| c.dist(state.intruder) <= step);
        if arrived || self.since >= self.replan {
            self.since = 0;
            let roll = self.rng.next_u32() % 10;
            let pick = if roll == 0 {
                (self.rng.next_u64() % self.candidates.len() as u64) as usize
            } else {
                let mut best = (f64::NEG_INFINITY, 0usize);
                for (k, &(p, t)) in self.candidates.iter().enumerate() {
                    if arrived && self.current == Some(p) {
                        continue;
                    }
                    let s = Self::score(sim, state, p, t);
                    if s > best.0 {
                        best = (s, k);
                    }
                }
                best.1
            };
            self.current = Some(self.candidates[pick].0);
        }
        self.current.unwrap_or(state.intruder)
    }
}

/// Walks to the nearest witness. Without witnesses it shuttles between the
/// pressure points (places where coverage fails first as the ratio grows).
pub struct WitnessPolicy {
    goals: Vec<Point>,
    shuttle: bool,
    index: usize,
}

impl WitnessPolicy {
    pub fn new(witnesses: &[Witness]) -> Result<Self, SimError> {
        if witnesses.is_empty() {
            return Err(SimError::NoWitness);
        }
        Ok(Self { goals: witnesses.iter().map(|w| w.point).collect(), shuttle: false, index: usize::MAX })
    }

    /// Witness points when there are any, else a shuttle over `pressure`.
    pub fn with_fallback(witnesses: &[Witness], pressure: &[Point]) -> Result<Self, SimError> {
        if let Ok(p) = Self::new(witnesses) {
            return Ok(p);
        }
        if pressure.is_empty() {
            return Err(SimError::NoWitness);
        }
        Ok(Self { goals: pressure.to_vec(), shuttle: true, index: 0 })
    }
}

impl Policy for WitnessPolicy {
    fn name(&self) -> String {
        String::from("witness")
    }

    fn target(&mut self, sim: &Simulation<'_>, state: &SimState) -> Point {
        if !self.shuttle {
            if self.index == usize::MAX {
                let geo = &sim.env.geo;
                self.index = (0..self.goals.len())
                    .min_by(|&a, &b| {
                        geo.distance(state.intruder, self.goals[a]).total_cmp(&geo.distance(state.intruder, self.goals[b]))
                    })
                    .unwrap_or(0);
            }
            return self.goals[self.index];
        }
        let step = sim.config.intruder_speed() * sim.config.dt;
        if state.intruder.dist(self.goals[self.index]) <= step.max(1e-12) {
            self.index = (self.index + 1) % self.goals.len();
        }
        self.goals[self.index]
    }
}

/// Points where coverage breaks first as the ratio grows: per-triangle
/// minimisers of the constructive ratio, lowest ratio first. With no finite
/// constraint anywhere, the triangle centroids in order.
pub fn pressure_points(env: &Environment, guards: &[Guard], cls: &Classification, strategy: &Strategy) -> Vec<Point> {
    let mut pts: Vec<(f64, Point)> = (0..env.tri.len())
        .filter_map(|t| crate::speed_ratio::triangle_ratio(env, guards, cls, strategy, t))
        .filter(|r| r.ratio.is_finite())
        .map(|r| (r.ratio, r.point))
        .collect();
    if pts.is_empty() {
        return (0..env.tri.len()).map(|t| env.tri.centroid(t)).collect();
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.into_iter().map(|(_, p)| p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::validate_polygon;
    use crate::guards::{classify_guards, validate_guard_set};
    use crate::partition::build_partition;
    use crate::reachability::find_unsafe_points;

    struct Fixture {
        env: Environment,
        guards: Vec<Guard>,
        cls: Classification,
    }

    fn strip() -> Fixture {
        let v: Vec<Point> =
            [(0.0, 0.0), (2.0, -0.3), (4.0, 0.0), (4.0, 1.0), (2.0, 1.3), (0.0, 1.0)].iter().map(|&p| p.into()).collect();
        let env = Environment::new(validate_polygon(&v).unwrap());
        let (guards, _) = validate_guard_set(&env.tri, &[(1, 4)]).unwrap();
        let cls = classify_guards(&env.tri, &guards).unwrap();
        Fixture { env, guards, cls }
    }

    fn run_with(f: &Fixture, r: f64, steps: usize, witness: bool) -> Trace {
        let s = Strategy::build(&f.env, &f.guards, &f.cls, r).unwrap();
        let p = build_partition(&f.env, &s);
        let mut cfg = SimConfig::for_environment(&f.env, r);
        cfg.max_steps = steps;
        let sim = Simulation::new(&f.env, &f.guards, &f.cls, &s, &p, cfg).unwrap();
        if witness {
            let w = find_unsafe_points(&f.env, &f.cls, &s);
            let press = pressure_points(&f.env, &f.guards, &f.cls, &s);
            sim.run(&mut WitnessPolicy::with_fallback(&w, &press).unwrap()).unwrap()
        } else {
            let press = pressure_points(&f.env, &f.guards, &f.cls, &s);
            sim.run(&mut GreedyPolicy::new(&sim, &press, 7)).unwrap()
        }
    }

    #[test]
    fn stationary_intruder_settles() {
        let f = strip();
        let s = Strategy::build(&f.env, &f.guards, &f.cls, 0.3).unwrap();
        let p = build_partition(&f.env, &s);
        let cfg = SimConfig { max_steps: 50, ..SimConfig::for_environment(&f.env, 0.3) };
        let sim = Simulation::new(&f.env, &f.guards, &f.cls, &s, &p, cfg).unwrap();
        let x = Point::new(0.3, 0.5);
        let mut st = sim.initial_state(Point::new(2.0, 0.5)).unwrap();
        st.stations = vec![0.5];
        for _ in 0..2000 {
            st = sim.step(&st, x).unwrap().0;
        }
        let want = s.stations(&f.env, x);
        assert!((st.stations[0] - want[0]).abs() < 1e-12);
        let before = st.clone();
        let after = sim.step(&st, x).unwrap().0;
        assert_eq!(before.stations, after.stations);
        assert_eq!(sim.step(&st, Point::new(9.0, 9.0)).unwrap_err(), SimError::TargetOutsidePolygon(Point::new(9.0, 9.0)));
    }

    #[test]
    fn tracked_below_and_breach_above() {
        let f = strip();
        let tr = run_with(&f, 0.2, 1500, false);
        assert_eq!(tr.verdict, Verdict::Tracked);
        assert!(tr.records.windows(2).all(|w| w[1].t > w[0].t));
        let tr = run_with(&f, 0.2, 1500, true);
        assert_eq!(tr.verdict, Verdict::Tracked);
        let tr = run_with(&f, 3.0, 3000, true);
        assert!(matches!(tr.verdict, Verdict::Breach { .. }), "{:?}", tr.verdict);
    }

    #[test]
    fn deterministic_and_budgeted() {
        let f = strip();
        let a = run_with(&f, 0.4, 400, false);
        let b = run_with(&f, 0.4, 400, false);
        assert_eq!(a, b);
        let dt = 1e-3 * f.env.poly.diameter();
        for w in a.records.windows(2) {
            let ds = (w[1].stations[0] - w[0].stations[0]).abs() * f.guards[0].length;
            assert!(ds <= dt + 1e-12);
            assert!(w[0].intruder.dist(w[1].intruder) <= 0.4 * dt + 1e-12);
        }
        assert_eq!(WitnessPolicy::new(&[]).err(), Some(SimError::NoWitness));
    }
}
