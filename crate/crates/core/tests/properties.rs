//! Randomized invariants over generated star polygons.

use guardtrack_core::fixtures::{self, random_scenario};
use guardtrack_core::geometry::{AreaRegion, Point};
use guardtrack_core::guards::GuardType;
use guardtrack_core::simulator::{pressure_points, GreedyPolicy, SimConfig, Simulation};
use guardtrack_core::{Scenario, Setup};
use proptest::prelude::*;

fn setup_for(seed: u64) -> Option<(Scenario, Setup)> {
    let sc = random_scenario(seed, 0.5);
    let setup = sc.setup().ok()?;
    Some((sc, setup))
}

/// Point inside the polygon picked from a triangle by barycentric weights.
fn inside_point(setup: &Setup, t: usize, u: f64, v: f64) -> Point {
    let [a, b, c] = setup.env.tri.corners(t % setup.env.tri.len());
    let (u, v) = if u + v > 1.0 { (1.0 - u, 1.0 - v) } else { (u, v) };
    let w = 1.0 - u - v;
    // Keep off the triangle boundary.
    let (u, v, w) = (0.02 + 0.94 * u, 0.02 + 0.94 * v, 0.02 + 0.94 * w);
    let s = u + v + w;
    Point::new((a.x * u + b.x * v + c.x * w) / s, (a.y * u + b.y * v + c.y * w) / s)
}

fn unit() -> impl Strategy<Value = f64> {
    0.0..1.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triangulation_counts_and_area(seed in 0u64..10_000) {
        let sc = random_scenario(seed, 0.5);
        let Ok(setup) = sc.setup() else { return Ok(()) };
        let tri = &setup.env.tri;
        let n = sc.vertices.len();
        prop_assert_eq!(tri.len(), n - 2);
        prop_assert_eq!(tri.diagonals().len(), n - 3);
        let sum: f64 = (0..tri.len()).map(|t| tri.triangle_area(t)).sum();
        prop_assert!((sum - setup.env.poly.area()).abs() <= 1e-9 * setup.env.poly.area());
    }

    #[test]
    fn geodesic_is_a_metric_above_euclid(
        seed in 0u64..10_000,
        t in proptest::array::uniform3(0usize..64),
        w in proptest::array::uniform6(unit()),
    ) {
        let Some((_, setup)) = setup_for(seed) else { return Ok(()) };
        let geo = &setup.env.geo;
        let p = inside_point(&setup, t[0], w[0], w[1]);
        let q = inside_point(&setup, t[1], w[2], w[3]);
        let r = inside_point(&setup, t[2], w[4], w[5]);
        let (pq, qp) = (geo.distance(p, q), geo.distance(q, p));
        prop_assert_eq!(pq, qp);
        prop_assert!(pq >= p.dist(q) - 1e-12);
        if geo.visible(p, q) {
            prop_assert!((pq - p.dist(q)).abs() <= 1e-9 * setup.env.poly.diameter());
        } else {
            prop_assert!(pq > p.dist(q));
        }
        prop_assert!(pq <= geo.distance(p, r) + geo.distance(r, q) + 1e-9 * setup.env.poly.diameter());
    }

    #[test]
    fn boolean_inclusion_exclusion(
        seed in 0u64..10_000,
        t in proptest::array::uniform2(0usize..64),
        w in proptest::array::uniform4(unit()),
        size in proptest::array::uniform2(0.05..0.6f64),
    ) {
        let Some((_, setup)) = setup_for(seed) else { return Ok(()) };
        let env = &setup.env;
        let scale = env.poly.diameter();
        let square = |c: Point, h: f64| {
            AreaRegion::from_simple_loop(vec![
                Point::new(c.x - h, c.y - h),
                Point::new(c.x + h, c.y - h),
                Point::new(c.x + h, c.y + h),
                Point::new(c.x - h, c.y + h),
            ])
        };
        let k = &env.kernel;
        let a = k.intersection(&square(inside_point(&setup, t[0], w[0], w[1]), size[0] * scale), &env.whole);
        let b = k.intersection(&square(inside_point(&setup, t[1], w[2], w[3]), size[1] * scale), &env.whole);
        let lhs = k.union(&a, &b).area();
        let rhs = a.area() + b.area() - k.intersection(&a, &b).area();
        prop_assert!((lhs - rhs).abs() <= 1e-6 * scale * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn stations_stay_in_unit_interval(seed in 0u64..10_000, r in 0.05..2.0f64, t in 0usize..64, u in unit(), v in unit()) {
        let Some((_, setup)) = setup_for(seed) else { return Ok(()) };
        let a = setup.analyze(r).unwrap();
        let p = inside_point(&setup, t, u, v);
        for s in a.strategy.stations(&setup.env, p) {
            prop_assert!((0.0..=1.0).contains(&s), "station {}", s);
        }
    }

    #[test]
    fn faces_tile_and_automaton_is_connected(seed in 0u64..10_000, r in 0.05..2.0f64) {
        let Some((_, setup)) = setup_for(seed) else { return Ok(()) };
        let a = setup.analyze(r).unwrap();
        let area = setup.env.poly.area();
        prop_assert!((a.partition.total_area() - area).abs() <= 1e-6 * area);
        for (j, nb) in a.partition.adjacency.iter().enumerate() {
            for &k in nb {
                prop_assert!(a.partition.adjacency[k].contains(&j));
            }
        }
        let non_empty = a.partition.faces.iter().filter(|f| f.region.area() > setup.env.eps_area()).count();
        if non_empty == a.partition.len() {
            prop_assert!(a.automaton.is_connected());
        }
    }

    #[test]
    fn invariant_set_iteration_shrinks(seed in 0u64..10_000, r in 0.05..2.0f64) {
        let Some((_, setup)) = setup_for(seed) else { return Ok(()) };
        let rep = setup.analyze(r).unwrap().report;
        prop_assert!(rep.trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(rep.iterations <= rep.trace[0] + 1);
        prop_assert_eq!(rep.trackable, rep.witnesses.is_empty());
    }

    #[test]
    fn regions_grow_and_verdict_is_monotone_in_ratio(seed in 0u64..10_000, r in 0.05..1.5f64, k in 1.05..2.0f64) {
        let Some((_, setup)) = setup_for(seed) else { return Ok(()) };
        let lo = setup.analyze(r).unwrap();
        let hi = setup.analyze(r * k).unwrap();
        let kern = &setup.env.kernel;
        let tol = 1e-6 * setup.env.poly.area();
        // A type-2 guard protects what its neighbours leave uncovered, which
        // itself moves with the ratio (its regions may even vanish); only
        // fixed protected areas give nested regions.
        for a in lo.strategy.regions() {
            if setup.classification.guards[a.guard].kind == GuardType::Two {
                continue;
            }
            let b = hi.strategy.regions().find(|b| (b.guard, b.end) == (a.guard, a.end));
            prop_assert!(b.is_some(), "region ({}, {}) vanished", a.guard, a.end);
            prop_assert!(kern.difference(&a.region, &b.unwrap().region).area() <= tol);
        }
        if hi.report.trackable {
            prop_assert!(lo.report.trackable);
        }
    }

    #[test]
    fn witnesses_leave_their_triangle_unguarded(seed in 0u64..10_000, r in 0.3..3.0f64) {
        let Some((_, setup)) = setup_for(seed) else { return Ok(()) };
        let a = setup.analyze(r).unwrap();
        let sim = Simulation::new(
            &setup.env,
            &setup.guards,
            &setup.classification,
            &a.strategy,
            &a.partition,
            SimConfig::for_environment(&setup.env, r),
        )
        .unwrap();
        for w in &a.report.witnesses {
            let stations = a.strategy.stations(&setup.env, w.point);
            prop_assert!(sim.covering_guards(w.point, &stations).is_empty());
        }
    }

    #[test]
    fn verdict_ignores_uniform_scaling(seed in 0u64..10_000, r in 0.05..2.0f64) {
        let sc = random_scenario(seed, r);
        let Ok(setup) = sc.setup() else { return Ok(()) };
        let big = sc.scaled(10.0);
        let big_setup = big.setup().unwrap();
        prop_assert_eq!(setup.analyze(r).unwrap().report.trackable, big_setup.analyze(r).unwrap().report.trackable);
    }
}

#[test]
fn simulation_is_deterministic() {
    for f in [fixtures::strip(), fixtures::conversion()] {
        let (setup, a) = f.scenario.analyze().unwrap();
        let traces: Vec<_> = (0..2)
            .map(|_| {
                let mut cfg = SimConfig::for_environment(&setup.env, f.scenario.ratio);
                cfg.max_steps = 500;
                let sim =
                    Simulation::new(&setup.env, &setup.guards, &setup.classification, &a.strategy, &a.partition, cfg)
                        .unwrap();
                let press = pressure_points(&setup.env, &setup.guards, &setup.classification, &a.strategy);
                let t = sim.run(&mut GreedyPolicy::new(&sim, &press, 9)).unwrap();
                t.records.iter().map(|r| (r.t.to_bits(), r.intruder.x.to_bits(), r.intruder.y.to_bits(), r.stations.iter().map(|s| s.to_bits()).collect::<Vec<_>>(), r.covered)).collect::<Vec<_>>()
            })
            .collect();
        assert_eq!(traces[0], traces[1], "{}", f.name);
    }
}

#[test]
fn pinned_guards_never_move() {
    let f = fixtures::fan();
    let (setup, a) = f.scenario.analyze().unwrap();
    let mut cfg = SimConfig::for_environment(&setup.env, f.scenario.ratio);
    cfg.max_steps = 2000;
    let sim = Simulation::new(&setup.env, &setup.guards, &setup.classification, &a.strategy, &a.partition, cfg).unwrap();
    let press = pressure_points(&setup.env, &setup.guards, &setup.classification, &a.strategy);
    let trace = sim.run(&mut GreedyPolicy::new(&sim, &press, 2)).unwrap();
    for g in 0..setup.guards.len() {
        if setup.classification.pinned(g).is_some() {
            let first = trace.records[0].stations[g];
            assert!(trace.records.iter().all(|r| r.stations[g] == first));
        }
    }
}

#[test]
fn halving_the_step_keeps_tracking() {
    for f in [fixtures::strip(), fixtures::four_guards()] {
        let (setup, a) = f.scenario.analyze().unwrap();
        let base = SimConfig::for_environment(&setup.env, f.scenario.ratio);
        for k in 1..=3 {
            let mut cfg = base.clone();
            cfg.dt = base.dt / f64::from(1 << k);
            cfg.max_steps = 2000 << k;
            let sim = Simulation::new(&setup.env, &setup.guards, &setup.classification, &a.strategy, &a.partition, cfg)
                .unwrap();
            let press = pressure_points(&setup.env, &setup.guards, &setup.classification, &a.strategy);
            let trace = sim.run(&mut GreedyPolicy::new(&sim, &press, 4)).unwrap();
            assert_eq!(trace.verdict, guardtrack_core::simulator::Verdict::Tracked, "{} dt/{}", f.name, 1 << k);
        }
    }
}
