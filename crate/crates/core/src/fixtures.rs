//! Hand-placed test scenes and a seeded generator of small random ones.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::geometry::{validate_polygon, Point};
use crate::scenario::Scenario;

#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub scenario: Scenario,
}

fn pts(raw: &[(f64, f64)]) -> Vec<Point> {
    raw.iter().map(|&p| p.into()).collect()
}

fn fixture(name: &'static str, raw: &[(f64, f64)], guards: &[(usize, usize)], ratio: f64) -> Fixture {
    Fixture { name, scenario: Scenario { vertices: pts(raw), guards: Some(guards.to_vec()), ratio } }
}

/// Six-vertex L with its reflex corner at (1, 1).
pub fn l_shape() -> Fixture {
    fixture("l_shape", &[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)], &[(1, 3)], 0.5)
}

/// Fan around vertex 1: the guard parks there and covers every triangle.
pub fn fan() -> Fixture {
    fixture("fan", &[(0.0, 0.0), (3.0, -0.5), (4.0, 1.5), (2.5, 3.5), (0.0, 3.0)], &[(1, 3)], 0.5)
}

/// One guard across a bent strip, one unsafe triangle beyond each end. The
/// augmented zone is exactly the two triangles on the diagonal.
pub fn strip() -> Fixture {
    fixture("strip", &[(0.0, 0.0), (2.0, -0.3), (4.0, 0.0), (4.0, 1.0), (2.0, 1.3), (0.0, 1.0)], &[(1, 4)], 0.4)
}

/// Two guards sharing one regular triangle and no other way to settle:
/// the first takes the triangle over and both end up type 1.
pub fn conversion() -> Fixture {
    fixture(
        "conversion",
        &[
            (7.75, 3.5),
            (3.0, 3.5),
            (0.0, 8.75),
            (-1.0, 1.75),
            (-5.5, 2.75),
            (-7.75, -1.0),
            (-4.25, -8.25),
            (-0.75, -8.0),
            (1.75, -3.25),
            (5.75, -3.25),
        ],
        &[(1, 8), (3, 6)],
        0.25,
    )
}

/// Three guards; one is type 2 and its regular triangles are shared with a
/// single other guard.
pub fn type_two() -> Fixture {
    fixture(
        "type_two",
        &[
            (8.5, 1.75),
            (4.5, 5.5),
            (2.5, 5.5),
            (0.0, 7.5),
            (-3.0, 4.75),
            (-4.25, 2.5),
            (-9.0, 0.75),
            (-5.75, -2.0),
            (-5.25, -6.25),
            (-0.75, -5.25),
            (2.0, -5.25),
            (3.5, -2.5),
            (4.75, -1.25),
        ],
        &[(1, 12), (4, 11), (5, 7)],
        0.25,
    )
}

/// Eighteen vertices, four guards, one of them type 2.
pub fn four_guards() -> Fixture {
    fixture(
        "four_guards",
        &[
            (7.25, 1.25),
            (4.75, 3.0),
            (1.5, 2.0),
            (1.75, 6.0),
            (-1.25, 9.5),
            (-3.25, 6.75),
            (-3.0, 3.0),
            (-4.25, 2.25),
            (-6.25, 0.75),
            (-5.5, -0.5),
            (-3.0, -1.25),
            (-1.75, -2.25),
            (-1.25, -5.5),
            (-0.5, -5.0),
            (2.25, -5.75),
            (4.0, -4.75),
            (6.25, -4.0),
            (3.5, -1.0),
        ],
        &[(6, 13), (13, 17), (7, 10), (3, 6)],
        0.35,
    )
}

/// Strip with vertical rungs and two guards, each with a region at both
/// ends. At this ratio the two regions of guard 0 meet along the middle of
/// its cell without overlapping while those of guard 1 are still apart: five
/// modes, exactly one pair of adjacent region modes.
pub fn five_modes() -> Fixture {
    fixture(
        "five_modes",
        &[
            (0.0, 1.0),
            (1.0, -0.1),
            (3.0, -0.1),
            (4.0, 0.1),
            (8.0, 0.1),
            (9.0, 1.0),
            (8.0, 1.9),
            (4.0, 1.9),
            (3.0, 2.1),
            (1.0, 1.9),
        ],
        &[(2, 9), (4, 7)],
        0.353_553_390_593_273_73,
    )
}

pub fn all() -> Vec<Fixture> {
    alloc::vec![l_shape(), fan(), strip(), conversion(), type_two(), four_guards(), five_modes()]
}

/// Star-shaped polygon with `n` vertices on a quarter grid: jittered angles,
/// radii in [2, 10]. Retries internally until the polygon validates.
pub fn random_star(seed: u64, n: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    loop {
        let mut angles: Vec<f64> =
            (0..n).map(|k| (k as f64 + 0.15 + 0.7 * unit()) / n as f64 * core::f64::consts::TAU).collect();
        angles.sort_by(f64::total_cmp);
        let v: Vec<Point> = angles
            .iter()
            .map(|&a| {
                let r = 2.0 + 8.0 * unit();
                let q = |c: f64| libm::round(c * 4.0) / 4.0;
                Point::new(q(r * libm::cos(a)), q(r * libm::sin(a)))
            })
            .collect();
        if validate_polygon(&v).is_ok() {
            return v;
        }
    }
}

/// Random star polygon with 8 to 13 vertices and deployed guards.
pub fn random_scenario(seed: u64, ratio: f64) -> Scenario {
    let n = 8 + (seed % 6) as usize;
    Scenario { vertices: random_star(seed, n), guards: None, ratio }
}
