//! Tracking analysis for diagonal guards in simple polygons.
//!
//! A polygon is triangulated, guards are confined to triangulation
//! diagonals, and each guard reacts to the intruder through critical
//! regions: geodesic buffers around the part of the polygon only that guard
//! can cover. The crate builds those regions, partitions the polygon into the
//! modes of the induced hybrid automaton, decides trackability through a
//! maximal controlled invariant set computation, computes the largest
//! intruder/guard speed ratio that keeps tracking guaranteed, and simulates
//! the pursuit step by step.
//!
//! The crate is `no_std` (it needs `alloc`); file formats, the command line
//! and the session server live in the `guardtrack-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod curves;
pub mod fixtures;
pub mod geometry;
pub mod guards;
pub mod math;
pub mod partition;
pub mod reachability;
pub mod scenario;
pub mod simulator;
pub mod speed_ratio;

pub use geometry::{Point, Polyline, SimplePolygon, Triangulation};
pub use scenario::{Analysis, Scenario, ScenarioError, Setup};
