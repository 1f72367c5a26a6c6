//! Polygon, guards and the derived geometry shared by every analysis stage.

use alloc::vec::Vec;
use core::fmt;

use crate::curves::{CurveError, Strategy};
use crate::geometry::{
    triangulate, validate_polygon, AreaRegion, GeodesicMap, OffsetOptions, Point, PolygonError, RegionKernel,
    SimplePolygon, TriId, Triangulation,
};
use crate::guards::{
    classify_guards, deploy_heuristic, validate_guard_set, Classification, Guard, GuardError, GuardWarning,
};
use crate::partition::{build_automaton, build_partition, HybridAutomaton, RegionPartition};
use crate::reachability::{analyze_trackability, TrackabilityReport};
use crate::speed_ratio::{max_speed_ratio, SpeedRatioResult};

/// Everything derived from the polygon alone.
#[derive(Clone, Debug)]
pub struct Environment {
    pub poly: SimplePolygon,
    pub tri: Triangulation,
    pub geo: GeodesicMap,
    pub kernel: RegionKernel,
    pub offset: OffsetOptions,
    pub whole: AreaRegion,
}

impl Environment {
    pub fn new(poly: SimplePolygon) -> Self {
        let tri = triangulate(&poly);
        let geo = GeodesicMap::new(&poly);
        let kernel = RegionKernel::new(&poly);
        let offset = OffsetOptions::for_polygon(&poly);
        let whole = AreaRegion::from_polygon(&poly);
        Self { poly, tri, geo, kernel, offset, whole }
    }

    pub fn eps(&self) -> f64 {
        self.poly.eps()
    }

    /// Areas below this are treated as empty.
    pub fn eps_area(&self) -> f64 {
        1e-8 * self.poly.area()
    }

    pub fn triangle_region(&self, t: TriId) -> AreaRegion {
        AreaRegion::from_simple_loop(self.tri.corners(t).to_vec())
    }

    pub fn triangles_region(&self, ts: &[TriId]) -> AreaRegion {
        let loops: Vec<Vec<Point>> = ts.iter().map(|&t| self.tri.corners(t).to_vec()).collect();
        self.kernel.union_loops(&loops)
    }
}

/// Input to the whole pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub vertices: Vec<Point>,
    /// Guard diagonals as vertex pairs; `None` asks for the deployment
    /// heuristic.
    pub guards: Option<Vec<(usize, usize)>>,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioError {
    Polygon(PolygonError),
    Guards(GuardError),
    Curves(CurveError),
    InvalidRatio(f64),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Polygon(e) => write!(f, "polygon: {e}"),
            ScenarioError::Guards(e) => write!(f, "guards: {e}"),
            ScenarioError::Curves(e) => write!(f, "critical regions: {e}"),
            ScenarioError::InvalidRatio(r) => write!(f, "ratio must be positive and finite, got {r}"),
        }
    }
}

impl core::error::Error for ScenarioError {}

impl From<PolygonError> for ScenarioError {
    fn from(e: PolygonError) -> Self {
        ScenarioError::Polygon(e)
    }
}

impl From<GuardError> for ScenarioError {
    fn from(e: GuardError) -> Self {
        ScenarioError::Guards(e)
    }
}

impl From<CurveError> for ScenarioError {
    fn from(e: CurveError) -> Self {
        ScenarioError::Curves(e)
    }
}

/// Polygon, guards and classification: everything independent of the ratio.
#[derive(Clone, Debug)]
pub struct Setup {
    pub env: Environment,
    pub guards: Vec<Guard>,
    pub warnings: Vec<GuardWarning>,
    pub classification: Classification,
}

impl Setup {
    pub fn new(vertices: &[Point], diagonals: Option<&[(usize, usize)]>) -> Result<Self, ScenarioError> {
        let env = Environment::new(validate_polygon(vertices)?);
        // Clockwise input is stored reversed; guard indices follow the input.
        let n = vertices.len();
        let remapped: Option<Vec<(usize, usize)>> = diagonals.map(|d| {
            if env.poly.vertices() == vertices {
                d.to_vec()
            } else {
                let flip = |i: usize| if i < n { n - 1 - i } else { i };
                d.iter().map(|&(a, b)| (flip(a), flip(b))).collect()
            }
        });
        let (guards, warnings) = match remapped.as_deref() {
            Some(d) => validate_guard_set(&env.tri, d)?,
            None => (deploy_heuristic(&env.tri)?, Vec::new()),
        };
        let classification = classify_guards(&env.tri, &guards)?;
        Ok(Self { env, guards, warnings, classification })
    }

    pub fn analyze(&self, ratio: f64) -> Result<Analysis, ScenarioError> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(ScenarioError::InvalidRatio(ratio));
        }
        let strategy = Strategy::build(&self.env, &self.guards, &self.classification, ratio)?;
        let partition = build_partition(&self.env, &strategy);
        let automaton = build_automaton(&partition, self.guards.len());
        let report = analyze_trackability(&self.env, &self.classification, &strategy, &partition, &automaton);
        Ok(Analysis { strategy, partition, automaton, report })
    }

    pub fn speed_ratio(&self) -> Result<SpeedRatioResult, ScenarioError> {
        Ok(max_speed_ratio(&self.env, &self.guards, &self.classification)?)
    }
}

/// Everything that depends on the ratio.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub strategy: Strategy,
    pub partition: RegionPartition,
    pub automaton: HybridAutomaton,
    pub report: TrackabilityReport,
}

impl Scenario {
    pub fn setup(&self) -> Result<Setup, ScenarioError> {
        Setup::new(&self.vertices, self.guards.as_deref())
    }

    pub fn analyze(&self) -> Result<(Setup, Analysis), ScenarioError> {
        let setup = self.setup()?;
        let analysis = setup.analyze(self.ratio)?;
        Ok((setup, analysis))
    }

    /// Same scenario with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { vertices: self.vertices.iter().map(|&p| p * factor).collect(), ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn clockwise_input_keeps_guard_indices() {
        let f = fixtures::four_guards();
        let ccw = f.scenario.setup().unwrap();
        let n = f.scenario.vertices.len();
        let cw_vertices: Vec<Point> = f.scenario.vertices.iter().rev().copied().collect();
        let cw_guards: Vec<(usize, usize)> =
            f.scenario.guards.as_ref().unwrap().iter().map(|&(a, b)| (n - 1 - a, n - 1 - b)).collect();
        let cw = Setup::new(&cw_vertices, Some(&cw_guards)).unwrap();
        let ends = |s: &Setup| -> Vec<[Point; 2]> {
            s.guards
                .iter()
                .map(|g| {
                    let mut e = [s.env.poly.vertex(g.endpoints[0]), s.env.poly.vertex(g.endpoints[1])];
                    e.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
                    e
                })
                .collect()
        };
        assert_eq!(ends(&ccw), ends(&cw));
    }
}
