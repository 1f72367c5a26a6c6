//! Scenario files and script files.
//!
//! A scenario is `{"version":1, "vertices":[[x,y],...]}` with optional
//! `"guards":[[a,b],...]` (vertex index pairs; omitted means deploy) and
//! `"ratio":r`. Writers emit 17 significant digits so files round-trip.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use guardtrack_core::geometry::PolygonError;
use guardtrack_core::guards::GuardError;
use guardtrack_core::simulator::SimError;
use guardtrack_core::{Point, Scenario, ScenarioError};
use serde::Deserialize;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    Io(PathBuf, std::io::Error),
    Parse(String),
    Version(u32),
    MissingRatio,
    Scenario(ScenarioError),
    Sim(SimError),
    Policy(String),
}

impl CliError {
    /// Stable short name, used in messages and protocol error records.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Io(..) => "Io",
            CliError::Parse(_) => "Parse",
            CliError::Version(_) => "UnsupportedVersion",
            CliError::MissingRatio => "MissingRatio",
            CliError::Scenario(e) => scenario_code(e),
            CliError::Sim(SimError::TargetOutsidePolygon(_)) => "TargetOutsidePolygon",
            CliError::Sim(SimError::NoWitness) => "NoWitness",
            CliError::Sim(SimError::InvalidConfig) => "InvalidConfig",
            CliError::Policy(_) => "Policy",
        }
    }
}

pub fn scenario_code(e: &ScenarioError) -> &'static str {
    match e {
        ScenarioError::Polygon(p) => match p {
            PolygonError::TooFewVertices(_) => "TooFewVertices",
            PolygonError::DegenerateVertex(_) => "DegenerateVertex",
            PolygonError::SelfIntersecting(..) => "SelfIntersecting",
        },
        ScenarioError::Guards(g) => match g {
            GuardError::VertexOutOfRange(_) => "VertexOutOfRange",
            GuardError::NotATriangulationEdge(..) => "NotATriangulationEdge",
            GuardError::UncoverableTriangle(_) => "UncoverableTriangle",
            GuardError::HeuristicFailed => "HeuristicFailed",
            GuardError::NonTerminating => "NonTerminating",
        },
        ScenarioError::Curves(_) => "CriticalRegions",
        ScenarioError::InvalidRatio(_) => "InvalidRatio",
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Version(v) => write!(f, "unsupported format version {v} (expected {FORMAT_VERSION})"),
            CliError::MissingRatio => f.write_str("no ratio in the scenario and no --ratio given"),
            CliError::Scenario(e) => write!(f, "{e}"),
            CliError::Sim(e) => write!(f, "{e}"),
            CliError::Policy(m) => write!(f, "policy: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Scenario(e)
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Sim(e)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    version: u32,
    vertices: Vec<[f64; 2]>,
    #[serde(default)]
    guards: Option<Vec<[usize; 2]>>,
    #[serde(default)]
    ratio: Option<f64>,
}

/// Parsed scenario; `ratio` is `None` when the file has none.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioFile {
    pub vertices: Vec<Point>,
    pub guards: Option<Vec<(usize, usize)>>,
    pub ratio: Option<f64>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if doc.version != FORMAT_VERSION {
            return Err(CliError::Version(doc.version));
        }
        Ok(Self {
            vertices: doc.vertices.iter().map(|&[x, y]| Point::new(x, y)).collect(),
            guards: doc.guards.map(|g| g.iter().map(|&[a, b]| (a, b)).collect()),
            ratio: doc.ratio,
        })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::parse(&text)
    }

    /// Scenario with `ratio` overriding the file's.
    pub fn scenario(&self, ratio: Option<f64>) -> Result<Scenario, CliError> {
        let ratio = ratio.or(self.ratio).ok_or(CliError::MissingRatio)?;
        Ok(Scenario { vertices: self.vertices.clone(), guards: self.guards.clone(), ratio })
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        Self { vertices: s.vertices.clone(), guards: s.guards.clone(), ratio: Some(s.ratio) }
    }

    pub fn to_json(&self) -> String {
        let mut out = format!("{{\"version\":{FORMAT_VERSION},\"vertices\":[");
        for (i, p) in self.vertices.iter().enumerate() {
            let sep = if i == 0 { "" } else { "," };
            let _ = write!(out, "{sep}[{},{}]", num(p.x), num(p.y));
        }
        out.push(']');
        if let Some(g) = &self.guards {
            out.push_str(",\"guards\":[");
            for (i, (a, b)) in g.iter().enumerate() {
                let sep = if i == 0 { "" } else { "," };
                let _ = write!(out, "{sep}[{a},{b}]");
            }
            out.push(']');
        }
        if let Some(r) = self.ratio {
            let _ = write!(out, ",\"ratio\":{}", num(r));
        }
        out.push_str("}\n");
        out
    }
}

/// Decimal with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Script file: a JSON array of `[x, y]` targets.
pub fn read_targets(path: &Path) -> Result<Vec<Point>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    let raw: Vec<[f64; 2]> = serde_json::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))?;
    if raw.is_empty() {
        return Err(CliError::Policy("script has no targets".into()));
    }
    Ok(raw.iter().map(|&[x, y]| Point::new(x, y)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let f = ScenarioFile {
            vertices: vec![Point::new(0.1, -3.0), Point::new(1.0 / 3.0, 2.5e-7), Point::new(7.0, 1e10)],
            guards: Some(vec![(0, 2)]),
            ratio: Some(0.123456789012345678),
        };
        let text = f.to_json();
        assert_eq!(ScenarioFile::parse(&text).unwrap(), f);
        assert!(text.contains("3.3333333333333331e-1"));
    }

    #[test]
    fn rejects_other_versions_and_garbage() {
        assert!(matches!(ScenarioFile::parse(r#"{"version":2,"vertices":[]}"#), Err(CliError::Version(2))));
        assert!(matches!(ScenarioFile::parse("{"), Err(CliError::Parse(_))));
        let f = ScenarioFile::parse(r#"{"version":1,"vertices":[[0,0],[1,0],[0,1]]}"#).unwrap();
        assert!(matches!(f.scenario(None), Err(CliError::MissingRatio)));
        assert_eq!(f.scenario(Some(0.5)).unwrap().ratio, 0.5);
    }
}
