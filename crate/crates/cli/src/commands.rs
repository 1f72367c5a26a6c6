//! The `analyze`, `speedratio` and `simulate` subcommands. Each writes its
//! files under the output directory and returns the exit code with a short
//! summary for stdout.

use std::path::{Path, PathBuf};

use guardtrack_core::simulator::{
    pressure_points, GreedyPolicy, Policy, ScriptPolicy, SimConfig, Simulation, Verdict, WitnessPolicy,
};
use guardtrack_core::Setup;
use serde_json::Value;

use crate::export;
use crate::format::{read_targets, CliError, ScenarioFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_TRACKABLE: i32 = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub summary: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PolicyChoice {
    Greedy,
    Witness,
    Script(PathBuf),
}

impl std::str::FromStr for PolicyChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "greedy" => Ok(PolicyChoice::Greedy),
            "witness" => Ok(PolicyChoice::Witness),
            _ => match s.strip_prefix("script:") {
                Some(f) if !f.is_empty() => Ok(PolicyChoice::Script(PathBuf::from(f))),
                _ => Err(format!("unknown policy {s:?}; expected greedy, witness or script:FILE")),
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimOptions {
    pub policy: PolicyChoice,
    pub steps: Option<usize>,
    pub dt: Option<f64>,
    pub seed: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { policy: PolicyChoice::Greedy, steps: None, dt: None, seed: 0 }
    }
}

fn write(out: &Path, name: &str, text: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(out.to_path_buf(), e))?;
    let path = out.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::Io(path, e))
}

fn write_json(out: &Path, name: &str, v: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).expect("json value serializes");
    text.push('\n');
    write(out, name, &text)
}

/// Writes classification, curves, partition, automaton and report.
pub fn analyze(file: &ScenarioFile, ratio: Option<f64>, out: &Path) -> Result<Outcome, CliError> {
    let scenario = file.scenario(ratio)?;
    let (setup, analysis) = scenario.analyze()?;
    write_json(out, "classification.json", &export::classification(&setup))?;
    write_json(out, "curves.json", &export::curves(&analysis.strategy))?;
    write_json(out, "partition.json", &export::partition(&analysis.partition))?;
    write_json(out, "automaton.json", &export::automaton(&analysis.automaton))?;
    write_json(out, "report.json", &export::report(&analysis.report))?;
    let rep = &analysis.report;
    let mut summary = format!(
        "ratio {}: {} ({} faces, {} witnesses)",
        scenario.ratio,
        if rep.trackable { "trackable" } else { "not trackable" },
        analysis.partition.len(),
        rep.witnesses.len()
    );
    for w in &rep.witnesses {
        summary.push_str(&format!(
            "\n  witness ({}, {}) in triangle {}: {} guards {:?}",
            w.point.x,
            w.point.y,
            w.triangle,
            w.cause.as_str(),
            w.guards
        ));
    }
    Ok(Outcome { code: if rep.trackable { EXIT_OK } else { EXIT_NOT_TRACKABLE }, summary })
}

/// Writes the speed-ratio result with its certificates.
pub fn speedratio(file: &ScenarioFile, out: &Path) -> Result<Outcome, CliError> {
    let setup = Setup::new(&file.vertices, file.guards.as_deref())?;
    let res = setup.speed_ratio()?;
    write_json(out, "speedratio.json", &export::speed_ratio(&res))?;
    let fmt = |r: f64| if r.is_finite() { r.to_string() } else { "unbounded".to_string() };
    let mut summary = format!("r_max {} (bisection {})", fmt(res.r_max), fmt(res.r_bis));
    if res.discrepancy {
        summary.push_str("\n  warning: the two estimates differ by more than 1e-4 relative");
    }
    if res.degenerate {
        summary.push_str("\n  note: the binding constraint is nearly tangent");
    }
    Ok(Outcome { code: EXIT_OK, summary })
}

/// Runs one simulation and writes `trace.jsonl` and `verdict.json`.
pub fn simulate(file: &ScenarioFile, ratio: Option<f64>, opts: &SimOptions, out: &Path) -> Result<Outcome, CliError> {
    let scenario = file.scenario(ratio)?;
    let (setup, analysis) = scenario.analyze()?;
    let mut cfg = SimConfig::for_environment(&setup.env, scenario.ratio);
    if let Some(n) = opts.steps {
        cfg.max_steps = n;
    }
    if let Some(dt) = opts.dt {
        cfg.dt = dt;
    }
    cfg.seed = opts.seed;
    let sim = Simulation::new(
        &setup.env,
        &setup.guards,
        &setup.classification,
        &analysis.strategy,
        &analysis.partition,
        cfg,
    )?;
    let press = pressure_points(&setup.env, &setup.guards, &setup.classification, &analysis.strategy);
    let mut policy: Box<dyn Policy> = match &opts.policy {
        PolicyChoice::Greedy => Box::new(GreedyPolicy::new(&sim, &press, opts.seed)),
        PolicyChoice::Witness => Box::new(WitnessPolicy::with_fallback(&analysis.report.witnesses, &press)?),
        PolicyChoice::Script(f) => Box::new(ScriptPolicy::new(read_targets(f)?)),
    };
    let trace = sim.run(policy.as_mut())?;
    write(out, "trace.jsonl", &export::trace_lines(&trace))?;
    write_json(out, "verdict.json", &export::verdict(&trace.verdict))?;
    let (code, summary) = match trace.verdict {
        Verdict::Tracked => (EXIT_OK, format!("TRACKED for {} steps ({})", trace.records.len() - 1, trace.policy)),
        Verdict::Breach { t, point } => {
            (EXIT_NOT_TRACKABLE, format!("BREACH at t = {t} at ({}, {}) ({})", point.x, point.y, trace.policy))
        }
    };
    Ok(Outcome { code, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_names_parse() {
        assert_eq!("greedy".parse::<PolicyChoice>(), Ok(PolicyChoice::Greedy));
        assert_eq!("witness".parse::<PolicyChoice>(), Ok(PolicyChoice::Witness));
        assert_eq!("script:a.json".parse::<PolicyChoice>(), Ok(PolicyChoice::Script("a.json".into())));
        assert!("script:".parse::<PolicyChoice>().is_err());
        assert!("random".parse::<PolicyChoice>().is_err());
    }
}
