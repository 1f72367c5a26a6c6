//! Session service: newline-delimited JSON over TCP, one thread per
//! connection.
//!
//! Client messages:
//!
//! - `{"type":"open","scenario":NAME}` with optional `"ratio":r` loads
//!   `NAME.json` from the scenario directory (or a built-in fixture of that
//!   name) and answers with a bundle.
//! - `{"type":"intruder","target":[x,y]}` advances one step and answers with
//!   a trace record, the same line `simulate` writes.
//! - `{"type":"set_r","r":r}` recomputes everything for the new ratio and
//!   answers with a fresh bundle (witnesses included in its report). The
//!   intruder and the guards stay where they are.
//! - `{"type":"reset"}` with optional `"start":[x,y]` puts the intruder back
//!   and answers with the initial record.
//!
//! Failures answer `{"type":"error","code":..,"message":..}` and leave the
//! session as it was.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use guardtrack_core::fixtures;
use guardtrack_core::simulator::{SimConfig, SimError, SimState, Simulation};
use guardtrack_core::{Analysis, Point, Setup};
use serde_json::{json, Value};

use crate::export;
use crate::format::{scenario_code, CliError, ScenarioFile};

/// Scenario lookup shared by every session; setups are built once and then
/// only read.
pub struct Catalog {
    dir: Option<PathBuf>,
    cache: Mutex<HashMap<String, Arc<Loaded>>>,
}

pub struct Loaded {
    pub setup: Setup,
    pub ratio: Option<f64>,
}

fn error(code: &str, message: impl std::fmt::Display) -> String {
    json!({"type": "error", "code": code, "message": message.to_string()}).to_string()
}

impl Catalog {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self { dir, cache: Mutex::new(HashMap::new()) }
    }

    fn file(&self, name: &str) -> Result<ScenarioFile, (String, String)> {
        let unknown = || ("UnknownScenario".to_string(), format!("no scenario named {name:?}"));
        if name.is_empty() || name.contains(['/', '\\']) || name.contains("..") {
            return Err(unknown());
        }
        if let Some(dir) = &self.dir {
            let path = dir.join(format!("{name}.json"));
            if path.is_file() {
                return ScenarioFile::read(&path).map_err(|e| (e.code().to_string(), e.to_string()));
            }
        }
        fixtures::all()
            .into_iter()
            .find(|f| f.name == name)
            .map(|f| ScenarioFile::from_scenario(&f.scenario))
            .ok_or_else(unknown)
    }

    pub fn load(&self, name: &str) -> Result<Arc<Loaded>, (String, String)> {
        if let Some(l) = self.cache.lock().expect("catalog lock").get(name) {
            return Ok(Arc::clone(l));
        }
        let file = self.file(name)?;
        let setup = Setup::new(&file.vertices, file.guards.as_deref())
            .map_err(|e| (scenario_code(&e).to_string(), e.to_string()))?;
        let loaded = Arc::new(Loaded { setup, ratio: file.ratio });
        self.cache.lock().expect("catalog lock").insert(name.to_string(), Arc::clone(&loaded));
        Ok(loaded)
    }
}

struct Live {
    name: String,
    loaded: Arc<Loaded>,
    analysis: Analysis,
    config: SimConfig,
    state: SimState,
    step: usize,
}

impl Live {
    fn sim(&self) -> Simulation<'_> {
        let s = &self.loaded.setup;
        Simulation::new(&s.env, &s.guards, &s.classification, &self.analysis.strategy, &self.analysis.partition, self.config.clone())
            .expect("config validated when the session opened")
    }

    fn record_value(&self) -> Value {
        let sim = self.sim();
        let cov = sim.covering_guards(self.state.intruder, &self.state.stations);
        let line = export::record_line(&Simulation::record(&self.state, cov));
        serde_json::from_str(&line).expect("record line is json")
    }

    fn bundle(&self) -> String {
        let mut b = export::bundle(&self.name, &self.loaded.setup, &self.analysis);
        b["record"] = self.record_value();
        b.to_string()
    }
}

/// State of one client connection.
pub struct Session {
    catalog: Arc<Catalog>,
    live: Option<Live>,
}

impl Session {
    pub fn new(catalog: Arc<Catalog>) -> Self {
        Self { catalog, live: None }
    }

    /// Answers one client line.
    pub fn handle(&mut self, line: &str) -> String {
        let msg: Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => return error("BadMessage", e),
        };
        match msg["type"].as_str() {
            Some("open") => self.open(&msg),
            Some("intruder") => self.intruder(&msg),
            Some("set_r") => self.set_r(&msg),
            Some("reset") => self.reset(&msg),
            Some(other) => error("UnknownType", format!("unknown message type {other:?}")),
            None => error("BadMessage", "missing \"type\""),
        }
    }

    fn open(&mut self, msg: &Value) -> String {
        let Some(name) = msg["scenario"].as_str() else {
            return error("BadMessage", "open needs \"scenario\"");
        };
        let loaded = match self.catalog.load(name) {
            Ok(l) => l,
            Err((code, m)) => return error(&code, m),
        };
        let ratio = match msg.get("ratio") {
            Some(v) => match v.as_f64() {
                Some(r) => r,
                None => return error("BadMessage", "\"ratio\" must be a number"),
            },
            None => match loaded.ratio {
                Some(r) => r,
                None => return error(CliError::MissingRatio.code(), CliError::MissingRatio),
            },
        };
        let analysis = match loaded.setup.analyze(ratio) {
            Ok(a) => a,
            Err(e) => return error(scenario_code(&e), e),
        };
        let config = SimConfig::for_environment(&loaded.setup.env, ratio);
        let placeholder = SimState { t: 0.0, intruder: Point::default(), stations: Vec::new(), mode: 0 };
        let mut live = Live { name: name.to_string(), loaded, analysis, config, state: placeholder, step: 0 };
        let start = live.sim().default_start();
        live.state = match live.sim().initial_state(start) {
            Ok(s) => s,
            Err(e) => return error(CliError::Sim(e.clone()).code(), e),
        };
        let out = live.bundle();
        self.live = Some(live);
        out
    }

    fn intruder(&mut self, msg: &Value) -> String {
        let Some(live) = self.live.as_mut() else {
            return error("NoSession", "open a scenario first");
        };
        let Some(target) = point(&msg["target"]) else {
            return error("BadMessage", "\"target\" must be [x, y]");
        };
        let next = live.sim().tick(&live.state, target, live.step + 1);
        match next {
            Ok((state, rec)) => {
                live.state = state;
                live.step += 1;
                export::record_line(&rec)
            }
            Err(e @ SimError::TargetOutsidePolygon(_)) => error("TargetOutsidePolygon", e),
            Err(e) => error(CliError::Sim(e.clone()).code(), e),
        }
    }

    fn set_r(&mut self, msg: &Value) -> String {
        let Some(live) = self.live.as_mut() else {
            return error("NoSession", "open a scenario first");
        };
        let Some(r) = msg["r"].as_f64() else {
            return error("BadMessage", "set_r needs a numeric \"r\"");
        };
        let analysis = match live.loaded.setup.analyze(r) {
            Ok(a) => a,
            Err(e) => return error(scenario_code(&e), e),
        };
        live.analysis = analysis;
        live.config.ratio = r;
        let env = &live.loaded.setup.env;
        live.state.mode = live.analysis.partition.mode_of(env, live.state.intruder).unwrap_or(live.state.mode);
        live.bundle()
    }

    fn reset(&mut self, msg: &Value) -> String {
        let Some(live) = self.live.as_mut() else {
            return error("NoSession", "open a scenario first");
        };
        let start = match msg.get("start") {
            Some(v) => match point(v) {
                Some(p) => p,
                None => return error("BadMessage", "\"start\" must be [x, y]"),
            },
            None => live.sim().default_start(),
        };
        match live.sim().initial_state(start) {
            Ok(s) => {
                live.state = s;
                live.step = 0;
                export::record_line(&Simulation::record(&live.state, live.sim().covering_guards(start, &live.state.stations)))
            }
            Err(e) => error("TargetOutsidePolygon", e),
        }
    }
}

fn point(v: &Value) -> Option<Point> {
    let a = v.as_array()?;
    match a.as_slice() {
        [x, y] => Some(Point::new(x.as_f64()?, y.as_f64()?)),
        _ => None,
    }
}

pub struct Server {
    listener: TcpListener,
    catalog: Arc<Catalog>,
}

impl Server {
    pub fn bind(addr: impl std::net::ToSocketAddrs, dir: Option<PathBuf>) -> std::io::Result<Self> {
        Ok(Self { listener: TcpListener::bind(addr)?, catalog: Arc::new(Catalog::new(dir)) })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections until the listener fails.
    pub fn run(self) -> std::io::Result<()> {
        for stream in self.listener.incoming() {
            let stream = stream?;
            let catalog = Arc::clone(&self.catalog);
            std::thread::spawn(move || {
                let _ = serve_connection(stream, catalog);
            });
        }
        Ok(())
    }
}

fn serve_connection(stream: TcpStream, catalog: Arc<Catalog>) -> std::io::Result<()> {
    let mut out = stream.try_clone()?;
    let mut session = Session::new(catalog);
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = session.handle(&line);
        out.write_all(reply.as_bytes())?;
        out.write_all(b"\n")?;
        out.flush()?;
    }
    Ok(())
}
