use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};

use guardtrack_cli::format::ScenarioFile;
use guardtrack_core::fixtures;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_guardtrack");

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("guardtrack-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_fixture(dir: &Path, f: &fixtures::Fixture) -> PathBuf {
    let path = dir.join(format!("{}.json", f.name));
    std::fs::write(&path, ScenarioFile::from_scenario(&f.scenario).to_json()).unwrap();
    path
}

fn run(args: &[&str]) -> (i32, String, String) {
    let o = Command::new(BIN).args(args).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8(o.stdout).unwrap(), String::from_utf8(o.stderr).unwrap())
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn analyze_exit_codes() {
    let dir = scratch("analyze");
    let file = write_fixture(&dir, &fixtures::strip());
    let out = dir.join("ok");
    let (code, stdout, _) = run(&["analyze", "--scenario", file.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    assert_eq!(read_json(&out.join("report.json"))["trackable"], true);
    for name in ["classification", "curves", "partition", "automaton"] {
        assert!(out.join(format!("{name}.json")).is_file());
    }

    // Above the strip's threshold (about 0.838).
    let out = dir.join("over");
    let (code, _, _) =
        run(&["analyze", "--scenario", file.to_str().unwrap(), "--ratio", "1.0", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    let rep = read_json(&out.join("report.json"));
    assert_eq!(rep["trackable"], false);
    assert!(!rep["witnesses"].as_array().unwrap().is_empty());

    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"version":1,"vertices":[[0,0],[2,2],[2,0],[0,2]],"ratio":0.5}"#).unwrap();
    let (code, _, stderr) = run(&["analyze", "--scenario", bad.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stderr.contains("SelfIntersecting"), "{stderr}");

    let (code, _, stderr) = run(&["analyze", "--scenario", dir.join("missing.json").to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stderr.contains("Io"), "{stderr}");
}

#[test]
fn speedratio_reports_both_routes() {
    let dir = scratch("speed");
    let file = write_fixture(&dir, &fixtures::strip());
    let (code, _, _) = run(&["speedratio", "--scenario", file.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 0);
    let res = read_json(&dir.join("speedratio.json"));
    let (a, b) = (res["r_max"].as_f64().unwrap(), res["r_bis"].as_f64().unwrap());
    assert!((a - b).abs() <= 1e-4 * a, "{a} vs {b}");
    assert_eq!(res["pairs"].as_array().unwrap().len(), 1);

    let file = write_fixture(&dir, &fixtures::l_shape());
    run(&["speedratio", "--scenario", file.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert!(read_json(&dir.join("speedratio.json"))["r_max"].is_null());
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = scratch("sim");
    let file = write_fixture(&dir, &fixtures::conversion());
    let mut traces = Vec::new();
    for k in 0..2 {
        let out = dir.join(format!("run{k}"));
        let (code, stdout, _) = run(&[
            "simulate",
            "--scenario",
            file.to_str().unwrap(),
            "--policy",
            "greedy",
            "--steps",
            "300",
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{stdout}");
        traces.push(std::fs::read(out.join("trace.jsonl")).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
    assert_eq!(traces[0].iter().filter(|&&b| b == b'\n').count(), 301);

    let out = dir.join("breach");
    let (code, stdout, _) = run(&[
        "simulate",
        "--scenario",
        file.to_str().unwrap(),
        "--policy",
        "witness",
        "--ratio",
        "0.7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "{stdout}");
    assert_eq!(read_json(&out.join("verdict.json"))["verdict"], "BREACH");

    let (code, _, stderr) = run(&["simulate", "--scenario", file.to_str().unwrap(), "--policy", "dance"]);
    assert_eq!(code, 2, "clap usage errors exit 2");
    assert!(stderr.contains("unknown policy"));
}

struct Server {
    child: Child,
    addr: String,
}

impl Server {
    fn start(dir: &Path) -> Self {
        let mut child = Command::new(BIN)
            .args(["serve", "--port", "0", "--scenario", dir.to_str().unwrap()])
            .stdout(Stdio::piped())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
        let addr = line.trim().strip_prefix("listening on ").unwrap().to_string();
        Self { child, addr }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    fn connect(addr: &str) -> Self {
        let s = TcpStream::connect(addr).unwrap();
        Self { writer: s.try_clone().unwrap(), reader: BufReader::new(s) }
    }

    fn send_raw(&mut self, msg: &str) -> String {
        self.writer.write_all(msg.as_bytes()).unwrap();
        self.writer.write_all(b"\n").unwrap();
        let mut line = String::new();
        self.reader.read_line(&mut line).unwrap();
        line.trim_end().to_string()
    }

    fn send(&mut self, msg: &str) -> Value {
        serde_json::from_str(&self.send_raw(msg)).unwrap()
    }
}

#[test]
fn serve_session_protocol() {
    let dir = scratch("serve");
    let fx = fixtures::conversion();
    let file = write_fixture(&dir, &fx);
    let out = dir.join("analysis");
    run(&["analyze", "--scenario", file.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let faces = read_json(&out.join("partition.json"))["faces"].as_array().unwrap().len();

    let server = Server::start(&dir);
    let mut c = Client::connect(&server.addr);
    let b = c.send(r#"{"type":"open","scenario":"conversion"}"#);
    assert_eq!(b["type"], "bundle");
    assert_eq!(b["partition"]["faces"].as_array().unwrap().len(), faces);
    assert_eq!(b["report"]["trackable"], true);
    let start = b["record"].clone();

    let e = c.send(r#"{"type":"intruder","target":[100,100]}"#);
    assert_eq!(e["type"], "error");
    assert_eq!(e["code"], "TargetOutsidePolygon");
    let r = c.send(r#"{"type":"intruder","target":[0.0,0.0]}"#);
    assert!(r["t"].as_f64().unwrap() > 0.0);
    assert_eq!(r["s"].as_array().unwrap().len(), 2);

    // A second client is independent of the first.
    let mut d = Client::connect(&server.addr);
    assert_eq!(d.send(r#"{"type":"open","scenario":"conversion"}"#)["record"], start);

    let b = c.send(r#"{"type":"set_r","r":0.7}"#);
    assert_eq!(b["type"], "bundle");
    assert_eq!(b["report"]["trackable"], false);
    assert!(!b["report"]["witnesses"].as_array().unwrap().is_empty());
    assert_eq!(c.send(r#"{"type":"reset"}"#)["t"], 0.0);
    assert_eq!(c.send(r#"{"type":"open","scenario":"nowhere"}"#)["code"], "UnknownScenario");
}

#[test]
fn serve_ticks_match_scripted_simulation() {
    let dir = scratch("script");
    let fx = fixtures::strip();
    let file = write_fixture(&dir, &fx);
    let script = dir.join("targets.json");
    std::fs::write(&script, "[[0.2, 0.5]]").unwrap();
    let out = dir.join("sim");
    let policy = format!("script:{}", script.display());
    run(&[
        "simulate",
        "--scenario",
        file.to_str().unwrap(),
        "--policy",
        &policy,
        "--steps",
        "40",
        "--out",
        out.to_str().unwrap(),
    ]);
    let trace = std::fs::read_to_string(out.join("trace.jsonl")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();

    let server = Server::start(&dir);
    let mut c = Client::connect(&server.addr);
    let b = c.send(r#"{"type":"open","scenario":"strip"}"#);
    assert_eq!(b["record"], serde_json::from_str::<Value>(lines[0]).unwrap());
    for want in &lines[1..] {
        assert_eq!(c.send_raw(r#"{"type":"intruder","target":[0.2,0.5]}"#), *want);
    }
}
