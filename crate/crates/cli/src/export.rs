//! JSON views of every pipeline stage. Object keys come out sorted, floats
//! in shortest round-trip form, and infinite ratios as `null`.

use guardtrack_core::curves::Strategy;
use guardtrack_core::geometry::{AreaRegion, GeodesicPath, Polyline};
use guardtrack_core::guards::{GuardType, TriangleClass};
use guardtrack_core::partition::{HybridAutomaton, RegionPartition};
use guardtrack_core::reachability::{TrackabilityReport, Witness};
use guardtrack_core::simulator::{Trace, TraceRecord, Verdict};
use guardtrack_core::speed_ratio::SpeedRatioResult;
use guardtrack_core::{Analysis, Point, Setup};
use serde::Serialize;
use serde_json::{json, Value};

pub fn pt(p: Point) -> Value {
    json!([p.x, p.y])
}

fn pts(ps: &[Point]) -> Value {
    Value::Array(ps.iter().map(|&p| pt(p)).collect())
}

fn polylines(ls: &[Polyline]) -> Value {
    Value::Array(ls.iter().map(|l| json!({"closed": l.closed, "points": pts(&l.points)})).collect())
}

/// Shapes as lists of loops; the first loop of a shape is its outer
/// boundary, the rest are holes.
pub fn loops(r: &AreaRegion) -> Value {
    Value::Array(r.shapes().iter().map(|s| Value::Array(s.iter().map(|c| pts(c)).collect())).collect())
}

fn path(p: &GeodesicPath) -> Value {
    json!({"length": p.length, "points": pts(&p.points)})
}

fn kind(k: GuardType) -> Value {
    match k {
        GuardType::Zero { end, free } => json!({"type": 0, "pinned_end": end, "free": free}),
        GuardType::One => json!({"type": 1}),
        GuardType::Two => json!({"type": 2}),
    }
}

pub fn classification(setup: &Setup) -> Value {
    let cls = &setup.classification;
    let tri = &setup.env.tri;
    let guards: Vec<Value> = setup
        .guards
        .iter()
        .zip(&cls.guards)
        .map(|(g, info)| {
            json!({
                "id": g.id,
                "diagonal": g.endpoints,
                "length": g.length,
                "kind": kind(info.kind),
                "converted_at": info.converted_at,
                "safe_zone": info.zones.safe_zone,
                "unsafe_zone": info.zones.unsafe_zone,
                "regular": info.zones.regular,
                "regular_neighbors": info.zones.regular_neighbors,
            })
        })
        .collect();
    let triangles: Vec<Value> = (0..tri.len())
        .map(|t| {
            let class = match cls.triangles.classes[t] {
                TriangleClass::Safe => json!("safe"),
                TriangleClass::Unsafe(o) => json!({"unsafe": [o.guard, o.end]}),
                TriangleClass::Regular => json!("regular"),
            };
            let options: Vec<[usize; 2]> = cls.triangles.options[t].iter().map(|o| [o.guard, o.end]).collect();
            json!({"id": t, "vertices": tri.triangles()[t], "class": class, "options": options})
        })
        .collect();
    let conversions: Vec<Value> =
        cls.conversions.iter().map(|c| json!({"guard": c.guard, "end": c.end, "triangles": c.triangles})).collect();
    json!({
        "guards": guards,
        "triangles": triangles,
        "conversions": conversions,
        "passes": cls.passes,
        "warnings": setup.warnings.iter().map(|w| format!("{w:?}")).collect::<Vec<_>>(),
    })
}

/// One record per critical region.
pub fn curves(strategy: &Strategy) -> Value {
    let out: Vec<Value> = strategy
        .regions()
        .map(|r| {
            let s_int: Vec<Value> = r.components.iter().map(|c| polylines(&c.s_int)).collect();
            let s_ext: Vec<Value> = r.components.iter().map(|c| polylines(c.s_ext())).collect();
            json!({
                "guard": r.guard,
                "endpoint": r.end,
                "d_max": r.d_max,
                "s_int": s_int,
                "s_ext": s_ext,
                "protected": loops(&r.protected),
                "region": loops(&r.region),
            })
        })
        .collect();
    json!({"ratio": strategy.ratio, "regions": out})
}

pub fn partition(p: &RegionPartition) -> Value {
    let faces: Vec<Value> = p
        .faces
        .iter()
        .map(|f| {
            let inside: Vec<[usize; 2]> = f.inside.iter().map(|k| [k.guard, k.end]).collect();
            json!({"id": f.id, "inside": inside, "area": f.region.area(), "loops": loops(&f.region)})
        })
        .collect();
    json!({"faces": faces, "external": p.external, "adjacency": p.adjacency, "total_area": p.total_area()})
}

pub fn automaton(a: &HybridAutomaton) -> Value {
    json!({
        "modes": a.modes,
        "inputs": a.inputs,
        "transitions": a.transitions,
        "external": a.external,
        "active": a.active,
        "guard_count": a.guard_count,
    })
}

pub fn witness(w: &Witness) -> Value {
    json!({
        "point": pt(w.point),
        "cause": w.cause.as_str(),
        "triangle": w.triangle,
        "guards": w.guards,
        "area": w.area,
    })
}

pub fn report(r: &TrackabilityReport) -> Value {
    json!({
        "trackable": r.trackable,
        "witnesses": r.witnesses.iter().map(witness).collect::<Vec<_>>(),
        "forbidden": r.forbidden,
        "invariant_faces": r.invariant_faces,
        "trace": r.trace,
        "iterations": r.iterations,
    })
}

pub fn speed_ratio(r: &SpeedRatioResult) -> Value {
    let pairs: Vec<Value> =
        r.pairs.iter().map(|c| json!({"guard": c.guard, "ratio": c.ratio, "path": path(&c.path)})).collect();
    let triangles: Vec<Value> = r
        .triangles
        .iter()
        .map(|t| {
            let active: Vec<[usize; 2]> = t.active.iter().map(|o| [o.guard, o.end]).collect();
            json!({
                "triangle": t.triangle,
                "ratio": t.ratio,
                "point": pt(t.point),
                "active": active,
                "paths": t.paths.iter().map(path).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "r_max": r.r_max,
        "r_bis": r.r_bis,
        "r_unsafe_pairs": r.r_unsafe_pairs,
        "discrepancy": r.discrepancy,
        "degenerate": r.degenerate,
        "pairs": pairs,
        "triangles": triangles,
        "bracket": r.bracket,
    })
}

/// Trace line; field order is fixed so lines compare byte for byte.
#[derive(Serialize)]
struct RecordLine<'a> {
    t: f64,
    #[serde(rename = "p_I")]
    intruder: [f64; 2],
    s: &'a [f64],
    mode: usize,
    covered: bool,
    guards: &'a [usize],
}

pub fn record_line(r: &TraceRecord) -> String {
    let line = RecordLine {
        t: r.t,
        intruder: [r.intruder.x, r.intruder.y],
        s: &r.stations,
        mode: r.mode,
        covered: r.covered,
        guards: &r.guards,
    };
    serde_json::to_string(&line).expect("record serializes")
}

pub fn trace_lines(t: &Trace) -> String {
    let mut out = String::new();
    for r in &t.records {
        out.push_str(&record_line(r));
        out.push('\n');
    }
    out
}

pub fn verdict(v: &Verdict) -> Value {
    match v {
        Verdict::Tracked => json!({"verdict": "TRACKED"}),
        Verdict::Breach { t, point } => json!({"verdict": "BREACH", "t": t, "point": pt(*point)}),
    }
}

/// Everything a viewer needs for one scenario at one ratio.
pub fn bundle(name: &str, setup: &Setup, analysis: &Analysis) -> Value {
    json!({
        "type": "bundle",
        "scenario": name,
        "ratio": analysis.strategy.ratio,
        "polygon": pts(setup.env.poly.vertices()),
        "triangles": setup.env.tri.triangles(),
        "classification": classification(setup),
        "curves": curves(&analysis.strategy),
        "partition": partition(&analysis.partition),
        "automaton": automaton(&analysis.automaton),
        "report": report(&analysis.report),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_line_keeps_field_order() {
        let r = TraceRecord {
            t: 0.5,
            intruder: Point::new(1.0, -2.25),
            stations: vec![0.0, 1.0],
            mode: 3,
            covered: true,
            guards: vec![1],
        };
        assert_eq!(record_line(&r), r#"{"t":0.5,"p_I":[1.0,-2.25],"s":[0.0,1.0],"mode":3,"covered":true,"guards":[1]}"#);
    }

    #[test]
    fn unbounded_ratio_is_null() {
        assert_eq!(json!(f64::INFINITY), Value::Null);
    }
}
