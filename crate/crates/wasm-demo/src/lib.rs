//! Browser bindings: compare bounds, convert a constraint, tabulate a curve.
//! Every export takes and returns JSON text; errors come back as strings.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use tsn_delay::bounds::{compare_approaches, DelayBound};
use tsn_delay::num::{self, Ext, Q};
use tsn_delay::pwfn::{Curve, Tail};
use tsn_delay::regulation::FlowSpec;
use tsn_delay::scenario::{self, Scenario};
use tsn_delay::units::{parse_quantity, Dim};

fn us(e: &Ext) -> Value {
    match e {
        Ext::Fin(q) => json!(num::format_fixed(&(q * num::int(1_000_000)), 2)),
        Ext::Inf => json!("inf"),
    }
}

fn plain(e: &Ext) -> String {
    match e {
        Ext::Fin(q) => dec(q),
        Ext::Inf => "inf".into(),
    }
}

fn dec(q: &Q) -> String {
    tsn_delay::units::exact_decimal(q).unwrap_or_else(|| q.to_string())
}

/// JSON of a bundled scenario, for the page's picker.
#[wasm_bindgen]
pub fn bundled_scenario(name: &str) -> Option<String> {
    scenario::bundled(name).map(String::from)
}

#[wasm_bindgen]
pub fn bundled_names() -> String {
    json!(scenario::bundled_names()).to_string()
}

/// Classic, bit-level, g and packet-level bounds for every flow of a scenario.
#[wasm_bindgen]
pub fn compare(scenario_json: &str) -> Result<String, String> {
    let sc = Scenario::parse(scenario_json).map_err(|e| e.to_string())?;
    let mut flows = Vec::new();
    for fd in &sc.flows {
        let sys = sc.system(&fd.name).map_err(|e| e.to_string())?;
        let cmp = compare_approaches(&sys.flows, sys.f, &sys.server).map_err(|e| e.to_string())?;
        let row = |label: &str, b: &DelayBound| {
            json!({"method": label, "us": us(&b.value), "improvement": cmp.improvement(b).map(|p| format!("{p:.1}"))})
        };
        let mut rows = vec![row("classic", &cmp.classic), row("bit-level", &cmp.bit), row("g-regulation", &cmp.g)];
        if let Some(p) = &cmp.pkt {
            rows.push(row("packet-level", p));
        }
        let checks: Vec<Value> = cmp.checks.iter().map(|(s, ok)| json!({"check": s, "holds": ok})).collect();
        flows.push(json!({"flow": fd.name, "server": sys.server_name, "rows": rows, "checks": checks}));
    }
    Ok(Value::Array(flows).to_string())
}

fn breakpoints(c: &Curve) -> Value {
    let pts: Vec<Value> = c
        .breakpoints()
        .iter()
        .map(|p| json!([dec(&p.x), plain(&p.value), plain(&p.right), dec(&p.slope)]))
        .collect();
    let tail = match c.tail() {
        Tail::Affine => json!("affine"),
        Tail::Periodic { start, period, increment } => {
            json!({"from": dec(&c.breakpoints()[*start].x), "period": dec(period), "increment": dec(increment)})
        }
    };
    json!({"points": pts, "tail": tail})
}

/// Converts a constraint `{family, kind, params}` to `bit` or `g`.
#[wasm_bindgen]
pub fn convert(constraint_json: &str, lmin: &str, lmax: &str, to: &str) -> Result<String, String> {
    let desc = scenario::parse_constraint(constraint_json).map_err(|e| e.to_string())?;
    let c = scenario::build_constraint(&desc)?;
    let lmax = parse_quantity(lmax, Dim::Data)?;
    let lmin = if lmin.trim().is_empty() { lmax.clone() } else { parse_quantity(lmin, Dim::Data)? };
    let fl = FlowSpec::new("flow", c, lmin, lmax).map_err(|e| e.to_string())?;
    let curve = match to {
        "bit" => fl.to_bit().map(|a| a.curve().clone()),
        "g" => fl.to_g().map(|g| g.curve().clone()),
        other => return Err(format!("unknown target family {other:?}; use bit or g")),
    }
    .map_err(|e| e.to_string())?;
    Ok(breakpoints(&curve).to_string())
}

/// `w, w-, w+, w_lower_inv, w_upper_inv` at comma-separated points, for a
/// curve `{points, periodic}` or a constraint.
#[wasm_bindgen]
pub fn tabulate(spec_json: &str, at: &str) -> Result<String, String> {
    let c = if spec_json.contains("\"family\"") {
        let d = scenario::parse_constraint(spec_json).map_err(|e| e.to_string())?;
        scenario::build_constraint(&d)?.curve().clone()
    } else {
        scenario::parse_curve(spec_json).map_err(|e| e.to_string())?.build()?
    };
    let mut xs = Vec::new();
    for s in at.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        xs.push(parse_quantity(s, Dim::Plain)?);
    }
    if xs.is_empty() {
        xs = c.breakpoints().iter().map(|p| p.x.clone()).collect();
    }
    let lower = c.lower_pseudo_inverse().map_err(|e| e.to_string())?;
    let upper = c.upper_pseudo_inverse().map_err(|e| e.to_string())?;
    let ev = |r: Result<Ext, tsn_delay::pwfn::CurveError>| r.map(|e| plain(&e)).map_err(|e| e.to_string());
    let mut rows = Vec::new();
    for x in &xs {
        let left = if x > &num::zero() { ev(c.eval_left(x))? } else { "-".into() };
        rows.push(json!([
            dec(x),
            ev(c.eval(x))?,
            left,
            ev(c.eval_right(x))?,
            ev(lower.eval(x))?,
            ev(upper.eval(x))?
        ]));
    }
    Ok(json!({"columns": ["x", "w", "w-", "w+", "w_lower_inv", "w_upper_inv"], "rows": rows}).to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_rows() {
        let out: Value = serde_json::from_str(&compare(&bundled_scenario("table1").unwrap()).unwrap()).unwrap();
        let rows = &out[0]["rows"];
        assert_eq!(rows[0]["us"], "330.00");
        assert_eq!(rows[1]["us"], "325.39");
        assert_eq!(rows[3]["us"], "222.00");
    }

    #[test]
    fn lrq_to_bit() {
        let out = convert(r#"{"family":"g","kind":"lrq","params":{"rate":"100Mbps"}}"#, "64B", "1500B", "bit").unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["points"][0], json!(["0", "0", "12000", "100000000"]));
        assert_eq!(v["tail"], "affine");
    }

    #[test]
    fn token_bucket_table() {
        let spec = r#"{"family":"bit","kind":"token-bucket","params":{"rate":"2bps","burst":"3bit"}}"#;
        let v: Value = serde_json::from_str(&tabulate(spec, "0, 1").unwrap()).unwrap();
        assert_eq!(v["rows"][0], json!(["0", "0", "-", "3", "0", "0"]));
        assert_eq!(v["rows"][1], json!(["1", "5", "5", "5", "0", "0"]));
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(compare("{").is_err());
        assert!(convert(r#"{"family":"g","kind":"lrq","params":{"rate":"1bps"}}"#, "", "8", "pkt").is_err());
    }
}
