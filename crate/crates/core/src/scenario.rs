//! Scenario files: one or more servers, flows with their constraints, and
//! what to compute.
//!
//! ```json
//! {
//!   "server": {"kind": "rate-latency", "params": {"rate": "100Mbps", "latency": "10us"},
//!              "lineRate": "1Gbps", "transmitAtLineRate": true},
//!   "flows": [{"name": "f1",
//!              "constraint": {"family": "packet", "kind": "sliding-interval",
//!                             "params": {"interval": "1ms", "count": 2}},
//!              "lmin": "64B", "lmax": "1500B"}],
//!   "analysis": {"flow": "f1", "methods": ["classic", "thm-bit", "thm-pkt"], "units": "us"}
//! }
//! ```
//!
//! Several servers go under `"servers"` (each with a `"name"`), and each
//! flow then names its server.

use serde_json::{json, Map, Value};
use thiserror::Error;

use num_traits::Signed;

use crate::bounds::Method;
use crate::num::{self, Ext, Q};
use crate::pwfn::{Breakpoint, Curve, Tail};
use crate::regulation::{BitArrivalCurve, Constraint, FlowSpec, GRegulation, PacketArrivalCurve};
use crate::service::{self, ServerSpec};
use crate::units::{format_quantity, parse_quantity, Dim, TimeUnit};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{path}: {msg}")]
pub struct ScenarioError {
    pub path: String,
    pub msg: String,
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

fn err<T>(path: &str, msg: impl Into<String>) -> Result<T> {
    Err(ScenarioError { path: path.to_string(), msg: msg.into() })
}

/// Curve given by its breakpoints `[x, value, right, slope]` in base units.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveDesc {
    pub points: Vec<(Q, Ext, Ext, Q)>,
    /// `(start index, period, increment)`.
    pub periodic: Option<(usize, Q, Q)>,
}

impl CurveDesc {
    pub fn build(&self) -> std::result::Result<Curve, String> {
        let pts = self
            .points
            .iter()
            .map(|(x, v, r, s)| Breakpoint { x: x.clone(), value: v.clone(), right: r.clone(), slope: s.clone() })
            .collect();
        let tail = match &self.periodic {
            Some((start, period, increment)) => {
                Tail::Periodic { start: *start, period: period.clone(), increment: increment.clone() }
            }
            None => Tail::Affine,
        };
        Curve::new(pts, tail).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ServiceDesc {
    RateLatency { rate: Q, latency: Q },
    Drr { n: u32, quantum: Q, eps: Q, lmax: Q },
    FifoResidual { rate: Q, theta: Q },
    Explicit(CurveDesc),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ServerDesc {
    pub name: String,
    pub service: ServiceDesc,
    pub line_rate: Q,
    pub transmit_at_line_rate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintDesc {
    TokenBucket { rate: Q, burst: Q },
    StaircaseBits { burst: Q, interval: Q },
    BitCurve(CurveDesc),
    Lrq { rate: Q },
    ShiftedRate { rate: Q, shift: Q },
    GCurve(CurveDesc),
    SlidingInterval { interval: Q, count: Q },
    FixedInterval { interval: Q, count: Q },
    TokenBucketPacket { rate: Q, burst: Q },
    PacketCurve(CurveDesc),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowDesc {
    pub name: String,
    pub server: Option<String>,
    pub constraint: ConstraintDesc,
    pub lmin: Q,
    pub lmax: Q,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tolerance {
    /// Fraction of the expected value.
    Relative(Q),
    /// Seconds.
    Absolute(Q),
}

/// An expected bound, checked by the commands that compute it.
#[derive(Clone, Debug, PartialEq)]
pub struct Expectation {
    pub flow: Option<String>,
    pub method: Method,
    pub value: Q,
    pub tolerance: Tolerance,
}

impl Expectation {
    pub fn holds(&self, got: &Ext) -> bool {
        let Ext::Fin(g) = got else { return false };
        let tol = match &self.tolerance {
            Tolerance::Relative(f) => f * self.value.abs(),
            Tolerance::Absolute(a) => a.clone(),
        };
        (g - &self.value).abs() <= tol
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisDesc {
    pub flow: Option<String>,
    pub methods: Vec<Method>,
    pub eps: Option<Q>,
    pub units: TimeUnit,
    pub expect: Vec<Expectation>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub servers: Vec<ServerDesc>,
    pub flows: Vec<FlowDesc>,
    pub analysis: AnalysisDesc,
}

/// Flows sharing one server, ready for the bound computations.
#[derive(Clone, Debug)]
pub struct System {
    pub server_name: String,
    pub server: ServerSpec,
    pub flows: Vec<FlowSpec>,
    /// Index of the flow of interest in `flows`.
    pub f: usize,
}

pub fn method_from_str(s: &str) -> Option<Method> {
    Some(match s {
        "classic" | "nc" => Method::Classic,
        "thm-pkt" | "pkt" => Method::ThmPkt,
        "thm-g" | "g" => Method::ThmG,
        "thm-bit" | "bit" => Method::ThmBit,
        "lemma-ag" | "ag" => Method::LemmaAg,
        "sweep" => Method::Sweep,
        _ => return None,
    })
}

const BUNDLED: [(&str, &str); 5] = [
    ("table1", include_str!("../scenarios/table1.json")),
    ("sec7a", include_str!("../scenarios/sec7a.json")),
    ("sec7b", include_str!("../scenarios/sec7b.json")),
    ("sec7c", include_str!("../scenarios/sec7c.json")),
    ("appendixC", include_str!("../scenarios/appendixC.json")),
];

/// Names of the scenarios shipped with the crate.
pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|b| b.0).collect()
}

/// JSON text of a bundled scenario.
pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|b| b.0 == name).map(|b| b.1)
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario> {
        let v: Value = serde_json::from_str(text).map_err(|e| ScenarioError { path: "$".into(), msg: e.to_string() })?;
        Scenario::from_json(&v)
    }

    pub fn from_json(v: &Value) -> Result<Scenario> {
        let root = obj(v, "$")?;
        let servers = match (root.get("server"), root.get("servers")) {
            (Some(s), None) => vec![server_from(s, "$.server", true)?],
            (None, Some(Value::Array(list))) if !list.is_empty() => list
                .iter()
                .enumerate()
                .map(|(i, s)| server_from(s, &format!("$.servers[{i}]"), false))
                .collect::<Result<_>>()?,
            (None, Some(_)) => return err("$.servers", "expected a non-empty array"),
            (Some(_), Some(_)) => return err("$", "give either \"server\" or \"servers\", not both"),
            (None, None) => return err("$", "missing \"server\""),
        };
        let flows_v = root.get("flows").ok_or_else(|| ScenarioError { path: "$".into(), msg: "missing \"flows\"".into() })?;
        let Value::Array(list) = flows_v else { return err("$.flows", "expected an array") };
        if list.is_empty() {
            return err("$.flows", "at least one flow is required");
        }
        let mut flows = Vec::with_capacity(list.len());
        for (i, f) in list.iter().enumerate() {
            let path = format!("$.flows[{i}]");
            let fd = flow_from(f, &path)?;
            if flows.iter().any(|x: &FlowDesc| x.name == fd.name) {
                return err(&path, format!("duplicate flow name {:?}", fd.name));
            }
            match &fd.server {
                Some(s) if !servers.iter().any(|x| &x.name == s) => {
                    return err(&format!("{path}.server"), format!("unknown server {s:?}"))
                }
                None if servers.len() > 1 => return err(&path, "several servers are defined; name this flow's server"),
                _ => {}
            }
            flows.push(fd);
        }
        let analysis = match root.get("analysis") {
            Some(a) => analysis_from(a, "$.analysis")?,
            None => AnalysisDesc { flow: None, methods: vec![], eps: None, units: TimeUnit::Us, expect: vec![] },
        };
        if let Some(f) = &analysis.flow {
            if !flows.iter().any(|x| &x.name == f) {
                return err("$.analysis.flow", format!("unknown flow {f:?}"));
            }
        }
        let sc = Scenario { servers, flows, analysis };
        // build everything once so that invalid curves fail at parse time
        for (i, fl) in sc.flows.iter().enumerate() {
            sc.flow_spec(fl).map_err(|e| ScenarioError { path: format!("$.flows[{i}]"), msg: e })?;
        }
        for (i, s) in sc.servers.iter().enumerate() {
            let path = if sc.servers.len() == 1 { "$.server".to_string() } else { format!("$.servers[{i}]") };
            s.build().map_err(|e| ScenarioError { path, msg: e })?;
        }
        Ok(sc)
    }

    /// Canonical JSON.
    pub fn to_json(&self) -> Value {
        let mut root = Map::new();
        if self.servers.len() == 1 && self.servers[0].name == "default" {
            root.insert("server".into(), server_to(&self.servers[0], false));
        } else {
            root.insert("servers".into(), Value::Array(self.servers.iter().map(|s| server_to(s, true)).collect()));
        }
        root.insert("flows".into(), Value::Array(self.flows.iter().map(flow_to).collect()));
        root.insert("analysis".into(), analysis_to(&self.analysis));
        Value::Object(root)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serializable") + "\n"
    }

    pub fn flow_spec(&self, fl: &FlowDesc) -> std::result::Result<FlowSpec, String> {
        let c = build_constraint(&fl.constraint)?;
        FlowSpec::new(fl.name.clone(), c, fl.lmin.clone(), fl.lmax.clone()).map_err(|e| e.to_string())
    }

    /// Flow of interest: the argument, else the analysis section, else the
    /// first flow.
    pub fn focus<'a>(&'a self, flow: Option<&'a str>) -> Result<&'a str> {
        let name = flow.or(self.analysis.flow.as_deref()).unwrap_or(&self.flows[0].name);
        if self.flows.iter().any(|f| f.name == name) {
            Ok(name)
        } else {
            err("--flow", format!("unknown flow {name:?}"))
        }
    }

    /// The flows sharing the server of `flow`.
    pub fn system(&self, flow: &str) -> Result<System> {
        let Some(fd) = self.flows.iter().find(|f| f.name == flow) else {
            return err("--flow", format!("unknown flow {flow:?}"));
        };
        let server_name = fd.server.clone().unwrap_or_else(|| self.servers[0].name.clone());
        let sd = self.servers.iter().find(|s| s.name == server_name).expect("checked at parse time");
        let server = sd.build().map_err(|m| ScenarioError { path: format!("server {server_name}"), msg: m })?;
        let mut flows = Vec::new();
        let mut f = 0;
        for x in &self.flows {
            let s = x.server.clone().unwrap_or_else(|| self.servers[0].name.clone());
            if s == server_name {
                if x.name == flow {
                    f = flows.len();
                }
                flows.push(self.flow_spec(x).map_err(|m| ScenarioError { path: format!("flow {}", x.name), msg: m })?);
            }
        }
        Ok(System { server_name, server, flows, f })
    }

    /// Expectations that apply to `flow`.
    pub fn expectations_for<'a>(&'a self, flow: &'a str) -> impl Iterator<Item = &'a Expectation> + 'a {
        self.analysis.expect.iter().filter(move |e| e.flow.as_deref().is_none_or(|f| f == flow))
    }
}

impl ServerDesc {
    pub fn build(&self) -> std::result::Result<ServerSpec, String> {
        let beta = match &self.service {
            ServiceDesc::RateLatency { rate, latency } => service::rate_latency(rate, latency),
            ServiceDesc::Drr { n, quantum, eps, lmax } => service::drr(*n, quantum, &self.line_rate, eps, lmax),
            ServiceDesc::FifoResidual { rate, theta } => service::fifo_residual(rate, theta),
            ServiceDesc::Explicit(c) => return c.build().and_then(|b| self.wrap(b)),
        }
        .map_err(|e| e.to_string())?;
        self.wrap(beta)
    }

    fn wrap(&self, beta: Curve) -> std::result::Result<ServerSpec, String> {
        ServerSpec::new(beta, self.line_rate.clone(), self.transmit_at_line_rate).map_err(|e| e.to_string())
    }
}

pub fn build_constraint(c: &ConstraintDesc) -> std::result::Result<Constraint, String> {
    use ConstraintDesc as C;
    let r = match c {
        C::TokenBucket { rate, burst } => BitArrivalCurve::token_bucket(rate.clone(), burst.clone()).map(Constraint::Bit),
        C::StaircaseBits { burst, interval } => {
            BitArrivalCurve::staircase(burst.clone(), interval.clone()).map(Constraint::Bit)
        }
        C::BitCurve(d) => BitArrivalCurve::new(d.build()?).map(Constraint::Bit),
        C::Lrq { rate } => GRegulation::lrq(rate.clone()).map(Constraint::G),
        C::ShiftedRate { rate, shift } => GRegulation::shifted_rate(rate.clone(), shift.clone()).map(Constraint::G),
        C::GCurve(d) => GRegulation::new(d.build()?).map(Constraint::G),
        C::SlidingInterval { interval, count } => {
            PacketArrivalCurve::sliding_interval(interval.clone(), count.clone()).map(Constraint::Packet)
        }
        C::FixedInterval { interval, count } => {
            PacketArrivalCurve::fixed_interval(interval.clone(), count.clone()).map(Constraint::Packet)
        }
        C::TokenBucketPacket { rate, burst } => {
            PacketArrivalCurve::token_bucket(rate.clone(), burst.clone()).map(Constraint::Packet)
        }
        C::PacketCurve(d) => PacketArrivalCurve::new(d.build()?).map(Constraint::Packet),
    };
    r.map_err(|e| e.to_string())
}

/// A standalone constraint object `{family, kind, params}`.
pub fn parse_constraint(text: &str) -> Result<ConstraintDesc> {
    let v: Value = serde_json::from_str(text).map_err(|e| ScenarioError { path: "$".into(), msg: e.to_string() })?;
    constraint_from(&v, "$")
}

/// A standalone curve object `{points, periodic}`.
pub fn parse_curve(text: &str) -> Result<CurveDesc> {
    let v: Value = serde_json::from_str(text).map_err(|e| ScenarioError { path: "$".into(), msg: e.to_string() })?;
    curve_from(&v, "$")
}

// ---- reading ----

fn obj<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| ScenarioError { path: path.into(), msg: "expected an object".into() })
}

fn field<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    m.get(key).ok_or_else(|| ScenarioError { path: path.into(), msg: format!("missing {key:?}") })
}

fn string(m: &Map<String, Value>, key: &str, path: &str) -> Result<String> {
    match field(m, key, path)? {
        Value::String(s) => Ok(s.clone()),
        _ => err(&format!("{path}.{key}"), "expected a string"),
    }
}

fn quantity(m: &Map<String, Value>, key: &str, path: &str, dim: Dim) -> Result<Q> {
    let p = format!("{path}.{key}");
    let v = field(m, key, path)?;
    let q = value_quantity(v, &p, dim)?;
    if q.is_negative() {
        return err(&p, format!("must be nonnegative, got {q}"));
    }
    Ok(q)
}

fn value_quantity(v: &Value, path: &str, dim: Dim) -> Result<Q> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return err(path, "expected a number or a quantity string"),
    };
    parse_quantity(&text, dim).map_err(|m| ScenarioError { path: path.into(), msg: m })
}

fn ext_value(v: &Value, path: &str) -> Result<Ext> {
    match v {
        Value::String(s) if s == "inf" => Ok(Ext::Inf),
        _ => Ok(Ext::Fin(value_quantity(v, path, Dim::Plain)?)),
    }
}

fn integer(m: &Map<String, Value>, key: &str, path: &str) -> Result<Q> {
    let q = quantity(m, key, path, Dim::Plain)?;
    if !q.is_integer() || !q.is_positive() {
        return err(&format!("{path}.{key}"), format!("expected a positive integer, got {q}"));
    }
    Ok(q)
}

fn curve_from(v: &Value, path: &str) -> Result<CurveDesc> {
    let m = obj(v, path)?;
    let Value::Array(pts) = field(m, "points", path)? else { return err(&format!("{path}.points"), "expected an array") };
    let mut points = Vec::with_capacity(pts.len());
    for (i, p) in pts.iter().enumerate() {
        let pp = format!("{path}.points[{i}]");
        let Some(arr) = p.as_array().filter(|a| a.len() == 4) else {
            return err(&pp, "expected [x, value, right, slope]");
        };
        points.push((
            value_quantity(&arr[0], &pp, Dim::Plain)?,
            ext_value(&arr[1], &pp)?,
            ext_value(&arr[2], &pp)?,
            value_quantity(&arr[3], &pp, Dim::Plain)?,
        ));
    }
    let periodic = match m.get("periodic") {
        None | Some(Value::Null) => None,
        Some(p) => {
            let pp = format!("{path}.periodic");
            let pm = obj(p, &pp)?;
            let start = quantity(pm, "start", &pp, Dim::Plain)?;
            let start = start.to_integer().try_into().map_err(|_| ScenarioError { path: pp.clone(), msg: "bad start index".into() })?;
            Some((start, quantity(pm, "period", &pp, Dim::Plain)?, quantity(pm, "increment", &pp, Dim::Plain)?))
        }
    };
    Ok(CurveDesc { points, periodic })
}

fn server_from(v: &Value, path: &str, single: bool) -> Result<ServerDesc> {
    let m = obj(v, path)?;
    let name = match m.get("name") {
        Some(Value::String(s)) => s.clone(),
        None if single => "default".into(),
        _ => return err(path, "each server needs a \"name\""),
    };
    let kind = string(m, "kind", path)?;
    let pp = format!("{path}.params");
    let params = obj(field(m, "params", path)?, &pp)?;
    let line_rate = quantity(m, "lineRate", path, Dim::Rate)?;
    let transmit_at_line_rate = match m.get("transmitAtLineRate") {
        None => true,
        Some(Value::Bool(b)) => *b,
        Some(_) => return err(&format!("{path}.transmitAtLineRate"), "expected a boolean"),
    };
    let service = match kind.as_str() {
        "rate-latency" => ServiceDesc::RateLatency {
            rate: quantity(params, "rate", &pp, Dim::Rate)?,
            latency: quantity(params, "latency", &pp, Dim::Time)?,
        },
        "drr" => {
            let n = integer(params, "n", &pp)?;
            let n: u32 = n.to_integer().try_into().map_err(|_| ScenarioError { path: format!("{pp}.n"), msg: "too large".into() })?;
            let quantum = quantity(params, "quantum", &pp, Dim::Data)?;
            let lmax = match params.get("lmax") {
                Some(_) => quantity(params, "lmax", &pp, Dim::Data)?,
                None => quantum.clone(),
            };
            ServiceDesc::Drr { n, quantum, eps: quantity(params, "eps", &pp, Dim::Data)?, lmax }
        }
        "fifo-residual" => ServiceDesc::FifoResidual {
            rate: quantity(params, "rate", &pp, Dim::Rate)?,
            theta: quantity(params, "theta", &pp, Dim::Time)?,
        },
        "explicit-breakpoints" => ServiceDesc::Explicit(curve_from(field(m, "params", path)?, &pp)?),
        other => {
            return err(
                &format!("{path}.kind"),
                format!("unknown server kind {other:?} (rate-latency, drr, fifo-residual, explicit-breakpoints)"),
            )
        }
    };
    Ok(ServerDesc { name, service, line_rate, transmit_at_line_rate })
}

fn constraint_from(v: &Value, path: &str) -> Result<ConstraintDesc> {
    use ConstraintDesc as C;
    let m = obj(v, path)?;
    let family = string(m, "family", path)?;
    let kind = string(m, "kind", path)?;
    let pp = format!("{path}.params");
    let pv = field(m, "params", path)?;
    let p = obj(pv, &pp)?;
    let d = Ok(match (family.as_str(), kind.as_str()) {
        ("bit", "token-bucket") => {
            C::TokenBucket { rate: quantity(p, "rate", &pp, Dim::Rate)?, burst: quantity(p, "burst", &pp, Dim::Data)? }
        }
        ("bit", "staircase") => C::StaircaseBits {
            burst: quantity(p, "burst", &pp, Dim::Data)?,
            interval: quantity(p, "interval", &pp, Dim::Time)?,
        },
        ("bit", "explicit-breakpoints") => C::BitCurve(curve_from(pv, &pp)?),
        ("g", "lrq") => C::Lrq { rate: quantity(p, "rate", &pp, Dim::Rate)? },
        ("g", "shifted-rate") => {
            C::ShiftedRate { rate: quantity(p, "rate", &pp, Dim::Rate)?, shift: quantity(p, "shift", &pp, Dim::Data)? }
        }
        ("g", "explicit-breakpoints") => C::GCurve(curve_from(pv, &pp)?),
        ("packet", "sliding-interval") => C::SlidingInterval {
            interval: quantity(p, "interval", &pp, Dim::Time)?,
            count: integer(p, "count", &pp)?,
        },
        ("packet", "fixed-interval") => C::FixedInterval {
            interval: quantity(p, "interval", &pp, Dim::Time)?,
            count: integer(p, "count", &pp)?,
        },
        ("packet", "token-bucket") => C::TokenBucketPacket {
            rate: quantity(p, "rate", &pp, Dim::PacketRate)?,
            burst: quantity(p, "burst", &pp, Dim::Plain)?,
        },
        ("packet", "explicit-breakpoints") => C::PacketCurve(curve_from(pv, &pp)?),
        (f, k) => return err(path, format!("unknown constraint {f:?}/{k:?}")),
    });
    d
}

fn flow_from(v: &Value, path: &str) -> Result<FlowDesc> {
    let m = obj(v, path)?;
    let name = string(m, "name", path)?;
    let server = match m.get("server") {
        None => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return err(&format!("{path}.server"), "expected a string"),
    };
    let constraint = constraint_from(field(m, "constraint", path)?, &format!("{path}.constraint"))?;
    let lmax = quantity(m, "lmax", path, Dim::Data)?;
    let lmin = match m.get("lmin") {
        Some(_) => quantity(m, "lmin", path, Dim::Data)?,
        None => lmax.clone(),
    };
    Ok(FlowDesc { name, server, constraint, lmin, lmax })
}

fn analysis_from(v: &Value, path: &str) -> Result<AnalysisDesc> {
    let m = obj(v, path)?;
    let flow = match m.get("flow") {
        None => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return err(&format!("{path}.flow"), "expected a string"),
    };
    let mut methods = Vec::new();
    if let Some(ms) = m.get("methods") {
        let Value::Array(list) = ms else { return err(&format!("{path}.methods"), "expected an array") };
        for (i, x) in list.iter().enumerate() {
            let p = format!("{path}.methods[{i}]");
            let name = x.as_str().ok_or_else(|| ScenarioError { path: p.clone(), msg: "expected a string".into() })?;
            methods.push(method_from_str(name).ok_or_else(|| ScenarioError { path: p, msg: format!("unknown method {name:?}") })?);
        }
    }
    let eps = match m.get("eps") {
        None => None,
        Some(_) => Some(quantity(m, "eps", path, Dim::Time)?),
    };
    let units = match m.get("units") {
        None => TimeUnit::Us,
        Some(Value::String(s)) => s.parse().map_err(|e| ScenarioError { path: format!("{path}.units"), msg: e })?,
        Some(_) => return err(&format!("{path}.units"), "expected a string"),
    };
    let mut expect = Vec::new();
    if let Some(es) = m.get("expect") {
        let Value::Array(list) = es else { return err(&format!("{path}.expect"), "expected an array") };
        for (i, e) in list.iter().enumerate() {
            let p = format!("{path}.expect[{i}]");
            let em = obj(e, &p)?;
            let mname = string(em, "method", &p)?;
            let method = method_from_str(&mname).ok_or_else(|| ScenarioError { path: p.clone(), msg: format!("unknown method {mname:?}") })?;
            let value = quantity(em, "value", &p, Dim::Time)?;
            let tol_text = string(em, "tolerance", &p)?;
            let tolerance = match tol_text.trim().strip_suffix('%') {
                Some(pct) => Tolerance::Relative(
                    num::parse_decimal(pct).ok_or_else(|| ScenarioError { path: format!("{p}.tolerance"), msg: "bad percentage".into() })?
                        / num::int(100),
                ),
                None => Tolerance::Absolute(
                    parse_quantity(&tol_text, Dim::Time).map_err(|m| ScenarioError { path: format!("{p}.tolerance"), msg: m })?,
                ),
            };
            let flow = match em.get("flow") {
                None => None,
                Some(Value::String(s)) => Some(s.clone()),
                Some(_) => return err(&format!("{p}.flow"), "expected a string"),
            };
            expect.push(Expectation { flow, method, value, tolerance });
        }
    }
    Ok(AnalysisDesc { flow, methods, eps, units, expect })
}

// ---- writing ----

fn q(v: &Q, dim: Dim) -> Value {
    Value::String(format_quantity(v, dim))
}

fn ext_to(v: &Ext) -> Value {
    match v {
        Ext::Fin(x) => q(x, Dim::Plain),
        Ext::Inf => Value::String("inf".into()),
    }
}

fn curve_to(c: &CurveDesc) -> Value {
    let pts: Vec<Value> = c
        .points
        .iter()
        .map(|(x, v, r, s)| json!([q(x, Dim::Plain), ext_to(v), ext_to(r), q(s, Dim::Plain)]))
        .collect();
    let mut m = Map::new();
    m.insert("points".into(), Value::Array(pts));
    if let Some((start, period, inc)) = &c.periodic {
        m.insert("periodic".into(), json!({"start": start, "period": q(period, Dim::Plain), "increment": q(inc, Dim::Plain)}));
    }
    Value::Object(m)
}

fn server_to(s: &ServerDesc, named: bool) -> Value {
    let (kind, params) = match &s.service {
        ServiceDesc::RateLatency { rate, latency } => {
            ("rate-latency", json!({"rate": q(rate, Dim::Rate), "latency": q(latency, Dim::Time)}))
        }
        ServiceDesc::Drr { n, quantum, eps, lmax } => (
            "drr",
            json!({"n": n, "quantum": q(quantum, Dim::Data), "eps": q(eps, Dim::Data), "lmax": q(lmax, Dim::Data)}),
        ),
        ServiceDesc::FifoResidual { rate, theta } => {
            ("fifo-residual", json!({"rate": q(rate, Dim::Rate), "theta": q(theta, Dim::Time)}))
        }
        ServiceDesc::Explicit(c) => ("explicit-breakpoints", curve_to(c)),
    };
    let mut m = Map::new();
    if named {
        m.insert("name".into(), Value::String(s.name.clone()));
    }
    m.insert("kind".into(), Value::String(kind.into()));
    m.insert("params".into(), params);
    m.insert("lineRate".into(), q(&s.line_rate, Dim::Rate));
    m.insert("transmitAtLineRate".into(), Value::Bool(s.transmit_at_line_rate));
    Value::Object(m)
}

fn constraint_to(c: &ConstraintDesc) -> Value {
    use ConstraintDesc as C;
    let (family, kind, params) = match c {
        C::TokenBucket { rate, burst } => ("bit", "token-bucket", json!({"rate": q(rate, Dim::Rate), "burst": q(burst, Dim::Data)})),
        C::StaircaseBits { burst, interval } => {
            ("bit", "staircase", json!({"burst": q(burst, Dim::Data), "interval": q(interval, Dim::Time)}))
        }
        C::BitCurve(d) => ("bit", "explicit-breakpoints", curve_to(d)),
        C::Lrq { rate } => ("g", "lrq", json!({"rate": q(rate, Dim::Rate)})),
        C::ShiftedRate { rate, shift } => ("g", "shifted-rate", json!({"rate": q(rate, Dim::Rate), "shift": q(shift, Dim::Data)})),
        C::GCurve(d) => ("g", "explicit-breakpoints", curve_to(d)),
        C::SlidingInterval { interval, count } => {
            ("packet", "sliding-interval", json!({"interval": q(interval, Dim::Time), "count": q(count, Dim::Plain)}))
        }
        C::FixedInterval { interval, count } => {
            ("packet", "fixed-interval", json!({"interval": q(interval, Dim::Time), "count": q(count, Dim::Plain)}))
        }
        C::TokenBucketPacket { rate, burst } => {
            ("packet", "token-bucket", json!({"rate": q(rate, Dim::PacketRate), "burst": q(burst, Dim::Plain)}))
        }
        C::PacketCurve(d) => ("packet", "explicit-breakpoints", curve_to(d)),
    };
    json!({"family": family, "kind": kind, "params": params})
}

fn flow_to(f: &FlowDesc) -> Value {
    let mut m = Map::new();
    m.insert("name".into(), Value::String(f.name.clone()));
    if let Some(s) = &f.server {
        m.insert("server".into(), Value::String(s.clone()));
    }
    m.insert("constraint".into(), constraint_to(&f.constraint));
    m.insert("lmin".into(), q(&f.lmin, Dim::Data));
    m.insert("lmax".into(), q(&f.lmax, Dim::Data));
    Value::Object(m)
}

fn analysis_to(a: &AnalysisDesc) -> Value {
    let mut m = Map::new();
    if let Some(f) = &a.flow {
        m.insert("flow".into(), Value::String(f.clone()));
    }
    m.insert("methods".into(), Value::Array(a.methods.iter().map(|x| Value::String(x.as_str().into())).collect()));
    if let Some(e) = &a.eps {
        m.insert("eps".into(), q(e, Dim::Time));
    }
    m.insert("units".into(), Value::String(a.units.label().into()));
    if !a.expect.is_empty() {
        let list = a
            .expect
            .iter()
            .map(|e| {
                let tol = match &e.tolerance {
                    Tolerance::Relative(f) => format!("{}%", format_quantity(&(f * num::int(100)), Dim::Plain)),
                    Tolerance::Absolute(t) => format_quantity(t, Dim::Time),
                };
                let mut em = Map::new();
                if let Some(f) = &e.flow {
                    em.insert("flow".into(), Value::String(f.clone()));
                }
                em.insert("method".into(), Value::String(e.method.as_str().into()));
                em.insert("value".into(), q(&e.value, Dim::Time));
                em.insert("tolerance".into(), Value::String(tol));
                Value::Object(em)
            })
            .collect();
        m.insert("expect".into(), Value::Array(list));
    }
    Value::Object(m)
}
