use std::fmt::Write as _;

use tsn_delay::bounds::{self, DelayBound, Method};
use tsn_delay::num::{self, Ext, Q};
use tsn_delay::pwfn::{Curve, Tail};
use tsn_delay::regulation::{Constraint, FlowSpec, PacketFamily};
use tsn_delay::scenario::{self, method_from_str, Scenario, System};
use tsn_delay::trace;
use tsn_delay::units::{parse_quantity, Dim, TimeUnit};

use crate::{Common, Family};

type Res<T> = Result<T, String>;

fn load(common: &Common) -> Res<(String, Scenario)> {
    let Some(arg) = common.scenario.as_deref() else { return Err("--scenario is required".into()) };
    let text = match std::fs::read_to_string(arg) {
        Ok(t) => t,
        Err(e) => match scenario::bundled(arg) {
            Some(t) => t.to_string(),
            None => return Err(format!("cannot read {arg}: {e} (bundled: {})", scenario::bundled_names().join(", "))),
        },
    };
    let sc = Scenario::parse(&text).map_err(|e| format!("{arg}: {e}"))?;
    Ok((arg.to_string(), sc))
}

fn flows_of_interest(common: &Common, sc: &Scenario) -> Res<Vec<String>> {
    match common.flow.as_deref() {
        Some("all") => Ok(sc.flows.iter().map(|f| f.name.clone()).collect()),
        f => Ok(vec![sc.focus(f).map_err(|e| e.to_string())?.to_string()]),
    }
}

fn units(common: &Common, sc: Option<&Scenario>) -> Res<TimeUnit> {
    match &common.units {
        Some(u) => u.parse(),
        None => Ok(sc.map(|s| s.analysis.units).unwrap_or_default()),
    }
}

struct Fmt {
    exact: bool,
    unit: TimeUnit,
}

impl Fmt {
    fn time(&self, v: &Ext) -> String {
        match v {
            Ext::Inf => "inf".into(),
            Ext::Fin(q) if self.exact => q.to_string(),
            Ext::Fin(q) => self.unit.show(q),
        }
    }

    fn plain(&self, v: &Ext) -> String {
        match v {
            Ext::Inf => "inf".into(),
            Ext::Fin(q) if self.exact => q.to_string(),
            Ext::Fin(q) => tsn_delay::units::exact_decimal(q).unwrap_or_else(|| num::format_fixed(q, 6)),
        }
    }

    fn header(&self) -> String {
        if self.exact { "delay_s".into() } else { format!("delay_{}", self.unit.label()) }
    }
}

fn native(sys: &System) -> Method {
    if sys.flows.iter().all(|x| matches!(x.constraint, Constraint::Packet(_))) {
        Method::ThmPkt
    } else if matches!(sys.flows[sys.f].constraint, Constraint::G(_)) {
        Method::ThmG
    } else {
        Method::ThmBit
    }
}

fn compute(method: Method, sys: &System) -> Res<DelayBound> {
    let (flows, f, s) = (&sys.flows, sys.f, &sys.server);
    let r = match method {
        Method::Classic => bounds::delay_bound_classic(flows, s),
        Method::ThmBit => bounds::bit_bound_auto(flows, f, s),
        Method::ThmG => bounds::delay_bound_g(flows, f, s, None),
        Method::ThmPkt => bounds::delay_bound_pkt(flows, f, s, None),
        Method::Sweep => bounds::per_flow_sweep(flows, f, s),
        Method::LemmaAg => lemma_ag(flows, f, sys),
    };
    r.map_err(|e| format!("{} for {}: {e}", method, flows[f].name))
}

fn lemma_ag(flows: &[FlowSpec], f: usize, sys: &System) -> bounds::Result<DelayBound> {
    let g = flows[f].to_g()?;
    let mut others = Curve::zero();
    for (i, x) in flows.iter().enumerate() {
        if i != f {
            others = others.add(x.to_bit()?.curve())?;
        }
    }
    bounds::delay_bound_ag(g.curve(), &others, &sys.server, &flows[f].lmax)
}

fn system(sc: &Scenario, flow: &str) -> Res<System> {
    sc.system(flow).map_err(|e| e.to_string())
}

/// Checks the scenario's expectations for `(flow, method)`; prints a line per check.
fn check_expectations(sc: &Scenario, flow: &str, b: &DelayBound, fm: &Fmt, out: &mut String) -> bool {
    let mut ok = true;
    for e in sc.expectations_for(flow).filter(|e| e.method == b.method) {
        let pass = e.holds(&b.value);
        ok &= pass;
        let tol = match &e.tolerance {
            scenario::Tolerance::Relative(r) => format!("{}%", num::format_fixed(&(r * num::int(100)), 2)),
            scenario::Tolerance::Absolute(a) => format!("{} {}", fm.unit.show(a), fm.unit),
        };
        let _ = writeln!(
            out,
            "{} {flow} {}: {} vs expected {} {} (tolerance {tol})",
            if pass { "PASS" } else { "FAIL" },
            b.method,
            fm.time(&b.value),
            fm.time(&Ext::Fin(e.value.clone())),
            fm.unit,
        );
    }
    ok
}

pub fn bound(common: &Common, methods: &[String]) -> Res<bool> {
    let (_, sc) = load(common)?;
    let fm = Fmt { exact: common.exact, unit: units(common, Some(&sc))? };
    let requested: Vec<Method> = if !methods.is_empty() {
        methods.iter().map(|m| method_from_str(m).ok_or_else(|| format!("unknown method {m:?}"))).collect::<Res<_>>()?
    } else {
        sc.analysis.methods.clone()
    };
    let mut ok = true;
    let mut out = String::new();
    let mut notes = String::new();
    if common.csv {
        let _ = writeln!(out, "flow,server,method,{}", fm.header());
    }
    for name in flows_of_interest(common, &sc)? {
        let sys = system(&sc, &name)?;
        let list = if requested.is_empty() { vec![native(&sys)] } else { requested.clone() };
        if !common.csv {
            let _ = writeln!(out, "flow {name} at server {} ({} flows)", sys.server_name, sys.flows.len());
        }
        for m in list {
            let b = compute(m, &sys)?;
            ok &= b.value.is_finite();
            if common.csv {
                let _ = writeln!(out, "{name},{},{},{}", sys.server_name, m, fm.time(&b.value));
            } else {
                let at = b.attained_l.as_ref().map(|l| format!("  (attained at l = {l} bit)")).unwrap_or_default();
                let _ = writeln!(out, "  {:<9} {:>14} {}{at}", m.as_str(), fm.time(&b.value), if fm.exact { "s" } else { fm.unit.label() });
            }
            if let Some(d) = &b.diagnostic {
                let _ = writeln!(notes, "note: {name} {m}: {d}");
            }
            ok &= check_expectations(&sc, &name, &b, &fm, &mut notes);
        }
    }
    print!("{out}");
    eprint!("{notes}");
    Ok(ok)
}

pub fn compare(common: &Common) -> Res<bool> {
    let (_, sc) = load(common)?;
    let fm = Fmt { exact: common.exact, unit: units(common, Some(&sc))? };
    let mut ok = true;
    let mut out = String::new();
    let mut notes = String::new();
    if common.csv {
        let _ = writeln!(out, "flow,server,method,{},improvement_pct", fm.header());
    }
    for name in flows_of_interest(common, &sc)? {
        let sys = system(&sc, &name)?;
        let cmp = bounds::compare_approaches(&sys.flows, sys.f, &sys.server).map_err(|e| format!("{name}: {e}"))?;
        let mut rows = vec![("Δ^NC", "classic: bit-level + h", &cmp.classic), ("Δ^A", "bit-level, per flow", &cmp.bit)];
        rows.push(("Δ^g", "g-regulation", &cmp.g));
        if let Some(p) = &cmp.pkt {
            rows.push(("Δ^pkt", "packet-level", p));
        }
        if !common.csv {
            let _ = writeln!(out, "flow {name} at server {} ({} flows)", sys.server_name, sys.flows.len());
            let unit = if fm.exact { "s" } else { fm.unit.label() };
            let _ = writeln!(out, "  {:<6} {:<24} {:>14}  improvement", "", "approach", format!("bound ({unit})"));
        }
        for (sym, label, b) in &rows {
            ok &= b.value.is_finite();
            let imp = if b.method == bounds::Method::Classic { None } else { cmp.improvement(b) };
            if common.csv {
                let imp = imp.map(|x| format!("{x:.2}")).unwrap_or_default();
                let _ = writeln!(out, "{name},{},{},{},{imp}", sys.server_name, b.method, fm.time(&b.value));
            } else {
                let imp = imp.map(|x| format!("{x:.1}%")).unwrap_or_else(|| "-".into());
                let _ = writeln!(out, "  {sym:<6} {label:<24} {:>14}  {imp:>7}", fm.time(&b.value));
            }
            if let Some(d) = &b.diagnostic {
                let _ = writeln!(notes, "note: {name} {}: {d}", b.method);
            }
            ok &= check_expectations(&sc, &name, b, &fm, &mut notes);
        }
        for (stmt, holds) in &cmp.checks {
            ok &= *holds;
            let _ = writeln!(notes, "{} {name}: {stmt}", if *holds { "PASS" } else { "FAIL" });
        }
    }
    print!("{out}");
    eprint!("{notes}");
    Ok(ok)
}

fn read_arg(text: &str) -> Res<String> {
    match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}")),
        None => Ok(text.to_string()),
    }
}

fn standalone_flow(constraint: &str, lmin: Option<&str>, lmax: Option<&str>) -> Res<FlowSpec> {
    let desc = scenario::parse_constraint(&read_arg(constraint)?).map_err(|e| format!("--constraint {e}"))?;
    let c = scenario::build_constraint(&desc)?;
    let lmax = parse_quantity(lmax.ok_or("--lmax is required with --constraint")?, Dim::Data)?;
    let lmin = match lmin {
        Some(l) => parse_quantity(l, Dim::Data)?,
        None => lmax.clone(),
    };
    FlowSpec::new("flow", c, lmin, lmax).map_err(|e| e.to_string())
}

fn converted(fl: &FlowSpec, to: Family) -> Res<Curve> {
    match to {
        Family::Bit => fl.to_bit().map(|a| a.curve().clone()),
        Family::G => fl.to_g().map(|g| g.curve().clone()),
    }
    .map_err(|e| e.to_string())
}

fn print_breakpoints(c: &Curve, fm: &Fmt, csv: bool, out: &mut String) {
    if csv {
        let _ = writeln!(out, "x,value,right,slope");
    } else {
        let _ = writeln!(out, "  {:>16} {:>16} {:>16} {:>16}", "x", "value", "right", "slope");
    }
    for p in c.breakpoints() {
        let cells = [fm.plain(&Ext::Fin(p.x.clone())), fm.plain(&p.value), fm.plain(&p.right), fm.plain(&Ext::Fin(p.slope.clone()))];
        if csv {
            let _ = writeln!(out, "{}", cells.join(","));
        } else {
            let _ = writeln!(out, "  {:>16} {:>16} {:>16} {:>16}", cells[0], cells[1], cells[2], cells[3]);
        }
    }
    let tail = match c.tail() {
        Tail::Affine => "tail: affine after the last breakpoint".to_string(),
        Tail::Periodic { start, period, increment } => format!(
            "tail: periodic from breakpoint {start}, period {}, increment {}",
            fm.plain(&Ext::Fin(period.clone())),
            fm.plain(&Ext::Fin(increment.clone()))
        ),
    };
    if csv {
        eprintln!("{tail}");
    } else {
        let _ = writeln!(out, "  {tail}");
    }
}

pub fn convert(common: &Common, constraint: Option<&str>, lmin: Option<&str>, lmax: Option<&str>, to: Family) -> Res<bool> {
    let fm = Fmt { exact: common.exact, unit: units(common, None)? };
    let flows: Vec<FlowSpec> = match constraint {
        Some(c) => vec![standalone_flow(c, lmin, lmax)?],
        None => {
            let (_, sc) = load(common)?;
            let mut v = Vec::new();
            for name in flows_of_interest(common, &sc)? {
                let fd = sc.flows.iter().find(|f| f.name == name).expect("focus checked");
                v.push(sc.flow_spec(fd)?);
            }
            v
        }
    };
    let mut out = String::new();
    for fl in &flows {
        let c = converted(fl, to)?;
        if !common.csv {
            let (xu, vu) = match to {
                Family::Bit => ("s", "bit"),
                Family::G => ("bit", "s"),
            };
            let target = match to {
                Family::Bit => "bit-level arrival curve",
                Family::G => "g-regulation",
            };
            let _ = writeln!(out, "{} ({}) as {target}; x in {xu}, values in {vu}", fl.name, fl.constraint.family_name());
        }
        print_breakpoints(&c, &fm, common.csv, &mut out);
    }
    print!("{out}");
    Ok(true)
}

pub fn tightness(common: &Common, eps: Option<&str>) -> Res<bool> {
    let (_, sc) = load(common)?;
    let fm = Fmt { exact: common.exact, unit: units(common, Some(&sc))? };
    let eps = eps.map(|e| parse_quantity(e, Dim::Time)).transpose()?;
    let mut ok = true;
    let mut summary = String::new();
    for name in flows_of_interest(common, &sc)? {
        let sys = system(&sc, &name)?;
        let bound = compute(Method::ThmPkt, &sys)?;
        let taus: Vec<Q> = sys
            .flows
            .iter()
            .filter_map(|x| match &x.constraint {
                Constraint::Packet(p) => match p.family() {
                    PacketFamily::FixedInterval { tau, .. } => Some(tau.clone()),
                    _ => None,
                },
                _ => None,
            })
            .collect();
        let tsn = !taus.is_empty();
        let t = if tsn {
            trace::build_tsn_tightness_trace(&sys.flows, sys.f, &sys.server, eps.as_ref())
        } else {
            trace::build_tightness_trace(&sys.flows, sys.f, &sys.server)
        }
        .map_err(|e| format!("{name}: {e}"))?;
        let measured = t.measured();
        let witness = trace::verify_service_curve(&t.trace, &sys.server.beta).map_err(|e| e.to_string())?;
        let _ = writeln!(
            summary,
            "flow {name}: bound {} measured {} ({} packets, last packet of {name} arrives at {})",
            fm.time(&bound.value),
            fm.time(&Ext::Fin(measured.clone())),
            t.trace.packets.len(),
            fm.time(&Ext::Fin(t.t_prime.clone())),
        );
        match &witness {
            None => {
                let _ = writeln!(summary, "  trace respects the service curve");
            }
            Some(x) => {
                ok = false;
                let _ = writeln!(summary, "  FAIL: trace output falls below the service curve at {}", fm.time(&Ext::Fin(x.clone())));
            }
        }
        let Ext::Fin(b) = &bound.value else {
            ok = false;
            let _ = writeln!(summary, "NOT TIGHT: bound is infinite");
            continue;
        };
        if !tsn {
            if &measured == b {
                let _ = writeln!(summary, "TIGHT: measured == bound");
            } else {
                ok = false;
                let _ = writeln!(summary, "NOT TIGHT: measured != bound");
            }
        } else {
            let e = eps.clone().unwrap_or_else(|| taus.iter().min().expect("nonempty") / num::int(1000));
            if &measured <= b && measured >= b - &e {
                let _ = writeln!(summary, "TIGHT WITHIN EPS: bound - {} <= measured <= bound", fm.time(&Ext::Fin(e)));
            } else {
                ok = false;
                let _ = writeln!(summary, "NOT TIGHT: measured outside [bound - eps, bound]");
            }
        }
        if common.csv {
            print!("{}", t.trace.to_csv(common.exact));
        }
    }
    if common.csv {
        eprint!("{summary}");
    } else {
        print!("{summary}");
    }
    Ok(ok)
}

fn parse_points(at: &[String]) -> Res<Vec<Q>> {
    at.iter().map(|s| num::parse_decimal(s.trim()).ok_or_else(|| format!("bad point {s:?}"))).collect()
}

pub fn curve(common: &Common, spec: Option<&str>, service: bool, to: Option<Family>, at: &[String]) -> Res<bool> {
    let fm = Fmt { exact: common.exact, unit: units(common, None)? };
    let c: Curve = match spec {
        Some(s) => {
            let text = read_arg(s)?;
            if text.contains("\"family\"") {
                let d = scenario::parse_constraint(&text).map_err(|e| format!("--spec {e}"))?;
                scenario::build_constraint(&d)?.curve().clone()
            } else {
                scenario::parse_curve(&text).map_err(|e| format!("--spec {e}"))?.build()?
            }
        }
        None => {
            let (_, sc) = load(common)?;
            let name = sc.focus(common.flow.as_deref()).map_err(|e| e.to_string())?;
            let sys = system(&sc, name)?;
            if service {
                sys.server.beta.clone()
            } else {
                match to {
                    Some(t) => converted(&sys.flows[sys.f], t)?,
                    None => sys.flows[sys.f].constraint.curve().clone(),
                }
            }
        }
    };
    let mut xs = parse_points(at)?;
    if xs.is_empty() {
        xs = c.breakpoints().iter().map(|p| p.x.clone()).collect();
    }
    let lower = c.lower_pseudo_inverse().map_err(|e| e.to_string())?;
    let upper = c.upper_pseudo_inverse().map_err(|e| e.to_string())?;
    let mut out = String::new();
    let head = ["x", "w", "w-", "w+", "w_lower_inv", "w_upper_inv"];
    if common.csv {
        let _ = writeln!(out, "x,w,w_left,w_right,w_lower_inv,w_upper_inv");
    } else {
        let _ = writeln!(out, "{}", head.iter().map(|h| format!("{h:>16}")).collect::<String>());
    }
    let e = |r: Result<Ext, _>| r.map_err(|e: tsn_delay::pwfn::CurveError| e.to_string());
    for x in &xs {
        let left = if x > &num::zero() { fm.plain(&e(c.eval_left(x))?) } else { "-".into() };
        let cells = [
            fm.plain(&Ext::Fin(x.clone())),
            fm.plain(&e(c.eval(x))?),
            left,
            fm.plain(&e(c.eval_right(x))?),
            fm.plain(&e(lower.eval(x))?),
            fm.plain(&e(upper.eval(x))?),
        ];
        if common.csv {
            let _ = writeln!(out, "{}", cells.join(","));
        } else {
            let _ = writeln!(out, "{}", cells.iter().map(|h| format!("{h:>16}")).collect::<String>());
        }
    }
    print!("{out}");
    Ok(true)
}
