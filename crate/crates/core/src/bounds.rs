//! Delay bounds for a flow of interest at a FIFO server.
//!
//! All bounds are horizontal deviations `h(w, beta)` plus a transmission
//! term; they differ in the curve `w` built from the flows' constraints.

use std::fmt;

use num_traits::Signed;
use thiserror::Error;

use crate::num::{self, Ext, Q};
use crate::pwfn::{horizontal_deviation, horizontal_deviation_upper, Curve, CurveError};
use crate::regulation::{pkt_to_g, Constraint, FlowSpec, RegulationError};
use crate::service::ServerSpec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Regulation(#[from] RegulationError),
    #[error("service curve is not c-Lipschitz (c = {0}); the per-flow closed form does not apply, use the sweep over packet lengths")]
    NotLipschitz(Q),
    #[error("the server does not transmit at line rate; packetized bounds need it")]
    NoLineRate,
    #[error("{0}")]
    Invalid(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, BoundError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Classic,
    ThmPkt,
    ThmG,
    ThmBit,
    LemmaAg,
    Sweep,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Classic => "classic",
            Method::ThmPkt => "thm-pkt",
            Method::ThmG => "thm-g",
            Method::ThmBit => "thm-bit",
            Method::LemmaAg => "lemma-ag",
            Method::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct DelayBound {
    pub value: Ext,
    pub method: Method,
    /// The curve whose horizontal deviation from `beta` gives the queuing part.
    pub w: Curve,
    /// Packet length attaining the bound, when the sweep found one.
    pub attained_l: Option<Q>,
    /// `(l, bound for a packet of length l)` at the candidate lengths.
    pub per_packet: Option<Vec<(Q, Ext)>>,
    pub diagnostic: Option<String>,
}

impl DelayBound {
    fn new(value: Ext, method: Method, w: Curve, beta: &Curve) -> DelayBound {
        let diagnostic = stability_note(&w, beta);
        DelayBound { value, method, w, attained_l: None, per_packet: None, diagnostic }
    }
}

fn stability_note(w: &Curve, beta: &Curve) -> Option<String> {
    let (rw, rb) = (w.eventual_rate(), beta.eventual_rate());
    (rw > rb).then(|| format!("unstable: arrival rate {rw} exceeds service rate {rb}"))
}

/// `h(w, beta)`.
pub fn queuing_delay_bound(w: &Curve, beta: &Curve) -> Result<Ext> {
    Ok(horizontal_deviation(w, beta)?)
}

fn plus_tx(h: Ext, l: &Q, c: &Q) -> Ext {
    h.add_q(&(l / c))
}

fn flow(flows: &[FlowSpec], f: usize) -> Result<&FlowSpec> {
    flows.get(f).ok_or_else(|| BoundError::Invalid(format!("no flow with index {f}")))
}

fn line_rate(server: &ServerSpec) -> Result<&Q> {
    if server.transmit_at_line_rate {
        Ok(&server.line_rate)
    } else {
        Err(BoundError::NoLineRate)
    }
}

fn check_len(l: &Q, fl: &FlowSpec) -> Result<()> {
    if l < &fl.lmin || l > &fl.lmax {
        return Err(BoundError::Invalid(format!(
            "packet length {l} outside [{}, {}] of flow {}",
            fl.lmin, fl.lmax, fl.name
        )));
    }
    Ok(())
}

/// Sum of the right limits of the bit-level curves of all flows but `f`.
fn others_right_limit(flows: &[FlowSpec], f: usize) -> Result<Curve> {
    let mut acc = Curve::zero();
    for (i, fl) in flows.iter().enumerate() {
        if i != f {
            acc = acc.add(&fl.to_bit()?.curve().right_limit())?;
        }
    }
    Ok(acc)
}

/// `Delta^AG(l) = h(g^up + alpha^+, beta) + l / c` for a g-regulated flow
/// sharing the queue with an aggregate of bit-level arrival curve `alpha`.
pub fn delay_bound_ag(g: &Curve, others: &Curve, server: &ServerSpec, l: &Q) -> Result<DelayBound> {
    let c = line_rate(server)?;
    let w = g.upper_pseudo_inverse()?.add(&others.right_limit())?;
    let h = queuing_delay_bound(&w, &server.beta)?;
    Ok(DelayBound::new(plus_tx(h, l, c), Method::LemmaAg, w, &server.beta))
}

/// Bound for packet-level arrival curves, for a packet of length `l` or
/// (with `None`) for the whole flow.
pub fn delay_bound_pkt(flows: &[FlowSpec], f: usize, server: &ServerSpec, l: Option<&Q>) -> Result<DelayBound> {
    let c = line_rate(server)?;
    let fl = flow(flows, f)?;
    let mut scaled = Vec::with_capacity(flows.len());
    for x in flows {
        let Constraint::Packet(p) = &x.constraint else {
            return Err(BoundError::Invalid(format!("flow {} is not packet-level constrained", x.name)));
        };
        scaled.push(p.curve().right_limit().scale_value(&x.lmax)?);
    }
    let w = Curve::sum(&scaled)?.shift_down_clamped(&fl.lmax)?;
    // same curve through the g-regulation route
    let Constraint::Packet(p) = &fl.constraint else { unreachable!() };
    let g = pkt_to_g(p, &fl.lmax)?;
    let rest = Curve::sum(scaled.iter().enumerate().filter(|(i, _)| *i != f).map(|(_, c)| c))?;
    let via_g = g.curve().upper_pseudo_inverse()?.add(&rest)?;
    if !via_g.equals(&w) {
        return Err(BoundError::Internal("packet-level curve and its g-regulation route disagree".into()));
    }
    let len = match l {
        Some(l) => {
            check_len(l, fl)?;
            l
        }
        None => &fl.lmax,
    };
    let h = queuing_delay_bound(&w, &server.beta)?;
    Ok(DelayBound::new(plus_tx(h, len, c), Method::ThmPkt, w, &server.beta))
}

/// Bound with every flow seen through its g-regulation.
pub fn delay_bound_g(flows: &[FlowSpec], f: usize, server: &ServerSpec, l: Option<&Q>) -> Result<DelayBound> {
    let c = line_rate(server)?;
    let fl = flow(flows, f)?;
    let mut w = Curve::zero();
    let mut others_lmax = num::zero();
    for (i, x) in flows.iter().enumerate() {
        w = w.add(&x.to_g()?.curve().upper_pseudo_inverse()?)?;
        if i != f {
            others_lmax += &x.lmax;
        }
    }
    let w = w.add_constant(&others_lmax);
    let len = match l {
        Some(l) => {
            check_len(l, fl)?;
            l
        }
        None => &fl.lmax,
    };
    let h = queuing_delay_bound(&w, &server.beta)?;
    Ok(DelayBound::new(plus_tx(h, len, c), Method::ThmG, w, &server.beta))
}

/// Bound with every flow seen through its bit-level arrival curve. Per
/// packet: `h(alpha^+ + alpha'^+ - l, beta) + l / c`. Per flow (needs a
/// c-Lipschitz service curve): `h(alpha + alpha' - Lmin, beta) + Lmin / c`.
pub fn delay_bound_bit(flows: &[FlowSpec], f: usize, server: &ServerSpec, l: Option<&Q>) -> Result<DelayBound> {
    let c = line_rate(server)?;
    let fl = flow(flows, f)?;
    match l {
        Some(l) => {
            check_len(l, fl)?;
            let w = total_right_limit(flows, f)?.shift_down_clamped(l)?;
            let h = queuing_delay_bound(&w, &server.beta)?;
            Ok(DelayBound::new(plus_tx(h, l, c), Method::ThmBit, w, &server.beta))
        }
        None => {
            if !server.beta.is_c_lipschitz(c) {
                return Err(BoundError::NotLipschitz(c.clone()));
            }
            let mut total = Curve::zero();
            for x in flows {
                total = total.add(x.to_bit()?.curve())?;
            }
            let w = total.shift_down_clamped(&fl.lmin)?;
            let h = queuing_delay_bound(&w, &server.beta)?;
            Ok(DelayBound::new(plus_tx(h, &fl.lmin, c), Method::ThmBit, w, &server.beta))
        }
    }
}

fn total_right_limit(flows: &[FlowSpec], f: usize) -> Result<Curve> {
    Ok(flow(flows, f)?.to_bit()?.curve().right_limit().add(&others_right_limit(flows, f)?)?)
}

/// `h(alpha + alpha', beta)`.
pub fn delay_bound_classic(flows: &[FlowSpec], server: &ServerSpec) -> Result<DelayBound> {
    let mut w = Curve::zero();
    for x in flows {
        w = w.add(x.to_bit()?.curve())?;
    }
    let h = queuing_delay_bound(&w, &server.beta)?;
    Ok(DelayBound::new(h, Method::Classic, w, &server.beta))
}

/// Exact `sup_{Lmin <= l <= Lmax}` of the per-packet bit-level bound.
///
/// Between two consecutive lengths at which some value of `W = alpha^+ +
/// alpha'^+` minus `l` lands on a breakpoint level of `beta^down`, the bound
/// is a maximum of affine functions of `l`, hence convex; the supremum is at
/// a candidate length or at a left limit there.
pub fn per_flow_sweep(flows: &[FlowSpec], f: usize, server: &ServerSpec) -> Result<DelayBound> {
    let c = line_rate(server)?;
    let fl = flow(flows, f)?;
    let big_w = total_right_limit(flows, f)?;
    let beta = &server.beta;
    let at = |l: &Q| -> Result<Ext> {
        let w = big_w.shift_down_clamped(l)?;
        Ok(plus_tx(horizontal_deviation(&w, beta)?, l, c))
    };
    let below = |l: &Q| -> Result<Ext> {
        let w = big_w.shift_down_clamped(l)?;
        Ok(plus_tx(horizontal_deviation_upper(&w, beta)?, l, c))
    };
    let candidates = sweep_candidates(&big_w, beta, &fl.lmin, &fl.lmax)?;
    let mut best: Option<(Ext, Q, bool)> = None;
    let mut table = Vec::with_capacity(candidates.len());
    for l in &candidates {
        let v = at(l)?;
        table.push((l.clone(), v.clone()));
        let mut consider = |v: Ext, attained: bool| {
            let better = match &best {
                None => true,
                Some((b, _, a)) => v > *b || (v == *b && attained && !a),
            };
            if better {
                best = Some((v, l.clone(), attained));
            }
        };
        consider(v, true);
        if l > &fl.lmin {
            consider(below(l)?, false);
        }
    }
    let (value, l, attained) = best.expect("endpoints are always candidates");
    let w = big_w.shift_down_clamped(&l)?;
    let mut b = DelayBound::new(value, Method::Sweep, w, beta);
    b.attained_l = attained.then_some(l);
    b.per_packet = Some(table);
    Ok(b)
}

fn sweep_candidates(big_w: &Curve, beta: &Curve, lmin: &Q, lmax: &Q) -> Result<Vec<Q>> {
    let inv = beta.lower_pseudo_inverse()?;
    let wi = big_w.tail_info();
    let bi = inv.tail_info();
    let mut out = vec![lmin.clone(), lmax.clone()];
    if lmin == lmax {
        out.truncate(1);
        return Ok(out);
    }
    // Past this horizon every coincidence repeats one found before it.
    let horizon = match &wi.rate {
        Ext::Fin(r) if r.is_positive() => {
            let d_w = wi.period.clone().unwrap_or_else(num::one);
            let c_w = r * &d_w;
            let c_b = match &bi.period {
                Some(p) => p.clone(),
                None => c_w.clone(),
            };
            let lcm = num::lcm(&c_w, &c_b);
            let level = &bi.t0 + lmax + &lcm;
            let t_level = match big_w.lower_pseudo_inverse()?.eval(&level)? {
                Ext::Fin(t) => t,
                Ext::Inf => wi.t0.clone(),
            };
            num::qmax(&wi.t0, &t_level) + &lcm / &c_w * &d_w + &d_w
        }
        _ => &wi.t0 + num::one(),
    };
    let w = big_w.window(&horizon);
    let mut values: Vec<Q> = Vec::new();
    for (i, p) in w.pts.iter().enumerate() {
        for v in [w.left_at(i), p.value.clone(), p.right.clone()] {
            if let Ext::Fin(v) = v {
                values.push(v);
            }
        }
    }
    values.sort();
    values.dedup();
    let Some(top) = values.last() else { return Ok(out) };
    let levels = inv.window(&num::qmax(&(top - lmin), &num::zero()));
    let ys: Vec<&Q> = levels.pts.iter().map(|p| &p.x).collect();
    for v in &values {
        let lo = v - lmax;
        let hi = v - lmin;
        let start = ys.partition_point(|y| **y <= lo);
        for y in ys[start..].iter().take_while(|y| ***y < hi) {
            out.push(v - *y);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Side-by-side bounds for one flow.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub classic: DelayBound,
    pub bit: DelayBound,
    pub g: DelayBound,
    pub pkt: Option<DelayBound>,
    /// `(statement, holds)` for the orderings that must hold here.
    pub checks: Vec<(String, bool)>,
}

impl Comparison {
    /// `100 (classic - x) / classic`, when both are finite and positive.
    pub fn improvement(&self, x: &DelayBound) -> Option<f64> {
        match (&self.classic.value, &x.value) {
            (Ext::Fin(nc), Ext::Fin(v)) if nc.is_positive() => Some(100.0 * num::to_f64(&((nc - v) / nc))),
            _ => None,
        }
    }

    pub fn all_checks_hold(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

/// Per-flow bit-level bound: the closed form when `beta` is c-Lipschitz,
/// the exact sweep otherwise.
pub fn bit_bound_auto(flows: &[FlowSpec], f: usize, server: &ServerSpec) -> Result<DelayBound> {
    match delay_bound_bit(flows, f, server, None) {
        Err(BoundError::NotLipschitz(_)) => per_flow_sweep(flows, f, server),
        r => r,
    }
}

pub fn compare_approaches(flows: &[FlowSpec], f: usize, server: &ServerSpec) -> Result<Comparison> {
    let classic = delay_bound_classic(flows, server)?;
    let bit = bit_bound_auto(flows, f, server)?;
    let g = delay_bound_g(flows, f, server, None)?;
    let all_pkt = flows.iter().all(|x| matches!(x.constraint, Constraint::Packet(_)));
    let pkt = if all_pkt { Some(delay_bound_pkt(flows, f, server, None)?) } else { None };
    let mut checks = vec![("bit-level <= classic".to_string(), bit.value <= classic.value)];
    if let Some(p) = &pkt {
        checks.push(("packet-level <= bit-level".into(), p.value <= bit.value));
    }
    if flows.iter().all(|x| matches!(x.constraint, Constraint::Bit(_))) {
        checks.push(("bit-level <= g-regulation (bit-level inputs)".into(), bit.value <= g.value));
    }
    if flows.iter().all(|x| matches!(x.constraint, Constraint::G(_))) {
        checks.push(("g-regulation <= bit-level (g-regulated inputs)".into(), g.value <= bit.value));
    }
    Ok(Comparison { classic, bit, g, pkt, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::int;
    use crate::regulation::{BitArrivalCurve, GRegulation, PacketArrivalCurve};
    use crate::service::{fifo_residual, rate_latency};

    fn server(beta: Curve, c: i64) -> ServerSpec {
        ServerSpec::new(beta, int(c), true).unwrap()
    }

    #[test]
    fn token_buckets_at_rate_latency() {
        let s = server(rate_latency(&int(10), &int(1)).unwrap(), 20);
        let flows = vec![
            FlowSpec::new("a", Constraint::Bit(BitArrivalCurve::token_bucket(int(1), int(8)).unwrap()), int(2), int(4)).unwrap(),
            FlowSpec::new("b", Constraint::Bit(BitArrivalCurve::token_bucket(int(2), int(12)).unwrap()), int(1), int(6)).unwrap(),
        ];
        let nc = delay_bound_classic(&flows, &s).unwrap();
        assert_eq!(nc.value, Ext::Fin(int(1) + num::ratio(20, 10)));
        // h(alpha + alpha' - 2, beta) + 2/20 = 1 + 18/10 + 1/10
        let a = delay_bound_bit(&flows, 0, &s, None).unwrap();
        assert_eq!(a.value, Ext::Fin(num::ratio(29, 10)));
        let sw = per_flow_sweep(&flows, 0, &s).unwrap();
        assert_eq!(sw.value, a.value);
        assert_eq!(sw.attained_l, Some(int(2)));
    }

    #[test]
    fn non_lipschitz_refuses_closed_form() {
        let s = server(fifo_residual(&int(5), &int(1)).unwrap(), 10);
        let flows = vec![FlowSpec::new("a", Constraint::Bit(BitArrivalCurve::token_bucket(int(1), int(8)).unwrap()), int(2), int(4)).unwrap()];
        assert!(matches!(delay_bound_bit(&flows, 0, &s, None), Err(BoundError::NotLipschitz(_))));
        assert!(per_flow_sweep(&flows, 0, &s).unwrap().value.is_finite());
    }

    #[test]
    fn unstable_is_infinite_with_note() {
        let s = server(rate_latency(&int(1), &int(1)).unwrap(), 10);
        let flows = vec![FlowSpec::new("a", Constraint::G(GRegulation::lrq(int(2)).unwrap()), int(1), int(1)).unwrap()];
        let b = delay_bound_g(&flows, 0, &s, None).unwrap();
        assert_eq!(b.value, Ext::Inf);
        assert!(b.diagnostic.unwrap().contains("exceeds"));
    }

    #[test]
    fn packet_bound_below_bit_bound() {
        let s = server(rate_latency(&int(100), &int(1)).unwrap(), 200);
        let p = |tau: i64| Constraint::Packet(PacketArrivalCurve::sliding_interval(int(tau), int(2)).unwrap());
        let flows = vec![
            FlowSpec::new("a", p(10), int(4), int(10)).unwrap(),
            FlowSpec::new("b", p(7), int(3), int(6)).unwrap(),
        ];
        let cmp = compare_approaches(&flows, 0, &s).unwrap();
        assert!(cmp.all_checks_hold());
        // T + (2*10 + 2*6 - 10)/R + 10/c
        assert_eq!(cmp.pkt.unwrap().value, Ext::Fin(int(1) + num::ratio(22, 100) + num::ratio(10, 200)));
    }
}
