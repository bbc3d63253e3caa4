//! Packet traces: worst-case constructions, replay through a service curve,
//! measured delays and CSV export.

use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use crate::bounds::{BoundError, Result};
use crate::num::{self, Ext, Q};
use crate::pwfn::{Breakpoint, Curve};
use crate::regulation::{fixed_interval_curve, Constraint, FlowSpec, PacketArrivalCurve, PacketFamily};
use crate::service::ServerSpec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PacketRecord {
    pub flow: usize,
    /// 1-based index within the flow.
    pub n: usize,
    pub arrival: Q,
    pub length: Q,
    /// Start of transmission.
    pub start: Q,
    pub departure: Q,
}

impl PacketRecord {
    pub fn delay(&self) -> Q {
        &self.departure - &self.arrival
    }
}

/// A FIFO packet trace, packets in service order.
#[derive(Clone, Debug)]
pub struct Trace {
    pub flow_names: Vec<String>,
    pub packets: Vec<PacketRecord>,
    pub line_rate: Q,
}

impl Trace {
    /// Largest delay of a flow's packets.
    pub fn max_delay(&self, flow: usize) -> Option<Q> {
        self.packets.iter().filter(|p| p.flow == flow).map(PacketRecord::delay).max()
    }

    /// Bits arrived strictly before `t`.
    pub fn input_curve(&self) -> Curve {
        let mut times: Vec<(Q, Q)> = self.packets.iter().map(|p| (p.arrival.clone(), p.length.clone())).collect();
        times.sort_by(|a, b| a.0.cmp(&b.0));
        let mut pts: Vec<Breakpoint> = Vec::new();
        let mut before = num::zero();
        let mut i = 0;
        while i < times.len() {
            let t = times[i].0.clone();
            let mut after = before.clone();
            while i < times.len() && times[i].0 == t {
                after += &times[i].1;
                i += 1;
            }
            pts.push(Breakpoint::new(t, before.clone(), after.clone(), num::zero()));
            before = after;
        }
        if pts.first().is_none_or(|p| !p.x.is_zero()) {
            pts.insert(0, Breakpoint::cont(num::zero(), num::zero(), num::zero()));
        }
        Curve::from_affine(pts).expect("valid input staircase")
    }

    /// Bits fully or partly transmitted by `t`.
    pub fn output_curve(&self) -> Curve {
        let c = &self.line_rate;
        let mut pts: Vec<Breakpoint> = vec![Breakpoint::cont(num::zero(), num::zero(), num::zero())];
        let mut done = num::zero();
        for p in &self.packets {
            match pts.last_mut() {
                Some(last) if last.x == p.start => last.slope = c.clone(),
                _ => pts.push(Breakpoint::cont(p.start.clone(), done.clone(), c.clone())),
            }
            done += &p.length;
            pts.push(Breakpoint::cont(p.departure.clone(), done.clone(), num::zero()));
        }
        Curve::from_affine(pts).expect("valid output curve")
    }

    /// CSV with columns `flow,n,A_n,Q_n,D_n,l_n,delay`. Times in
    /// microseconds with 2 decimals, or exact seconds.
    pub fn to_csv(&self, exact: bool) -> String {
        let mut out = String::from("flow,n,A_n,Q_n,D_n,l_n,delay\n");
        let us = num::int(1_000_000);
        let t = |x: &Q| if exact { x.to_string() } else { num::format_fixed(&(x * &us), 2) };
        for p in &self.packets {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.flow_names[p.flow],
                p.n,
                t(&p.arrival),
                t(&p.start),
                t(&p.departure),
                p.length,
                t(&p.delay())
            );
        }
        out
    }
}

/// `A_i = gamma + alpha^down(i)` for `i = 1..=count`.
pub fn greedy_arrivals(alpha: &Curve, count: usize, gamma: &Q) -> Result<Vec<Q>> {
    let inv = alpha.lower_pseudo_inverse()?;
    (1..=count)
        .map(|i| match inv.eval(&num::int(i as i64))? {
            Ext::Fin(a) => Ok(gamma + a),
            Ext::Inf => Err(BoundError::Invalid(format!("arrival curve never allows {i} packets"))),
        })
        .collect()
}

/// Replays arrivals (flow, n, time, length), given in FIFO order, through a
/// server that delivers exactly `F = I * beta` and sends packets back to back
/// at line rate.
pub fn replay(names: Vec<String>, arrivals: &[(usize, usize, Q, Q)], server: &ServerSpec) -> Result<Trace> {
    let c = &server.line_rate;
    let mut trace = Trace { flow_names: names, packets: Vec::new(), line_rate: c.clone() };
    trace.packets = arrivals
        .iter()
        .map(|(f, n, a, l)| PacketRecord {
            flow: *f,
            n: *n,
            arrival: a.clone(),
            length: l.clone(),
            start: a.clone(),
            departure: a.clone(),
        })
        .collect();
    let fluid = trace.input_curve().min_plus_convolve(&server.beta)?.lower_pseudo_inverse()?;
    let mut sent = num::zero();
    let mut free = num::zero();
    for p in trace.packets.iter_mut() {
        let ready = match fluid.eval(&sent)? {
            Ext::Fin(q) => q,
            Ext::Inf => return Err(BoundError::Invalid("service curve never delivers the backlog".into())),
        };
        p.start = num::qmax(&num::qmax(&p.arrival, &free), &ready);
        p.departure = &p.start + &p.length / c;
        free = p.departure.clone();
        sent += &p.length;
    }
    Ok(trace)
}

/// Trace plus what it was built to show.
#[derive(Clone, Debug)]
pub struct Tightness {
    pub trace: Trace,
    pub flow: usize,
    /// Arrival of the flow's last packet.
    pub t_prime: Q,
    /// Time shift applied to the whole trace.
    pub shift: Q,
}

impl Tightness {
    pub fn measured(&self) -> Q {
        self.trace.max_delay(self.flow).expect("the flow has packets")
    }
}

fn packet_curves(flows: &[FlowSpec]) -> Result<Vec<&PacketArrivalCurve>> {
    flows
        .iter()
        .map(|x| match &x.constraint {
            Constraint::Packet(p) => Ok(p),
            _ => Err(BoundError::Invalid(format!("flow {} is not packet-level constrained", x.name))),
        })
        .collect()
}

/// Worst-case trace for packet-level arrival curves: every packet has its
/// maximal length and the flow's last packet waits exactly the bound.
pub fn build_tightness_trace(flows: &[FlowSpec], f: usize, server: &ServerSpec) -> Result<Tightness> {
    let curves: Vec<Curve> = packet_curves(flows)?.into_iter().map(|p| p.curve().clone()).collect();
    construct(flows, &curves, f, server, &num::zero())
}

/// Same for fixed-interval flows: each is given the slack `eps` between its
/// two initial bursts, and the trace is shifted so that a slot grid exists
/// for every flow. The flow's delay is within `eps` of the bound.
pub fn build_tsn_tightness_trace(flows: &[FlowSpec], f: usize, server: &ServerSpec, eps: Option<&Q>) -> Result<Tightness> {
    let pcs = packet_curves(flows)?;
    let taus: Vec<&Q> = pcs
        .iter()
        .filter_map(|p| match p.family() {
            PacketFamily::FixedInterval { tau, .. } => Some(tau),
            _ => None,
        })
        .collect();
    let Some(min_tau) = taus.iter().min() else {
        return build_tightness_trace(flows, f, server);
    };
    let eps = match eps {
        Some(e) => e.clone(),
        None => *min_tau / num::int(1000),
    };
    if !eps.is_positive() || &&eps >= min_tau {
        return Err(BoundError::Invalid(format!("eps must lie in (0, {min_tau}), got {eps}")));
    }
    let mut curves = Vec::with_capacity(flows.len());
    for p in &pcs {
        curves.push(match p.family() {
            PacketFamily::FixedInterval { tau, k } => {
                PacketArrivalCurve::new(fixed_interval_curve(tau, k, &eps)?)?.curve().clone()
            }
            _ => p.curve().clone(),
        });
    }
    let shift = *taus.iter().max().unwrap() - &eps;
    construct(flows, &curves, f, server, &shift)
}

fn construct(flows: &[FlowSpec], curves: &[Curve], f: usize, server: &ServerSpec, shift: &Q) -> Result<Tightness> {
    let fl = flows.get(f).ok_or_else(|| BoundError::Invalid(format!("no flow with index {f}")))?;
    let mut w = Curve::zero();
    for (x, a) in flows.iter().zip(curves) {
        w = w.add(&a.right_limit().scale_value(&x.lmax)?)?;
    }
    let t_prime = smallest_maximizer(&w.shift_down_clamped(&fl.lmax)?, &server.beta)?;
    let mut arrivals: Vec<(usize, usize, Q, Q)> = Vec::new();
    for (u, (x, a)) in flows.iter().zip(curves).enumerate() {
        let count = a.eval_right(&t_prime)?;
        let count = count.fin().and_then(|q| q.to_integer().try_into().ok()).unwrap_or(0usize);
        let gamma = if u == f {
            let first = greedy_arrivals(a, count, &num::zero())?;
            &t_prime - first.last().expect("at least one packet by t'")
        } else {
            num::zero()
        };
        for (n, t) in greedy_arrivals(a, count, &gamma)?.into_iter().enumerate() {
            arrivals.push((u, n + 1, t + shift, x.lmax.clone()));
        }
    }
    let last_f = arrivals.iter().filter(|p| p.0 == f).map(|p| p.1).max().unwrap_or(0);
    arrivals.sort_by(|a, b| {
        let key = |p: &(usize, usize, Q, Q)| (p.0 == f && p.1 == last_f, p.0, p.1);
        a.2.cmp(&b.2).then_with(|| key(a).cmp(&key(b)))
    });
    let names = flows.iter().map(|x| x.name.clone()).collect();
    let trace = replay(names, &arrivals, server)?;
    Ok(Tightness { trace, flow: f, t_prime: t_prime + shift, shift: shift.clone() })
}

/// Smallest `t` maximizing `beta^down(w(t)) - t` for a right-continuous
/// staircase `w`; the maximum sits at a jump.
fn smallest_maximizer(w: &Curve, beta: &Curve) -> Result<Q> {
    if w.breakpoints().iter().any(|p| !p.slope.is_zero()) {
        return Err(BoundError::Invalid("worst-case construction needs piecewise-constant arrival curves".into()));
    }
    let best = match crate::pwfn::horizontal_deviation(w, beta)? {
        Ext::Fin(b) => b,
        Ext::Inf => return Err(BoundError::Invalid("the bound is infinite; no worst case to build".into())),
    };
    let (u, horizon) = match crate::pwfn::deviation_horizon(w, beta) {
        // the smallest maximizer cannot lie past the certified horizon
        Some(h) => (beta.lower_pseudo_inverse()?.compose(&w.head(&h))?, h),
        None => {
            let u = beta.lower_pseudo_inverse()?.compose(w)?;
            let info = u.tail_info();
            let h = &info.t0 + info.period.unwrap_or_else(num::one);
            (u, h)
        }
    };
    let win = w.window(&horizon);
    for p in &win.pts {
        if u.eval(&p.x)? == Ext::Fin(&best + &p.x) {
            return Ok(p.x.clone());
        }
    }
    Err(BoundError::Internal("maximizer not found on the staircase jumps".into()))
}

/// Max delay per flow.
pub fn measure_delays(trace: &Trace) -> Vec<(String, Option<Q>)> {
    (0..trace.flow_names.len()).map(|i| (trace.flow_names[i].clone(), trace.max_delay(i))).collect()
}

/// Checks that the trace's output dominates `I * beta`. Returns the first
/// instant where it does not.
pub fn verify_service_curve(trace: &Trace, beta: &Curve) -> Result<Option<Q>> {
    let fluid = trace.input_curve().min_plus_convolve(beta)?;
    let out = trace.output_curve();
    if fluid.le(&out) {
        return Ok(None);
    }
    let mut xs: Vec<Q> = out.breakpoints().iter().map(|p| p.x.clone()).collect();
    let end = xs.last().cloned().unwrap_or_else(num::zero);
    xs.extend(fluid.window(&end).pts.iter().map(|p| p.x.clone()));
    xs.sort();
    xs.dedup();
    for x in &xs {
        if fluid.eval(x)? > out.eval(x)? || fluid.eval_right(x)? > out.eval_right(x)? {
            return Ok(Some(x.clone()));
        }
    }
    Ok(Some(end))
}
