//! Bound-level checks on random instances: two staircases at a rate-latency
//! server, tightness, the residual-server sweep and the orderings.

use tsn_delay::bounds::{delay_bound_bit, delay_bound_classic, delay_bound_g, delay_bound_pkt, per_flow_sweep};
use tsn_delay::num::{self, int, Ext, Q};
use tsn_delay::regulation::{Constraint, FlowSpec, PacketFamily};
use tsn_delay::trace::{build_tightness_trace, build_tsn_tightness_trace};

use super::{scenario, Family, Gen, ResidualCase, TableOne};

fn fin(e: &Ext, what: &str) -> Result<Q, String> {
    e.fin().cloned().ok_or_else(|| format!("{what} is infinite"))
}

/// Computed `(NC, A, pkt)` against the table's expressions, exactly.
pub fn table_one(seed: u64) -> Result<(), String> {
    let case = TableOne::random(&mut Gen::new(seed));
    let (flows, s) = (case.flows(), case.server());
    let nc = fin(&delay_bound_classic(&flows, &s).map_err(|e| e.to_string())?.value, "NC")?;
    let a = fin(&delay_bound_bit(&flows, 0, &s, None).map_err(|e| e.to_string())?.value, "A")?;
    let pkt = fin(&delay_bound_pkt(&flows, 0, &s, None).map_err(|e| e.to_string())?.value, "pkt")?;
    let want = case.closed_forms();
    if (nc.clone(), a.clone(), pkt.clone()) == want {
        Ok(())
    } else {
        Err(format!("{case:?}: got ({nc}, {a}, {pkt}), table gives {want:?}"))
    }
}

pub struct TightOutcome {
    pub fixed: bool,
    /// `bound - measured`.
    pub gap: Q,
    pub eps: Q,
}

fn min_fixed_tau(flows: &[FlowSpec]) -> Option<Q> {
    flows
        .iter()
        .filter_map(|x| match &x.constraint {
            Constraint::Packet(p) => match p.family() {
                PacketFamily::FixedInterval { tau, .. } => Some(tau.clone()),
                _ => None,
            },
            _ => None,
        })
        .min()
}

/// Worst-case trace against the packet-level bound. Sliding-interval only:
/// the gap must be 0. With fixed-interval flows: within `min tau / 1000`.
pub fn tightness(seed: u64) -> Result<TightOutcome, String> {
    let mut g = Gen::new(seed);
    let fams: &[Family] = if seed.is_multiple_of(3) { &[Family::Sliding, Family::Fixed] } else { &[Family::Sliding] };
    let (flows, s) = scenario(&mut g, fams, false, true);
    let f = g.int(0, flows.len() as i64 - 1) as usize;
    let bound = delay_bound_pkt(&flows, f, &s, None).map_err(|e| e.to_string())?;
    let bound = fin(&bound.value, "bound")?;
    let ctx = || format!("seed {seed}, {} flows, flow {f}", flows.len());
    match min_fixed_tau(&flows) {
        None => {
            let t = build_tightness_trace(&flows, f, &s).map_err(|e| format!("{}: {e}", ctx()))?;
            let m = t.measured();
            if m != bound {
                return Err(format!("{}: measured {m} != bound {bound}", ctx()));
            }
            Ok(TightOutcome { fixed: false, gap: num::zero(), eps: num::zero() })
        }
        Some(tau) => {
            let eps = &tau / int(1000);
            let t = build_tsn_tightness_trace(&flows, f, &s, None).map_err(|e| format!("{}: {e}", ctx()))?;
            let m = t.measured();
            let gap = &bound - &m;
            if gap < num::zero() || gap > eps {
                return Err(format!("{}: measured {m} outside [{} , {bound}]", ctx(), &bound - &eps));
            }
            Ok(TightOutcome { fixed: true, gap, eps })
        }
    }
}

pub struct SweepOutcome {
    pub low_regime: bool,
}

/// Per-flow sweep at a FIFO residual server against the endpoint formula.
pub fn residual_sweep(seed: u64) -> Result<SweepOutcome, String> {
    let mut g = Gen::new(seed);
    let case = ResidualCase::random(&mut g, seed % 2 == 1);
    let (flows, s) = (case.flows(), case.server());
    let got = per_flow_sweep(&flows, 0, &s).map_err(|e| e.to_string())?;
    let (want, at, low) = case.oracle();
    if got.value != Ext::Fin(want.clone()) {
        return Err(format!("{case:?}: sweep {} != closed form {want}", got.value));
    }
    // the attaining length is only pinned down when the two ends differ
    let other = if low { &case.lmax } else { &case.lmin };
    let psi = (&case.tb1.1 + &case.tb2.1) / &case.r;
    let end = |l: &Q| num::qmax(&(&case.theta + l / &case.c), &(&psi - l / &case.r + l / &case.c));
    if end(other) < want && got.attained_l.as_ref() != Some(&at) {
        return Err(format!("{case:?}: attained at {:?}, expected {at}", got.attained_l));
    }
    Ok(SweepOutcome { low_regime: low })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    /// Packet-level inputs: pkt <= A.
    PktVsBit,
    /// Bit-level inputs: A <= G.
    BitVsG,
    /// g-regulated inputs: G <= A.
    GVsBit,
}

pub struct OrderOutcome {
    pub order: Order,
    pub constant_size: bool,
    pub strict: bool,
}

/// One of the three orderings, with equality asserted for constant sizes.
pub fn ordering(seed: u64) -> Result<OrderOutcome, String> {
    let mut g = Gen::new(seed);
    let order = [Order::PktVsBit, Order::BitVsG, Order::GVsBit][(seed % 3) as usize];
    let constant_size = (seed / 3).is_multiple_of(4);
    let fams: &[Family] = match order {
        Order::PktVsBit => &[Family::Sliding, Family::Fixed, Family::TokenBucket],
        Order::BitVsG => &[Family::Bit],
        Order::GVsBit => &[Family::G],
    };
    let (flows, s) = scenario(&mut g, fams, constant_size, true);
    let f = g.int(0, flows.len() as i64 - 1) as usize;
    let e = |r: Result<tsn_delay::bounds::DelayBound, _>| -> Result<Q, String> {
        let r: tsn_delay::bounds::DelayBound = r.map_err(|e: tsn_delay::bounds::BoundError| e.to_string())?;
        fin(&r.value, "bound")
    };
    let a = e(delay_bound_bit(&flows, f, &s, None))?;
    let (small, big) = match order {
        Order::PktVsBit => (e(delay_bound_pkt(&flows, f, &s, None))?, a),
        Order::BitVsG => (a, e(delay_bound_g(&flows, f, &s, None))?),
        Order::GVsBit => (e(delay_bound_g(&flows, f, &s, None))?, a),
    };
    let ctx = format!("seed {seed} {order:?}: {small} vs {big}");
    if small > big {
        return Err(format!("{ctx}: ordering violated"));
    }
    // A = G needs every flow at constant size, the others only the flow of interest
    let same_size = match order {
        Order::BitVsG => flows.iter().all(|x| x.lmin == x.lmax),
        _ => flows[f].lmin == flows[f].lmax,
    };
    if same_size && small != big {
        return Err(format!("{ctx}: constant size but bounds differ"));
    }
    Ok(OrderOutcome { order, constant_size: same_size, strict: small < big })
}
