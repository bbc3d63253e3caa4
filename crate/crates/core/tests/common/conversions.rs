//! Conversion round trips on one random instance.

use num_traits::Zero;

use tsn_delay::num::{self, int, Ext, Q};
use tsn_delay::pwfn::Curve;
use tsn_delay::regulation::{bit_to_g, g_to_bit, pkt_to_bit, pkt_to_g, BitArrivalCurve, GRegulation, PacketArrivalCurve};

use super::{Cont, CurveOpts, Gen};

pub struct Outcome {
    pub violations: Vec<String>,
    /// Points where the shortcut `g([x - Lmax]^+ + Lmin)`
    /// disagrees with the derived `g'`.
    pub shortcut_misses: usize,
    pub constant_size: bool,
}

fn sizes(g: &mut Gen) -> (Q, Q) {
    let lmax = g.q(2, 24, 2);
    let lmin = if g.int(0, 3) == 0 { lmax.clone() } else { &lmax * g.q(1, 7, 8) };
    (lmin, lmax)
}

fn random_bit(g: &mut Gen, lmax: &Q) -> BitArrivalCurve {
    let w = g.curve(&CurveOpts::cont(Cont::Left));
    let b = lmax + g.q(0, 8, 2);
    BitArrivalCurve::new(w.add(&Curve::step_at_zero(b)).unwrap()).unwrap()
}

fn random_g(g: &mut Gen) -> GRegulation {
    let c = g.curve(&CurveOpts { unbounded: true, ..CurveOpts::cont(Cont::Left) });
    GRegulation::new(c).unwrap()
}

fn random_pkt(g: &mut Gen) -> PacketArrivalCurve {
    let tau = g.q(1, 24, 4);
    let k = int(g.int(1, 4));
    match g.int(0, 2) {
        0 => PacketArrivalCurve::sliding_interval(tau, k).unwrap(),
        1 => PacketArrivalCurve::fixed_interval(tau, k).unwrap(),
        _ => PacketArrivalCurve::token_bucket(g.q(1, 12, 4), k).unwrap(),
    }
}

fn points(g: &mut Gen, c: &Curve, shifts: &[&Q]) -> Vec<Q> {
    let mut xs = g.sample_x(c, 50);
    let base = xs.clone();
    for s in shifts {
        xs.extend(base.iter().map(|x| x + *s));
        xs.extend(base.iter().filter(|x| *x > *s).map(|x| x - *s));
    }
    xs.sort();
    xs.dedup();
    xs
}

/// Bit curve through g and back: `alpha' = alpha - Lmin + Lmax` for `t > 0`.
fn bit_round_trip(g: &mut Gen, lmin: &Q, lmax: &Q, out: &mut Vec<String>) {
    let alpha = random_bit(g, lmax);
    let back = g_to_bit(&bit_to_g(&alpha, lmin).unwrap(), lmax).unwrap();
    let a = alpha.curve();
    let d = lmax - lmin;
    for t in points(g, a, &[]) {
        let (want, want_r) = if t.is_zero() {
            (Ext::zero(), a.eval_right(&t).unwrap().add_q(&d))
        } else {
            (a.eval(&t).unwrap().add_q(&d), a.eval_right(&t).unwrap().add_q(&d))
        };
        if back.curve().eval(&t).unwrap() != want || back.curve().eval_right(&t).unwrap() != want_r {
            out.push(format!("alpha' != alpha - Lmin + Lmax at t={t}"));
        }
    }
}

/// g through a bit curve and back: `g'(x) = g([x - (Lmax - Lmin)]^+)`.
fn g_round_trip(g: &mut Gen, lmin: &Q, lmax: &Q, out: &mut Vec<String>) -> usize {
    let reg = random_g(g);
    let back = bit_to_g(&g_to_bit(&reg, lmax).unwrap(), lmin).unwrap();
    let (f, b) = (reg.curve(), back.curve());
    let d = lmax - lmin;
    let mut shortcut_misses = 0;
    for x in points(g, f, &[&d, lmax, lmin]) {
        let arg = num::pos(&x - &d);
        let want = f.eval(&arg).unwrap();
        let want_r = if x < d { Ext::zero() } else { f.eval_right(&arg).unwrap() };
        if b.eval(&x).unwrap() != want || b.eval_right(&x).unwrap() != want_r {
            out.push(format!("g' != g([x - Lmax + Lmin]^+) at x={x}"));
        }
        let shortcut = f.eval(&(num::pos(&x - lmax) + lmin)).unwrap();
        if !x.is_zero() && shortcut != b.eval(&x).unwrap() {
            shortcut_misses += 1;
        }
        if b.eval(&x).unwrap() > f.eval(&x).unwrap() {
            out.push(format!("g' above g at x={x}"));
        }
    }
    shortcut_misses
}

/// Packet curve: the g route lands exactly on `Lmax alpha`, the bit route
/// back to g is weaker, strictly so somewhere iff `Lmin < Lmax`.
fn packet_routes(g: &mut Gen, lmin: &Q, lmax: &Q, out: &mut Vec<String>) {
    let alpha = random_pkt(g);
    let via_g = pkt_to_g(&alpha, lmax).unwrap();
    let direct = pkt_to_bit(&alpha, lmax).unwrap();
    let forward = g_to_bit(&via_g, lmax).unwrap();
    if !forward.curve().equals(direct.curve()) {
        out.push("g route to bits differs from Lmax alpha".into());
    }
    let weaker = bit_to_g(&direct, lmin).unwrap();
    let (gc, wc) = (via_g.curve(), weaker.curve());
    if !wc.le(gc) {
        out.push("bit route to g is not below the direct g".into());
    }
    let xs = points(g, gc, &[lmax, lmin]);
    let strict = xs.iter().any(|x| wc.eval(x).unwrap() < gc.eval(x).unwrap());
    if lmin == lmax && (strict || !wc.equals(gc)) {
        out.push("constant sizes: the two g curves differ".into());
    }
    if lmin < lmax && !strict {
        out.push("Lmin < Lmax: bit route to g is nowhere strictly weaker".into());
    }
}

pub fn instance(seed: u64) -> Outcome {
    let mut g = Gen::new(seed);
    let (lmin, lmax) = sizes(&mut g);
    let mut violations = Vec::new();
    bit_round_trip(&mut g, &lmin, &lmax, &mut violations);
    let shortcut_misses = g_round_trip(&mut g, &lmin, &lmax, &mut violations);
    packet_routes(&mut g, &lmin, &lmax, &mut violations);
    Outcome { violations, shortcut_misses, constant_size: lmin == lmax }
}
