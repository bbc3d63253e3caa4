//! Random instances shared by the integration tests and the acceptance run.
#![allow(dead_code)]

pub mod cases;
pub mod conversions;
pub mod identities;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsn_delay::num::{self, int, ratio, Ext, Q};
use tsn_delay::pwfn::{Breakpoint, Curve, Tail};
use tsn_delay::regulation::{BitArrivalCurve, Constraint, FlowSpec, GRegulation, PacketArrivalCurve};
use tsn_delay::service::{self, ServerSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cont {
    Any,
    Left,
    Right,
    Both,
}

#[derive(Clone, Debug)]
pub struct CurveOpts {
    pub cont: Cont,
    /// Continuous with every slope at most this.
    pub lipschitz: Option<Q>,
    pub periodic: bool,
    pub unbounded: bool,
}

impl CurveOpts {
    pub fn any() -> CurveOpts {
        CurveOpts { cont: Cont::Any, lipschitz: None, periodic: true, unbounded: false }
    }
    pub fn cont(cont: Cont) -> CurveOpts {
        CurveOpts { cont, ..CurveOpts::any() }
    }
}

pub struct Gen {
    pub rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn coin(&mut self) -> bool {
        self.rng.gen_bool(0.5)
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    /// `k / den` with `k` in `lo..=hi`.
    pub fn q(&mut self, lo: i64, hi: i64, den: i64) -> Q {
        ratio(self.int(lo, hi), den)
    }

    /// Rational in `[0, hi]` with an awkward denominator.
    pub fn point(&mut self, hi: &Q) -> Q {
        let den = [1, 2, 3, 4, 6, 7, 8, 12][self.int(0, 7) as usize];
        let steps = num::floor(&(hi * int(den))).to_integer();
        let steps: i64 = steps.try_into().unwrap_or(i64::MAX / 2).max(0);
        ratio(self.int(0, steps.max(1)), den)
    }

    fn jump(&mut self) -> Q {
        if self.coin() {
            num::zero()
        } else {
            self.q(1, 6, 2)
        }
    }

    fn slope(&mut self, o: &CurveOpts, positive: bool) -> Q {
        let lo = if positive { 1 } else { 0 };
        match &o.lipschitz {
            Some(c) => self.q(lo, 4, 4) * c,
            None => self.q(lo, 6, 2),
        }
    }

    /// Random nondecreasing curve with `w(0) = 0`.
    pub fn curve(&mut self, o: &CurveOpts) -> Curve {
        loop {
            if let Some(c) = self.try_curve(o) {
                return c;
            }
        }
    }

    fn try_curve(&mut self, o: &CurveOpts) -> Option<Curve> {
        let cont = if o.lipschitz.is_some() { Cont::Both } else { o.cont };
        let n = self.int(1, 4) as usize;
        let mut pts: Vec<Breakpoint> = Vec::with_capacity(n);
        let r0 = match cont {
            Cont::Any | Cont::Left => self.jump(),
            _ => num::zero(),
        };
        let s0 = self.slope(o, false);
        pts.push(Breakpoint::new(num::zero(), num::zero(), r0, s0));
        for _ in 1..n {
            let prev = pts.last().unwrap();
            let x = &prev.x + self.q(1, 8, 4);
            let left = prev.right.unwrap_fin() + &prev.slope * (&x - &prev.x);
            let (v, r) = match cont {
                Cont::Any => {
                    let v = &left + self.jump();
                    let r = &v + self.jump();
                    (v, r)
                }
                Cont::Left => (left.clone(), &left + self.jump()),
                Cont::Right => {
                    let v = &left + self.jump();
                    (v.clone(), v)
                }
                Cont::Both => (left.clone(), left),
            };
            let s = self.slope(o, false);
            pts.push(Breakpoint::new(x, v, r, s));
        }
        let tail = if o.periodic && self.coin() {
            let k = self.int(0, n as i64 - 1) as usize;
            let last = pts.last().unwrap();
            let d = (&last.x - &pts[k].x) + self.q(1, 8, 4);
            let wrap = &pts[k].x + &d;
            let left = last.right.unwrap_fin() + &last.slope * (&wrap - &last.x);
            let vk = pts[k].value.unwrap_fin().clone();
            let extra = match cont {
                Cont::Any | Cont::Right => self.jump(),
                _ => num::zero(),
            };
            if matches!(cont, Cont::Right | Cont::Both) && pts[k].value != pts[k].right {
                return None;
            }
            let inc = &left - &vk + extra;
            if inc.is_negative() || (o.unbounded && inc.is_zero()) {
                return None;
            }
            Tail::Periodic { start: k, period: d, increment: inc }
        } else {
            if o.unbounded {
                let s = self.slope(o, true);
                pts.last_mut().unwrap().slope = s;
            }
            Tail::Affine
        };
        Curve::new(pts, tail).ok()
    }

    /// Breakpoints over two periods of the tail plus `extra` random points.
    pub fn sample_x(&mut self, c: &Curve, extra: usize) -> Vec<Q> {
        let mut xs = breakpoint_xs(c, 2);
        let hi = xs.last().cloned().unwrap_or_else(num::zero) * ratio(3, 2) + int(1);
        for _ in 0..extra {
            xs.push(self.point(&hi));
        }
        xs.sort();
        xs.dedup();
        xs
    }

    /// Values and limits over two periods plus `extra` random levels.
    pub fn sample_y(&mut self, c: &Curve, extra: usize) -> Vec<Q> {
        let mut ys = Vec::new();
        for x in breakpoint_xs(c, 2) {
            for v in [c.eval(&x).unwrap(), c.eval_right(&x).unwrap()] {
                if let Ext::Fin(v) = v {
                    ys.push(v);
                }
            }
        }
        let hi = ys.iter().max().cloned().unwrap_or_else(num::zero) * ratio(3, 2) + int(1);
        for _ in 0..extra {
            ys.push(self.point(&hi));
        }
        ys.sort();
        ys.dedup();
        ys
    }
}

/// Breakpoint abscissae, with the periodic part unrolled `periods` times.
pub fn breakpoint_xs(c: &Curve, periods: i64) -> Vec<Q> {
    let mut xs: Vec<Q> = c.breakpoints().iter().map(|p| p.x.clone()).collect();
    if let Tail::Periodic { start, period, .. } = c.tail() {
        let pattern: Vec<Q> = c.breakpoints()[*start..].iter().map(|p| p.x.clone()).collect();
        for k in 1..=periods {
            xs.extend(pattern.iter().map(|x| x + int(k) * period));
        }
    }
    xs
}

// ---- scenarios ----

pub fn server(beta: Curve, c: Q) -> ServerSpec {
    ServerSpec::new(beta, c, true).unwrap()
}

/// Two sliding-interval flows at a rate-latency server.
#[derive(Clone, Debug)]
pub struct TableOne {
    pub k1: Q,
    pub k2: Q,
    pub tau1: Q,
    pub tau2: Q,
    pub l1min: Q,
    pub l1max: Q,
    pub l2max: Q,
    pub r: Q,
    pub c: Q,
    pub t: Q,
}

impl TableOne {
    pub fn random(g: &mut Gen) -> TableOne {
        let k1 = int(g.int(1, 4));
        let k2 = int(g.int(1, 4));
        let l1max = g.q(2, 40, 1);
        let l1min = g.q(1, 4 * l1max.to_integer().try_into().unwrap_or(4i64), 4).min(l1max.clone());
        let l2max = g.q(1, 40, 1);
        let r = g.q(5, 60, 1);
        let c = &r + g.q(1, 60, 2);
        let t = g.q(0, 20, 4);
        // pick the intervals so that K1 L1 / tau1 + K2 L2 / tau2 <= R
        let share = g.q(1, 9, 10);
        let tau1 = &k1 * &l1max / (&r * &share) * g.q(4, 12, 4);
        let tau2 = &k2 * &l2max / (&r * (num::one() - &share)) * g.q(4, 12, 4);
        TableOne { k1, k2, tau1, tau2, l1min, l1max, l2max, r, c, t }
    }

    pub fn flows(&self) -> Vec<FlowSpec> {
        let p1 = PacketArrivalCurve::sliding_interval(self.tau1.clone(), self.k1.clone()).unwrap();
        let p2 = PacketArrivalCurve::sliding_interval(self.tau2.clone(), self.k2.clone()).unwrap();
        vec![
            FlowSpec::new("1", Constraint::Packet(p1), self.l1min.clone(), self.l1max.clone()).unwrap(),
            FlowSpec::new("2", Constraint::Packet(p2), self.l2max.clone(), self.l2max.clone()).unwrap(),
        ]
    }

    pub fn server(&self) -> ServerSpec {
        server(service::rate_latency(&self.r, &self.t).unwrap(), self.c.clone())
    }

    /// `(NC, A, pkt)` from the table's expressions.
    pub fn closed_forms(&self) -> (Q, Q, Q) {
        let nc = &self.t + (&self.k1 * &self.l1max + &self.k2 * &self.l2max) / &self.r;
        let gap = num::one() / &self.r - num::one() / &self.c;
        let a = &nc - &self.l1min * &gap;
        let pkt = &nc - &self.l1max * &gap;
        (nc, a, pkt)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Sliding,
    Fixed,
    TokenBucket,
    Bit,
    G,
}

/// Random c-Lipschitz server: rate-latency with `R <= c` or DRR.
pub fn lipschitz_server(g: &mut Gen, lmax_all: &Q, allow_drr: bool) -> ServerSpec {
    if allow_drr && g.int(0, 3) == 0 {
        let n = g.int(2, 4) as u32;
        let q = lmax_all * g.q(4, 8, 4);
        let eps = num::qmin(lmax_all, &g.q(1, 4, 4));
        let c = g.q(20, 60, 1);
        server(service::drr(n, &q, &c, &eps, lmax_all).unwrap(), c)
    } else {
        let r = g.q(10, 60, 1);
        let c = &r + g.q(0, 40, 2);
        let t = g.q(0, 12, 4);
        server(service::rate_latency(&r, &t).unwrap(), c)
    }
}

/// Random flow of the given family with long-run rate about `load`.
pub fn flow(g: &mut Gen, name: &str, fam: Family, load: &Q, constant_size: bool) -> FlowSpec {
    let lmax = g.q(2, 24, 1);
    let lmin = if constant_size { lmax.clone() } else { num::qmin(&lmax, &num::qmax(&g.q(1, 4, 1), &(&lmax * g.q(1, 4, 4)))) };
    let c = match fam {
        Family::Sliding | Family::Fixed => {
            let k = int(g.int(1, 3));
            let base = &k * &lmax / load;
            let tau = base * g.q(4, 8, 4);
            if fam == Family::Sliding {
                Constraint::Packet(PacketArrivalCurve::sliding_interval(tau, k).unwrap())
            } else {
                Constraint::Packet(PacketArrivalCurve::fixed_interval(tau, k).unwrap())
            }
        }
        Family::TokenBucket => {
            let rho = load / &lmax * g.q(1, 4, 4);
            let b = int(g.int(1, 3));
            Constraint::Packet(PacketArrivalCurve::token_bucket(rho, b).unwrap())
        }
        Family::Bit => {
            if g.coin() {
                let b = &lmax + g.q(0, 20, 2);
                Constraint::Bit(BitArrivalCurve::token_bucket(load * g.q(1, 4, 4), b).unwrap())
            } else {
                let b = &lmax * int(g.int(1, 3));
                let tau = &b / load * g.q(4, 8, 4);
                Constraint::Bit(BitArrivalCurve::staircase(b, tau).unwrap())
            }
        }
        Family::G => {
            let r = load * g.q(1, 4, 4);
            if g.coin() {
                Constraint::G(GRegulation::lrq(r).unwrap())
            } else {
                Constraint::G(GRegulation::shifted_rate(r, g.q(0, 8, 2)).unwrap())
            }
        }
    };
    FlowSpec::new(name, c, lmin, lmax).unwrap()
}

/// 1-4 flows of one family sharing a c-Lipschitz server, loaded below 80%.
pub fn scenario(g: &mut Gen, fams: &[Family], constant_size: bool, allow_drr: bool) -> (Vec<FlowSpec>, ServerSpec) {
    let m = g.int(1, 4) as usize;
    // build the server first with a provisional Lmax bound, then size the flows
    let lmax_all = int(24);
    let s = lipschitz_server(g, &lmax_all, allow_drr);
    let rate = s.beta.eventual_rate().unwrap_fin().clone();
    let per_flow = rate * ratio(4, 5) / int(m as i64);
    let flows = (0..m)
        .map(|i| {
            let fam = fams[g.int(0, fams.len() as i64 - 1) as usize];
            let load = &per_flow * g.q(1, 4, 4);
            flow(g, &format!("f{i}"), fam, &load, constant_size)
        })
        .collect();
    (flows, s)
}

/// Two token buckets at a FIFO residual server.
#[derive(Clone, Debug)]
pub struct ResidualCase {
    pub r: Q,
    pub theta: Q,
    pub c: Q,
    pub lmin: Q,
    pub lmax: Q,
    pub tb1: (Q, Q),
    pub tb2: (Q, Q),
    pub l2max: Q,
}

impl ResidualCase {
    pub fn random(g: &mut Gen, low_theta: bool) -> ResidualCase {
        let r = g.q(10, 40, 1);
        let c = &r * g.q(5, 20, 4);
        let lmax = g.q(4, 24, 1);
        let lmin = num::qmax(&num::one(), &(&lmax * g.q(1, 3, 4)));
        let l2max = g.q(1, 24, 1);
        let b1 = &lmax + g.q(0, 40, 2);
        let b2 = &l2max + g.q(0, 40, 2);
        let share = g.q(1, 3, 4);
        let tb1 = (&r * &share * g.q(1, 4, 4), b1);
        let tb2 = (&r * (num::one() - &share) * g.q(1, 4, 4), b2);
        let psi = (&tb1.1 + &tb2.1) / &r;
        let theta = if low_theta { &psi * g.q(0, 4, 10) } else { &psi * g.q(10, 20, 10) };
        ResidualCase { r, theta, c, lmin, lmax, tb1, tb2, l2max }
    }

    pub fn flows(&self) -> Vec<FlowSpec> {
        let a = BitArrivalCurve::token_bucket(self.tb1.0.clone(), self.tb1.1.clone()).unwrap();
        let b = BitArrivalCurve::token_bucket(self.tb2.0.clone(), self.tb2.1.clone()).unwrap();
        vec![
            FlowSpec::new("1", Constraint::Bit(a), self.lmin.clone(), self.lmax.clone()).unwrap(),
            FlowSpec::new("2", Constraint::Bit(b), self.l2max.clone(), self.l2max.clone()).unwrap(),
        ]
    }

    pub fn server(&self) -> ServerSpec {
        server(service::fifo_residual(&self.r, &self.theta).unwrap(), self.c.clone())
    }

    /// `(bound, attaining l, low-l regime)` from the closed form.
    pub fn oracle(&self) -> (Q, Q, bool) {
        let psi = (&self.tb1.1 + &self.tb2.1) / &self.r;
        let at = |l: &Q| num::qmax(&(&self.theta + l / &self.c), &(&psi - l / &self.r + l / &self.c));
        let lhs = &self.r * (&psi - &self.theta);
        let rhs = (num::one() - &self.r / &self.c) * &self.lmin + &self.r / &self.c * &self.lmax;
        if lhs <= rhs {
            (at(&self.lmax), self.lmax.clone(), false)
        } else {
            (at(&self.lmin), self.lmin.clone(), true)
        }
    }
}

/// `theta(x) = inf_{0<=s<=x} x - s + Q floor(s / M)` on a point, by its
/// closed form.
pub fn drr_theta(x: &Q, q: &Q, m: &Q) -> Q {
    let k = num::floor(&(x / m));
    if k.is_zero() {
        return num::zero();
    }
    num::qmin(&(q * &k), &(x - &k * m + q * (&k - num::one())))
}

/// The DRR service curve evaluated pointwise from its closed formula.
pub fn drr_grid(t: &Q, n: i64, q: &Q, c: &Q, eps: &Q, lmax: &Q) -> Q {
    let m = int(n - 1) * q;
    let zeta = num::pos(c * t - int(n - 1) * (q * int(4) - eps) + eps);
    let cap = num::qmin(&num::pos(c * t - int(2 * (n - 1)) * (lmax * int(2) - eps)), eps);
    drr_theta(&zeta, q, &m) + cap
}
