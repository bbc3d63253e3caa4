//! Traffic constraints: bit-level arrival curves, g-regulation and
//! packet-level arrival curves, with conversions and conformance checks.
//!
//! Times are seconds, data is bits, packet counts are plain integers.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::num::{self, Ext, Q};
use crate::pwfn::{Breakpoint, Curve, CurveError, Tail};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegulationError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("invalid constraint: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, RegulationError>;

fn invalid<T>(m: impl Into<String>) -> Result<T> {
    Err(RegulationError::Invalid(m.into()))
}

fn positive(name: &str, v: &Q) -> Result<()> {
    if v.is_positive() {
        Ok(())
    } else {
        invalid(format!("{name} must be positive, got {v}"))
    }
}

fn nonnegative(name: &str, v: &Q) -> Result<()> {
    if v.is_negative() {
        invalid(format!("{name} must be nonnegative, got {v}"))
    } else {
        Ok(())
    }
}

/// `b ceil(t / tau)`.
pub(crate) fn ceil_staircase(b: &Q, tau: &Q) -> Curve {
    Curve::new(
        vec![Breakpoint::new(num::zero(), num::zero(), b.clone(), num::zero())],
        Tail::Periodic { start: 0, period: tau.clone(), increment: b.clone() },
    )
    .expect("valid staircase")
}

/// `b floor(t / tau)`, right-continuous.
pub(crate) fn floor_staircase(b: &Q, tau: &Q) -> Curve {
    Curve::new(
        vec![Breakpoint::cont(num::zero(), num::zero(), num::zero())],
        Tail::Periodic { start: 0, period: tau.clone(), increment: b.clone() },
    )
    .expect("valid staircase")
}

/// Bit-level arrival curve: left-continuous, `alpha(0) = 0`.
#[derive(Clone, Debug)]
pub struct BitArrivalCurve {
    curve: Curve,
}

impl BitArrivalCurve {
    pub fn new(curve: Curve) -> Result<BitArrivalCurve> {
        if !curve.vanishes_at_zero() {
            return invalid("bit-level arrival curve must vanish at 0");
        }
        if !curve.is_left_continuous() {
            return invalid("bit-level arrival curve must be left-continuous");
        }
        Ok(BitArrivalCurve { curve })
    }

    /// `r t + b` for `t > 0`.
    pub fn token_bucket(r: Q, b: Q) -> Result<BitArrivalCurve> {
        nonnegative("rate", &r)?;
        nonnegative("burst", &b)?;
        BitArrivalCurve::new(Curve::rate(r).add(&Curve::step_at_zero(b))?)
    }

    /// `b ceil(t / tau)`.
    pub fn staircase(b: Q, tau: Q) -> Result<BitArrivalCurve> {
        positive("interval", &tau)?;
        positive("burst", &b)?;
        Ok(BitArrivalCurve { curve: ceil_staircase(&b, &tau) })
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    /// Arrival curves must cover the largest packet right after 0.
    pub fn check_lmax(&self, lmax: &Q) -> Result<()> {
        let r0 = self.curve.eval_right(&num::zero())?;
        if r0 < Ext::Fin(lmax.clone()) {
            return invalid(format!("alpha(0+) = {r0} is below Lmax = {lmax}"));
        }
        Ok(())
    }
}

/// g-regulation: `A_n - A_m >= g(sum of lengths m..n-1)`. Left-continuous,
/// `g(0) = 0`.
#[derive(Clone, Debug)]
pub struct GRegulation {
    curve: Curve,
}

impl GRegulation {
    pub fn new(curve: Curve) -> Result<GRegulation> {
        if !curve.vanishes_at_zero() {
            return invalid("g must vanish at 0");
        }
        if !curve.is_left_continuous() {
            return invalid("g must be left-continuous");
        }
        if curve.supremum().is_finite() {
            return invalid("g must be unbounded");
        }
        Ok(GRegulation { curve })
    }

    /// Length-rate quotient: `g(x) = x / r`.
    pub fn lrq(r: Q) -> Result<GRegulation> {
        positive("rate", &r)?;
        GRegulation::new(Curve::rate(num::one() / r))
    }

    /// `g(x) = [x - d]^+ / r`.
    pub fn shifted_rate(r: Q, d: Q) -> Result<GRegulation> {
        positive("rate", &r)?;
        nonnegative("shift", &d)?;
        let mut pts = vec![Breakpoint::cont(num::zero(), num::zero(), num::zero())];
        if d.is_zero() {
            pts[0].slope = num::one() / &r;
        } else {
            pts.push(Breakpoint::cont(d, num::zero(), num::one() / &r));
        }
        GRegulation::new(Curve::from_affine(pts)?)
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }
}

/// How a packet-level curve was built; the tightness constructions need it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PacketFamily {
    /// At most `k` packets in any window of length `tau`.
    SlidingInterval { tau: Q, k: Q },
    /// At most `k` packets in each slot of a fixed grid of period `tau`.
    FixedInterval { tau: Q, k: Q },
    /// `ceil(rho t + b - 1)`.
    TokenBucket { rho: Q, b: Q },
    Explicit,
}

/// Packet-level arrival curve: integer valued, left-continuous,
/// sub-additive, `alpha(0) = 0` and `alpha(0+) >= 1`.
#[derive(Clone, Debug)]
pub struct PacketArrivalCurve {
    curve: Curve,
    family: PacketFamily,
}

impl PacketArrivalCurve {
    pub fn new(curve: Curve) -> Result<PacketArrivalCurve> {
        Self::checked(curve, PacketFamily::Explicit)
    }

    fn checked(curve: Curve, family: PacketFamily) -> Result<PacketArrivalCurve> {
        if !curve.is_integer_valued() {
            return invalid("packet-level arrival curve must be integer valued");
        }
        if !curve.vanishes_at_zero() {
            return invalid("packet-level arrival curve must vanish at 0");
        }
        if !curve.is_left_continuous() {
            return invalid("packet-level arrival curve must be left-continuous");
        }
        if curve.eval_right(&num::zero())? < Ext::Fin(num::one()) {
            return invalid("packet-level arrival curve must allow one packet at 0+");
        }
        if !curve.min_plus_convolve(&curve)?.equals(&curve) {
            return invalid("packet-level arrival curve must be sub-additive");
        }
        Ok(PacketArrivalCurve { curve, family })
    }

    /// `k ceil(t / tau)`.
    pub fn sliding_interval(tau: Q, k: Q) -> Result<PacketArrivalCurve> {
        positive("interval", &tau)?;
        positive("packet count", &k)?;
        Self::checked(ceil_staircase(&k, &tau), PacketFamily::SlidingInterval { tau, k })
    }

    /// `k ceil(t / tau) + k` for `t > 0`.
    pub fn fixed_interval(tau: Q, k: Q) -> Result<PacketArrivalCurve> {
        positive("interval", &tau)?;
        positive("packet count", &k)?;
        let c = fixed_interval_curve(&tau, &k, &num::zero())?;
        Self::checked(c, PacketFamily::FixedInterval { tau, k })
    }

    /// `ceil(rho t + b - 1)` for `t > 0`.
    pub fn token_bucket(rho: Q, b: Q) -> Result<PacketArrivalCurve> {
        positive("packet rate", &rho)?;
        if b < num::one() {
            return invalid(format!("packet burst must be at least 1, got {b}"));
        }
        let ceil = ceil_staircase(&num::one(), &num::one());
        let inner = Curve::rate(rho.clone()).add_constant(&(&b - num::one()));
        let c = ceil.compose(&inner)?.with_value_at_zero(num::zero());
        Self::checked(c, PacketFamily::TokenBucket { rho, b })
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn family(&self) -> &PacketFamily {
        &self.family
    }
}

/// `k ceil([t - eps]^+ / tau) + k` for `t > 0`. With `eps = 0` this is the
/// fixed-interval curve.
pub(crate) fn fixed_interval_curve(tau: &Q, k: &Q, eps: &Q) -> Result<Curve> {
    let two_k = k + k;
    let pts = if eps.is_zero() {
        vec![
            Breakpoint::new(num::zero(), num::zero(), two_k.clone(), num::zero()),
            Breakpoint::new(tau.clone(), two_k.clone(), &two_k + k, num::zero()),
        ]
    } else {
        vec![
            Breakpoint::new(num::zero(), num::zero(), k.clone(), num::zero()),
            Breakpoint::new(eps.clone(), k.clone(), two_k, num::zero()),
        ]
    };
    Ok(Curve::new(pts, Tail::Periodic { start: 1, period: tau.clone(), increment: k.clone() })?)
}

/// One of the three constraint families.
#[derive(Clone, Debug)]
pub enum Constraint {
    Bit(BitArrivalCurve),
    G(GRegulation),
    Packet(PacketArrivalCurve),
}

impl Constraint {
    pub fn family_name(&self) -> &'static str {
        match self {
            Constraint::Bit(_) => "bit",
            Constraint::G(_) => "g",
            Constraint::Packet(_) => "packet",
        }
    }

    pub fn curve(&self) -> &Curve {
        match self {
            Constraint::Bit(a) => a.curve(),
            Constraint::G(g) => g.curve(),
            Constraint::Packet(p) => p.curve(),
        }
    }
}

/// A flow: its constraint and its packet length range.
#[derive(Clone, Debug)]
pub struct FlowSpec {
    pub name: String,
    pub constraint: Constraint,
    pub lmin: Q,
    pub lmax: Q,
}

impl FlowSpec {
    pub fn new(name: impl Into<String>, constraint: Constraint, lmin: Q, lmax: Q) -> Result<FlowSpec> {
        positive("Lmin", &lmin)?;
        if lmax < lmin {
            return invalid(format!("Lmax = {lmax} is below Lmin = {lmin}"));
        }
        if let Constraint::Bit(a) = &constraint {
            a.check_lmax(&lmax)?;
        }
        Ok(FlowSpec { name: name.into(), constraint, lmin, lmax })
    }

    /// Bit-level view of the flow's constraint.
    pub fn to_bit(&self) -> Result<BitArrivalCurve> {
        match &self.constraint {
            Constraint::Bit(a) => Ok(a.clone()),
            Constraint::G(g) => g_to_bit(g, &self.lmax),
            Constraint::Packet(p) => pkt_to_bit(p, &self.lmax),
        }
    }

    /// g-regulation view of the flow's constraint.
    pub fn to_g(&self) -> Result<GRegulation> {
        match &self.constraint {
            Constraint::Bit(a) => bit_to_g(a, &self.lmin),
            Constraint::G(g) => Ok(g.clone()),
            Constraint::Packet(p) => pkt_to_g(p, &self.lmax),
        }
    }
}

/// `g(x) = alpha^down(x + Lmin)` for `x > 0`, `g(0) = 0`.
pub fn bit_to_g(alpha: &BitArrivalCurve, lmin: &Q) -> Result<GRegulation> {
    let shifted = Curve::identity().add_constant(lmin);
    let g = alpha.curve.lower_pseudo_inverse()?.compose(&shifted)?;
    GRegulation::new(g.with_value_at_zero(num::zero()))
}

/// `alpha(t) = g^down(t) + Lmax` for `t > 0`, `alpha(0) = 0`.
pub fn g_to_bit(g: &GRegulation, lmax: &Q) -> Result<BitArrivalCurve> {
    let a = g.curve.lower_pseudo_inverse()?.add_constant(lmax);
    BitArrivalCurve::new(a.with_value_at_zero(num::zero()))
}

/// `g(x) = alpha^down(x / Lmax + 1)`.
pub fn pkt_to_g(alpha: &PacketArrivalCurve, lmax: &Q) -> Result<GRegulation> {
    positive("Lmax", lmax)?;
    let inner = Curve::rate(num::one() / lmax).add_constant(&num::one());
    let g = alpha.curve.lower_pseudo_inverse()?.compose(&inner)?;
    GRegulation::new(g)
}

/// `Lmax alpha`.
pub fn pkt_to_bit(alpha: &PacketArrivalCurve, lmax: &Q) -> Result<BitArrivalCurve> {
    positive("Lmax", lmax)?;
    BitArrivalCurve::new(alpha.curve.scale_value(lmax)?)
}

/// A packet sequence: `(arrival time, length)` in FIFO order.
pub type Arrivals = [(Q, Q)];

/// First violating pair `(m, n)`, 1-based, scanning `n` then `m` upwards.
pub type Violation = Option<(usize, usize)>;

fn check_sorted(arr: &Arrivals) -> Result<()> {
    if arr.windows(2).any(|w| w[1].0 < w[0].0) {
        return invalid("arrival times must be nondecreasing");
    }
    if arr.iter().any(|(a, l)| a.is_negative() || !l.is_positive()) {
        return invalid("arrival times must be nonnegative and lengths positive");
    }
    Ok(())
}

/// `sum_{k=m}^{n} l_k <= alpha^+(A_n - A_m)` for all `m <= n`.
pub fn check_bit_conformance(arr: &Arrivals, alpha: &BitArrivalCurve) -> Result<Violation> {
    check_sorted(arr)?;
    for n in 0..arr.len() {
        let mut bits = num::zero();
        for m in (0..=n).rev() {
            bits += &arr[m].1;
            let bound = alpha.curve.eval_right(&(&arr[n].0 - &arr[m].0))?;
            if Ext::Fin(bits.clone()) > bound {
                return Ok(Some(first_bit_violation(arr, alpha, n)?));
            }
        }
    }
    Ok(None)
}

fn first_bit_violation(arr: &Arrivals, alpha: &BitArrivalCurve, n: usize) -> Result<(usize, usize)> {
    for m in 0..=n {
        let bits: Q = arr[m..=n].iter().map(|p| p.1.clone()).sum();
        if Ext::Fin(bits) > alpha.curve.eval_right(&(&arr[n].0 - &arr[m].0))? {
            return Ok((m + 1, n + 1));
        }
    }
    unreachable!("caller found a violation ending at n")
}

/// `A_n - A_m >= g(sum_{k=m}^{n-1} l_k)` for all `m <= n`.
pub fn check_g_conformance(arr: &Arrivals, g: &GRegulation) -> Result<Violation> {
    check_sorted(arr)?;
    for n in 0..arr.len() {
        for m in 0..n {
            let bits: Q = arr[m..n].iter().map(|p| p.1.clone()).sum();
            if Ext::Fin(&arr[n].0 - &arr[m].0) < g.curve.eval(&bits)? {
                return Ok(Some((m + 1, n + 1)));
            }
        }
    }
    Ok(None)
}

/// `n - m + 1 <= alpha^+(A_n - A_m)` for all `m <= n`.
pub fn check_packet_conformance(arr: &Arrivals, alpha: &PacketArrivalCurve) -> Result<Violation> {
    check_sorted(arr)?;
    for n in 0..arr.len() {
        for m in 0..=n {
            let count = num::int((n - m + 1) as i64);
            if Ext::Fin(count) > alpha.curve.eval_right(&(&arr[n].0 - &arr[m].0))? {
                return Ok(Some((m + 1, n + 1)));
            }
        }
    }
    Ok(None)
}

/// Direct fixed-interval test: is there an offset `theta` with no arrival
/// before it and at most `k` arrivals in each `[theta + i tau, theta + (i+1) tau)`?
/// With `theta` given only that offset is tried.
pub fn conforms_fixed_interval(times: &[Q], tau: &Q, k: &Q, theta: Option<&Q>) -> bool {
    if times.is_empty() {
        return true;
    }
    let ok_with = |th: &Q| -> bool {
        if th.is_negative() || times.iter().any(|a| a < th) {
            return false;
        }
        let mut counts = std::collections::BTreeMap::<Q, Q>::new();
        for a in times {
            let slot = num::floor(&((a - th) / tau));
            *counts.entry(slot).or_insert_with(Q::zero) += Q::one();
        }
        counts.values().all(|c| c <= k)
    };
    if let Some(th) = theta {
        return ok_with(th);
    }
    // Only theta mod tau matters, and some optimal grid has a slot boundary
    // on an arrival; the largest such offset not after the first arrival.
    let first = &times[0];
    times.iter().any(|a| {
        let r = (first - a) - num::floor(&((first - a) / tau)) * tau;
        ok_with(&(first - r))
    })
}
