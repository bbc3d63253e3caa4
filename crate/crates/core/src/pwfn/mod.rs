//! Exact piecewise-affine, ultimately pseudo-periodic, wide-sense increasing
//! functions on `[0, +inf)` with values in `[0, +inf]`.
//!
//! A [`Curve`] is a list of [`Breakpoint`]s followed by a tail. Jumps are
//! encoded by `value != right` (or by a left limit that differs from the
//! value), so left and right limits are always exactly recoverable.

mod compose;
mod conv;
mod deviation;
mod inverse;
mod ops;
pub(crate) mod window;

use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::num::{self, Ext, Q};
use window::Window;

pub use deviation::{horizontal_deviation, horizontal_deviation_upper};
pub(crate) use deviation::horizon as deviation_horizon;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid curve: {0}")]
    Invalid(String),
    #[error("arithmetic error: {0}")]
    Arithmetic(String),
    #[error("unbounded horizon: {0}")]
    UnboundedHorizon(String),
}

pub type Result<T> = std::result::Result<T, CurveError>;

/// One breakpoint: the value at `x`, the right limit at `x`, and the slope of
/// the affine piece that starts right after `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Breakpoint {
    pub x: Q,
    pub value: Ext,
    pub right: Ext,
    pub slope: Q,
}

impl Breakpoint {
    pub fn new(x: Q, value: Q, right: Q, slope: Q) -> Breakpoint {
        Breakpoint { x, value: Ext::Fin(value), right: Ext::Fin(right), slope }
    }

    /// A continuous breakpoint.
    pub fn cont(x: Q, value: Q, slope: Q) -> Breakpoint {
        Breakpoint { x, value: Ext::Fin(value.clone()), right: Ext::Fin(value), slope }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tail {
    /// The last breakpoint's piece extends to infinity. Covers affine tails,
    /// constant tails (slope 0), and `+inf` tails (right value `Inf`).
    Affine,
    /// For `t >= pts[start].x`: `w(t + period) = w(t) + increment`.
    /// `pts[start..]` describe one period.
    Periodic { start: usize, period: Q, increment: Q },
}

/// Summary of a curve's tail, used to align operands.
#[derive(Clone, Debug)]
pub(crate) struct TailInfo {
    /// Periodicity (with any period for affine tails) holds from here on.
    pub t0: Q,
    pub period: Option<Q>,
    pub rate: Ext,
}

#[derive(Clone)]
pub struct Curve {
    pts: Vec<Breakpoint>,
    tail: Tail,
}

/// Cap on breakpoints materialized by a single operation.
pub(crate) const MAX_WINDOW_POINTS: usize = 2_000_000;

impl Curve {
    /// Validating constructor.
    pub fn new(pts: Vec<Breakpoint>, tail: Tail) -> Result<Curve> {
        let c = Curve { pts, tail };
        c.validate()?;
        Ok(c.canonical())
    }

    pub fn from_affine(pts: Vec<Breakpoint>) -> Result<Curve> {
        Curve::new(pts, Tail::Affine)
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.pts
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    /// `w(t) = 0`.
    pub fn zero() -> Curve {
        Curve { pts: vec![Breakpoint::cont(num::zero(), num::zero(), num::zero())], tail: Tail::Affine }
    }

    /// `w(t) = t`.
    pub fn identity() -> Curve {
        Curve::rate(num::one())
    }

    /// `w(t) = r t`.
    pub fn rate(r: Q) -> Curve {
        Curve { pts: vec![Breakpoint::cont(num::zero(), num::zero(), r)], tail: Tail::Affine }
    }

    /// `w(0) = 0`, `w(t) = v` for `t > 0`.
    pub fn step_at_zero(v: Q) -> Curve {
        Curve { pts: vec![Breakpoint::new(num::zero(), num::zero(), v, num::zero())], tail: Tail::Affine }
    }

    /// `w(t) = v` everywhere, including at 0.
    pub fn constant(v: Ext) -> Curve {
        Curve {
            pts: vec![Breakpoint { x: num::zero(), value: v.clone(), right: v, slope: num::zero() }],
            tail: Tail::Affine,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CurveError::Invalid(m));
        if self.pts.is_empty() {
            return bad("no breakpoints".into());
        }
        if !self.pts[0].x.is_zero() {
            return bad("first breakpoint must be at 0".into());
        }
        let mut seen_inf = false;
        for (i, p) in self.pts.iter().enumerate() {
            if i > 0 && p.x <= self.pts[i - 1].x {
                return bad(format!("abscissae not strictly increasing at index {i}"));
            }
            if p.slope.is_negative() {
                return bad(format!("negative slope at x={}", p.x));
            }
            if let Ext::Fin(v) = &p.value {
                if v.is_negative() {
                    return bad(format!("negative value at x={}", p.x));
                }
            }
            if p.value > p.right {
                return bad(format!("decreasing jump at x={}", p.x));
            }
            if seen_inf {
                return bad(format!("breakpoint after +inf region at x={}", p.x));
            }
            if p.right.is_inf() {
                seen_inf = true;
            }
            if i > 0 {
                let l = self.left_at_index(i);
                if l > p.value {
                    return bad(format!("left limit exceeds value at x={}", p.x));
                }
            }
        }
        if let Tail::Periodic { start, period, increment } = &self.tail {
            if *start >= self.pts.len() {
                return bad("periodic start index out of range".into());
            }
            if !period.is_positive() || increment.is_negative() {
                return bad("period must be positive and increment nonnegative".into());
            }
            if seen_inf {
                return bad("periodic tail cannot contain +inf".into());
            }
            let t0 = &self.pts[*start].x;
            let last = self.pts.last().unwrap();
            if last.x >= t0 + period {
                return bad("periodic pattern longer than its period".into());
            }
            let end_left = self.seg(self.pts.len() - 1, &(t0 + period));
            let next = self.pts[*start].value.add_q(increment);
            if end_left > next {
                return bad("periodic tail decreases across the period boundary".into());
            }
        }
        Ok(())
    }

    fn seg(&self, i: usize, t: &Q) -> Ext {
        let p = &self.pts[i];
        match &p.right {
            Ext::Fin(r) => Ext::Fin(r + &p.slope * (t - &p.x)),
            Ext::Inf => Ext::Inf,
        }
    }

    fn left_at_index(&self, i: usize) -> Ext {
        if i == 0 {
            self.pts[0].value.clone()
        } else {
            self.seg(i - 1, &self.pts[i].x)
        }
    }

    fn locate(&self, t: &Q) -> usize {
        self.pts.partition_point(|p| &p.x <= t).saturating_sub(1)
    }

    /// Splits `t >= T` into a base abscissa in `[T, T + d)` and a period count.
    fn fold(&self, t: &Q, left: bool) -> (Q, Q) {
        match &self.tail {
            Tail::Periodic { start, period, .. } => {
                let t0 = &self.pts[*start].x;
                if t < t0 || (left && t == t0) {
                    return (t.clone(), num::zero());
                }
                let k = if left {
                    num::ceil(&((t - t0) / period)) - num::one()
                } else {
                    num::floor(&((t - t0) / period))
                };
                (t - &k * period, k)
            }
            Tail::Affine => (t.clone(), num::zero()),
        }
    }

    fn inc(&self) -> Q {
        match &self.tail {
            Tail::Periodic { increment, .. } => increment.clone(),
            Tail::Affine => num::zero(),
        }
    }

    fn check_domain(t: &Q) -> Result<()> {
        if t.is_negative() {
            Err(CurveError::Domain(format!("negative abscissa {t}")))
        } else {
            Ok(())
        }
    }

    /// `w(t)`.
    pub fn eval(&self, t: &Q) -> Result<Ext> {
        Self::check_domain(t)?;
        Ok(self.value_at(t))
    }

    /// `w^-(t)`, with `w^-(0) = w(0)`.
    pub fn eval_left(&self, t: &Q) -> Result<Ext> {
        Self::check_domain(t)?;
        Ok(self.left_limit_at(t))
    }

    /// `w^+(t)`.
    pub fn eval_right(&self, t: &Q) -> Result<Ext> {
        Self::check_domain(t)?;
        Ok(self.right_limit_at(t))
    }

    pub(crate) fn value_at(&self, t: &Q) -> Ext {
        let (u, k) = self.fold(t, false);
        let i = self.locate(&u);
        let v = if self.pts[i].x == u { self.pts[i].value.clone() } else { self.seg(i, &u) };
        v.add_q(&(k * self.inc()))
    }

    pub(crate) fn right_limit_at(&self, t: &Q) -> Ext {
        let (u, k) = self.fold(t, false);
        let i = self.locate(&u);
        let v = if self.pts[i].x == u { self.pts[i].right.clone() } else { self.seg(i, &u) };
        v.add_q(&(k * self.inc()))
    }

    pub(crate) fn left_limit_at(&self, t: &Q) -> Ext {
        if t.is_zero() {
            return self.pts[0].value.clone();
        }
        let (u, k) = self.fold(t, true);
        let i = self.locate(&u);
        let v = if self.pts[i].x == u {
            self.left_at_index(i)
        } else {
            self.seg(i, &u)
        };
        v.add_q(&(k * self.inc()))
    }

    /// Value at `+inf` abscissa: the supremum of the curve.
    pub(crate) fn value_at_ext(&self, t: &Ext) -> Ext {
        match t {
            Ext::Fin(q) => self.value_at(q),
            Ext::Inf => self.supremum(),
        }
    }

    /// `sup_t w(t)`.
    pub fn supremum(&self) -> Ext {
        match &self.tail {
            Tail::Periodic { increment, .. } if increment.is_positive() => Ext::Inf,
            Tail::Periodic { start, .. } => self.pts[*start].value.clone(),
            Tail::Affine => {
                let last = self.pts.last().unwrap();
                if last.slope.is_positive() {
                    Ext::Inf
                } else {
                    last.right.clone()
                }
            }
        }
    }

    /// Long-run growth rate `lim w(t)/t`.
    pub fn eventual_rate(&self) -> Ext {
        match &self.tail {
            Tail::Periodic { period, increment, .. } => Ext::Fin(increment / period),
            Tail::Affine => {
                let last = self.pts.last().unwrap();
                if last.right.is_inf() {
                    Ext::Inf
                } else {
                    Ext::Fin(last.slope.clone())
                }
            }
        }
    }

    /// Abscissa from which the tail description applies.
    pub fn transient_end(&self) -> &Q {
        match &self.tail {
            Tail::Periodic { start, .. } => &self.pts[*start].x,
            Tail::Affine => &self.pts.last().unwrap().x,
        }
    }

    pub(crate) fn tail_info(&self) -> TailInfo {
        match &self.tail {
            Tail::Periodic { start, period, increment } => TailInfo {
                t0: self.pts[*start].x.clone(),
                period: Some(period.clone()),
                rate: Ext::Fin(increment / period),
            },
            Tail::Affine => {
                let last = self.pts.last().unwrap();
                if last.right.is_inf() {
                    TailInfo { t0: &last.x + num::one(), period: None, rate: Ext::Inf }
                } else if last.value != last.right {
                    // affine only strictly after the final jump
                    TailInfo { t0: &last.x + self.jump_offset(), period: None, rate: Ext::Fin(last.slope.clone()) }
                } else {
                    TailInfo { t0: last.x.clone(), period: None, rate: Ext::Fin(last.slope.clone()) }
                }
            }
        }
    }

    /// Small positive offset on the curve's own scale: the shortest gap
    /// between breakpoints, else the time the last slope needs to cover the
    /// last jump.
    fn jump_offset(&self) -> Q {
        let gap = self.pts.windows(2).map(|w| &w[1].x - &w[0].x).min();
        if let Some(g) = gap {
            return g;
        }
        let last = self.pts.last().unwrap();
        match (&last.value, &last.right) {
            (Ext::Fin(v), Ext::Fin(r)) if last.slope.is_positive() => (r - v).abs() / &last.slope,
            _ => num::one(),
        }
    }

    /// True when `w(0) = 0` (membership in the class of functions that
    /// vanish at the origin).
    pub fn vanishes_at_zero(&self) -> bool {
        self.pts[0].value == Ext::zero()
    }

    pub fn is_left_continuous(&self) -> bool {
        self.limit_check(|l, v, _| l == v)
    }

    pub fn is_right_continuous(&self) -> bool {
        self.limit_check(|_, v, r| v == r)
    }

    pub fn is_continuous(&self) -> bool {
        self.limit_check(|l, v, r| l == v && v == r)
    }

    fn limit_check(&self, ok: impl Fn(&Ext, &Ext, &Ext) -> bool) -> bool {
        let info = self.tail_info();
        let h = match &info.period {
            Some(d) => &info.t0 + d + d,
            None => &info.t0 + num::one(),
        };
        let w = self.window(&h);
        (0..w.pts.len() - 1).all(|i| ok(&w.left_at(i), &w.pts[i].value, &w.pts[i].right))
    }

    /// True iff the curve is continuous, finite and all slopes are at most `c`.
    pub fn is_c_lipschitz(&self, c: &Q) -> bool {
        if self.supremum().is_inf() && self.eventual_rate().is_inf() {
            return false;
        }
        if self.pts.iter().any(|p| p.right.is_inf()) {
            return false;
        }
        self.is_continuous() && self.pts.iter().all(|p| &p.slope <= c)
    }

    /// Exact restriction to `[0, h]`.
    pub(crate) fn window(&self, h: &Q) -> Window {
        let mut pts: Vec<Breakpoint> = Vec::new();
        match &self.tail {
            Tail::Affine => {
                pts.extend(self.pts.iter().take_while(|p| &p.x <= h).cloned());
            }
            Tail::Periodic { start, period, increment } => {
                pts.extend(self.pts.iter().take_while(|p| &p.x <= h).cloned());
                let mut k = num::one();
                'outer: loop {
                    let shift = &k * period;
                    let add = &k * increment;
                    for p in &self.pts[*start..] {
                        let x = &p.x + &shift;
                        if &x > h {
                            break 'outer;
                        }
                        pts.push(Breakpoint {
                            x,
                            value: p.value.add_q(&add),
                            right: p.right.add_q(&add),
                            slope: p.slope.clone(),
                        });
                    }
                    k += num::one();
                }
            }
        }
        if &pts.last().unwrap().x < h {
            let i = self.locate(&self.fold(h, false).0);
            pts.push(Breakpoint {
                x: h.clone(),
                value: self.value_at(h),
                right: self.right_limit_at(h),
                slope: self.pts[i].slope.clone(),
            });
        }
        Window { pts }
    }

    /// Rough count of the breakpoints a window to `h` would hold.
    pub(crate) fn window_size_hint(&self, h: &Q) -> usize {
        match &self.tail {
            Tail::Affine => self.pts.len() + 1,
            Tail::Periodic { start, period, .. } => {
                let t0 = &self.pts[*start].x;
                let periods = if h > t0 { num::to_f64(&((h - t0) / period)) } else { 0.0 };
                self.pts.len() + ((periods + 1.0) * (self.pts.len() - start) as f64) as usize
            }
        }
    }

    pub(crate) fn guard_window(&self, h: &Q, op: &str) -> Result<()> {
        let n = self.window_size_hint(h);
        if n > MAX_WINDOW_POINTS {
            Err(CurveError::UnboundedHorizon(format!(
                "{op}: exact evaluation needs about {n} breakpoints up to t={}",
                num::to_f64(h)
            )))
        } else {
            Ok(())
        }
    }

    /// Folds an exact window back into a curve that is periodic from `t0`
    /// with the given period and increment. The window must reach `t0 + d`.
    pub(crate) fn from_window_periodic(w: &Window, t0: &Q, d: &Q, c: &Q) -> Curve {
        let end = t0 + d;
        debug_assert!(w.end() >= &end);
        let mut pts: Vec<Breakpoint> = w.pts.iter().take_while(|p| p.x < end).cloned().collect();
        let start = pts.partition_point(|p| &p.x < t0);
        if start == pts.len() || &pts[start].x != t0 {
            pts.insert(
                start,
                Breakpoint { x: t0.clone(), value: w.eval(t0), right: w.right(t0), slope: w.slope_after(t0) },
            );
        }
        let c = Curve { pts, tail: Tail::Periodic { start, period: d.clone(), increment: c.clone() } };
        c.canonical()
    }

    /// Same curve with the value at the origin replaced (limits untouched).
    pub(crate) fn with_value_at_zero(&self, v: Q) -> Curve {
        let mut c = match &self.tail {
            Tail::Periodic { start: 0, period, increment } => {
                // unroll one period so the origin is not part of the pattern
                let w = self.window(&(period + period));
                let mut pts: Vec<Breakpoint> = w.pts.iter().filter(|p| p.x < period + period).cloned().collect();
                let start = pts.partition_point(|p| &p.x < period);
                if start == pts.len() || &pts[start].x != period {
                    pts.insert(
                        start,
                        Breakpoint { x: period.clone(), value: w.eval(period), right: w.right(period), slope: w.slope_after(period) },
                    );
                }
                Curve { pts, tail: Tail::Periodic { start, period: period.clone(), increment: increment.clone() } }
            }
            _ => self.clone(),
        };
        c.pts[0].value = Ext::Fin(v);
        c.canonical()
    }

    /// True when every value and limit is an integer (piecewise constant).
    pub fn is_integer_valued(&self) -> bool {
        let int = |v: &Ext| matches!(v, Ext::Fin(q) if q.is_integer());
        let inc_ok = match &self.tail {
            Tail::Periodic { increment, .. } => increment.is_integer(),
            Tail::Affine => true,
        };
        inc_ok && self.pts.iter().all(|p| p.slope.is_zero() && int(&p.value) && int(&p.right))
    }

    /// Canonical form: `+inf` regions collapsed into an affine tail, the
    /// periodic start moved as early as possible, degenerate periods turned
    /// into affine tails and redundant breakpoints removed.
    pub(crate) fn canonical(mut self) -> Curve {
        if let Some(j) = self.pts.iter().position(|p| p.right.is_inf() || p.value.is_inf()) {
            self.pts.truncate(j + 1);
            let p = &mut self.pts[j];
            p.right = Ext::Inf;
            p.slope = num::zero();
            self.tail = Tail::Affine;
        }
        self.periodic_to_affine();
        self.shrink_transient();
        self.periodic_to_affine();
        self.drop_redundant();
        self.periodic_to_affine();
        self
    }

    fn periodic_to_affine(&mut self) {
        let Tail::Periodic { start, period, increment } = &self.tail else { return };
        let start = *start;
        if start + 1 != self.pts.len() {
            return;
        }
        let p = &self.pts[start];
        let linear = p.value == p.right && &p.slope * period == *increment;
        if linear {
            self.tail = Tail::Affine;
        }
    }

    fn drop_redundant(&mut self) {
        let start = match &self.tail {
            Tail::Periodic { start, .. } => Some(*start),
            Tail::Affine => None,
        };
        let mut out: Vec<Breakpoint> = Vec::with_capacity(self.pts.len());
        let mut new_start = start;
        for (i, p) in self.pts.iter().enumerate() {
            let protected = i == 0 || Some(i) == start;
            if !protected {
                let prev = out.last().unwrap();
                let left = match &prev.right {
                    Ext::Fin(r) => Ext::Fin(r + &prev.slope * (&p.x - &prev.x)),
                    Ext::Inf => Ext::Inf,
                };
                if left == p.value && p.value == p.right && prev.slope == p.slope {
                    if let (Some(s), Some(ns)) = (start, new_start.as_mut()) {
                        if i < s {
                            *ns -= 1;
                        }
                    }
                    continue;
                }
            }
            out.push(p.clone());
        }
        self.pts = out;
        if let (Tail::Periodic { start, .. }, Some(ns)) = (&mut self.tail, new_start) {
            *start = ns;
        }
    }

    /// Moves the start of the periodic part back while the periodic relation
    /// keeps holding on the transient.
    fn shrink_transient(&mut self) {
        let Tail::Periodic { start, period, increment } = &self.tail else { return };
        let (start, d, c) = (*start, period.clone(), increment.clone());
        if start == 0 {
            return;
        }
        let t0 = self.pts[start].x.clone();
        let w = self.window(&(&t0 + &d));
        let shifted = |x: &Q| x + &d;
        // the relation holds on [lo, inf); extend it one segment at a time
        let mut lo = t0.clone();
        loop {
            let i = w.pts.partition_point(|p| p.x < lo);
            if i == 0 {
                break;
            }
            let cand = num::qmax(&w.pts[i - 1].x, &(&lo - &d));
            let (a, b) = (shifted(&cand), shifted(&lo));
            let between = |lo: &Q, hi: &Q| {
                let s = w.pts.partition_point(|p| &p.x <= lo);
                let e = w.pts.partition_point(|p| &p.x < hi);
                &w.pts[s..e.max(s)]
            };
            let mut xs: Vec<Q> = vec![cand.clone()];
            xs.extend(between(&cand, &lo).iter().map(|p| p.x.clone()));
            xs.extend(between(&a, &b).iter().map(|p| &p.x - &d));
            let ok = xs.iter().all(|x| {
                let y = shifted(x);
                w.eval(x).add_q(&c) == w.eval(&y)
                    && w.right(x).add_q(&c) == w.right(&y)
                    && (x == &cand || w.left(x).add_q(&c) == w.left(&y))
            }) && w.left(&lo).add_q(&c) == w.left(&b);
            if !ok {
                break;
            }
            lo = cand;
        }
        if lo == t0 {
            return;
        }
        let cand = lo;
        let end = &cand + &d;
        let mut pts: Vec<Breakpoint> = w.pts.iter().take_while(|p| p.x < end).cloned().collect();
        let new_start = pts.partition_point(|p| p.x < cand);
        if new_start == pts.len() || pts[new_start].x != cand {
            pts.insert(
                new_start,
                Breakpoint { x: cand.clone(), value: w.eval(&cand), right: w.right(&cand), slope: w.slope_after(&cand) },
            );
        }
        self.pts = pts;
        self.tail = Tail::Periodic { start: new_start, period: d, increment: c };
    }

    /// Semantic equality on the whole half-line.
    pub fn equals(&self, other: &Curve) -> bool {
        if self.pts == other.pts && self.tail == other.tail {
            return true;
        }
        let (a, b) = (self.tail_info(), other.tail_info());
        if a.rate != b.rate {
            return false;
        }
        let d = common_period(&a, &b);
        let h = num::qmax(&a.t0, &b.t0) + &d + &d;
        let (wa, wb) = (self.window(&h), other.window(&h));
        let xs = window::merge_sorted(wa.xs().cloned(), wb.xs().cloned());
        xs.iter().all(|x| wa.eval(x) == wb.eval(x) && wa.right(x) == wb.right(x) && wa.left(x) == wb.left(x))
    }

    /// Pointwise `self <= other` everywhere (values and limits).
    pub fn le(&self, other: &Curve) -> bool {
        let (a, b) = (self.tail_info(), other.tail_info());
        if a.rate > b.rate {
            return false;
        }
        // Past the crossover horizon the eventual rates decide; compare the
        // exact windows up to a horizon where both are periodic and the
        // relation is stable.
        let d = common_period(&a, &b);
        let mut h = num::qmax(&a.t0, &b.t0) + &d + &d;
        if a.rate < b.rate {
            if let (Ext::Fin(ra), Ext::Fin(rb)) = (&a.rate, &b.rate) {
                let (_, hi_a) = self.offset_bounds(&d);
                let (lo_b, _) = other.offset_bounds(&d);
                if let (Ext::Fin(ma), Ext::Fin(mb)) = (hi_a, lo_b) {
                    let tx = (ma - mb) / (rb - ra);
                    h = num::qmax(&h, &(tx + &d));
                }
            }
        }
        let (wa, wb) = (self.window(&h), other.window(&h));
        let xs = window::merge_sorted(wa.xs().cloned(), wb.xs().cloned());
        xs.iter().all(|x| wa.eval(x) <= wb.eval(x) && wa.right(x) <= wb.right(x) && wa.left(x) <= wb.left(x))
    }

    /// `(inf, sup)` of `w(t) - rate * t` over the tail region (limits
    /// included).
    pub(crate) fn offset_bounds(&self, d: &Q) -> (Ext, Ext) {
        let info = self.tail_info();
        let Ext::Fin(rate) = &info.rate else { return (Ext::Inf, Ext::Inf) };
        let h = &info.t0 + d;
        let w = self.window(&h);
        let mut lo: Option<Q> = None;
        let mut hi: Option<Q> = None;
        for (i, p) in w.pts.iter().enumerate() {
            if p.x < info.t0 {
                continue;
            }
            let mut cands = vec![p.value.clone(), p.right.clone()];
            if p.x > info.t0 {
                cands.push(w.left_at(i));
            }
            for v in cands {
                if let Ext::Fin(v) = v {
                    let o = v - rate * &p.x;
                    lo = Some(match lo {
                        Some(l) => num::qmin(&l, &o),
                        None => o.clone(),
                    });
                    hi = Some(match hi {
                        Some(h) => num::qmax(&h, &o),
                        None => o,
                    });
                }
            }
        }
        (
            lo.map(Ext::Fin).unwrap_or(Ext::Inf),
            hi.map(Ext::Fin).unwrap_or(Ext::Inf),
        )
    }
}

/// A period that works for both tails (affine tails accept any period).
pub(crate) fn common_period(a: &TailInfo, b: &TailInfo) -> Q {
    match (&a.period, &b.period) {
        (Some(x), Some(y)) => num::lcm(x, y),
        (Some(x), None) | (None, Some(x)) => x.clone(),
        (None, None) => num::one(),
    }
}

impl PartialEq for Curve {
    fn eq(&self, other: &Curve) -> bool {
        self.equals(other)
    }
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Curve[")?;
        for (i, p) in self.pts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if matches!(self.tail, Tail::Periodic { start, .. } if start == i) {
                write!(f, "| ")?;
            }
            write!(f, "({}: {}, {}+, {}/)", p.x, p.value, p.right, p.slope)?;
        }
        match &self.tail {
            Tail::Affine => write!(f, "]"),
            Tail::Periodic { period, increment, .. } => write!(f, " | period {period} +{increment}]"),
        }
    }
}
