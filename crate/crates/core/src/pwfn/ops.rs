//! Pointwise arithmetic: sums, scaling, constant shifts, min / max, limits.

use num_traits::{Signed, Zero};

use super::window::{combine, Combine, Window};
use super::{common_period, Breakpoint, Curve, CurveError, Result, Tail};
use crate::num::{self, Ext, Q};

impl Curve {
    /// `self + other`.
    pub fn add(&self, other: &Curve) -> Result<Curve> {
        let (a, b) = (self.tail_info(), other.tail_info());
        let d = common_period(&a, &b);
        let t0 = num::qmax(&a.t0, &b.t0);
        let c = match &a.rate + &b.rate {
            Ext::Fin(r) => r * &d,
            Ext::Inf => num::zero(),
        };
        let h = &t0 + &d;
        self.guard_window(&h, "add")?;
        other.guard_window(&h, "add")?;
        let w = combine(&self.window(&h), &other.window(&h), &h, Combine::Add);
        Ok(Curve::from_window_periodic(&w, &t0, &d, &c))
    }

    /// Sum of several curves; the empty sum is the zero curve.
    pub fn sum<'a>(curves: impl IntoIterator<Item = &'a Curve>) -> Result<Curve> {
        let mut acc = Curve::zero();
        for c in curves {
            acc = acc.add(c)?;
        }
        Ok(acc)
    }

    /// `k * self` for `k >= 0`.
    pub fn scale_value(&self, k: &Q) -> Result<Curve> {
        if k.is_negative() {
            return Err(CurveError::Arithmetic(format!("negative scale factor {k}")));
        }
        if k.is_zero() {
            if self.pts.iter().any(|p| p.right.is_inf()) {
                return Err(CurveError::Arithmetic("0 * inf in value scaling".into()));
            }
            return Ok(Curve::zero());
        }
        let pts = self
            .pts
            .iter()
            .map(|p| Breakpoint { x: p.x.clone(), value: &p.value * k, right: &p.right * k, slope: &p.slope * k })
            .collect();
        let tail = match &self.tail {
            Tail::Periodic { start, period, increment } => {
                Tail::Periodic { start: *start, period: period.clone(), increment: increment * k }
            }
            Tail::Affine => Tail::Affine,
        };
        Ok(Curve { pts, tail }.canonical())
    }

    /// `t -> self(t / k)`, a time dilation by `k > 0`.
    pub fn scale_time(&self, k: &Q) -> Result<Curve> {
        if !k.is_positive() {
            return Err(CurveError::Arithmetic(format!("nonpositive time scale {k}")));
        }
        let pts = self
            .pts
            .iter()
            .map(|p| Breakpoint { x: &p.x * k, value: p.value.clone(), right: p.right.clone(), slope: &p.slope / k })
            .collect();
        let tail = match &self.tail {
            Tail::Periodic { start, period, increment } => {
                Tail::Periodic { start: *start, period: period * k, increment: increment.clone() }
            }
            Tail::Affine => Tail::Affine,
        };
        Ok(Curve { pts, tail }.canonical())
    }

    /// `self + v` (every value, including at 0).
    pub fn add_constant(&self, v: &Q) -> Curve {
        self.map_values(|x| x.add_q(v))
    }

    /// `[self - v]^+`.
    pub fn shift_down_clamped(&self, v: &Q) -> Result<Curve> {
        self.map_values(|x| x.sub_q(v)).max_with_zero()
    }

    /// `[self]^+`.
    pub fn max_with_zero(&self) -> Result<Curve> {
        self.pointwise_max(&Curve::zero())
    }

    /// Shifts every finite value by the same amount; no validation, so the
    /// result may be negative (internal use before clamping).
    fn map_values(&self, f: impl Fn(&Ext) -> Ext) -> Curve {
        let pts = self
            .pts
            .iter()
            .map(|p| Breakpoint { x: p.x.clone(), value: f(&p.value), right: f(&p.right), slope: p.slope.clone() })
            .collect();
        Curve { pts, tail: self.tail.clone() }
    }

    pub fn pointwise_min(&self, other: &Curve) -> Result<Curve> {
        self.min_max(other, Combine::Min)
    }

    pub fn pointwise_max(&self, other: &Curve) -> Result<Curve> {
        self.min_max(other, Combine::Max)
    }

    fn min_max(&self, other: &Curve, op: Combine) -> Result<Curve> {
        let (a, b) = (self.tail_info(), other.tail_info());
        let base = num::qmax(&a.t0, &b.t0);
        let (t0, d, c) = if a.rate == b.rate {
            let d = common_period(&a, &b);
            let c = match &a.rate {
                Ext::Fin(r) => r * &d,
                Ext::Inf => num::zero(),
            };
            (base, d, c)
        } else {
            // `lo` has the smaller eventual rate and wins a min; `hi` wins a max.
            let (lo, hi, lo_i, hi_i) = if a.rate < b.rate { (self, other, &a, &b) } else { (other, self, &b, &a) };
            let tx = match (&lo_i.rate, &hi_i.rate) {
                (Ext::Fin(rl), Ext::Fin(rh)) => {
                    let dl = lo_i.period.clone().unwrap_or_else(num::one);
                    let dh = hi_i.period.clone().unwrap_or_else(num::one);
                    let (_, max_lo) = lo.offset_bounds(&dl);
                    let (min_hi, _) = hi.offset_bounds(&dh);
                    match (max_lo, min_hi) {
                        (Ext::Fin(ml), Ext::Fin(mh)) => num::pos((ml - mh) / (rh - rl)),
                        _ => num::zero(),
                    }
                }
                _ => hi_i.t0.clone(),
            };
            let t0 = num::qmax(&base, &tx);
            let winner = if op == Combine::Min { lo_i } else { hi_i };
            let d = winner.period.clone().unwrap_or_else(num::one);
            let c = match &winner.rate {
                Ext::Fin(r) => r * &d,
                Ext::Inf => num::zero(),
            };
            (t0, d, c)
        };
        let h = &t0 + &d;
        self.guard_window(&h, "min/max")?;
        other.guard_window(&h, "min/max")?;
        let w = combine(&self.window(&h), &other.window(&h), &h, op);
        Ok(Curve::from_window_periodic(&w, &t0, &d, &c))
    }

    /// `w(t - e)` for `t >= e`, 0 before.
    pub fn delay_by(&self, e: &Q) -> Result<Curve> {
        if e.is_negative() {
            return Err(CurveError::Arithmetic(format!("negative delay {e}")));
        }
        if e.is_zero() {
            return Ok(self.clone());
        }
        let mut pts = vec![Breakpoint::cont(num::zero(), num::zero(), num::zero())];
        pts.extend(self.pts.iter().map(|p| Breakpoint { x: &p.x + e, ..p.clone() }));
        let tail = match &self.tail {
            Tail::Periodic { start, period, increment } => {
                Tail::Periodic { start: start + 1, period: period.clone(), increment: increment.clone() }
            }
            Tail::Affine => Tail::Affine,
        };
        Curve::new(pts, tail)
    }

    /// `w^+`: right-continuous version.
    pub fn right_limit(&self) -> Curve {
        let pts = self
            .pts
            .iter()
            .map(|p| Breakpoint { x: p.x.clone(), value: p.right.clone(), right: p.right.clone(), slope: p.slope.clone() })
            .collect();
        Curve { pts, tail: self.tail.clone() }.canonical()
    }

    /// `w^-`: left-continuous version, with `w^-(0) = w(0)`.
    pub fn left_limit(&self) -> Curve {
        match &self.tail {
            Tail::Affine => {
                let pts = (0..self.pts.len())
                    .map(|i| {
                        let p = &self.pts[i];
                        Breakpoint { x: p.x.clone(), value: self.left_at_index(i), right: p.right.clone(), slope: p.slope.clone() }
                    })
                    .collect();
                Curve { pts, tail: Tail::Affine }.canonical()
            }
            Tail::Periodic { start, period, increment } => {
                let t1 = &self.pts[*start].x + period;
                let w = self.window(&(&t1 + period));
                let pts = (0..w.pts.len())
                    .map(|i| {
                        let p = &w.pts[i];
                        Breakpoint { x: p.x.clone(), value: w.left_at(i), right: p.right.clone(), slope: p.slope.clone() }
                    })
                    .collect();
                Curve::from_window_periodic(&Window { pts }, &t1, period, increment)
            }
        }
    }
}
