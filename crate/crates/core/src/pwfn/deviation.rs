//! Horizontal deviation between two curves.

use num_traits::{One, Signed};

use super::{Curve, Result, Tail};
use crate::num::{self, Ext, Q};

/// `h(upper, lower) = sup_{t >= 0} lower^down(upper(t)) - t`.
pub fn horizontal_deviation(upper: &Curve, lower: &Curve) -> Result<Ext> {
    deviation(upper, lower, &lower.lower_pseudo_inverse()?)
}

/// Same with the upper pseudo-inverse of `lower`, i.e. the limit of
/// `h(upper - e, lower)` as `e` decreases to 0.
pub fn horizontal_deviation_upper(upper: &Curve, lower: &Curve) -> Result<Ext> {
    deviation(upper, lower, &lower.upper_pseudo_inverse()?)
}

fn deviation(upper: &Curve, lower: &Curve, inv: &Curve) -> Result<Ext> {
    if let Some(h) = horizon(upper, lower) {
        return Ok(sup_minus_identity_until(&inv.compose(&upper.head(&h))?, &h));
    }
    Ok(sup_minus_identity(&inv.compose(upper)?))
}

impl Curve {
    /// Agrees with `self` on `[0, h]` and continues affinely after.
    pub(crate) fn head(&self, h: &Q) -> Curve {
        Curve { pts: self.window(h).pts, tail: Tail::Affine }
    }
}

/// `sup_t sign (w(t) - rate t)` over values and one-sided limits, `sign`
/// being +1 or -1. `None` when some value is infinite.
fn excess(w: &Curve, rate: &Q, sign: i64) -> Option<Q> {
    let s = num::int(sign);
    let mut vals: Vec<(Q, Ext)> = Vec::with_capacity(3 * w.pts.len() + 1);
    for (i, p) in w.pts.iter().enumerate() {
        for v in [w.left_at_index(i), p.value.clone(), p.right.clone()] {
            vals.push((p.x.clone(), v));
        }
    }
    if let Tail::Periodic { start, period, .. } = &w.tail {
        let end = &w.pts[*start].x + period;
        vals.push((end.clone(), w.left_limit_at(&end)));
    }
    let mut best: Option<Q> = None;
    for (x, v) in vals {
        let Ext::Fin(v) = v else { return None };
        let e = &s * (v - rate * x);
        best = Some(match best {
            Some(b) => num::qmax(&b, &e),
            None => e,
        });
    }
    best
}

/// A horizon past which `lower^down(upper(t)) - t` stays below its value at
/// 0, when it is shorter than one period of `upper`. With `upper <= rho t +
/// sigma` and `lower >= r t - kappa`, the difference is at most
/// `max(0, (rho t + sigma + kappa) / r) - t`.
pub(crate) fn horizon(upper: &Curve, lower: &Curve) -> Option<Q> {
    let Tail::Periodic { start, period, .. } = &upper.tail else { return None };
    let (Ext::Fin(rho), Ext::Fin(r)) = (upper.eventual_rate(), lower.eventual_rate()) else { return None };
    if !r.is_positive() || rho >= r {
        return None;
    }
    let sigma = excess(upper, &rho, 1)?;
    let kappa = excess(lower, &r, -1)?;
    let h = num::pos((sigma + kappa) / &r / (num::one() - &rho / &r));
    (h < &upper.pts[*start].x + period).then_some(h)
}

/// `sup_{0 <= t <= h} u(t) - t`, limits included.
fn sup_minus_identity_until(u: &Curve, h: &Q) -> Ext {
    best_over(&u.window(h))
}

/// `sup_t u(t) - t`, limits included.
pub(crate) fn sup_minus_identity(u: &Curve) -> Ext {
    let info = u.tail_info();
    let Ext::Fin(rate) = &info.rate else { return Ext::Inf };
    if rate > &num::one() {
        return Ext::Inf;
    }
    if u.pts.iter().any(|p| p.value.is_inf() || p.right.is_inf()) {
        return Ext::Inf;
    }
    let d = info.period.clone().unwrap_or_else(Q::one);
    best_over(&u.window(&(&info.t0 + &d)))
}

fn best_over(w: &super::window::Window) -> Ext {
    let mut best: Option<Q> = None;
    for (i, p) in w.pts.iter().enumerate() {
        for v in [w.left_at(i), p.value.clone(), p.right.clone()] {
            let Ext::Fin(v) = v else { return Ext::Inf };
            let v = v - &p.x;
            best = Some(match best {
                Some(b) => num::qmax(&b, &v),
                None => v,
            });
        }
    }
    Ext::Fin(best.unwrap())
}
