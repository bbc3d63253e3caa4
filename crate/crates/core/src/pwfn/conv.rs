//! Min-plus convolution.
//!
//! Both operands are cut into points and open affine segments. Every pair
//! contributes one elementary piece; the result is their lower envelope.
//! Open pieces only fix the limits of the result, and since the result is
//! nondecreasing its value at `x` is the smaller of the right limit and the
//! best point-to-point sum landing on `x`.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::window::{lower_envelope, merge_sorted, Window};
use super::{Curve, Result};
use crate::num::{self, Ext, Q};

impl Curve {
    /// `(f (x) g)(t) = inf_{0 <= s <= t} f(s) + g(t - s)`.
    pub fn min_plus_convolve(&self, other: &Curve) -> Result<Curve> {
        let (t0, d, c) = conv_horizon(self, other);
        let h = &t0 + &d;
        self.guard_window(&h, "convolution")?;
        other.guard_window(&h, "convolution")?;
        let (fw, gw) = (self.window(&h), other.window(&h));
        let (points, segs_f) = split(&fw);
        let (points_g, segs_g) = split(&gw);

        let mut pieces: Vec<(Q, Q, Q, Q)> = Vec::new();
        let mut push = |from: Q, to: Q, v: Q, s: Q| {
            if from < h {
                let to = if to > h { h.clone() } else { to };
                if from < to {
                    pieces.push((from, to, v, s));
                }
            }
        };
        for (a, v) in &points {
            for (b, b2, w, s) in &segs_g {
                push(a + b, a + b2, v + w, s.clone());
            }
        }
        for (b, v) in &points_g {
            for (a, a2, w, s) in &segs_f {
                push(a + b, a2 + b, v + w, s.clone());
            }
        }
        for (a, a2, u, s1) in &segs_f {
            for (b, b2, w, s2) in &segs_g {
                // the flatter segment is used first
                let ((l1, s1), (l2, s2)) = if s1 <= s2 { ((a2 - a, s1), (b2 - b, s2)) } else { ((b2 - b, s2), (a2 - a, s1)) };
                let start = a + b;
                let mid = &start + &l1;
                let v0 = u + w;
                let vm = &v0 + s1 * &l1;
                push(start, mid.clone(), v0, s1.clone());
                push(mid.clone(), mid + l2, vm, s2.clone());
            }
        }
        let mut pp: BTreeMap<Q, Q> = BTreeMap::new();
        for (a, v) in &points {
            for (b, w) in &points_g {
                let x = a + b;
                if x <= h {
                    let s = v + w;
                    pp.entry(x).and_modify(|e| *e = num::qmin(e, &s)).or_insert(s);
                }
            }
        }
        let env = lower_envelope(&pieces, &h);
        let xs = merge_sorted(env.xs().cloned(), pp.keys().cloned());
        let value = |x: &Q| {
            let r = env.right(x);
            match pp.get(x) {
                Some(v) => r.min(Ext::Fin(v.clone())),
                None => r,
            }
        };
        let w = Window::from_grid(&xs, value, |x| env.left(x), |x| env.right(x));
        Ok(Curve::from_window_periodic(&w, &t0, &d, &c))
    }
}

type Seg = (Q, Q, Q, Q);

/// Finite points `(x, value)` and open segments `(from, to, right value, slope)`.
fn split(w: &Window) -> (Vec<(Q, Q)>, Vec<Seg>) {
    let mut points = Vec::new();
    let mut segs = Vec::new();
    for (i, p) in w.pts.iter().enumerate() {
        if let Ext::Fin(v) = &p.value {
            points.push((p.x.clone(), v.clone()));
        }
        if let (Some(next), Ext::Fin(r)) = (w.pts.get(i + 1), &p.right) {
            segs.push((p.x.clone(), next.x.clone(), r.clone(), p.slope.clone()));
        }
    }
    (points, segs)
}

/// Start, period and increment of the periodic regime of `f (x) g`.
fn conv_horizon(f: &Curve, g: &Curve) -> (Q, Q, Q) {
    let (a, b) = (f.tail_info(), g.tail_info());
    if a.rate == b.rate {
        return match &a.rate {
            Ext::Inf => (&a.t0 + &b.t0, num::one(), num::zero()),
            Ext::Fin(r) => {
                let d = super::common_period(&a, &b);
                (&a.t0 + &b.t0 + &d, d.clone(), r * &d)
            }
        };
    }
    // Past the crossover only a bounded prefix of the faster curve matters,
    // so the slower curve's periodicity carries over.
    let (slow, fast, si, fi) = if a.rate < b.rate { (f, g, &a, &b) } else { (g, f, &b, &a) };
    let d = si.period.clone().unwrap_or_else(num::one);
    let rs = si.rate.unwrap_fin().clone();
    let c = &rs * &d;
    let t0 = match &fi.rate {
        Ext::Inf => &fi.t0 + &si.t0,
        Ext::Fin(rf) => {
            let (_, hi_s) = slow.offset_bounds(&d);
            let df = fi.period.clone().unwrap_or_else(num::one);
            let (lo_f, _) = fast.offset_bounds(&df);
            let hi_s = hi_s.unwrap_fin().clone();
            let lo_f = lo_f.unwrap_fin().clone();
            let f0 = fast.value_at(&Q::zero()).unwrap_fin().clone();
            let lo_s = slow.offset_bounds(&d).0.unwrap_fin().clone();
            let gap = rf - &rs;
            let s_max = num::qmax(&fi.t0, &((&hi_s + &f0 - &lo_s - &lo_f) / &gap));
            let t1 = (&hi_s + &f0 + rf * &si.t0 - &lo_f) / &gap;
            num::qmax(&num::qmax(&t1, &(&s_max + &si.t0)), &(&si.t0 + &fi.t0))
        }
    };
    (t0, d, c)
}
