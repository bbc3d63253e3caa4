//! Finite piecewise-affine functions on a closed interval `[0, end]`.
//!
//! Every curve operation works the same way: expand the operands to a window
//! long enough to contain one full period past the point where the result is
//! known to be periodic, compute the result exactly on that window, then fold
//! it back into a [`Curve`](super::Curve).

use num_traits::{Signed, Zero};

use super::Breakpoint;
use crate::num::{Ext, Q};

#[derive(Clone, Debug)]
pub(crate) struct Window {
    /// `pts[0].x == 0`, last point sits at the window end.
    pub pts: Vec<Breakpoint>,
}

impl Window {
    pub fn end(&self) -> &Q {
        &self.pts.last().expect("non-empty window").x
    }

    /// Index of the last breakpoint with `x <= t`.
    pub fn locate(&self, t: &Q) -> usize {
        let i = self.pts.partition_point(|p| &p.x <= t);
        i.saturating_sub(1)
    }

    pub fn seg(&self, i: usize, t: &Q) -> Ext {
        let p = &self.pts[i];
        match &p.right {
            Ext::Fin(r) => Ext::Fin(r + &p.slope * (t - &p.x)),
            Ext::Inf => Ext::Inf,
        }
    }

    pub fn eval(&self, t: &Q) -> Ext {
        let i = self.locate(t);
        if &self.pts[i].x == t {
            self.pts[i].value.clone()
        } else {
            self.seg(i, t)
        }
    }

    pub fn right(&self, t: &Q) -> Ext {
        let i = self.locate(t);
        if &self.pts[i].x == t {
            self.pts[i].right.clone()
        } else {
            self.seg(i, t)
        }
    }

    pub fn left(&self, t: &Q) -> Ext {
        let i = self.locate(t);
        if &self.pts[i].x == t {
            if i == 0 {
                self.pts[0].value.clone()
            } else {
                self.seg(i - 1, t)
            }
        } else {
            self.seg(i, t)
        }
    }

    pub fn left_at(&self, i: usize) -> Ext {
        if i == 0 {
            self.pts[0].value.clone()
        } else {
            self.seg(i - 1, &self.pts[i].x)
        }
    }

    pub fn xs(&self) -> impl Iterator<Item = &Q> {
        self.pts.iter().map(|p| &p.x)
    }

    /// Builds a window from sorted abscissae between which the function is
    /// affine, given exact value / left-limit / right-limit oracles.
    pub fn from_grid(
        xs: &[Q],
        value: impl Fn(&Q) -> Ext,
        left: impl Fn(&Q) -> Ext,
        right: impl Fn(&Q) -> Ext,
    ) -> Window {
        let mut pts = Vec::with_capacity(xs.len());
        for (i, x) in xs.iter().enumerate() {
            let r = right(x);
            let slope = match (xs.get(i + 1), &r) {
                (Some(nx), Ext::Fin(rv)) => match left(nx) {
                    Ext::Fin(lv) => (lv - rv) / (nx - x),
                    Ext::Inf => Q::zero(),
                },
                _ => Q::zero(),
            };
            pts.push(Breakpoint { x: x.clone(), value: value(x), right: r, slope });
        }
        let mut w = Window { pts };
        w.compact();
        w
    }

    /// Drops breakpoints where the function is continuous and the slope does
    /// not change. Keeps the first and last points.
    pub fn compact(&mut self) {
        if self.pts.len() <= 2 {
            return;
        }
        let mut out: Vec<Breakpoint> = Vec::with_capacity(self.pts.len());
        let n = self.pts.len();
        for (i, p) in self.pts.iter().enumerate() {
            if i > 0 && i + 1 < n {
                let prev = out.last().unwrap();
                let left = match &prev.right {
                    Ext::Fin(r) => Ext::Fin(r + &prev.slope * (&p.x - &prev.x)),
                    Ext::Inf => Ext::Inf,
                };
                let cont = left == p.value && p.value == p.right;
                let same = prev.slope == p.slope || p.right.is_inf();
                if cont && same {
                    continue;
                }
            }
            out.push(p.clone());
        }
        self.pts = out;
    }

    /// Restriction to `[0, h]`, `h <= end`.
    pub fn truncate(&self, h: &Q) -> Window {
        let mut pts: Vec<Breakpoint> = self.pts.iter().take_while(|p| &p.x < h).cloned().collect();
        pts.push(Breakpoint {
            x: h.clone(),
            value: self.eval(h),
            right: self.right(h),
            slope: self.slope_after(h),
        });
        Window { pts }
    }

    pub fn slope_after(&self, t: &Q) -> Q {
        self.pts[self.locate(t)].slope.clone()
    }
}

pub(crate) fn merge_sorted(a: impl IntoIterator<Item = Q>, b: impl IntoIterator<Item = Q>) -> Vec<Q> {
    let mut v: Vec<Q> = a.into_iter().chain(b).collect();
    v.sort();
    v.dedup();
    v
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Combine {
    Add,
    Min,
    Max,
}

impl Combine {
    fn apply(self, a: Ext, b: Ext) -> Ext {
        match self {
            Combine::Add => a + b,
            Combine::Min => a.min(b),
            Combine::Max => a.max(b),
        }
    }
}

/// Pointwise combination of two windows over `[0, h]`.
pub(crate) fn combine(a: &Window, b: &Window, h: &Q, op: Combine) -> Window {
    let mut xs = merge_sorted(
        a.xs().filter(|x| *x <= h).cloned(),
        b.xs().filter(|x| *x <= h).cloned().chain(std::iter::once(h.clone())),
    );
    if op != Combine::Add {
        let mut extra = Vec::new();
        for w in xs.windows(2) {
            let (x0, x1) = (&w[0], &w[1]);
            let (ra, rb) = (a.right(x0), b.right(x0));
            let (Ext::Fin(ra), Ext::Fin(rb)) = (ra, rb) else { continue };
            let sa = a.slope_after(x0);
            let sb = b.slope_after(x0);
            if sa != sb {
                let t = x0 + (&rb - &ra) / (&sa - &sb);
                if &t > x0 && &t < x1 {
                    extra.push(t);
                }
            }
        }
        if !extra.is_empty() {
            xs = merge_sorted(xs, extra);
        }
    }
    Window::from_grid(
        &xs,
        |x| op.apply(a.eval(x), b.eval(x)),
        |x| op.apply(a.left(x), b.left(x)),
        |x| op.apply(a.right(x), b.right(x)),
    )
}

/// Lower envelope of a set of closed affine pieces, each given as
/// `(from, to, value_at_from, slope)`, over `[0, h]`. Where no piece is
/// defined the envelope is `+inf`.
pub(crate) fn lower_envelope(pieces: &[(Q, Q, Q, Q)], h: &Q) -> Window {
    if pieces.is_empty() {
        return Window {
            pts: vec![
                Breakpoint { x: Q::zero(), value: Ext::Inf, right: Ext::Inf, slope: Q::zero() },
                Breakpoint { x: h.clone(), value: Ext::Inf, right: Ext::Inf, slope: Q::zero() },
            ],
        };
    }
    // Divide and conquer: min of two envelopes is linear in their sizes.
    fn rec(pieces: &[(Q, Q, Q, Q)], h: &Q) -> Window {
        if pieces.len() == 1 {
            return single(&pieces[0], h);
        }
        let mid = pieces.len() / 2;
        let a = rec(&pieces[..mid], h);
        let b = rec(&pieces[mid..], h);
        combine(&a, &b, h, Combine::Min)
    }
    rec(pieces, h)
}

fn single(p: &(Q, Q, Q, Q), h: &Q) -> Window {
    let (from, to, v, s) = p;
    let mut pts = Vec::with_capacity(4);
    let inf = |x: Q| Breakpoint { x, value: Ext::Inf, right: Ext::Inf, slope: Q::zero() };
    if from.is_positive() {
        pts.push(inf(Q::zero()));
    }
    let at_to = v + s * (to - from);
    if from == to {
        pts.push(Breakpoint { x: from.clone(), value: Ext::Fin(v.clone()), right: Ext::Inf, slope: Q::zero() });
    } else {
        pts.push(Breakpoint { x: from.clone(), value: Ext::Fin(v.clone()), right: Ext::Fin(v.clone()), slope: s.clone() });
        if to < h {
            pts.push(Breakpoint { x: to.clone(), value: Ext::Fin(at_to.clone()), right: Ext::Inf, slope: Q::zero() });
        }
    }
    if pts.last().unwrap().x < *h {
        let last_is_piece_end = to >= h;
        if last_is_piece_end {
            let val = Ext::Fin(v + s * (h - from));
            pts.push(Breakpoint { x: h.clone(), value: val.clone(), right: val, slope: s.clone() });
        } else {
            pts.push(inf(h.clone()));
        }
    }
    Window { pts }
}
