//! Lower and upper pseudo-inverses.
//!
//! Plateaus of `w` become jumps of the inverse and jumps become plateaus.
//! The lower inverse is left-continuous, the upper one right-continuous.

use num_traits::{Signed, Zero};

use super::window::Window;
use super::{Breakpoint, Curve, Result, Tail};
use crate::num::{self, Ext, Q};

/// Affine piece of an inverse, valid from level `y0` up to the next piece.
struct Piece {
    y0: Q,
    x0: Q,
    slope: Q,
}

impl Piece {
    fn at(&self, y: &Q) -> Q {
        &self.x0 + &self.slope * (y - &self.y0)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Lower,
    Upper,
}

enum Ending {
    /// The last piece extends to infinity.
    Open,
    /// `+inf` from this level on (strictly above it for the lower inverse).
    Bounded(Q),
    /// Periodic from level `y0`: `(y0, level period, abscissa increment)`.
    Periodic(Q, Q, Q),
}

impl Curve {
    /// `w^down(y) = inf { s >= 0 | w(s) >= y }`.
    pub fn lower_pseudo_inverse(&self) -> Result<Curve> {
        self.pseudo_inverse(Side::Lower)
    }

    /// `w^up(y) = sup { s >= 0 | w(s) <= y }`, taken as 0 below `w(0)` where
    /// the set is empty.
    pub fn upper_pseudo_inverse(&self) -> Result<Curve> {
        self.pseudo_inverse(Side::Upper)
    }

    fn pseudo_inverse(&self, side: Side) -> Result<Curve> {
        let (w, ending, open_end) = match &self.tail {
            Tail::Affine => {
                let last = self.pts.last().unwrap();
                let w = Window { pts: self.pts.clone() };
                match &last.right {
                    Ext::Inf => (w, Ending::Open, false),
                    Ext::Fin(_) if last.slope.is_positive() => (w, Ending::Open, true),
                    Ext::Fin(m) => {
                        let m = m.clone();
                        (w, Ending::Bounded(m), false)
                    }
                }
            }
            Tail::Periodic { start, period, increment } => {
                let t0 = &self.pts[*start].x;
                if increment.is_zero() {
                    let m = self.right_limit_at(t0).unwrap_fin().clone();
                    (self.window(t0), Ending::Bounded(m), false)
                } else {
                    let h = t0 + period * num::int(3);
                    self.guard_window(&h, "pseudo-inverse")?;
                    let y0 = self.value_at(t0).unwrap_fin() + increment;
                    (self.window(&h), Ending::Periodic(y0, increment.clone(), period.clone()), false)
                }
            }
        };
        let pieces = pieces(&w, open_end);
        Ok(assemble(&pieces, ending, side))
    }
}

/// Pieces of the inverse over the levels covered by the window.
fn pieces(w: &Window, open_end: bool) -> Vec<Piece> {
    let mut out: Vec<Piece> = Vec::new();
    let mut push = |y0: &Q, y1: &Ext, x0: &Q, slope: Q| {
        let nonempty = match y1 {
            Ext::Fin(y1) => y1 > y0,
            Ext::Inf => true,
        };
        if nonempty {
            out.push(Piece { y0: y0.clone(), x0: x0.clone(), slope });
        }
    };
    let n = w.pts.len();
    for i in 0..n {
        let p = &w.pts[i];
        let below = if i == 0 { num::zero() } else { w.left_at(i).unwrap_fin().clone() };
        // levels between the left and right limits at x_i map to x_i
        push(&below, &p.right, &p.x, num::zero());
        let Ext::Fin(r) = &p.right else { break };
        if p.slope.is_positive() {
            let above = if i + 1 < n {
                w.left_at(i + 1)
            } else if open_end {
                Ext::Inf
            } else {
                continue;
            };
            push(r, &above, &p.x, num::one() / &p.slope);
        }
    }
    out
}

fn assemble(pieces: &[Piece], ending: Ending, side: Side) -> Curve {
    let mut pts: Vec<Breakpoint> = Vec::with_capacity(pieces.len() + 1);
    for (k, pc) in pieces.iter().enumerate() {
        let value = match side {
            Side::Lower if k == 0 => num::zero(),
            Side::Lower => pieces[k - 1].at(&pc.y0),
            Side::Upper => pc.x0.clone(),
        };
        pts.push(Breakpoint { x: pc.y0.clone(), value: Ext::Fin(value), right: Ext::Fin(pc.x0.clone()), slope: pc.slope.clone() });
    }
    if pts.is_empty() {
        pts.push(Breakpoint::cont(num::zero(), num::zero(), num::zero()));
    }
    match ending {
        Ending::Open => Curve { pts, tail: Tail::Affine }.canonical(),
        Ending::Bounded(m) => {
            let value = match side {
                Side::Lower => match pieces.iter().rposition(|p| p.y0 < m) {
                    Some(j) => Ext::Fin(pieces[j].at(&m)),
                    None => Ext::zero(),
                },
                Side::Upper => Ext::Inf,
            };
            let top = Breakpoint { x: m.clone(), value, right: Ext::Inf, slope: num::zero() };
            if pts.last().unwrap().x == m {
                *pts.last_mut().unwrap() = top;
            } else {
                pts.push(top);
            }
            Curve { pts, tail: Tail::Affine }.canonical()
        }
        Ending::Periodic(y0, c, d) => {
            // The window reaches well past `y0 + c`; close it with a point at
            // the last covered level so that evaluation inside is exact.
            let last = pieces.last().unwrap();
            let end = &y0 + &c;
            let top = num::qmax(&last.y0, &end) + num::one();
            pts.push(Breakpoint::cont(top.clone(), last.at(&top), num::zero()));
            let w = Window { pts };
            let w = w.truncate(&end);
            Curve::from_window_periodic(&w, &y0, &c, &d)
        }
    }
}
