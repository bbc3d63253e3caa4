//! Composition `f(g(t))` of two nondecreasing curves.

use num_traits::Signed;

use super::window::{merge_sorted, Window};
use super::{Curve, Result};
use crate::num::{self, Ext, Q};

impl Curve {
    /// `t -> self(g(t))`, reading `self(+inf)` as the supremum of `self`.
    pub fn compose(&self, g: &Curve) -> Result<Curve> {
        let fi = self.tail_info();
        let gi = g.tail_info();
        let d_f = fi.period.clone().unwrap_or_else(num::one);
        let c_f = match &fi.rate {
            Ext::Fin(r) => r * &d_f,
            Ext::Inf => num::zero(),
        };
        let (t0, d, c) = match &gi.rate {
            Ext::Fin(r) if r.is_positive() => {
                let (d_g, c_g) = match &gi.period {
                    Some(p) => (p.clone(), r * p),
                    None => (&d_f / r, d_f.clone()),
                };
                // smallest whole number of g-periods that moves g by whole f-periods
                let l = num::lcm(&c_g, &d_f);
                let period = (&l / &c_g) * &d_g;
                let inc = (&l / &d_f) * &c_f;
                let g_t0 = g.value_at(&gi.t0).unwrap_fin().clone();
                let m = num::ceil(&(num::pos(&fi.t0 - g_t0) / &c_g));
                (&gi.t0 + m * &d_g, period, inc)
            }
            _ => (gi.t0.clone(), num::one(), num::zero()),
        };
        let h = &t0 + &d;
        g.guard_window(&h, "compose")?;
        let gw = g.window(&h);
        let ymax = gw
            .pts
            .iter()
            .flat_map(|p| [p.value.clone(), p.right.clone()])
            .filter_map(|v| v.fin().cloned())
            .max()
            .unwrap_or_else(num::zero);
        self.guard_window(&ymax, "compose")?;
        let fb: Vec<Q> = self.window(&ymax).xs().cloned().collect();
        let xs = merge_sorted(gw.xs().cloned(), crossings(&gw, &fb));
        let f_at = |y: &Ext| self.value_at_ext(y);
        let w = Window::from_grid(
            &xs,
            |x| f_at(&gw.eval(x)),
            |x| {
                let i = gw.locate(x);
                let i = if &gw.pts[i].x == x && i > 0 { i - 1 } else { i };
                let y = gw.left(x);
                match &y {
                    Ext::Fin(q) if gw.pts[i].slope.is_positive() => self.left_limit_at(q),
                    _ => f_at(&y),
                }
            },
            |x| {
                let y = gw.right(x);
                match &y {
                    Ext::Fin(q) if gw.slope_after(x).is_positive() => self.right_limit_at(q),
                    Ext::Fin(_) => f_at(&y),
                    Ext::Inf => self.supremum(),
                }
            },
        );
        Ok(Curve::from_window_periodic(&w, &t0, &d, &c))
    }
}

/// Abscissae inside increasing pieces of `g` where `g` hits one of the levels
/// in `levels` (sorted).
fn crossings(gw: &Window, levels: &[Q]) -> Vec<Q> {
    let mut out = Vec::new();
    for i in 0..gw.pts.len().saturating_sub(1) {
        let p = &gw.pts[i];
        let Ext::Fin(r) = &p.right else { continue };
        if !p.slope.is_positive() {
            continue;
        }
        let Ext::Fin(top) = gw.left_at(i + 1) else { continue };
        let lo = levels.partition_point(|y| y <= r);
        let hi = levels.partition_point(|y| y < &top);
        for y in &levels[lo..hi.max(lo)] {
            out.push(&p.x + (y - r) / &p.slope);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, ratio};
    use crate::pwfn::{Breakpoint, Tail};

    #[test]
    fn affine_composition() {
        // f(y) = [y - 2]^+ * 3, g(t) = t / 2
        let f = Curve::from_affine(vec![
            Breakpoint::cont(int(0), int(0), int(0)),
            Breakpoint::cont(int(2), int(0), int(3)),
        ])
        .unwrap();
        let g = Curve::rate(ratio(1, 2));
        let h = f.compose(&g).unwrap();
        assert_eq!(h.eval(&int(4)).unwrap(), Ext::zero());
        assert_eq!(h.eval(&int(6)).unwrap(), Ext::Fin(int(3)));
        assert_eq!(h.eventual_rate(), Ext::Fin(ratio(3, 2)));
    }

    #[test]
    fn staircase_of_rate() {
        // f = ceil(y), g = t / 3: f(g(t)) = ceil(t / 3)
        let f = Curve::new(
            vec![Breakpoint::new(int(0), int(0), int(1), int(0))],
            Tail::Periodic { start: 0, period: int(1), increment: int(1) },
        )
        .unwrap();
        let h = f.compose(&Curve::rate(ratio(1, 3))).unwrap();
        for (t, v) in [(0, 0), (1, 1), (3, 1), (4, 2), (9, 3), (10, 4)] {
            assert_eq!(h.eval(&int(t)).unwrap(), Ext::Fin(int(v)), "t={t}");
        }
    }

    #[test]
    fn infinite_inner_values_map_to_supremum() {
        let f = Curve::step_at_zero(int(7));
        let g = Curve::step_at_zero(int(1)).add(&Curve::from_affine(vec![
            Breakpoint::cont(int(0), int(0), int(0)),
            Breakpoint { x: int(5), value: Ext::zero(), right: Ext::Inf, slope: int(0) },
        ]).unwrap()).unwrap();
        let h = f.compose(&g).unwrap();
        assert_eq!(h.eval(&int(0)).unwrap(), Ext::zero());
        assert_eq!(h.eval(&int(6)).unwrap(), Ext::Fin(int(7)));
    }
}
