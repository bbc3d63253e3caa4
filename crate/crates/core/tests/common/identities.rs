//! Pseudo-inverse identities on one random instance. Each check returns the
//! list of violations found, empty when everything holds.

use num_traits::Zero;

use tsn_delay::num::{int, Ext, Q};
use tsn_delay::pwfn::{horizontal_deviation, Curve};

use super::{Cont, CurveOpts, Gen};

const EXTRA: usize = 50;

fn fmt(e: &Ext) -> String {
    e.to_string()
}

/// `a` and `b` agree in value and right limit at every point. Values at 0
/// are skipped when `skip_zero`, for identities involving a left limit.
fn same(tag: &str, a: &Curve, b: &Curve, pts: &[Q], skip_zero: bool, out: &mut Vec<String>) {
    for p in pts {
        if !(skip_zero && p.is_zero()) {
            let (u, v) = (a.eval(p).unwrap(), b.eval(p).unwrap());
            if u != v {
                out.push(format!("{tag}: at {p}: {} != {}", fmt(&u), fmt(&v)));
            }
        }
        let (u, v) = (a.eval_right(p).unwrap(), b.eval_right(p).unwrap());
        if u != v {
            out.push(format!("{tag}: right of {p}: {} != {}", fmt(&u), fmt(&v)));
        }
    }
}

fn levels(g: &mut Gen, f: &Curve) -> Vec<Q> {
    g.sample_y(f, EXTRA)
}

/// Limits and pseudo-inverses commute the expected way.
pub fn limits(g: &mut Gen) -> Vec<String> {
    let mut out = Vec::new();
    let f = g.curve(&CurveOpts::any());
    let ys = levels(g, &f);
    let lo = f.lower_pseudo_inverse().unwrap();
    let up = f.upper_pseudo_inverse().unwrap();
    same("(f+)down = fdown", &f.right_limit().lower_pseudo_inverse().unwrap(), &lo, &ys, false, &mut out);
    same("(fdown)+ = fup", &lo.right_limit(), &up, &ys, false, &mut out);
    same("(fup)- = fdown", &up.left_limit(), &lo, &ys, true, &mut out);
    same("(f-)up = fup", &f.left_limit().upper_pseudo_inverse().unwrap(), &up, &ys, false, &mut out);
    out
}

/// `f(x) <= y => x <= fup(y)` and `f(x) >= y => x >= fdown(y)` on every sampled pair.
pub fn implications(g: &mut Gen) -> Vec<String> {
    let mut out = Vec::new();
    let f = g.curve(&CurveOpts::any());
    let xs = g.sample_x(&f, EXTRA);
    let mut ys = levels(g, &f);
    ys.truncate(60);
    let lo = f.lower_pseudo_inverse().unwrap();
    let up = f.upper_pseudo_inverse().unwrap();
    for x in &xs {
        let fx = f.eval(x).unwrap();
        let mut cand = ys.clone();
        if let Ext::Fin(v) = &fx {
            cand.push(v.clone());
        }
        for y in &cand {
            let y_ext = Ext::Fin(y.clone());
            let xe = Ext::Fin(x.clone());
            if fx <= y_ext && xe > up.eval(y).unwrap() {
                out.push(format!("f(x) <= y => x <= fup(y): x={x} y={y}"));
            }
            if fx >= y_ext && xe < lo.eval(y).unwrap() {
                out.push(format!("f(x) >= y => x >= fdown(y): x={x} y={y}"));
            }
        }
    }
    out
}

/// `f = (fdown)up` and `(f o w)down = wdown o fdown` for right-continuous
/// `f`, and the left-continuous mirror `((f down) up)- = f`.
pub fn round_trips(g: &mut Gen) -> Vec<String> {
    let mut out = Vec::new();
    let f = g.curve(&CurveOpts::cont(Cont::Right));
    let xs = g.sample_x(&f, EXTRA);
    let back = f.lower_pseudo_inverse().unwrap().upper_pseudo_inverse().unwrap();
    same("f = (fdown)up", &back, &f, &xs, false, &mut out);

    let w = g.curve(&CurveOpts::any());
    let fw = f.compose(&w).unwrap();
    let lhs = fw.lower_pseudo_inverse().unwrap();
    let rhs = w.lower_pseudo_inverse().unwrap().compose(&f.lower_pseudo_inverse().unwrap()).unwrap();
    let ys = levels(g, &fw);
    same("(f o w)down = wdown o fdown", &lhs, &rhs, &ys, false, &mut out);

    let fl = g.curve(&CurveOpts::cont(Cont::Left));
    let xs = g.sample_x(&fl, EXTRA);
    let back = fl.lower_pseudo_inverse().unwrap().upper_pseudo_inverse().unwrap().left_limit();
    same("((fdown)up)- = f", &back, &fl, &xs, true, &mut out);
    out
}

/// c-Lipschitz `f`: `fdown(y') - fdown(y) >= (y' - y) / c`.
pub fn lipschitz_inverse(g: &mut Gen) -> Vec<String> {
    let mut out = Vec::new();
    let c = g.q(1, 12, 2);
    let f = g.curve(&CurveOpts { lipschitz: Some(c.clone()), ..CurveOpts::any() });
    if !f.is_c_lipschitz(&c) {
        out.push(format!("generator produced a curve that is not {c}-Lipschitz"));
    }
    let lo = f.lower_pseudo_inverse().unwrap();
    let ys = levels(g, &f);
    for (i, y) in ys.iter().enumerate() {
        let Ext::Fin(a) = lo.eval(y).unwrap() else { continue };
        for y2 in &ys[i..] {
            let ok = match lo.eval(y2).unwrap() {
                Ext::Inf => true,
                Ext::Fin(b) => b - &a >= (y2 - y) / &c,
            };
            if !ok {
                out.push(format!("Lipschitz inverse gap: c={c} y={y} y'={y2}"));
            }
        }
    }
    out
}

/// `f (x) g` stays L-Lipschitz when `f` is and `g >= 0`.
pub fn lipschitz_convolution(g: &mut Gen) -> Vec<String> {
    let l = g.q(1, 12, 2);
    let f = g.curve(&CurveOpts { lipschitz: Some(l.clone()), ..CurveOpts::any() });
    let other = g.curve(&CurveOpts::any());
    let z = other.min_plus_convolve(&f).unwrap();
    if z.is_c_lipschitz(&l) {
        Vec::new()
    } else {
        vec![format!("convolution with a {l}-Lipschitz curve is not {l}-Lipschitz")]
    }
}

/// `h(f_eps + g, beta) >= h(f + g, beta) - eps`.
pub fn shift(g: &mut Gen) -> Vec<String> {
    let f = g.curve(&CurveOpts::any());
    let other = g.curve(&CurveOpts::any());
    let beta = g.curve(&CurveOpts { unbounded: true, ..CurveOpts::any() }).scale_value(&int(4)).unwrap();
    let eps = g.q(1, 16, 8);
    let base = horizontal_deviation(&f.add(&other).unwrap(), &beta).unwrap();
    let shifted = horizontal_deviation(&f.delay_by(&eps).unwrap().add(&other).unwrap(), &beta).unwrap();
    if shifted >= base.sub_q(&eps) {
        Vec::new()
    } else {
        vec![format!("h shift: {shifted} < {base} - {eps}")]
    }
}

/// The whole suite on one seed.
pub fn suite(seed: u64) -> Vec<String> {
    let mut g = Gen::new(seed);
    let mut out = Vec::new();
    out.extend(limits(&mut g));
    out.extend(implications(&mut g));
    out.extend(round_trips(&mut g));
    out.extend(lipschitz_inverse(&mut g));
    out.extend(lipschitz_convolution(&mut g));
    out.extend(shift(&mut g));
    out
}
