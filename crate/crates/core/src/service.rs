//! Service curves and server descriptions.

use num_traits::{Signed, Zero};

use crate::num::{self, Ext, Q};
use crate::pwfn::{Breakpoint, Curve, CurveError};
use crate::regulation::floor_staircase;

/// `R [t - T]^+`.
pub fn rate_latency(r: &Q, t: &Q) -> Result<Curve, CurveError> {
    if !r.is_positive() || t.is_negative() {
        return Err(CurveError::Invalid(format!("rate-latency needs R > 0 and T >= 0, got R={r}, T={t}")));
    }
    let mut pts = vec![Breakpoint::cont(num::zero(), num::zero(), num::zero())];
    if t.is_zero() {
        pts[0].slope = r.clone();
    } else {
        pts.push(Breakpoint::cont(t.clone(), num::zero(), r.clone()));
    }
    Curve::from_affine(pts)
}

/// 0 on `[0, theta]`, `R t` after: the residual curve of a FIFO rate-`R`
/// server behind a delay `theta`.
pub fn fifo_residual(r: &Q, theta: &Q) -> Result<Curve, CurveError> {
    if !r.is_positive() || theta.is_negative() {
        return Err(CurveError::Invalid(format!("fifo residual needs R > 0 and theta >= 0, got R={r}, theta={theta}")));
    }
    if theta.is_zero() {
        return Ok(Curve::rate(r.clone()));
    }
    Curve::from_affine(vec![
        Breakpoint::cont(num::zero(), num::zero(), num::zero()),
        Breakpoint::new(theta.clone(), num::zero(), r * theta, r.clone()),
    ])
}

/// Deficit round robin over `n` queues with quantum `q`, line rate `c`,
/// granularity `eps` and maximal packet length `lmax`.
pub fn drr(n: u32, q: &Q, c: &Q, eps: &Q, lmax: &Q) -> Result<Curve, CurveError> {
    if n < 2 || !q.is_positive() || !c.is_positive() || !eps.is_positive() || eps > lmax || lmax > q {
        return Err(CurveError::Invalid(format!(
            "DRR needs n >= 2, Q >= Lmax >= eps > 0 and c > 0 (n={n}, Q={q}, Lmax={lmax}, eps={eps}, c={c})"
        )));
    }
    let m = num::int(i64::from(n) - 1);
    // theta(x) = inf_s { x - s + Q floor(s / ((n-1) Q)) }
    let theta = Curve::identity().min_plus_convolve(&floor_staircase(q, &(&m * q)))?;
    let zeta_lat = (&m * (q * num::int(4) - eps) - eps) / c;
    let zeta = rate_latency(c, &num::pos(zeta_lat))?;
    let cap_lat = num::int(2) * &m * (lmax * num::int(2) - eps) / c;
    let cap = rate_latency(c, &cap_lat)?.pointwise_min(&Curve::constant(Ext::Fin(eps.clone())))?;
    theta.compose(&zeta)?.add(&cap)
}

/// A server: its service curve, the line rate `c`, and whether packets leave
/// at line rate (needed by the packetized theorems).
#[derive(Clone, Debug)]
pub struct ServerSpec {
    pub beta: Curve,
    pub line_rate: Q,
    pub transmit_at_line_rate: bool,
}

impl ServerSpec {
    pub fn new(beta: Curve, line_rate: Q, transmit_at_line_rate: bool) -> Result<ServerSpec, CurveError> {
        if !line_rate.is_positive() {
            return Err(CurveError::Invalid(format!("line rate must be positive, got {line_rate}")));
        }
        if !beta.vanishes_at_zero() {
            return Err(CurveError::Invalid("service curve must vanish at 0".into()));
        }
        Ok(ServerSpec { beta, line_rate, transmit_at_line_rate })
    }
}
