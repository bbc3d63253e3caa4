//! Exact rational numbers and the extended value line `[0, +inf]`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational. Every time, bit count and rate is one of these.
pub type Q = BigRational;

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

pub fn floor(x: &Q) -> Q {
    x.floor()
}

pub fn ceil(x: &Q) -> Q {
    x.ceil()
}

pub fn qmin(a: &Q, b: &Q) -> Q {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn qmax(a: &Q, b: &Q) -> Q {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// `[x]^+`
pub fn pos(x: Q) -> Q {
    if x.is_negative() {
        Q::zero()
    } else {
        x
    }
}

/// Least common multiple of two positive rationals: the smallest positive
/// rational that is an integer multiple of both.
pub fn lcm(a: &Q, b: &Q) -> Q {
    debug_assert!(a.is_positive() && b.is_positive());
    let num = a.numer().lcm(b.numer());
    let den = a.denom().gcd(b.denom());
    Q::new(num, den)
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Best rational for a decimal literal such as `"499.92"` or `"1e9"`.
pub fn parse_decimal(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (ip, fp) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{ip}{fp}");
    let mut v = Q::from_integer(BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?);
    let scale = exp - fp.len() as i32;
    let ten = Q::from_integer(BigInt::from(10));
    if scale >= 0 {
        v *= num_traits::pow(ten, scale as usize);
    } else {
        v /= num_traits::pow(ten, (-scale) as usize);
    }
    Some(if neg { -v } else { v })
}

/// Decimal rendering rounded half away from zero.
pub fn format_fixed(x: &Q, digits: usize) -> String {
    let scale = BigInt::from(10).pow(digits as u32);
    let scaled = x * Q::from_integer(scale.clone());
    let r = scaled.abs().round();
    let n = r.to_integer();
    let (ip, fp) = n.div_rem(&scale);
    let sign = if x.is_negative() && !n.is_zero() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{ip}");
    }
    format!("{sign}{ip}.{:0>width$}", fp.to_string(), width = digits)
}

/// A value in `[0, +inf]` (finite values may also be negative inside
/// intermediate computations).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ext {
    Fin(Q),
    Inf,
}

impl Ext {
    pub fn zero() -> Ext {
        Ext::Fin(Q::zero())
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Ext::Inf)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Ext::Fin(_))
    }

    pub fn fin(&self) -> Option<&Q> {
        match self {
            Ext::Fin(q) => Some(q),
            Ext::Inf => None,
        }
    }

    /// Finite value; panics on `Inf`. Only for call sites that already
    /// established finiteness.
    pub fn unwrap_fin(&self) -> &Q {
        self.fin().expect("finite value expected")
    }

    pub fn add_q(&self, q: &Q) -> Ext {
        match self {
            Ext::Fin(v) => Ext::Fin(v + q),
            Ext::Inf => Ext::Inf,
        }
    }

    pub fn sub_q(&self, q: &Q) -> Ext {
        match self {
            Ext::Fin(v) => Ext::Fin(v - q),
            Ext::Inf => Ext::Inf,
        }
    }

    pub fn min(self, other: Ext) -> Ext {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Ext) -> Ext {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Ext::Fin(q) => to_f64(q),
            Ext::Inf => f64::INFINITY,
        }
    }
}

impl From<Q> for Ext {
    fn from(q: Q) -> Ext {
        Ext::Fin(q)
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ext {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Ext::Fin(a), Ext::Fin(b)) => a.cmp(b),
            (Ext::Fin(_), Ext::Inf) => Ordering::Less,
            (Ext::Inf, Ext::Fin(_)) => Ordering::Greater,
            (Ext::Inf, Ext::Inf) => Ordering::Equal,
        }
    }
}

impl Add for &Ext {
    type Output = Ext;
    fn add(self, rhs: &Ext) -> Ext {
        match (self, rhs) {
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a + b),
            _ => Ext::Inf,
        }
    }
}

impl Add for Ext {
    type Output = Ext;
    fn add(self, rhs: Ext) -> Ext {
        &self + &rhs
    }
}

impl Mul<&Q> for &Ext {
    type Output = Ext;
    /// Scaling by a nonnegative factor; `0 * inf` is `inf` here, callers that
    /// care reject it beforehand.
    fn mul(self, rhs: &Q) -> Ext {
        match self {
            Ext::Fin(a) => Ext::Fin(a * rhs),
            Ext::Inf => Ext::Inf,
        }
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Fin(q) => write!(f, "{q}"),
            Ext::Inf => write!(f, "inf"),
        }
    }
}
