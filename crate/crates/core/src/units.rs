//! Decimal units for times, data sizes and rates.
//!
//! Internally: seconds, bits, bits per second. `1 B = 8 bit`, `1 KB = 8000 bit`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::num::{self, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dim {
    Time,
    Data,
    Rate,
    /// Packets per second.
    PacketRate,
    /// Dimensionless (packet counts and such).
    Plain,
}

fn pow10(e: u32) -> Q {
    Q::from_integer(BigInt::from(10).pow(e))
}

fn units(dim: Dim) -> Vec<(&'static str, Q)> {
    let k = |e: u32| pow10(e);
    let inv = |e: u32| Q::one() / pow10(e);
    match dim {
        Dim::Time => vec![("s", Q::one()), ("ms", inv(3)), ("us", inv(6)), ("μs", inv(6)), ("ns", inv(9))],
        Dim::Data => vec![
            ("bit", Q::one()),
            ("bits", Q::one()),
            ("Kbit", k(3)),
            ("Mbit", k(6)),
            ("B", num::int(8)),
            ("KB", num::int(8) * k(3)),
            ("MB", num::int(8) * k(6)),
        ],
        Dim::Rate => vec![("bps", Q::one()), ("Kbps", k(3)), ("Mbps", k(6)), ("Gbps", k(9))],
        Dim::PacketRate => vec![("pps", Q::one())],
        Dim::Plain => vec![],
    }
}

/// Parses `"12.5us"`, `"1.5 KB"`, `"499.92Mbps"`, `"7/3"`. A bare number is
/// taken in base units.
pub fn parse_quantity(s: &str, dim: Dim) -> Result<Q, String> {
    let s = s.trim();
    let bytes: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        let exp = (ch == 'e' || ch == 'E')
            && i > 0
            && bytes.get(i + 1).is_some_and(|n| n.is_ascii_digit() || *n == '-' || *n == '+');
        if ch.is_ascii_digit() || matches!(ch, '.' | '/' | '+' | '-' | ' ') || exp {
            i += 1;
        } else {
            break;
        }
    }
    let num_part: String = bytes[..i].iter().collect();
    let unit: String = bytes[i..].iter().collect();
    let v = num::parse_decimal(num_part.trim()).ok_or_else(|| format!("not a number: {s:?}"))?;
    let unit = unit.trim();
    if unit.is_empty() {
        return Ok(v);
    }
    units(dim)
        .into_iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, f)| v * f)
        .ok_or_else(|| format!("unknown unit {unit:?} for a {} in {s:?}", dim_name(dim)))
}

fn dim_name(dim: Dim) -> &'static str {
    match dim {
        Dim::Time => "time",
        Dim::Data => "data size",
        Dim::Rate => "rate",
        Dim::PacketRate => "packet rate",
        Dim::Plain => "plain number",
    }
}

/// Exact decimal digits needed for `q`, if its expansion terminates.
fn terminating_digits(q: &Q) -> Option<usize> {
    let mut d = q.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut a, mut b) = (0usize, 0usize);
    while (&d % &two).is_zero() {
        d /= &two;
        a += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        b += 1;
    }
    d.is_one().then_some(a.max(b))
}

/// Exact decimal text for `q` if it terminates within 12 digits.
pub fn exact_decimal(q: &Q) -> Option<String> {
    let digits = terminating_digits(q)?;
    (digits <= 12).then(|| num::format_fixed(q, digits))
}

/// Canonical text: the largest unit giving an exact decimal, otherwise a
/// rational in base units. Parsing it back gives the same value.
pub fn format_quantity(q: &Q, dim: Dim) -> String {
    let candidates: Vec<(&str, Q)> = match dim {
        Dim::Time => vec![("s", Q::one()), ("ms", pow10(3)), ("us", pow10(6)), ("ns", pow10(9))],
        Dim::Data => vec![("bit", Q::one())],
        Dim::Rate => vec![("Gbps", Q::one() / pow10(9)), ("Mbps", Q::one() / pow10(6)), ("Kbps", Q::one() / pow10(3)), ("bps", Q::one())],
        Dim::PacketRate => vec![("pps", Q::one())],
        Dim::Plain => vec![("", Q::one())],
    };
    if q.is_zero() {
        return format!("0{}", candidates[0].0);
    }
    let exact = |(u, f): &(&str, Q)| exact_decimal(&(q * f)).map(|t| (t, q * f, u.to_string()));
    let scaled: Vec<_> = candidates.iter().filter_map(exact).collect();
    if let Some((t, _, u)) = scaled.iter().find(|(_, v, _)| v.abs() >= Q::one()).or(scaled.last()) {
        return format!("{t}{u}");
    }
    let base = if dim == Dim::Time { "s" } else { candidates.last().unwrap().0 };
    format!("{q}{base}")
}

/// Output unit for times.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TimeUnit {
    S,
    Ms,
    #[default]
    Us,
}

impl TimeUnit {
    /// Multiplier from seconds.
    pub fn factor(self) -> Q {
        match self {
            TimeUnit::S => Q::one(),
            TimeUnit::Ms => pow10(3),
            TimeUnit::Us => pow10(6),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TimeUnit::S => "s",
            TimeUnit::Ms => "ms",
            TimeUnit::Us => "us",
        }
    }

    /// Value in this unit, 2 decimals.
    pub fn show(self, seconds: &Q) -> String {
        num::format_fixed(&(seconds * self.factor()), 2)
    }
}

impl FromStr for TimeUnit {
    type Err = String;
    fn from_str(s: &str) -> Result<TimeUnit, String> {
        match s {
            "s" => Ok(TimeUnit::S),
            "ms" => Ok(TimeUnit::Ms),
            "us" | "μs" => Ok(TimeUnit::Us),
            _ => Err(format!("unknown time unit {s:?} (expected s, ms or us)")),
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}
