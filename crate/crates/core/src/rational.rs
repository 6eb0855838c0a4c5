//! Exact rational inputs.
//!
//! Numeric configuration fields accept `p/q` fractions as well as finite
//! decimals such as `-0.25` or `1e-3`. Both become an exact `Ratio<i64>`.

use num_rational::Ratio;
use num_traits::{CheckedMul, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Parses `p`, `p/q`, or a finite decimal with optional exponent.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Rational(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: i64 = parse_int(num.trim()).ok_or_else(bad)?;
        let d: i64 = parse_int(den.trim()).ok_or_else(bad)?;
        if d == 0 || n == i64::MIN || d == i64::MIN {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    parse_decimal(s).ok_or_else(bad)
}

fn parse_int(s: &str) -> Option<i64> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], parse_int(&s[i + 1..])?),
        None => (s, 0),
    };
    let (negative, unsigned) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = unsigned.split_once('.').unwrap_or((unsigned, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut numer: i64 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        numer = numer.checked_mul(10)?.checked_add(i64::from(b - b'0'))?;
    }
    let scale = exponent.checked_sub(i64::try_from(frac_part.len()).ok()?)?;
    if scale.unsigned_abs() > 18 {
        // Only representable if the mantissa is zero.
        return (numer == 0).then(Rational::zero);
    }
    let pow = 10i64.checked_pow(scale.unsigned_abs() as u32)?;
    let value = if scale >= 0 { Ratio::from_integer(numer.checked_mul(pow)?) } else { Ratio::new(numer, pow) };
    Some(if negative { -value } else { value })
}

/// Least common multiple of the denominators, or `None` on overflow.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Option<i64> {
    let mut acc: i64 = 1;
    for v in values {
        let d = *v.denom();
        let g = gcd(acc, d);
        acc = (acc / g).checked_mul(d)?;
    }
    Some(acc)
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

/// `value * scale` as an integer, if exact and in range.
pub fn scaled_integer(value: &Rational, scale: i64) -> Option<i64> {
    let scaled = value.checked_mul(&Ratio::from_integer(scale))?;
    scaled.is_integer().then(|| scaled.to_integer())
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Canonical text form: `p` or `p/q`.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}
