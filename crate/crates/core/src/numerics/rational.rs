//! The exact scalar type and its text form.
//!
//! Rationals are written `p/q`, `p`, or as a finite decimal such as `0.125`;
//! a leading `-` (or the Unicode minus sign) negates. Decimals convert
//! exactly. Output always uses the reduced `p/q` form, dropping `/1`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

/// Shorthand constructor used all over the crate and its tests.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (neg, body) = if let Some(rest) = text.strip_prefix('-') {
        (true, rest)
    } else if let Some(rest) = text.strip_prefix('\u{2212}') {
        (true, rest)
    } else if let Some(rest) = text.strip_prefix('+') {
        (false, rest)
    } else {
        (false, text)
    };
    if body.is_empty() {
        return None;
    }
    let value = if let Some((p, q)) = body.split_once('/') {
        let p = parse_digits(p)?;
        let q = parse_digits(q)?;
        if q.is_zero() {
            return None;
        }
        Rational::new(p, q)
    } else if let Some((whole, frac)) = body.split_once('.') {
        if whole.is_empty() && frac.is_empty() {
            return None;
        }
        let whole = if whole.is_empty() { BigInt::zero() } else { parse_digits(whole)? };
        let frac_digits = if frac.is_empty() { BigInt::zero() } else { parse_digits(frac)? };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        Rational::new(whole * &scale + frac_digits, scale)
    } else {
        Rational::from_integer(parse_digits(body)?)
    };
    Some(if neg { -value } else { value })
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

pub fn fmt_rational(x: &Rational) -> String {
    x.to_string()
}

/// Fixed-point decimal rendering with `digits` fractional digits, rounded
/// half away from zero from the exact value.
pub fn to_decimal(x: &Rational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = x.abs() * Rational::from_integer(scale.clone());
    let rounded = (scaled + rat(1, 2)).floor().to_integer();
    let (whole, frac) = rounded.div_rem(&scale);
    let sign = if x.is_negative() && !rounded.is_zero() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{whole}");
    }
    let frac = frac.to_string();
    format!("{sign}{whole}.{}{frac}", "0".repeat(digits - frac.len()))
}

pub fn floor_int(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

pub fn rpow(x: &Rational, n: u64) -> Rational {
    let mut acc = Rational::one();
    let mut base = x.clone();
    let mut n = n;
    while n > 0 {
        if n & 1 == 1 {
            acc *= &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    acc
}

pub fn rmin(a: &Rational, b: &Rational) -> Rational {
    if a <= b { a.clone() } else { b.clone() }
}

pub fn rmax(a: &Rational, b: &Rational) -> Rational {
    if a >= b { a.clone() } else { b.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_literal_forms() {
        assert_eq!(parse_rational("2/4"), Some(rat(1, 2)));
        assert_eq!(parse_rational("-3"), Some(int(-3)));
        assert_eq!(parse_rational("0.5"), Some(rat(1, 2)));
        assert_eq!(parse_rational("\u{2212}0.125"), Some(rat(-1, 8)));
        assert_eq!(parse_rational(".25"), Some(rat(1, 4)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("1e3"), None);
        assert_eq!(parse_rational("-"), None);
    }

    #[test]
    fn formats_reduced() {
        assert_eq!(fmt_rational(&rat(6, 4)), "3/2");
        assert_eq!(fmt_rational(&rat(-4, 2)), "-2");
    }

    #[test]
    fn decimal_rounding() {
        assert_eq!(to_decimal(&rat(2, 3), 4), "0.6667");
        assert_eq!(to_decimal(&rat(-1, 8), 2), "-0.13");
        assert_eq!(to_decimal(&rat(1, 50), 1), "0.0");
        assert_eq!(to_decimal(&rat(7, 2), 0), "4");
    }

    proptest::proptest! {
        #[test]
        fn format_parse_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
            let x = rat(n, d);
            proptest::prop_assert_eq!(parse_rational(&fmt_rational(&x)), Some(x));
        }

        #[test]
        fn decimal_within_half_ulp(n in -10_000i64..10_000, d in 1i64..10_000, digits in 0usize..8) {
            let x = rat(n, d);
            let y = parse_rational(&to_decimal(&x, digits)).unwrap();
            let ulp = Rational::new(BigInt::one(), num_traits::pow(BigInt::from(10), digits));
            proptest::prop_assert!((y - x).abs() * int(2) <= ulp);
        }
    }
}
