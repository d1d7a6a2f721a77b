//! Primality, factorization and p-adic valuations of rationals.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::rational::Rational;
use crate::error::{Error, Result};

/// Trial division bound used by [`factor`].
pub const DEFAULT_TRIAL_BOUND: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredRational {
    pub sign: i8,
    pub exponents: BTreeMap<BigInt, i64>,
}

impl FactoredRational {
    pub fn reconstruct(&self) -> Rational {
        if self.sign == 0 {
            return Rational::zero();
        }
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (p, &e) in &self.exponents {
            let pw = num_traits::pow(p.clone(), e.unsigned_abs() as usize);
            if e > 0 {
                num *= pw;
            } else {
                den *= pw;
            }
        }
        let r = Rational::new(num, den);
        if self.sign < 0 { -r } else { r }
    }

    pub fn exponent(&self, p: &BigInt) -> i64 {
        self.exponents.get(p).copied().unwrap_or(0)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; these bases are exact for all 64-bit inputs.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn is_prime(n: &BigInt) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_negative() {
        return false;
    }
    // Beyond 64 bits fall back to trial division up to the square root.
    let two = BigInt::from(2);
    if n.is_even() {
        return false;
    }
    let mut d = BigInt::from(3);
    while &d * &d <= *n {
        if (n % &d).is_zero() {
            return false;
        }
        d += &two;
    }
    true
}

fn valuation_int(n: &BigInt, p: &BigInt) -> i64 {
    let mut n = n.abs();
    let mut v = 0;
    while !n.is_zero() && (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    v
}

pub fn padic_valuation(x: &Rational, p: &BigInt) -> Result<Valuation> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p.to_string()));
    }
    if x.is_zero() {
        return Ok(Valuation::Infinite);
    }
    Ok(Valuation::Finite(valuation_int(x.numer(), p) - valuation_int(x.denom(), p)))
}

fn factor_int(n: &BigInt, bound: u64, out: &mut BTreeMap<BigInt, i64>, sign: i64) -> Result<()> {
    let mut n = n.abs();
    let mut d = 2u64;
    while n > BigInt::one() && d <= bound {
        let bd = BigInt::from(d);
        if &bd * &bd > n {
            break;
        }
        let mut e = 0;
        while (&n % &bd).is_zero() {
            n /= &bd;
            e += 1;
        }
        if e > 0 {
            *out.entry(bd).or_insert(0) += sign * e;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > BigInt::one() {
        let bd = BigInt::from(d);
        if &bd * &bd > n || (n.to_u64().is_some() && is_prime(&n)) {
            *out.entry(n).or_insert(0) += sign;
        } else {
            return Err(Error::ResourceLimit(format!("cofactor {n} has no prime factor below {bound}")));
        }
    }
    Ok(())
}

pub fn factor(x: &Rational) -> Result<FactoredRational> {
    factor_with_bound(x, DEFAULT_TRIAL_BOUND)
}

pub fn factor_with_bound(x: &Rational, bound: u64) -> Result<FactoredRational> {
    if x.is_zero() {
        return Ok(FactoredRational { sign: 0, exponents: BTreeMap::new() });
    }
    let mut exponents = BTreeMap::new();
    factor_int(x.numer(), bound, &mut exponents, 1)?;
    factor_int(x.denom(), bound, &mut exponents, -1)?;
    exponents.retain(|_, e| *e != 0);
    Ok(FactoredRational { sign: if x.is_negative() { -1 } else { 1 }, exponents })
}
