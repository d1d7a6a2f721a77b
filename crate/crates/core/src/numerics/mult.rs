//! Multiplicative relations between positive rationals.
//!
//! Both problems reduce to integer linear algebra on exponent vectors: for
//! every prime `p` that divides any input, `q1^m = q0 * q2^n` forces
//! `m * v_p(q1) = v_p(q0) + n * v_p(q2)`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::primes::{factor, FactoredRational};
use super::rational::Rational;
use crate::error::{Error, Result};

/// Nonnegative integer solutions `(n, m)` of `q1^m = q0 * q2^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolutionSet {
    /// Finitely many pairs, sorted by `n` then `m`.
    Finite(Vec<(u64, u64)>),
    /// `base + k * step` for every `k >= 0`; `step` is nonzero with
    /// nonnegative entries and `base` is the member with smallest `n`.
    Family { base: (u64, u64), step: (u64, u64) },
    /// Every pair solves the relation (all three inputs equal one).
    All,
}

impl SolutionSet {
    pub fn is_empty(&self) -> bool {
        matches!(self, SolutionSet::Finite(v) if v.is_empty())
    }

    pub fn contains(&self, n: u64, m: u64) -> bool {
        match self {
            SolutionSet::Finite(v) => v.contains(&(n, m)),
            SolutionSet::All => true,
            SolutionSet::Family { base, step } => {
                let k = if step.0 != 0 {
                    if n < base.0 || !(n - base.0).is_multiple_of(step.0) {
                        return false;
                    }
                    (n - base.0) / step.0
                } else {
                    if n != base.0 || m < base.1 || !(m - base.1).is_multiple_of(step.1) {
                        return false;
                    }
                    (m - base.1) / step.1
                };
                base.0 + k * step.0 == n && base.1 + k * step.1 == m
            }
        }
    }

    /// The solution with the smallest `n` (ties broken by smallest `m`).
    pub fn min_by_n(&self) -> Option<(u64, u64)> {
        match self {
            SolutionSet::Finite(v) => v.first().copied(),
            SolutionSet::Family { base, .. } => Some(*base),
            SolutionSet::All => Some((0, 0)),
        }
    }
}

fn primes_of(fs: &[&FactoredRational]) -> BTreeSet<BigInt> {
    fs.iter().flat_map(|f| f.exponents.keys().cloned()).collect()
}

fn to_u64(x: &BigInt) -> Result<u64> {
    x.to_u64().ok_or_else(|| Error::ResourceLimit(format!("exponent {x} out of range")))
}

/// Solve `q1^m = q0 * q2^n` over `n, m >= 0`.
pub fn solve_mult_relation(q0: &Rational, q1: &Rational, q2: &Rational) -> Result<SolutionSet> {
    for (name, q) in [("q0", q0), ("q1", q1), ("q2", q2)] {
        if !q.is_positive() {
            return Err(Error::PreconditionViolated(format!("{name} = {q} must be positive")));
        }
    }
    let (f0, f1, f2) = (factor(q0)?, factor(q1)?, factor(q2)?);
    // Rows (a, b, c) encode a*n + b*m = c.
    let rows: Vec<(BigInt, BigInt, BigInt)> = primes_of(&[&f0, &f1, &f2])
        .iter()
        .map(|p| {
            (
                BigInt::from(f2.exponent(p)),
                BigInt::from(-f1.exponent(p)),
                BigInt::from(-f0.exponent(p)),
            )
        })
        .collect();
    solve_rows(&rows)
}

fn solve_rows(rows: &[(BigInt, BigInt, BigInt)]) -> Result<SolutionSet> {
    let empty = Ok(SolutionSet::Finite(Vec::new()));
    let pivot = rows.iter().find(|(a, b, _)| !a.is_zero() || !b.is_zero());
    let Some((a, b, c)) = pivot else {
        return if rows.iter().all(|(_, _, c)| c.is_zero()) { Ok(SolutionSet::All) } else { empty };
    };
    // A second independent row pins the solution down uniquely.
    if let Some((a2, b2, c2)) = rows.iter().find(|(a2, b2, _)| a * b2 - b * a2 != BigInt::zero()) {
        let det = a * b2 - b * a2;
        let n_num = c * b2 - b * c2;
        let m_num = a * c2 - c * a2;
        if !(&n_num % &det).is_zero() || !(&m_num % &det).is_zero() {
            return empty;
        }
        let (n, m) = (n_num / &det, m_num / &det);
        if n.is_negative() || m.is_negative() {
            return empty;
        }
        if rows.iter().any(|(ra, rb, rc)| ra * &n + rb * &m != *rc) {
            return empty;
        }
        return Ok(SolutionSet::Finite(vec![(to_u64(&n)?, to_u64(&m)?)]));
    }
    // Rank one: every row must be a multiple of the pivot, constant included.
    for (ra, rb, rc) in rows {
        let (k_num, k_den) = if !a.is_zero() { (ra, a) } else { (rb, b) };
        if rc * k_den != c * k_num {
            return empty;
        }
    }
    solve_single(a, b, c)
}

/// Nonnegative solutions of a single equation `a*n + b*m = c` with `(a, b) != 0`.
fn solve_single(a: &BigInt, b: &BigInt, c: &BigInt) -> Result<SolutionSet> {
    let empty = Ok(SolutionSet::Finite(Vec::new()));
    if a.is_zero() {
        if !(c % b).is_zero() || (c / b).is_negative() {
            return empty;
        }
        return Ok(SolutionSet::Family { base: (0, to_u64(&(c / b))?), step: (1, 0) });
    }
    if b.is_zero() {
        if !(c % a).is_zero() || (c / a).is_negative() {
            return empty;
        }
        return Ok(SolutionSet::Family { base: (to_u64(&(c / a))?, 0), step: (0, 1) });
    }
    let g = a.gcd(b);
    if !(c % &g).is_zero() {
        return empty;
    }
    let (a, b, c) = (a / &g, b / &g, c / &g);
    // General solution n = n0 + b*k, m = m0 - a*k for a particular (n0, m0).
    let ext = a.extended_gcd(&b);
    let sign = ext.gcd.signum();
    let (n0, m0) = (&ext.x * &c * &sign, &ext.y * &c * &sign);
    if a.signum() != b.signum() {
        // Opposite signs: substituting k' = k * sign(b) both coordinates
        // grow together, n = n0 + |b| k', m = m0 + |a| k'.
        let step_n = b.abs();
        let step_m = a.abs();
        let k_n = ceil_div(&(-&n0), &step_n);
        let k_m = ceil_div(&(-&m0), &step_m);
        let k = k_n.max(k_m);
        let n = &n0 + &step_n * &k;
        let m = &m0 + &step_m * &k;
        debug_assert_eq!(&a * &n + &b * &m, c);
        return Ok(SolutionSet::Family {
            base: (to_u64(&n)?, to_u64(&m)?),
            step: (to_u64(&step_n)?, to_u64(&step_m)?),
        });
    }
    // Same signs: finitely many, enumerate n over its feasible range.
    let (a, b, c) = if a.is_negative() { (-a, -b, -c) } else { (a, b, c) };
    if c.is_negative() {
        return empty;
    }
    let mut out = Vec::new();
    let mut n = BigInt::zero();
    while &a * &n <= c {
        let rest = &c - &a * &n;
        if (&rest % &b).is_zero() {
            out.push((to_u64(&n)?, to_u64(&(rest / &b))?));
        }
        n += 1;
    }
    Ok(SolutionSet::Finite(out))
}

fn ceil_div(x: &BigInt, y: &BigInt) -> BigInt {
    -((-x).div_floor(y))
}

/// Minimal positive `(a, b)` with `q1^a = q2^b`, if the two are
/// multiplicatively dependent.
pub fn mult_dependent(q1: &Rational, q2: &Rational) -> Result<Option<(u64, u64)>> {
    let (f1, f2) = (factor(q1)?, factor(q2)?);
    if f1.sign <= 0 || f2.sign <= 0 {
        return Err(Error::PreconditionViolated("inputs must be positive".into()));
    }
    if f1.exponents.is_empty() || f2.exponents.is_empty() {
        return Ok(if f1.exponents.is_empty() && f2.exponents.is_empty() { Some((1, 1)) } else { None });
    }
    let (p, v1) = f1.exponents.iter().next().map(|(p, v)| (p.clone(), *v)).unwrap();
    let v2 = f2.exponent(&p);
    if v2 == 0 || (v1 > 0) != (v2 > 0) {
        return Ok(None);
    }
    // a * v1 = b * v2 at this prime fixes the ratio a : b = v2 : v1.
    let g = v1.abs().gcd(&v2.abs());
    let (a, b) = ((v2 / g).unsigned_abs(), (v1 / g).unsigned_abs());
    let primes = primes_of(&[&f1, &f2]);
    let consistent = primes
        .iter()
        .all(|p| f1.exponent(p) as i128 * a as i128 == f2.exponent(p) as i128 * b as i128);
    Ok(consistent.then_some((a, b)))
}
