//! Exact scalars, number-theoretic helpers and dyadic enclosures.

pub mod dyadic;
pub mod mult;
pub mod primes;
pub mod rational;

pub use dyadic::{compare_enclosed, log_enclosure, Dyadic, DyadicInterval};
pub use mult::{mult_dependent, solve_mult_relation, SolutionSet};
pub use primes::{factor, is_prime, padic_valuation, FactoredRational, Valuation};
pub use rational::{floor_int, fmt_rational, int, parse_rational, rat, rmax, rmin, rpow, to_decimal, Rational};
