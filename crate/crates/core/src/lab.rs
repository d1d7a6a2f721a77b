//! Exact simulation and empirical companions to the decision procedures:
//! p-adic certificates of infinite orbits, accumulation histograms, and a
//! bounded search for Lagrange-type witnesses on bijections.

use std::io::Write;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bijection::BijectionParams;
use crate::error::{Error, Result};
use crate::numerics::{int, padic_valuation, to_decimal, Rational, Valuation};
use crate::pam::{OrbitCursor, Pam};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitRecord {
    pub index: u64,
    pub value: Rational,
    pub decimal: String,
    /// 1-based piece containing `value`.
    pub branch: usize,
}

/// Stream `f^0(x0), ..., f^n(x0)` to `emit`.
pub fn simulate_with<F>(f: &Pam, x0: &Rational, n: u64, digits: usize, mut emit: F) -> Result<()>
where
    F: FnMut(OrbitRecord) -> Result<()>,
{
    let mut cur = OrbitCursor::new(f, x0);
    for index in 0..=n {
        let branch = cur.piece()? + 1;
        let value = cur.value();
        let decimal = to_decimal(&value, digits);
        emit(OrbitRecord { index, value, decimal, branch })?;
        if index < n {
            cur.step()?;
        }
    }
    Ok(())
}

pub fn simulate(f: &Pam, x0: &Rational, n: u64, digits: usize) -> Result<Vec<OrbitRecord>> {
    let mut out = Vec::with_capacity(n as usize + 1);
    simulate_with(f, x0, n, digits, |r| {
        out.push(r);
        Ok(())
    })?;
    Ok(out)
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// CSV with header `n,value,decimal,branch`.
pub fn write_orbit_csv<W: Write>(records: &[OrbitRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "value", "decimal", "branch"]).map_err(io_err)?;
    for r in records {
        w.write_record([r.index.to_string(), r.value.to_string(), r.decimal.clone(), r.branch.to_string()])
            .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Proof that an orbit is infinite: from step `n0` on, the p-adic valuation
/// drops by at least one per step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationCertificate {
    pub p: u64,
    /// Each at most -1.
    pub slope_valuations: Vec<i64>,
    pub offset_valuations: Vec<Valuation>,
    pub n0: u64,
    pub v0: i64,
}

impl ValuationCertificate {
    /// `v + v_p(a_i) < v_p(b_i)` for every piece. Valuations only fall, so
    /// once this holds it holds forever.
    pub fn entry_holds(&self, v: i64) -> bool {
        self.slope_valuations
            .iter()
            .zip(&self.offset_valuations)
            .all(|(&a, &b)| Valuation::Finite(v + a) < b)
    }
}

/// p-adic valuations of `f^0(x0), ..., f^n(x0)`.
pub fn valuations(f: &Pam, x0: &Rational, p: u64, n: u64) -> Result<Vec<Valuation>> {
    let p = BigInt::from(p);
    let mut x = x0.clone();
    let mut out = Vec::with_capacity(n as usize + 1);
    for i in 0..=n {
        out.push(padic_valuation(&x, &p)?);
        if i < n {
            x = f.eval(&x)?.0;
        }
    }
    Ok(out)
}

/// Search the first `horizon` steps for a point where the valuation entry
/// condition holds. `None` means no certificate, not a finite orbit.
pub fn valuation_certificate(f: &Pam, x0: &Rational, p: u64, horizon: u64) -> Result<Option<ValuationCertificate>> {
    let pb = BigInt::from(p);
    let mut slope_valuations = Vec::with_capacity(f.len());
    let mut offset_valuations = Vec::with_capacity(f.len());
    for piece in f.pieces() {
        if piece.map.a.is_zero() {
            return Err(Error::PreconditionViolated("valuation certificates need nonzero slopes".into()));
        }
        match padic_valuation(&piece.map.a, &pb)? {
            Valuation::Finite(v) if v <= -1 => slope_valuations.push(v),
            _ => return Ok(None),
        }
        offset_valuations.push(padic_valuation(&piece.map.b, &pb)?);
    }
    let mut cert = ValuationCertificate { p, slope_valuations, offset_valuations, n0: 0, v0: 0 };
    let mut x = x0.clone();
    for n in 0..=horizon {
        if let Valuation::Finite(v) = padic_valuation(&x, &pb)? {
            if cert.entry_holds(v) {
                cert.n0 = n;
                cert.v0 = v;
                return Ok(Some(cert));
            }
        }
        if n < horizon {
            x = match f.eval(&x) {
                Ok((y, _)) => y,
                Err(Error::OutOfCarrier(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccumulationStats {
    pub grid_bits: u32,
    pub points: u64,
    pub lo: Rational,
    pub cell_width: Rational,
    pub counts: Vec<u64>,
    /// `(points seen, cells visited)` at powers of two and at the end.
    pub visited_over_time: Vec<(u64, usize)>,
    /// Cells hit in each quarter of the prefix.
    pub persistent: Vec<usize>,
}

impl AccumulationStats {
    pub fn cell_bounds(&self, k: usize) -> (Rational, Rational) {
        let lo = &self.lo + &self.cell_width * int(k as i64);
        let hi = &lo + &self.cell_width;
        (lo, hi)
    }

    pub fn visited(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn cell_of(&self, x: &Rational) -> usize {
        let k = crate::numerics::floor_int(&((x - &self.lo) / &self.cell_width));
        k.to_usize().unwrap_or(0).min(self.counts.len() - 1)
    }

    /// CSV with header `cell_lo,cell_hi,count`.
    pub fn write_histogram_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["cell_lo", "cell_hi", "count"]).map_err(io_err)?;
        for (k, c) in self.counts.iter().enumerate() {
            let (lo, hi) = self.cell_bounds(k);
            w.write_record([lo.to_string(), hi.to_string(), c.to_string()]).map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    }
}

/// Histogram of the first `n` orbit points over `2^grid_bits` equal cells of
/// the carrier.
pub fn accumulation_stats(f: &Pam, x0: &Rational, n: u64, grid_bits: u32) -> Result<AccumulationStats> {
    if grid_bits > 24 {
        return Err(Error::ResourceLimit(format!("grid of 2^{grid_bits} cells")));
    }
    let cells = 1usize << grid_bits;
    let lo = f.carrier().lo.clone();
    let cell_width = f.carrier().length() / int(cells as i64);
    if !cell_width.is_positive() {
        return Err(Error::PreconditionViolated("carrier is a single point".into()));
    }
    let mut counts = vec![0u64; cells];
    let mut quarters = vec![[false; 4]; cells];
    let mut visited_over_time = Vec::new();
    let mut visited = 0usize;
    let mut cur = OrbitCursor::new(f, x0);
    for i in 0..n {
        let k = cur.floor_scaled(&lo, &cell_width).to_usize().unwrap_or(0).min(cells - 1);
        if counts[k] == 0 {
            visited += 1;
        }
        counts[k] += 1;
        quarters[k][(4 * i / n.max(1)) as usize] = true;
        let seen = i + 1;
        if seen.is_power_of_two() || seen == n {
            visited_over_time.push((seen, visited));
        }
        if seen < n {
            cur.step()?;
        }
    }
    let persistent = if n >= 4 { (0..cells).filter(|&k| quarters[k].iter().all(|&q| q)).collect() } else { Vec::new() };
    Ok(AccumulationStats { grid_bits, points: n, lo, cell_width, counts, visited_over_time, persistent })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeResult {
    pub gamma: Rational,
    pub horizon: u64,
    /// `(n, n f^n(0))` with `n f^n(0) < gamma`.
    pub witness: Option<(u64, Rational)>,
    /// `2 alpha gamma`, reported only with a witness.
    pub lagrange_upper: Option<Rational>,
    /// `(alpha gamma / 2, 2 alpha gamma)`.
    pub sandwich: (Rational, Rational),
}

/// Scan `n = 1..=horizon` for `n f^n(0) < gamma` on the bijection with
/// parameters `(c, d)`. No witness means none within the horizon.
pub fn lagrange_probe(c: &Rational, d: &Rational, gamma: &Rational, horizon: u64) -> Result<ProbeResult> {
    let (zero, one) = (Rational::zero(), Rational::one());
    if !(c > &zero && c < &one && d > &zero && d < &one && c + d < one) {
        return Err(Error::ConstraintViolated(format!("need c, d in (0, 1) with c + d < 1, got {c}, {d}")));
    }
    let params = BijectionParams::from_cd(c.clone(), d.clone())?;
    let f = params.canonical_map();
    let alpha = params.alpha.clone();
    let sandwich = (&alpha * gamma / int(2), &alpha * gamma * int(2));
    let mut cur = OrbitCursor::new(&f, &zero);
    let mut witness = None;
    for n in 1..=horizon {
        cur.step()?;
        let bound = gamma / int(n as i64);
        if cur.compare(&bound).is_lt() {
            witness = Some((n, cur.value() * int(n as i64)));
            break;
        }
    }
    let lagrange_upper = witness.as_ref().map(|_| sandwich.1.clone());
    Ok(ProbeResult { gamma: gamma.clone(), horizon, witness, lagrange_upper, sandwich })
}
