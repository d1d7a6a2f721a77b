//! Injective, positive-slope, non-surjective two-piece maps.
//!
//! Such a map has a unique attracting cycle. The cycle is located from the
//! itinerary of an approximate orbit and then verified exactly. Decisions
//! rest on exact interval images: a part of an orbit of sets is retired once
//! it and its next `q - 1` images each sit in a contracting piece of `f^q`
//! whose fixed point bounds it, after which every later visit is given by an
//! affine closed form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::decision::{Decision, StepKind};
use crate::error::{Error, Result};
use crate::numerics::{rpow, DyadicInterval, Rational};
use crate::pam::{AffineMap, Interval, IntervalSet, OrbitCursor, Pam, Piece};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapParams {
    pub lambda: Rational,
    pub mu: Rational,
    pub delta: Rational,
    /// `(1 - delta) / lambda`.
    pub c: Rational,
    pub d_bound: Rational,
}

impl fmt::Display for GapParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lambda = {}, mu = {}, delta = {}, c = {}", self.lambda, self.mu, self.delta, self.c)
    }
}

impl GapParams {
    pub fn new(lambda: Rational, mu: Rational, delta: Rational) -> Result<GapParams> {
        let one = Rational::one();
        if !(lambda.is_positive() && lambda < one) || !mu.is_positive() {
            return Err(Error::ConstraintViolated(format!("need 0 < lambda < 1 and mu > 0, got {lambda}, {mu}")));
        }
        let d_bound = if &lambda * &mu < one { one.clone() } else { (&mu - &lambda * &mu) / (&mu - &one) };
        if !(&one - &lambda < delta && delta < d_bound) {
            return Err(Error::ConstraintViolated(format!(
                "need {} < delta < {d_bound}, got delta = {delta}",
                &one - &lambda
            )));
        }
        let c = (&one - &delta) / &lambda;
        Ok(GapParams { lambda, mu, delta, c, d_bound })
    }

    /// `lambda x + delta` on `[0, c)` and `mu (lambda x + delta - 1)` on `[c, 1)`.
    pub fn canonical_map(&self) -> Pam {
        let a2 = &self.lambda * &self.mu;
        let b2 = &self.mu * (&self.delta - Rational::one());
        Pam::two_piece(self.c.clone(), (self.lambda.clone(), self.delta.clone()), (a2, b2)).expect("valid gap map")
    }

    /// `lambda^q mu^p`.
    pub fn contraction(&self, p: u64, q: u64) -> Rational {
        rpow(&self.lambda, q) * rpow(&self.mu, p)
    }

    /// `p / q` is at most the rotation bound: trivially when `lambda mu < 1`,
    /// otherwise `p ln mu <= q ln(1/lambda)`, i.e. `lambda^q mu^p <= 1`.
    pub fn within_rotation_bound(&self, p: u64, q: u64) -> bool {
        if &self.lambda * &self.mu < Rational::one() {
            p <= q
        } else {
            self.contraction(p, q) <= Rational::one()
        }
    }
}

/// Normalized parameters and the affine change of coordinates into them.
///
/// The parameters describe the map up to which piece owns the cut point;
/// decisions always run on the given map itself.
pub fn to_gap_params(f: &Pam) -> Result<(GapParams, AffineMap)> {
    if f.len() != 2 {
        return Err(Error::PreconditionViolated("gap maps have two pieces".into()));
    }
    let (g, h) = f.rescale_to_unit()?;
    let mut h = h.forward;
    let mut pieces: Vec<AffineMap> = g.pieces().iter().map(|p| p.map.clone()).collect();
    let mut cut = g.piece(0).domain.hi.clone();
    if pieces[0].a >= Rational::one() {
        // Mirror: y = 1 - x swaps the pieces.
        let m = AffineMap::new(-Rational::one(), Rational::one());
        let conj = |a: &AffineMap| m.after(&a.after(&m));
        pieces = vec![conj(&pieces[1]), conj(&pieces[0])];
        cut = Rational::one() - cut;
        h = m.after(&h);
    }
    let lambda = pieces[0].a.clone();
    let delta = pieces[0].b.clone();
    if pieces[1].a <= Rational::zero() || lambda <= Rational::zero() {
        return Err(Error::PreconditionViolated("gap maps have positive slopes".into()));
    }
    let mu = &pieces[1].a / &lambda;
    let params = GapParams::new(lambda, mu, delta)?;
    let expected_b2 = &params.mu * (&params.delta - Rational::one());
    if params.c != cut || pieces[1].b != expected_b2 {
        return Err(Error::PreconditionViolated("images do not touch both ends of the carrier".into()));
    }
    Ok((params, h))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleInfo {
    pub p: u64,
    pub q: u64,
    /// Orbit order, starting from the smallest point.
    pub points: Vec<Rational>,
    /// 1-based piece index per point.
    pub word: Vec<u8>,
    pub contraction: Rational,
}

impl fmt::Display for CycleInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self.points.iter().map(|x| x.to_string()).collect();
        let word: String = self.word.iter().map(|w| char::from(b'0' + w)).collect();
        write!(
            f,
            "rotation {}/{}, cycle {{{}}}, word {word}, contraction {}",
            self.p,
            self.q,
            pts.join(", "),
            self.contraction
        )
    }
}

impl CycleInfo {
    pub fn contains(&self, x: &Rational) -> bool {
        self.points.contains(x)
    }

    pub fn index_of(&self, x: &Rational) -> Option<usize> {
        self.points.iter().position(|c| c == x)
    }
}

const FIXED_BITS: u64 = 256;

/// Fixed-point evaluation with `FIXED_BITS` fractional bits.
struct Approx {
    cuts: Vec<(BigInt, BigInt)>,
    maps: Vec<(BigInt, BigInt, BigInt, BigInt)>,
}

impl Approx {
    fn new(f: &Pam) -> Approx {
        let cuts = f.pieces().iter().skip(1).map(|p| (p.domain.lo.numer().clone(), p.domain.lo.denom().clone())).collect();
        let maps = f
            .pieces()
            .iter()
            .map(|p| (p.map.a.numer().clone(), p.map.a.denom().clone(), p.map.b.numer().clone(), p.map.b.denom().clone()))
            .collect();
        Approx { cuts, maps }
    }

    fn piece(&self, m: &BigInt) -> usize {
        // m / 2^B >= num / den  iff  m den >= num 2^B.
        self.cuts.iter().take_while(|(n, d)| m * d >= (n << FIXED_BITS)).count()
    }

    fn step(&self, m: &BigInt) -> (BigInt, usize) {
        let k = self.piece(m);
        let (an, ad, bn, bd) = &self.maps[k];
        let num = an * m * bd + ((bn * ad) << FIXED_BITS);
        (num.div_floor(&(ad * bd)), k)
    }

    fn encode(x: &Rational) -> BigInt {
        (x.numer() << FIXED_BITS).div_floor(x.denom())
    }
}

fn minimal_period(tail: &[usize]) -> Option<usize> {
    (1..=tail.len() / 3).find(|&q| (q..tail.len()).all(|i| tail[i] == tail[i - q]))
}

/// Exact orbit of `x` if it returns to `x` within `limit` steps.
fn exact_cycle_through(f: &Pam, x: &Rational, limit: usize) -> Result<Option<Vec<Rational>>> {
    let mut cur = OrbitCursor::new(f, x);
    for len in 1..=limit {
        cur.step()?;
        if cur.equals(x) {
            let mut orbit = vec![x.clone()];
            for _ in 1..len {
                orbit.push(f.eval(orbit.last().unwrap())?.0);
            }
            return Ok(Some(orbit));
        }
    }
    Ok(None)
}

fn cycle_info(f: &Pam, orbit: Vec<Rational>) -> Result<CycleInfo> {
    let start = orbit.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
    let q = orbit.len();
    let points: Vec<Rational> = (0..q).map(|i| orbit[(start + i) % q].clone()).collect();
    let mut word = Vec::with_capacity(q);
    let mut contraction = Rational::one();
    for x in &points {
        let k = f.piece_index(x)?;
        word.push((k + 1) as u8);
        contraction *= &f.piece(k).map.a;
    }
    let p = word.iter().filter(|&&w| w >= 2).count() as u64;
    Ok(CycleInfo { p, q: q as u64, points, word, contraction })
}

/// Locate and verify the attracting cycle of `f`.
pub fn find_cycle(f: &Pam) -> Result<CycleInfo> {
    let cut = f.pieces().get(1).map(|p| p.domain.lo.clone());
    let approx = Approx::new(f);
    let mid = (&f.carrier().lo + &f.carrier().hi) / Rational::from_integer(2.into());
    // A cycle through the cut point is invisible to nearby itineraries.
    if let Some(c) = &cut {
        if let Some(orbit) = exact_cycle_through(f, c, 1 << 11)? {
            return cycle_info(f, orbit);
        }
    }
    for depth in [1usize << 11, 1 << 14, 1 << 17, 1 << 20] {
        let mut m = Approx::encode(&mid);
        let mut word = Vec::with_capacity(depth);
        for _ in 0..depth {
            let (next, k) = approx.step(&m);
            word.push(k);
            m = next;
        }
        let tail = &word[depth / 2..];
        let Some(q) = minimal_period(tail) else { continue };
        // Compose the candidate word from the tail start and solve for its fixed point.
        let mut a = AffineMap::identity();
        for &k in &tail[..q] {
            a = f.piece(k).map.after(&a);
        }
        if a.a >= Rational::one() {
            continue;
        }
        let fixed = &a.b / (Rational::one() - &a.a);
        if !f.carrier().contains(&fixed) {
            continue;
        }
        let mut x = fixed.clone();
        let mut ok = true;
        let mut orbit = Vec::with_capacity(q);
        for &k in &tail[..q] {
            let (y, j) = f.eval(&x)?;
            if j != k {
                ok = false;
                break;
            }
            orbit.push(x);
            x = y;
        }
        if ok && x == fixed {
            return cycle_info(f, orbit);
        }
    }
    Err(Error::ResourceLimit("no attracting cycle verified within 2^20 steps".into()))
}

/// Rotation number and verified cycle of the normalized map.
pub fn rotation_and_cycle(params: &GapParams) -> Result<CycleInfo> {
    let info = find_cycle(&params.canonical_map())?;
    if info.p.gcd(&info.q) != 1 && info.q > 1 {
        return Err(Error::PreconditionViolated(format!("rotation {}/{} is not in lowest terms", info.p, info.q)));
    }
    if info.contraction >= Rational::one() || !params.within_rotation_bound(info.p, info.q) {
        return Err(Error::PreconditionViolated(format!("cycle {info} is not attracting")));
    }
    Ok(info)
}

fn floor_q(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

/// One period of series terms and its per-period ratio.
fn phi_block(params: &GapParams, p: u64, q: u64, x: &Rational) -> (Rational, Rational, Rational) {
    let rho = Rational::new(BigInt::from(p), BigInt::from(q));
    let fx = floor_q(x);
    let kappa = (&params.lambda + &params.delta - Rational::one()) / &params.lambda;
    let mut block = Rational::zero();
    for n in 0..q {
        let e = &fx - floor_q(&(x - &rho * Rational::from_integer(n.into())));
        let diff = floor_q(&(x - &rho * Rational::from_integer((n + 1).into())))
            - floor_q(&(x - &rho * Rational::from_integer(n.into())));
        let e = e.to_u64().expect("exponent is a small nonnegative integer");
        block += rpow(&params.lambda, n) * rpow(&params.mu, e) * (&kappa + Rational::from_integer(diff));
    }
    let head = Rational::from_integer(fx) + (Rational::one() - &params.delta) / &params.lambda;
    (head, block, params.contraction(p, q))
}

/// `Phi(x)` summed in closed form over period-`q` blocks.
pub fn phi_exact(params: &GapParams, p: u64, q: u64, x: &Rational) -> Result<Rational> {
    let (head, block, r) = phi_block(params, p, q, x);
    if r >= Rational::one() {
        return Err(Error::PreconditionViolated(format!("series diverges: lambda^q mu^p = {r}")));
    }
    Ok(head + block / (Rational::one() - r))
}

/// Enclosure of `Phi(x)` of width at most `2^-precision`, from a truncated
/// series and a geometric tail bound.
pub fn hecke_mahler_phi(params: &GapParams, p: u64, q: u64, x: &Rational, precision: u32) -> Result<DyadicInterval> {
    let (head, block, r) = phi_block(params, p, q, x);
    let one = Rational::one();
    if r >= one {
        return Err(Error::PreconditionViolated(format!("series diverges: lambda^q mu^p = {r}")));
    }
    let eps = Rational::new(BigInt::one(), BigInt::one() << (precision + 2));
    let mut blocks = 0u64;
    let mut rk = one.clone();
    // Tail after k blocks is block r^k / (1 - r).
    while block.abs() * &rk / (&one - &r) > eps {
        rk *= &r;
        blocks += 1;
        if blocks > 1 << 20 {
            return Err(Error::ResourceLimit(format!("Phi needs more than 2^20 blocks at precision {precision}")));
        }
    }
    let partial = &head + &block * (&one - &rk) / (&one - &r);
    let tail = block.abs() * &rk / (&one - &r);
    Ok(DyadicInterval::outward(&(&partial - &tail), &(&partial + &tail), precision + 1))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdCert {
    pub t: Rational,
    pub d_min: Rational,
    /// No image `f^n(U)` with `n > n_bound` contains `t`.
    pub n_bound: u64,
}

/// Least `N` with `contraction^floor(N / q) < d_min`.
pub fn threshold(cycle: &CycleInfo, t: &Rational) -> Result<ThresholdCert> {
    if cycle.contains(t) {
        return Err(Error::PreconditionViolated(format!("{t} lies on the cycle")));
    }
    if cycle.contraction >= Rational::one() || !cycle.contraction.is_positive() {
        return Err(Error::PreconditionViolated("cycle is not contracting".into()));
    }
    let d_min = cycle.points.iter().map(|c| (t - c).abs()).min().expect("cycle is nonempty");
    let mut k = 0u64;
    let mut power = Rational::one();
    while power >= d_min {
        power *= &cycle.contraction;
        k += 1;
    }
    Ok(ThresholdCert { t: t.clone(), d_min, n_bound: k * cycle.q })
}

/// Limits for [`set_orbit`].
#[derive(Debug, Clone, Copy)]
pub struct OrbitLimits {
    pub max_steps: u64,
    pub max_parts: usize,
}

impl Default for OrbitLimits {
    fn default() -> Self {
        OrbitLimits { max_steps: 20_000, max_parts: 4_096 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetOrbit {
    /// Least `n` with `f^n(start)` meeting the targets.
    Hit(u64),
    Never,
    Unknown(String),
}

impl fmt::Display for SetOrbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetOrbit::Hit(n) => write!(f, "hit after {n} steps"),
            SetOrbit::Never => write!(f, "never hits"),
            SetOrbit::Unknown(m) => write!(f, "unknown ({m})"),
        }
    }
}

/// Piece of `f^q` that confines every later `f^q` image of `k`.
fn confining_piece<'a>(fq: &'a Pam, k: &Interval) -> Option<(&'a Piece, Rational)> {
    let piece = fq.pieces().iter().find(|p| k.is_subset_of(&p.domain))?;
    let a = &piece.map.a;
    if !(a.is_positive() && a < &Rational::one()) {
        return None;
    }
    let fixed = &piece.map.b / (Rational::one() - a);
    if !piece.domain.closure_contains(&fixed) {
        return None;
    }
    let r = hull_with(k, &fixed);
    r.is_subset_of(&piece.domain).then_some((piece, fixed))
}

/// Hull of `k` and `c`, open at `c` unless `c` is in `k`.
fn hull_with(k: &Interval, c: &Rational) -> Interval {
    if k.contains(c) {
        return k.clone();
    }
    if c <= &k.lo {
        Interval::new(c.clone(), k.hi.clone(), false, k.hi_closed).expect("nonempty hull")
    } else {
        Interval::new(k.lo.clone(), c.clone(), k.lo_closed, false).expect("nonempty hull")
    }
}

fn power_map(a: &AffineMap, fixed: &Rational, m: u64) -> AffineMap {
    let am = rpow(&a.a, m);
    let b = fixed * (Rational::one() - &am);
    AffineMap::new(am, b)
}

/// Least `m` with `A^m(k)` meeting `t`, where `A` contracts towards `fixed`
/// and `hull_with(k, fixed)` is invariant.
fn first_meet(a: &AffineMap, fixed: &Rational, k: &Interval, t: &Interval) -> Result<Option<u64>> {
    if k.contains(fixed) {
        // Images are nested.
        return Ok(k.meets(t).then_some(0));
    }
    if !hull_with(k, fixed).meets(t) {
        return Ok(None);
    }
    let above = k.lo >= *fixed;
    let beyond = |m: u64| -> bool {
        let km = power_map(a, fixed, m).image(k);
        if above { t.precedes(&km) } else { km.precedes(t) }
    };
    if !beyond(0) {
        return Ok(k.meets(t).then_some(0));
    }
    let mut hi = 1u64;
    while beyond(hi) {
        if hi >= 1 << 40 {
            return Err(Error::ResourceLimit("contraction towards the cycle is too slow".into()));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    // beyond(lo) holds and beyond(hi) fails.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if beyond(mid) { lo = mid } else { hi = mid }
    }
    Ok(power_map(a, fixed, hi).image(k).meets(t).then_some(hi))
}

/// Certify the future of part `k` at time `n`: earliest meeting with
/// `targets` among `n, n + 1, ...`, or `None` if certification fails.
fn certify(f: &Pam, fq: &Pam, q: u64, k: &Interval, targets: &IntervalSet) -> Result<Option<Option<u64>>> {
    let mut best: Option<u64> = None;
    let mut part = k.clone();
    for j in 0..q {
        let Some((piece, fixed)) = confining_piece(fq, &part) else { return Ok(None) };
        for t in targets.parts() {
            if let Some(m) = first_meet(&piece.map, &fixed, &part, t)? {
                let when = j + m * q;
                best = Some(best.map_or(when, |b| b.min(when)));
            }
        }
        let img = f.image_set(&IntervalSet::from_interval(part.clone()));
        if img.len() != 1 {
            return Ok(None);
        }
        part = img.parts()[0].clone();
    }
    Ok(Some(best))
}

/// Orbit of a set under `f`: least `n` with `f^n(start)` meeting `targets`.
pub fn set_orbit(
    f: &Pam,
    start: &IntervalSet,
    targets: &IntervalSet,
    cycle: Option<&CycleInfo>,
    limits: OrbitLimits,
) -> Result<SetOrbit> {
    let fq = match cycle {
        Some(c) if c.q <= 4096 => Some(f.compose_power(c.q)?),
        _ => None,
    };
    let mut frontier: Vec<Interval> = start.parts().to_vec();
    let mut reachable = IntervalSet::from_interval(f.carrier().clone());
    let mut best: Option<u64> = None;
    for n in 0..limits.max_steps {
        if best.is_some_and(|b| b <= n) {
            break;
        }
        // Nothing at time n or later can meet targets outside f^n(U).
        if !reachable.meets(targets) {
            return Ok(best.map_or(SetOrbit::Never, SetOrbit::Hit));
        }
        if frontier.is_empty() {
            break;
        }
        if frontier.iter().any(|k| targets.meets_interval(k)) {
            return Ok(SetOrbit::Hit(n));
        }
        let mut rest = Vec::new();
        for k in frontier {
            let outcome = match (&fq, cycle) {
                (Some(fq), Some(c)) => certify(f, fq, c.q, &k, targets)?,
                _ => None,
            };
            match outcome {
                Some(Some(m)) => best = Some(best.map_or(n + m, |b| b.min(n + m))),
                Some(None) => {}
                None => rest.push(k),
            }
        }
        let next = f.image_set(&IntervalSet::from_intervals(rest));
        if next.len() > limits.max_parts {
            return Ok(SetOrbit::Unknown(format!("set orbit split into more than {} parts", limits.max_parts)));
        }
        frontier = next.parts().to_vec();
        reachable = f.image_set(&reachable);
    }
    match best {
        Some(b) => Ok(SetOrbit::Hit(b)),
        // Every part was certified without a meeting.
        None if frontier.is_empty() => Ok(SetOrbit::Never),
        None => Ok(SetOrbit::Unknown(format!("no certificate within {} steps", limits.max_steps))),
    }
}

/// Point reachability for a gap map.
pub fn decide_gap(f: &Pam, x0: &Rational, t: &Rational) -> Result<Decision> {
    if x0 == t {
        return Ok(Decision::yes(0));
    }
    let cycle = find_cycle(f)?;
    let mut trace_lines = vec![format!("{cycle}")];
    let decision = match (cycle.index_of(x0), cycle.index_of(t)) {
        (Some(i), Some(j)) => {
            let q = cycle.q as usize;
            let n = (j + q - i) % q;
            trace_lines.push(format!("both on the cycle, {n} steps apart"));
            Decision::yes(n as u64)
        }
        (Some(_), None) | (None, Some(_)) => {
            trace_lines.push("exactly one point on the cycle; injectivity rules out a hit".into());
            Decision::no()
        }
        (None, None) => {
            let cert = threshold(&cycle, t)?;
            trace_lines.push(format!("d_min = {}, threshold N = {}", cert.d_min, cert.n_bound));
            // By injectivity t lies in f^n(U) iff its backward orbit has length n,
            // so x0 can only reach t along that finite chain.
            let mut chain = vec![t.clone()];
            loop {
                let pre = f.preimages_of_point(chain.last().unwrap());
                let Some((y, _)) = pre.into_iter().next() else { break };
                if chain.len() as u64 > cert.n_bound + 200_000 {
                    return Err(Error::ResourceLimit(format!("backward orbit of {t} exceeds {} steps", chain.len())));
                }
                chain.push(y);
            }
            let depth = chain.len() as u64 - 1;
            trace_lines.push(format!("backward orbit of t ends after {depth} steps"));
            if depth > cert.n_bound {
                trace_lines.push(format!("exact chain is longer than the threshold by {}", depth - cert.n_bound));
            }
            match chain.iter().position(|y| y == x0).map(|k| k as u64) {
                Some(n) => Decision::yes(n),
                None => Decision::no(),
            }
        }
    };
    let mut decision = decision;
    for line in trace_lines {
        decision.trace.push(0, StepKind::Gap, line);
    }
    Ok(decision)
}
