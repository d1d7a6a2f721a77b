//! Top-level queries on a map: point, interval and periodicity questions.
//!
//! Every yes-witness that fits under [`VERIFY_CAP`] is re-checked by exact
//! iteration before it is returned.

use crate::bijection::{normalized_params, tau_rationality, RotationRep};
use crate::decision::{Decision, ReductionTrace, StepKind, Witness};
use crate::error::{Error, Result};
use crate::gap::{find_cycle, set_orbit, OrbitLimits, SetOrbit};
use crate::numerics::Rational;
use crate::pam::{classify, first_hit, Interval, IntervalSet, Pam, Shape};
use crate::reduction::{side_gap_hull, Level, LevelOutcome, Targets};
use crate::strategy::{Engine, LevelQuery};

/// Witnesses up to this many steps are re-simulated exactly.
pub const VERIFY_CAP: u64 = 1_000_000;

fn check_in_carrier(f: &Pam, x: &Rational) -> Result<()> {
    if f.carrier().contains(x) {
        Ok(())
    } else {
        Err(Error::OutOfCarrier(format!("{x} of {}", f.carrier())))
    }
}

fn with_trace(mut d: Decision, trace: ReductionTrace) -> Decision {
    let mut steps = trace.steps;
    steps.append(&mut d.trace.steps);
    d.trace.steps = steps;
    d
}

impl Engine {
    fn finish_point(&self, f: &Pam, x0: &Rational, targets: &IntervalSet, out: LevelOutcome, trace: ReductionTrace) -> Result<Decision> {
        let mut d = match out {
            LevelOutcome::Hit(n) => {
                let mut d = Decision::yes(n);
                if n <= VERIFY_CAP {
                    // Replaying the prefix also confirms that no earlier step hits.
                    let replay = first_hit(f, x0, targets, n)?;
                    if replay != Some(n) {
                        let seen = replay.map_or("no hit".to_string(), |m| format!("a hit at {m}"));
                        return Ok(with_trace(
                            Decision::unknown(format!("witness {n} failed exact re-simulation ({seen})")),
                            trace,
                        ));
                    }
                    d.diagnostics.push(format!("witness re-simulated: first hit at step {n}"));
                }
                d
            }
            LevelOutcome::Exists => {
                let horizon = self.config.horizon.max(100_000);
                match first_hit(f, x0, targets, horizon)? {
                    Some(n) => {
                        let mut d = Decision::yes(n);
                        d.diagnostics.push(format!("dense orbit; first hit found by simulation at {n}"));
                        d
                    }
                    None => Decision::yes_unbounded(),
                }
            }
            LevelOutcome::Never => Decision::no(),
            LevelOutcome::Unknown(m) => Decision::unknown(m),
        };
        d = with_trace(d, trace);
        Ok(d)
    }

    /// Does the orbit of `x0` reach `t`?
    pub fn reach(&self, f: &Pam, x0: &Rational, t: &Rational) -> Result<Decision> {
        check_in_carrier(f, x0)?;
        check_in_carrier(f, t)?;
        let (out, trace) = self.run_point(Level::top(f.clone()), x0, t)?;
        self.finish_point(f, x0, &IntervalSet::from_interval(Interval::point(t.clone())), out, trace)
    }

    /// Does the orbit of `x0` meet the interval `target`?
    pub fn point_to_interval(&self, f: &Pam, x0: &Rational, target: &Interval) -> Result<Decision> {
        check_in_carrier(f, x0)?;
        let targets = match target.intersect(f.carrier()) {
            Some(iv) => IntervalSet::from_interval(iv),
            None => return Ok(Decision::no()),
        };
        let query = LevelQuery { level: Level::top(f.clone()), x0: x0.clone(), targets: Targets::from_set(&targets) };
        let (out, trace) = self.run(query)?;
        self.finish_point(f, x0, &targets, out, trace)
    }

    /// Is `x0` periodic? The witness is the least period.
    pub fn periodic(&self, f: &Pam, x0: &Rational) -> Result<Decision> {
        check_in_carrier(f, x0)?;
        let y = f.eval(x0)?.0;
        let inner = self.reach(f, &y, x0)?;
        let mut d = match inner.witness {
            Some(Witness::Steps(n)) => Decision::yes(n + 1),
            Some(Witness::Unbounded) => Decision::yes_unbounded(),
            None => Decision { answer: inner.answer, witness: None, trace: Default::default(), diagnostics: vec![] },
        };
        d.trace.push(0, StepKind::Note, format!("periodic({x0}) asks whether f({x0}) = {y} returns to {x0}"));
        d.trace.steps.extend(inner.trace.steps);
        d.diagnostics.extend(inner.diagnostics);
        Ok(d)
    }

    /// Does some `f^n(J0)` meet `J1`?
    pub fn interval_to_interval(&self, f: &Pam, j0: &Interval, j1: &Interval) -> Result<Decision> {
        let (Some(s), Some(t)) = (j0.intersect(f.carrier()), j1.intersect(f.carrier())) else {
            return Err(Error::OutOfCarrier(format!("{j0} or {j1} of {}", f.carrier())));
        };
        if s.meets(&t) {
            return Ok(Decision::yes(0));
        }
        if s.is_degenerate() {
            return self.point_to_interval(f, &s.lo, &t);
        }
        let mut trace = ReductionTrace::default();
        let out = self.set_reach(f, IntervalSet::from_interval(s.clone()), &IntervalSet::from_interval(t.clone()), &mut trace, 0)?;
        let mut d = match out {
            LevelOutcome::Hit(n) => {
                let mut d = Decision::yes(n);
                if n <= 10_000 {
                    let mut img = IntervalSet::from_interval(s);
                    for _ in 0..n {
                        img = f.image_set(&img);
                    }
                    if !img.meets_interval(&t) {
                        return Ok(with_trace(Decision::unknown(format!("witness {n} failed exact re-check")), trace));
                    }
                    d.diagnostics.push(format!("witness re-checked on exact images: {img}"));
                }
                d
            }
            LevelOutcome::Exists => Decision::yes_unbounded(),
            LevelOutcome::Never => Decision::no(),
            LevelOutcome::Unknown(m) => Decision::unknown(m),
        };
        d = with_trace(d, trace);
        Ok(d)
    }

    fn set_reach(&self, f: &Pam, s: IntervalSet, t: &IntervalSet, trace: &mut ReductionTrace, depth: usize) -> Result<LevelOutcome> {
        if s.meets(t) {
            return Ok(LevelOutcome::Hit(0));
        }
        if s.parts().iter().all(|p| p.is_degenerate()) {
            let mut best: Option<LevelOutcome> = None;
            for p in s.parts() {
                let q = LevelQuery { level: Level::top(f.clone()), x0: p.lo.clone(), targets: Targets::from_set(t) };
                let (out, sub) = self.run(q)?;
                trace.steps.extend(sub.steps);
                best = Some(match (best, out) {
                    (None, o) => o,
                    (Some(LevelOutcome::Hit(a)), LevelOutcome::Hit(b)) => LevelOutcome::Hit(a.min(b)),
                    (Some(LevelOutcome::Hit(a)), _) | (_, LevelOutcome::Hit(a)) => LevelOutcome::Hit(a),
                    (Some(LevelOutcome::Unknown(m)), _) | (_, LevelOutcome::Unknown(m)) => LevelOutcome::Unknown(m),
                    (Some(LevelOutcome::Exists), _) | (_, LevelOutcome::Exists) => LevelOutcome::Exists,
                    _ => LevelOutcome::Never,
                });
            }
            return Ok(best.unwrap_or(LevelOutcome::Never));
        }
        let cls = classify(f);
        trace.push(depth, StepKind::Classify, format!("{} pieces, shape {}", cls.piece_count, cls.shape));
        let limits = OrbitLimits { max_steps: self.config.horizon.max(1), ..OrbitLimits::default() };
        let from_orbit = |o: SetOrbit| match o {
            SetOrbit::Hit(n) => LevelOutcome::Hit(n),
            SetOrbit::Never => LevelOutcome::Never,
            SetOrbit::Unknown(m) => LevelOutcome::Unknown(m),
        };
        match cls.shape {
            Shape::Bijection => {
                let rep = tau_rationality(&normalized_params(f)?)?;
                trace.push(depth, StepKind::Bijection, format!("rotation {rep}"));
                match rep {
                    RotationRep::Rational { q, .. } => {
                        // f^q is the identity, so q images exhaust the orbit.
                        let mut img = s;
                        for n in 1..q {
                            img = f.image_set(&img);
                            if img.meets(t) {
                                return Ok(LevelOutcome::Hit(n));
                            }
                        }
                        Ok(LevelOutcome::Never)
                    }
                    RotationRep::Irrational { .. } => {
                        let out = set_orbit(f, &s, t, None, limits)?;
                        Ok(match from_orbit(out) {
                            LevelOutcome::Unknown(_) => LevelOutcome::Exists,
                            o => o,
                        })
                    }
                }
            }
            Shape::SideGap => {
                let hull = side_gap_hull(f)?;
                let s1 = f.image_set(&s);
                if s1.meets(t) {
                    return Ok(LevelOutcome::Hit(1));
                }
                let t1 = t.intersect_interval(&hull);
                if t1.is_empty() {
                    return Ok(LevelOutcome::Never);
                }
                let g = f.restrict(&hull)?;
                trace.push_map(depth, StepKind::Restrict, format!("image hull {hull}"), g.clone());
                Ok(self.set_reach(&g, s1, &t1, trace, depth + 1)?.shifted(1))
            }
            Shape::MiddleGap => {
                let cycle = find_cycle(f).ok();
                if let Some(c) = &cycle {
                    trace.push(depth, StepKind::Gap, c.to_string());
                }
                Ok(from_orbit(set_orbit(f, &s, t, cycle.as_ref(), limits)?))
            }
            _ => {
                trace.push(depth, StepKind::Simulate, format!("exact set images up to {}", limits.max_steps));
                Ok(from_orbit(set_orbit(f, &s, t, None, limits)?))
            }
        }
    }
}

pub fn reach(f: &Pam, x0: &Rational, t: &Rational) -> Result<Decision> {
    Engine::default().reach(f, x0, t)
}

pub fn point_to_interval(f: &Pam, x0: &Rational, target: &Interval) -> Result<Decision> {
    Engine::default().point_to_interval(f, x0, target)
}

pub fn interval_to_interval(f: &Pam, j0: &Interval, j1: &Interval) -> Result<Decision> {
    Engine::default().interval_to_interval(f, j0, j1)
}

pub fn periodic(f: &Pam, x0: &Rational) -> Result<Decision> {
    Engine::default().periodic(f, x0)
}

/// The point-to-interval construction: `(f', x0', t')` such that the orbit
/// of `x0` meets `target` under `f` iff `x0'` reaches `t'` under `f'`.
pub fn point_to_interval_general(f: &Pam, x0: &Rational, target: &Interval) -> Result<(Pam, Rational, Rational)> {
    let (g, t, h) = crate::reduction::point_to_interval_general(f, target)?;
    Ok((g, h.apply(x0), t))
}
