//! Query answers and the reduction trace attached to them.

use std::fmt;

use crate::pam::Pam;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Yes => "yes",
            Answer::No => "no",
            Answer::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Witness {
    /// Number of steps of the original map.
    Steps(u64),
    /// A hit exists but no step count was produced.
    Unbounded,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Steps(n) => write!(f, "{n}"),
            Witness::Unbounded => f.write_str("unbounded"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    Classify,
    Prefix,
    DagWalk,
    FunctionalCycle,
    Neg1,
    Neg2Iteration,
    FirstReturn,
    Reflect,
    Restrict,
    Rescale,
    Bijection,
    Gap,
    Simulate,
    Note,
}

impl StepKind {
    pub fn name(self) -> &'static str {
        match self {
            StepKind::Classify => "classify",
            StepKind::Prefix => "prefix",
            StepKind::DagWalk => "dag-walk",
            StepKind::FunctionalCycle => "functional-cycle",
            StepKind::Neg1 => "neg1",
            StepKind::Neg2Iteration => "neg2-iteration",
            StepKind::FirstReturn => "first-return",
            StepKind::Reflect => "reflect",
            StepKind::Restrict => "restrict",
            StepKind::Rescale => "rescale",
            StepKind::Bijection => "bijection",
            StepKind::Gap => "gap",
            StepKind::Simulate => "simulate",
            StepKind::Note => "note",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionStep {
    pub kind: StepKind,
    pub depth: usize,
    pub params: String,
    pub produced: Option<Pam>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
}

impl ReductionTrace {
    pub fn push(&mut self, depth: usize, kind: StepKind, params: impl Into<String>) {
        self.steps.push(ReductionStep { kind, depth, params: params.into(), produced: None });
    }

    pub fn push_map(&mut self, depth: usize, kind: StepKind, params: impl Into<String>, produced: Pam) {
        self.steps.push(ReductionStep { kind, depth, params: params.into(), produced: Some(produced) });
    }

    pub fn has(&self, kind: StepKind) -> bool {
        self.steps.iter().any(|s| s.kind == kind)
    }

    pub fn find(&self, kind: StepKind) -> Option<&ReductionStep> {
        self.steps.iter().find(|s| s.kind == kind)
    }
}

impl fmt::Display for ReductionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{}{}: {}", "  ".repeat(s.depth), s.kind.name(), s.params)?;
            if let Some(p) = &s.produced {
                for line in p.to_string().lines() {
                    writeln!(f, "{}  | {line}", "  ".repeat(s.depth))?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub answer: Answer,
    pub witness: Option<Witness>,
    pub trace: ReductionTrace,
    pub diagnostics: Vec<String>,
}

impl Decision {
    pub fn yes(n: u64) -> Decision {
        Decision { answer: Answer::Yes, witness: Some(Witness::Steps(n)), trace: Default::default(), diagnostics: vec![] }
    }

    pub fn yes_unbounded() -> Decision {
        Decision { answer: Answer::Yes, witness: Some(Witness::Unbounded), trace: Default::default(), diagnostics: vec![] }
    }

    pub fn no() -> Decision {
        Decision { answer: Answer::No, witness: None, trace: Default::default(), diagnostics: vec![] }
    }

    pub fn unknown(reason: impl Into<String>) -> Decision {
        Decision { answer: Answer::Unknown, witness: None, trace: Default::default(), diagnostics: vec![reason.into()] }
    }

    pub fn steps(&self) -> Option<u64> {
        match self.witness {
            Some(Witness::Steps(n)) => Some(n),
            _ => None,
        }
    }

    pub fn is_yes(&self) -> bool {
        self.answer == Answer::Yes
    }

    pub fn is_no(&self) -> bool {
        self.answer == Answer::No
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.answer)?;
        if let Some(w) = &self.witness {
            write!(f, " (n = {w})")?;
        }
        Ok(())
    }
}
