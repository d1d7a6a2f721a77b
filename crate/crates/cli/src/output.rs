//! Human and record renderings of a command outcome.
//!
//! Records are JSON lines with a fixed key order:
//! `{"query", "answer", "witness", "detail", "trace_reference"}`. With
//! `--trace`, one `{"trace_of", "depth", "kind", "params"}` line per
//! reduction step follows.

use std::io::{self, Write};

use clap::ValueEnum;
use serde::Serialize;

use pamdecide::decision::ReductionTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Records,
}

pub struct Outcome {
    pub query: String,
    /// `yes`, `no`, `unknown`, `halts`, `diverges` or `done`.
    pub answer: String,
    pub witness: Option<String>,
    pub detail: Option<String>,
    pub trace: Option<ReductionTrace>,
    pub code: u8,
}

#[derive(Serialize)]
struct Record<'a> {
    query: &'a str,
    answer: &'a str,
    witness: Option<&'a str>,
    detail: Option<&'a str>,
    /// Step kinds of the trace joined by `>`.
    trace_reference: Option<String>,
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    trace_of: &'a str,
    depth: usize,
    kind: &'a str,
    params: &'a str,
}

impl Outcome {
    pub fn completed(query: String, detail: String) -> Outcome {
        Outcome { query, answer: "done".into(), witness: None, detail: Some(detail), trace: None, code: 0 }
    }

    pub fn unknown(query: String, detail: String) -> Outcome {
        Outcome { query, answer: "unknown".into(), witness: None, detail: Some(detail), trace: None, code: 2 }
    }

    fn human_line(&self) -> String {
        match (self.answer.as_str(), &self.witness, &self.detail) {
            ("yes", Some(w), None) if w == "unbounded" => "yes (no step count)".into(),
            ("yes", Some(w), None) => format!("yes n={w}"),
            ("unknown", _, Some(d)) if d.starts_with("unsupported") => d.clone(),
            ("unknown", _, Some(d)) => format!("unknown ({d})"),
            (_, _, Some(d)) => d.clone(),
            (a, _, None) => a.to_string(),
        }
    }

    pub fn emit<W: Write>(&self, out: &mut W, format: Format, with_trace: bool) -> io::Result<()> {
        match format {
            Format::Human => {
                writeln!(out, "{}", self.human_line())?;
                if with_trace {
                    if let Some(t) = &self.trace {
                        write!(out, "{t}")?;
                    }
                }
            }
            Format::Records => {
                let reference = self.trace.as_ref().filter(|t| !t.steps.is_empty()).map(|t| {
                    t.steps.iter().map(|s| s.kind.name()).collect::<Vec<_>>().join(">")
                });
                let rec = Record {
                    query: &self.query,
                    answer: &self.answer,
                    witness: self.witness.as_deref(),
                    detail: self.detail.as_deref(),
                    trace_reference: reference,
                };
                writeln!(out, "{}", serde_json::to_string(&rec)?)?;
                if with_trace {
                    for s in self.trace.iter().flat_map(|t| &t.steps) {
                        let line = TraceRecord { trace_of: &self.query, depth: s.depth, kind: s.kind.name(), params: &s.params };
                        writeln!(out, "{}", serde_json::to_string(&line)?)?;
                    }
                }
            }
        }
        Ok(())
    }
}
