//! `pamdecide`: exact reachability queries on piecewise affine maps.
//!
//! Exit status: 0 when the query was decided or the command completed,
//! 2 when the answer is unknown or unsupported, 1 on usage or input errors.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use pamdecide::bijection::{normalized_params, tau_rationality, RotationRep};
use pamdecide::decision::{Answer, Decision, Witness};
use pamdecide::gap::{find_cycle, hecke_mahler_phi, to_gap_params};
use pamdecide::lab;
use pamdecide::loop_dsl::{self, HaltingAnswer};
use pamdecide::numerics::{parse_rational, Rational};
use pamdecide::pam::{classify, parse_interval, parse_pam, Interval, Pam, Shape};
use pamdecide::strategy::{Engine, EngineConfig, Registry};
use pamdecide::Error;

use output::{Format, Outcome};

#[derive(Parser)]
#[command(name = "pamdecide", version, about = "Exact reachability decisions for one-dimensional piecewise affine maps")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Simulation depth for fallbacks, witness searches and scans.
    #[arg(long, global = true, default_value_t = 10_000)]
    horizon: u64,
    /// Bits of precision for enclosures.
    #[arg(long, global = true, default_value_t = 40)]
    precision: u32,
    /// Append the reduction trace.
    #[arg(long, global = true)]
    trace: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Force a registered strategy at the top level.
    #[arg(long, global = true)]
    strategy: Option<String>,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("`{s}` is not a rational (use p/q, an integer or a finite decimal)"))
}

fn interval(s: &str) -> Result<Interval, String> {
    parse_interval(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Cmd {
    /// Shape, injectivity and piece graph of a map.
    Classify {
        #[arg(long)]
        pam: PathBuf,
    },
    /// Does the orbit of a point reach another point?
    Reach {
        #[arg(long)]
        pam: PathBuf,
        #[arg(long, value_parser = rational)]
        from: Rational,
        #[arg(long, value_parser = rational)]
        to: Rational,
    },
    /// Does the orbit of a point meet an interval such as `[1/4,1/2)`?
    ReachInterval {
        #[arg(long)]
        pam: PathBuf,
        #[arg(long, value_parser = rational)]
        from: Rational,
        #[arg(long, value_parser = interval)]
        interval: Interval,
    },
    /// Does some image of one interval meet another?
    IntervalReach {
        #[arg(long)]
        pam: PathBuf,
        #[arg(long = "from-interval", value_parser = interval)]
        from_interval: Interval,
        #[arg(long = "to-interval", value_parser = interval)]
        to_interval: Interval,
    },
    /// Is a point periodic? Reports the least period.
    Periodic {
        #[arg(long)]
        pam: PathBuf,
        #[arg(long, alias = "from", value_parser = rational)]
        x: Rational,
    },
    /// Rotation data of a bijection or a middle-gap map.
    Rotation {
        #[arg(long)]
        pam: PathBuf,
    },
    /// Attracting cycle of a middle-gap map with enclosures of its coding function.
    Cycle {
        #[arg(long)]
        pam: PathBuf,
    },
    /// Exact orbit as CSV, or a histogram with --histogram.
    Simulate {
        #[arg(long)]
        pam: PathBuf,
        #[arg(long, value_parser = rational)]
        from: Rational,
        #[arg(long, default_value_t = 20)]
        steps: u64,
        #[arg(long, default_value_t = 12)]
        digits: usize,
        /// Bin the first `steps` points into 2^BITS cells instead.
        #[arg(long, value_name = "BITS")]
        histogram: Option<u32>,
    },
    /// Search for a p-adic certificate that an orbit is infinite.
    CertifyInfinite {
        #[arg(long)]
        pam: PathBuf,
        #[arg(long, value_parser = rational)]
        from: Rational,
        #[arg(long, default_value_t = 3)]
        prime: u64,
    },
    /// Bounded search for n with n f^n(0) < gamma on the (c, d) bijection.
    Probe {
        #[arg(long, value_parser = rational)]
        c: Rational,
        #[arg(long, value_parser = rational)]
        d: Rational,
        #[arg(long, value_parser = rational)]
        gamma: Rational,
    },
    /// Decide termination of a loop program.
    Halting {
        #[arg(long)]
        program: PathBuf,
    },
}

fn load_pam(path: &Path) -> anyhow::Result<Pam> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_pam(&text).with_context(|| format!("parsing {}", path.display()))
}

fn engine(common: &Common) -> anyhow::Result<Engine> {
    let registry = Registry::standard();
    if let Some(name) = &common.strategy {
        if registry.get(name).is_none() {
            bail!("unknown strategy `{name}`; registered: {}", registry.names().join(", "));
        }
    }
    Ok(Engine::new(registry, EngineConfig { horizon: common.horizon, forced: common.strategy.clone(), ..EngineConfig::default() }))
}

fn decided(query: String, d: Decision) -> Outcome {
    let witness = d.witness.map(|w| match w {
        Witness::Steps(n) => n.to_string(),
        Witness::Unbounded => "unbounded".to_string(),
    });
    let answer = match d.answer {
        Answer::Yes => "yes",
        Answer::No => "no",
        Answer::Unknown => "unknown",
    };
    let detail = if d.answer == Answer::Unknown { d.diagnostics.first().cloned() } else { None };
    Outcome { query, answer: answer.into(), witness, detail, trace: Some(d.trace), code: u8::from(d.answer == Answer::Unknown) * 2 }
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let c = &cli.common;
    Ok(match &cli.cmd {
        Cmd::Classify { pam } => {
            let f = load_pam(pam)?;
            let k = classify(&f);
            let detail = format!(
                "shape={} pieces={} injective={} surjective={} graph={}",
                k.shape, k.piece_count, k.injective, k.surjective, k.graph
            );
            Outcome::completed(format!("classify pam={}", pam.display()), detail)
        }
        Cmd::Reach { pam, from, to } => {
            let f = load_pam(pam)?;
            decided(format!("reach from={from} to={to}"), engine(c)?.reach(&f, from, to)?)
        }
        Cmd::ReachInterval { pam, from, interval } => {
            let f = load_pam(pam)?;
            decided(format!("reach-interval from={from} interval={interval}"), engine(c)?.point_to_interval(&f, from, interval)?)
        }
        Cmd::IntervalReach { pam, from_interval, to_interval } => {
            let f = load_pam(pam)?;
            let d = engine(c)?.interval_to_interval(&f, from_interval, to_interval)?;
            decided(format!("interval-reach from={from_interval} to={to_interval}"), d)
        }
        Cmd::Periodic { pam, x } => {
            let f = load_pam(pam)?;
            decided(format!("periodic x={x}"), engine(c)?.periodic(&f, x)?)
        }
        Cmd::Rotation { pam } => {
            let f = load_pam(pam)?;
            let query = format!("rotation pam={}", pam.display());
            match classify(&f).shape {
                Shape::MiddleGap => {
                    to_gap_params(&f)?;
                    let cycle = find_cycle(&f)?;
                    let rho = Rational::new(cycle.p.into(), cycle.q.into());
                    let pts: Vec<String> = cycle.points.iter().map(|x| x.to_string()).collect();
                    Outcome::completed(query, format!("rho={rho} q={} cycle={}", cycle.q, pts.join(",")))
                }
                Shape::Bijection => {
                    let params = normalized_params(&f)?;
                    let detail = match tau_rationality(&params)? {
                        RotationRep::Rational { p, q } => format!("tau={} q={q}", Rational::new(p.into(), q.into())),
                        RotationRep::Irrational { q1, q2 } => format!("tau=irrational q1={q1} q2={q2}"),
                    };
                    Outcome::completed(query, detail)
                }
                other => bail!("rotation needs a bijection or a middle-gap map, this map is {other}"),
            }
        }
        Cmd::Cycle { pam } => {
            let f = load_pam(pam)?;
            let (params, _) = to_gap_params(&f)?;
            let cycle = find_cycle(&f)?;
            let pts: Vec<String> = cycle.points.iter().map(|x| x.to_string()).collect();
            let word: String = cycle.word.iter().map(|w| w.to_string()).collect();
            let mut detail = format!("cycle={} word={word} contraction={}", pts.join(","), cycle.contraction);
            for k in 0..cycle.q {
                let x = Rational::new(k.into(), cycle.q.into());
                let e = hecke_mahler_phi(&params, cycle.p, cycle.q, &x, c.precision)?;
                detail.push_str(&format!("\nphi({x}) in {e}"));
            }
            Outcome::completed(format!("cycle pam={}", pam.display()), detail)
        }
        Cmd::Simulate { pam, from, steps, digits, histogram } => {
            let f = load_pam(pam)?;
            let mut buf = Vec::new();
            let query = format!("simulate from={from} steps={steps}");
            match histogram {
                Some(bits) => lab::accumulation_stats(&f, from, *steps, *bits)?.write_histogram_csv(&mut buf)?,
                None => lab::write_orbit_csv(&lab::simulate(&f, from, *steps, *digits)?, &mut buf)?,
            }
            Outcome::completed(query, String::from_utf8(buf)?.trim_end().to_string())
        }
        Cmd::CertifyInfinite { pam, from, prime } => {
            let f = load_pam(pam)?;
            let query = format!("certify-infinite from={from} p={prime}");
            match lab::valuation_certificate(&f, from, *prime, c.horizon)? {
                Some(cert) => {
                    let detail = format!("certified p={} n0={} v0={}", cert.p, cert.n0, cert.v0);
                    Outcome { answer: "yes".into(), witness: Some(cert.n0.to_string()), ..Outcome::completed(query, detail) }
                }
                None => Outcome::unknown(query, format!("no certificate within {} steps", c.horizon)),
            }
        }
        Cmd::Probe { c: cc, d, gamma } => {
            let r = lab::lagrange_probe(cc, d, gamma, c.horizon)?;
            let query = format!("probe c={cc} d={d} gamma={gamma}");
            match (&r.witness, &r.lagrange_upper) {
                (Some((n, v)), Some(upper)) => {
                    let detail = format!("witness n={n} value={v} lagrange_upper={upper}");
                    Outcome { answer: "yes".into(), witness: Some(n.to_string()), ..Outcome::completed(query, detail) }
                }
                _ => Outcome::unknown(query, format!("no witness ≤ {}", r.horizon)),
            }
        }
        Cmd::Halting { program } => {
            let text = fs::read_to_string(program).with_context(|| format!("reading {}", program.display()))?;
            let prog = loop_dsl::parse(&text).with_context(|| format!("parsing {}", program.display()))?;
            let query = format!("halting program={}", program.display());
            match loop_dsl::decide_halting_with(&engine(c)?, &prog)? {
                HaltingAnswer::Halts(n) => Outcome {
                    answer: "halts".into(),
                    witness: Some(n.to_string()),
                    ..Outcome::completed(query, format!("halts n={n}"))
                },
                HaltingAnswer::Diverges => Outcome { answer: "diverges".into(), ..Outcome::completed(query, "diverges".into()) },
                HaltingAnswer::Unsupported { reason, .. } => Outcome::unknown(query, format!("unsupported: {reason}")),
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            let stdout = std::io::stdout();
            if let Err(e) = outcome.emit(&mut stdout.lock(), cli.common.format, cli.common.trace) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            // Exhausted resource limits are undecided queries, not bad input.
            let limit = e.downcast_ref::<Error>().is_some_and(|e| matches!(e, Error::ResourceLimit(_)));
            eprintln!("error: {e:#}");
            ExitCode::from(if limit { 2 } else { 1 })
        }
    }
}
