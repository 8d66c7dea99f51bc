//! Command-line front end.
//!
//! One verb per invocation; flags are `--name value` (or `--name=value`) and
//! unknown flags are rejected. Distribution literals containing a slash
//! fraction select rational mode unless `--mode` says otherwise, and rational
//! results are printed as exact fractions. Exit codes: 0 success, 1 domain
//! error, 2 usage error.

use std::collections::BTreeMap;
use std::io::Write;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::exact::{
    expectation, quantile, survival_by_compositions, survival_by_decomposition, survival_curve,
    survival_curve_to_k,
};
use crate::icebergsim::{dimension_timer, run_simulation, SimConfig};
use crate::oracle::{mc_curve_to_csv, mc_survival_curve, survival_markov_curve};
use crate::ordering::{run_all_suites, stochastic_compare, DEFAULT_TOL};
use crate::probmodel::{
    lambda_transform, maximize_trace, parse_probability_literal, uniformize_trace,
    uniformize_trace_with_pairs, CouponDistribution, ThetaFamily, TransformTrace,
};
use crate::scalar::{ArithmeticMode, Scalar};

pub const SYNOPSIS: &str = "\
usage: cct <verb> [flags]

verbs:
  dist       survival curve of the collection time
             --p <dist> --c <int> [--p0 <prob>] [--kmax <int> | --delta <prob>]
             [--method exact|composition|decomposition|markov|mc]
             [--replicates <int>] [--seed <int>] [--format csv|json] [--mode float|rational]
  expect     expected number of draws
             --p <dist> --c <int> [--p0] [--format] [--mode]
  quantile   smallest k with Pr{T > k} <= delta
             --p <dist> --c <int> --delta <prob> [--p0] [--mode]
  compare    stochastic-order verdict between two distributions
             --p <dist> --q <dist> --c <int> [--tol <prob>] [--delta <prob>] [--mode] [--format]
  transform  two-entry mixing procedures
             uniformize --p <dist> [--pairs i:j,i:j,...]
             maximize   --p <dist> --theta <prob> --j <pos>
             lambda     --p <dist> --i <pos> --j <pos> --lambda <weight>
             [--format csv|json] [--mode]
  extremal   floor-family member with the surplus at position j
             --n <int> --theta <prob> --p0 <prob> [--j <pos>] [--format] [--mode]
  timer      worst-case flush deadline
             --n <int> --c <int> --theta <prob> --p0 <prob> --delta <prob>
  simulate   run an iceberg-monitoring scenario
             --config <path> [--out <path>] [--samples-csv <path>]
  verify     randomized verification suites; exit 0 only if all pass
             [--seed <int>] [--tol <prob>] [--format text|json]

distributions are comma-separated decimals or fractions: 0.5,0.3 or 1/16,1/6,1/4,1/8,19/48
";

/// The verbs the front end understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    Dist,
    Expect,
    Quantile,
    Compare,
    Transform,
    Extremal,
    Timer,
    Simulate,
    Verify,
}

/// A parsed invocation: one verb, an optional positional sub-verb
/// (`transform` only), and the flag map.
#[derive(Debug, Clone)]
pub struct Command {
    pub verb: Verb,
    pub subverb: Option<String>,
    pub options: BTreeMap<String, String>,
}

fn allowed_flags(verb: Verb) -> &'static [&'static str] {
    match verb {
        Verb::Dist => &[
            "p",
            "p0",
            "c",
            "kmax",
            "delta",
            "method",
            "replicates",
            "seed",
            "format",
            "mode",
        ],
        Verb::Expect => &["p", "p0", "c", "format", "mode"],
        Verb::Quantile => &["p", "p0", "c", "delta", "mode"],
        Verb::Compare => &["p", "q", "c", "tol", "delta", "format", "mode"],
        Verb::Transform => &[
            "p", "p0", "pairs", "theta", "i", "j", "lambda", "format", "mode",
        ],
        Verb::Extremal => &["n", "theta", "p0", "j", "format", "mode"],
        Verb::Timer => &["n", "c", "theta", "p0", "delta"],
        Verb::Simulate => &["config", "out", "samples-csv"],
        Verb::Verify => &["seed", "tol", "format"],
    }
}

/// Splits argv into a [`Command`]; the error string is a usage diagnostic.
pub fn parse_command(args: &[String]) -> std::result::Result<Command, String> {
    let mut iter = args.iter();
    let verb_text = iter.next().ok_or_else(|| "missing verb".to_string())?;
    let verb = match verb_text.as_str() {
        "dist" => Verb::Dist,
        "expect" => Verb::Expect,
        "quantile" => Verb::Quantile,
        "compare" => Verb::Compare,
        "transform" => Verb::Transform,
        "extremal" => Verb::Extremal,
        "timer" => Verb::Timer,
        "simulate" => Verb::Simulate,
        "verify" => Verb::Verify,
        other => return Err(format!("unknown verb {other:?}")),
    };
    let mut subverb = None;
    let mut options = BTreeMap::new();
    let mut rest: Vec<&String> = iter.collect();
    rest.reverse();
    while let Some(token) = rest.pop() {
        if let Some(flag) = token.strip_prefix("--") {
            let (name, value) = match flag.split_once('=') {
                Some((name, value)) => (name.to_string(), value.to_string()),
                None => {
                    let value = rest
                        .pop()
                        .ok_or_else(|| format!("flag --{flag} needs a value"))?;
                    (flag.to_string(), value.clone())
                }
            };
            if !allowed_flags(verb).contains(&name.as_str()) {
                return Err(format!("unknown flag --{name} for verb {verb_text}"));
            }
            if options.insert(name.clone(), value).is_some() {
                return Err(format!("flag --{name} given twice"));
            }
        } else if verb == Verb::Transform && subverb.is_none() {
            subverb = Some(token.clone());
        } else {
            return Err(format!("unexpected argument {token:?}"));
        }
    }
    if verb == Verb::Transform && subverb.is_none() {
        return Err("transform needs a sub-verb: uniformize, maximize, or lambda".into());
    }
    Ok(Command {
        verb,
        subverb,
        options,
    })
}

/// Entry point for the binary: argv minus the program name, stdout/stderr.
pub fn dispatch(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let command = match parse_command(args) {
        Ok(command) => command,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            let _ = write!(err, "{SYNOPSIS}");
            return 2;
        }
    };
    match execute(&command, out, err) {
        Ok(code) => code,
        Err(Usage(message)) => {
            let _ = writeln!(err, "error: {message}");
            let _ = write!(err, "{SYNOPSIS}");
            2
        }
    }
}

pub fn run_from_env() -> i32 {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    dispatch(&args, &mut stdout.lock(), &mut stderr.lock())
}

/// Usage-level failure (exit 2), as opposed to domain errors (exit 1).
struct Usage(String);

type Exec = std::result::Result<i32, Usage>;

fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Exec {
    let domain = |error: Error, err: &mut dyn Write| -> i32 {
        let _ = writeln!(err, "error: {error}");
        1
    };
    let run: Result<String> = match command.verb {
        Verb::Dist => with_mode(command, run_dist::<f64>, run_dist::<BigRational>)?,
        Verb::Expect => with_mode(command, run_expect::<f64>, run_expect::<BigRational>)?,
        Verb::Quantile => with_mode(command, run_quantile::<f64>, run_quantile::<BigRational>)?,
        Verb::Compare => with_mode(command, run_compare::<f64>, run_compare::<BigRational>)?,
        Verb::Transform => with_mode(command, run_transform::<f64>, run_transform::<BigRational>)?,
        Verb::Extremal => with_mode(command, run_extremal::<f64>, run_extremal::<BigRational>)?,
        Verb::Timer => run_timer(command)?,
        Verb::Simulate => run_simulate(command)?,
        Verb::Verify => return run_verify(command, out, err),
    };
    match run {
        Ok(text) => {
            let _ = write!(out, "{text}");
            Ok(0)
        }
        Err(error) => Ok(domain(error, err)),
    }
}

// ---- flag helpers ----------------------------------------------------------

fn required<'a>(command: &'a Command, name: &str) -> std::result::Result<&'a str, Usage> {
    command
        .options
        .get(name)
        .map(String::as_str)
        .ok_or_else(|| Usage(format!("missing required flag --{name}")))
}

fn parse_usize(command: &Command, name: &str) -> std::result::Result<usize, Usage> {
    required(command, name)?
        .parse()
        .map_err(|_| Usage(format!("--{name} must be a positive integer")))
}

fn parse_u64_flag(text: &str, name: &str) -> std::result::Result<u64, Usage> {
    let parsed = if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16)
    } else {
        text.parse()
    };
    parsed.map_err(|_| Usage(format!("--{name} must be a decimal or hex integer")))
}

fn parse_f64_flag(text: &str, name: &str) -> std::result::Result<f64, Usage> {
    text.parse()
        .map_err(|_| Usage(format!("--{name} must be a number")))
}

fn format_flag(command: &Command, default: &'static str) -> std::result::Result<String, Usage> {
    let value = command
        .options
        .get("format")
        .map(String::as_str)
        .unwrap_or(default);
    match value {
        "csv" | "json" | "text" => Ok(value.to_string()),
        other => Err(Usage(format!("unknown format {other:?}"))),
    }
}

/// Picks the arithmetic mode: an explicit `--mode` wins; otherwise fraction
/// literals anywhere in `--p`/`--q`/`--theta`/`--lambda` select rational.
fn resolve_mode(command: &Command) -> std::result::Result<ArithmeticMode, Usage> {
    if let Some(mode) = command.options.get("mode") {
        return match mode.as_str() {
            "float" => Ok(ArithmeticMode::Float64),
            "rational" => Ok(ArithmeticMode::Rational),
            other => Err(Usage(format!("unknown mode {other:?}"))),
        };
    }
    let fraction = ["p", "q", "p0", "theta", "lambda"]
        .iter()
        .filter_map(|name| command.options.get(*name))
        .any(|value| value.contains('/'));
    Ok(if fraction {
        ArithmeticMode::Rational
    } else {
        ArithmeticMode::Float64
    })
}

fn with_mode(
    command: &Command,
    float: impl FnOnce(&Command) -> std::result::Result<Result<String>, Usage>,
    rational: impl FnOnce(&Command) -> std::result::Result<Result<String>, Usage>,
) -> std::result::Result<Result<String>, Usage> {
    match resolve_mode(command)? {
        ArithmeticMode::Float64 => float(command),
        ArithmeticMode::Rational => rational(command),
    }
}

/// Parses `--p` (validated) and cross-checks an explicit `--p0` if present.
fn distribution_flag<S: Scalar>(
    command: &Command,
    name: &str,
) -> std::result::Result<Result<CouponDistribution<S>>, Usage> {
    let literal = required(command, name)?;
    let dist = match CouponDistribution::<S>::parse(literal) {
        Ok(dist) => dist,
        Err(error) => return Ok(Err(error)),
    };
    if name == "p" {
        if let Some(stated) = command.options.get("p0") {
            let stated = match parse_probability_literal(stated) {
                Ok(value) => S::from_rational(&value),
                Err(error) => return Ok(Err(error)),
            };
            let implied = dist.null_mass().to_f64();
            if (implied - stated.to_f64()).abs() > 1e-9 {
                return Ok(Err(Error::ConfigInvalid(format!(
                    "--p0 {} disagrees with the null mass {} implied by --p",
                    stated, implied
                ))));
            }
        }
    }
    Ok(Ok(dist))
}

fn scalar_flag<S: Scalar>(command: &Command, name: &str) -> std::result::Result<Result<S>, Usage> {
    let literal = required(command, name)?;
    Ok(parse_probability_literal(literal).map(|r| S::from_rational(&r)))
}

fn render_scalar<S: Scalar>(value: &S) -> serde_json::Value {
    match S::MODE {
        ArithmeticMode::Float64 => serde_json::json!(value.to_f64()),
        ArithmeticMode::Rational => serde_json::json!(value.to_string()),
    }
}

// ---- verb implementations --------------------------------------------------

fn run_dist<S: Scalar>(command: &Command) -> std::result::Result<Result<String>, Usage> {
    let c = parse_usize(command, "c")?;
    let method = command
        .options
        .get("method")
        .map(String::as_str)
        .unwrap_or("exact");
    let kmax = match command.options.get("kmax") {
        Some(text) => Some(parse_u64_flag(text, "kmax")?),
        None => None,
    };
    let format = format_flag(command, "csv")?;
    let p = match distribution_flag::<S>(command, "p")? {
        Ok(p) => p,
        Err(error) => return Ok(Err(error)),
    };
    match method {
        "exact" => {
            let curve = match kmax {
                Some(k) => survival_curve_to_k(&p, c, k),
                None => {
                    let delta = match command.options.get("delta") {
                        Some(text) => parse_f64_flag(text, "delta")?,
                        None => 1e-6,
                    };
                    survival_curve(&p, c, delta)
                }
            };
            Ok(curve.map(|curve| {
                if format == "json" {
                    format!("{}\n", curve.to_json())
                } else {
                    curve.to_csv()
                }
            }))
        }
        "composition" | "decomposition" | "markov" => {
            let Some(kmax) = kmax else {
                return Err(Usage(format!("--method {method} needs --kmax")));
            };
            let values: Result<Vec<S>> = match method {
                "composition" => (0..=kmax)
                    .map(|k| survival_by_compositions(&p, c, k))
                    .collect(),
                "decomposition" => (0..=kmax)
                    .map(|k| survival_by_decomposition(&p, c, k))
                    .collect(),
                _ => survival_markov_curve(&p, c, kmax),
            };
            Ok(values.map(|values| {
                if format == "json" {
                    let rendered: Vec<_> = values.iter().map(render_scalar).collect();
                    format!(
                        "{}\n",
                        serde_json::json!({
                            "mode": S::MODE.to_string(),
                            "method": method,
                            "values": rendered,
                        })
                    )
                } else {
                    let mut text = String::from("k,survival,cumulative\n");
                    for (k, v) in values.iter().enumerate() {
                        let cumulative = S::one() - v.clone();
                        text.push_str(&format!("{k},{v},{cumulative}\n"));
                    }
                    text
                }
            }))
        }
        "mc" => {
            let Some(kmax) = kmax else {
                return Err(Usage("--method mc needs --kmax".into()));
            };
            let replicates = match command.options.get("replicates") {
                Some(text) => parse_u64_flag(text, "replicates")?,
                None => 100_000,
            };
            let seed = match command.options.get("seed") {
                Some(text) => parse_u64_flag(text, "seed")?,
                None => 0x00C0_C00A,
            };
            // Sampling is float-mode regardless of how the literal parsed.
            let entries: Vec<f64> = p.entries().iter().map(Scalar::to_f64).collect();
            let as_float = match CouponDistribution::validate(entries) {
                Ok(dist) => dist,
                Err(error) => return Ok(Err(error)),
            };
            Ok(
                mc_survival_curve(&as_float, c, kmax, replicates, seed).map(|estimates| {
                    if format == "json" {
                        let rows: Vec<_> = estimates
                            .iter()
                            .enumerate()
                            .map(|(k, e)| {
                                serde_json::json!({
                                    "k": k,
                                    "estimate": e.estimate,
                                    "ci_low": e.ci_low(),
                                    "ci_high": e.ci_high(),
                                    "replicates": e.replicates,
                                    "seed": e.seed,
                                })
                            })
                            .collect();
                        format!("{}\n", serde_json::json!(rows))
                    } else {
                        mc_curve_to_csv(&estimates)
                    }
                }),
            )
        }
        other => Err(Usage(format!("unknown method {other:?}"))),
    }
}

fn run_expect<S: Scalar>(command: &Command) -> std::result::Result<Result<String>, Usage> {
    let c = parse_usize(command, "c")?;
    let format = format_flag(command, "text")?;
    let p = match distribution_flag::<S>(command, "p")? {
        Ok(p) => p,
        Err(error) => return Ok(Err(error)),
    };
    Ok(expectation(&p, c).map(|value| {
        if format == "json" {
            format!(
                "{}\n",
                serde_json::json!({ "expectation": render_scalar(&value) })
            )
        } else {
            format!("{value}\n")
        }
    }))
}

fn run_quantile<S: Scalar>(command: &Command) -> std::result::Result<Result<String>, Usage> {
    let c = parse_usize(command, "c")?;
    let delta = parse_f64_flag(required(command, "delta")?, "delta")?;
    let p = match distribution_flag::<S>(command, "p")? {
        Ok(p) => p,
        Err(error) => return Ok(Err(error)),
    };
    Ok(quantile(&p, c, delta).map(|k| format!("{k}\n")))
}

fn run_compare<S: Scalar>(command: &Command) -> std::result::Result<Result<String>, Usage> {
    let c = parse_usize(command, "c")?;
    let tol = match command.options.get("tol") {
        Some(text) => parse_f64_flag(text, "tol")?,
        None => match S::MODE {
            ArithmeticMode::Float64 => DEFAULT_TOL,
            ArithmeticMode::Rational => 0.0,
        },
    };
    let truncation = match command.options.get("delta") {
        Some(text) => parse_f64_flag(text, "delta")?,
        None if tol > 0.0 => tol / 2.0,
        None => DEFAULT_TOL,
    };
    let left = match distribution_flag::<S>(command, "p")? {
        Ok(p) => p,
        Err(error) => return Ok(Err(error)),
    };
    let right = match distribution_flag::<S>(command, "q")? {
        Ok(q) => q,
        Err(error) => return Ok(Err(error)),
    };
    let verdict = survival_curve(&left, c, truncation).and_then(|a| {
        let b = survival_curve(&right, c, truncation)?;
        stochastic_compare(&a, &b, tol)
    });
    Ok(verdict.map(|verdict| {
        format!(
            "{}\n",
            serde_json::to_string(&verdict).expect("verdict serializes")
        )
    }))
}

fn trace_output<S: Scalar>(trace: &TransformTrace<S>, format: &str) -> String {
    if format == "json" {
        let entries = |d: &CouponDistribution<S>| -> Vec<_> {
            d.entries().iter().map(render_scalar).collect()
        };
        let steps: Vec<_> = trace
            .steps
            .iter()
            .map(|step| {
                serde_json::json!({
                    "i": step.i,
                    "j": step.j,
                    "lambda": render_scalar(&step.lambda),
                    "result": entries(&step.result),
                })
            })
            .collect();
        format!(
            "{}\n",
            serde_json::json!({
                "mode": S::MODE.to_string(),
                "start": entries(&trace.start),
                "steps": steps,
            })
        )
    } else {
        let n = trace.start.n();
        let mut text = String::from("step,i,j,lambda");
        for position in 1..=n {
            text.push_str(&format!(",p{position}"));
        }
        text.push('\n');
        let join = |d: &CouponDistribution<S>| -> String {
            d.entries()
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        text.push_str(&format!("0,,,,{}\n", join(&trace.start)));
        for (index, step) in trace.steps.iter().enumerate() {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                index + 1,
                step.i,
                step.j,
                step.lambda,
                join(&step.result)
            ));
        }
        text
    }
}

fn run_transform<S: Scalar>(command: &Command) -> std::result::Result<Result<String>, Usage> {
    let format = format_flag(command, "csv")?;
    let p = match distribution_flag::<S>(command, "p")? {
        Ok(p) => p,
        Err(error) => return Ok(Err(error)),
    };
    let subverb = command.subverb.as_deref().unwrap_or_default();
    let trace: Result<TransformTrace<S>> = match subverb {
        "uniformize" => match command.options.get("pairs") {
            None => Ok(uniformize_trace(&p)),
            Some(text) => {
                let pairs = parse_pairs(text)?;
                uniformize_trace_with_pairs(&p, &pairs)
            }
        },
        "maximize" => {
            let j = parse_usize(command, "j")?;
            match scalar_flag::<S>(command, "theta")? {
                Ok(theta) => maximize_trace(&p, &theta, j),
                Err(error) => Ok(Err(error))?,
            }
        }
        "lambda" => {
            let i = parse_usize(command, "i")?;
            let j = parse_usize(command, "j")?;
            match scalar_flag::<S>(command, "lambda")? {
                Ok(lambda) => lambda_transform(&p, i, j, &lambda).map(|result| {
                    let step = crate::probmodel::TransformStep {
                        i,
                        j,
                        lambda,
                        result,
                    };
                    TransformTrace {
                        start: p.clone(),
                        steps: vec![step],
                    }
                }),
                Err(error) => Ok(Err(error))?,
            }
        }
        other => {
            return Err(Usage(format!(
                "unknown transform {other:?}; expected uniformize, maximize, or lambda"
            )))
        }
    };
    Ok(trace.map(|trace| trace_output(&trace, &format)))
}

fn parse_pairs(text: &str) -> std::result::Result<Vec<(usize, usize)>, Usage> {
    text.split(',')
        .map(|pair| {
            let (i, j) = pair
                .split_once(':')
                .ok_or_else(|| Usage(format!("pair {pair:?} is not of the form i:j")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Usage(format!("pair {pair:?} is not of the form i:j")))
            };
            Ok((parse(i)?, parse(j)?))
        })
        .collect()
}

fn run_extremal<S: Scalar>(command: &Command) -> std::result::Result<Result<String>, Usage> {
    let n = parse_usize(command, "n")?;
    let j = match command.options.get("j") {
        Some(text) => text
            .parse()
            .map_err(|_| Usage("--j must be a positive integer".into()))?,
        None => 1,
    };
    let format = format_flag(command, "text")?;
    let theta = match scalar_flag::<S>(command, "theta")? {
        Ok(theta) => theta,
        Err(error) => return Ok(Err(error)),
    };
    let null_mass = match scalar_flag::<S>(command, "p0")? {
        Ok(p0) => p0,
        Err(error) => return Ok(Err(error)),
    };
    let member = ThetaFamily::new(n, null_mass, theta).and_then(|family| family.extremal_member(j));
    Ok(member.map(|member| {
        if format == "json" {
            let entries: Vec<_> = member.entries().iter().map(render_scalar).collect();
            format!("{}\n", serde_json::json!({ "entries": entries }))
        } else {
            let joined = member
                .entries()
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",");
            format!("{joined}\n")
        }
    }))
}

fn run_timer(command: &Command) -> std::result::Result<Result<String>, Usage> {
    let n = parse_usize(command, "n")?;
    let c = parse_usize(command, "c")?;
    let theta = parse_f64_flag(required(command, "theta")?, "theta")?;
    let p0 = parse_f64_flag(required(command, "p0")?, "p0")?;
    let delta = parse_f64_flag(required(command, "delta")?, "delta")?;
    Ok(dimension_timer(n, c, theta, p0, delta).map(|k| format!("{k}\n")))
}

fn run_simulate(command: &Command) -> std::result::Result<Result<String>, Usage> {
    let path = required(command, "config")?;
    let outcome = (|| -> Result<String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("{path}: {e}")))?;
        let config = SimConfig::from_json(&text)?;
        let report = run_simulation(&config)?;
        if let Some(csv_path) = command.options.get("samples-csv") {
            std::fs::write(csv_path, report.samples_to_csv())
                .map_err(|e| Error::ConfigInvalid(format!("{csv_path}: {e}")))?;
        }
        let rendered = format!("{}\n", report.to_json());
        if let Some(out_path) = command.options.get("out") {
            std::fs::write(out_path, &rendered)
                .map_err(|e| Error::ConfigInvalid(format!("{out_path}: {e}")))?;
            Ok(String::new())
        } else {
            Ok(rendered)
        }
    })();
    Ok(outcome)
}

fn run_verify(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Exec {
    let seed = match command.options.get("seed") {
        Some(text) => parse_u64_flag(text, "seed")?,
        None => 0x05EE_DCC7,
    };
    let tol = match command.options.get("tol") {
        Some(text) => parse_f64_flag(text, "tol")?,
        None => DEFAULT_TOL,
    };
    let format = format_flag(command, "text")?;
    let outcomes = run_all_suites(seed, tol);
    let all_passed = outcomes.iter().all(|o| o.passed());
    if format == "json" {
        let _ = writeln!(
            out,
            "{}",
            serde_json::json!({
                "seed": seed,
                "tol": tol,
                "suites": outcomes,
                "passed": all_passed,
            })
        );
    } else {
        for outcome in &outcomes {
            let _ = writeln!(
                out,
                "suite {:<32} {} ({} instances)",
                outcome.name,
                if outcome.passed() { "PASS" } else { "FAIL" },
                outcome.instances
            );
            for failure in outcome.failures.iter().take(5) {
                let _ = writeln!(err, "  counterexample: {failure}");
            }
        }
    }
    Ok(if all_passed { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let args: Vec<String> = args.iter().map(ToString::to_string).collect();
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = dispatch(&args, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn dist_exact_fractions() {
        let (code, out, _) = run(&[
            "dist", "--p", "1/2,1/2", "--c", "2", "--kmax", "5", "--method", "exact",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<_> = out.lines().collect();
        assert_eq!(lines[0], "k,survival,cumulative");
        assert_eq!(lines[1], "0,1,0");
        assert_eq!(lines[2], "1,1,0");
        assert_eq!(lines[3], "2,1/2,1/2");
        assert_eq!(lines[4], "3,1/4,3/4");
        assert_eq!(lines[5], "4,1/8,7/8");
        assert_eq!(lines[6], "5,1/16,15/16");
    }

    #[test]
    fn dist_methods_agree() {
        for method in ["exact", "composition", "decomposition", "markov"] {
            let (code, out, _) = run(&[
                "dist", "--p", "0.5,0.3", "--c", "2", "--kmax", "4", "--method", method,
            ]);
            assert_eq!(code, 0, "method {method}");
            let line: Vec<_> = out.lines().nth(3).unwrap().split(',').collect();
            let survival: f64 = line[1].parse().unwrap();
            assert!(
                (survival - 0.70).abs() < 1e-10,
                "method {method}: {survival}"
            );
        }
    }

    #[test]
    fn transform_uniformize_reproduces_trace_with_pairs() {
        let (code, out, _) = run(&[
            "transform",
            "uniformize",
            "--p",
            "1/16,1/6,1/4,1/8,19/48",
            "--pairs",
            "4:5,2:5,1:3,3:5",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<_> = out.lines().collect();
        assert_eq!(lines[1], "0,,,,1/16,1/6,1/4,1/8,19/48");
        assert_eq!(lines[2], "1,4,5,47/65,1/16,1/6,1/4,1/5,77/240");
        assert_eq!(lines[3], "2,2,5,29/37,1/16,1/5,1/4,1/5,23/80");
        assert_eq!(lines[4], "3,1,3,4/15,1/5,1/5,9/80,1/5,23/80");
        assert_eq!(lines[5], "4,3,5,1/2,1/5,1/5,1/5,1/5,1/5");
    }

    #[test]
    fn transform_maximize_paper_trace() {
        let (code, out, _) = run(&[
            "transform",
            "maximize",
            "--p",
            "1/16,1/6,1/4,1/8,71/240",
            "--theta",
            "1/20",
            "--j",
            "4",
        ]);
        assert_eq!(code, 0);
        assert!(out
            .lines()
            .last()
            .unwrap()
            .ends_with("1/20,1/20,1/20,7/10,1/20"));
    }

    #[test]
    fn timer_fixture() {
        let (code, out, _) = run(&[
            "timer", "--n", "2", "--c", "2", "--theta", "0.25", "--p0", "0.2", "--delta", "0.1",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "9");
    }

    #[test]
    fn expect_and_quantile() {
        let (code, out, _) = run(&["expect", "--p", "1/2,1/2", "--c", "2"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "3");

        let (code, out, _) = run(&["quantile", "--p", "0.5,0.5", "--c", "2", "--delta", "0.05"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "6");
    }

    #[test]
    fn compare_emits_verdict_json() {
        let (code, out, _) = run(&[
            "compare",
            "--p",
            "0.25,0.25,0.25,0.25",
            "--q",
            "0.7,0.1,0.1,0.1",
            "--c",
            "2",
        ]);
        assert_eq!(code, 0);
        assert!(out.contains("\"left_st_smaller\""));
        let verdict: crate::ordering::DominanceVerdict = serde_json::from_str(out.trim()).unwrap();
        assert!(verdict.holds_left());
    }

    #[test]
    fn usage_errors_exit_two() {
        let (code, _, err) = run(&["dist", "--p", "0.5,0.5"]);
        assert_eq!(code, 2);
        assert!(err.contains("--c"));

        let (code, _, err) = run(&["dist", "--p", "0.5,0.5", "--c", "2", "--bogus", "1"]);
        assert_eq!(code, 2);
        assert!(err.contains("unknown flag"));

        let (code, _, err) = run(&["frobnicate"]);
        assert_eq!(code, 2);
        assert!(err.contains("usage:"));
    }

    #[test]
    fn domain_errors_exit_one() {
        let (code, _, err) = run(&["dist", "--p", "0.7,0.4", "--c", "2", "--kmax", "3"]);
        assert_eq!(code, 1);
        assert!(err.contains("exceeds one"));

        let (code, _, err) = run(&["expect", "--p", "0.5,0.3", "--p0", "0.1", "--c", "2"]);
        assert_eq!(code, 1);
        assert!(err.contains("disagrees"));

        let (code, _, _) = run(&["simulate", "--config", "/nonexistent/sim.json"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn extremal_member_output() {
        let (code, out, _) = run(&[
            "extremal", "--n", "5", "--theta", "1/20", "--p0", "1/10", "--j", "4",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "1/20,1/20,1/20,7/10,1/20");
    }

    #[test]
    fn mode_flag_overrides_inference() {
        let (code, out, _) = run(&["expect", "--p", "1/2,1/2", "--c", "2", "--mode", "float"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "3");
        // Rational mode prints exact thirds rather than a rounded decimal.
        let (code, out, _) = run(&["expect", "--p", "1/4,1/4,1/4,1/4", "--c", "4"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "25/3");
    }
}
