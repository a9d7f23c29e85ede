//! `floer` command line: reads datum and invariant files, runs the engines
//! and prints one JSON report per invocation.
//!
//! Exit codes: 0 success, 1 validation violations or a failed comparison,
//! 2 malformed input or bad usage.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use floer_core::direct_sum::{decompose, direct_sum_homology};
use floer_core::floer_datum::{
    assemble_cyclic, assemble_level_zero, restrict_min_level, validate, DatumError, FloerDatum, Mode,
    Severity, ValidationReport,
};
use floer_core::graded_complex::{homology_q, homology_z, int_to_rational, ComplexError, GradedComplex, HomologyGroup};
use floer_core::novikov_floer::{build_novikov, evaluate_t0, hf_gamma, t_torsion, NovikovComplex, NovikovError};
use floer_core::oracle::{generate, GenMode, GeneratorConfig};
use floer_core::pairing_gluing::{
    assemble_relative, builtin_example_t2d2, glue_check, pair, ClosedInvariantTable, CountsFile, PairingError,
    RelativeInvariant,
};
use floer_core::series::{parse_rational, LaurentSeries, Rational, SeriesRecord, DEFAULT_TRUNCATION};
use floer_core::spectral_engine::{build_filtered, converge, SpectralPage};

#[derive(Debug, Parser)]
#[command(name = "floer", version, about = "Exact Floer chain complex engines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a datum against every structural rule.
    Validate { file: String },
    /// Homology of the datum's complex over a coefficient system.
    Homology {
        file: String,
        #[arg(long, value_enum)]
        coeff: Coeff,
        #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
        truncate: i64,
    },
    /// Pages of the lift-grade filtration spectral sequence.
    Spectral {
        file: String,
        #[arg(long)]
        max_page: Option<i64>,
    },
    /// Series complex of a torsion-novikov or gamma-laurent datum.
    Novikov {
        file: String,
        #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
        truncate: i64,
        #[arg(long)]
        eval_t0: bool,
        #[arg(long)]
        t_torsion: bool,
    },
    /// Pair two relative invariants.
    Pair {
        file: String,
        inv_a: String,
        inv_b: String,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        shift: i64,
        #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
        truncate: i64,
    },
    /// Compare a pairing with a table of closed invariants.
    Glue {
        file: String,
        inv_a: String,
        inv_b: String,
        #[arg(long)]
        closed: String,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        shift: i64,
        #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
        truncate: i64,
    },
    /// Built-in worked examples.
    Example {
        #[command(subcommand)]
        which: Example,
    },
    /// Generate a valid synthetic datum.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Coeff {
    Z,
    Q,
    /// Q[[t]]
    Qt,
    /// Q((t))
    Qtt,
}

#[derive(Debug, Subcommand)]
enum Example {
    /// One generator with invariant 1/(t - 1/t), paired with itself.
    T2d2 {
        #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
        truncate: i64,
    },
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    mode: String,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    points: usize,
    #[arg(long, default_value_t = 2)]
    ell: i64,
    #[arg(long, default_value_t = 2)]
    max_level: i64,
    #[arg(long, default_value = "1/2")]
    density: String,
    #[arg(long)]
    out: Option<String>,
}

/// Failure before a report can be produced; always exit code 2.
#[derive(Debug)]
struct Malformed(String);

impl<E: std::fmt::Display> From<E> for Malformed {
    fn from(e: E) -> Self {
        Malformed(e.to_string())
    }
}

struct Outcome {
    results: Value,
    violations: Vec<Value>,
    failed: bool,
}

impl Outcome {
    fn ok(results: Value) -> Self {
        Outcome { results, violations: Vec::new(), failed: false }
    }
}

struct Inputs<'a> {
    stdin: &'a mut dyn Read,
    stdin_used: bool,
    digest: Sha256,
}

impl Inputs<'_> {
    fn read(&mut self, path: &str) -> Result<String, Malformed> {
        let text = if path == "-" {
            if self.stdin_used {
                return Err(Malformed("standard input can only be read once".into()));
            }
            self.stdin_used = true;
            let mut s = String::new();
            self.stdin.read_to_string(&mut s).map_err(|e| Malformed(format!("stdin: {e}")))?;
            s
        } else {
            fs::read_to_string(path).map_err(|e| Malformed(format!("{path}: {e}")))?
        };
        self.digest.update((text.len() as u64).to_le_bytes());
        self.digest.update(text.as_bytes());
        Ok(text)
    }

    fn datum(&mut self, path: &str) -> Result<FloerDatum, Malformed> {
        let text = self.read(path)?;
        FloerDatum::from_json(&text).map_err(|e| Malformed(format!("{path}: {e}")))
    }
}

/// Runs one invocation. `args` excludes the program name.
pub fn run(args: &[String], stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let argv = std::iter::once("floer".to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(stderr, "{line}");
            return 2;
        }
    };
    let start = Instant::now();
    let mut inputs = Inputs { stdin, stdin_used: false, digest: Sha256::new() };
    let name = command_name(&cli.command);

    // gen without --out writes the datum itself
    if let Command::Gen(g) = &cli.command {
        if g.out.is_none() {
            return match gen_datum(g) {
                Ok(d) => {
                    let _ = writeln!(stdout, "{}", d.to_json());
                    0
                }
                Err(Malformed(m)) => {
                    let _ = writeln!(stderr, "{m}");
                    2
                }
            };
        }
    }

    let outcome = match dispatch(&cli.command, &mut inputs) {
        Ok(o) => o,
        Err(Malformed(m)) => {
            let _ = writeln!(stderr, "error: {}", m.lines().next().unwrap_or(""));
            return 2;
        }
    };
    let report = json!({
        "command": name,
        "input_digest": hex::encode(inputs.digest.finalize()),
        "results": outcome.results,
        "violations": outcome.violations,
        "timing_ms": start.elapsed().as_millis() as u64,
    });
    let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    i32::from(outcome.failed)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Homology { .. } => "homology",
        Command::Spectral { .. } => "spectral",
        Command::Novikov { .. } => "novikov",
        Command::Pair { .. } => "pair",
        Command::Glue { .. } => "glue",
        Command::Example { .. } => "example",
        Command::Gen(_) => "gen",
    }
}

fn dispatch(c: &Command, inputs: &mut Inputs<'_>) -> Result<Outcome, Malformed> {
    match c {
        Command::Validate { file } => cmd_validate(&inputs.datum(file)?),
        Command::Homology { file, coeff, truncate } => cmd_homology(&inputs.datum(file)?, *coeff, *truncate),
        Command::Spectral { file, max_page } => cmd_spectral(&inputs.datum(file)?, *max_page),
        Command::Novikov { file, truncate, eval_t0, t_torsion } => {
            cmd_novikov(&inputs.datum(file)?, *truncate, *eval_t0, *t_torsion)
        }
        Command::Pair { file, inv_a, inv_b, shift, truncate } => {
            let d = inputs.datum(file)?;
            let (a, b) = (counts(inputs, inv_a)?, counts(inputs, inv_b)?);
            cmd_pair(&d, &a, &b, None, *shift, *truncate)
        }
        Command::Glue { file, inv_a, inv_b, closed, shift, truncate } => {
            let d = inputs.datum(file)?;
            let (a, b) = (counts(inputs, inv_a)?, counts(inputs, inv_b)?);
            let text = inputs.read(closed)?;
            let table = ClosedInvariantTable::from_json(&text).map_err(|e| Malformed(format!("{closed}: {e}")))?;
            cmd_pair(&d, &a, &b, Some(&table), *shift, *truncate)
        }
        Command::Example { which: Example::T2d2 { truncate } } => cmd_t2d2(*truncate),
        Command::Gen(g) => {
            let d = gen_datum(g)?;
            let path = g.out.as_deref().expect("handled earlier");
            let text = d.to_json();
            fs::write(path, format!("{text}\n")).map_err(|e| Malformed(format!("{path}: {e}")))?;
            Ok(Outcome::ok(json!({
                "out": path,
                "mode": g.mode,
                "seed": g.seed,
                "points": d.points.len(),
                "flows": d.flows.len(),
                "datum_digest": hex::encode(Sha256::digest(format!("{text}\n").as_bytes())),
            })))
        }
    }
}

fn counts(inputs: &mut Inputs<'_>, path: &str) -> Result<CountsFile, Malformed> {
    let text = inputs.read(path)?;
    CountsFile::from_json(&text).map_err(|e| Malformed(format!("{path}: {e}")))
}

fn parse_density(s: &str) -> Result<Rational, Malformed> {
    if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{int}{frac}");
        let scale = format!("1{}", "0".repeat(frac.len()));
        return parse_rational(&format!("{digits}/{scale}")).map_err(Malformed::from);
    }
    parse_rational(s).map_err(Malformed::from)
}

fn gen_datum(g: &GenArgs) -> Result<FloerDatum, Malformed> {
    let mode: GenMode = g.mode.parse()?;
    let cfg = GeneratorConfig {
        mode,
        seed: g.seed,
        num_points: g.points,
        ell: g.ell,
        max_level: g.max_level,
        density: parse_density(&g.density)?,
    };
    Ok(generate(&cfg)?)
}

// ---------------------------------------------------------------------------
// Report pieces

fn violations_json(r: &ValidationReport) -> Vec<Value> {
    r.violations.iter().map(|v| serde_json::to_value(v).expect("violation serializes")).collect()
}

fn group_json(h: &HomologyGroup) -> Value {
    json!({
        "free_rank": h.free_rank,
        "torsion": h.torsion.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
    })
}

fn series_json(s: &LaurentSeries) -> Value {
    json!({ "series": s.to_string(), "record": SeriesRecord::from(s) })
}

/// Wraps an engine failure on a datum: validation failures become report
/// violations (exit 1), wrong modes are usage errors (exit 2).
fn datum_failure(e: DatumError) -> Result<Outcome, Malformed> {
    match e {
        DatumError::ValidationFailed(r) => Ok(Outcome {
            results: json!({ "passes": false }),
            violations: violations_json(&r),
            failed: true,
        }),
        other => Err(Malformed(other.to_string())),
    }
}

fn novikov_failure(e: NovikovError) -> Result<Outcome, Malformed> {
    match e {
        NovikovError::Datum(d) => datum_failure(d),
        NovikovError::Complex(c) => Ok(engine_failure(c)),
        other => Err(Malformed(other.to_string())),
    }
}

/// Precision failures are reported, not treated as malformed input.
fn engine_failure(e: ComplexError) -> Outcome {
    Outcome {
        results: json!({ "error": e.to_string() }),
        violations: vec![json!({
            "rule": "E1",
            "name": "EngineFailure",
            "severity": "error",
            "location": "engine",
            "detail": e.to_string(),
        })],
        failed: true,
    }
}

// ---------------------------------------------------------------------------
// Commands

fn cmd_validate(d: &FloerDatum) -> Result<Outcome, Malformed> {
    let r = validate(d);
    let warnings = r.violations.iter().filter(|v| v.severity == Severity::Warning).count();
    Ok(Outcome {
        results: json!({
            "mode": d.mode.to_string(),
            "ell": d.ell,
            "points": d.points.len(),
            "flows": d.flows.len(),
            "passes": r.passes(),
            "error_count": r.error_count(),
            "warning_count": warnings,
            "rules": r.rules().into_iter().collect::<Vec<_>>(),
        }),
        violations: violations_json(&r),
        failed: !r.passes(),
    })
}

fn z_and_q(c: &GradedComplex<BigInt>, coeff: Coeff, grades: Vec<i64>) -> Value {
    let per: BTreeMap<String, Value> = grades
        .into_iter()
        .map(|n| {
            let v = match coeff {
                Coeff::Z => group_json(&homology_z(c, n)),
                _ => json!(homology_q(c, n, int_to_rational)),
            };
            (n.to_string(), v)
        })
        .collect();
    json!(per)
}

fn cmd_homology(d: &FloerDatum, coeff: Coeff, truncate: i64) -> Result<Outcome, Malformed> {
    let warnings = violations_json(&validate(d));
    let mut out = match (d.mode, coeff) {
        (Mode::Nontorsion, Coeff::Z | Coeff::Q) => {
            let c = match assemble_cyclic(d) {
                Ok(c) => c,
                Err(e) => return datum_failure(e),
            };
            let mut results = json!({
                "coefficients": if matches!(coeff, Coeff::Z) { "Z" } else { "Q" },
                "grading": format!("Z/{}", d.ell),
                "homology": z_and_q(&c, coeff, (0..d.ell).collect()),
            });
            let mut failed = false;
            if d.block_diagonal {
                let b = decompose(d).map_err(Malformed::from)?;
                let rows: Vec<Value> = direct_sum_homology(&b)
                    .into_iter()
                    .map(|r| {
                        failed |= !r.matches;
                        json!({
                            "n": r.n,
                            "total": group_json(&r.total),
                            "blocks": r.blocks.iter().map(|(q, h)| (q.to_string(), group_json(h))).collect::<BTreeMap<_, _>>(),
                            "total_prime_powers": r.total_prime_powers,
                            "block_prime_powers": r.block_prime_powers,
                            "matches": r.matches,
                        })
                    })
                    .collect();
                results["direct_sum"] = json!(rows);
            }
            Outcome { results, violations: Vec::new(), failed }
        }
        (Mode::TorsionNovikov, Coeff::Z | Coeff::Q) => {
            let n = match build_novikov(d, truncate) {
                Ok(n) => n,
                Err(e) => return novikov_failure(e),
            };
            let c = evaluate_t0(&n).map_err(Malformed::from)?;
            Outcome::ok(json!({
                "coefficients": if matches!(coeff, Coeff::Z) { "Z" } else { "Q" },
                "grading": "Z",
                "evaluated_at": "t=0",
                "homology": z_and_q(&c, coeff, c.grades().collect()),
            }))
        }
        (Mode::TorsionNovikov, Coeff::Qt) => {
            let n = match build_novikov(d, truncate) {
                Ok(n) => n,
                Err(e) => return novikov_failure(e),
            };
            match t_torsion(&n) {
                Ok(tt) => Outcome::ok(json!({
                    "coefficients": "Q[[t]]",
                    "grading": "Z",
                    "truncation_order": truncate,
                    "homology": tt.iter().map(|(g, h)| (g.to_string(), json!({
                        "free_rank": h.free_rank,
                        "t_torsion_exponents": h.torsion,
                    }))).collect::<BTreeMap<_, _>>(),
                })),
                Err(e) => return novikov_failure(e),
            }
        }
        (Mode::TorsionNovikov | Mode::GammaLaurent, Coeff::Qtt) => {
            let n = match build_novikov(d, truncate) {
                Ok(n) => n,
                Err(e) => return novikov_failure(e),
            };
            match hf_gamma(&n) {
                Ok(dims) => Outcome::ok(json!({
                    "coefficients": "Q((t))",
                    "grading": "Z",
                    "truncation_order": truncate,
                    "homology": dims.iter().map(|(g, v)| (g.to_string(), json!(v))).collect::<BTreeMap<_, _>>(),
                })),
                Err(e) => return novikov_failure(e),
            }
        }
        (mode, coeff) => {
            return Err(Malformed(format!("coefficient system {coeff:?} is not available for {mode} data")))
        }
    };
    out.violations.extend(warnings);
    Ok(out)
}

fn page_json(p: &SpectralPage) -> Value {
    json!({
        "page": p.page_index,
        "cells": p.entries.iter().map(|(q, c)| json!({ "q": q, "n": c.n, "dim": c.dim() })).collect::<Vec<_>>(),
        "differentials": p.differential.iter().map(|(q, b)| json!({
            "from_q": q,
            "to_q": b.target_q,
            "rank": b.rank(),
        })).collect::<Vec<_>>(),
        "totals": p.totals().iter().map(|(n, v)| (n.to_string(), json!(v))).collect::<BTreeMap<_, _>>(),
        "euler_characteristic": p.euler_characteristic(),
    })
}

fn cmd_spectral(d: &FloerDatum, max_page: Option<i64>) -> Result<Outcome, Malformed> {
    if d.mode != Mode::Nontorsion {
        return Err(Malformed(format!("spectral needs a nontorsion datum, got {}", d.mode)));
    }
    let f = match build_filtered(d) {
        Ok(f) => f,
        Err(e) => return datum_failure(e),
    };
    let c = converge(&f, max_page);
    let agrees = c.agrees();
    Ok(Outcome {
        results: json!({
            "ell": f.ell(),
            "generators": f.len(),
            "stable_page": floer_core::spectral_engine::stable_page_index(&f),
            "pages": c.pages.iter().map(page_json).collect::<Vec<_>>(),
            "e_infinity": page_json(&c.e_infinity),
            "comparison": c.comparison.iter().map(|(n, (e, h))| (n.to_string(), json!({
                "e_infinity_total": e,
                "hf_rational": h,
            }))).collect::<BTreeMap<_, _>>(),
            "converges": agrees,
        }),
        violations: violations_json(&validate(d)),
        failed: !agrees,
    })
}

fn cmd_novikov(d: &FloerDatum, truncate: i64, eval: bool, torsion: bool) -> Result<Outcome, Malformed> {
    if d.mode == Mode::Nontorsion {
        return Err(Malformed("novikov needs a torsion-novikov or gamma-laurent datum".into()));
    }
    if (eval || torsion) && d.mode != Mode::TorsionNovikov {
        return Err(Malformed("--eval-t0 and --t-torsion need a torsion-novikov datum".into()));
    }
    let n = match build_novikov(d, truncate) {
        Ok(n) => n,
        Err(e) => return novikov_failure(e),
    };
    let mut results = json!({
        "mode": d.mode.to_string(),
        "truncation_order": truncate,
        "square_zero": n.square_zero_exact(),
        "entries": entries_json(&n),
    });
    match hf_gamma(&n) {
        Ok(dims) => {
            results["hf_laurent"] = json!(dims.iter().map(|(g, v)| (g.to_string(), json!(v))).collect::<BTreeMap<_, _>>())
        }
        Err(e) => return novikov_failure(e),
    }
    if eval {
        let c = evaluate_t0(&n).map_err(Malformed::from)?;
        let direct = assemble_level_zero(&restrict_min_level(d)).map_err(Malformed::from)?;
        results["eval_t0"] = json!({
            "homology": z_and_q(&c, Coeff::Z, c.grades().collect()),
            "matches_level_zero": c == direct,
        });
    }
    if torsion {
        match t_torsion(&n) {
            Ok(tt) => {
                results["t_torsion"] = json!(tt
                    .iter()
                    .map(|(g, h)| (g.to_string(), json!({ "free_rank": h.free_rank, "t_torsion_exponents": h.torsion })))
                    .collect::<BTreeMap<_, _>>())
            }
            Err(e) => return novikov_failure(e),
        }
    }
    let failed = !n.square_zero_exact() || results["eval_t0"]["matches_level_zero"] == json!(false);
    Ok(Outcome { results, violations: violations_json(&validate(d)), failed })
}

fn entries_json(n: &NovikovComplex) -> Vec<Value> {
    let c = n.laurent();
    let mut out = Vec::new();
    for (g, m) in c.boundaries() {
        for ((b, a), s) in m.entries() {
            out.push(json!({
                "from": c.generators(*g)[a],
                "to": c.generators(g - 1)[b],
                "series": s.to_string(),
            }));
        }
    }
    out
}

fn relative(
    counts: &CountsFile,
    n: &NovikovComplex,
) -> Result<Result<RelativeInvariant, Outcome>, Malformed> {
    match assemble_relative(&counts.counts, n, &counts.label) {
        Ok(r) => Ok(Ok(r)),
        Err(PairingError::NotACycle { image }) => Ok(Err(Outcome {
            results: json!({ "label": counts.label, "cycle": false }),
            violations: vec![json!({
                "rule": "P1",
                "name": "NotACycle",
                "severity": "error",
                "location": format!("invariant {}", counts.label),
                "detail": image.iter().map(|(k, v)| format!("{k}: {v}")).collect::<Vec<_>>().join("; "),
            })],
            failed: true,
        })),
        Err(e) => Err(Malformed(e.to_string())),
    }
}

fn cmd_pair(
    d: &FloerDatum,
    a: &CountsFile,
    b: &CountsFile,
    closed: Option<&ClosedInvariantTable>,
    shift: i64,
    truncate: i64,
) -> Result<Outcome, Malformed> {
    let n = match build_novikov(d, truncate) {
        Ok(n) => n,
        Err(NovikovError::Datum(DatumError::WrongMode { .. })) => {
            return Err(Malformed("pairing needs a torsion-novikov or gamma-laurent datum".into()))
        }
        Err(e) => return novikov_failure(e),
    };
    let x = match relative(a, &n)? {
        Ok(x) => x,
        Err(o) => return Ok(o),
    };
    let y = match relative(b, &n)? {
        Ok(y) => y,
        Err(o) => return Ok(o),
    };
    let p = pair(&x, &y).map_err(Malformed::from)?;
    let mut results = json!({
        "labels": [x.label, y.label],
        "grades": [x.grade, y.grade],
        "shift": shift,
        "pairing": series_json(&p.shift(shift)),
    });
    let mut failed = false;
    if let Some(table) = closed {
        let r = glue_check(&x, &y, table, shift).map_err(Malformed::from)?;
        failed = !r.all_match;
        results["glue"] = serde_json::to_value(&r).expect("report serializes");
    }
    Ok(Outcome { results, violations: Vec::new(), failed })
}

fn cmd_t2d2(truncate: i64) -> Result<Outcome, Malformed> {
    let ex = builtin_example_t2d2(truncate)?;
    let check = &ex.inverse_check;
    let is_one = check.terms().all(|(e, c)| e == 0 && c == &Rational::from_integer(1.into()))
        && check.coeff(0) == Rational::from_integer(1.into());
    let ok = ex.report.all_match && is_one;
    Ok(Outcome {
        results: json!({
            "truncation_order": truncate,
            "inverse": series_json(&ex.inverse),
            "inverse_check": {
                "product": check.to_string(),
                "is_one": is_one,
                "verified_through_degree": check.truncation_order() - 1,
            },
            "invariant": ex.invariant.chain.iter().map(|(k, v)| (k.clone(), series_json(v))).collect::<BTreeMap<_, _>>(),
            "pairing": series_json(&ex.pairing),
            "glue": serde_json::to_value(&ex.report).expect("report serializes"),
        }),
        violations: Vec::new(),
        failed: !ok,
    })
}
