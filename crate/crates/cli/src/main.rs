//! `valz`: batch front end to the valz engine.

mod system;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use valz_core::chain::{build_sigma_chain, SigmaSchedule};
use valz_core::congruence::count_system;
use valz_core::formula::{
    decide_with, eliminate_with, evaluate_qf, find_witness, parse, DecideOptions, Env, Formula, Relations, Sort,
    DEFAULT_MAX_DNF,
};
use valz_core::oracle::{brute_count, brute_decide};
use valz_core::{ChainSpecFile, Error, ValuationChain, ValueElement};

/// Joint-assignment budget handed to the brute-force oracle.
const ORACLE_BUDGET: u128 = 1_000_000;
/// Value bound for the oracle when the engine runs with its own horizon.
const ORACLE_VALUE_BOUND: u64 = 6;
/// Levels listed by `chain-info` past the prefix.
const INFO_CYCLES: usize = 2;

#[derive(Parser, Debug)]
#[command(name = "valz", version, about = "Decision procedures for (Z, +, 0, 1, v)")]
struct Cli {
    /// Chain-spec JSON file.
    #[arg(long, global = true, value_name = "FILE")]
    chain: Option<PathBuf>,
    /// Re-check the answer with the brute-force oracle.
    #[arg(long, global = true)]
    oracle: bool,
    /// Print one JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Print a witness for `E x:G. ...` sentences.
    #[arg(long, global = true)]
    witness: bool,
    /// Cap on DNF clauses.
    #[arg(long, global = true, value_name = "N", default_value_t = DEFAULT_MAX_DNF)]
    max_dnf: usize,
    /// Instantiate value quantifiers over {-inf, 0..N, +inf}.
    #[arg(long, global = true, value_name = "N")]
    value_bound: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide a sentence.
    Decide { formula: String },
    /// Count solutions of a congruence system modulo its boundary.
    Count { system: String },
    /// Eliminate the outer group quantifier of `E x:G. ...` or `A x:G. ...`.
    Qe { formula: String },
    /// Distality report for the chain.
    Distal,
    /// Moduli, quotients and distality of the chain.
    ChainInfo,
    /// Check the definability gadget for `w` on 0 < |a|, |b| <= RANGE.
    RetractCheck {
        #[arg(allow_negative_numbers = true)]
        p0: i128,
        #[arg(allow_negative_numbers = true)]
        p1: i128,
        #[arg(allow_negative_numbers = true)]
        q: i128,
        /// `id`, `swap`, or letters `i`/`s` with the last one repeating.
        pattern: String,
        #[arg(allow_negative_numbers = true)]
        range: i128,
    },
}

/// Failures that end the process, with their exit codes.
#[derive(Debug)]
enum Failure {
    Engine(Error),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch(_) => 5,
            Failure::Engine(e) => match e {
                Error::Parse { .. }
                | Error::ChainSpec { .. }
                | Error::Sort { .. }
                | Error::Usage(_)
                | Error::Domain(_)
                | Error::Precondition(_)
                | Error::DepthExceeded { .. } => 2,
                Error::Unsupported(_) => 3,
                Error::Resource(_) | Error::Overflow(_) => 4,
                Error::Internal(_) => 1,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Mismatch(_) => "oracle_mismatch",
            Failure::Engine(e) => match e {
                Error::Parse { .. } => "parse",
                Error::ChainSpec { .. } => "chain_spec",
                Error::Sort { .. } => "sort",
                Error::Usage(_) => "usage",
                Error::Domain(_) => "domain",
                Error::Precondition(_) => "precondition",
                Error::DepthExceeded { .. } => "depth_exceeded",
                Error::Unsupported(_) => "unsupported",
                Error::Resource(_) => "resource",
                Error::Overflow(_) => "overflow",
                Error::Internal(_) => "internal",
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Mismatch(m) => format!("oracle mismatch: {m}"),
            Failure::Engine(e) => e.to_string(),
        }
    }
}

/// What a command prints: text lines and the JSON object mirroring them.
struct Report {
    text: Vec<String>,
    json: Value,
    /// A failure found after the answer was computed (oracle trouble).
    failure: Option<Failure>,
}

impl Report {
    fn new(text: Vec<String>, json: Value) -> Self {
        Report {
            text,
            json,
            failure: None,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli);
    let (report, failure) = match outcome {
        Ok(mut r) => {
            let f = r.failure.take();
            (Some(r), f)
        }
        Err(f) => (None, Some(f)),
    };
    if cli.json {
        let mut out = report.map_or_else(|| json!({}), |r| r.json);
        if let Some(f) = &failure {
            out["error"] = json!({"kind": f.kind(), "message": f.message(), "exit_code": f.code()});
        }
        println!("{out}");
    } else {
        if let Some(r) = report {
            for line in r.text {
                println!("{line}");
            }
        }
        if let Some(f) = &failure {
            eprintln!("error: {}", f.message());
            if let (Failure::Engine(Error::Parse { pos, .. }), Some(input)) = (f, cli.command.input()) {
                eprintln!("  {input}");
                eprintln!("  {}^", " ".repeat(input[..(*pos).min(input.len())].chars().count()));
            }
        }
    }
    ExitCode::from(failure.map_or(0, |f| f.code()))
}

impl Command {
    fn input(&self) -> Option<&str> {
        match self {
            Command::Decide { formula } | Command::Qe { formula } => Some(formula),
            Command::Count { system } => Some(system),
            _ => None,
        }
    }
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::Decide { formula } => cmd_decide(cli, &load_chain(cli)?, formula),
        Command::Count { system } => cmd_count(cli, &load_chain(cli)?, system),
        Command::Qe { formula } => cmd_qe(cli, &load_chain(cli)?, formula),
        Command::Distal => cmd_distal(&load_chain(cli)?),
        Command::ChainInfo => cmd_chain_info(cli),
        Command::RetractCheck {
            p0,
            p1,
            q,
            pattern,
            range,
        } => cmd_retract_check(*p0, *p1, *q, pattern, *range),
    }
}

fn load_spec(cli: &Cli) -> Result<ChainSpecFile, Error> {
    let path = cli
        .chain
        .as_ref()
        .ok_or_else(|| Error::Usage("this command needs --chain FILE".into()))?;
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    ChainSpecFile::parse(&text)
}

fn load_chain(cli: &Cli) -> Result<ValuationChain, Error> {
    load_spec(cli)?.to_chain()
}

fn options(cli: &Cli) -> DecideOptions {
    DecideOptions {
        value_bound: cli.value_bound,
        max_dnf: cli.max_dnf,
        relations: Relations::new(),
    }
}

/// A JSON number, or a decimal string past the 64-bit range.
fn num(n: i128) -> Value {
    i64::try_from(n).map_or_else(|_| json!(n.to_string()), |n| json!(n))
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn cmd_decide(cli: &Cli, chain: &ValuationChain, text: &str) -> Result<Report, Failure> {
    let sentence = parse(text)?;
    let opts = options(cli);
    let start = Instant::now();
    let answer = decide_with(&sentence, chain, &opts)?;
    let existential = matches!(sentence, Formula::Exists { sort: Sort::Group, .. });
    let witness = if cli.witness && existential && answer {
        find_witness(&sentence, chain, &opts)?
    } else {
        None
    };
    let ms = elapsed_ms(start);
    let mut text = vec![answer.to_string()];
    if let Some(w) = witness {
        text.push(format!("witness: {w}"));
    }
    text.push(format!("time: {ms:.3} ms"));
    let mut json = json!({
        "command": "decide",
        "formula": sentence.to_string(),
        "result": answer,
        "witness": witness,
        "elapsed_ms": ms,
        "oracle": Value::Null,
        "oracle_value_bound": Value::Null,
    });
    let mut report = Report::new(text, Value::Null);
    if cli.oracle {
        let bound = cli.value_bound.unwrap_or(ORACLE_VALUE_BOUND);
        json["oracle_value_bound"] = json!(bound);
        // The oracle decides the bounded semantics; with value quantifiers and
        // no explicit bound the engine is re-run at the oracle's bound.
        let compared = if cli.value_bound.is_none() && binds_values(&sentence) {
            let bounded = DecideOptions {
                value_bound: Some(bound),
                ..opts.clone()
            };
            let b = decide_with(&sentence, chain, &bounded)?;
            if b != answer {
                report
                    .text
                    .push(format!("note: at value bound {bound} the engine says {b}"));
            }
            b
        } else {
            answer
        };
        match brute_decide(&sentence, chain, ORACLE_BUDGET, bound) {
            Ok(o) => {
                json["oracle"] = json!(o);
                report.text.push(format!("oracle: {o}"));
                if o != compared {
                    report.failure = Some(Failure::Mismatch(format!(
                        "engine says {compared}, oracle says {o} (value bound {bound})"
                    )));
                }
            }
            Err(e) => report.failure = Some(Failure::Engine(e)),
        }
    }
    report.json = json;
    Ok(report)
}

fn binds_values(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) => false,
        Formula::Not(g) => binds_values(g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => binds_values(a) || binds_values(b),
        Formula::Exists { sort, body, .. } | Formula::Forall { sort, body, .. } => {
            *sort == Sort::Value || binds_values(body)
        }
    }
}

fn cmd_count(cli: &Cli, chain: &ValuationChain, text: &str) -> Result<Report, Failure> {
    let sys = system::parse_system(text)?;
    let c = count_system(&sys, chain)?;
    let mut report = Report::new(
        vec![c.to_string()],
        json!({
            "command": "count",
            "count": num(c.count),
            "modulus": num(c.boundary_modulus.value()),
            "solvable": c.solvable,
            "witness": c.witness.map(num),
            "oracle": Value::Null,
        }),
    );
    if cli.witness {
        report.text.push(match c.witness {
            Some(w) => format!("witness: {w}"),
            None => "witness: none".into(),
        });
    }
    if cli.oracle {
        match brute_count(&sys, chain) {
            Ok(b) => {
                report.json["oracle"] = num(b);
                report.text.push(format!("oracle: {b}"));
                report.failure = check_count(c.count, b).err();
            }
            Err(e) => report.failure = Some(Failure::Engine(e)),
        }
    }
    Ok(report)
}

fn check_count(engine: i128, oracle: i128) -> Result<(), Failure> {
    if engine == oracle {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!(
            "engine counts {engine}, oracle counts {oracle}"
        )))
    }
}

/// Parameter values tried by `qe --oracle`.
const QE_GROUP_SAMPLES: std::ops::RangeInclusive<i128> = -12..=12;
const QE_VALUE_SAMPLES: [ValueElement; 6] = [
    ValueElement::NegInf,
    ValueElement::Fin(0),
    ValueElement::Fin(1),
    ValueElement::Fin(2),
    ValueElement::Fin(3),
    ValueElement::PosInf,
];

fn cmd_qe(cli: &Cli, chain: &ValuationChain, text: &str) -> Result<Report, Failure> {
    let f = parse(text)?;
    let relations = Relations::new();
    let out = match &f {
        Formula::Exists {
            var,
            sort: Sort::Group,
            body,
        } => eliminate_with(var, body, chain, cli.max_dnf, &relations)?,
        Formula::Forall {
            var,
            sort: Sort::Group,
            body,
        } => Formula::not(eliminate_with(
            var,
            &Formula::not((**body).clone()),
            chain,
            cli.max_dnf,
            &relations,
        )?),
        _ => {
            return Err(Error::Usage("qe expects `E x:G. ...` or `A x:G. ...`".into()).into());
        }
    };
    let mut report = Report::new(
        vec![out.to_string()],
        json!({
            "command": "qe",
            "input": f.to_string(),
            "output": out.to_string(),
            "oracle_instances": Value::Null,
        }),
    );
    if cli.oracle {
        match qe_oracle(&f, &out, chain) {
            Ok(n) => {
                report.json["oracle_instances"] = json!(n);
                report.text.push(format!("oracle: {n} instantiations agree"));
            }
            Err(e) => report.failure = Some(e),
        }
    }
    Ok(report)
}

/// Compare the eliminated formula with the oracle on sampled parameters.
fn qe_oracle(f: &Formula, out: &Formula, chain: &ValuationChain) -> Result<usize, Failure> {
    let mut envs = vec![(f.clone(), Env::new())];
    for (var, sort) in f.free_vars() {
        let mut next = Vec::new();
        for (g, env) in &envs {
            match sort {
                Sort::Group => {
                    for y in QE_GROUP_SAMPLES {
                        let t = valz_core::formula::LinearTerm::constant(y);
                        next.push((g.substitute_group(&var, &t)?, env.clone().with_group(&var, y)));
                    }
                }
                Sort::Value => {
                    for i in QE_VALUE_SAMPLES {
                        next.push((g.substitute_value(&var, i), env.clone().with_value(&var, i)));
                    }
                }
            }
        }
        if next.len() > 10_000 {
            return Err(Error::Resource("too many parameter combinations for the oracle".into()).into());
        }
        envs = next;
    }
    for (closed, env) in &envs {
        let want = brute_decide(closed, chain, ORACLE_BUDGET, ORACLE_VALUE_BOUND)?;
        let got = evaluate_qf(out, env, chain)?;
        if want != got {
            return Err(Failure::Mismatch(format!(
                "at {env:?} the input is {want} and the output is {got}"
            )));
        }
    }
    Ok(envs.len())
}

fn cmd_distal(chain: &ValuationChain) -> Result<Report, Failure> {
    let r = chain.distality_report()?;
    Ok(Report::new(
        vec![r.to_string()],
        json!({"command": "distal", "verdict": r.verdict, "bound": r.bound.map(num)}),
    ))
}

fn cmd_chain_info(cli: &Cli) -> Result<Report, Failure> {
    let spec = load_spec(cli)?;
    let chain = spec.to_chain()?;
    let levels = chain.prefix().len() + INFO_CYCLES * chain.cycle().map_or(0, <[i128]>::len);
    let moduli = (0..=levels as u64)
        .map(|i| chain.modulus(i))
        .collect::<Result<Vec<_>, _>>()?;
    let quotients = (0..levels as u64)
        .map(|i| chain.quotient_size(i))
        .collect::<Result<Vec<_>, _>>()?;
    let report = chain.distality_report()?;
    let list = |xs: &[i128]| xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
    let mut text = Vec::new();
    if let Some(n) = &spec.name {
        text.push(format!("name: {n}"));
    }
    text.push(format!("ambient: {}", chain.ambient()));
    text.push(format!("prefix: [{}]", list(chain.prefix())));
    text.push(match chain.cycle() {
        Some(c) => format!("cycle: [{}]", list(c)),
        None => "cycle: none".into(),
    });
    text.push(format!("moduli n_0..n_{levels}: [{}]", list(&moduli)));
    text.push(format!("quotients |B_i/B_i+1|: [{}]", list(&quotients)));
    text.push(format!("distality: {report}"));
    let strings = |xs: &[i128]| xs.iter().copied().map(num).collect::<Vec<_>>();
    Ok(Report::new(
        text,
        json!({
            "command": "chain-info",
            "name": spec.name,
            "ambient": chain.ambient().to_string(),
            "prefix": strings(chain.prefix()),
            "cycle": chain.cycle().map(strings),
            "moduli": strings(&moduli),
            "quotients": strings(&quotients),
            "distality": {"verdict": report.verdict, "bound": report.bound.map(num)},
        }),
    ))
}

fn cmd_retract_check(p0: i128, p1: i128, q: i128, pattern: &str, range: i128) -> Result<Report, Failure> {
    let sched = SigmaSchedule::parse_pattern(pattern)?;
    let sc = build_sigma_chain(p0, p1, q, &sched, 0)?;
    let r = sc.retract_check(range)?;
    let verdict = if r.passed() { "pass" } else { "FAIL" };
    let text = vec![
        format!(
            "{:<8} {:>8} {:>14} {:>14} {:>8}  result",
            "pattern", "range", "pairs", "agreements", "classes"
        ),
        format!(
            "{:<8} {:>8} {:>14} {:>14} {:>8}  {verdict}",
            pattern, r.range, r.pairs, r.agreements, r.classes
        ),
    ];
    let mut report = Report::new(
        text,
        json!({
            "command": "retract-check",
            "p0": num(p0),
            "p1": num(p1),
            "q": num(q),
            "pattern": pattern,
            "range": num(r.range),
            "pairs": u64::try_from(r.pairs).map_or_else(|_| json!(r.pairs.to_string()), |n| json!(n)),
            "agreements": u64::try_from(r.agreements).map_or_else(|_| json!(r.agreements.to_string()), |n| json!(n)),
            "classes": r.classes,
            "passed": r.passed(),
            "first_disagreement": r.first_disagreement.map(|(a, b)| [num(a), num(b)]),
        }),
    );
    if let Some((a, b)) = r.first_disagreement {
        report.failure = Some(Failure::Mismatch(format!(
            "w_compare({a}, {b}) disagrees with the direct s-adic comparison"
        )));
    }
    Ok(report)
}
