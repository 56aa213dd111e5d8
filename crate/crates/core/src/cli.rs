//! The `tightcalc` command line.

use crate::derivation::{
    Derivation, System, check_derivation, derivation_from_json, derivation_to_json_string,
    render_tree, validate_metatheory,
};
use crate::eval::{DEFAULT_FUEL, StepLabel, eval_cbv, eval_gs, is_blocked};
use crate::harness::{FuzzReport, GenConfig, run_campaign};
use crate::syntax::{Calculus, Configuration, State, Term, parse_input};
use crate::synth::{SynthError, synthesize_tight, verify_soundness};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_FUEL: u8 = 3;

const EX1_SRC: &str = include_str!("../../../corpus/ex1.lam");
const EX2_SRC: &str = include_str!("../../../corpus/ex2.lam");
const PHI_T: &str = include_str!("../../../corpus/phi_t.json");
const PHI_C: &str = include_str!("../../../corpus/phi_c.json");

#[derive(Parser, Debug)]
#[command(
    name = "tightcalc",
    version,
    about = "Evaluate, type and verify weak CBV and global-state terms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CalcArg {
    Cbv,
    Gs,
}

impl CalcArg {
    fn calculus(self) -> Calculus {
        match self {
            CalcArg::Cbv => Calculus::Cbv,
            CalcArg::Gs => Calculus::Gs,
        }
    }

    fn system(self) -> System {
        match self {
            CalcArg::Cbv => System::V,
            CalcArg::Gs => System::Gs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a term or configuration and print its syntax tree.
    Parse {
        #[arg(long, value_enum, default_value = "cbv")]
        calculus: CalcArg,
        file: PathBuf,
    },
    /// Run the evaluator and print the trace.
    Eval {
        #[arg(long, value_enum, default_value = "cbv")]
        calculus: CalcArg,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        file: PathBuf,
    },
    /// Check a derivation file rule by rule.
    CheckDerivation { file: PathBuf },
    /// Synthesize a tight derivation by evaluation and subject expansion.
    Synth {
        #[arg(long, value_enum, default_value = "cbv")]
        calculus: CalcArg,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Check a derivation and compare its counters with evaluation. `-` reads stdin.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Random testing of the per-input properties.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
        #[arg(long, value_enum, default_value = "cbv")]
        calculus: CalcArg,
        #[arg(long)]
        normalizing_only: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Reproduce both worked examples end to end.
    Selftest,
}

/// An error with its exit code; the message goes to stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type Res = Result<(), Failure>;

fn read_source(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::new(EXIT_USAGE, format!("stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn load(path: &Path, calculus: Calculus) -> Result<Configuration, Failure> {
    let src = read_source(path)?;
    parse_input(&src, calculus)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn load_derivation(path: &Path) -> Result<(Derivation, System), Failure> {
    let src = read_source(path)?;
    derivation_from_json(&src)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn synth_failure(e: SynthError) -> Failure {
    let code = match e {
        SynthError::FuelExhausted(_) => EXIT_FUEL,
        SynthError::NotNormal(_) | SynthError::WrongSubject(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    };
    Failure::new(code, e.to_string())
}

/// Parses `args` (including the program name) and runs the command, writing
/// to `out`.
pub fn run_with(
    args: impl IntoIterator<Item = String>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let cli = Cli::try_parse_from(args).map_err(|e| {
        let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        Failure::new(code, e.to_string())
    })?;
    dispatch(cli.command, out)
}

/// Entry point for the binary.
pub fn run() -> ExitCode {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run_with(std::env::args(), &mut out) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(f) => {
            if f.code == EXIT_OK {
                let _ = write!(out, "{}", f.message);
            } else {
                eprintln!("{}", f.message.trim_end());
            }
            ExitCode::from(f.code)
        }
    }
}

fn io(e: std::io::Error) -> Failure {
    Failure::new(EXIT_FAILURE, e.to_string())
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Res {
    match cmd {
        Command::Parse { calculus, file } => {
            let c = load(&file, calculus.calculus())?;
            writeln!(out, "{:#?}", c.term).map_err(io)?;
            if !c.state.is_empty() {
                writeln!(out, "{:#?}", c.state).map_err(io)?;
            }
            Ok(())
        }
        Command::Eval {
            calculus,
            fuel,
            format,
            file,
        } => {
            let c = load(&file, calculus.calculus())?;
            eval(&c, calculus.calculus(), fuel, format, out)
        }
        Command::CheckDerivation { file } => {
            let (d, system) = load_derivation(&file)?;
            check(&d, system, out)
        }
        Command::Synth {
            calculus,
            fuel,
            file,
            output,
        } => {
            let c = load(&file, calculus.calculus())?;
            let d = synthesize_tight(&c, calculus.system(), fuel).map_err(synth_failure)?;
            let text = derivation_to_json_string(&d, calculus.system());
            match output {
                Some(path) => std::fs::write(&path, text + "\n")
                    .map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display()))),
                None => writeln!(out, "{text}").map_err(io),
            }
        }
        Command::Verify { file, fuel } => {
            let (d, system) = load_derivation(&file)?;
            verify(&d, system, fuel, out)
        }
        Command::Fuzz {
            seed,
            count,
            max_depth,
            calculus,
            normalizing_only,
            jobs,
            fuel,
        } => {
            let cfg = GenConfig {
                seed,
                max_depth,
                calculus: calculus.calculus(),
                normalizing_only,
                ..GenConfig::default()
            };
            fuzz(&cfg, count, jobs.max(1), fuel, out)
        }
        Command::Selftest => selftest(out),
    }
}

fn eval(
    c: &Configuration,
    calculus: Calculus,
    fuel: usize,
    format: Format,
    out: &mut dyn Write,
) -> Res {
    // (label, configuration) for every step, plus the final counts.
    let (initial, steps, exhausted) = match calculus {
        Calculus::Cbv => {
            let (trace, exhausted) = match eval_cbv(&c.term, fuel) {
                Ok(o) => (o.trace, false),
                Err(e) => (e.trace, true),
            };
            let lift = |t: Term| Configuration::new(t, State::empty());
            let steps: Vec<_> = trace.steps.into_iter().map(|(l, t)| (l, lift(t))).collect();
            (lift(trace.initial), steps, exhausted)
        }
        Calculus::Gs => match eval_gs(c, fuel) {
            Ok(o) => (o.trace.initial, o.trace.steps, false),
            Err(e) => (e.trace.initial, e.trace.steps, true),
        },
    };
    let last = steps.last().map(|(_, c)| c).unwrap_or(&initial).clone();
    let b = steps.iter().filter(|(l, _)| *l == StepLabel::Beta).count();
    let m = steps.len() - b;
    let fin = if is_blocked(&last) {
        "blocked"
    } else {
        "normal"
    };
    match format {
        Format::Text => {
            for (i, (label, c)) in steps.iter().enumerate() {
                writeln!(out, "step {} [{label}] {} | {}", i + 1, c.term, c.state).map_err(io)?;
            }
            if !exhausted {
                writeln!(out, "RESULT b={b} m={m} size={} final={fin}", last.size()).map_err(io)?;
            }
        }
        Format::Json => {
            let point = |c: &Configuration| json!({ "term": c.term.to_string(), "state": c.state.to_string() });
            let steps: Vec<_> = steps
                .iter()
                .map(|(l, c)| json!({ "label": l.to_string(), "term": c.term.to_string(), "state": c.state.to_string() }))
                .collect();
            let mut v = json!({ "initial": point(&initial), "steps": steps });
            if !exhausted {
                v["result"] = json!({ "b": b, "m": m, "size": last.size(), "final": fin });
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json")).map_err(io)?;
        }
    }
    if exhausted {
        return Err(Failure::new(
            EXIT_FUEL,
            format!("fuel exhausted after {fuel} steps"),
        ));
    }
    Ok(())
}

fn check(d: &Derivation, system: System, out: &mut dyn Write) -> Res {
    check_derivation(d, system).map_err(|v| {
        Failure::new(
            EXIT_FAILURE,
            format!("rule violation at path {:?}: {v}", v.path),
        )
    })?;
    write!(out, "{}", render_tree(d, system)).map_err(io)?;
    let meta = validate_metatheory(d, system);
    writeln!(
        out,
        "ok: {} nodes, counters {}",
        d.node_count(),
        d.counters().show(system)
    )
    .map_err(io)?;
    if !meta.all_passed() {
        return Err(Failure::new(
            EXIT_FAILURE,
            format!("metatheory check failed\n{meta}"),
        ));
    }
    Ok(())
}

fn verify(d: &Derivation, system: System, fuel: usize, out: &mut dyn Write) -> Res {
    let cert = verify_soundness(d, system, fuel).map_err(|e| match e {
        SynthError::Check(v) => Failure::new(
            EXIT_FAILURE,
            format!("rule violation at path {:?}: {v}", v.path),
        ),
        other => Failure::new(EXIT_FAILURE, other.to_string()),
    })?;
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&cert).expect("json")
    )
    .map_err(io)?;
    if cert.observed.is_none() {
        return Err(Failure::new(
            EXIT_FUEL,
            format!("fuel exhausted after {fuel} steps"),
        ));
    }
    if !cert.is_match() {
        return Err(Failure::new(EXIT_FAILURE, cert.diff.join("; ")));
    }
    Ok(())
}

fn fuzz(cfg: &GenConfig, count: usize, jobs: usize, fuel: usize, out: &mut dyn Write) -> Res {
    let shards: Vec<(GenConfig, usize)> = (0..jobs)
        .map(|i| {
            let share = count / jobs + usize::from(i < count % jobs);
            (
                GenConfig {
                    seed: cfg.seed.wrapping_add(i as u64),
                    ..cfg.clone()
                },
                share,
            )
        })
        .filter(|(_, n)| *n > 0)
        .collect();
    let reports: Vec<FuzzReport> = std::thread::scope(|s| {
        let handles: Vec<_> = shards
            .iter()
            .map(|(c, n)| s.spawn(move || run_campaign(c, *n, fuel)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fuzz worker panicked"))
            .collect()
    });
    let mut total = FuzzReport::default();
    for r in reports {
        total.inputs += r.inputs;
        total.discarded += r.discarded;
        total.failures.extend(r.failures);
        total.gaps.extend(r.gaps);
    }
    writeln!(
        out,
        "inputs={} discarded={} failures={} completeness_gaps={}",
        total.inputs,
        total.discarded,
        total.failures.len(),
        total.gaps.len()
    )
    .map_err(io)?;
    for f in &total.failures {
        writeln!(out, "FAIL {f}").map_err(io)?;
    }
    for g in &total.gaps {
        writeln!(out, "GAP {g}").map_err(io)?;
    }
    if total.failures.is_empty() && total.gaps.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_FAILURE, "property failures found"))
    }
}

fn selftest(out: &mut dyn Write) -> Res {
    let cases = [
        ("ex1", EX1_SRC, PHI_T, Calculus::Cbv, System::V),
        ("ex2", EX2_SRC, PHI_C, Calculus::Gs, System::Gs),
    ];
    let mut failed = false;
    for (name, src, golden, calculus, system) in cases {
        let result = selftest_case(src, golden, calculus, system);
        match &result {
            Ok(counters) => writeln!(out, "PASS {name}: counters {counters}").map_err(io)?,
            Err(msg) => {
                failed = true;
                writeln!(out, "FAIL {name}: {msg}").map_err(io)?;
            }
        }
    }
    if failed {
        Err(Failure::new(EXIT_FAILURE, "selftest failed"))
    } else {
        Ok(())
    }
}

fn selftest_case(
    src: &str,
    golden: &str,
    calculus: Calculus,
    system: System,
) -> Result<String, String> {
    let c = parse_input(src, calculus).map_err(|e| e.to_string())?;
    let d = synthesize_tight(&c, system, DEFAULT_FUEL).map_err(|e| e.to_string())?;
    let (g, gs) = derivation_from_json(golden).map_err(|e| e.to_string())?;
    if gs != system {
        return Err("golden derivation is for the other system".into());
    }
    check_derivation(&g, system).map_err(|e| e.to_string())?;
    if g.counters() != d.counters() {
        return Err(format!(
            "synthesized {} but the golden derivation has {}",
            d.counters().show(system),
            g.counters().show(system)
        ));
    }
    for deriv in [&d, &g] {
        let cert = verify_soundness(deriv, system, DEFAULT_FUEL).map_err(|e| e.to_string())?;
        if !cert.is_match() {
            return Err(cert.diff.join("; "));
        }
    }
    Ok(d.counters().show(system))
}
