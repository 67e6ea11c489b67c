//! Command-line front end.
//!
//! [`dispatch`] parses `argv`, runs one pipeline and writes its output. Exit
//! status is 0 on success, 1 when the input is well formed but the
//! mathematics says no (not a cover, modulus not constant, endpoints not
//! separated, ...), and 2 for usage, parse and I/O problems.

use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{self, AnalysisBuiltins, DiscreteMap, TargetSequence, Verdict};
use crate::cover::{self, CoverError, CoverList, Coverage, NiceModulus, SubcoverCertificate};
use crate::crn::{self, expr::ExprError, Level};
use crate::machine::{self, Program, RunOutcome};
use crate::rational::{self, ArithOp, Rational};

#[derive(Debug, Parser)]
#[command(name = "constructive", version, about = "Exact constructive reals, counter machines and finite subcovers of [0,1]")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact rational arithmetic.
    Rat {
        #[command(subcommand)]
        op: RatCommand,
    },
    /// Constructive real expressions.
    Crn {
        #[command(subcommand)]
        op: CrnCommand,
    },
    /// Step-counted counter machine.
    Machine {
        #[command(subcommand)]
        op: MachineCommand,
    },
    /// Waiting sequences over a monitored program.
    Waiting {
        #[command(subcommand)]
        op: WaitingCommand,
    },
    /// Probe a waiting sequence at finite precision and report what the run showed.
    Reduce(ReduceArgs),
    /// Bisect towards a point where a discrete map changes value.
    Bisect(BisectArgs),
    /// Lebesgue numbers, subcover extraction and verification.
    Cover {
        #[command(subcommand)]
        op: CoverCommand,
    },
}

#[derive(Debug, Subcommand)]
enum RatCommand {
    Add {
        #[arg(value_parser = parse_rational, allow_hyphen_values = true)]
        a: Rational,
        #[arg(value_parser = parse_rational, allow_hyphen_values = true)]
        b: Rational,
    },
    Sub {
        #[arg(value_parser = parse_rational, allow_hyphen_values = true)]
        a: Rational,
        #[arg(value_parser = parse_rational, allow_hyphen_values = true)]
        b: Rational,
    },
    Mul {
        #[arg(value_parser = parse_rational, allow_hyphen_values = true)]
        a: Rational,
        #[arg(value_parser = parse_rational, allow_hyphen_values = true)]
        b: Rational,
    },
    /// Prints less, equal or greater.
    Cmp {
        #[arg(value_parser = parse_rational, allow_hyphen_values = true)]
        a: Rational,
        #[arg(value_parser = parse_rational, allow_hyphen_values = true)]
        b: Rational,
    },
    /// Prints the canonical form.
    Norm {
        #[arg(value_parser = parse_rational, allow_hyphen_values = true)]
        a: Rational,
    },
}

#[derive(Debug, Subcommand)]
enum CrnCommand {
    /// Approximate an expression to within 2^-prec.
    Approx {
        /// e.g. `1/3 + 1/6 * waiting(prog.cm, 2)`
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long)]
        prec: Level,
    },
}

#[derive(Debug, Subcommand)]
enum MachineCommand {
    Run {
        #[arg(long)]
        prog: PathBuf,
        #[arg(long)]
        input: u64,
        #[arg(long)]
        budget: u64,
    },
    Dovetail {
        #[arg(long)]
        prog: PathBuf,
        /// Inclusive range `A..B`.
        #[arg(long, value_parser = parse_range)]
        inputs: RangeInclusive<u64>,
        #[arg(long)]
        budget: u64,
    },
}

#[derive(Debug, Subcommand)]
enum WaitingCommand {
    Approx {
        #[arg(long)]
        prog: PathBuf,
        #[arg(long)]
        input: u64,
        #[arg(long, default_value = "geometric", value_parser = parse_targets)]
        targets: TargetSequence,
        #[arg(long)]
        prec: Level,
    },
}

#[derive(Debug, Args)]
struct ReduceArgs {
    #[arg(long)]
    prog: PathBuf,
    #[arg(long)]
    input: u64,
    #[arg(long)]
    prec: Level,
    #[arg(long, default_value = "step@1", value_parser = parse_map)]
    probe: DiscreteMap,
}

#[derive(Debug, Args)]
struct BisectArgs {
    #[arg(long, value_parser = parse_map)]
    oracle: DiscreteMap,
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
    lo: Rational,
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
    hi: Rational,
    #[arg(long)]
    steps: u64,
    /// Write the tab-separated transcript here.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum CoverCommand {
    Lebesgue {
        #[arg(long)]
        cover: PathBuf,
    },
    Subcover {
        #[arg(long)]
        cover: PathBuf,
        /// `lebesgue` or `const:<r>`.
        #[arg(long, default_value = "lebesgue", value_parser = parse_modulus)]
        modulus: ModulusArg,
        /// Points where the modulus must agree, e.g. `0,1/4,1/2,3/4,1`.
        #[arg(long, value_parser = parse_rational_list)]
        samples: Option<RationalList>,
    },
    Verify {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        selected: String,
    },
    VerifyCert {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
}

#[derive(Debug, Clone)]
enum ModulusArg {
    Lebesgue,
    Const(Rational),
}

#[derive(Debug, Clone)]
struct RationalList(Vec<Rational>);

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_rational_list(s: &str) -> Result<RationalList, String> {
    s.split(',')
        .map(|x| parse_rational(x.trim()))
        .collect::<Result<_, _>>()
        .map(RationalList)
}

fn parse_range(s: &str) -> Result<RangeInclusive<u64>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let a: u64 = a.parse().map_err(|_| format!("bad range start {a:?}"))?;
    let b: u64 = b.parse().map_err(|_| format!("bad range end {b:?}"))?;
    if a > b {
        return Err(format!("empty range {s:?}"));
    }
    Ok(a..=b)
}

fn parse_map(s: &str) -> Result<DiscreteMap, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_targets(s: &str) -> Result<TargetSequence, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_modulus(s: &str) -> Result<ModulusArg, String> {
    if s == "lebesgue" {
        Ok(ModulusArg::Lebesgue)
    } else if let Some(r) = s.strip_prefix("const:") {
        Ok(ModulusArg::Const(parse_rational(r)?))
    } else {
        Err(format!("expected `lebesgue` or `const:<r>`, got {s:?}"))
    }
}

enum Failure {
    /// Exit 1.
    Domain(String),
    /// Exit 2.
    Usage(String),
}

impl From<CoverError> for Failure {
    fn from(e: CoverError) -> Self {
        match e {
            CoverError::Parse { .. }
            | CoverError::Rational(_)
            | CoverError::EmptyInterval { .. }
            | CoverError::SampleOutOfRange(_)
            | CoverError::NoSamples
            | CoverError::IndexOutOfRange { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<crn::CrnError> for Failure {
    fn from(e: crn::CrnError) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("cannot write output: {e}"))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    read(path)?
        .parse()
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_cover(path: &Path) -> Result<CoverList, Failure> {
    read(path)?
        .parse()
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Parses `argv` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                2
            } else {
                let _ = write!(out, "{e}");
                0
            };
            return code;
        }
    };
    match run(cli.command, out) {
        Ok(code) => code,
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn run(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Rat { op } => {
            match op {
                RatCommand::Add { a, b } => writeln!(out, "{}", rational::arith(&a, &b, ArithOp::Add))?,
                RatCommand::Sub { a, b } => writeln!(out, "{}", rational::arith(&a, &b, ArithOp::Sub))?,
                RatCommand::Mul { a, b } => writeln!(out, "{}", rational::arith(&a, &b, ArithOp::Mul))?,
                RatCommand::Cmp { a, b } => {
                    let word = match a.cmp(&b) {
                        std::cmp::Ordering::Less => "less",
                        std::cmp::Ordering::Equal => "equal",
                        std::cmp::Ordering::Greater => "greater",
                    };
                    writeln!(out, "{word}")?
                }
                RatCommand::Norm { a } => writeln!(out, "{a}")?,
            }
            Ok(0)
        }
        Command::Crn {
            op: CrnCommand::Approx { expr, prec },
        } => {
            let x = crn::expr::parse_crn(&expr, &AnalysisBuiltins::new(".")).map_err(|e| match e {
                ExprError::Crn(e) => Failure::Domain(e.to_string()),
                other => Failure::Usage(other.to_string()),
            })?;
            writeln!(out, "{} ± 2^-{prec}", crn::approx_to(&x, prec)?)?;
            Ok(0)
        }
        Command::Machine { op } => {
            match op {
                MachineCommand::Run { prog, input, budget } => {
                    let program = load_program(&prog)?;
                    match machine::run_for(&program, input, budget) {
                        RunOutcome::Halted { steps } => writeln!(out, "halted steps={steps}")?,
                        RunOutcome::StillRunning { budget } => {
                            writeln!(out, "running budget={budget}")?
                        }
                    }
                }
                MachineCommand::Dovetail { prog, inputs, budget } => {
                    if budget == 0 {
                        return Err(Failure::Usage("--budget must be at least 1".into()));
                    }
                    let program = load_program(&prog)?;
                    for (input, steps) in machine::dovetail_enumerate(&program, inputs, budget) {
                        writeln!(out, "input={input} steps={steps}")?;
                    }
                }
            }
            Ok(0)
        }
        Command::Waiting {
            op:
                WaitingCommand::Approx {
                    prog,
                    input,
                    targets,
                    prec,
                },
        } => {
            let program = load_program(&prog)?;
            let w = analysis::waiting_crn(&program, input, &targets);
            writeln!(out, "{} ± 2^-{prec}", crn::approx_to(&w, prec)?)?;
            Ok(0)
        }
        Command::Reduce(args) => {
            let program = load_program(&args.prog)?;
            let reduction = analysis::halting_reduction(
                &program,
                args.input,
                &TargetSequence::geometric(),
                &args.probe,
                args.prec,
            )?;
            match reduction.verdict {
                Verdict::HaltsAt { steps } => writeln!(out, "halts steps={steps}")?,
                Verdict::NoHaltWithin { steps } => writeln!(out, "no-halt-within steps={steps}")?,
            }
            writeln!(out, "approx {}", reduction.approximation)?;
            writeln!(out, "label {}", reduction.label)?;
            Ok(0)
        }
        Command::Bisect(args) => {
            let (_, transcript) =
                analysis::bisect_to_precision(&args.oracle, &args.lo, &args.hi, args.steps)
                    .map_err(|e| match e {
                        analysis::AnalysisError::InvalidInterval { .. } => {
                            Failure::Usage(e.to_string())
                        }
                        other => Failure::Domain(other.to_string()),
                    })?;
            if let Some(path) = &args.transcript {
                fs::write(path, transcript.to_tsv()).map_err(|e| {
                    Failure::Usage(format!("cannot write {}: {e}", path.display()))
                })?;
            }
            let last = transcript.last();
            writeln!(out, "interval {} {}", last.p, last.q)?;
            writeln!(out, "width {}", &last.q - &last.p)?;
            Ok(0)
        }
        Command::Cover { op } => run_cover(op, out),
    }
}

fn run_cover(op: CoverCommand, out: &mut dyn Write) -> Result<i32, Failure> {
    match op {
        CoverCommand::Lebesgue { cover } => {
            let cover = load_cover(&cover)?;
            match cover::lebesgue_number(&cover) {
                Ok(l) => {
                    writeln!(out, "lebesgue {l}")?;
                    Ok(0)
                }
                Err(CoverError::NotACover { x, margin }) => {
                    writeln!(out, "not-a-cover x={x} margin={margin}")?;
                    Ok(1)
                }
                Err(e) => Err(e.into()),
            }
        }
        CoverCommand::Subcover {
            cover,
            modulus,
            samples,
        } => {
            let cover = load_cover(&cover)?;
            let modulus = match modulus {
                ModulusArg::Lebesgue => NiceModulus::lebesgue(&cover),
                ModulusArg::Const(r) => NiceModulus::Constant(r),
            };
            let samples = samples.map_or_else(cover::default_samples, |s| s.0);
            let cert = cover::extract_finite_subcover_with_samples(&cover, &modulus, &samples)?;
            write!(out, "{cert}")?;
            Ok(0)
        }
        CoverCommand::Verify { cover, selected } => {
            let cover = load_cover(&cover)?;
            let selected = cover::parse_index_list(&selected)?;
            match cover::verify_subcover(&cover, &selected)? {
                Coverage::Covered => {
                    writeln!(out, "covered")?;
                    Ok(0)
                }
                Coverage::Uncovered { x } => {
                    writeln!(out, "uncovered {x}")?;
                    Ok(1)
                }
            }
        }
        CoverCommand::VerifyCert { cover, cert } => {
            let cover = load_cover(&cover)?;
            let cert: SubcoverCertificate = read(&cert)?.parse()?;
            let defects = cover::verify_certificate(&cover, &cert);
            if defects.is_empty() {
                writeln!(out, "covered")?;
                Ok(0)
            } else {
                for d in defects {
                    writeln!(out, "{d}")?;
                }
                Ok(1)
            }
        }
    }
}
