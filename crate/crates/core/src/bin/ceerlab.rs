use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ceerlab::experiment::{
    self, list_classes, parse_spec, CeerSpec, ExperimentReport, ProgramSpec, ReductionSpec, RunOptions, SetSpec, EXIT_BUDGET,
    EXIT_INPUT, EXIT_OK,
};
use ceerlab::kernel::{eval, Budget, EvalOutcome, Nat};
use ceerlab::CeerError;

#[derive(Parser)]
#[command(name = "ceerlab", version, about = "Workbench for c.e. equivalence relations and their reductions")]
struct Cli {
    /// Budget as STAGE,FUEL,UNIVERSE.
    #[arg(long, global = true, env = "CEERLAB_DEFAULT_BUDGET", value_parser = parse_budget)]
    budget: Option<Budget>,
    /// Overrides the seed given in a spec.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run program PROGRAM (a code or builtin name) on X within the fuel.
    Eval { program: String, x: String },
    #[command(subcommand)]
    Set(SetCmd),
    #[command(subcommand)]
    Ceer(CeerCmd),
    /// Build the reductions of a spec and print their values on the universe.
    Reduce { spec: String },
    /// Run a spec through the harness; the exit code reflects the verdict.
    Verify { spec: String },
    /// Run a named demo (`--list` to show them).
    Demo {
        name: Option<String>,
        #[arg(long)]
        list: bool,
    },
    /// Run a spec and emit the full report (JSON unless `--format` says otherwise).
    Report { spec: String },
}

#[derive(Subcommand)]
enum SetCmd {
    /// List the members of a set spec within the budget.
    Enum { spec: String },
}

#[derive(Subcommand)]
enum CeerCmd {
    /// Build a ceer spec and print its name and promises.
    Build { spec: String },
    /// List the nontrivial classes within the budget.
    Classes { spec: String },
}

fn parse_budget(s: &str) -> Result<Budget, String> {
    Budget::parse(s).ok_or_else(|| format!("expected STAGE,FUEL,UNIVERSE, got {s:?}"))
}

/// Inline JSON, `-` for stdin, or a file path.
fn load(arg: &str) -> Result<String, String> {
    let t = arg.trim_start();
    if t.starts_with('{') {
        return Ok(arg.to_string());
    }
    if arg == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| e.to_string())?;
        return Ok(s);
    }
    fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializes") + "\n"
}

struct Failure(i32, String);

impl From<CeerError> for Failure {
    fn from(e: CeerError) -> Self {
        let code = if matches!(e, CeerError::BudgetExceeded(_)) { EXIT_BUDGET } else { EXIT_INPUT };
        Failure(code, e.to_string())
    }
}

fn input(msg: impl ToString) -> Failure {
    Failure(EXIT_INPUT, msg.to_string())
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, root: &str) -> Result<T, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let p = e.path().to_string();
        let path = if p == "." { root.to_string() } else { format!("{root}.{p}") };
        input(format!("parse error at {path}: {}", e.into_inner()))
    })
}

fn render(r: &ExperimentReport, fmt: Format) -> String {
    match fmt {
        Format::Json => r.to_json() + "\n",
        Format::Text => r.to_text(),
        Format::Dot => r.to_dot(),
    }
}

fn execute(cli: &Cli) -> Result<(String, i32), Failure> {
    let budget = cli.budget.unwrap_or_default();
    let opts = RunOptions { budget: cli.budget, seed: cli.seed };
    let fmt = |default| cli.format.unwrap_or(default);
    match &cli.cmd {
        Cmd::Eval { program, x } => {
            let spec = match program.parse::<Nat>() {
                Ok(code) => ProgramSpec::Code(code),
                Err(_) => ProgramSpec::Builtin(program.clone()),
            };
            spec.validate("$").map_err(input)?;
            let e = spec.build();
            let x: Nat = x.parse().map_err(|_| input(format!("not a natural number: {x}")))?;
            let out = eval(&e, &x, budget.fuel);
            let code = if matches!(out, EvalOutcome::OutOfFuel) { EXIT_BUDGET } else { EXIT_OK };
            let text = match (fmt(Format::Text), &out) {
                (Format::Json, _) => json(&out),
                (_, EvalOutcome::Converged { value, steps }) => format!("{value} ({steps} steps)\n"),
                (_, EvalOutcome::OutOfFuel) => format!("no value within {} steps\n", budget.fuel),
            };
            Ok((text, code))
        }
        Cmd::Set(SetCmd::Enum { spec }) => {
            let s: SetSpec = parse_json(&load(spec).map_err(input)?, "$")?;
            s.validate("$").map_err(input)?;
            let set = s.build()?;
            let members: Vec<String> = set.members(&budget).iter().map(|m| m.to_string()).collect();
            let text = match fmt(Format::Text) {
                Format::Json => json(&serde_json::json!({"set": set.name(), "budget": budget, "members": members})),
                _ => format!("{}: {}\n", set.name(), members.join(" ")),
            };
            Ok((text, EXIT_OK))
        }
        Cmd::Ceer(c) => {
            let (CeerCmd::Build { spec } | CeerCmd::Classes { spec }) = c;
            let s: CeerSpec = parse_json(&load(spec).map_err(input)?, "$")?;
            s.validate("$").map_err(input)?;
            let r = s.build(&budget)?;
            let text = match c {
                CeerCmd::Build { .. } => match fmt(Format::Text) {
                    Format::Json => json(&serde_json::json!({"name": r.name(), "promises": r.promises()})),
                    _ => format!("{}\n{:?}\n", r.name(), r.promises()),
                },
                CeerCmd::Classes { .. } => {
                    let l = list_classes(&r, &budget);
                    match fmt(Format::Text) {
                        Format::Json => json(&l),
                        _ => {
                            let mut t = format!("{}: {} singletons\n", l.name, l.singletons);
                            for cl in &l.classes {
                                t += &format!("{cl:?}\n");
                            }
                            t
                        }
                    }
                }
            };
            Ok((text, EXIT_OK))
        }
        Cmd::Reduce { spec } => {
            let s = parse_spec(&load(spec).map_err(input)?).map_err(input)?;
            let build = s.build.unwrap_or(budget);
            let mut rows = Vec::new();
            for r in &s.reductions {
                let f = reduction_of(r, &build)?;
                let values: Vec<String> = (0..=budget.universe)
                    .map(|x| f.apply(&Nat::from(x), &budget).map(|v| v.to_string()).unwrap_or_else(|_| "?".into()))
                    .collect();
                rows.push(serde_json::json!({"name": f.name, "values": values}));
            }
            let text = match fmt(Format::Text) {
                Format::Json => json(&rows),
                _ => rows.iter().map(|r| format!("{}: {}\n", r["name"], r["values"])).collect(),
            };
            Ok((text, EXIT_OK))
        }
        Cmd::Verify { spec } => {
            let s = parse_spec(&load(spec).map_err(input)?).map_err(input)?;
            let r = experiment::run(&s, &opts);
            Ok((render(&r, fmt(Format::Text)), r.exit_code))
        }
        Cmd::Report { spec } => {
            let s = parse_spec(&load(spec).map_err(input)?).map_err(input)?;
            let r = experiment::run(&s, &opts);
            Ok((render(&r, fmt(Format::Json)), r.exit_code))
        }
        Cmd::Demo { name, list } => match (name, list) {
            (None, _) | (_, true) => {
                Ok((experiment::DEMOS.iter().map(|(n, _)| format!("{n}\n")).collect(), EXIT_OK))
            }
            (Some(n), false) => {
                let s = experiment::demo(n).ok_or_else(|| input(format!("unknown demo {n:?}")))?;
                let r = experiment::run(&s, &opts);
                Ok((render(&r, fmt(Format::Json)), r.exit_code))
            }
        },
    }
}

fn reduction_of(r: &ReductionSpec, build: &Budget) -> Result<ceerlab::reductions::Reduction, Failure> {
    match r.build(build)? {
        experiment::Built::Map(f) => Ok(f),
        experiment::Built::Witness { witness, source } => Ok(ceerlab::reductions::Reduction::new(
            format!("ψ for {}", source.name()),
            witness.psi,
            source,
            witness.target,
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (text, code) = match execute(&cli) {
        Ok(v) => v,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(code as u8);
        }
    };
    let written = match &cli.out {
        Some(p) => fs::write(p, &text),
        None => io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INPUT as u8);
    }
    ExitCode::from(code as u8)
}
