use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use stv_core::analysis::{bound, check_stv, eval_bound, literal_bound, BoundValue};
use stv_core::interp::{run_observed, NoObserver, Observer, Outcome, RunOptions, TraceWriter};
use stv_core::num_bigint::BigUint;
use stv_core::prc::{compile_pr, pr_input, PrModule};
use stv_core::stdlib;
use stv_core::structure::{
    canonical_form, oplus, parse_structure, print_structure, word_structure, PartialStructure, Term,
};
use stv_core::syntax::{parse_program, pretty_print, Script};
use stv_core::tm::{compile_tm, TuringTransducer};

/// Structure-transformation programs: run, check, bound and generate them.
#[derive(Parser)]
#[command(name = "stv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program on the sum of the given input structures.
    Run {
        program: PathBuf,
        /// Input structure; several are combined left to right.
        #[arg(long = "in", value_name = "FILE")]
        inputs: Vec<PathBuf>,
        /// Keep only these identifiers (comma-separated) and the nodes they reach.
        #[arg(long, value_delimiter = ',')]
        output_vocab: Option<Vec<String>>,
        /// Maximum number of steps.
        #[arg(long)]
        fuel: Option<u64>,
        /// Print one line per revision to standard error.
        #[arg(long)]
        trace: bool,
        /// Print the canonical form instead of the raw structure.
        #[arg(long)]
        canonical: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the variant discipline of a program.
    Check {
        program: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print a program's size bound and its values at sample input sizes.
    Bound {
        program: PathBuf,
        #[arg(long = "sample", value_name = "N")]
        samples: Vec<String>,
        /// Use the bound whose base case counts no revision as growing.
        #[arg(long)]
        literal: bool,
    },
    /// Print a generated program.
    Gen {
        /// One of the names listed by `stv gen --list`.
        #[arg(required_unless_present = "list")]
        name: Option<String>,
        /// Structure whose vocabulary the expansion programs work over.
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long)]
        list: bool,
    },
    /// Compile a definition from a recurrence module.
    CompilePr {
        file: PathBuf,
        #[arg(long = "fn")]
        name: String,
    },
    /// Build the input structure of a compiled recurrence from argument terms.
    PrInput {
        file: PathBuf,
        /// Argument terms, in order.
        args: Vec<String>,
    },
    /// Compile a Turing transducer to an ST program.
    CompileTm { file: PathBuf },
    /// Print the word structure of a string.
    Word {
        word: String,
        /// Alphabet of one-character symbols (comma-separated).
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        alphabet: Vec<String>,
        #[arg(long, default_value = "e")]
        nil: String,
    },
    /// Print the canonical form of a structure.
    Canon { structure: PathBuf },
    /// Compare two structures up to isomorphism of their accessible parts.
    Diff { left: PathBuf, right: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_program(path: &Path) -> Result<Script> {
    parse_program(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_structure(path: &Path) -> Result<PartialStructure> {
    parse_structure(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn render(s: &PartialStructure, canonical: bool) -> String {
    if canonical {
        canonical_form(s).to_string()
    } else {
        print_structure(s)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    program: &Path,
    inputs: &[PathBuf],
    output_vocab: Option<&[String]>,
    fuel: Option<u64>,
    trace: bool,
    canonical: bool,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let script = load_program(program)?;
    let parts = inputs.iter().map(|p| load_structure(p)).collect::<Result<Vec<_>>>()?;
    let input = if parts.is_empty() {
        PartialStructure::new(script.vocab.restricted::<&str>(&[])?)
    } else {
        oplus(&parts)?
    };
    let mut writer = TraceWriter { out: io::stderr() };
    let mut quiet = NoObserver;
    let observer: &mut dyn Observer = if trace { &mut writer } else { &mut quiet };
    let outcome = run_observed(&script, &input, RunOptions { fuel, log_contractions: false }, observer)?;
    match outcome {
        Outcome::Halted { result, trace } => {
            let result = match output_vocab {
                Some(names) => result.reduct(names)?.accessible_part(),
                None => result,
            };
            emit(&render(&result, canonical), out)?;
            eprintln!("{}", trace.summary_line(true));
            Ok(ExitCode::SUCCESS)
        }
        Outcome::FuelExhausted { trace } => {
            eprintln!("{}", trace.summary_line(false));
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_check(program: &Path, as_json: bool) -> Result<ExitCode> {
    let script = load_program(program)?;
    let report = check_stv(&script);
    if as_json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else if report.ok {
        println!("ok");
    } else {
        for v in &report.violations {
            println!("{v}");
        }
    }
    Ok(if report.ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_bound(program: &Path, samples: &[String], literal: bool) -> Result<ExitCode> {
    let script = load_program(program)?;
    let report = check_stv(&script);
    if !report.ok {
        let out = json!({ "ok": false, "violations": report.violations, "bound": null, "samples": [] });
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(ExitCode::from(1));
    }
    let b = if literal { literal_bound(&script) } else { bound(&script)? };
    let cap = BigUint::from(2u32).pow(256);
    let mut values = Vec::new();
    for s in samples {
        let n: BigUint = s.parse().with_context(|| format!("sample `{s}` is not a natural number"))?;
        let v = match eval_bound(&b, &n, Some(&cap)) {
            BoundValue::Value(v) => json!(v.to_string()),
            BoundValue::Overflow => json!("overflow"),
        };
        values.push(json!({ "input": s, "value": v }));
    }
    let out = json!({ "ok": true, "violations": [], "bound": b.to_string(), "samples": values });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(name: Option<&str>, vocab: Option<&Path>, list: bool) -> Result<ExitCode> {
    if list {
        for n in stdlib::PROGRAMS {
            println!("{n}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let name = name.expect("required unless --list");
    let v = vocab.map(load_structure).transpose()?.map(|s| s.vocab().clone());
    let script = stdlib::generate(name, v.as_ref())?;
    print!("{}", pretty_print(&script));
    Ok(ExitCode::SUCCESS)
}

fn cmd_pr_input(file: &Path, args: &[String]) -> Result<ExitCode> {
    let module = PrModule::parse(&read(file)?).with_context(|| format!("in {}", file.display()))?;
    let terms = args
        .iter()
        .map(|a| Term::parse(a).with_context(|| format!("argument `{a}`")))
        .collect::<Result<Vec<_>>>()?;
    print!("{}", print_structure(&pr_input(&module.algebra, &terms)?));
    Ok(ExitCode::SUCCESS)
}

fn cmd_word(word: &str, alphabet: &[String], nil: &str) -> Result<ExitCode> {
    let alpha: Vec<&str> = alphabet.iter().map(String::as_str).collect();
    print!("{}", print_structure(&word_structure(&alpha, nil, word)?));
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { program, inputs, output_vocab, fuel, trace, canonical, out } => {
            cmd_run(&program, &inputs, output_vocab.as_deref(), fuel, trace, canonical, out.as_deref())
        }
        Command::Check { program, json } => cmd_check(&program, json),
        Command::Bound { program, samples, literal } => cmd_bound(&program, &samples, literal),
        Command::Gen { name, vocab, list } => cmd_gen(name.as_deref(), vocab.as_deref(), list),
        Command::CompilePr { file, name } => {
            let module = PrModule::parse(&read(&file)?).with_context(|| format!("in {}", file.display()))?;
            let compiled = compile_pr(&module, &name)?;
            print!("{}", pretty_print(&compiled.script));
            Ok(ExitCode::SUCCESS)
        }
        Command::PrInput { file, args } => cmd_pr_input(&file, &args),
        Command::CompileTm { file } => {
            let m = TuringTransducer::parse(&read(&file)?).with_context(|| format!("in {}", file.display()))?;
            print!("{}", pretty_print(&compile_tm(&m)?.script));
            Ok(ExitCode::SUCCESS)
        }
        Command::Word { word, alphabet, nil } => cmd_word(&word, &alphabet, &nil),
        Command::Canon { structure } => {
            print!("{}", canonical_form(&load_structure(&structure)?));
            Ok(ExitCode::SUCCESS)
        }
        Command::Diff { left, right } => {
            let (a, b) = (load_structure(&left)?, load_structure(&right)?);
            if canonical_form(&a) == canonical_form(&b) {
                println!("equal");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("differ");
                Ok(ExitCode::from(3))
            }
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
