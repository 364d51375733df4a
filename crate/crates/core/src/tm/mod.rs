//! Turing transducers: a text format, a direct simulator, and compilation to
//! ST programs over word structures.
//!
//! The tape is a chain of nodes starting at token `e`. Cell `i` lives at the
//! `i`-th node: it holds symbol `a` when pointer `a` is defined there (always
//! pointing to the next node) and is blank when no symbol pointer is. A
//! separate pointer `nx` links the chain, so erasing a cell keeps later cells
//! reachable, and `r` links it backwards for left moves. States are tokens
//! used as flags: exactly one is defined, at `e`, while the machine runs.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::structure::{read_word, word_structure_with, PartialStructure, StructureError, Vocabulary};
use crate::syntax::{ProgramBuilder, Script, SyntaxError};

/// Blank symbol in the text format and in simulator tapes.
pub const BLANK: char = '_';

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TmError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error("no transition from state `{state}` on `{symbol}`")]
    MissingTransition { state: String, symbol: char },
    #[error("symbol `{0}` is not in the input alphabet")]
    NotInAlphabet(char),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Move {
    Left,
    Right,
    Stay,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transition {
    pub state: String,
    pub write: char,
    pub moves: Move,
}

/// A deterministic one-tape transducer. Symbols are single characters;
/// [`BLANK`] stands for the blank cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TuringTransducer {
    pub states: Vec<String>,
    pub start: String,
    pub print: String,
    pub input: Vec<char>,
    /// Tape symbols other than blank; includes the input alphabet.
    pub tape: Vec<char>,
    pub delta: BTreeMap<(String, char), Transition>,
    /// Whether missing transitions are allowed (and make the machine stuck).
    pub partial: bool,
}

/// Result of running a transducer directly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TmOutcome {
    /// Entered the print state; the tape from the leftmost cell to the last
    /// non-blank one, blanks written as [`BLANK`].
    Printed(String),
    /// Missing transition or left move at the leftmost cell.
    Stuck,
    Timeout,
}

impl TuringTransducer {
    /// Checks the machine: known states and symbols, input within the tape
    /// alphabet, and a transition for every non-print state and symbol
    /// unless the machine is partial.
    pub fn validate(&self) -> Result<(), TmError> {
        let states: BTreeSet<&str> = self.states.iter().map(String::as_str).collect();
        if states.len() != self.states.len() {
            return Err(TmError::Invalid("duplicate state".into()));
        }
        for q in [&self.start, &self.print] {
            if !states.contains(q.as_str()) {
                return Err(TmError::Invalid(format!("unknown state `{q}`")));
            }
        }
        let tape: BTreeSet<char> = self.tape.iter().copied().collect();
        if tape.len() != self.tape.len() || tape.contains(&BLANK) {
            return Err(TmError::Invalid("tape symbols must be distinct and exclude the blank".into()));
        }
        if let Some(a) = self.input.iter().find(|a| !tape.contains(a)) {
            return Err(TmError::Invalid(format!("input symbol `{a}` is not a tape symbol")));
        }
        let known = |a: char| a == BLANK || tape.contains(&a);
        for ((q, a), t) in &self.delta {
            if !states.contains(q.as_str()) || !states.contains(t.state.as_str()) {
                return Err(TmError::Invalid(format!("transition on unknown state from `{q}`")));
            }
            if !known(*a) || !known(t.write) {
                return Err(TmError::Invalid(format!("transition from `{q}` uses an unknown symbol")));
            }
            if *q == self.print {
                return Err(TmError::Invalid("the print state has no transitions".into()));
            }
        }
        if !self.partial {
            for q in self.states.iter().filter(|q| **q != self.print) {
                for a in self.symbols() {
                    if !self.delta.contains_key(&(q.clone(), a)) {
                        return Err(TmError::MissingTransition { state: q.clone(), symbol: a });
                    }
                }
            }
        }
        Ok(())
    }

    /// Tape symbols followed by the blank.
    pub fn symbols(&self) -> impl Iterator<Item = char> + '_ {
        self.tape.iter().copied().chain([BLANK])
    }

    /// Parses the text format:
    ///
    /// ```text
    /// states s,p
    /// start s
    /// print p
    /// input 0,1
    /// tape 0,1,_
    /// delta s,0 -> s,1,R
    /// partial
    /// ```
    pub fn parse(text: &str) -> Result<Self, TmError> {
        let mut m = TuringTransducer {
            states: Vec::new(),
            start: String::new(),
            print: String::new(),
            input: Vec::new(),
            tape: Vec::new(),
            delta: BTreeMap::new(),
            partial: false,
        };
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| TmError::Parse { line, msg };
            let content = raw.split('%').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (kw, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
            let rest = rest.trim();
            if kw != "delta" && !seen.insert(kw.to_string()) {
                return Err(err(format!("repeated `{kw}` line")));
            }
            let list = || rest.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect::<Vec<_>>();
            let symbol = |s: &str| -> Result<char, TmError> {
                let mut cs = s.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => Ok(c),
                    _ => Err(err(format!("`{s}` is not a one-character symbol"))),
                }
            };
            match kw {
                "states" => m.states = list(),
                "start" => m.start = rest.to_string(),
                "print" => m.print = rest.to_string(),
                "input" => m.input = list().iter().map(|s| symbol(s)).collect::<Result<_, _>>()?,
                "tape" => {
                    m.tape = list().iter().map(|s| symbol(s)).filter(|c| c.as_ref().ok() != Some(&BLANK)).collect::<Result<_, _>>()?
                }
                "partial" if rest.is_empty() => m.partial = true,
                "delta" => {
                    let (lhs, rhs) = rest.split_once("->").ok_or_else(|| err("expected `->`".into()))?;
                    let l: Vec<&str> = lhs.split(',').map(str::trim).collect();
                    let r: Vec<&str> = rhs.split(',').map(str::trim).collect();
                    let ([q, a], [q2, b, mv]) = (l.as_slice(), r.as_slice()) else {
                        return Err(err("expected `delta q,a -> q',b,M`".into()));
                    };
                    let moves = match *mv {
                        "L" => Move::Left,
                        "R" => Move::Right,
                        "S" => Move::Stay,
                        _ => return Err(err(format!("unknown move `{mv}`"))),
                    };
                    let t = Transition { state: q2.to_string(), write: symbol(b)?, moves };
                    if m.delta.insert((q.to_string(), symbol(a)?), t).is_some() {
                        return Err(err(format!("two transitions from `{q}` on `{a}`")));
                    }
                }
                _ => return Err(err(format!("unknown line `{kw}`"))),
            }
        }
        m.validate()?;
        Ok(m)
    }

    fn alphabet(&self) -> Vec<(char, String)> {
        self.input.iter().map(|c| (*c, c.to_string())).collect()
    }

    /// The input structure for `w`: the word structure over `e` and the
    /// input symbols.
    pub fn input_structure(&self, w: &str) -> Result<PartialStructure, TmError> {
        if let Some(c) = w.chars().find(|c| !self.input.contains(c)) {
            return Err(TmError::NotInAlphabet(c));
        }
        let alpha = self.alphabet();
        let pairs: Vec<(char, &str)> = alpha.iter().map(|(c, s)| (*c, s.as_str())).collect();
        Ok(word_structure_with(&pairs, "e", w)?)
    }

    /// Identifiers of the compiled program's output: `e` and the input
    /// symbols.
    pub fn output_names(&self) -> Vec<String> {
        std::iter::once("e".to_string()).chain(self.input.iter().map(|c| c.to_string())).collect()
    }

    /// Word read from a compiled program's output; `None` if `e` is
    /// undefined (the machine got stuck).
    pub fn decode(&self, s: &PartialStructure) -> Option<String> {
        let alpha = self.alphabet();
        let pairs: Vec<(char, &str)> = alpha.iter().map(|(c, s)| (*c, s.as_str())).collect();
        read_word(s, &pairs, "e")
    }

    /// The word a printed tape denotes: its longest prefix of input symbols.
    pub fn output_word(&self, tape: &str) -> String {
        tape.chars().take_while(|c| self.input.contains(c)).collect()
    }
}

/// Runs the machine on `w` for at most `fuel` transitions.
pub fn simulate_tm(m: &TuringTransducer, w: &str, fuel: u64) -> TmOutcome {
    let mut tape: Vec<char> = w.chars().collect();
    let mut head = 0usize;
    let mut state = m.start.clone();
    let mut steps = 0;
    loop {
        if state == m.print {
            let mut out: String = tape.iter().collect();
            out.truncate(out.trim_end_matches(BLANK).len());
            return TmOutcome::Printed(out);
        }
        if steps == fuel {
            return TmOutcome::Timeout;
        }
        steps += 1;
        if head == tape.len() {
            tape.push(BLANK);
        }
        let Some(t) = m.delta.get(&(state.clone(), tape[head])) else {
            return TmOutcome::Stuck;
        };
        tape[head] = t.write;
        match t.moves {
            Move::Left if head == 0 => return TmOutcome::Stuck,
            Move::Left => head -= 1,
            Move::Right => head += 1,
            Move::Stay => {}
        }
        state = t.state.clone();
    }
}

/// Identifiers of a compiled machine besides `e` and the symbols.
#[derive(Debug, Clone, Serialize)]
pub struct TmNames {
    pub cursor: String,
    pub back: String,
    pub next: String,
    pub stuck: String,
    /// Token of each state.
    pub states: BTreeMap<String, String>,
}

/// An ST program simulating the machine on word structures.
#[derive(Debug, Clone)]
pub struct CompiledTm {
    pub script: Script,
    pub names: TmNames,
}

/// Compiles the machine. The program turns the input word into the initial
/// configuration, revises the configuration once per main-loop pass while
/// neither the print state nor the stuck flag is set, and finally makes `e`
/// undefined if the machine got stuck. The output (see
/// [`TuringTransducer::output_names`]) spells the longest prefix of input
/// symbols on the final tape.
pub fn compile_tm(m: &TuringTransducer) -> Result<CompiledTm, TmError> {
    m.validate()?;
    let mut v = Vocabulary::new();
    v.add_function("e", 0)?;
    for a in &m.tape {
        v.add_function(&a.to_string(), 1)?;
    }
    let mut b = ProgramBuilder::new(v);
    let c = b.fresh_fn("c", 0);
    let r = b.fresh_fn("r", 1);
    let nx = b.fresh_fn("nx", 1);
    let stuck = b.fresh_fn("stuck", 0);
    let states: BTreeMap<String, String> = m.states.iter().map(|q| (q.clone(), b.fresh_fn(&format!("state.{q}"), 0))).collect();
    let syms: Vec<String> = m.tape.iter().map(|a| a.to_string()).collect();
    let inputs: Vec<String> = m.input.iter().map(|a| a.to_string()).collect();

    // Initial configuration: link the chain with `nx` and `r`.
    let any_input = inputs.iter().map(|a| format!("def {a}({c})")).collect::<Vec<_>>().join(" or ");
    let link = inputs.iter().map(|a| format!("if [def {a}({c})] {{ {nx}({c}) <- {a}({c}) }}")).collect::<Vec<_>>().join("\n");
    b.push(&format!("{c} := e; {} <- e", states[&m.start]))?;
    if !inputs.is_empty() {
        b.push(&format!("do [def {c} and ({any_input})] {{ {link}\n {r}({nx}({c})) <- {c}; {c} := {nx}({c}) }}"))?;
    }
    b.push(&format!("{c} := e"))?;

    let grow = format!("if [not def {nx}({c})] {{ new {nx}({c}); {r}({nx}({c})) <- {c} }}");
    let mut chain = format!("{stuck} <- e");
    let mut cases: Vec<(String, char)> = Vec::new();
    for q in m.states.iter().filter(|q| **q != m.print) {
        for a in m.symbols() {
            cases.push((q.clone(), a));
        }
    }
    for (q, a) in cases.into_iter().rev() {
        let Some(t) = m.delta.get(&(q.clone(), a)) else { continue };
        let read = if a == BLANK {
            let any = syms.iter().map(|s| format!("def {s}({c})")).collect::<Vec<_>>().join(" or ");
            if any.is_empty() { "true".to_string() } else { format!("not ({any})") }
        } else {
            format!("def {a}({c})")
        };
        let mut act = Vec::new();
        if a != BLANK {
            act.push(format!("drop {a}({c})"));
        }
        if t.write != BLANK {
            act.push(grow.clone());
            act.push(format!("{}({c}) <- {nx}({c})", t.write));
        }
        match t.moves {
            Move::Right => {
                act.push(grow.clone());
                act.push(format!("{c} := {nx}({c})"));
            }
            Move::Left => act.push(format!("if [def {r}({c})] {{ {c} := {r}({c}) }} {{ {stuck} <- e }}")),
            Move::Stay => {}
        }
        if t.state != q {
            act.push(format!("drop {}; {} <- e", states[&q], states[&t.state]));
        }
        chain = format!("if [def {} and {read}] {{ {} }} {{ {chain} }}", states[&q], act.join("\n"));
    }
    b.push(&format!("do [not def {} and not def {stuck}] {{ {chain} }}", states[&m.print]))?;
    b.push(&format!("if [def {stuck}] {{ drop e }}"))?;

    Ok(CompiledTm { script: b.build(), names: TmNames { cursor: c, back: r, next: nx, stuck, states } })
}

/// Machines used in examples and tests.
pub mod machines {
    use super::TuringTransducer;

    /// Prints its input unchanged.
    pub const IDENTITY: &str = "states p\nstart p\nprint p\ninput 0,1\ntape 0,1,_\n";

    /// Appends a `1` to a unary numeral.
    pub const UNARY_SUCCESSOR: &str = "states s,p
start s
print p
input 1
tape 1,_
delta s,1 -> s,1,R
delta s,_ -> p,1,S
";

    /// Complements every bit.
    pub const BIT_FLIP: &str = "states s,p
start s
print p
input 0,1
tape 0,1,_
delta s,0 -> s,1,R
delta s,1 -> s,0,R
delta s,_ -> p,_,S
";

    /// Overwrites the last symbol with `0`, stepping back with a left
    /// move; stuck on the empty word.
    pub const ZERO_LAST: &str = "states s,b,p
start s
print p
input 0,1
tape 0,1,_
delta s,0 -> s,0,R
delta s,1 -> s,1,R
delta s,_ -> b,_,L
delta b,0 -> p,0,S
delta b,1 -> p,0,S
delta b,_ -> p,_,S
";

    pub fn load(text: &str) -> TuringTransducer {
        TuringTransducer::parse(text).expect("built-in machine is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::machines::*;
    use super::*;
    use crate::interp::{run_transducer, RunOptions};

    fn compiled_output(m: &TuringTransducer, w: &str) -> Option<String> {
        let c = compile_tm(m).unwrap();
        let out = run_transducer(&c.script, &m.input_structure(w).unwrap(), &m.output_names(), Some(1_000_000)).unwrap();
        m.decode(&out)
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(simulate_tm(&load(UNARY_SUCCESSOR), "111", 100), TmOutcome::Printed("1111".into()));
        assert_eq!(simulate_tm(&load(BIT_FLIP), "0110", 100), TmOutcome::Printed("1001".into()));
        assert_eq!(simulate_tm(&load(IDENTITY), "01", 100), TmOutcome::Printed("01".into()));
        let m = load(ZERO_LAST);
        assert_eq!(simulate_tm(&m, "011", 100), TmOutcome::Printed("010".into()));
        assert_eq!(simulate_tm(&m, "", 100), TmOutcome::Stuck);
        assert_eq!(simulate_tm(&load(UNARY_SUCCESSOR), "111", 2), TmOutcome::Timeout);
    }

    #[test]
    fn compiled_matches_oracle() {
        for text in [IDENTITY, UNARY_SUCCESSOR, BIT_FLIP, ZERO_LAST] {
            let m = load(text);
            for w in ["", "1", "11", "0110", "111111"] {
                if w.chars().any(|c| !m.input.contains(&c)) {
                    continue;
                }
                let want = match simulate_tm(&m, w, 10_000) {
                    TmOutcome::Printed(tape) => Some(m.output_word(&tape)),
                    TmOutcome::Stuck => None,
                    TmOutcome::Timeout => unreachable!(),
                };
                assert_eq!(compiled_output(&m, w), want, "{text} on {w}");
            }
        }
        assert_eq!(compiled_output(&load(ZERO_LAST), ""), None);
    }

    #[test]
    fn compiled_program_is_plain_st() {
        let c = compile_tm(&load(BIT_FLIP)).unwrap();
        assert!(c.script.is_plain_st());
        let input = load(BIT_FLIP).input_structure("01").unwrap();
        assert!(crate::interp::run(&c.script, &input, RunOptions::with_fuel(3)).unwrap().halted().is_none());
    }

    #[test]
    fn format_errors() {
        assert!(matches!(TuringTransducer::parse("states s\nstart s\nprint q\n"), Err(TmError::Invalid(_))));
        let missing = "states s,p\nstart s\nprint p\ninput 1\ntape 1\ndelta s,1 -> s,1,R\n";
        assert!(matches!(TuringTransducer::parse(missing), Err(TmError::MissingTransition { .. })));
        assert!(TuringTransducer::parse(&format!("{missing}partial\n")).is_ok());
        assert!(matches!(TuringTransducer::parse("states s\nbogus\n"), Err(TmError::Parse { line: 2, .. })));
        assert!(matches!(TuringTransducer::parse("states s,p\nstart s\nprint p\ndelta s,1 -> s,1\n"), Err(TmError::Parse { .. })));
    }
}
